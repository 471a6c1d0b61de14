"""Moment statistics of central-value samples and Gaussian diagnostics.

Normalization convention: dividing a sample at conductor scale c(r) by
(C_f log c(r))^(1/2) makes real and imaginary parts each asymptotically
standard normal, so E|z|^2 -> 2 and E|z|^(2n) -> 2^n n!.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr

from .forms import volume


def _fsum_complex(values) -> complex:
    return complex(math.fsum(v.real for v in values),
                   math.fsum(v.imag for v in values))


def moment_sum(samples, m: int, n: int) -> complex:
    """sum over samples of value^m * conj(value)^n, exactly-rounded
    accumulation (order independent)."""
    if m < 0 or n < 0:
        raise ValueError("moment orders must be nonnegative")
    if m + n > 8:
        raise ValueError("moment order m+n > 8 exceeds the accuracy budget")
    return _fsum_complex(
        s.value ** m * s.value.conjugate() ** n for s in samples)


def leading_coefficient(q: int, k: int, variance_slope: float, orbit,
                        n: int) -> float:
    """Predicted leading coefficient of the degree-n moment polynomial:
    2^n n! C_f^n / (pi vol) for the infinity orbit, q (2 C_f)^n n!/(pi vol)
    for the zero orbit under the plain-c cutoff."""
    from .twist_eval import Orbit

    vol = volume(q)
    base = 2 ** n * math.factorial(n) * variance_slope ** n / (math.pi * vol)
    return base * q if orbit is Orbit.ZERO else base


@dataclass
class SlopeFit:
    n: int
    X_grid: list
    coefficients: list          # fitted poly in log X, highest degree first
    leading_target: float
    ratio: float
    residual: float


def slope_fit(samples, X_grid, n: int, q: int, k: int,
              variance_slope: float, orbit) -> SlopeFit:
    """Least-squares fit of M_2n(X)/X^2 against a degree-n polynomial in
    log X; only the leading coefficient is compared to the prediction.

    The cutoff variable is the plain denominator c for both orbits (the
    zero-orbit moment statement is stated with c <= X)."""
    X_grid = sorted(X_grid)
    if n > 0 and (len(X_grid) < n + 2 or X_grid[-1] < 2 * X_grid[0]):
        raise ValueError(f"grid too small for a degree-{n} fit: need >= "
                         f"{n + 2} values spanning a factor >= 2")
    ys = []
    for X in X_grid:
        sel = [s for s in samples if s.point.c <= X]
        ys.append(abs(moment_sum(sel, n, n)) / X ** 2)
    lx = np.log(np.array(X_grid, dtype=float))
    V = np.vander(lx, n + 1)
    coeffs, res, *_ = np.linalg.lstsq(V, np.array(ys), rcond=None)
    target = leading_coefficient(q, k, variance_slope, orbit, n)
    residual = float(np.sqrt(res[0])) if len(res) else 0.0
    return SlopeFit(n, list(X_grid), [float(c) for c in coeffs],
                    target, float(coeffs[0]) / target, residual)


DEFAULT_BOXES = (
    (-1.0, 1.0, -1.0, 1.0),
    (0.0, math.inf, 0.0, math.inf),
    (-math.inf, 0.0, -math.inf, math.inf),
)


def ks_statistic(data: np.ndarray) -> float:
    """Kolmogorov-Smirnov distance of data to the standard normal."""
    x = np.sort(np.asarray(data, dtype=float))
    n = len(x)
    cdf = ndtr(x)
    up = np.arange(1, n + 1) / n
    lo = np.arange(0, n) / n
    return float(np.max(np.maximum(np.abs(up - cdf), np.abs(cdf - lo))))


def gaussian_probability(box) -> float:
    x1, x2, y1, y2 = box
    px = ndtr(x2) - ndtr(x1)
    py = ndtr(y2) - ndtr(y1)
    return float(px * py)


@dataclass
class MomentReport:
    X: float
    count: int
    count_normalized: int
    raw_moments: dict
    normalized_moments: dict
    ks_re: float
    ks_im: float
    box_probs: list
    degenerate: bool = False
    slope: SlopeFit | None = None

    def to_json(self) -> str:
        d = {
            "X": self.X,
            "count": self.count,
            "count_normalized": self.count_normalized,
            "raw_moments": {f"{m},{n}": [v.real, v.imag]
                            for (m, n), v in sorted(self.raw_moments.items())},
            "normalized_moments": {f"{m},{n}": [v.real, v.imag]
                                   for (m, n), v in
                                   sorted(self.normalized_moments.items())},
            "ks_re": self.ks_re,
            "ks_im": self.ks_im,
            "box_probs": [{"box": [b if math.isfinite(b) else
                                   ("inf" if b > 0 else "-inf") for b in box],
                           "empirical": emp, "gaussian": gauss}
                          for box, emp, gauss in self.box_probs],
            "degenerate": self.degenerate,
        }
        if self.slope is not None:
            d["slope_fit"] = {
                "n": self.slope.n, "X_grid": self.slope.X_grid,
                "coefficients": self.slope.coefficients,
                "leading_target": self.slope.leading_target,
                "ratio": self.slope.ratio,
            }
        return json.dumps(d, sort_keys=True, indent=1)


def gaussian_report(samples, variance_slope: float, X: float | None = None,
                    boxes=DEFAULT_BOXES, min_samples: int = 500,
                    slope: SlopeFit | None = None) -> MomentReport:
    """Distribution diagnostics of normalized samples against the standard
    complex normal.  Samples with c(r) <= 2 are excluded from normalized
    statistics (log c too small) but kept in the raw moments."""
    samples = list(samples)
    if len(samples) < min_samples:
        raise ValueError(f"need >= {min_samples} samples, got {len(samples)}")
    if X is None:
        X = max(s.point.c_r for s in samples)
    raw = {(m, n): moment_sum(samples, m, n)
           for m in range(4) for n in range(4) if m + n <= 4}

    kept = [s for s in samples if s.point.c_r > 2.0]
    z = np.array([s.value / math.sqrt(variance_slope * math.log(s.point.c_r))
                  for s in kept])
    normalized = {}
    for m in range(4):
        for n in range(4):
            if 0 < m + n <= 6 and (m + n) % 2 == 0:
                normalized[(m, n)] = _fsum_complex(
                    z ** m * np.conj(z) ** n) / len(z)
    degenerate = bool(np.max(np.abs(z)) < 1e-12) if len(z) else True
    ks_re = ks_statistic(z.real)
    ks_im = ks_statistic(z.imag)
    box_rows = []
    for box in boxes:
        x1, x2, y1, y2 = box
        inside = np.mean((z.real >= x1) & (z.real <= x2)
                         & (z.imag >= y1) & (z.imag <= y2))
        box_rows.append((box, float(inside), gaussian_probability(box)))
    return MomentReport(float(X), len(samples), len(kept), raw, normalized,
                        ks_re, ks_im, box_rows, degenerate, slope)


@dataclass
class DyadicRow:
    c_lo: float
    c_hi: float
    count: int
    max_abs: float
    ratios: dict = field(default_factory=dict)


def lindelof_scan(samples, thetas=(0.25, 0.1)) -> list:
    """max |L| per dyadic c(r) range, with per-sample max of |L|/c(r)^theta;
    rows ordered from the smallest range to the largest."""
    samples = list(samples)
    if not samples:
        return []
    top = max(s.point.c_r for s in samples)
    edges = [top]
    while edges[-1] > 2.0:
        edges.append(edges[-1] / 2)
    rows = []
    for hi, lo in zip(edges[:-1], edges[1:]):
        sel = [s for s in samples if lo < s.point.c_r <= hi]
        if not sel:
            continue
        row = DyadicRow(lo, hi, len(sel), max(abs(s.value) for s in sel))
        for th in thetas:
            row.ratios[th] = max(abs(s.value) / s.point.c_r ** th for s in sel)
        rows.append(row)
    return rows[::-1]


def lindelof_top_nonincreasing(rows, theta: float = 0.25, top: int = 3) -> bool:
    """True when the ratio column is non-increasing over the `top` largest
    dyadic ranges (growth like c^theta would violate this)."""
    vals = [row.ratios[theta] for row in rows[-top:]]
    return all(vals[i] >= vals[i + 1] for i in range(len(vals) - 1))


def dirichlet_partial(samples, m: int, n: int, s: complex, X: float) -> complex:
    """Partial sum over c(r) <= X of L^m conj(L)^n / c(r)^(2s)."""
    return _fsum_complex(
        smp.value ** m * smp.value.conjugate() ** n
        * complex(smp.point.c_r) ** (-2 * complex(s))
        for smp in samples if smp.point.c_r <= X)


def histogram_csv(values, bins: int = 60, lo: float = -4.0, hi: float = 4.0) -> str:
    """(bin_center, count) CSV for external plotting."""
    counts, edges = np.histogram(np.asarray(values, dtype=float),
                                 bins=bins, range=(lo, hi))
    centers = 0.5 * (edges[:-1] + edges[1:])
    lines = ["bin_center,count"]
    lines += [f"{c:.6f},{int(k)}" for c, k in zip(centers, counts)]
    return "\n".join(lines) + "\n"
