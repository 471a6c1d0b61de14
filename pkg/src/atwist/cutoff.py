"""Mellin-transform cutoff machinery: smooth main terms from pole data,
bump mollifiers for sharp cutoffs, and the delta-balanced error exponent.

For a Dirichlet series D(s) = sum a_n / c_n^s with poles s_m of order d_m
and principal Laurent coefficients b_{m,j} (j = 1..d_m), a smooth weight
psi gives

  sum_n a_n psi(c_n/X) = sum_m P_m(log X) X^{s_m} + O(X^a integral |psi^(a+it)|(1+|t|)^A dt),
  P_m(x) = sum_{k=0}^{d_m-1} x^k/k! sum_{l=0}^{d_m-1-k} psihat^(l)(s_m)/l! b_{m,k+l+1}.

(The k-sum necessarily starts at k = 0: a simple pole contributes the
constant psihat(s_m) b_{m,1}, which the divisor and zeta fixtures pin
down.)  Sharp cutoffs replace psihat^(l)(s_m) by its indicator limit
(-1)^l l!/s_m^(l+1) and balance the mollifier width at
delta = X^-((sigma0-a)/(1+A)), giving the error exponent
max((a + sigma0 A)/(1 + A), Re s_1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .arith import divisor_count_sieve

EULER_GAMMA = 0.577215664901533  # 15 digits

_GL_NODES = 160
_gl_x, _gl_w = np.polynomial.legendre.leggauss(_GL_NODES)


def _bump_raw(t):
    t = np.asarray(t, dtype=float)
    inside = np.abs(t) < 1.0
    out = np.zeros_like(t)
    tt = np.where(inside, t, 0.0)
    out[inside] = np.exp(-1.0 / (1.0 - tt**2))[inside]
    return out


def _bump_norm() -> float:
    v = 0.5 * np.sum(_gl_w * _bump_raw(_gl_x)) * 2.0
    # one refinement as a guard; the integrand is smooth and flat-ended
    x2, w2 = np.polynomial.legendre.leggauss(2 * _GL_NODES)
    v2 = 0.5 * np.sum(w2 * _bump_raw(x2)) * 2.0
    if abs(v - v2) > 1e-12 * abs(v2):
        raise ArithmeticError("bump normalization did not reach 1e-12")
    return float(v2)


BUMP_NORM = _bump_norm()


def bump_density(t):
    """The normalized bump exp(-1/(1-t^2))/norm on (-1, 1)."""
    return _bump_raw(t) / BUMP_NORM


def bump_cdf(u):
    """Phi(u) = int_{-1}^u of the normalized bump, vectorized."""
    u = np.asarray(u, dtype=float)
    out = np.clip((u + 1.0) / 2.0, 0.0, 1.0)  # placeholder shape
    res = np.zeros_like(u)
    res[u >= 1.0] = 1.0
    mid = (u > -1.0) & (u < 1.0)
    if np.any(mid):
        um = u[mid]
        half = (um + 1.0) / 2.0
        t = -1.0 + half[:, None] * (_gl_x[None, :] + 1.0)
        vals = _bump_raw(t)
        res[mid] = half * np.sum(_gl_w[None, :] * vals, axis=1) / BUMP_NORM
    return res if res.shape else float(res)


@dataclass
class TestFunction:
    """A cutoff weight on [0, inf): smooth and compactly supported, equal
    to 1 on [0, plateau] and 0 beyond `support`."""

    fn: object
    support: float
    plateau: float = 0.0
    name: str = "psi"
    derivative: object = None
    derivative_is_fd: bool = False

    def __call__(self, y):
        return self.fn(np.asarray(y, dtype=float))

    def deriv(self, y, order: int = 1):
        if order == 1 and self.derivative is not None:
            return self.derivative(np.asarray(y, dtype=float))
        h = 1e-5
        y = np.asarray(y, dtype=float)
        # central differences, order <= 8 supported through nesting
        if order == 1:
            return (self(y + h) - self(y - h)) / (2 * h)
        return (self.deriv(y + h, order - 1) - self.deriv(y - h, order - 1)) / (2 * h)


def smooth_bump() -> TestFunction:
    """exp(-1/(1-(y-1)^2)) on (0, 2), the standard smooth test input."""

    def fn(y):
        return _bump_raw(y - 1.0)

    def d1(y):
        y = np.asarray(y, dtype=float)
        t = y - 1.0
        inside = np.abs(t) < 1.0
        out = np.zeros_like(t)
        tt = np.where(inside, t, 0.0)
        out[inside] = (_bump_raw(tt) * (-2.0 * tt) / (1.0 - tt**2) ** 2)[inside]
        return out

    return TestFunction(fn, support=2.0, plateau=0.0, name="bump", derivative=d1)


def indicator_reference() -> TestFunction:
    """1_[0,1]: not smooth; admitted as a reference input whose Mellin
    transform is exactly 1/s."""
    def fn(y):
        y = np.asarray(y, dtype=float)
        return (y <= 1.0).astype(float)

    return TestFunction(fn, support=1.0, plateau=1.0, name="indicator")


def mollifier(delta: float, sign: int) -> TestFunction:
    """psi_{delta,+-}(y) = int 1_[0, 1 +- delta](y t) phi_delta(t - 1) dt
    = Phi(((1 +- delta)/y - 1)/delta).

    psi_+ is 1 below y = 1 with support [0, (1+delta)/(1-delta)];
    psi_- vanishes above y = 1 and is 1 below (1-delta)/(1+delta)."""
    if not 0 < delta < 0.5:
        raise ValueError("mollifier width must satisfy 0 < delta < 1/2")
    if sign not in (+1, -1):
        raise ValueError("sign must be +1 or -1")
    edge = 1.0 + sign * delta

    def fn(y):
        y = np.asarray(y, dtype=float)
        out = np.zeros_like(y)
        pos = y > 0
        u = np.full_like(y, -2.0)
        u[pos] = (edge / y[pos] - 1.0) / delta
        out[pos] = bump_cdf(u[pos])
        out[~pos] = 1.0  # y = 0 sits inside every plateau
        return out

    def d1(y):
        y = np.asarray(y, dtype=float)
        out = np.zeros_like(y)
        pos = y > 0
        u = np.where(pos, (edge / np.where(pos, y, 1.0) - 1.0) / delta, -2.0)
        out[pos] = (bump_density(u) * (-edge / (delta * y**2)))[pos]
        return out

    return TestFunction(fn, support=edge / (1.0 - delta),
                        plateau=edge / (1.0 + delta),
                        name=f"mollifier{'+' if sign > 0 else '-'}({delta:g})",
                        derivative=d1)


# ---------------------------------------------------------------------------
# Mellin transforms


def mellin(psi: TestFunction, s: complex, log_power: int = 0,
           tol: float = 1e-11) -> complex:
    """int_0^R psi(y) y^(s-1) (log y)^log_power dy for Re s > 0.

    The plateau piece [0, plateau] where psi = 1 integrates in closed form
    (avoids the y -> 0 log singularity); the rest is adaptive quadrature.
    """
    s = complex(s)
    if s.real <= 0:
        raise ValueError("Mellin transform requires Re s > 0")
    a = psi.plateau
    total = 0.0 + 0.0j
    if a > 0:
        # d^l/ds^l (a^s / s) = a^s sum_i C(l,i) (ln a)^(l-i) (-1)^i i! s^-(i+1)
        la = math.log(a)
        for i in range(log_power + 1):
            total += (math.comb(log_power, i) * la ** (log_power - i)
                      * (-1) ** i * math.factorial(i)
                      * a ** complex(s) / s ** (i + 1))
    lo, hi = a, psi.support
    if hi > lo:
        def integrand(y, part):
            w = float(psi(y)) * y ** (s.real - 1.0)
            if log_power:
                w *= math.log(y) ** log_power
            phase = s.imag * math.log(y) if s.imag else 0.0
            z = w * complex(math.cos(phase), math.sin(phase))
            return z.real if part == 0 else z.imag

        # one interior breakpoint helps quad across the plateau edge
        pieces = [lo, min(hi, max(lo * 1.0 + 1e-12, (lo + hi) / 2)), hi]
        re = im = 0.0
        for x0, x1 in zip(pieces[:-1], pieces[1:]):
            if x1 <= x0:
                continue
            r, _ = quad(integrand, x0, x1, args=(0,), epsabs=tol,
                        epsrel=tol, limit=300)
            i, _ = quad(integrand, x0, x1, args=(1,), epsabs=tol,
                        epsrel=tol, limit=300)
            re += r
            im += i
        total += complex(re, im)
    return total


# ---------------------------------------------------------------------------
# Cutoff problems


@dataclass(frozen=True)
class PoleData:
    s: complex
    order: int
    laurent: tuple  # (b_1, ..., b_order); b_j multiplies (s - s_m)^-j

    def __post_init__(self):
        if self.order < 1 or len(self.laurent) != self.order:
            raise ValueError("need exactly `order` Laurent coefficients")


@dataclass
class CutoffProblem:
    """A Dirichlet series sum a_n / c_n^s described by its analytic data.

    coefficients(nmax) yields (a_n, c_n) arrays; sigma0 is the abscissa of
    absolute convergence, a_floor the contour to shift to, growth_A the
    vertical growth exponent, poles the singular expansion data sorted by
    descending real part."""

    name: str
    coefficients: object
    sigma0: float
    a_floor: float
    growth_A: float
    poles: list = field(default_factory=list)
    nonnegative: bool = True
    boundary_ok: bool = False   # extra assumption for signed coefficients

    def sharp_sum(self, X: float) -> float:
        a, c = self.coefficients(int(math.floor(X + 1e-9)) + 1)
        return float(np.sum(a[c <= X]))

    def smooth_sum(self, psi: TestFunction, X: float) -> float:
        nmax = int(math.ceil(psi.support * X)) + 1
        a, c = self.coefficients(nmax)
        sel = c <= psi.support * X
        return float(np.sum(a[sel] * psi(c[sel] / X)))


def smooth_main_term(problem: CutoffProblem, psi: TestFunction, X: float) -> complex:
    """sum_m P_m(log X) X^{s_m} with the explicit polynomials from the
    singular expansion and the Mellin derivatives of psi."""
    x = math.log(X)
    total = 0.0 + 0.0j
    for pole in problem.poles:
        dm = pole.order
        psihat = [mellin(psi, pole.s, log_power=ell) for ell in range(dm)]
        P = 0.0 + 0.0j
        for k in range(dm):
            inner = sum(psihat[ell] / math.factorial(ell)
                        * pole.laurent[k + ell]          # b_{k+ell+1}
                        for ell in range(dm - k))
            P += x ** k / math.factorial(k) * inner
        total += P * X ** complex(pole.s)
    return total


def sharp_main_polynomial(problem: CutoffProblem) -> list:
    """Coefficients [p_0, p_1, ...] of P(x) for the sharp cutoff at the
    leading pole: psihat^(l)(s0) -> (-1)^l l! / s0^(l+1)."""
    if not problem.poles:
        return [0.0]
    pole = problem.poles[0]
    s0 = pole.s
    dm = pole.order
    coeffs = []
    for k in range(dm):
        inner = sum((-1) ** ell / s0 ** (ell + 1) * pole.laurent[k + ell]
                    for ell in range(dm - k))
        coeffs.append(inner / math.factorial(k))
    return coeffs


def sharp_cutoff_estimate(problem: CutoffProblem, X: float):
    """(main term P(log X) X^{s0}, predicted error exponent).

    Signed coefficients are refused unless the problem carries the
    boundary-mass flag."""
    if not problem.nonnegative and not problem.boundary_ok:
        raise ValueError("sharp cutoff needs nonnegative coefficients or the "
                         "boundary_ok flag")
    exponent = balanced_error_exponent(problem)
    if not problem.poles:
        return 0.0, exponent
    coeffs = sharp_main_polynomial(problem)
    x = math.log(X)
    P = sum(c * x ** k for k, c in enumerate(coeffs))
    return complex(P * X ** complex(problem.poles[0].s)), exponent


def balanced_error_exponent(problem: CutoffProblem) -> float:
    """max((a + sigma0 A)/(1 + A), Re s_1) with s_1 the second-listed pole."""
    base = (problem.a_floor + problem.sigma0 * problem.growth_A) \
        / (1.0 + problem.growth_A)
    secondary = max((p.s.real if isinstance(p.s, complex) else p.s
                     for p in problem.poles[1:]), default=-math.inf)
    return max(base, secondary)


def balanced_delta(problem: CutoffProblem, X: float) -> float:
    return X ** (-(problem.sigma0 - problem.a_floor) / (1.0 + problem.growth_A))


def mollified_sharp_errors(problem: CutoffProblem, X_values) -> list:
    """Realized error of the delta-balanced mollifier approximation to the
    sharp sum: rows (X, delta, err) with
    err = max over +- of |sum a_n psi_{delta,+-}(c_n/X) - sum_{c_n<=X} a_n|.

    The log-log slope of err tracks the balanced exponent (the boundary
    coefficient mass delta X^{sigma0+eps} dominates at desk scale)."""
    rows = []
    for X in X_values:
        delta = min(0.49, balanced_delta(problem, X))
        sharp = problem.sharp_sum(X)
        errs = []
        for sign in (+1, -1):
            psi = mollifier(delta, sign)
            errs.append(abs(problem.smooth_sum(psi, X) - sharp))
        rows.append((X, delta, max(errs)))
    return rows


def smooth_moment(samples, psi: TestFunction, X: float, n: int) -> float:
    """sum over samples of psi(c(r)/X) |L|^(2n)."""
    return float(math.fsum(
        float(psi(s.point.c_r / X)) * abs(s.value) ** (2 * n)
        for s in samples if s.point.c_r <= psi.support * X))


def predicted_smooth_moment_leading(psi: TestFunction, X: float, n: int,
                                    variance_slope: float, vol: float) -> float:
    """Leading (log X)^n piece of the smooth 2n-th moment: the generating
    series in the conductor-scale variable has a pole at 2 of order n+1
    with top Laurent coefficient 2^(n+1) (n!)^2 C_f^n / (pi vol)."""
    b_top = 2 ** (n + 1) * math.factorial(n) ** 2 * variance_slope ** n \
        / (math.pi * vol)
    psihat2 = mellin(psi, 2.0).real
    return psihat2 * b_top / math.factorial(n) * math.log(X) ** n * X ** 2


# ---------------------------------------------------------------------------
# Built-in fixtures


def _ones(nmax: int):
    n = np.arange(1, nmax + 1, dtype=float)
    return np.ones(nmax), n


def _divisor(nmax: int):
    d = np.array(divisor_count_sieve(nmax)[1:], dtype=float)
    return d, np.arange(1, nmax + 1, dtype=float)


def zeta_problem() -> CutoffProblem:
    """a_n = 1: simple pole at 1 with residue 1. Declared growth uses the
    convexity-safe A = 1/2 on Re s = 1/2."""
    return CutoffProblem("zeta", _ones, sigma0=1.0, a_floor=0.5,
                         growth_A=0.5, poles=[PoleData(1.0, 1, (1.0,))])


def divisor_problem() -> CutoffProblem:
    """a_n = d(n): double pole at 1, (s-1)^-2 + 2 gamma (s-1)^-1 + ..."""
    return CutoffProblem("divisor", _divisor, sigma0=1.0, a_floor=0.5,
                         growth_A=0.5,
                         poles=[PoleData(1.0, 2, (2 * EULER_GAMMA, 1.0))])


def moment_problem(n: int, variance_slope: float, vol: float,
                   secondary_re: float = 1.0) -> CutoffProblem:
    """The |L|^2n generating series in the conductor-scale variable:
    pole at 2 of order n+1 with top coefficient 2^(n+1)(n!)^2 C_f^n/(pi vol),
    continuation floor a = 1 and growth A = 1/2; the secondary pole
    placeholder sits at Re = 2 * 1/2 = 1 (no exceptional eigenvalues
    assumed), giving the balanced exponent max(4/3, 1) = 4/3.

    Lower-order Laurent data is not known in closed form and is set to 0;
    only the leading (log X)^n coefficient of the main term is meaningful.
    """
    b_top = 2 ** (n + 1) * math.factorial(n) ** 2 * variance_slope ** n \
        / (math.pi * vol)
    laurent = tuple([0.0] * n + [b_top])
    return CutoffProblem(f"moment-{2*n}", None, sigma0=2.0, a_floor=1.0,
                         growth_A=0.5,
                         poles=[PoleData(2.0, n + 1, laurent),
                                PoleData(secondary_re, 1, (0.0,))])


# ---------------------------------------------------------------------------
# Plain-text fixture format:
#   name <str> / coeffs <ones|divisor> / sigma0 <f> / a <f> / A <f>
#   pole <re[,im]> <order> <b_1;b_2;...;b_order>
#   signed [boundary_ok]


_COEFF_SOURCES = {"ones": _ones, "divisor": _divisor, "none": None}


def parse_problem_fixture(text: str) -> CutoffProblem:
    name, coeffs, sigma0, a_floor, growth = "fixture", None, None, None, None
    poles = []
    nonneg, boundary = True, False
    for raw in text.splitlines():
        line = raw.split("#")[0].strip()
        if not line:
            continue
        key, *rest = line.split()
        if key == "name":
            name = rest[0]
        elif key == "coeffs":
            coeffs = _COEFF_SOURCES[rest[0]]
        elif key == "sigma0":
            sigma0 = float(rest[0])
        elif key == "a":
            a_floor = float(rest[0])
        elif key == "A":
            growth = float(rest[0])
        elif key == "pole":
            s = complex(*[float(v) for v in rest[0].split(",")]) \
                if "," in rest[0] else float(rest[0])
            order = int(rest[1])
            laurent = tuple(float(v) for v in rest[2].split(";"))
            poles.append(PoleData(s, order, laurent))
        elif key == "signed":
            nonneg = False
            boundary = "boundary_ok" in rest
        else:
            raise ValueError(f"unknown fixture key {key!r}")
    if sigma0 is None or a_floor is None or growth is None:
        raise ValueError("fixture must define sigma0, a and A")
    return CutoffProblem(name, coeffs, sigma0, a_floor, growth, poles,
                         nonneg, boundary)
