"""Cusp-form data: registry eta-quotient newforms, Hecke normalization,
hyperbolic volumes, Petersson norms and Fricke eigenvalues.

The registry is curated, not verified: each entry asserts newform-ness
(cross-checked downstream through Hecke multiplicativity) and supplies
an eta-quotient recipe for exact integer Fourier coefficients.
"""

from __future__ import annotations

import cmath
import math
import struct
from dataclasses import dataclass, field

import numpy as np

from .arith import factorize, is_prime, mod_inverse
from .eta import expand_eta_quotient

MAGIC = b"ATWCOEF1"


class CoefficientShortfall(Exception):
    """Raised when an operation needs more Fourier coefficients than cached."""

    def __init__(self, needed: int, available: int):
        super().__init__(
            f"need {needed} Fourier coefficients but only {available} cached; "
            f"extend with ensure_coeffs({needed})")
        self.needed = needed
        self.available = available


class QuadratureError(Exception):
    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


@dataclass
class CuspForm:
    """A registered newform with exact integer Fourier coefficients.

    Immutable for readers once constructed; ensure_coeffs() is the one
    exclusive mutating operation and must not race with evaluations.
    """

    form_id: str
    q: int
    k: int
    eta_recipe: tuple
    coeffs: list = field(repr=False)

    def __post_init__(self):
        if self.k % 2 or self.k < 2:
            raise ValueError("weight must be even and >= 2")
        if self.coeffs and self.coeffs[0] != 1:
            raise ValueError("newform normalization requires a_f(1) = 1")
        self._lam = None
        self._hecke_const = None

    @property
    def coeff_count(self) -> int:
        return len(self.coeffs)

    def ensure_coeffs(self, N: int) -> None:
        """Extend the coefficient cache to at least N terms (exclusive op)."""
        if N > len(self.coeffs):
            self.coeffs = expand_eta_quotient(self.eta_recipe, N)
            self._lam = None
            self._hecke_const = None

    def hecke_eigenvalues(self, N: int) -> np.ndarray:
        """lambda_f(1..N) = a_f(n)/n^((k-1)/2) as float64."""
        if N > len(self.coeffs):
            raise CoefficientShortfall(N, len(self.coeffs))
        if self._lam is None or len(self._lam) < N:
            n = np.arange(1, len(self.coeffs) + 1, dtype=np.float64)
            a = np.array([float(c) for c in self.coeffs])
            self._lam = a / n ** ((self.k - 1) / 2)
        return self._lam[:N]

    def hecke_bound_const(self) -> float:
        """max |a(n)| / n^(k/2) over the cached range (truncation control)."""
        if self._hecke_const is None:
            n = np.arange(1, len(self.coeffs) + 1, dtype=np.float64)
            a = np.abs(np.array([float(c) for c in self.coeffs]))
            self._hecke_const = float(np.max(a / n ** (self.k / 2)))
        return self._hecke_const

    def fourier_terms_needed(self, y: float, tol: float) -> int:
        """Smallest N with a certified tail bound sum_{n>N} |a(n)| e^{-2 pi n y} < tol,
        using |a(n)| <= C n^(k/2)."""
        C = self.hecke_bound_const()
        r = math.exp(-2 * math.pi * y)
        N = max(4, int(self.k / (2 * math.pi * y)) + 1)
        while N < 10_000_000:
            rho = r * (1 + 1 / N) ** (self.k / 2)
            if rho < 1:
                tail = C * (N + 1) ** (self.k / 2) * r ** (N + 1) / (1 - rho)
                if tail < tol:
                    return N
            N = int(N * 1.3) + 8
        raise ValueError(f"Fourier tail does not certify at y={y}")

    def evaluate(self, z, rel_tol: float = 1e-14):
        """f(z) by Horner summation of the Fourier series; z may be an array.

        The real part is reduced mod 1 first; the term count is certified
        from the smallest imaginary part in the batch.
        """
        w = np.asarray(z, dtype=complex)
        scalar = (w.ndim == 0)
        w = np.atleast_1d(w)
        ymin = float(w.imag.min())
        if ymin <= 0:
            raise ValueError("evaluation requires Im z > 0")
        # scale: leading term magnitude at the *largest* height in the batch,
        # so the certified tail is relative at every point
        scale = math.exp(-2 * math.pi * float(w.imag.max()))
        N = self.fourier_terms_needed(ymin, rel_tol * scale)
        if N > len(self.coeffs):
            self.ensure_coeffs(int(N * 1.1) + 16)
        E = np.exp(2j * np.pi * ((w.real % 1.0) + 1j * w.imag))
        a = np.array([float(c) for c in self.coeffs[:N]])
        acc = np.zeros_like(E)
        for n in range(N - 1, -1, -1):
            acc = acc * E + a[n]
        acc *= E
        return complex(acc[0]) if scalar else acc


REGISTRY_RECIPES = {
    "delta": (1, 12, ((1, 24),)),
    "11a": (11, 2, ((1, 2), (11, 2))),
    "5a": (5, 4, ((1, 4), (5, 4))),
}

DEFAULT_COEFF_COUNT = 200_000

_FORM_CACHE: dict = {}


def registry_form(form_id: str, coeff_count: int = 6_000) -> CuspForm:
    """Construct (and memoize) a registry form with >= coeff_count coefficients."""
    if form_id not in REGISTRY_RECIPES:
        raise KeyError(f"unknown form_id {form_id!r}; "
                       f"registry has {sorted(REGISTRY_RECIPES)}")
    q, k, recipe = REGISTRY_RECIPES[form_id]
    f = _FORM_CACHE.get(form_id)
    if f is None:
        f = CuspForm(form_id, q, k, recipe, expand_eta_quotient(recipe, coeff_count))
        _FORM_CACHE[form_id] = f
    elif f.coeff_count < coeff_count:
        f.ensure_coeffs(coeff_count)
    return f


def hecke_eigenvalue(f: CuspForm, n: int) -> float:
    """lambda_f(n), double precision."""
    if n < 1:
        raise ValueError("n must be positive")
    if n > f.coeff_count:
        raise CoefficientShortfall(n, f.coeff_count)
    return float(f.coeffs[n - 1]) / n ** ((f.k - 1) / 2)


def index_in_modular_group(q: int) -> int:
    """[PSL2(Z) : Gamma_0(q)] = q prod_{p|q} (1 + 1/p)."""
    idx = q
    for p, _ in factorize(q):
        idx = idx // p * (p + 1)
    return idx


def volume(q: int) -> float:
    """Hyperbolic volume of Gamma_0(q)\\H, = (pi/3) * index."""
    if q < 1:
        raise ValueError("level must be positive")
    return math.pi / 3 * index_in_modular_group(q)


# ---------------------------------------------------------------------------
# Coset representatives of Gamma_0(q) \ PSL2(Z)


def coset_representatives(q: int) -> list:
    """Right-coset representatives as (a, b, c, d) integer tuples.

    Prime q: {Id} u {(0,-1;1,j) : j = 0..q-1}.  Composite q: lifted from
    the projective line P^1(Z/q).
    """
    if q == 1:
        return [(1, 0, 0, 1)]
    if is_prime(q):
        return [(1, 0, 0, 1)] + [(0, -1, 1, j) for j in range(q)]
    reps = []
    seen = set()
    units = [u for u in range(1, q) if math.gcd(u, q) == 1]
    for c in range(q):
        for d in range(q):
            if math.gcd(math.gcd(c, d), q) != 1:
                continue
            key = min(((u * c) % q, (u * d) % q) for u in units)
            if key in seen:
                continue
            seen.add(key)
            reps.append(_lift_to_sl2(c, d, q))
    expected = index_in_modular_group(q)
    if len(reps) != expected:
        raise QuadratureError(
            f"coset self-check failed: {len(reps)} classes, expected {expected}")
    return reps


def _lift_to_sl2(c: int, d: int, q: int):
    c0 = c if c != 0 else q
    d0 = d
    while math.gcd(c0, d0) != 1:
        d0 += q
    # a*d0 - b*c0 = 1
    g, x, y = _xgcd(d0, c0)
    assert g == 1
    return (x, -y, c0, d0)


def _xgcd(a: int, b: int):
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        quot = old_r // r
        old_r, r = r, old_r - quot * r
        old_s, s = s, old_s - quot * s
        old_t, t = t, old_t - quot * t
    return old_r, old_s, old_t


def cosets_equivalent(g1, g2, q: int) -> bool:
    """Gamma_0(q) g1 == Gamma_0(q) g2, i.e. lower-left of g1 g2^-1 is 0 mod q."""
    a1, b1, c1, d1 = g1
    a2, b2, c2, d2 = g2
    # g2^-1 = (d2, -b2; -c2, a2)
    lower_left = c1 * d2 - d1 * c2
    return lower_left % q == 0


# ---------------------------------------------------------------------------
# Petersson norm by 2-D quadrature over coset translates of the standard
# fundamental domain F, truncated at y = y_max with exact Parseval tails.


def _gauss_panel(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w  # nodes/weights on [0,1]


def _truncated_domain_integral(integrand, nx: int, ny: int, y_max: float) -> float:
    """integral over F n {y <= y_max} of integrand(x, y) dx dy.

    Tensor Gauss-Legendre: one x panel on [-1/2,1/2]; in y an arc panel
    [sqrt(1-x^2), 1] followed by dyadic panels up to y_max.
    """
    tx, wx = _gauss_panel(nx)
    ty, wy = _gauss_panel(ny)
    X = -0.5 + tx
    total = 0.0
    # arc panel: y from sqrt(1-x^2) to 1, x-dependent
    ylo = np.sqrt(1.0 - X ** 2)
    span = 1.0 - ylo
    Y = ylo[:, None] + span[:, None] * ty[None, :]
    vals = integrand(np.broadcast_to(X[:, None], Y.shape), Y)
    total += float(np.sum((wx * span)[:, None] * wy[None, :] * vals))
    # dyadic panels in y
    edges = [1.0]
    while edges[-1] < y_max:
        edges.append(min(edges[-1] * 2, y_max))
    for y0, y1 in zip(edges[:-1], edges[1:]):
        Y = y0 + (y1 - y0) * ty
        vals = integrand(np.broadcast_to(X[:, None], (nx, ny)),
                         np.broadcast_to(Y[None, :], (nx, ny)))
        total += float((y1 - y0) * np.sum(wx[:, None] * wy[None, :] * vals))
    return total


def _gamma_upper_real(s: float, x: float) -> float:
    # Gamma(s, x) for integer s >= 1 (exact finite form)
    m = int(s)
    term, acc = 1.0, 1.0
    for j in range(1, m):
        term *= x / j
        acc += term
    return math.factorial(m - 1) * math.exp(-x) * acc


def _parseval_tail(form: CuspForm, height: float) -> float:
    """Exact integral over one x-period, Im z > height, of |f|^2 y^(k-2)."""
    k = form.k
    total = 0.0
    n = 1
    while True:
        an = float(form.coeffs[n - 1]) if n <= form.coeff_count else 0.0
        term = an * an * (4 * math.pi * n) ** (1 - k) \
            * _gamma_upper_real(k - 1, 4 * math.pi * n * height)
        total += term
        if n > 4 and term < 1e-22 * (abs(total) + 1e-300):
            return total
        n += 1


def petersson_norm_sq(form: CuspForm, tol: float = 1e-6, y_max: float = 8.0) -> float:
    """||f||^2 = int over Gamma_0(q)\\H of |f|^2 y^k dmu.

    Written as sum_i int_F |f(gamma_i z)|^2 Im(gamma_i z)^k dmu over coset
    representatives of Gamma_0(q)\\PSL2(Z); the y > y_max tails are exact
    Parseval integrals (the non-identity cosets unfold through the Fricke
    map to a single full-period strip of height y_max/q, valid for prime
    level where the only cusps are infinity and 0).
    """
    q = form.q
    if q != 1 and not is_prime(q):
        raise NotImplementedError(
            "Petersson quadrature tails are implemented for level 1 and prime "
            "levels (the registry); composite levels have more cusps")
    k = form.k

    def integrand(X, Y):
        Z = X + 1j * Y
        out = np.abs(form.evaluate(Z.ravel()).reshape(Z.shape)) ** 2 * Y ** k
        for j in range(q) if q > 1 else []:
            W = -1.0 / (Z + j)
            out += (np.abs(form.evaluate(W.ravel()).reshape(Z.shape)) ** 2
                    * W.imag ** k)
        return out / Y ** 2  # hyperbolic measure

    tail = _parseval_tail(form, y_max)
    if q > 1:
        tail += _parseval_tail(form, y_max / q)

    prev = None
    for nx, ny in [(20, 16), (28, 24), (40, 32), (56, 48), (80, 64)]:
        val = _truncated_domain_integral(integrand, nx, ny, y_max) + tail
        if prev is not None and abs(val - prev) <= tol * abs(val):
            return val
        prev = val
    raise QuadratureError(
        f"Petersson quadrature did not reach relative tolerance {tol}",
        achieved=prev)


def coset_volume_check(q: int, nx: int = 40, ny: int = 32, y_max: float = 8.0) -> float:
    """Same domain decomposition applied to the constant function 1; must
    reproduce vol(Gamma_0(q)).  Valid for level 1 and prime levels."""
    if q != 1 and not is_prime(q):
        raise NotImplementedError("prime or trivial level only")

    def integrand(X, Y):
        return np.full_like(Y, float(index_in_modular_group(q))) / Y ** 2

    tail = 1.0 / y_max + (q / y_max if q > 1 else 0.0)
    return _truncated_domain_integral(integrand, nx, ny, y_max) + tail


# ---------------------------------------------------------------------------
# Fricke eigenvalue


def fricke_eigenvalue(form: CuspForm, consistency: float = 1e-9) -> complex:
    """eps_f with f|_k W_q = eps_f f, from q^(k/2) (qz)^(-k) f(-1/(qz)) / f(z)
    sampled at several points of height ~ 2/sqrt(q).

    Level 1 returns 1 exactly (the involution lies in the group).
    """
    q, k = form.q, form.k
    if q == 1:
        return 1.0 + 0.0j
    y = 2.0 / math.sqrt(q)
    offsets = [0.137, -0.211, 0.318, 0.071, -0.403, 0.259]
    ratios = []
    for x in offsets:
        z = complex(x, y)
        fz = form.evaluate(z)
        if abs(fz) < 1e-12:
            continue  # sampled too close to a zero of f; resample
        w = -1.0 / (q * z)
        ratio = q ** (k / 2) * (q * z) ** (-k) * form.evaluate(w) / fz
        ratios.append(ratio)
        if len(ratios) >= 3:
            break
    if len(ratios) < 3:
        raise ValueError("could not sample f away from its zeros")
    spread = max(abs(r1 - r2) for r1 in ratios for r2 in ratios)
    if spread > consistency:
        raise ValueError(f"Fricke eigenvalue samples inconsistent: spread {spread:g}")
    eps = sum(ratios) / len(ratios)
    if abs(abs(eps) - 1) > 1e-10:
        raise ValueError(f"|eps_f| = {abs(eps)} deviates from 1")
    return eps


# ---------------------------------------------------------------------------
# Derived constants


@dataclass(frozen=True)
class FormConstants:
    """Volume, Petersson norm, variance slope and Fricke eigenvalue."""

    q: int
    k: int
    volume: float
    petersson_norm_sq: float
    variance_slope: float
    fricke_eigenvalue: complex


_CONSTANTS_CACHE: dict = {}


def form_constants(form: CuspForm, tol: float = 1e-8) -> FormConstants:
    key = (form.form_id, tol)
    if key not in _CONSTANTS_CACHE:
        vol = volume(form.q)
        norm2 = petersson_norm_sq(form, tol=tol)
        slope = (4 * math.pi) ** form.k * norm2 / (math.factorial(form.k - 1) * vol)
        eps = fricke_eigenvalue(form)
        _CONSTANTS_CACHE[key] = FormConstants(
            form.q, form.k, vol, norm2, slope, eps)
    return _CONSTANTS_CACHE[key]


# ---------------------------------------------------------------------------
# On-disk formats: plain-text registry manifest and flat binary coefficient
# caches (16-byte header: 8-byte magic + int64 count; int64 little-endian rows)


class CoefficientOverflow(Exception):
    pass


def write_coeff_file(path, coeffs) -> None:
    int64_min, int64_max = -(1 << 63), (1 << 63) - 1
    for i, c in enumerate(coeffs):
        if not (int64_min <= c <= int64_max):
            raise CoefficientOverflow(
                f"a({i + 1}) = {c} does not fit in int64; "
                f"store fewer coefficients or keep them in memory only")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<q", len(coeffs)))
        arr = np.array(coeffs, dtype="<i8")
        fh.write(arr.tobytes())


def read_coeff_file(path) -> list:
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != MAGIC:
            raise ValueError(f"bad magic {magic!r} in coefficient file {path}")
        (n,) = struct.unpack("<q", fh.read(8))
        data = fh.read()
    if len(data) != 8 * n:
        raise ValueError(f"coefficient file {path} truncated: "
                         f"expected {8 * n} payload bytes, got {len(data)}")
    return [int(v) for v in np.frombuffer(data, dtype="<i8")]


def write_manifest(path, form_ids=None) -> None:
    ids = sorted(form_ids or REGISTRY_RECIPES)
    with open(path, "w") as fh:
        fh.write("# form_id level weight recipe(m^r,...)\n")
        for fid in ids:
            q, k, recipe = REGISTRY_RECIPES[fid]
            rec = ",".join(f"{m}^{r}" for m, r in recipe)
            fh.write(f"{fid} {q} {k} {rec}\n")


def parse_manifest(path) -> dict:
    out = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            fid, q, k, rec = line.split()
            recipe = tuple(tuple(map(int, part.split("^"))) for part in rec.split(","))
            out[fid] = (int(q), int(k), recipe)
    return out
