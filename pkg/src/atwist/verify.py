"""Verification suites behind `atwist verify ...` and the acceptance tests.

Each suite returns (ok, report-dict).  Functional-equation residuals are
evaluated with an off-center split of the period integral: at the
symmetric split the two sides coincide identically by construction, so
only an asymmetric split (both sides at the same height) genuinely tests
analytic content, including the Fricke eigenvalue on the zero orbit.
"""

from __future__ import annotations

import math
import random
from fractions import Fraction

import numpy as np

from .eta import expand_eta_quotient, expand_eta_quotient_naive
from .forms import REGISTRY_RECIPES, registry_form
from .twist_eval import (Orbit, TwistEvaluator, TwistPoint, polynomial_slash)

FE_BOUND = 1e-8
ANTIDER_BOUND = 1e-8
COCYCLE_BOUND = 1e-7
PERIOD_MOMENT_BOUND = 1e-7
BS_BOUND = 1e-6

ACCEPTANCE_Z = (1j, 0.3 + 0.8j, -0.4 + 1.7j)


def _random_point(rng: random.Random, q: int, c_max: int, orbit: Orbit):
    while True:
        if orbit is Orbit.INF:
            c = q * rng.randint(1, c_max // q)
            if c < 2:
                continue
        else:
            c = rng.randint(2, c_max)
            if math.gcd(c, q) != 1:
                continue
        a = rng.randint(1, c - 1)
        if math.gcd(a, c) == 1:
            maker = (TwistPoint.infinity_orbit if orbit is Orbit.INF
                     else TwistPoint.zero_orbit)
            return maker(a, c, q)


def fe_s_values(k: int):
    return (k / 2, k / 2 + 0.7j, (k + 1) / 2 + 1.3j)


def verify_functional_equation(form, trials: int = 50, c_max: int = 200,
                               orbit: Orbit = Orbit.INF, seed: int = 1,
                               bound: float = FE_BOUND, split: float = 2.0):
    """|Lambda(s) - (-1)^(k/2) eps Lambda_dual(k-s)| < bound (1 + |Lambda|)
    at an asymmetric split; `trials` random points, three s values each."""
    rng = random.Random(seed)
    ev = TwistEvaluator(form)
    k = form.k
    sign = (-1) ** (k // 2)
    worst = 0.0
    rows = 0
    for _ in range(trials):
        pt = _random_point(rng, form.q, c_max, orbit)
        eps_f = 1.0 if orbit is Orbit.INF else ev.fricke()
        for s in fe_s_values(k):
            lam, e1, _ = ev.completed_lambda(pt, s, split=split)
            dual, e2, _ = ev.completed_lambda(pt.dual(), k - s, split=split)
            resid = abs(lam - sign * eps_f * dual) / (1.0 + abs(lam))
            worst = max(worst, resid)
            rows += 1
    return worst < bound, {"suite": "functional-equation",
                           "form": form.form_id, "orbit": orbit.value,
                           "trials": trials, "evaluations": rows,
                           "max_residual": worst, "bound": bound}


def sample_gamma0(q: int, rng: random.Random, z_list=ACCEPTANCE_Z,
                  y_min: float = 5e-3):
    """A random Gamma_0(q) matrix with c > 0 small enough that gamma z stays
    above y_min at every test z."""
    for _ in range(10_000):
        c = q * rng.randint(1, 12 if q == 1 else 2)
        d = rng.randint(-12, 12)
        if math.gcd(c, abs(d)) != 1:
            continue
        ok = all((z.imag / abs(c * z + d) ** 2) >= y_min * 1.5 for z in z_list)
        if not ok:
            continue
        a = pow(d, -1, c) if c > 1 else 0
        a += c * rng.randint(-2, 2)
        b = (a * d - 1) // c
        if a * d - b * c == 1:
            return (a, b, c, d)
    raise RuntimeError("could not sample a suitable matrix")


def verify_antiderivative_identity(form, n_matrices: int = 20,
                                   z_list=ACCEPTANCE_Z, seed: int = 2,
                                   bound: float = ANTIDER_BOUND):
    """Cross-evaluator agreement and z-independence of the central-value
    formula through antiderivatives."""
    rng = random.Random(seed)
    ev = TwistEvaluator(form)
    worst_cross = worst_spread = 0.0
    done = 0
    while done < n_matrices:
        g = sample_gamma0(form.q, rng, z_list)
        a, b, c, d = g
        vals = [ev.central_value_via_antiderivatives(g, z) for z in z_list]
        spread = max(abs(v1 - v2) for v1 in vals for v2 in vals)
        pt = TwistPoint.infinity_orbit(a % c if c > 1 else 1, c, form.q)
        direct = ev.central_value(pt, eps=1e-12).value
        cross = max(abs(v - direct) for v in vals)
        worst_cross = max(worst_cross, cross)
        worst_spread = max(worst_spread, spread)
        done += 1
    ok = worst_cross < bound and worst_spread < bound
    return ok, {"suite": "antiderivative-identity", "form": form.form_id,
                "matrices": n_matrices, "max_cross": worst_cross,
                "max_z_spread": worst_spread, "bound": bound}


def verify_period_moments(form, point=(1, 5), ells=None,
                          bound: float = PERIOD_MOMENT_BOUND):
    """Special-value expansion of int_r^{i inf} f z^ell dz against a direct
    contour quadrature."""
    ev = TwistEvaluator(form)
    a, c = point
    k = form.k
    ells = list(range(0, k - 1)) if ells is None else list(ells)
    worst = 0.0
    for ell in ells:
        mom = ev.period_moment(Fraction(a, c), ell)
        oracle = contour_period_moment(form, Fraction(a, c), ell)
        worst = max(worst, abs(mom - oracle))
    return worst < bound, {"suite": "period-moments", "form": form.form_id,
                           "point": f"{a}/{c}", "ells": ells,
                           "max_residual": worst, "bound": bound}


def contour_period_moment(form, r: Fraction, ell: int, y_hi: float = 14.0,
                          nodes: int = 64) -> complex:
    """int_r^{i inf} f(z) z^ell dz on the vertical line, geometric panels."""
    c = r.denominator
    y_lo = 2 * math.pi / (c * c * math.log(1e26))
    edges = [y_lo]
    while edges[-1] < y_hi:
        edges.append(edges[-1] * 1.5)
    t, w = np.polynomial.legendre.leggauss(nodes)
    total = 0.0 + 0.0j
    for aa, bb in zip(edges[:-1], edges[1:]):
        y = 0.5 * (aa + bb) + 0.5 * (bb - aa) * t
        z = float(r) + 1j * y
        fz = form.evaluate(z)
        total += 0.5 * (bb - aa) * np.sum(w * fz * z ** ell) * 1j
    return complex(total)


def _word_matrices(rng: random.Random, max_len: int = 4):
    S = np.array([[0, -1], [1, 0]], dtype=object)
    T = np.array([[1, 1], [0, 1]], dtype=object)
    Ti = np.array([[1, -1], [0, 1]], dtype=object)
    letters = [S, T, Ti]
    m = np.eye(2, dtype=object)
    for _ in range(rng.randint(2, max_len)):
        m = m @ letters[rng.randrange(3)]
    return (int(m[0, 0]), int(m[0, 1]), int(m[1, 0]), int(m[1, 1]))


def verify_cocycle(form, n_pairs: int = 10, seed: int = 3,
                   bound: float = COCYCLE_BOUND):
    """Period-polynomial cocycle sigma(g1 g2) = sigma(g1)|g2 + sigma(g2),
    coefficientwise, for random short words in the modular group."""
    if form.q != 1:
        raise ValueError("the cocycle check runs in the level-1 group")
    rng = random.Random(seed)
    ev = TwistEvaluator(form)
    worst = 0.0
    pairs = 0
    while pairs < n_pairs:
        g1 = _word_matrices(rng)
        g2 = _word_matrices(rng)
        prod = (g1[0] * g2[0] + g1[1] * g2[2], g1[0] * g2[1] + g1[1] * g2[3],
                g1[2] * g2[0] + g1[3] * g2[2], g1[2] * g2[1] + g1[3] * g2[3])
        # keep all base points within a few units of the origin
        cusps = []
        for g in (g1, g2, prod):
            if g[2] != 0:
                cusps.append(abs(Fraction(-g[3], g[2])))
        if cusps and max(cusps) > 3:
            continue
        lhs = ev.period_polynomial(prod)
        rhs = polynomial_slash(ev.period_polynomial(g1), g2, form.k) \
            + ev.period_polynomial(g2)
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
        pairs += 1
    return worst < bound, {"suite": "cocycle", "form": form.form_id,
                           "pairs": n_pairs, "max_residual": worst,
                           "bound": bound}


def verify_birch_stevens(form, c_max: int = 60, composite_only: bool = True,
                         bound: float = BS_BOUND, eps: float = 1e-12):
    """Residuals of both finite-Fourier identities over all characters of
    every admissible modulus up to c_max."""
    from .arith import is_prime
    from .characters import birch_stevens_check, character_group

    ev = TwistEvaluator(form)
    worst = 0.0
    cases = 0
    for c in range(3, c_max + 1):
        if math.gcd(c, form.q) != 1:
            continue
        if composite_only and is_prime(c):
            continue
        table = character_group(c)
        for chi in table:
            res = birch_stevens_check(form, chi, ev, eps=eps)
            worst = max(worst, res.residual_forward, res.residual_inverse)
            cases += 1
    return worst < bound, {"suite": "birch-stevens", "form": form.form_id,
                           "c_max": c_max, "cases": cases,
                           "max_residual": worst, "bound": bound}


def verify_eta():
    """Fast eta expansion against the naive truncated product, plus the
    first coefficients of each registry recipe."""
    known = {"delta": [1, -24, 252, -1472, 4830],
             "11a": [1, -2, -1, 2, 1],
             "5a": [1, -4, 2, 8, -5]}
    ok = True
    detail = {}
    for fid, (q, k, recipe) in REGISTRY_RECIPES.items():
        fast = expand_eta_quotient(recipe, 200)
        naive = expand_eta_quotient_naive(recipe, 200)
        match = fast == naive
        head_ok = fast[:5] == known[fid]
        ok = ok and match and head_ok
        detail[fid] = {"naive_match_200": match, "head": fast[:5],
                       "head_ok": head_ok}
    return ok, {"suite": "eta-expansion", "detail": detail}


def registry_forms(coeff_count: int = 6000):
    return {fid: registry_form(fid, coeff_count) for fid in REGISTRY_RECIPES}
