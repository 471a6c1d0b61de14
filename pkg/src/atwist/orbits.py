"""Enumeration of the twist sample sets for the two denominator orbits.

Infinity orbit: reduced a/c with 0 < a < c <= X and q | c.
Zero orbit:     reduced a/c with 0 < a < c and (c, q) = 1; the cutoff is
by plain c by default, or by the conductor scale c(r) = c sqrt(q) when
`by_conductor_scale` is set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .arith import euler_phi, mod_inverse  # noqa: F401  (mod_inverse re-exported)
from .forms import volume
from .twist_eval import Orbit, TwistPoint


@dataclass(frozen=True)
class OrbitSpec:
    q: int
    orbit: Orbit
    X: float
    by_conductor_scale: bool = False

    def __post_init__(self):
        if self.q < 1:
            raise ValueError("level must be positive")
        if self.X < 1:
            raise ValueError("cutoff must be >= 1")


def enumerate_points(spec: OrbitSpec) -> list:
    """All qualifying reduced fractions, sorted by (c, a), with duals
    precomputed."""
    out = []
    if spec.orbit is Orbit.INF:
        cmax = int(math.floor(spec.X + 1e-12))
        for c in range(spec.q, cmax + 1, spec.q):
            if c < 2:
                continue
            for a in range(1, c):
                if math.gcd(a, c) == 1:
                    out.append(TwistPoint.infinity_orbit(a, c, spec.q))
    else:
        limit = spec.X / math.sqrt(spec.q) if spec.by_conductor_scale else spec.X
        cmax = int(math.floor(limit + 1e-12))
        for c in range(2, cmax + 1):
            if math.gcd(c, spec.q) != 1:
                continue
            for a in range(1, c):
                if math.gcd(a, c) == 1:
                    out.append(TwistPoint.zero_orbit(a, c, spec.q))
    return out


def count_points(spec: OrbitSpec) -> int:
    if spec.orbit is Orbit.INF:
        cmax = int(math.floor(spec.X + 1e-12))
        return sum(euler_phi(c) for c in range(spec.q, cmax + 1, spec.q) if c >= 2)
    limit = spec.X / math.sqrt(spec.q) if spec.by_conductor_scale else spec.X
    cmax = int(math.floor(limit + 1e-12))
    return sum(euler_phi(c) for c in range(2, cmax + 1)
               if math.gcd(c, spec.q) == 1)


def count_asymptotic_check(q: int, orbit: Orbit, X_values) -> list:
    """(X, count, count * pi * vol / X_cond^2) rows; the ratio tends to 1
    when counting by the conductor scale c(r)."""
    vol = volume(q)
    rows = []
    for X in X_values:
        spec = OrbitSpec(q, orbit, X, by_conductor_scale=(orbit is Orbit.ZERO))
        n = count_points(spec)
        rows.append((X, n, n * math.pi * vol / X ** 2))
    return rows
