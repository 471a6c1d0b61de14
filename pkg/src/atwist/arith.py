"""Small integer-arithmetic helpers shared across the package."""

from __future__ import annotations

import math
from functools import lru_cache


def mod_inverse(a: int, c: int) -> int:
    """Inverse of a modulo c, reduced to [0, c).  c = 1 gives 0."""
    if c < 1:
        raise ValueError("modulus must be positive")
    if c == 1:
        return 0
    g = math.gcd(a, c)
    if g != 1:
        raise ValueError(f"gcd({a}, {c}) = {g} != 1, no inverse")
    return pow(a, -1, c)


def factorize(n: int) -> list[tuple[int, int]]:
    """Prime factorization as (p, e) pairs, trial division."""
    if n < 1:
        raise ValueError("n must be positive")
    out = []
    for p in (2, 3):
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        if e:
            out.append((p, e))
    f = 5
    while f * f <= n:
        for p in (f, f + 2):
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            if e:
                out.append((p, e))
        f += 6
    if n > 1:
        out.append((n, 1))
    return out


def divisors(n: int) -> list[int]:
    """Sorted list of positive divisors."""
    divs = [1]
    for p, e in factorize(n):
        divs = [d * p**j for d in divs for j in range(e + 1)]
    return sorted(divs)


def mobius(n: int) -> int:
    fac = factorize(n)
    if any(e > 1 for _, e in fac):
        return 0
    return -1 if len(fac) % 2 else 1


def euler_phi(n: int) -> int:
    phi = 1
    for p, e in factorize(n):
        phi *= p ** (e - 1) * (p - 1)
    return phi


def divisor_count_sieve(n: int) -> list[int]:
    """d(k) for k = 0..n (index 0 unused)."""
    d = [0] * (n + 1)
    for i in range(1, n + 1):
        for j in range(i, n + 1, i):
            d[j] += 1
    return d


@lru_cache(maxsize=None)
def primitive_root(q: int) -> int:
    """Smallest primitive root mod q; q must be 2, 4, p^e or 2p^e (p odd)."""
    phi = euler_phi(q)
    prime_parts = [p for p, _ in factorize(phi)]
    for g in range(2, q):
        if math.gcd(g, q) != 1:
            continue
        if all(pow(g, phi // p, q) != 1 for p in prime_parts):
            return g
    raise ValueError(f"no primitive root mod {q}")


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    fac = factorize(n)
    return len(fac) == 1 and fac[0][1] == 1


def crt_lift(residues: list[int], moduli: list[int]) -> int:
    """Solve x = r_i mod m_i for pairwise coprime moduli, x in [0, prod m)."""
    x, m = 0, 1
    for r, mi in zip(residues, moduli):
        t = ((r - x) * mod_inverse(m % mi, mi)) % mi if mi > 1 else 0
        x += m * t
        m *= mi
    return x % m
