"""Integer q-expansions of eta quotients.

A quotient prod_j eta(m_j z)^{r_j} with sum_j m_j r_j = 24t expands as
q^t * prod_j E(q^{m_j})^{r_j} where E(q) = prod_{n>=1} (1 - q^n) is the
Euler product, sparse by the pentagonal number theorem.  All arithmetic
is exact; coefficients overflow no fixed-width type (tau(n) needs ~100
bits by n = 2*10^5), so series are plain lists of Python ints and dense
multiplications run through Kronecker substitution (pack into one big
integer, one big multiply, unpack).  gmpy2 accelerates the big multiply
when present.
"""

from __future__ import annotations

try:
    from gmpy2 import mpz
except ImportError:  # pragma: no cover - gmpy2 is an optional speedup
    def mpz(x):
        return x


def pentagonal_coeffs(N: int) -> list[int]:
    """Coefficients of E(q) = prod (1-q^n) up to degree N."""
    out = [0] * (N + 1)
    out[0] = 1
    j = 1
    while True:
        g1 = j * (3 * j - 1) // 2
        g2 = j * (3 * j + 1) // 2
        if g1 > N and g2 > N:
            break
        s = -1 if j % 2 else 1
        if g1 <= N:
            out[g1] = s
        if g2 <= N:
            out[g2] = s
        j += 1
    return out


def _digit_bits(a_max: int, b_max: int, length: int) -> int:
    # |product coeff| <= length * a_max * b_max; one sign bit + one safety bit
    bits = a_max.bit_length() + b_max.bit_length() + length.bit_length() + 2
    return ((bits + 7) // 8) * 8


def _offset(B: int, count: int) -> int:
    # sum_k 2^(B-1) * 2^(Bk), built bytewise to avoid big-int division
    nb = B // 8
    return int.from_bytes((1 << (B - 1)).to_bytes(nb, "little") * count,
                          "little")


def _pack(coeffs: list[int], B: int) -> int:
    half = 1 << (B - 1)
    nb = B // 8
    buf = bytearray(nb * len(coeffs))
    for i, c in enumerate(coeffs):
        buf[i * nb:(i + 1) * nb] = (c + half).to_bytes(nb, "little")
    return int.from_bytes(bytes(buf), "little") - _offset(B, len(coeffs))


def _unpack(z: int, B: int, count: int) -> list[int]:
    # digits of z are balanced (|digit| < 2^(B-1)); shifting by the offset
    # makes them plain base-2^B digits readable from the byte string
    half = 1 << (B - 1)
    nb = B // 8
    raw = (z + _offset(B, count)).to_bytes(count * nb + nb, "little")
    return [int.from_bytes(raw[i * nb:(i + 1) * nb], "little") - half
            for i in range(count)]


def poly_mul_trunc(a: list[int], b: list[int], N: int) -> list[int]:
    """Exact product of integer polynomials, truncated to degree N."""
    a = a[:N + 1]
    b = b[:N + 1]
    amax = max(map(abs, a), default=0)
    bmax = max(map(abs, b), default=0)
    if amax == 0 or bmax == 0:
        return [0] * (N + 1)
    B = _digit_bits(amax, bmax, min(len(a), len(b)))
    z = int(mpz(_pack(a, B)) * mpz(_pack(b, B)))
    out = _unpack(z, B, len(a) + len(b) - 1)[:N + 1]
    return out + [0] * (N + 1 - len(out))


def poly_pow_trunc(base: list[int], r: int, N: int) -> list[int]:
    """base(q)^r truncated to degree N, r >= 0, by binary powering."""
    result = [1] + [0] * N
    acc = base[:N + 1] + [0] * max(0, N + 1 - len(base))
    while r:
        if r & 1:
            result = poly_mul_trunc(result, acc, N)
        r >>= 1
        if r:
            acc = poly_mul_trunc(acc, acc, N)
    return result


def series_inverse(a: list[int], N: int) -> list[int]:
    """1/a(q) mod q^{N+1} for a with a[0] = 1 and integer coefficients.

    Direct recurrence over the nonzero entries of a; intended for sparse
    a (the Euler product), where it costs O(N * #nonzero).
    """
    if a[0] != 1:
        raise ValueError("series inversion requires constant term 1")
    support = [(j, c) for j, c in enumerate(a[:N + 1]) if j > 0 and c != 0]
    inv = [0] * (N + 1)
    inv[0] = 1
    for n in range(1, N + 1):
        s = 0
        for j, c in support:
            if j > n:
                break
            s += c * inv[n - j]
        inv[n] = -s
    return inv


def _upscale(coeffs: list[int], m: int, N: int) -> list[int]:
    """a(q) -> a(q^m) truncated to degree N."""
    out = [0] * (N + 1)
    for j, c in enumerate(coeffs):
        if j * m > N:
            break
        out[j * m] = c
    return out


def eta_quotient_weight(recipe) -> float:
    return sum(r for _, r in recipe) / 2


def expand_eta_quotient(recipe, N: int) -> list[int]:
    """Fourier coefficients a(1..N) of prod_j eta(m_j z)^{r_j}.

    The q^{(sum m_j r_j)/24} prefactor is absorbed; the recipe is
    rejected unless 24 | sum m_j r_j.  Returns exact integers.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    recipe = [(int(m), int(r)) for m, r in recipe]
    if any(m < 1 for m, _ in recipe):
        raise ValueError("eta multipliers must be positive")
    total = sum(m * r for m, r in recipe)
    if total % 24:
        raise ValueError(f"sum m_j r_j = {total} is not divisible by 24")
    t = total // 24
    if t < 0 or t > N:
        return [0] * N
    deg = N - t
    series = [1] + [0] * deg
    for m, r in recipe:
        base = _upscale(pentagonal_coeffs(deg // m if m <= deg else 0), m, deg)
        if r >= 0:
            factor = poly_pow_trunc(base, r, deg)
        else:
            factor = poly_pow_trunc(series_inverse(base, deg), -r, deg)
        series = poly_mul_trunc(series, factor, deg)
    # a(n) = [q^{n-t}] series, and a(n) = 0 for n < t
    return [series[n - t] if n >= t else 0 for n in range(1, N + 1)]


def expand_eta_quotient_naive(recipe, N: int) -> list[int]:
    """Slow reference expansion: multiply the truncated products term by
    term with no packing tricks.  Oracle for the fast path."""
    total = sum(m * r for m, r in recipe)
    if total % 24:
        raise ValueError(f"sum m_j r_j = {total} is not divisible by 24")
    t = total // 24
    deg = max(N - t, 0)
    series = [1] + [0] * deg

    def mul_binomial(s, e, sign):
        # multiply by (1 + sign*q^e)
        out = s[:]
        for i in range(len(s) - 1, -1, -1):
            if i + e <= deg:
                out[i + e] += sign * s[i]
        return out

    for m, r in recipe:
        for n in range(1, deg // m + 1 if m <= deg else 0):
            if r >= 0:
                for _ in range(r):
                    series = mul_binomial(series, m * n, -1)
        if r < 0:
            factor = [1] + [0] * deg
            for n in range(1, deg // m + 1 if m <= deg else 0):
                for _ in range(-r):
                    factor = mul_binomial(factor, m * n, -1)
            series = poly_mul_trunc(series, series_inverse(factor, deg), deg)
    return [series[n - t] if t <= n <= deg + t else 0 for n in range(1, N + 1)]
