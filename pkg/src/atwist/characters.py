"""Dirichlet character groups, Gauss sums, the arithmetic twist weight,
and the finite-Fourier bridge between additive and multiplicative twists
(Birch-Stevens duality), including wide family averages.

Characters are indexed by exponent tuples relative to fixed generators
of each (Z/p^e)^x component: the smallest primitive root for odd p and
for 4, and the pair (-1, 5) for 2^e with e >= 3.  Value tables are
materialized lazily; the group structure itself is cheap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .arith import (crt_lift, divisors, euler_phi, factorize, mobius,
                    mod_inverse)

MODULUS_CEILING = 10_000
FAMILY_TUPLE_CEILING = 2_000_000


@dataclass(frozen=True)
class _Component:
    prime_power: int
    generator: int      # lifted to the full modulus via CRT
    order: int
    dlog: tuple         # dlog[u mod prime_power] or -1 on non-units


class DirichletCharacter:
    """One character mod c, identified by exponents on the group generators."""

    def __init__(self, table: "CharacterTable", exponents: tuple):
        self.table = table
        self.modulus = table.modulus
        self.exponents = tuple(int(e) % comp.order for e, comp in
                               zip(exponents, table.components))
        self._values = None
        self._conductor = None

    # -- structure ----------------------------------------------------------

    @property
    def order(self) -> int:
        o = 1
        for e, comp in zip(self.exponents, self.table.components):
            o = math.lcm(o, comp.order // math.gcd(comp.order, e))
        return o

    @property
    def is_principal(self) -> bool:
        return all(e == 0 for e in self.exponents)

    def value_table(self) -> np.ndarray:
        """chi(0..c-1) as complex; zero off the unit group."""
        if self._values is None:
            c = self.modulus
            if c == 1:
                self._values = np.ones(1, dtype=complex)
            else:
                log_angle = np.zeros(c)
                mask = self.table.unit_mask
                for e, comp in zip(self.exponents, self.table.components):
                    if e == 0:
                        continue
                    d = np.array(comp.dlog)[np.arange(c) % comp.prime_power]
                    log_angle += e * d / comp.order
                vals = np.exp(2j * np.pi * np.mod(log_angle, 1.0))
                vals[~mask] = 0.0
                self._values = vals
        return self._values

    def __call__(self, a: int) -> complex:
        return complex(self.value_table()[a % self.modulus])

    def conjugate(self) -> "DirichletCharacter":
        return self.table.character(tuple(-e for e in self.exponents))

    def mul(self, other: "DirichletCharacter") -> "DirichletCharacter":
        if other.table is not self.table:
            raise ValueError("characters live in different groups")
        return self.table.character(tuple(
            a + b for a, b in zip(self.exponents, other.exponents)))

    @property
    def parity(self) -> int:
        v = self(-1 % self.modulus) if self.modulus > 1 else 1.0
        return 1 if abs(v - 1) < 1e-9 else -1

    # -- conductor / primitivization ----------------------------------------

    @property
    def conductor(self) -> int:
        """Smallest d | c with chi trivial on the kernel of reduction mod d."""
        if self._conductor is None:
            c = self.modulus
            vals = self.value_table()
            found = None
            for d in divisors(c):
                ok = True
                for u in range(1 + d, c + 1, d) if d < c else []:
                    um = u % c
                    if math.gcd(um, c) == 1 and abs(vals[um] - 1.0) > 1e-9:
                        ok = False
                        break
                if ok:
                    found = d
                    break
            self._conductor = found
        return self._conductor

    @property
    def is_primitive(self) -> bool:
        return self.conductor == self.modulus

    def primitive_inducing(self) -> "DirichletCharacter":
        """chi* mod c(chi): chi*(u) = chi(lift of u coprime to c)."""
        d = self.conductor
        sub = character_group(d)
        vals = self.value_table()
        c = self.modulus
        exps = []
        for comp in sub.components:
            u = comp.generator
            t = u
            while math.gcd(t, c) != 1:
                t += d
            val = vals[t % c]
            # discrete log of val as a comp.order-th root of unity
            ang = (np.angle(val) / (2 * np.pi)) % 1.0
            e = int(round(ang * comp.order)) % comp.order
            if abs(val - np.exp(2j * np.pi * e / comp.order)) > 1e-8:
                raise ArithmeticError("primitivization failed to match a root of unity")
            exps.append(e)
        chi_star = sub.character(tuple(exps))
        return chi_star


class CharacterTable:
    """The full dual group of (Z/cZ)^x."""

    def __init__(self, modulus: int):
        if not 1 <= modulus <= MODULUS_CEILING:
            raise ValueError(f"modulus must be in [1, {MODULUS_CEILING}]")
        self.modulus = modulus
        self.components = self._build_components(modulus)
        u = np.zeros(modulus, dtype=bool)
        for a in range(modulus):
            u[a] = math.gcd(a, modulus) == 1
        if modulus == 1:
            u[0] = True
        self.unit_mask = u
        self._chars: dict = {}

    @staticmethod
    def _build_components(c: int) -> tuple:
        comps = []
        for p, e in factorize(c):
            pe = p ** e
            others = c // pe
            if p == 2:
                if e == 1:
                    continue
                if e == 2:
                    gens = [(3, 2)]
                else:
                    gens = [(pe - 1, 2), (5, 2 ** (e - 2))]
            else:
                from .arith import primitive_root
                gens = [(primitive_root(pe), euler_phi(pe))]
            for g_local, order in gens:
                dlog = [-1] * pe
                # powers of g_local span either the whole unit group (odd p)
                # or the <g> subgroup; for 2^e >= 8 combine with -1 below
                if p == 2 and e >= 3:
                    pass
                acc = 1
                for j in range(order):
                    dlog[acc] = j
                    acc = acc * g_local % pe
                g = crt_lift([g_local, 1], [pe, others]) if others > 1 else g_local
                comps.append(_Component(pe, g % c if c > 1 else 0, order,
                                        tuple(dlog)))
        # for 2^e, e >= 3 the two generators do not separately span the
        # units; fix up their dlog tables jointly
        comps = CharacterTable._fix_two_power(comps, c)
        return tuple(comps)

    @staticmethod
    def _fix_two_power(comps, c: int) -> list:
        out = []
        by_pe: dict = {}
        for comp in comps:
            by_pe.setdefault(comp.prime_power, []).append(comp)
        for pe, group in by_pe.items():
            if len(group) == 2:  # 2^e, e>=3: units = (-1)^s 5^t
                neg, five = group
                d_neg = [-1] * pe
                d_five = [-1] * pe
                for s in range(2):
                    for t in range(five.order):
                        u = pow(pe - 1, s, pe) * pow(5, t, pe) % pe
                        d_neg[u] = s
                        d_five[u] = t
                out.append(_Component(pe, neg.generator, 2, tuple(d_neg)))
                out.append(_Component(pe, five.generator, five.order,
                                      tuple(d_five)))
            else:
                out.extend(group)
        return out

    def character(self, exponents: tuple) -> DirichletCharacter:
        key = tuple(int(e) % comp.order
                    for e, comp in zip(exponents, self.components))
        if key not in self._chars:
            self._chars[key] = DirichletCharacter(self, key)
        return self._chars[key]

    def principal(self) -> DirichletCharacter:
        return self.character(tuple(0 for _ in self.components))

    def __len__(self) -> int:
        return euler_phi(self.modulus)

    def __iter__(self):
        def rec(prefix, comps):
            if not comps:
                yield self.character(tuple(prefix))
                return
            for e in range(comps[0].order):
                yield from rec(prefix + [e], comps[1:])
        yield from rec([], list(self.components))

    def to_csv(self) -> str:
        lines = ["modulus,index,conductor,parity,values"]
        for i, chi in enumerate(self):
            vals = ";".join(f"({v.real:.12g},{v.imag:.12g})"
                            for v in chi.value_table())
            lines.append(f"{self.modulus},{i},{chi.conductor},{chi.parity},{vals}")
        return "\n".join(lines) + "\n"


@lru_cache(maxsize=256)
def character_group(c: int) -> CharacterTable:
    return CharacterTable(c)


def gauss_sum(chi: DirichletCharacter) -> complex:
    """tau(chi) = sum_a chi(a) e(a/c)."""
    c = chi.modulus
    if c == 1:
        return 1.0 + 0.0j
    roots = np.exp(2j * np.pi * np.arange(c) / c)
    return complex(np.sum(chi.value_table() * roots))


def nu_weight(form, chi: DirichletCharacter, n: int) -> complex:
    """Arithmetic weight
    nu(f, chi, n) = tau(conj chi) * sum_{n1 n2 n3 = n, (n1,q)=1}
                    chi(n1) mu(n1) conj(chi)(n2) mu(n2) lambda_f(n3) sqrt(n3);
    chi should be primitive (it is applied at its own modulus)."""
    if n < 1:
        raise ValueError("n must be positive")
    if n > form.coeff_count:
        from .forms import CoefficientShortfall
        raise CoefficientShortfall(n, form.coeff_count)
    q = form.q
    tau_bar = gauss_sum(chi.conjugate())
    vals = chi.value_table()
    c = chi.modulus
    total = 0.0 + 0.0j
    for n1 in divisors(n):
        mu1 = mobius(n1)
        if mu1 == 0 or math.gcd(n1, q) != 1:
            continue
        for n2 in divisors(n // n1):
            mu2 = mobius(n2)
            if mu2 == 0:
                continue
            n3 = n // (n1 * n2)
            lam = float(form.coeffs[n3 - 1]) / n3 ** ((form.k - 1) / 2)
            total += (vals[n1 % c] * mu1 * np.conj(vals[n2 % c]) * mu2
                      * lam * math.sqrt(n3))
    return complex(tau_bar * total)


def twisted_central_value(form, chi: DirichletCharacter, evaluator,
                          eps: float = 1e-12) -> complex:
    """L(f tensor chi, 1/2) for primitive chi with (c(chi), q) = 1, computed
    from additive twists: (1/tau(conj chi)) sum_a conj(chi)(a) L(f, a/c, k/2)."""
    from .twist_eval import TwistPoint

    if not chi.is_primitive:
        raise ValueError("twisted central values take the primitive character")
    c = chi.modulus
    if math.gcd(c, form.q) != 1:
        raise ValueError(f"conductor {c} not coprime to the level {form.q}")
    tau_bar = gauss_sum(chi.conjugate())
    if abs(tau_bar) < 1e-9:
        raise ArithmeticError("Gauss sum vanishes; chi was not primitive")
    vals = np.conj(chi.value_table())
    total = 0.0 + 0.0j
    for a in range(1, c + 1):
        if math.gcd(a, c) != 1 and c > 1:
            continue
        pt = TwistPoint.zero_orbit(a if c > 1 else 1, c, form.q)
        total += vals[a % c] * evaluator.central_value(pt, eps=eps).value
    return complex(total / tau_bar)


def additive_twist_sum(form, chi: DirichletCharacter, evaluator,
                       eps: float = 1e-12) -> complex:
    """sum over a in (Z/c)^x of conj(chi)(a) L(f, a/c, k/2) at the modulus
    of chi (not its conductor)."""
    from .twist_eval import TwistPoint

    c = chi.modulus
    vals = np.conj(chi.value_table())
    total = 0.0 + 0.0j
    for a in range(1, c + 1):
        if math.gcd(a, c) != 1 and c > 1:
            continue
        pt = TwistPoint.zero_orbit(a if c > 1 else 1, c, form.q)
        total += vals[a % c] * evaluator.central_value(pt, eps=eps).value
    return complex(total)


@dataclass
class BirchStevensResult:
    modulus: int
    conductor: int
    residual_forward: float    # sum_a conj(chi)(a) L(f,a/c) = nu * L(f x chi*, 1/2)
    residual_inverse: float    # L(f,a/c) = (1/phi(c)) sum_chi chi(a) nu L(...)
    scale: float


def birch_stevens_check(form, chi: DirichletCharacter, evaluator,
                        eps: float = 1e-12) -> BirchStevensResult:
    """Residuals of the two finite-Fourier identities between additive and
    multiplicative central values, both sides computed from additive twists.

    Requires (c, q) = 1 so the additive points lie in the zero orbit and
    the naive twisted L-value is the automorphic one."""
    c = chi.modulus
    if math.gcd(c, form.q) != 1:
        raise ValueError(f"modulus {c} not coprime to level {form.q}")
    chi_star = chi.primitive_inducing()
    lhs = additive_twist_sum(form, chi, evaluator, eps=eps)
    weight = nu_weight(form, chi_star, c // chi.conductor)
    lval = twisted_central_value(form, chi_star, evaluator, eps=eps)
    rhs = weight * lval

    # inverse identity, checked at every residue through the full dual group
    table = chi.table
    phi = euler_phi(c)
    weighted = {}
    for psi in table:
        w = nu_weight(form, psi.primitive_inducing(), c // psi.conductor) \
            * twisted_central_value(form, psi.primitive_inducing(), evaluator,
                                    eps=eps)
        weighted[psi.exponents] = (psi, w)
    from .twist_eval import TwistPoint

    mass = 0.0
    worst = 0.0
    for a in range(1, max(c, 2)):
        if math.gcd(a, c) != 1:
            continue
        direct = evaluator.central_value(
            TwistPoint.zero_orbit(a if c > 1 else 1, c, form.q), eps=eps).value
        mass += abs(direct)
        recon = sum(psi(a) * w for psi, w in weighted.values()) / phi
        worst = max(worst, abs(direct - recon))
    scale = max(abs(lhs), abs(rhs), 1e-3 * max(mass, 1.0))
    return BirchStevensResult(c, chi.conductor,
                              abs(lhs - rhs) / scale,
                              worst / max(mass / phi, 1e-3),
                              scale)


def family_average(form, n: int, X: float, evaluator,
                   eps: float = 1e-12) -> float:
    """Character-side value of the wide-family average

    sum_{c <= X, (c,q)=1} phi(c)^(1-2n) sum_{chi_1..chi_2n mod c,
         prod chi_i principal} chi_1(-1)...chi_n(-1)
         prod_i nu(f, chi_i*, c/c(chi_i)) L(f tensor chi_i*, 1/2);

    by orthogonality this equals sum_{0<a<c<=X, (qa,c)=1} |L(f,a/c,k/2)|^2n,
    which is the independent oracle used by the tests."""
    if n < 1:
        raise ValueError("n must be >= 1")
    q = form.q
    total = 0.0
    for c in range(2, int(math.floor(X + 1e-12)) + 1):
        if math.gcd(c, q) != 1:
            continue
        phi = euler_phi(c)
        if phi ** (2 * n - 1) > FAMILY_TUPLE_CEILING:
            raise ValueError(
                f"refusing {phi ** (2 * n - 1)} character tuples at c={c}; "
                f"raise FAMILY_TUPLE_CEILING to override")
        table = character_group(c)
        weighted = {}
        for psi in table:
            star = psi.primitive_inducing()
            w = nu_weight(form, star, c // psi.conductor) \
                * twisted_central_value(form, star, evaluator, eps=eps)
            weighted[psi.exponents] = w
        chars = list(table)
        contrib = 0.0 + 0.0j
        for tup in _tuples_with_principal_product(chars, 2 * n):
            sign = 1.0
            for chi in tup[:n]:
                sign *= chi.parity
            prod = sign + 0.0j
            for chi in tup:
                prod *= weighted[chi.exponents]
            contrib += prod
        total += (contrib / phi ** (2 * n - 1)).real
    return total


def _tuples_with_principal_product(chars, length: int):
    """All tuples (chi_1..chi_len) whose product is principal; the last
    entry is determined by the first len-1."""
    by_exp = {chi.exponents: chi for chi in chars}
    table = chars[0].table if chars else None

    def rec(prefix):
        if len(prefix) == length - 1:
            acc = table.principal()
            for chi in prefix:
                acc = acc.mul(chi)
            last = by_exp[acc.conjugate().exponents]
            yield tuple(prefix) + (last,)
            return
        for chi in chars:
            yield from rec(prefix + [chi])

    if table is not None:
        yield from rec([])
