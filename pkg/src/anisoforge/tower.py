"""Unramified extensions of Z_p at finite precision, finite fields, and the
symbolic value-group bookkeeping of a construction stage.

A ring of residue degree f is (Z/p^N)[x]/(g) with g monic of degree f and
irreducible mod p. Elements are coefficient vectors in the power basis
1, x, ..., x^(f-1), which is an integral basis, so valuations are read off
coefficient-wise.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .arith import SigmaSPlan, prime_factors
from .errors import BudgetExceeded, PlanViolation, PreconditionFailed
from .linalg import berkowitz_det, rank_mod_p
from .padic import AtLeast, PadicInt, int_valuation

# ---------------------------------------------------------------- F_p[x]


def _trim(a):
    while a and a[-1] == 0:
        a.pop()
    return a


def _fp_mod(a, g, p):
    """Remainder of a modulo the monic polynomial g over F_p."""
    a = [x % p for x in a]
    dg = len(g) - 1
    for i in range(len(a) - 1, dg - 1, -1):
        c = a[i]
        if c:
            for j in range(dg + 1):
                a[i - dg + j] = (a[i - dg + j] - c * g[j]) % p
    return _trim(a[:dg])


def _fp_mulmod(a, b, g, p):
    if not a or not b:
        return []
    prod = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                prod[i + j] += x * y
    return _fp_mod(prod, g, p)


def _fp_powmod(a, e, g, p):
    result = [1]
    base = _fp_mod(list(a), g, p)
    while e:
        if e & 1:
            result = _fp_mulmod(result, base, g, p)
        base = _fp_mulmod(base, base, g, p)
        e >>= 1
    return _fp_mod(result, g, p)


def _fp_gcd(a, b, p):
    a, b = _trim([x % p for x in a]), _trim([x % p for x in b])
    while b:
        inv = pow(b[-1], -1, p)
        monic = [x * inv % p for x in b]
        a, b = monic, _fp_mod(a, monic, p)
    if a:
        inv = pow(a[-1], -1, p)
        a = [x * inv % p for x in a]
    return a


def _fp_sub(a, b, p):
    n = max(len(a), len(b))
    return _trim([((a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0)) % p for i in range(n)])


def is_irreducible_mod_p(g, p: int) -> bool:
    """Rabin's test for a monic polynomial (coefficients low degree first)."""
    g = [x % p for x in g]
    f = len(g) - 1
    if f < 1 or g[-1] != 1:
        return False
    if f == 1:
        return True
    if g[0] == 0:
        return False
    x = [0, 1]

    def frobenius_power(i):
        r = x
        for _ in range(i):
            r = _fp_powmod(r, p, g, p)
        return r

    if _fp_sub(frobenius_power(f), x, p):
        return False
    for r in prime_factors(f):
        h = _fp_sub(frobenius_power(f // r), x, p)
        if _fp_gcd(h, g, p) != [1]:
            return False
    return True


@lru_cache(maxsize=None)
def least_irreducible(p: int, f: int) -> tuple[int, ...]:
    """Lexicographically least monic irreducible of degree f over F_p.

    Order is on (c_(f-1), ..., c_0), i.e. reading the polynomial from the top.
    Returned low degree first, including the leading 1.
    """
    for top_down in itertools.product(range(p), repeat=f):
        coeffs = tuple(reversed(top_down)) + (1,)
        if is_irreducible_mod_p(coeffs, p):
            return coeffs
    raise AssertionError(f"no irreducible of degree {f} over F_{p}")


# ---------------------------------------------------------------- rings


@dataclass(frozen=True)
class UnramifiedRing:
    p: int
    f: int
    N: int
    modulus: tuple[int, ...]

    def __post_init__(self):
        mod = self.p**self.N
        coeffs = tuple(int(c) % mod for c in self.modulus)
        object.__setattr__(self, "modulus", coeffs)
        if len(coeffs) != self.f + 1 or coeffs[-1] != 1:
            raise ValueError(f"modulus must be monic of degree {self.f}")
        if not is_irreducible_mod_p(coeffs, self.p):
            raise ValueError(f"modulus {coeffs} is reducible mod {self.p}")

    @property
    def order(self) -> int:
        return self.p**self.N

    @property
    def residue_cardinality(self) -> int:
        return self.p**self.f

    def element(self, coeffs) -> "UExtElem":
        c = [int(x) for x in coeffs]
        if len(c) > self.f:
            c = reduce_mod_poly(c, self.modulus, self.order)
        c += [0] * (self.f - len(c))
        return UExtElem(self, tuple(x % self.order for x in c))

    def scalar(self, a) -> "UExtElem":
        a = a.value if isinstance(a, PadicInt) else int(a)
        return self.element([a])

    @property
    def zero(self) -> "UExtElem":
        return self.element([])

    @property
    def one(self) -> "UExtElem":
        return self.element([1])

    @property
    def gen(self) -> "UExtElem":
        return self.element([0, 1])

    def monomial(self, i: int) -> "UExtElem":
        return self.gen**i

    def residue_ring(self) -> "UnramifiedRing":
        return UnramifiedRing(self.p, self.f, 1, self.modulus)

    def at_precision(self, N: int) -> "UnramifiedRing":
        """Same modulus representatives read at precision N."""
        return UnramifiedRing(self.p, self.f, N, self.modulus)

    def to_dict(self):
        return {
            "p": self.p,
            "f": self.f,
            "N": self.N,
            "modulus": [str(c) for c in self.modulus],
        }

    @classmethod
    def from_dict(cls, d):
        return cls(int(d["p"]), int(d["f"]), int(d["N"]), tuple(int(c) for c in d["modulus"]))


def reduce_mod_poly(c, modulus, mod):
    """Reduce an integer coefficient list by a monic modulus, entries mod ``mod``."""
    f = len(modulus) - 1
    c = list(c)
    for i in range(len(c) - 1, f - 1, -1):
        top = c[i] % mod
        if top:
            for j in range(f):
                c[i - f + j] -= top * modulus[j]
        c[i] = 0
    return [x % mod for x in c[:f]]


@dataclass(frozen=True)
class UExtElem:
    ring: UnramifiedRing
    coeffs: tuple[int, ...]

    def _other(self, other):
        if isinstance(other, UExtElem):
            if other.ring != self.ring:
                raise ValueError("elements of different rings")
            return other.coeffs
        if isinstance(other, PadicInt):
            if (other.p, other.N) != (self.ring.p, self.ring.N):
                raise ValueError("scalar precision mismatch")
            other = other.value
        if isinstance(other, int):
            return (other,) + (0,) * (self.ring.f - 1)
        return None

    def __add__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return self.ring.element([a + b for a, b in zip(self.coeffs, o)])

    __radd__ = __add__

    def __sub__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return self.ring.element([a - b for a, b in zip(self.coeffs, o)])

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return self.ring.element([-a for a in self.coeffs])

    def __mul__(self, other):
        if isinstance(other, (int, PadicInt)):
            s = other.value if isinstance(other, PadicInt) else other
            return self.ring.element([a * s for a in self.coeffs])
        o = self._other(other)
        if o is None:
            return NotImplemented
        prod = [0] * (2 * self.ring.f - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(o):
                    prod[i + j] += a * b
        return self.ring.element(reduce_mod_poly(prod, self.ring.modulus, self.ring.order))

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            raise ValueError("negative powers are not supported")
        result, base = self.ring.one, self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def __repr__(self):
        return f"UExtElem({list(self.coeffs)} in Z/{self.ring.p}^{self.ring.N}[x]/{list(self.ring.modulus)})"

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def valuation(self):
        """min over coefficients; AtLeast(N) for the zero element."""
        nonzero = [c for c in self.coeffs if c]
        if not nonzero:
            return AtLeast(self.ring.N)
        return min(int_valuation(c, self.ring.p) for c in nonzero)

    def is_unit(self) -> bool:
        return any(c % self.ring.p for c in self.coeffs)

    def residue(self) -> "UExtElem":
        return residue(self)

    def multiplication_matrix(self):
        """Column j holds the coordinates of self * x^j."""
        f = self.ring.f
        cols = []
        cur = self
        x = self.ring.gen
        for _ in range(f):
            cols.append(cur.coeffs)
            cur = cur * x
        return [[cols[j][i] for j in range(f)] for i in range(f)]

    def norm(self) -> PadicInt:
        return norm(self)

    def to_list(self):
        return [str(c) for c in self.coeffs]


def make_unramified(p: int, f: int, N: int) -> UnramifiedRing:
    """Degree-f unramified ring over Z/p^N using the lex-least irreducible."""
    if f < 1:
        raise ValueError("residue degree must be >= 1")
    if p < 2 or prime_factors(p) != [p]:
        raise ValueError(f"{p} is not prime")
    return UnramifiedRing(p, f, N, least_irreducible(p, f))


def residue(e: UExtElem) -> UExtElem:
    """Coefficient-wise reduction mod p, as an element of F_(p^f)."""
    return e.ring.residue_ring().element(e.coeffs)


def power_basis_rank(e: UExtElem, count: int | None = None) -> int:
    """F_p-rank of the residues of 1, e, ..., e^(count-1)."""
    ring = e.ring
    count = ring.f if count is None else count
    r = residue(e)
    rows = []
    cur = r.ring.one
    for _ in range(count):
        rows.append(list(cur.coeffs))
        cur = cur * r
    return rank_mod_p(rows, ring.p)


def is_primitive_residue(e: UExtElem) -> bool:
    """True iff the residue of e generates F_(p^f) over F_p."""
    if not e.is_unit():
        return False
    return power_basis_rank(e) == e.ring.f


def norm(e: UExtElem) -> PadicInt:
    """Determinant of multiplication by e on the power basis."""
    ring = e.ring
    mod = ring.order
    d = berkowitz_det(e.multiplication_matrix(), 0, 1, reduce=lambda v: v % mod)
    return PadicInt(ring.p, ring.N, d)


def ostrowski_check(degree: int, e: int, f_res: int, p: int) -> bool:
    """Defect-free degree relation [L:K] = e * f for a discretely valued base."""
    for x in (degree, e, f_res, p):
        if x < 1:
            raise ValueError("arguments must be positive integers")
    return degree == e * f_res


# ---------------------------------------------------------------- finite fields


class FiniteField:
    """F_(p^e) with log/antilog tables for vectorized form evaluation.

    Elements are encoded as ints sum c_i p^i over the power basis of the
    lex-least irreducible modulus.
    """

    MAX_ORDER = 10**6

    def __init__(self, p: int, e: int = 1):
        q = p**e
        if q > self.MAX_ORDER:
            raise BudgetExceeded(f"F_{p}^{e} has {q} elements; tables capped at {self.MAX_ORDER}")
        self.p, self.e, self.q = p, e, q
        self.ring = make_unramified(p, e, 1)
        self.digits = np.array(
            [[(i // p**j) % p for j in range(e)] for i in range(q)], dtype=np.int64
        )
        gen = self._primitive_element()
        exp = np.zeros(q - 1, dtype=np.int64)
        log = np.full(q, -1, dtype=np.int64)
        cur = self.ring.one
        for i in range(q - 1):
            code = self.encode(cur)
            exp[i] = code
            log[code] = i
            cur = cur * gen
        self.exp, self.log = exp, log

    def encode(self, a: UExtElem) -> int:
        return sum(c % self.p * self.p**i for i, c in enumerate(a.coeffs))

    def decode(self, code: int) -> UExtElem:
        return self.ring.element([int(x) for x in self.digits[code]])

    def _primitive_element(self):
        if self.q == 2:
            return self.ring.one
        factors = prime_factors(self.q - 1)
        for code in range(1, self.q):
            a = self.decode(code)
            if all((a ** ((self.q - 1) // r)).coeffs != self.ring.one.coeffs for r in factors):
                return a
        raise AssertionError("multiplicative group has no generator")

    def eval_terms(self, terms, coords) -> np.ndarray:
        """Evaluate sum c * prod x_i^a_i at each row of ``coords`` (encoded).

        ``terms`` is a list of (exponent tuple, integer coefficient); returns
        an array of encoded results.
        """
        p, q = self.p, self.q
        coords = np.asarray(coords, dtype=np.int64)
        logs = self.log[coords]
        acc = np.zeros((coords.shape[0], self.e), dtype=np.int64)
        for expvec, c in terms:
            c %= p
            if not c:
                continue
            mask = np.ones(coords.shape[0], dtype=bool)
            L = np.zeros(coords.shape[0], dtype=np.int64)
            for i, a in enumerate(expvec):
                if a:
                    mask &= coords[:, i] != 0
                    L += a * np.where(logs[:, i] < 0, 0, logs[:, i])
            vals = self.exp[L % (q - 1)]
            acc += (c * self.digits[vals]) * mask[:, None]
        acc %= p
        weights = p ** np.arange(self.e, dtype=np.int64)
        return acc @ weights


# ---------------------------------------------------------------- stages


@dataclass(frozen=True)
class StagePlan:
    """A finite stage: base Q_p, unramified degree F, ramification index D.

    The value group of the stage is (1/D) Z with v(p) = 1.
    """

    p: int
    F: int
    D: int
    plan: SigmaSPlan

    @property
    def value_group(self) -> str:
        return "Z" if self.D == 1 else f"(1/{self.D})Z"

    def radical_primes(self) -> list[int]:
        return prime_factors(self.D)

    def respects_sigma(self) -> bool:
        """D must be built only from radical degrees outside Sigma."""
        return not set(self.radical_primes()) & set(self.plan.Sigma)

    def to_dict(self):
        return {
            "p": self.p,
            "F": str(self.F),
            "D": str(self.D),
            "value_group": self.value_group,
            "plan": self.plan.to_dict(),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(int(d["p"]), int(d["F"]), int(d["D"]), SigmaSPlan.from_dict(d["plan"]))


def stage_value_group_check(stage: StagePlan, target: int) -> bool:
    """Confirm v(p) = 1 is nonzero in (1/D)Z / target*(1/D)Z."""
    if target not in stage.plan.Sigma:
        raise PreconditionFailed(f"{target} is not in Sigma = {list(stage.plan.Sigma)}")
    if stage.D % target == 0:
        raise PlanViolation(f"{target} divides the ramification index D = {stage.D}")
    return True
