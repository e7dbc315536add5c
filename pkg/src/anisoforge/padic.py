"""Truncated p-adic integers with tracked precision, and Hensel lifting."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import PrecisionExhausted, PreconditionFailed, ShapeMismatch


@dataclass(frozen=True, order=True)
class AtLeast:
    """Valuation of an element that vanishes at the working precision."""

    bound: int

    def __str__(self):
        return f">={self.bound}"


def int_valuation(n: int, p: int, cap: int | None = None) -> int:
    """Largest k with p^k | n, capped at ``cap``; n = 0 returns ``cap``."""
    if n == 0:
        if cap is None:
            raise ValueError("valuation of 0 needs a cap")
        return cap
    k = 0
    while n % p == 0:
        n //= p
        k += 1
        if cap is not None and k >= cap:
            return cap
    return k


def is_exact(v) -> bool:
    return not isinstance(v, AtLeast)


@dataclass(frozen=True)
class PadicInt:
    """An element of Z_p known modulo p^N.

    ``value`` is always reduced into ``[0, p^N)``.
    """

    p: int
    N: int
    value: int

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("precision must be >= 1")
        object.__setattr__(self, "value", self.value % self.p**self.N)

    @property
    def modulus(self) -> int:
        return self.p**self.N

    # -- arithmetic -----------------------------------------------------

    def _coerce(self, other) -> int:
        if isinstance(other, PadicInt):
            if (other.p, other.N) != (self.p, self.N):
                raise ShapeMismatch(
                    f"mixing Z/{self.p}^{self.N} with Z/{other.p}^{other.N}"
                )
            return other.value
        if isinstance(other, int):
            return other
        return NotImplemented

    def _make(self, value):
        return PadicInt(self.p, self.N, value)

    def __add__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self._make(self.value + o)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self._make(self.value - o)

    def __rsub__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self._make(o - self.value)

    def __mul__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self._make(self.value * o)

    __rmul__ = __mul__

    def __neg__(self):
        return self._make(-self.value)

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        return self._make(pow(self.value, e, self.modulus))

    def __eq__(self, other):
        if isinstance(other, int):
            return self.value == other % self.modulus
        if isinstance(other, PadicInt):
            return (self.p, self.N, self.value) == (other.p, other.N, other.value)
        return NotImplemented

    def __hash__(self):
        return hash((self.p, self.N, self.value))

    def __int__(self):
        return self.value

    def __repr__(self):
        return f"PadicInt({self.value} mod {self.p}^{self.N})"

    # -- valuation ------------------------------------------------------

    def valuation(self):
        """Exact valuation, or ``AtLeast(N)`` when the value is 0 mod p^N."""
        if self.value == 0:
            return AtLeast(self.N)
        return int_valuation(self.value, self.p)

    def is_unit(self) -> bool:
        return self.value % self.p != 0

    def is_zero(self) -> bool:
        return self.value == 0

    def unit_part(self) -> tuple[int, "PadicInt"]:
        """Split a nonzero x as p^v * u; u is known only mod p^(N-v)."""
        v = self.valuation()
        if not is_exact(v):
            raise PrecisionExhausted("zero has no unit part")
        return v, PadicInt(self.p, self.N - v, self.value // self.p**v)

    def inverse(self) -> "PadicInt":
        if not self.is_unit():
            raise ZeroDivisionError(f"{self!r} is not a unit")
        return self._make(pow(self.value, -1, self.modulus))

    def exact_divide(self, other) -> "PadicInt":
        """Divide by ``other`` when the quotient lies in Z_p.

        A divisor of valuation d leaves the quotient known mod p^(N-d), so the
        result carries precision N - d.
        """
        o = self._coerce(other)
        if o is NotImplemented:
            raise TypeError(f"cannot divide by {other!r}")
        divisor = PadicInt(self.p, self.N, o)
        d = divisor.valuation()
        if not is_exact(d):
            raise PrecisionExhausted("divisor is 0 at working precision")
        mine = self.valuation()
        if is_exact(mine) and mine < d:
            raise ValueError("quotient is not integral")
        if d == 0:
            return self * divisor.inverse()
        M = self.N - d
        num = self.value // self.p**d
        unit = (divisor.value // self.p**d) % self.p**M
        return PadicInt(self.p, M, num * pow(unit, -1, self.p**M))

    def residue(self) -> int:
        return self.value % self.p

    def lift(self, N: int) -> "PadicInt":
        """Same integer representative at a different precision."""
        return PadicInt(self.p, N, self.value)

    def to_dict(self):
        return {"p": self.p, "N": self.N, "value": str(self.value)}

    @classmethod
    def from_dict(cls, d):
        return cls(int(d["p"]), int(d["N"]), int(d["value"]))


def val(x: PadicInt):
    return x.valuation()


# ---------------------------------------------------------------- polynomials

@dataclass(frozen=True)
class PadicPoly:
    """Univariate polynomial over Z/p^N, coefficients low degree first."""

    p: int
    N: int
    coeffs: tuple[int, ...]

    def __post_init__(self):
        m = self.p**self.N
        c = [int(a) % m for a in self.coeffs]
        while c and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(c))

    @classmethod
    def from_padics(cls, coeffs):
        coeffs = list(coeffs)
        if not coeffs:
            raise ValueError("need at least one coefficient to fix p and N")
        p, N = coeffs[0].p, coeffs[0].N
        for c in coeffs:
            if (c.p, c.N) != (p, N):
                raise ShapeMismatch("coefficients must share p and N")
        return cls(p, N, tuple(c.value for c in coeffs))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def coefficient(self, i: int) -> PadicInt:
        c = self.coeffs[i] if i < len(self.coeffs) else 0
        return PadicInt(self.p, self.N, c)

    def derivative(self) -> "PadicPoly":
        return PadicPoly(self.p, self.N, tuple(i * c for i, c in enumerate(self.coeffs))[1:])

    def eval_int(self, x: int, modulus: int | None = None) -> int:
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
            if modulus is not None:
                acc %= modulus
        return acc

    def __call__(self, x) -> PadicInt:
        xv = x.value if isinstance(x, PadicInt) else int(x)
        m = self.p**self.N
        return PadicInt(self.p, self.N, self.eval_int(xv, m))


def hensel_lift(f: PadicPoly, a) -> PadicInt:
    """Newton-lift an approximate root ``a`` to a root of ``f`` mod p^N.

    Requires 2 v(f'(a)) < v(f(a)). The coefficients are read as integer
    representatives, the true p-adic root c of that integer polynomial is
    approximated to p^(N + v(f'(a))), and c mod p^N is returned; then
    f(c) = 0 mod p^N and v(c - a) = v(f(a)) - v(f'(a)).
    """
    p, N = f.p, f.N
    a_val = a.value if isinstance(a, PadicInt) else int(a) % p**N
    fa = f(a_val)
    dfa = f.derivative()(a_val)
    vf, vd = fa.valuation(), dfa.valuation()
    if not is_exact(vd):
        if is_exact(vf):
            raise PreconditionFailed(f"v(f'(a)) >= {N} while v(f(a)) = {vf}")
        raise PrecisionExhausted("f(a) and f'(a) both vanish at working precision")
    if not is_exact(vf):
        if 2 * vd < N:
            return PadicInt(p, N, a_val)
        raise PrecisionExhausted(
            f"f(a) = 0 mod p^{N} but 2 v(f'(a)) = {2 * vd} is not below {N}"
        )
    if 2 * vd >= vf:
        raise PreconditionFailed(f"2 v(f'(a)) = {2 * vd} is not below v(f(a)) = {vf}")

    # Work mod p^M; F(c)/p^vd is then known mod p^(M - vd) = p^N.
    M = N + vd
    mod_m = p**M
    mod_n = p**N
    dcoeffs = [i * c for i, c in enumerate(f.coeffs)][1:]
    c = a_val
    while True:
        fc = f.eval_int(c, mod_m)
        if fc == 0:
            break
        dfc = 0
        for coeff in reversed(dcoeffs):
            dfc = (dfc * c + coeff) % mod_m
        # v(F'(c)) stays vd along the iteration
        unit = (dfc // p**vd) % mod_n
        step = (fc // p**vd) * pow(unit, -1, mod_n) % mod_n
        c_next = (c - step) % mod_m
        if c_next == c:
            break
        c = c_next
    return PadicInt(p, N, c)


def teichmuller_lift(u, p: int | None = None, N: int | None = None) -> PadicInt:
    """The root of X^(p-1) - 1 congruent to the unit ``u`` mod p."""
    if isinstance(u, PadicInt):
        p, N, value = u.p, u.N, u.value
    else:
        if p is None or N is None:
            raise ValueError("p and N are required for an int argument")
        value = int(u)
    if value % p == 0:
        raise PreconditionFailed(f"{value} is not a unit mod {p}")
    coeffs = [0] * p
    coeffs[0], coeffs[p - 1] = -1, 1
    return hensel_lift(PadicPoly(p, N, tuple(coeffs)), PadicInt(p, N, value))
