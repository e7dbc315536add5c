"""Homogeneous forms over Z/p^N: norm forms, their products, and the
blocked forms obtained by weighting copies of a product with powers of a
uniformizer.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from math import prod

from .arith import PairSeqEntry, SigmaSPlan, TripleSeqEntry, derive_plan
from .errors import NotPrimitive, PlanViolation, ShapeMismatch
from .linalg import berkowitz_det
from .padic import PadicInt
from .tower import (
    StagePlan,
    UExtElem,
    UnramifiedRing,
    is_primitive_residue,
    make_unramified,
    power_basis_rank,
    stage_value_group_check,
)


@dataclass(frozen=True, eq=True)
class HomogeneousForm:
    """Sparse form: exponent vector -> coefficient in [0, p^N).

    Zero coefficients are never stored. The zero form keeps whatever
    ``degree`` it was created with and adopts the other operand's degree in
    sums.
    """

    num_vars: int
    degree: int
    p: int
    N: int
    terms: dict = field(default_factory=dict, compare=True)

    def __post_init__(self):
        m = self.p**self.N
        clean = {}
        for exp, c in self.terms.items():
            exp = tuple(exp)
            if len(exp) != self.num_vars:
                raise ShapeMismatch(f"exponent {exp} has wrong length for {self.num_vars} variables")
            if sum(exp) != self.degree:
                raise ValueError(f"monomial {exp} is not of degree {self.degree}")
            c = int(c) % m
            if c:
                clean[exp] = c
        object.__setattr__(self, "terms", clean)

    # -- constructors ---------------------------------------------------

    @classmethod
    def constant(cls, c, num_vars, p, N):
        return cls(num_vars, 0, p, N, {(0,) * num_vars: c})

    @classmethod
    def zero(cls, num_vars, p, N, degree=0):
        return cls(num_vars, degree, p, N, {})

    @classmethod
    def linear(cls, coeffs, p, N):
        n = len(coeffs)
        terms = {}
        for i, c in enumerate(coeffs):
            e = [0] * n
            e[i] = 1
            terms[tuple(e)] = c
        return cls(n, 1, p, N, terms)

    # -- arithmetic -----------------------------------------------------

    @property
    def modulus(self) -> int:
        return self.p**self.N

    def is_zero(self) -> bool:
        return not self.terms

    def _check(self, other):
        if (other.num_vars, other.p, other.N) != (self.num_vars, self.p, self.N):
            raise ShapeMismatch("forms live in different rings")

    def __add__(self, other):
        if isinstance(other, int) and other == 0:
            return self
        self._check(other)
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        if other.degree != self.degree:
            raise ValueError(f"adding forms of degree {self.degree} and {other.degree}")
        terms = dict(self.terms)
        for e, c in other.terms.items():
            terms[e] = terms.get(e, 0) + c
        return HomogeneousForm(self.num_vars, self.degree, self.p, self.N, terms)

    __radd__ = __add__

    def __neg__(self):
        return HomogeneousForm(
            self.num_vars, self.degree, self.p, self.N, {e: -c for e, c in self.terms.items()}
        )

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, PadicInt)):
            s = other.value if isinstance(other, PadicInt) else other
            return HomogeneousForm(
                self.num_vars, self.degree, self.p, self.N, {e: c * s for e, c in self.terms.items()}
            )
        self._check(other)
        m = self.modulus
        terms: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                terms[e] = (terms.get(e, 0) + c1 * c2) % m
        return HomogeneousForm(self.num_vars, self.degree + other.degree, self.p, self.N, terms)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        result = HomogeneousForm.constant(1, self.num_vars, self.p, self.N)
        for _ in range(e):
            result = result * self
        return result

    # -- inspection -----------------------------------------------------

    def coefficient(self, exp) -> PadicInt:
        return PadicInt(self.p, self.N, self.terms.get(tuple(exp), 0))

    def essential_variables(self) -> list[int]:
        used = set()
        for e in self.terms:
            used.update(i for i, a in enumerate(e) if a)
        return sorted(used)

    def residue(self) -> "HomogeneousForm":
        return self.at_precision(1)

    def at_precision(self, N: int) -> "HomogeneousForm":
        if N > self.N:
            raise ValueError("cannot raise precision of a truncated form")
        return HomogeneousForm(self.num_vars, self.degree, self.p, N, self.terms)

    def int_terms(self):
        return sorted(self.terms.items())

    def embed(self, offset: int, total_vars: int) -> "HomogeneousForm":
        """Same form on variables offset .. offset+num_vars-1 of a larger set."""
        pad_left, pad_right = (0,) * offset, (0,) * (total_vars - offset - self.num_vars)
        return HomogeneousForm(
            total_vars,
            self.degree,
            self.p,
            self.N,
            {pad_left + e + pad_right: c for e, c in self.terms.items()},
        )

    # -- evaluation -----------------------------------------------------

    def _values(self, values) -> list[int]:
        values = list(values)
        if len(values) != self.num_vars:
            raise ShapeMismatch(f"expected {self.num_vars} values, got {len(values)}")
        out = []
        for v in values:
            if isinstance(v, PadicInt):
                if (v.p, v.N) != (self.p, self.N):
                    raise ShapeMismatch(f"value {v!r} is not in Z/{self.p}^{self.N}")
                out.append(v.value)
            else:
                out.append(int(v))
        return out

    def evaluate_int(self, values, modulus=None) -> int:
        m = modulus or self.modulus
        xs = [v % m for v in values]
        powers = [[1] for _ in xs]
        acc = 0
        for e, c in self.terms.items():
            term = c
            for i, a in enumerate(e):
                if a:
                    pw = powers[i]
                    while len(pw) <= a:
                        pw.append(pw[-1] * xs[i] % m)
                    term = term * pw[a]
            acc += term
        return acc % m

    def evaluate(self, values) -> PadicInt:
        return PadicInt(self.p, self.N, self.evaluate_int(self._values(values)))

    def __call__(self, values) -> PadicInt:
        return self.evaluate(values)

    def evaluate_generic(self, values, zero):
        """Evaluate at elements of any ring that accepts int scalars."""
        values = list(values)
        if len(values) != self.num_vars:
            raise ShapeMismatch(f"expected {self.num_vars} values, got {len(values)}")
        acc = zero
        for e, c in self.terms.items():
            term = None
            for i, a in enumerate(e):
                if a:
                    factor = values[i] ** a
                    term = factor if term is None else term * factor
            acc = acc + (term * c if term is not None else c)
        return acc

    # -- serialization --------------------------------------------------

    def to_dict(self):
        return {
            "kind": "expanded",
            "num_vars": self.num_vars,
            "degree": self.degree,
            "p": self.p,
            "N": self.N,
            "monomials": [[list(e), str(c)] for e, c in sorted(self.terms.items())],
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            int(d["num_vars"]),
            int(d["degree"]),
            int(d["p"]),
            int(d["N"]),
            {tuple(e): int(c) for e, c in d["monomials"]},
        )


# ---------------------------------------------------------------- norm forms


def _norm_form_unchecked(ring: UnramifiedRing, xi: UExtElem, k: int) -> HomogeneousForm:
    p, N = ring.p, ring.N
    f = ring.f
    powers = []
    cur = ring.one
    for _ in range(k):
        powers.append(cur.multiplication_matrix())
        cur = cur * xi
    matrix = [
        [HomogeneousForm.linear([powers[i][r][c] for i in range(k)], p, N) for c in range(f)]
        for r in range(f)
    ]
    zero = HomogeneousForm.zero(k, p, N)
    one = HomogeneousForm.constant(1, k, p, N)
    return berkowitz_det(matrix, zero, one)


def norm_form(ring: UnramifiedRing, xi: UExtElem, k: int | None = None) -> HomogeneousForm:
    """N(X_1 + xi X_2 + ... + xi^(k-1) X_k), a form of degree f in k variables.

    Computed as the determinant of multiplication by the generic element,
    whose matrix entries are linear forms.
    """
    k = ring.f if k is None else k
    if not 1 <= k <= ring.f:
        raise ValueError(f"need 1 <= k <= {ring.f}, got {k}")
    if xi.ring != ring:
        raise ValueError("generator does not belong to the ring")
    if not is_primitive_residue(xi):
        raise NotPrimitive(f"{xi!r} does not have a primitive residue")
    return _norm_form_unchecked(ring, xi, k)


def norm_minus_scaled_power(ring: UnramifiedRing, a, xi: UExtElem | None = None) -> HomogeneousForm:
    """N(X_1, ..., X_n) - a X_(n+1)^n with n the degree of ``ring``."""
    n = ring.f
    xi = ring.gen if xi is None else xi
    if n == 1:
        xi = ring.one
    base = norm_form(ring, xi, n).embed(0, n + 1)
    a = a.value if isinstance(a, PadicInt) else int(a)
    top = HomogeneousForm(n + 1, n, ring.p, ring.N, {(0,) * n + (n,): -a})
    return base + top


def choose_generator(ring: UnramifiedRing, seed: int = 0, tries: int = 1000) -> UExtElem:
    """First basis monomial with primitive residue, else a seeded random unit."""
    for i in range(ring.f):
        m = ring.monomial(i)
        if is_primitive_residue(m):
            return m
    rng = random.Random(seed)
    for _ in range(tries):
        e = ring.element([rng.randrange(ring.order) for _ in range(ring.f)])
        if is_primitive_residue(e):
            return e
    raise NotPrimitive(f"no primitive residue found in {tries} tries")


# ---------------------------------------------------------------- product and block forms


@dataclass(frozen=True)
class ProductForm:
    """A product of forms in the same variables, kept unexpanded."""

    factors: tuple[HomogeneousForm, ...]

    def __post_init__(self):
        if not self.factors:
            raise ValueError("need at least one factor")
        first = self.factors[0]
        for g in self.factors:
            if (g.num_vars, g.p, g.N) != (first.num_vars, first.p, first.N):
                raise ShapeMismatch("factors must share variables and precision")

    @property
    def num_vars(self) -> int:
        return self.factors[0].num_vars

    @property
    def degree(self) -> int:
        return sum(g.degree for g in self.factors)

    @property
    def p(self) -> int:
        return self.factors[0].p

    @property
    def N(self) -> int:
        return self.factors[0].N

    def evaluate_int(self, values) -> int:
        m = self.p**self.N
        acc = 1
        for g in self.factors:
            acc = acc * g.evaluate_int(values, m) % m
        return acc

    def evaluate(self, values) -> PadicInt:
        return PadicInt(self.p, self.N, self.evaluate_int(self.factors[0]._values(values)))

    __call__ = evaluate

    def expand(self) -> HomogeneousForm:
        out = self.factors[0]
        for g in self.factors[1:]:
            out = out * g
        return out

    def essential_variables(self) -> list[int]:
        used = set()
        for g in self.factors:
            used.update(g.essential_variables())
        return sorted(used)


@dataclass(frozen=True)
class BlockForm:
    """sum_j pi^j g(block j), j = 1..blocks, over disjoint blocks of width k."""

    g: ProductForm
    blocks: int
    pi: PadicInt

    @property
    def k(self) -> int:
        return self.g.num_vars

    @property
    def num_vars(self) -> int:
        return self.blocks * self.k

    @property
    def degree(self) -> int:
        return self.g.degree

    @property
    def p(self) -> int:
        return self.g.p

    @property
    def N(self) -> int:
        return self.g.N

    def split(self, values):
        values = list(values)
        if len(values) != self.num_vars:
            raise ShapeMismatch(f"expected {self.num_vars} values, got {len(values)}")
        k = self.k
        return [values[j * k : (j + 1) * k] for j in range(self.blocks)]

    def block_values(self, values) -> list[PadicInt]:
        """g evaluated on each block, before weighting."""
        return [self.g.evaluate(b) for b in self.split(values)]

    def evaluate(self, values) -> PadicInt:
        m = self.p**self.N
        acc = 0
        weight = 1
        for block in self.split(values):
            weight = weight * self.pi.value % m
            acc += weight * self.g.evaluate_int(self.g.factors[0]._values(block))
        return PadicInt(self.p, self.N, acc)

    __call__ = evaluate

    def expand(self) -> HomogeneousForm:
        g = self.g.expand()
        total = HomogeneousForm.zero(self.num_vars, self.p, self.N, self.degree)
        for j in range(1, self.blocks + 1):
            total = total + g.embed((j - 1) * self.k, self.num_vars) * (self.pi**j)
        return total


# ---------------------------------------------------------------- specs


@dataclass(frozen=True)
class BlockFormSpec:
    """Everything needed to rebuild g and f for one sequence entry."""

    kind: str
    n: int
    entry: PairSeqEntry | TripleSeqEntry
    k: int
    p_n: int
    rings: tuple[UnramifiedRing, ...]
    generators: tuple[UExtElem, ...]
    pi: PadicInt
    stage: StagePlan

    @property
    def degrees(self) -> tuple[int, ...]:
        return tuple(r.f for r in self.rings)

    @property
    def p(self) -> int:
        return self.stage.p

    @property
    def N(self) -> int:
        return self.pi.N

    def structure_problems(self) -> list[str]:
        problems = []
        if sum(self.degrees) != self.p_n:
            problems.append(f"factor degrees {self.degrees} do not sum to {self.p_n}")
        if any(d < self.k for d in self.degrees):
            problems.append(f"a factor degree is below the block width {self.k}")
        for ring, xi in zip(self.rings, self.generators):
            if xi.ring != ring:
                problems.append(f"generator of the degree-{ring.f} factor lives in another ring")
            elif not is_primitive_residue(xi):
                problems.append(f"generator of the degree-{ring.f} factor is not primitive")
            elif power_basis_rank(xi, self.k) != self.k:
                problems.append(f"powers of the degree-{ring.f} generator are dependent")
        return problems

    def at_precision(self, N: int) -> "BlockFormSpec":
        rings = tuple(r.at_precision(N) for r in self.rings)
        gens = tuple(r.element(g.coeffs) for r, g in zip(rings, self.generators))
        return BlockFormSpec(
            self.kind, self.n, self.entry, self.k, self.p_n, rings, gens, self.pi.lift(N), self.stage
        )

    def to_dict(self):
        return {
            "kind": self.kind,
            "n": self.n,
            "entry": self.entry.to_dict(),
            "k": self.k,
            "p_n": str(self.p_n),
            "factors": [
                {"ring": r.to_dict(), "xi": g.to_list()} for r, g in zip(self.rings, self.generators)
            ],
            "blocks": str(self.p_n),
            "pi": self.pi.to_dict(),
            "stage": self.stage.to_dict(),
        }

    @classmethod
    def from_dict(cls, d):
        kind = d["kind"]
        entry_cls = PairSeqEntry if kind == "pair" else TripleSeqEntry
        rings = tuple(UnramifiedRing.from_dict(f["ring"]) for f in d["factors"])
        gens = tuple(r.element([int(c) for c in f["xi"]]) for r, f in zip(rings, d["factors"]))
        return cls(
            kind,
            int(d["n"]),
            entry_cls.from_dict(d["entry"]),
            int(d["k"]),
            int(d["p_n"]),
            rings,
            gens,
            PadicInt.from_dict(d["pi"]),
            StagePlan.from_dict(d["stage"]),
        )


def audit_precision(p_n: int, m_cap: int = 3) -> int:
    """Working precision p_n (m_cap + 1) + p_n + 8 guard digits."""
    return p_n * (m_cap + 1) + p_n + 8


def make_spec(seq, n: int, p: int = 5, N: int | None = None, ram: int = 1,
              plan: SigmaSPlan | None = None) -> BlockFormSpec:
    """Spec for entry n of a pair or triple sequence over base Q_p.

    Factor degrees are (k_n, p_n - k_n) for pairs and (t_n, theta_n, y_n)
    for triples; each factor gets the lex-least unramified ring and the
    first basis monomial with primitive residue. pi = p.
    """
    seq = list(seq)
    entry = seq[n - 1]
    if isinstance(entry, PairSeqEntry):
        kind, k, degrees = "pair", entry.k, (entry.k, entry.p - entry.k)
    else:
        kind, k, degrees = "triple", entry.t, entry.parts
    N = audit_precision(entry.p) if N is None else N
    plan = derive_plan(seq[:n]) if plan is None else plan
    rings = tuple(make_unramified(p, d, N) for d in degrees)
    gens = tuple(choose_generator(r) for r in rings)
    stage = StagePlan(p, prod(degrees), ram, plan)
    return BlockFormSpec(kind, n, entry, k, entry.p, rings, gens, PadicInt(p, N, p), stage)


def build_g(spec: BlockFormSpec) -> ProductForm:
    """Product of the norm forms of every factor, all on the same k variables."""
    return ProductForm(tuple(norm_form(r, xi, spec.k) for r, xi in zip(spec.rings, spec.generators)))


def build_f(spec: BlockFormSpec, g: ProductForm | None = None) -> BlockForm:
    if spec.pi.valuation() != 1:
        raise PlanViolation(f"v(pi) = {spec.pi.valuation()}, expected 1")
    stage_value_group_check(spec.stage, spec.p_n)
    g = build_g(spec) if g is None else g
    if g.degree != spec.p_n:
        raise ValueError(f"g has degree {g.degree}, expected {spec.p_n}")
    return BlockForm(g, spec.p_n, spec.pi)


def essential_variable_count(spec: BlockFormSpec) -> int:
    """Variables f depends on, read from the factored representation.

    A block counts fully when every factor's linear argument has F_p-independent
    coefficient vectors, i.e. the residues of 1, xi, ..., xi^(k-1) have rank k.
    """
    per_block = min(power_basis_rank(xi, spec.k) for xi in spec.generators)
    return spec.p_n * per_block
