"""Exact integer machinery: CRT, primes in progressions, three-prime sums,
and the two prime sequences that drive the form constructions.

Everything here works on Python ints, so there is no width limit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd, isqrt

import sympy

from .budget import DEFAULT_FACTOR_LIMIT, search_budget
from .errors import (
    DisjointnessViolated,
    Inconsistent,
    NoDecomposition,
    PreconditionFailed,
    SearchBudgetExceeded,
)

# Below this bound primality is decided by trial division; up to 2**64 sympy
# runs Miller-Rabin with a base set proven sufficient, above it BPSW.
TRIAL_DIVISION_LIMIT = 2**32
PROVEN_PRIMALITY_LIMIT = 2**64


# ---------------------------------------------------------------- primes

def _trial_division_is_prime(n: int) -> bool:
    if n < 2:
        return False
    for q in (2, 3, 5):
        if n % q == 0:
            return n == q
    i = 7
    # wheel over residues coprime to 30
    steps = (4, 2, 4, 2, 4, 6, 2, 6)
    s = 0
    while i * i <= n:
        if n % i == 0:
            return False
        i += steps[s]
        s = (s + 1) % 8
    return True


def is_prime(n: int) -> bool:
    """Deterministic for n < 2**64; BPSW (no known counterexample) above."""
    if n < TRIAL_DIVISION_LIMIT:
        return _trial_division_is_prime(n)
    return bool(sympy.isprime(n))


def primality_method(n: int) -> str:
    """Name the test that :func:`is_prime` uses for ``n``.

    Only ``"bpsw"`` results are probable rather than proven.
    """
    if n < TRIAL_DIVISION_LIMIT:
        return "trial-division"
    if n < PROVEN_PRIMALITY_LIMIT:
        return "deterministic-miller-rabin"
    return "bpsw"


def primes_up_to(limit: int) -> list[int]:
    if limit < 2:
        return []
    sieve = bytearray([1]) * (limit + 1)
    sieve[0] = sieve[1] = 0
    for i in range(2, isqrt(limit) + 1):
        if sieve[i]:
            sieve[i * i :: i] = bytearray(len(range(i * i, limit + 1, i)))
    return [i for i, flag in enumerate(sieve) if flag]


def prime_factors(n: int, limit: int = DEFAULT_FACTOR_LIMIT) -> list[int]:
    """Sorted distinct prime divisors of ``n``.

    Raises SearchBudgetExceeded if a composite cofactor survives the bounded
    factoring effort.
    """
    n = abs(n)
    if n < 2:
        return []
    factors = sympy.factorint(n, limit=limit)
    for q in factors:
        if not is_prime(q):
            raise SearchBudgetExceeded(
                f"could not factor {n}: composite cofactor {q} left after limit {limit}"
            )
    return sorted(int(q) for q in factors)


# ---------------------------------------------------------------- CRT

def crt_solve(congruences) -> tuple[int, int]:
    """Solve x = r_i (mod m_i) for every pair; moduli need not be coprime.

    Returns ``(residue, lcm of moduli)`` with ``0 <= residue < lcm``.
    """
    r, m = 0, 1
    for residue, modulus in congruences:
        if modulus < 1:
            raise ValueError(f"modulus must be >= 1, got {modulus}")
        residue %= modulus
        g = gcd(m, modulus)
        if (residue - r) % g:
            raise Inconsistent(
                f"x = {r} mod {m} conflicts with x = {residue} mod {modulus}"
            )
        lcm = m // g * modulus
        # r + m*t = residue (mod modulus)  =>  t = (residue - r)/g * inv(m/g) mod modulus/g
        mg, modg = m // g, modulus // g
        t = ((residue - r) // g) * pow(mg, -1, modg) % modg if modg > 1 else 0
        r = (r + m * t) % lcm
        m = lcm
    return r, m


def find_prime_in_progression(a: int, m: int, lower: int, budget: int | None = None) -> int:
    """Smallest prime q >= lower with q = a (mod m)."""
    if m < 1:
        raise ValueError("modulus must be positive")
    if gcd(a, m) != 1:
        raise PreconditionFailed(f"gcd({a}, {m}) != 1: progression holds at most one prime")
    budget = search_budget(budget)
    q = lower + ((a - lower) % m)
    for _ in range(budget):
        if is_prime(q):
            return q
        q += m
    raise SearchBudgetExceeded(
        f"no prime = {a} mod {m} found above {lower} within {budget} steps"
    )


# ---------------------------------------------------------------- reports

@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str = ""

    def to_dict(self):
        return {"name": self.name, "passed": self.passed, "detail": self.detail}


@dataclass
class Report:
    checks: list[Check] = field(default_factory=list)

    def add(self, name, passed, detail=""):
        self.checks.append(Check(name, bool(passed), detail))

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def to_dict(self):
        return {"ok": self.ok, "checks": [c.to_dict() for c in self.checks]}


# ---------------------------------------------------------------- pair sequence

@dataclass(frozen=True)
class PairSeqEntry:
    n: int
    k: int
    p: int

    @property
    def invariant_product(self) -> int:
        """p_n * k_n * (p_n - k_n), the quantity in the gcd law."""
        return self.p * self.k * (self.p - self.k)

    def to_dict(self):
        return {"n": str(self.n), "k": str(self.k), "p": str(self.p)}

    @classmethod
    def from_dict(cls, d):
        return cls(int(d["n"]), int(d["k"]), int(d["p"]))


def pair_modulus(entries) -> int:
    """prod_j p_j * (k_j / 2^j) * (p_j - k_j) over the given entries.

    Raises ValueError when some k_j is not divisible by 2^j, since the
    product is then not an integer.
    """
    m = 1
    for e in entries:
        if e.k % (1 << e.n):
            raise ValueError(f"k_{e.n} = {e.k} is not divisible by 2^{e.n}")
        m *= e.p * (e.k >> e.n) * (e.p - e.k)
    return m


def gen_pair_sequence(n_max: int, budget: int | None = None) -> list[PairSeqEntry]:
    """The sequence (k_n, p_n) with least-solution tie-breaking.

    k_n is the least positive solution of k = 2^n (mod 2^(n+1)) and
    k = 1 (mod M); p_n is the least prime with p = 2 (mod M), p = 1 (mod k_n)
    and p >= 1 + 2 k_n, where M is :func:`pair_modulus` of the earlier entries.
    For n = 1 this reproduces (2, 5).
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    entries: list[PairSeqEntry] = []
    for n in range(1, n_max + 1):
        M = pair_modulus(entries)
        k, mod_k = crt_solve([(1 << n, 1 << (n + 1)), (1, M)])
        if k == 0:
            k = mod_k
        a, mod_p = crt_solve([(2, M), (1, k)])
        p = find_prime_in_progression(a, mod_p, 1 + 2 * k, budget)
        entries.append(PairSeqEntry(n, k, p))
    return entries


def verify_pair_congruences(seq) -> Report:
    """Check every defining congruence of a pair sequence plus the gcd law."""
    report = Report()
    seq = list(seq)
    for i, e in enumerate(seq, start=1):
        tag = f"n={e.n}"
        report.add(f"{tag}: index", e.n == i, f"expected {i}")
        report.add(f"{tag}: p_n prime", is_prime(e.p), primality_method(e.p))
        report.add(f"{tag}: p_n = 1 mod k_n", e.k > 0 and e.p % e.k == 1)
        report.add(f"{tag}: p_n >= 1 + 2k_n", e.p >= 1 + 2 * e.k)
        report.add(f"{tag}: 2 <= k_n <= (p_n-1)/2", 2 <= e.k <= (e.p - 1) // 2)
        report.add(
            f"{tag}: k_n = 2^n mod 2^(n+1)",
            e.k % (1 << (e.n + 1)) == (1 << e.n),
            f"k_n mod 2^{e.n + 1} = {e.k % (1 << (e.n + 1))}",
        )
        if i == 1:
            report.add(f"{tag}: (k_1, p_1) = (2, 5)", (e.k, e.p) == (2, 5))
            continue
        try:
            M = pair_modulus(seq[: i - 1])
        except ValueError as exc:
            report.add(f"{tag}: modulus integral", False, str(exc))
            continue
        report.add(f"{tag}: modulus integral", True, f"M = {M}")
        report.add(f"{tag}: k_n = 1 mod M", e.k % M == 1 % M)
        report.add(f"{tag}: p_n = 2 mod M", e.p % M == 2 % M)
        report.add(f"{tag}: p_(n-1) < p_n", seq[i - 2].p < e.p)
    for a in range(len(seq)):
        for b in range(a + 1, len(seq)):
            m_entry, n_entry = seq[a], seq[b]
            g = gcd(m_entry.invariant_product, n_entry.invariant_product)
            report.add(
                f"gcd law m={m_entry.n}, n={n_entry.n}",
                g == 1 << m_entry.n,
                f"gcd = {g}, expected 2^{m_entry.n}",
            )
    return report


# ---------------------------------------------------------------- triple sequence

@dataclass(frozen=True)
class TripleSeqEntry:
    n: int
    t: int
    theta: int
    y: int
    p: int

    @property
    def invariant_product(self) -> int:
        return self.p * self.t * self.theta * self.y

    @property
    def parts(self) -> tuple[int, int, int]:
        return (self.t, self.theta, self.y)

    def to_dict(self):
        return {
            "n": str(self.n),
            "t": str(self.t),
            "theta": str(self.theta),
            "y": str(self.y),
            "p": str(self.p),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(int(d["n"]), int(d["t"]), int(d["theta"]), int(d["y"]), int(d["p"]))


def _next_prime(n: int) -> int:
    q = n + 1
    while not is_prime(q):
        q += 1
    return q


def gen_triple_sequence(n_max: int, budget: int | None = None) -> list[TripleSeqEntry]:
    """Lexicographically least (t, theta, y) of primes with prime sum.

    Each stage requires t > max(2, p_(n-1)), so all primes of a later stage
    exceed all primes of earlier ones.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    budget = search_budget(budget)
    entries: list[TripleSeqEntry] = []
    floor = 2
    for n in range(1, n_max + 1):
        t = _next_prime(floor)
        theta = _next_prime(t)
        y = theta
        for _ in range(budget):
            y = _next_prime(y)
            if is_prime(t + theta + y):
                break
        else:
            raise SearchBudgetExceeded(f"no y found for t={t}, theta={theta}")
        entry = TripleSeqEntry(n, t, theta, y, t + theta + y)
        entries.append(entry)
        floor = entry.p
    return entries


def verify_triple_sequence(seq) -> Report:
    report = Report()
    seq = list(seq)
    for i, e in enumerate(seq, start=1):
        tag = f"n={e.n}"
        report.add(f"{tag}: index", e.n == i, f"expected {i}")
        report.add(
            f"{tag}: t, theta, y, p prime",
            all(is_prime(q) for q in (e.t, e.theta, e.y, e.p)),
        )
        report.add(f"{tag}: t + theta + y = p", e.t + e.theta + e.y == e.p)
        report.add(f"{tag}: 2 < t < theta < y", 2 < e.t < e.theta < e.y)
        report.add(f"{tag}: t < p/3", 3 * e.t < e.p)
        if i > 1:
            report.add(f"{tag}: p_(n-1) < t_n", seq[i - 2].p < e.t)
    for a in range(len(seq)):
        for b in range(a + 1, len(seq)):
            g = gcd(seq[a].invariant_product, seq[b].invariant_product)
            report.add(f"coprime m={seq[a].n}, n={seq[b].n}", g == 1, f"gcd = {g}")
    report.add("products odd", all(e.invariant_product % 2 for e in seq))
    return report


# ---------------------------------------------------------------- three primes

def three_prime_decompose(N: int, excluded=()) -> tuple[int, int, int]:
    """Least (p1, p2, p3), p1 < p2 < p3 primes above max(excluded), summing to N."""
    if N % 2 == 0:
        raise PreconditionFailed(f"N = {N} must be odd")
    excluded = set(excluded)
    floor = max(excluded, default=1)
    if N < 9:
        raise NoDecomposition(f"N = {N} is below 2 + 3 + 5")
    primes = primes_up_to(N)
    is_p = bytearray(N + 1)
    for q in primes:
        is_p[q] = 1
    candidates = [q for q in primes if q > floor and q not in excluded]
    for i, p1 in enumerate(candidates):
        if 3 * p1 + 3 > N:
            break
        for p2 in candidates[i + 1 :]:
            p3 = N - p1 - p2
            if p3 <= p2:
                break
            if is_p[p3]:
                return p1, p2, p3
    raise NoDecomposition(
        f"N = {N} is not a sum of three distinct primes greater than {floor}"
    )


# ---------------------------------------------------------------- plans

@dataclass(frozen=True)
class SigmaSPlan:
    S: tuple[int, ...]
    Sigma: tuple[int, ...]
    provenance: str

    def to_dict(self):
        return {
            "S": [str(q) for q in self.S],
            "Sigma": [str(q) for q in self.Sigma],
            "provenance": self.provenance,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            tuple(int(q) for q in d["S"]),
            tuple(int(q) for q in d["Sigma"]),
            d["provenance"],
        )


def sequence_kind(seq) -> str:
    seq = list(seq)
    if not seq:
        raise ValueError("empty sequence")
    if all(isinstance(e, PairSeqEntry) for e in seq):
        return "pair"
    if all(isinstance(e, TripleSeqEntry) for e in seq):
        return "triple"
    raise TypeError("sequence mixes or contains unknown entry types")


def derive_plan(seq, factor_limit: int = DEFAULT_FACTOR_LIMIT) -> SigmaSPlan:
    """Derive (S, Sigma) from a verified sequence."""
    seq = list(seq)
    kind = sequence_kind(seq)
    report = verify_pair_congruences(seq) if kind == "pair" else verify_triple_sequence(seq)
    if not report.ok:
        names = ", ".join(c.name for c in report.failures())
        raise PreconditionFailed(f"sequence fails verification: {names}")
    sigma = {e.p for e in seq}
    if kind == "pair":
        S = set()
        for e in seq:
            S.update(prime_factors(e.k, factor_limit))
            S.update(prime_factors(e.p - e.k, factor_limit))
    else:
        S = {q for e in seq for q in e.parts}
    clash = S & sigma
    if clash:
        raise DisjointnessViolated(f"S and Sigma share {sorted(clash)}")
    return SigmaSPlan(tuple(sorted(S)), tuple(sorted(sigma)), kind)


def sequence_to_dict(seq, plan: SigmaSPlan | None = None) -> dict:
    seq = list(seq)
    kind = sequence_kind(seq)
    out = {"kind": kind, "entries": [e.to_dict() for e in seq]}
    if plan is not None:
        out["S"] = [str(q) for q in plan.S]
        out["Sigma"] = [str(q) for q in plan.Sigma]
    return out


def sequence_from_dict(d: dict):
    cls = PairSeqEntry if d["kind"] == "pair" else TripleSeqEntry
    return [cls.from_dict(e) for e in d["entries"]]
