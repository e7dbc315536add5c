"""Certificates of zero-freeness, randomized audits, and finite-field oracles.

A block form f = sum_j pi^j g(block j) has no nontrivial zero at a stage
when three finite facts hold:

* every norm factor of g is anisotropic mod p, so g(beta) is a unit on
  primitive beta and v(g(beta)) = p_n * min v(beta_i) in general;
* the stage's ramification index D is prime to p_n;
* hence the values v(pi^j g(block j)) = p_n m_j + j (scaled by D) are
  pairwise distinct mod p_n, and the minimum over j is attained once.

The certificate records each fact with the data needed to recheck it.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from math import gcd, prod

import numpy as np

from .arith import three_prime_decompose
from .budget import scan_budget
from .errors import (
    AuditFailed,
    BudgetExceeded,
    CertificationFailed,
    InternalError,
    NoDecomposition,
    PreconditionFailed,
)
from .forms import (
    BlockFormSpec,
    HomogeneousForm,
    _norm_form_unchecked,
    audit_precision,
    build_f,
    essential_variable_count,
)
from .padic import PadicInt, is_exact
from .tower import FiniteField

SCHEMA_VERSION = 1
_CHUNK = 1 << 16


# ---------------------------------------------------------------- exhaustive scans


@dataclass(frozen=True)
class ScanResult:
    """Outcome of scanning every nonzero vector of F_q^k."""

    q: int
    num_vars: int
    scanned: int
    zeros: int
    witness: tuple | None

    @property
    def anisotropic(self) -> bool:
        return self.zeros == 0

    def to_dict(self):
        return {
            "q": self.q,
            "num_vars": self.num_vars,
            "scanned": self.scanned,
            "isotropic_witnesses": self.zeros,
            "first_witness": None if self.witness is None else list(self.witness),
        }


def _index_to_coords(indices: np.ndarray, q: int, k: int) -> np.ndarray:
    # little-endian: coordinate 0 varies fastest
    coords = np.empty((indices.shape[0], k), dtype=np.int64)
    rest = indices.copy()
    for i in range(k):
        coords[:, i] = rest % q
        rest //= q
    return coords


def scan_form(form: HomogeneousForm, e: int = 1, budget: int | None = None,
              stop_at_first: bool = False) -> ScanResult:
    """Evaluate ``form`` mod p on every nonzero vector of F_(p^e)^k.

    Vectors are enumerated by index 1 .. q^k - 1 with coordinate 0 as the
    least significant base-q digit. Coordinates of a witness are encoded
    field elements (plain residues when e = 1).
    """
    k = form.num_vars
    field = FiniteField(form.p, e)
    q = field.q
    total = q**k - 1
    budget = scan_budget(budget)
    if total > budget:
        raise BudgetExceeded(f"scan of F_{q}^{k} needs {total} evaluations, budget {budget}")
    terms = [(exp, c % form.p) for exp, c in form.int_terms() if c % form.p]
    zeros, witness, scanned = 0, None, 0
    for start in range(1, total + 1, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, total + 1), dtype=np.int64)
        coords = _index_to_coords(idx, q, k)
        values = field.eval_terms(terms, coords)
        hits = np.flatnonzero(values == 0)
        if hits.size:
            if witness is None:
                witness = tuple(int(x) for x in coords[hits[0]])
            if stop_at_first:
                scanned += int(hits[0]) + 1
                return ScanResult(q, k, scanned, 1, witness)
        zeros += int(hits.size)
        scanned += idx.size
    return ScanResult(q, k, scanned, zeros, witness)


def residue_anisotropy(form: HomogeneousForm, e: int = 1, budget: int | None = None) -> ScanResult:
    """Exhaustive anisotropy test of the reduction of ``form`` over F_(p^e)."""
    return scan_form(form, e, budget)


def chevalley_warning_check(form: HomogeneousForm, e: int = 1, budget: int | None = None) -> tuple:
    """Return a nontrivial zero of a form with more variables than its degree."""
    if form.num_vars <= form.degree:
        raise PreconditionFailed(
            f"{form.num_vars} variables do not exceed degree {form.degree}"
        )
    result = scan_form(form, e, budget, stop_at_first=True)
    if result.witness is None:
        raise InternalError(
            f"no nontrivial zero over F_{result.q}: contradicts Chevalley-Warning"
        )
    return result.witness


def enumerate_forms(p: int, degree: int, num_vars: int):
    """Every nonzero form of the given shape with coefficients in F_p."""
    monomials = [
        e for e in itertools.product(range(degree + 1), repeat=num_vars) if sum(e) == degree
    ]
    for coeffs in itertools.product(range(p), repeat=len(monomials)):
        if any(coeffs):
            yield HomogeneousForm(num_vars, degree, p, 1, dict(zip(monomials, coeffs)))


# ---------------------------------------------------------------- certificates


def residue_norm_forms(spec: BlockFormSpec) -> list[HomogeneousForm]:
    """Reductions mod p of the norm factors, computed over the residue rings."""
    return [
        _norm_form_unchecked(r.residue_ring(), r.residue_ring().element(xi.coeffs), spec.k)
        for r, xi in zip(spec.rings, spec.generators)
    ]


@dataclass
class AnisotropyCertificate:
    spec: BlockFormSpec
    residue_checks: list
    structure_check: dict
    plan_check: dict
    valuation_check: dict
    precision_used: int
    essential_variables: int

    CLAUSES = ("residue_checks", "structure_check", "plan_check", "valuation_check")

    def failed_clauses(self) -> list[str]:
        failed = []
        if not all(r["passed"] for r in self.residue_checks):
            failed.append("residue_checks")
        for clause in self.CLAUSES[1:]:
            if not getattr(self, clause)["passed"]:
                failed.append(clause)
        return failed

    @property
    def valid(self) -> bool:
        return not self.failed_clauses()

    def witness(self):
        for r in self.residue_checks:
            if not r["passed"]:
                return r["first_witness"]
        return None

    def to_dict(self):
        return {
            "schema": SCHEMA_VERSION,
            "artifact": "anisotropy-certificate",
            "valid": self.valid,
            "failed_clauses": self.failed_clauses(),
            "degree": self.spec.p_n,
            "num_vars": self.spec.p_n * self.spec.k,
            "essential_variables": self.essential_variables,
            "precision_used": self.precision_used,
            "residue_checks": self.residue_checks,
            "structure_check": self.structure_check,
            "plan_check": self.plan_check,
            "valuation_check": self.valuation_check,
            "spec": self.spec.to_dict(),
        }


def build_certificate(spec: BlockFormSpec, budget: int | None = None) -> AnisotropyCertificate:
    """Run every check and assemble the certificate, valid or not."""
    residue_checks = []
    for ring, form in zip(spec.rings, residue_norm_forms(spec)):
        scan = residue_anisotropy(form, 1, budget)
        entry = {"factor_degree": ring.f, "field": f"F_{spec.p}", **scan.to_dict()}
        entry["passed"] = scan.anisotropic and scan.scanned == spec.p**spec.k - 1
        residue_checks.append(entry)

    problems = spec.structure_problems()
    if spec.pi.valuation() != 1:
        problems.append(f"v(pi) = {spec.pi.valuation()}, expected 1")
    structure_check = {"passed": not problems, "problems": problems,
                       "degrees": list(spec.degrees), "block_width": spec.k}

    D, p_n = spec.stage.D, spec.p_n
    in_sigma = p_n in spec.stage.plan.Sigma
    plan_check = {
        "passed": in_sigma and D % p_n != 0,
        "D": str(D),
        "p_n": str(p_n),
        "p_n_in_Sigma": in_sigma,
        "value_group": spec.stage.value_group,
    }

    pairs = [[j, j * D % p_n] for j in range(1, p_n + 1)]
    valuation_check = {
        "passed": len({r for _, r in pairs}) == p_n,
        "pairs": pairs,
    }

    return AnisotropyCertificate(
        spec,
        residue_checks,
        structure_check,
        plan_check,
        valuation_check,
        spec.N,
        essential_variable_count(spec) if not problems else 0,
    )


def certify_anisotropic(spec: BlockFormSpec, budget: int | None = None) -> AnisotropyCertificate:
    """Certificate for ``spec``; raises CertificationFailed naming the first failing clause."""
    cert = build_certificate(spec, budget)
    failed = cert.failed_clauses()
    if failed:
        err = CertificationFailed(failed[0], f"failing clauses: {failed}", cert.witness())
        err.certificate = cert
        raise err
    return cert


def check_certificate(data: dict, budget: int | None = None) -> bool:
    """Recompute a serialized certificate from its spec and compare."""
    spec = BlockFormSpec.from_dict(data["spec"])
    fresh = build_certificate(spec, budget).to_dict()
    return fresh == data and fresh["valid"]


# ---------------------------------------------------------------- audits


def predicted_valuation(p_n: int, block_minima) -> int | None:
    """min_j (p_n m_j + j) over blocks with a nonzero entry; None if all vanish."""
    candidates = [p_n * m + j for j, m in enumerate(block_minima, start=1) if m is not None]
    return min(candidates) if candidates else None


def _sample_vector(rng: random.Random, count: int, p: int, N: int, m_cap: int):
    mod = p**N
    vals, exps = [], []
    for _ in range(count):
        m = 0
        while m < m_cap and rng.random() < 0.5:
            m += 1
        exps.append(m)
    if min(exps) > 0:
        exps[rng.randrange(count)] = 0
    for m in exps:
        u = rng.randrange(1, mod)
        while u % p == 0:
            u = rng.randrange(1, mod)
        vals.append(p**m * u % mod)
    return vals, exps


def random_evaluation_audit(spec: BlockFormSpec, trials: int, seed: int = 0,
                            m_cap: int = 3, N: int | None = None,
                            raise_on_mismatch: bool = True) -> dict:
    """Compare v(f(beta)) with min_j (p_n m_j + j) on random primitive beta."""
    p_n = spec.p_n
    N = audit_precision(p_n, m_cap) if N is None else N
    if N <= p_n + p_n * m_cap:
        raise PreconditionFailed(f"precision {N} must exceed {p_n + p_n * m_cap}")
    f = build_f(spec.at_precision(N))
    rng = random.Random(seed)
    mismatches = []
    histogram: dict[int, int] = {}
    for trial in range(trials):
        vals, exps = _sample_vector(rng, f.num_vars, spec.p, N, m_cap)
        minima = [min(exps[j * f.k : (j + 1) * f.k]) for j in range(f.blocks)]
        predicted = predicted_valuation(p_n, minima)
        actual = f.evaluate(vals).valuation()
        histogram[predicted] = histogram.get(predicted, 0) + 1
        if not is_exact(actual) or actual != predicted:
            mismatches.append({
                "trial": trial,
                "vector": [str(v) for v in vals],
                "predicted": predicted,
                "actual": str(actual),
            })
    report = {
        "schema": SCHEMA_VERSION,
        "artifact": "audit-report",
        "kind": spec.kind,
        "n": spec.n,
        "p": spec.p,
        "p_n": str(p_n),
        "num_vars": f.num_vars,
        "trials": trials,
        "seed": seed,
        "m_cap": m_cap,
        "precision": N,
        "mismatches": len(mismatches),
        "witnesses": mismatches[:5],
        "predicted_histogram": {str(k): v for k, v in sorted(histogram.items())},
    }
    if mismatches and raise_on_mismatch:
        raise AuditFailed(f"{len(mismatches)} mismatches", report, mismatches[0]["vector"])
    return report


def evaluate_valuation(spec: BlockFormSpec, vector, N: int | None = None):
    """v(f(vector)) at precision N; handy for hand-built vectors."""
    N = spec.N if N is None else N
    f = build_f(spec.at_precision(N))
    return f.evaluate([PadicInt(spec.p, N, int(v)) for v in vector]).valuation()


# ---------------------------------------------------------------- coprime extensions


def coprime_degree_scans(spec: BlockFormSpec, e: int, budget: int | None = None) -> list[ScanResult]:
    invariant = spec.p_n * prod(spec.degrees)
    if gcd(e, invariant) != 1:
        raise PreconditionFailed(f"gcd({e}, {invariant}) != 1")
    return [residue_anisotropy(form, e, budget) for form in residue_norm_forms(spec)]


def coprime_degree_check(spec: BlockFormSpec, e: int, budget: int | None = None) -> bool:
    """Each residue norm factor stays anisotropic over F_(p^e), e prime to the degrees."""
    return all(s.anisotropic for s in coprime_degree_scans(spec, e, budget))


# ---------------------------------------------------------------- three primes


def goldbach_window_check(excluded, lo: int, hi: int, budget: int | None = None) -> dict:
    """Try three_prime_decompose on every odd N in [lo, hi]."""
    if hi < lo:
        raise ValueError("empty window")
    budget = scan_budget(budget)
    if hi - lo > budget:
        raise BudgetExceeded(f"window width {hi - lo} exceeds budget {budget}")
    excluded = sorted(set(excluded))
    decompositions, failures = {}, []
    for N in range(lo | 1, hi + 1, 2):
        try:
            decompositions[str(N)] = list(three_prime_decompose(N, excluded))
        except NoDecomposition:
            failures.append(N)
    return {
        "schema": SCHEMA_VERSION,
        "artifact": "goldbach-window",
        "excluded": excluded,
        "window": [lo, hi],
        "checked": len(decompositions) + len(failures),
        "failures": failures,
        "largest_failure": max(failures) if failures else None,
        "decompositions": decompositions,
    }
