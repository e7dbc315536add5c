import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from anisoforge.arith import gen_pair_sequence, gen_triple_sequence
from anisoforge.errors import (
    AuditFailed,
    BudgetExceeded,
    CertificationFailed,
    NotPrimitive,
    PreconditionFailed,
)
from anisoforge.forms import BlockFormSpec, HomogeneousForm, make_spec
from anisoforge.tower import FiniteField
from anisoforge.verify import (
    build_certificate,
    certify_anisotropic,
    chevalley_warning_check,
    check_certificate,
    coprime_degree_check,
    enumerate_forms,
    evaluate_valuation,
    goldbach_window_check,
    predicted_valuation,
    random_evaluation_audit,
    residue_norm_forms,
    scan_form,
)
from oracles import brute_three_primes, brute_zeros, quadratic_monomials

DEMO3VAR = HomogeneousForm(3, 2, 2, 1, {(2, 0, 0): 1, (1, 1, 0): 1, (0, 2, 0): 1, (0, 0, 2): 1})


@pytest.fixture(scope="module")
def pair_spec():
    return make_spec(gen_pair_sequence(1), 1)


@pytest.fixture(scope="module")
def triple_spec():
    return make_spec(gen_triple_sequence(1), 1)


def _replace(spec, **changes):
    return BlockFormSpec(**{**spec.__dict__, **changes})


class TestScans:
    def test_product_witness_order(self):
        xy = HomogeneousForm(2, 2, 3, 1, {(1, 1): 1})
        result = scan_form(xy)
        assert result.witness == (1, 0)
        assert result.zeros == 4 and result.scanned == 8

    @settings(max_examples=60, deadline=None)
    @given(st.sampled_from([2, 3, 5]), st.integers(1, 3), st.data())
    def test_zero_count_matches_brute_force(self, p, k, data):
        degree = data.draw(st.integers(1, 3))
        monos = [e for e in itertools.product(range(degree + 1), repeat=k) if sum(e) == degree]
        coeffs = data.draw(st.lists(st.integers(0, p - 1), min_size=len(monos), max_size=len(monos)))
        form = HomogeneousForm(k, degree, p, 1, dict(zip(monos, coeffs)))
        zeros = brute_zeros(form.int_terms(), p, k)
        result = scan_form(form)
        assert result.zeros == len(zeros)
        # little-endian enumeration: first witness minimizes the reversed vector
        expected = min(zeros, key=lambda v: v[::-1]) if zeros else None
        assert result.witness == expected

    def test_extension_scan_matches_naive(self):
        F = FiniteField(2, 2)
        form = HomogeneousForm(2, 3, 2, 1, {(3, 0): 1, (1, 2): 1, (0, 3): 1})
        naive = 0
        for a, b in itertools.product(range(4), repeat=2):
            if (a, b) == (0, 0):
                continue
            x, y = F.decode(a), F.decode(b)
            if (x**3 + x * y**2 + y**3).is_zero():
                naive += 1
        assert scan_form(form, e=2).zeros == naive

    def test_budget(self):
        with pytest.raises(BudgetExceeded):
            scan_form(HomogeneousForm.linear([1] * 12, 3, 1), budget=1000)


class TestChevalleyWarning:
    def test_demo3var(self):
        witness = chevalley_warning_check(DEMO3VAR)
        assert DEMO3VAR.evaluate_int(witness, 2) == 0
        assert DEMO3VAR.evaluate_int((1, 1, 1), 2) == 0

    def test_all_binary_quadratics_in_three_variables(self):
        forms = list(enumerate_forms(2, 2, 3))
        assert len(forms) == 63
        assert {tuple(sorted(f.terms)) for f in forms} == {
            tuple(sorted(m for m, c in zip(quadratic_monomials(3), bits) if c))
            for bits in itertools.product((0, 1), repeat=6) if any(bits)
        }
        for form in forms:
            witness = chevalley_warning_check(form)
            assert witness in brute_zeros(form.int_terms(), 2, 3)

    def test_extension_field(self):
        witness = chevalley_warning_check(DEMO3VAR, e=3)
        F = FiniteField(2, 3)
        x = [F.decode(c) for c in witness]
        assert (x[0] ** 2 + x[0] * x[1] + x[1] ** 2 + x[2] ** 2).is_zero()

    def test_precondition(self):
        with pytest.raises(PreconditionFailed):
            chevalley_warning_check(HomogeneousForm(2, 2, 2, 1, {(2, 0): 1, (1, 1): 1, (0, 2): 1}))


class TestCertificates:
    def test_pair_certificate(self, pair_spec):
        cert = certify_anisotropic(pair_spec)
        d = cert.to_dict()
        assert d["valid"] and d["failed_clauses"] == []
        assert (d["degree"], d["num_vars"], d["essential_variables"]) == (5, 10, 10)
        assert [r["scanned"] for r in d["residue_checks"]] == [24, 24]
        assert all(r["isotropic_witnesses"] == 0 for r in d["residue_checks"])
        assert check_certificate(d)

    def test_triple_certificate(self, triple_spec):
        d = certify_anisotropic(triple_spec).to_dict()
        assert d["valid"]
        assert [r["factor_degree"] for r in d["residue_checks"]] == [3, 5, 11]
        assert [r["scanned"] for r in d["residue_checks"]] == [124] * 3

    def test_residue_forms_independent_of_precision(self, pair_spec):
        low = residue_norm_forms(pair_spec.at_precision(1))
        assert low == residue_norm_forms(pair_spec)
        for form in low:
            assert brute_zeros(form.int_terms(), 5, 2) == []

    def test_ramification_divisible_by_stage_prime(self):
        spec = make_spec(gen_pair_sequence(1), 1, ram=5)
        with pytest.raises(CertificationFailed) as info:
            certify_anisotropic(spec)
        assert info.value.clause == "plan_check"
        assert info.value.certificate.failed_clauses() == ["plan_check", "valuation_check"]

    def test_tampered_generator(self, pair_spec):
        ring = pair_spec.rings[0]
        spec = _replace(pair_spec, generators=(ring.scalar(1), pair_spec.generators[1]))
        with pytest.raises(CertificationFailed) as info:
            certify_anisotropic(spec)
        assert info.value.clause == "residue_checks"
        witness = info.value.witness
        assert witness is not None
        form = residue_norm_forms(spec)[0]
        assert form.evaluate_int(witness, 5) == 0

    def test_tampered_document(self, pair_spec):
        d = build_certificate(pair_spec).to_dict()
        d["residue_checks"][0]["scanned"] = 23
        assert not check_certificate(d)


class TestAudit:
    def test_predicted(self):
        assert predicted_valuation(5, [0, 0, 1, 2, 0]) == 1
        assert predicted_valuation(5, [1, 1, 0, 1, 1]) == 3
        assert predicted_valuation(5, [None, 2, None, None, None]) == 12
        assert predicted_valuation(5, [None] * 5) is None

    def test_hand_vectors(self, pair_spec):
        e = [0] * 10
        e[0] = 1
        assert evaluate_valuation(pair_spec, e) == 1
        e = [0] * 10
        e[5] = 1  # block 3, second coordinate
        assert evaluate_valuation(pair_spec, e) == 3
        e = [0] * 10
        e[8] = 5  # block 5, m = 1
        assert evaluate_valuation(pair_spec, e) == 5 + 5

    def test_pair_audit(self, pair_spec):
        report = random_evaluation_audit(pair_spec, 500, seed=3)
        assert report["mismatches"] == 0
        assert report == random_evaluation_audit(pair_spec, 500, seed=3)

    def test_triple_audit_small(self, triple_spec):
        assert random_evaluation_audit(triple_spec, 100, seed=1)["mismatches"] == 0

    def test_audit_refuses_non_primitive_generator(self, pair_spec):
        ring = pair_spec.rings[0]
        spec = _replace(pair_spec, generators=(ring.scalar(1), pair_spec.generators[1]))
        with pytest.raises(NotPrimitive):
            random_evaluation_audit(spec, 10, seed=0)

    def test_audit_reports_mismatches(self, pair_spec, monkeypatch):
        import anisoforge.verify as verify

        real = verify.predicted_valuation
        monkeypatch.setattr(verify, "predicted_valuation", lambda p_n, m: real(p_n, m) + (m[0] == 1))
        with pytest.raises(AuditFailed) as info:
            random_evaluation_audit(pair_spec, 200, seed=0)
        assert info.value.report["mismatches"] > 0
        assert info.value.witness

    def test_precision_guard(self, pair_spec):
        with pytest.raises(PreconditionFailed):
            random_evaluation_audit(pair_spec, 10, N=10)


class TestCoprimeDegrees:
    def test_pair_over_two_adic_base(self):
        # over Q_2 the degree-7 residue extension is small enough to scan
        spec = make_spec(gen_pair_sequence(1), 1, p=2)
        assert coprime_degree_check(spec, 7)
        with pytest.raises(PreconditionFailed):
            coprime_degree_check(spec, 3)


class TestGoldbachWindow:
    def test_window_with_exclusions(self):
        report = goldbach_window_check([2, 3, 5], 31, 231)
        assert report["failures"] == [33, 45]
        for N, parts in report["decompositions"].items():
            assert tuple(parts) == brute_three_primes(int(N), (2, 3, 5))
        for N in report["failures"]:
            assert brute_three_primes(N, (2, 3, 5)) is None

    def test_window_without_exclusions(self):
        report = goldbach_window_check([], 9, 301)
        assert report["failures"] == [n for n in range(9, 302, 2) if brute_three_primes(n, ()) is None]
        assert report["largest_failure"] == 17
