import itertools
import random

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from anisoforge.arith import SigmaSPlan
from anisoforge.errors import BudgetExceeded, PlanViolation, PreconditionFailed
from anisoforge.padic import AtLeast, PadicInt
from anisoforge.tower import (
    FiniteField,
    StagePlan,
    UnramifiedRing,
    is_irreducible_mod_p,
    is_primitive_residue,
    least_irreducible,
    make_unramified,
    norm,
    ostrowski_check,
    power_basis_rank,
    stage_value_group_check,
)
from oracles import norm_law_problems, small_field_shapes, sympy_norm


def _sympy_irreducible(coeffs, p):
    x = sympy.Symbol("x")
    poly = sympy.Poly(list(reversed(coeffs)), x, modulus=p)
    return poly.is_irreducible


class TestIrreducibility:
    @pytest.mark.parametrize("p,f", [(2, 2), (2, 3), (2, 4), (3, 2), (3, 3), (5, 2), (7, 2)])
    def test_rabin_matches_sympy_on_all_monics(self, p, f):
        for low in itertools.product(range(p), repeat=f):
            coeffs = low + (1,)
            assert is_irreducible_mod_p(coeffs, p) == _sympy_irreducible(coeffs, p), coeffs

    def test_least_irreducible_values(self):
        assert least_irreducible(5, 2) == (2, 0, 1)  # x^2 + 2
        assert least_irreducible(2, 1) == (0, 1)
        assert least_irreducible(2, 2) == (1, 1, 1)
        assert least_irreducible(2, 3) == (1, 1, 0, 1)  # x^3 + x + 1
        assert least_irreducible(5, 3) == (1, 1, 0, 1)  # no roots mod 5

    def test_least_is_least(self):
        for p, f in [(3, 3), (5, 2), (7, 3), (2, 5)]:
            g = least_irreducible(p, f)
            key = tuple(reversed(g[:-1]))
            for low in itertools.product(range(p), repeat=f):
                top_down = tuple(reversed(low))
                if top_down < key:
                    assert not _sympy_irreducible(low + (1,), p)

    def test_ring_rejects_reducible(self):
        with pytest.raises(ValueError):
            UnramifiedRing(5, 2, 3, (1, 0, 1))  # x^2 + 1 = (x - 2)(x + 2)
        with pytest.raises(ValueError):
            make_unramified(6, 2, 3)


class TestRingArithmetic:
    def test_known_products(self):
        R = make_unramified(5, 2, 3)
        x = R.gen
        assert x * x == R.scalar(-2)
        assert (1 + x) * (1 - x) == R.scalar(3)
        assert R.monomial(4) == R.scalar(4)

    def test_norm_small(self):
        R = make_unramified(2, 2, 2)
        assert norm(R.element([1, 1])) == 1
        S = make_unramified(5, 2, 3)
        assert norm(S.element([1, 1])) == PadicInt(5, 3, 3)  # 1 + 2

    def test_serialization(self):
        R = make_unramified(7, 3, 4)
        assert UnramifiedRing.from_dict(R.to_dict()) == R

    @settings(max_examples=100, deadline=None)
    @given(st.sampled_from([(2, 3, 5), (3, 2, 4), (5, 3, 3), (7, 2, 2)]), st.data())
    def test_ring_laws_and_norm_multiplicativity(self, shape, data):
        p, f, N = shape
        R = make_unramified(p, f, N)
        elem = st.lists(st.integers(0, p**N - 1), min_size=f, max_size=f).map(R.element)
        a, b, c = data.draw(elem), data.draw(elem), data.draw(elem)
        assert (a * b) * c == a * (b * c)
        assert a * (b + c) == a * b + a * c
        assert a * b == b * a
        assert norm(a * b) == norm(a) * norm(b)
        assert norm(a).value == sympy_norm(a)

    def test_valuation(self):
        R = make_unramified(3, 2, 5)
        assert R.element([9, 27]).valuation() == 2
        assert R.zero.valuation() == AtLeast(5)
        assert R.element([3, 1]).is_unit()


class TestNormLaws:
    def test_exhaustive_small_fields(self):
        rng = random.Random(5)
        for p, f in small_field_shapes(125):
            N = 2 * f + 1
            R = make_unramified(p, f, N)
            for digits in itertools.product(range(p), repeat=f):
                if not any(digits):
                    continue
                lift = [d + p * rng.randrange(p ** (N - 1)) for d in digits]
                for v in (0, 1, 2):
                    e = R.element([p**v * c for c in lift])
                    assert norm_law_problems(e) == [], (p, f, digits, v)

    def test_randomized_larger_fields(self):
        rng = random.Random(11)
        for p, f in [(2, 7), (3, 5), (5, 4), (7, 3), (11, 3)]:
            R = make_unramified(p, f, 2 * f + 2)
            for _ in range(60):
                v = rng.randint(0, 2)
                e = R.element([p**v * rng.randrange(R.order) for _ in range(f)])
                assert norm_law_problems(e) == []


class TestPrimitivity:
    def test_gen_is_primitive(self):
        for p, f in [(2, 3), (5, 2), (3, 4)]:
            R = make_unramified(p, f, 2)
            assert is_primitive_residue(R.gen)
            assert power_basis_rank(R.gen) == f

    def test_scalars_are_not(self):
        R = make_unramified(5, 3, 2)
        assert not is_primitive_residue(R.scalar(3))
        assert not is_primitive_residue(R.element([5, 5, 0]))
        assert power_basis_rank(R.scalar(3)) == 1

    def test_ostrowski(self):
        assert ostrowski_check(6, 2, 3, 5)
        assert not ostrowski_check(6, 2, 2, 5)
        with pytest.raises(ValueError):
            ostrowski_check(0, 1, 1, 5)


class TestFiniteField:
    @pytest.mark.parametrize("p,e", [(2, 1), (2, 3), (3, 2), (5, 2), (7, 1)])
    def test_tables(self, p, e):
        F = FiniteField(p, e)
        assert sorted(F.exp.tolist()) == list(range(1, F.q))
        for code in range(1, F.q):
            assert F.exp[F.log[code]] == code
            assert F.encode(F.decode(code)) == code

    def test_eval_terms_matches_ring_arithmetic(self):
        F = FiniteField(3, 2)
        terms = [((2, 0, 1), 1), ((0, 1, 2), 2), ((1, 1, 1), 1)]
        rng = np.random.default_rng(3)
        coords = rng.integers(0, F.q, size=(200, 3))
        got = F.eval_terms(terms, coords)
        for row, value in zip(coords, got):
            xs = [F.decode(int(c)) for c in row]
            total = F.ring.zero
            for exp, c in terms:
                term = F.ring.scalar(c)
                for x, a in zip(xs, exp):
                    term = term * x**a
                total = total + term
            assert F.encode(total) == value

    def test_order_cap(self):
        with pytest.raises(BudgetExceeded):
            FiniteField(2, 21)


class TestStage:
    plan = SigmaSPlan((2, 3), (5,), "pair")

    def test_value_group(self):
        assert StagePlan(5, 2, 1, self.plan).value_group == "Z"
        stage = StagePlan(5, 2, 6, self.plan)
        assert stage.value_group == "(1/6)Z"
        assert stage.radical_primes() == [2, 3]
        assert stage.respects_sigma()
        assert StagePlan.from_dict(stage.to_dict()) == stage

    def test_check(self):
        assert stage_value_group_check(StagePlan(5, 2, 3, self.plan), 5)
        with pytest.raises(PlanViolation):
            stage_value_group_check(StagePlan(5, 2, 10, self.plan), 5)
        with pytest.raises(PreconditionFailed):
            stage_value_group_check(StagePlan(5, 2, 1, self.plan), 7)
