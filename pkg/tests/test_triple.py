import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nctriples.algebra import AlgebraElement, operator_norm
from nctriples.errors import DepthTooLarge, ElementOutsideBall, NonPositiveT, NoValidRealStructure
from nctriples.groups import CyclicGroup, FreeAbelianGroup, full_ball, symmetric_group
from nctriples.triple import (
    assemble_triple,
    check_grading,
    commutator_norm,
    double_triple,
    grading_obstruction,
    heat_trace,
    ko_signature,
    regularity_estimates,
    verify_axioms,
    verify_real_structure,
    zeroth_order_residuals,
)
from nctriples.weights import ConstantWeight, HomWeight, TableWeight, WordLengthWeight

Z = FreeAbelianGroup(1)
WL = WordLengthWeight(Z)


def z_triple(R, w=WL):
    return assemble_triple(Z, w, radius=R)


class TestAssembly:
    def test_dirac_diagonal(self):
        T = z_triple(3)
        assert list(T.d_values) == [0, 1, 1, 2, 2, 3, 3]

    def test_cyclic2_table(self):
        T = assemble_triple(CyclicGroup(2), TableWeight(CyclicGroup(2), [0, 1]))
        assert np.array_equal(T.D.matrix, np.diag([0, 1]))

    def test_constant_not_spectral(self):
        assert not z_triple(3, ConstantWeight(Z, 5)).spectral


class TestCommutator:
    @pytest.mark.parametrize("x", [1, 2, 3])
    def test_equals_length(self, x):
        T = z_triple(12)
        r = commutator_norm(T, (x,))
        assert r["computed"] == r["analytic"] == x

    def test_matches_svd(self):
        T = z_triple(10, HomWeight(Z, [3]))
        P = T.represent(AlgebraElement.delta(Z, (2,)))
        C = T.commutator_D(P).matrix
        assert operator_norm(C) == pytest.approx(np.linalg.norm(C, 2), abs=1e-10)

    def test_outside_ball(self):
        with pytest.raises(ElementOutsideBall):
            commutator_norm(z_triple(3), (9,))

    @given(st.integers(1, 4), st.integers(5, 12))
    def test_monotone_in_radius(self, x, R):
        w = TableWeight(CyclicGroup(29), [min(k, 29 - k) ** 2 for k in range(29)])
        from nctriples.groups import enumerate_ball

        a = commutator_norm(assemble_triple(CyclicGroup(29), w, ball=enumerate_ball(CyclicGroup(29), None, R)), x)
        b = commutator_norm(assemble_triple(CyclicGroup(29), w, ball=enumerate_ball(CyclicGroup(29), None, R + 1)), x)
        assert a["computed"] <= b["computed"]


class TestAxioms:
    def test_word_length_passes(self):
        assert verify_axioms(z_triple(20)).passed

    def test_square_fails_boundedness(self):
        from nctriples.weights import CallableWeight

        r = verify_axioms(z_triple(6, CallableWeight(Z, lambda x: x[0] ** 2)))
        assert r.status["bounded_commutators"] is False


class TestRealStructure:
    def test_word_length_first_order_fails(self):
        r = verify_real_structure(z_triple(8))
        assert r.status["first_order"] is False
        assert r.witnesses["first_order"] == (1, 1, 0)
        assert r.status["agrees_with_decomposition"]

    def test_constant_on_c5(self):
        T = assemble_triple(CyclicGroup(5), ConstantWeight(CyclicGroup(5), 3))
        r = verify_real_structure(T)
        assert r.values["sign"] == "+" and r.values["valid"]

    @given(st.integers(0, 1000))
    def test_zeroth_order(self, seed):
        res = zeroth_order_residuals(z_triple(10), 10, seed)
        assert max(v for v, _ in res) < 1e-12
        S3 = symmetric_group(3)
        T = assemble_triple(S3, TableWeight(S3, [0, 1, 1, 2, 2, 3]))
        assert max(v for v, _ in zeroth_order_residuals(T, 10, seed)) < 1e-12


class TestKO:
    def test_hom_weight(self):
        T = z_triple(6, HomWeight(Z, [1]))
        assert ko_signature(T).dimensions == {1}
        assert ko_signature(double_triple(T)).dimensions == frozenset()

    def test_doubled_constant(self):
        T = assemble_triple(CyclicGroup(5), ConstantWeight(CyclicGroup(5), 3))
        assert ko_signature(double_triple(T)).dimensions == {0}

    def test_word_length_invalid(self):
        with pytest.raises(NoValidRealStructure):
            ko_signature(z_triple(5))


class TestGrading:
    def test_doubled_passes(self):
        T = double_triple(assemble_triple(CyclicGroup(5), ConstantWeight(CyclicGroup(5), 3)))
        c = check_grading(T)
        assert all(v for k, v in c.items() if k != "witness")

    def test_obstructed(self):
        T = assemble_triple(CyclicGroup(4), ConstantWeight(CyclicGroup(4), 2))
        assert grading_obstruction(T)["diagnosis"] == "obstructed"

    def test_zero_weight_exponent_two(self):
        T = assemble_triple(CyclicGroup(2), ConstantWeight(CyclicGroup(2), 0))
        assert grading_obstruction(T)["validated"]

    def test_zero_weight_cyclic3_fails_commutation(self):
        # inversion does not commute with left translation unless the group has exponent two
        T = assemble_triple(CyclicGroup(3), ConstantWeight(CyclicGroup(3), 0))
        g = grading_obstruction(T)
        assert g["validated"] is False
        assert g["checks"]["commutes_with_pi"] is False


class TestRegularity:
    def test_word_length(self):
        rows = regularity_estimates(z_triple(12), (1,), 4)
        assert all(r["ok"] and r["computed"] <= 1 for r in rows)

    def test_hom_weight(self):
        rows = regularity_estimates(z_triple(12, HomWeight(Z, [2])), (1,), 2)
        assert [r["bound"] for r in rows] == [2, 4]
        assert all(r["ok"] for r in rows)

    def test_depth_cap(self):
        with pytest.raises(DepthTooLarge):
            regularity_estimates(z_triple(4), (1,), 7)


class TestHeat:
    def test_value(self):
        h = heat_trace(z_triple(8), 1.0)
        direct = 1 + 2 * sum(math.exp(-n * n) for n in range(1, 9))
        assert h["value"] == pytest.approx(direct, abs=1e-12)
        # the full lattice sum is a theta value; the truncation tail is negligible
        assert h["value"] == pytest.approx(float(mpmath.jtheta(3, 0, mpmath.e ** -1)), abs=1e-6)

    def test_bad_t(self):
        with pytest.raises(NonPositiveT):
            heat_trace(z_triple(3), 0)

    @given(st.floats(0.05, 5), st.floats(0.05, 5), st.integers(1, 10))
    def test_monotone(self, t1, t2, R):
        a, b = sorted((t1, t2))
        assert heat_trace(z_triple(R), b)["value"] <= heat_trace(z_triple(R), a)["value"]
        assert heat_trace(z_triple(R), a)["value"] <= heat_trace(z_triple(R + 1), a)["value"]
