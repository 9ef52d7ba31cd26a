import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nctriples.algebra import AlgebraElement, Operator
from nctriples.category import (
    build_p_form,
    check_fluctuation_compat,
    check_morphism,
    check_p_form_intertwining,
    check_real_flag,
    check_weak_intertwining,
    compose,
    identity,
    image_terms,
    inner_automorphism,
    random_terms,
)
from nctriples.errors import DegreeMismatch, DimensionMismatch, NotComposable, NotSpectral
from nctriples.functor import WeightedGroup, functor_morphism, functor_object
from nctriples.groups import CyclicGroup, FreeAbelianGroup, make_hom, symmetric_group
from nctriples.triple import assemble_triple
from nctriples.weights import ConstantWeight, HomWeight, ShiftedWeight, TableWeight, WordLengthWeight

C2, C4, C8 = CyclicGroup(2), CyclicGroup(4), CyclicGroup(8)
Z = FreeAbelianGroup(1)


@pytest.fixture(scope="module")
def c2c4():
    wH = WeightedGroup(C4, TableWeight(C4, [0, 1, 2, 1]))
    wG = WeightedGroup(C2, TableWeight(C2, [0, 2]))
    phi = make_hom(C2, C4, [2])
    return functor_morphism(phi, wG, wH)


class TestMorphism:
    def test_functor_example(self, c2c4):
        assert c2c4.is_isometry and c2c4.real_checked

    def test_mismatched_weights(self):
        T1 = assemble_triple(C2, TableWeight(C2, [0, 1]))
        T2 = assemble_triple(C4, TableWeight(C4, [0, 1, 2, 1]))
        M = np.zeros((4, 2))
        M[T2.ball.index(0), 0] = M[T2.ball.index(2), 1] = 1  # BFS order of C4 is 0, 1, 3, 2
        r = check_morphism(T1, T2, make_hom(C2, C4, [2]), Operator(T1.space, T2.space, M))
        assert r.status["intertwines_d"] is False
        w = r.witnesses["intertwines_d"]
        assert w["basis_vector"] == 1 and w["phi_d1"] == [1.0] and w["d2_phi"] == [2.0]

    def test_scaled_identity(self):
        T = assemble_triple(C4, TableWeight(C4, [0, 1, 2, 1]))
        r = check_morphism(T, T, None, Operator(T.space, T.space, 2 * np.eye(4)))
        assert r.passed and not r.morphism.is_isometry

    def test_not_spectral(self):
        T = assemble_triple(Z, ConstantWeight(Z, 5), radius=3)
        with pytest.raises(NotSpectral):
            check_morphism(T, T)

    def test_shape(self):
        T1 = assemble_triple(C2, TableWeight(C2, [0, 1]))
        T2 = assemble_triple(C4, TableWeight(C4, [0, 1, 2, 1]))
        with pytest.raises(DimensionMismatch):
            check_morphism(T1, T2, make_hom(C2, C4, [2]), Operator(T1.space, T1.space, np.eye(2)))

    def test_real_flag_fails_for_i_times(self, c2c4):
        m = check_morphism(c2c4.source, c2c4.target, c2c4.algebra_map, 1j * c2c4.phi).morphism
        assert m is not None
        assert check_real_flag(m) is False
        w = m.flag_reports["real"].witnesses["intertwines_j"]
        assert w["column_residual"] == pytest.approx(2 * w["phi_column_norm"], abs=1e-15)


class TestCategoryLaws:
    def test_identity_and_assoc(self, c2c4):
        wK = WeightedGroup(C8, TableWeight(C8, [0, 3, 1, 3, 2, 3, 1, 3]))
        wH = WeightedGroup(C4, TableWeight(C4, [0, 1, 2, 1]))
        m2 = functor_morphism(make_hom(C4, C8, [2]), wH, wK, triples=(c2c4.target, functor_object(wK)))
        assert np.array_equal(compose(identity(c2c4.target), c2c4).phi.matrix, c2c4.phi.matrix)
        assert np.array_equal(compose(c2c4, identity(c2c4.source)).phi.matrix, c2c4.phi.matrix)
        m3 = identity(m2.target)
        a = compose(m3, compose(m2, c2c4)).phi.matrix
        b = compose(compose(m3, m2), c2c4).phi.matrix
        assert np.array_equal(a, b)
        assert compose(m2, c2c4).real_checked == (m2.real_checked and c2c4.real_checked)

    def test_not_composable(self, c2c4):
        with pytest.raises(NotComposable):
            compose(c2c4, c2c4)


class TestPForms:
    @pytest.mark.parametrize("p", [0, 1, 2])
    def test_intertwining(self, c2c4, p):
        rng = np.random.default_rng(p)
        for _ in range(10):
            r = check_p_form_intertwining(c2c4, random_terms(c2c4.source, p, 2, rng))
            assert r.passed and r.values["p_form_intertwining"]["max_residual"] < 1e-12

    def test_single_term_exact(self, c2c4):
        T = c2c4.source
        terms = [(AlgebraElement.delta(C2, 1), AlgebraElement.delta(C2, 1))]
        r = check_p_form_intertwining(c2c4, terms)
        assert r.values["p_form_intertwining"]["max_residual"] == 0

    def test_degree_mismatch(self, c2c4):
        d = AlgebraElement.delta(C2, 1)
        with pytest.raises(DegreeMismatch):
            build_p_form(c2c4.source, [(d,), (d, d)])


class TestFluctuation:
    @given(st.integers(0, 1000))
    def test_image_forms_compatible(self, c2c4, seed):
        terms = random_terms(c2c4.source, 1, 2, np.random.default_rng(seed))
        A1 = build_p_form(c2c4.source, terms)
        A2 = build_p_form(c2c4.target, image_terms(c2c4, terms))
        r = check_fluctuation_compat(c2c4, A1, A2)
        assert r.status["compatible"] and r.values["deformed_morphism"]

    @given(st.integers(0, 1000))
    def test_both_directions(self, c2c4, seed):
        rng = np.random.default_rng(seed)
        A1 = build_p_form(c2c4.source, random_terms(c2c4.source, 1, 2, rng))
        A2 = build_p_form(c2c4.target, random_terms(c2c4.target, 1, 2, rng))
        r = check_fluctuation_compat(c2c4, A1, A2)
        assert r.status["deformed_consistent"]
        assert r.values["deformed_morphism"] == r.status["compatible"]


class TestWeakAndInner:
    def test_shifted_weight_weak_only(self):
        T1 = assemble_triple(Z, WordLengthWeight(Z), radius=6)
        T2 = assemble_triple(Z, ShiftedWeight(WordLengthWeight(Z), 1), radius=6)
        r = check_weak_intertwining(T1, T2)
        assert r.status["weak"] and r.values["strict"] is False

    def test_zero_map_degenerate(self):
        T = assemble_triple(Z, WordLengthWeight(Z), radius=4)
        r = check_weak_intertwining(T, T, None, Operator(T.space, T.space, np.zeros((9, 9))))
        assert r.values["degenerate"]

    def test_inner_automorphism_s3(self):
        S3 = symmetric_group(3)
        # all transpositions form a conjugation-invariant generating set
        gens = [x for x in S3.elements() if S3.label(x) in ("102", "021", "210")]
        T = assemble_triple(S3, WordLengthWeight(S3, gens), generators=gens)
        for g in S3.elements():
            assert inner_automorphism(T, g).passed

    def test_inner_automorphism_non_central_table(self):
        S3 = symmetric_group(3)
        T = assemble_triple(S3, TableWeight(S3, list(range(6))))
        t = [x for x in S3.elements() if S3.label(x) == "102"][0]
        r = inner_automorphism(T, t)
        assert r.values["ad_weighted"] is False
        assert r.status["intertwines_d"] is False
