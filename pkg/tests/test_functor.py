import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nctriples.errors import NotMono, NotSpectralWeight, NotWeighted, TargetBallTooSmall
from nctriples.functor import (
    WeightedGroup,
    check_functor_laws,
    check_linearization_bound,
    check_relator_closure,
    functor_morphism,
    functor_object,
    left_exactness_witness,
    non_fullness_witness,
    relator_morphisms,
)
from nctriples.groups import CyclicGroup, FreeAbelianGroup, ProductGroup, make_hom
from nctriples.weights import ConstantWeight, TableWeight, WordLengthWeight, pullback

Z = FreeAbelianGroup(1)


def cyclic_wl(n):
    return WeightedGroup(CyclicGroup(n), TableWeight(CyclicGroup(n), [min(k, n - k) for k in range(n)]))


def chain(seed):
    """A random composable chain C_a -> C_b -> C_c of monos (c <= 16) with pulled-back weights."""
    rng = np.random.default_rng(seed)
    a = int(rng.integers(1, 5))
    b = a * int(rng.integers(1, 5 - (a > 2)))
    c = b * int(rng.integers(1, 16 // b + 1))
    wK = cyclic_wl(c)
    psi = make_hom(CyclicGroup(b), CyclicGroup(c), [(c // b) % c])
    wH = WeightedGroup(CyclicGroup(b), pullback(psi, wK.weight))
    phi = make_hom(CyclicGroup(a), CyclicGroup(b), [(b // a) % b])
    wG = WeightedGroup(CyclicGroup(a), pullback(phi, wH.weight))
    return phi, psi, wG, wH, wK


class TestObjects:
    def test_not_spectral(self):
        with pytest.raises(NotSpectralWeight):
            functor_object(WeightedGroup(Z, ConstantWeight(Z, 5)), 3)


class TestMorphisms:
    def test_c2_c4(self):
        phi = make_hom(CyclicGroup(2), CyclicGroup(4), [2])
        wH = cyclic_wl(4)
        m = functor_morphism(phi, WeightedGroup(CyclicGroup(2), pullback(phi, wH.weight)), wH)
        M = m.phi.matrix
        assert np.array_equal(M.conj().T @ M, np.eye(2))
        assert m.real_checked

    def test_not_mono(self):
        with pytest.raises(NotMono):
            functor_morphism(make_hom(CyclicGroup(4), CyclicGroup(2), [1]), cyclic_wl(4), cyclic_wl(2))

    def test_not_weighted(self):
        phi = make_hom(CyclicGroup(2), CyclicGroup(4), [2])
        with pytest.raises(NotWeighted):
            functor_morphism(phi, cyclic_wl(2), cyclic_wl(4))

    def test_radius_coupling(self):
        phi = make_hom(Z, Z, [(2,)])
        wH = WeightedGroup(Z, WordLengthWeight(Z))
        wG = WeightedGroup(Z, pullback(phi, wH.weight))
        assert functor_morphism(phi, wG, wH, radii=(10, 20)).is_isometry
        with pytest.raises(TargetBallTooSmall):
            functor_morphism(phi, wG, wH, radii=(10, 19))

    def test_left_exactness(self):
        phi = make_hom(CyclicGroup(3), CyclicGroup(6), [2])
        wH = cyclic_wl(6)
        r = left_exactness_witness(phi, WeightedGroup(CyclicGroup(3), pullback(phi, wH.weight)), wH)
        assert r.passed


class TestLaws:
    def test_doubling_chain(self):
        phi = make_hom(CyclicGroup(2), CyclicGroup(4), [2])
        psi = make_hom(CyclicGroup(4), CyclicGroup(8), [2])
        wK = cyclic_wl(8)
        wH = WeightedGroup(CyclicGroup(4), pullback(psi, wK.weight))
        wG = WeightedGroup(CyclicGroup(2), pullback(phi, wH.weight))
        assert check_functor_laws(phi, psi, wG, wH, wK).passed

    @given(st.integers(0, 10**6))
    def test_random_chains(self, seed):
        phi, psi, wG, wH, wK = chain(seed)
        assert check_functor_laws(phi, psi, wG, wH, wK).passed

    def test_non_fullness(self):
        r = non_fullness_witness(cyclic_wl(4), lam=2.0)
        assert r.status["morphism"] and r.values["witness"]
        r0 = non_fullness_witness(cyclic_wl(4), lam=0.0)
        assert r0.values["degenerate"] and not r0.values["witness"]


class TestRelator:
    def test_c6_c3(self):
        epi = make_hom(CyclicGroup(6), CyclicGroup(3), [1])
        pair = relator_morphisms(epi, cyclic_wl(6))
        assert len(pair.splittings) == 1 and pair.splittings[0](1) == 4
        wH = pair.target_weights[0].weight
        assert [wH(k) for k in range(3)] == [0, 2, 2]
        assert all(pair.weighted) and pair.morphisms[0].is_isometry

    def test_klein_projection(self):
        V = ProductGroup(CyclicGroup(2), CyclicGroup(2))
        epi = make_hom(V, CyclicGroup(2), [1, 0])
        pair = relator_morphisms(epi, WeightedGroup(V, WordLengthWeight(V)))
        assert len(pair.splittings) == 2 and all(pair.weighted)

    def test_c4_c2_empty(self):
        pair = relator_morphisms(make_hom(CyclicGroup(4), CyclicGroup(2), [1]), cyclic_wl(4))
        assert pair.splittings == [] and pair.morphisms == []

    @pytest.mark.parametrize("chain_", [(6, 3, 1), (12, 4, 1), (6, 2, 1), (12, 3, 1), (10, 5, 1)])
    def test_closure(self, chain_):
        a, b, c = chain_
        e1 = make_hom(CyclicGroup(a), CyclicGroup(b), [1])
        e2 = make_hom(CyclicGroup(b), CyclicGroup(c), [1 % c])
        assert check_relator_closure(e1, e2, cyclic_wl(a)).passed


class TestLinearization:
    @pytest.mark.parametrize("n,m,k", [(4, 2, 2), (6, 3, 2), (8, 4, 2), (6, 2, 3)])
    def test_bound(self, n, m, k):
        r = check_linearization_bound(make_hom(CyclicGroup(n), CyclicGroup(m), [1]))
        assert r.passed
        assert r.values["kernel_order"] == k and r.values["equality_ratio"] == k
        assert r.values["kernel_dimension"] == n - m

    def test_injective(self):
        r = check_linearization_bound(make_hom(CyclicGroup(2), CyclicGroup(4), [2]))
        assert r.values["max_ratio"] == 1 and r.values["kernel_dimension"] == 0
        assert r.values["delta_e_plus_span_is_kernel"] is False
