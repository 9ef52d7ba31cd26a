import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nctriples.errors import InputError, KindMismatch, NotALength, NotNormal, PartialTable
from nctriples.groups import (
    CyclicGroup,
    FreeAbelianGroup,
    FreeGroup,
    enumerate_ball,
    full_ball,
    make_hom,
    symmetric_group,
)
from nctriples.weights import (
    AffineWeight,
    ConstantWeight,
    HomWeight,
    TableWeight,
    WordLengthWeight,
    build_weight,
    check_dirac_weight,
    check_length_axioms,
    check_proper,
    check_weighted_hom,
    compare_pushforward_quotient,
    decompose_weight,
    format_number,
    parse_number,
    pullback,
    pushforward_length,
    quotient_length,
    replay_length_witness,
)

Z = FreeAbelianGroup(1)
Z2 = FreeAbelianGroup(2)
F2 = FreeGroup(2)


class TestNumbers:
    def test_parse(self):
        assert parse_number("3") == 3 and isinstance(parse_number("3"), int)
        assert parse_number("2.5") == 2.5
        with pytest.raises(InputError):
            parse_number("abc")

    @given(st.integers(-10**6, 10**6))
    def test_int_roundtrip(self, n):
        assert parse_number(format_number(n)) == n


class TestBuild:
    def test_kinds(self):
        assert isinstance(build_weight({"kind": "word_length"}, Z), WordLengthWeight)
        assert build_weight({"kind": "hom", "coefficients": [2]}, Z)((3,)) == 6
        assert build_weight({"kind": "constant", "value": "5"}, Z)((7,)) == 5
        a = build_weight({"kind": "affine", "constant": 2, "coefficients": [3]}, Z)
        assert a((2,)) == 8

    def test_unknown_field(self):
        with pytest.raises(InputError):
            build_weight({"kind": "word_length", "radius": 2}, Z)

    def test_hom_on_finite_rejected(self):
        with pytest.raises(KindMismatch):
            HomWeight(CyclicGroup(3), [1])

    def test_partial_table(self):
        with pytest.raises(PartialTable):
            TableWeight(CyclicGroup(3), {0: 0, 1: 1})


class TestLengthAxioms:
    def test_word_length_on_z(self):
        ball = enumerate_ball(Z, None, 6)
        assert check_length_axioms(WordLengthWeight(Z), ball).passed

    def test_identity_weight_not_symmetric(self):
        r = check_length_axioms(HomWeight(Z, [1]), enumerate_ball(Z, None, 4))
        assert r.status["symmetric"] is False
        assert r.witnesses["symmetric"] == (1,)
        assert replay_length_witness(HomWeight(Z, [1]), "symmetric", r.witnesses["symmetric"])

    def test_constant_one(self):
        r = check_length_axioms(ConstantWeight(CyclicGroup(3), 1), full_ball(CyclicGroup(3)))
        assert r.status["zero_only_at_identity"] is False
        assert r.witnesses["zero_only_at_identity"] == (0,)

    @given(st.lists(st.integers(0, 4), min_size=5, max_size=5))
    def test_witnesses_replay(self, vals):
        G = CyclicGroup(6)
        w = TableWeight(G, [0] + vals)
        r = check_length_axioms(w, full_ball(G))
        for axiom, wit in r.witnesses.items():
            assert replay_length_witness(w, axiom, wit)


class TestProper:
    def test_rules(self):
        assert check_proper(WordLengthWeight(Z)).proper is True
        assert check_proper(ConstantWeight(Z, 5)).proper is False
        assert check_proper(HomWeight(Z, [2])).proper is True
        # a homomorphism weight on Z^2 is constant along its kernel direction
        assert check_proper(HomWeight(Z2, [1, 1])).proper is False
        assert check_proper(TableWeight(CyclicGroup(6), [0, 1, 2, 3, 2, 1])).proper is True


class TestDirac:
    def test_word_length_sup_is_one(self):
        r = check_dirac_weight(WordLengthWeight(Z), enumerate_ball(Z, None, 10))
        assert r.status["dirac"] is True
        assert r.values["sup"]["1"] == 1 and r.values["sup"]["-1"] == 1

    def test_square_diverges(self):
        from nctriples.weights import CallableWeight

        w = CallableWeight(Z, lambda x: x[0] ** 2, "square")
        r = check_dirac_weight(w, enumerate_ball(Z, None, 3), probes=[(1,)])
        assert r.values["verdict"] == "divergent"

    @given(st.sampled_from([(Z2, 4), (F2, 3), (symmetric_group(3), 3)]))
    def test_length_bound(self, gr):
        group, R = gr
        ball = enumerate_ball(group, None, R)
        r = check_dirac_weight(WordLengthWeight(group), ball)
        assert r.status["length_bound"] is True


def _random_weight(draw_vals, n):
    return TableWeight(CyclicGroup(n), draw_vals)


class TestDecomposition:
    def test_word_length_fails(self):
        d = decompose_weight(WordLengthWeight(Z), enumerate_ball(Z, None, 5))
        assert not any(d.conditions.values())
        assert d.witnesses["four_point"] == (1, 1, 0)

    def test_affine(self):
        w = AffineWeight(2, HomWeight(Z, [3]))
        d = decompose_weight(w, enumerate_ball(Z, None, 5))
        c, h = d.pair()
        assert c == 2 and isinstance(h, HomWeight) and list(h.coefficients) == [3]

    @given(st.integers(2, 6).flatmap(lambda n: st.lists(st.integers(-2, 2), min_size=n, max_size=n)))
    def test_four_way_agreement(self, vals):
        n = len(vals)
        G = CyclicGroup(n)
        d = decompose_weight(TableWeight(G, vals), full_ball(G))
        assert d.agree and d.exhaustive
        # independent oracle: on a finite group the affine part is a hom into R, hence zero
        assert d.success == (len(set(vals)) == 1)

    @given(st.integers(-5, 5), st.integers(-5, 5), st.integers(-5, 5))
    def test_affine_z2(self, c, a, b):
        w = AffineWeight(c, HomWeight(Z2, [a, b]))
        d = decompose_weight(w, enumerate_ball(Z2, None, 3))
        assert d.success and d.agree


class TestQuotient:
    @pytest.mark.parametrize("d", range(2, 9))
    def test_z_mod_d(self, d):
        q = quotient_length(WordLengthWeight(Z), Z, d)
        vals = [q(r) for r in range(d)]
        assert vals == [min(r, d - r) for r in range(d)]
        G = CyclicGroup(d)
        assert check_length_axioms(q, full_ball(G)).passed
        cmp = compare_pushforward_quotient(make_hom(Z, G, [1]), WordLengthWeight(Z))
        assert cmp["equal"] and cmp["count"] == d

    def test_z_mod_3(self):
        q = quotient_length(WordLengthWeight(Z), Z, 3)
        assert [q(r) for r in range(3)] == [0, 1, 1]

    def test_finite_quotient(self):
        G = CyclicGroup(6)
        hom = make_hom(G, CyclicGroup(3), [1])
        w = TableWeight(G, [0, 1, 2, 3, 2, 1])
        cmp = compare_pushforward_quotient(hom, w)
        assert cmp["equal"]

    def test_not_normal(self):
        S3 = symmetric_group(3)
        t = [x for x in S3.elements() if S3.label(x) == "102"][0]
        with pytest.raises(NotNormal):
            quotient_length(WordLengthWeight(S3), S3, {S3.identity, t})

    def test_pushforward_free_to_z2(self):
        hom = make_hom(F2, Z2, [(1, 0), (0, 1)])
        p = pushforward_length(hom, WordLengthWeight(F2))
        assert p((1, 0)) == 1 and p((2, -1)) == 3


class TestWeightedHom:
    def test_pullback_weighted(self):
        phi = make_hom(CyclicGroup(2), CyclicGroup(4), [2])
        wH = TableWeight(CyclicGroup(4), [0, 1, 2, 1])
        wG = pullback(phi, wH)
        assert [wG(x) for x in range(2)] == [0, 2]
        r = check_weighted_hom(phi, wG, wH, full_ball(CyclicGroup(2)))
        assert r.status["weighted"] and r.status["co_isometric"]

    @given(st.lists(st.integers(0, 3), min_size=3, max_size=3))
    def test_weighted_implies_coisometric(self, vals):
        phi = make_hom(CyclicGroup(2), CyclicGroup(4), [2])
        wH = TableWeight(CyclicGroup(4), [0] + vals)
        wG = TableWeight(CyclicGroup(2), [0, vals[1]])
        r = check_weighted_hom(phi, wG, wH, full_ball(CyclicGroup(2)))
        if r.status["weighted"]:
            assert r.status["co_isometric"]
