"""From weighted groups to spectral triples.

Objects go to their ball-truncated triples; a weighted monomorphism ``phi``
goes to the isometry ``H_phi: delta_x -> delta_{phi(x)}`` together with the
linearized algebra map. Split epimorphisms go the other way, one morphism per
splitting.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg

from .algebra import AlgebraElement, Operator, linearize_hom, norm_squared, random_element
from .category import TripleMorphism, check_morphism, check_real_flag
from .errors import (
    InfiniteGroup,
    NotComposable,
    NotEpimorphism,
    NotMono,
    NotSpectralWeight,
    NotWeighted,
    TargetBallTooSmall,
)
from .groups import (
    BallIndex,
    GroupHom,
    GroupModel,
    classify_hom,
    compose_homs,
    enumerate_ball,
    enumerate_splittings,
    full_ball,
    identity_hom,
)
from .reports import Report
from .triple import TripleModel, assemble_triple
from .weights import (
    WeightModel,
    abs_weight,
    check_dirac_weight,
    check_length_axioms,
    check_proper,
    check_weighted_hom,
    pullback,
)

DEFAULT_VERDICT_RADIUS = 3


@dataclass(eq=False)
class WeightedGroup:
    group: GroupModel
    weight: WeightModel
    verdict_radius: int = DEFAULT_VERDICT_RADIUS
    generators: tuple | None = None

    def ball(self, radius: int | None = None) -> BallIndex:
        if self.group.is_finite and radius is None:
            return full_ball(self.group, self.generators)
        return enumerate_ball(self.group, self.generators, self.verdict_radius if radius is None else radius)

    @cached_property
    def verdicts(self) -> dict:
        return self.compute_verdicts()

    def compute_verdicts(self) -> dict:
        ball = self.ball()
        return {
            "proper": check_proper(self.weight, ball).proper,
            "dirac": check_dirac_weight(self.weight, ball).status.get("dirac"),
            "length": check_length_axioms(self.weight, ball).passed,
            "charged": check_length_axioms(abs_weight(self.weight), ball).passed,
        }

    @property
    def spectral(self) -> bool:
        return self.verdicts["proper"] is True and self.verdicts["dirac"] is True


def functor_object(wg: WeightedGroup, radius: int | None = None, generators=None, override: bool = False) -> TripleModel:
    """The triple of a weighted group; finite groups default to the whole group."""
    if not override and not wg.spectral:
        raise NotSpectralWeight(f"weight is not proper and Dirac: {wg.verdicts}")
    gens = generators if generators is not None else wg.generators
    if radius is None and wg.group.is_finite:
        ball = full_ball(wg.group, gens)
    else:
        ball = enumerate_ball(wg.group, gens, wg.verdict_radius if radius is None else radius)
    T = assemble_triple(wg.group, wg.weight, ball=ball)
    T.provenance["weighted_group"] = {"group": wg.group.to_spec(), "weight": repr(wg.weight)}
    return T


def isometry_matrix(phi: GroupHom, T1: TripleModel, T2: TripleModel) -> np.ndarray:
    """0/1 matrix of ``delta_x -> delta_{phi(x)}``; raises if an image leaves the target ball."""
    M = np.zeros((T2.dimension, T1.dimension), dtype=np.complex128)
    n1, n2 = len(T1.ball), len(T2.ball)
    for j, x in enumerate(T1.ball.elements):
        k = T2.ball.index(phi(x))
        if k is None:
            raise TargetBallTooSmall(
                f"phi({T1.group.element_to_json(x)!r}) lies outside the target ball of radius {T2.ball.radius}"
            )
        for c in range(T1.copies):
            M[c * n2 + k, c * n1 + j] = 1.0
    return M


def functor_morphism(
    phi: GroupHom,
    wgG: WeightedGroup,
    wgH: WeightedGroup,
    radii: tuple | None = None,
    triples: tuple | None = None,
    override: bool = False,
) -> TripleMorphism:
    """``(A_phi, H_phi)`` between the two functor objects, fully verified."""
    cls = classify_hom(phi)
    if not cls.mono:
        raise NotMono("the functor is defined on monomorphisms")
    if triples is None:
        rG, rH = radii if radii is not None else (None, None)
        T1 = functor_object(wgG, rG, override=override)
        T2 = functor_object(wgH, rH, override=override)
    else:
        T1, T2 = triples
    wr = check_weighted_hom(phi, wgG.weight, wgH.weight, T1.ball)
    if not wr.status["weighted"]:
        raise NotWeighted(f"weights do not pull back; witness {wr.witnesses['weighted']}")
    M = isometry_matrix(phi, T1, T2)
    Phi = Operator(T1.space, T2.space, M)
    rep = check_morphism(T1, T2, phi, Phi, override=override)
    if rep.morphism is None:
        raise AssertionError(f"functor image failed the morphism checks: {rep.status} {rep.witnesses}")
    m = rep.morphism
    m.flag_reports["base"] = rep
    check_real_flag(m)
    return m


def check_functor_laws(
    phi: GroupHom,
    psi: GroupHom,
    wG: WeightedGroup,
    wH: WeightedGroup,
    wK: WeightedGroup,
    radii: tuple | None = None,
) -> Report:
    """``F(psi o phi) = F(psi) F(phi)`` and ``F(id) = id``, entrywise exact."""
    if phi.target != psi.source:
        raise NotComposable("phi's target is not psi's source")
    rG, rH, rK = radii if radii is not None else (None, None, None)
    TG = functor_object(wG, rG)
    TH = functor_object(wH, rH)
    TK = functor_object(wK, rK)
    f_phi = functor_morphism(phi, wG, wH, triples=(TG, TH))
    f_psi = functor_morphism(psi, wH, wK, triples=(TH, TK))
    f_comp = functor_morphism(compose_homs(psi, phi), wG, wK, triples=(TG, TK))
    rep = Report()
    prod = f_psi.phi.matrix @ f_phi.phi.matrix
    rep.status["composition"] = bool(np.array_equal(f_comp.phi.matrix, prod))
    ids = []
    for wg, T in ((wG, TG), (wH, TH), (wK, TK)):
        m = functor_morphism(identity_hom(wg.group), wg, wg, triples=(T, T))
        ids.append(bool(np.array_equal(m.phi.matrix, np.eye(T.dimension))))
    rep.status["identity"] = all(ids)
    iso = []
    for m in (f_phi, f_psi, f_comp):
        M = m.phi.matrix
        iso.append(bool(np.array_equal(M.conj().T @ M, np.eye(M.shape[1]))))
    rep.status["isometries"] = all(iso)
    agree = True
    for x in TG.ball.elements:
        d = AlgebraElement.delta(TG.group, x)
        if linearize_hom(compose_homs(psi, phi), d) != linearize_hom(psi, linearize_hom(phi, d)):
            agree = False
            rep.witnesses["algebra_maps"] = (TG.group.element_to_json(x),)
            break
    rep.status["algebra_maps"] = agree
    rep.values["dimensions"] = [TG.dimension, TH.dimension, TK.dimension]
    return rep


def left_exactness_witness(phi: GroupHom, wG: WeightedGroup, wH: WeightedGroup, radii: tuple | None = None) -> Report:
    """Gram matrix of ``H_phi``: identity means trivial kernel, so the morphism is monic."""
    m = functor_morphism(phi, wG, wH, radii=radii)
    M = m.phi.matrix
    gram = M.conj().T @ M
    residual = float(np.max(np.abs(gram - np.eye(M.shape[1])), initial=0.0))
    rep = Report()
    rep.status["gram_identity"] = residual == 0.0
    rep.status["trivial_kernel"] = int(np.linalg.matrix_rank(M)) == M.shape[1]
    rep.values["gram_residual"] = residual
    rep.values["dimension"] = M.shape[1]
    return rep


def non_fullness_witness(wg: WeightedGroup, radius: int | None = None, lam: complex = 2.0) -> Report:
    """``(id, lam * I)`` is a morphism but, for ``lam`` outside {0, 1}, not of the form ``H_psi``."""
    T = functor_object(wg, radius)
    Phi = Operator(T.space, T.space, lam * np.eye(T.dimension))
    base = check_morphism(T, T, identity_hom(T.group), Phi)
    M = Phi.matrix
    # every H_psi has exactly one entry 1 per column and zeros elsewhere
    unit_columns = bool(
        np.all(np.isin(M, (0, 1))) and np.all((M == 1).sum(axis=0) == 1)
    )
    rep = Report()
    rep.status["morphism"] = base.passed
    rep.values["hom_induced_shape"] = unit_columns
    rep.values["degenerate"] = bool(not M.any())
    rep.values["lambda"] = [complex(lam).real, complex(lam).imag]
    rep.values["witness"] = bool(base.passed and not unit_columns and M.any())
    rep.values["reason"] = (
        "columns of H_psi are standard unit vectors; lam * I has entry lam"
        if rep.values["witness"]
        else "excluded: zero map" if rep.values["degenerate"] else "excluded: hom-induced"
    )
    rep.morphism = base.morphism
    return rep


@dataclass(eq=False)
class RelatorPair:
    epi: GroupHom
    splittings: list
    morphisms: list  # TripleMorphism per splitting, target triple -> source triple of epi
    weighted: list = field(default_factory=list)
    target_weights: list = field(default_factory=list)


def relator_morphisms(
    epi: GroupHom,
    wgG: WeightedGroup,
    wgH: WeightedGroup | None = None,
    weights_per_splitting: list | None = None,
) -> RelatorPair:
    """One morphism ``(A_psi, H_psi)`` per splitting ``psi`` of ``epi``.

    When ``wgH`` is omitted each splitting pulls the source weight back along
    itself; otherwise the given target weight must be a weighted hom for it.
    """
    if not (epi.source.is_finite and epi.target.is_finite):
        raise InfiniteGroup("the relator is built on finite groups only")
    if not classify_hom(epi).epi:
        raise NotEpimorphism("homomorphism is not surjective")
    splittings = enumerate_splittings(epi)
    morphisms, weighted, weights = [], [], []
    for k, psi in enumerate(splittings):
        if weights_per_splitting is not None:
            wH = WeightedGroup(epi.target, weights_per_splitting[k])
        elif wgH is not None:
            wH = wgH
        else:
            wH = WeightedGroup(epi.target, pullback(psi, wgG.weight))
        ball = full_ball(epi.target)
        ok = check_weighted_hom(psi, wH.weight, wgG.weight, ball).status["weighted"]
        weighted.append(ok)
        weights.append(wH)
        morphisms.append(functor_morphism(psi, wH, wgG) if ok else None)
    return RelatorPair(epi, splittings, morphisms, weighted, weights)


def check_relator_closure(epi1: GroupHom, epi2: GroupHom, wgG: WeightedGroup) -> Report:
    """Composites ``H_psi1 H_psi2`` appear among the pairs stored for ``epi2 o epi1``."""
    if epi1.target != epi2.source:
        raise NotComposable("epi1's target is not epi2's source")
    r1 = relator_morphisms(epi1, wgG)
    rep = Report()
    comp = relator_morphisms(compose_homs(epi2, epi1), wgG)
    stored = {psi: m for psi, m in zip(comp.splittings, comp.morphisms)}
    found, missing = 0, []
    for psi1, m1, wH in zip(r1.splittings, r1.morphisms, r1.target_weights):
        r2 = relator_morphisms(epi2, wH)
        for psi2, m2 in zip(r2.splittings, r2.morphisms):
            c = compose_homs(psi1, psi2)
            m = stored.get(c)
            if m is None or not np.array_equal(m.phi.matrix, m1.phi.matrix @ m2.phi.matrix):
                missing.append((psi1.to_spec(), psi2.to_spec()))
            else:
                found += 1
    rep.status["closure"] = not missing
    rep.values["composites"] = found
    rep.values["composite_splittings"] = len(comp.splittings)
    if missing:
        rep.witnesses["closure"] = missing[0]
    ident = relator_morphisms(identity_hom(epi1.source), wgG)
    rep.status["identity_pair"] = len(ident.splittings) == 1 and np.array_equal(
        ident.morphisms[0].phi.matrix, np.eye(ident.morphisms[0].phi.shape[0])
    )
    return rep


def linearization_matrix(phi: GroupHom) -> np.ndarray:
    G, H = list(phi.source.elements()), list(phi.target.elements())
    pos = {y: i for i, y in enumerate(H)}
    A = np.zeros((len(H), len(G)))
    for j, x in enumerate(G):
        A[pos[phi(x)], j] = 1.0
    return A


def check_linearization_bound(phi: GroupHom, samples: int = 100, seed: int = 0) -> Report:
    """``||A_phi f||^2 <= |ker phi| ||f||^2``, its equality case, and ``ker A_phi``."""
    G, H = phi.source, phi.target
    if not (G.is_finite and H.is_finite):
        raise InfiniteGroup("the linearization bound is checked on finite groups")
    elems = list(G.elements())
    kernel = [x for x in elems if phi(x) == H.identity]
    k = len(kernel)
    rng = np.random.default_rng(seed)
    worst = 0.0
    violation = None
    for _ in range(samples):
        f = random_element(rng, elems, G, len(elems))
        ratio = norm_squared(linearize_hom(phi, f)) / norm_squared(f)
        worst = max(worst, ratio)
        if ratio > k + 1e-12 and violation is None:
            violation = f.to_json()
    rep = Report()
    rep.status["bound"] = violation is None
    rep.values["kernel_order"] = k
    rep.values["max_ratio"] = worst
    if violation:
        rep.witnesses["bound"] = violation
    ind = AlgebraElement(G, {h: 1 for h in kernel})
    eq_ratio = norm_squared(linearize_hom(phi, ind)) / norm_squared(ind)
    rep.status["equality_witness"] = eq_ratio == k
    rep.values["equality_ratio"] = eq_ratio

    A = linearization_matrix(phi)
    N = scipy.linalg.null_space(A)
    pos = {x: i for i, x in enumerate(elems)}
    vecs = []
    for x in elems:
        for h in kernel:
            v = np.zeros(len(elems))
            v[pos[G.mul(x, h)]] += 1
            v[pos[x]] -= 1
            if v.any():
                vecs.append(v)
    S = np.array(vecs).T if vecs else np.zeros((len(elems), 0))
    rank_s = int(np.linalg.matrix_rank(S)) if S.size else 0
    dim_ker = N.shape[1]
    image = len({phi(x) for x in elems})
    rep.values["kernel_dimension"] = dim_ker
    rep.values["span_dimension"] = rank_s
    rep.status["kernel_dimension"] = dim_ker == len(elems) - image == rank_s
    span_in_kernel = bool(np.max(np.abs(A @ S), initial=0.0) <= 1e-12)
    kernel_in_span = (
        dim_ker == 0 or int(np.linalg.matrix_rank(np.hstack([S, N]))) == rank_s
    )
    rep.status["span_in_kernel"] = span_in_kernel
    rep.status["kernel_in_span"] = kernel_in_span
    # the set delta_e + span{delta_h : h in ker} contains delta_e, which A_phi does not kill
    e_col = A[:, pos[G.identity]]
    rep.values["delta_e_plus_span_is_kernel"] = bool(not e_col.any())
    # first identity: x in ker phi iff delta_x - delta_e in ker A_phi
    first = all(
        (phi(x) == H.identity) == (not (A[:, pos[x]] - e_col).any()) for x in elems
    )
    rep.status["group_kernel_identity"] = first
    return rep
