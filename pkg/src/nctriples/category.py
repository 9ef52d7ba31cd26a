"""Morphisms of truncated spectral triples.

A morphism is a pair ``(phi, Phi)``: an algebra map and a bounded operator
between the Hilbert spaces that intertwines the representations and the Dirac
operators. On balls every identity is checked column by column, keeping only
source basis vectors ``delta_y`` whose images stay clear of both boundaries.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .algebra import (
    AlgebraElement,
    Operator,
    convolve,
    involution,
    linearize_hom,
    random_element,
    support_length,
)
from .errors import (
    DegreeMismatch,
    DimensionMismatch,
    GroupMismatch,
    InputError,
    MissingStructure,
    NotComposable,
    NotHomInduced,
    NotSpectral,
)
from .groups import GroupHom, compose_homs, conjugation_hom, identity_hom
from .reports import Report
from .triple import TripleModel, _ball_index

TOL = 1e-12
RANDOM_SAMPLES = 50
EXPLICIT_MAP_SAMPLES = 100


@dataclass(eq=False)
class TripleMorphism:
    source: TripleModel
    target: TripleModel
    algebra_map: GroupHom | Callable
    phi: Operator
    real_checked: bool = False
    even_checked: bool = False
    margin: int = 0  # extra source margin on which Phi itself is exact
    flag_reports: dict = field(default_factory=dict)

    @property
    def hom_induced(self) -> bool:
        return isinstance(self.algebra_map, GroupHom)

    def map_element(self, f: AlgebraElement) -> AlgebraElement:
        if self.hom_induced:
            return linearize_hom(self.algebra_map, f)
        return self.algebra_map(f)

    @property
    def is_isometry(self) -> bool:
        M = self.phi.matrix
        return bool(np.max(np.abs(M.conj().T @ M - np.eye(M.shape[1])), initial=0.0) <= TOL)


class MorphismReport(Report):
    """Intertwining verdicts; ``morphism`` is set when every check passed."""

    def __init__(self):
        super().__init__()
        self.morphism: TripleMorphism | None = None


def _normalize_map(T1: TripleModel, T2: TripleModel, algebra_map):
    if algebra_map is None:
        if T1.group != T2.group:
            raise GroupMismatch("an implicit identity algebra map needs equal groups")
        return identity_hom(T1.group)
    if isinstance(algebra_map, GroupHom):
        if algebra_map.source != T1.group or algebra_map.target != T2.group:
            raise GroupMismatch("homomorphism does not match the triples' groups")
    elif not callable(algebra_map):
        raise InputError("algebra map must be a GroupHom or a callable on algebra elements")
    return algebra_map


def _apply_map(algebra_map, f):
    if isinstance(algebra_map, GroupHom):
        return linearize_hom(algebra_map, f)
    return algebra_map(f)


def safe_columns(T1: TripleModel, T2: TripleModel, Phi: np.ndarray, source_margin: int, target_margin: int) -> np.ndarray:
    """Source columns ``y`` with ``delta_y`` and the support of ``Phi delta_y`` inside the margins."""
    src = T1.core_mask(source_margin)
    tgt = T2.core_mask(target_margin)
    support_ok = ~np.any((Phi != 0) & ~tgt[:, None], axis=0)
    return np.nonzero(src & support_ok)[0]


def sample_pool(triple: TripleModel):
    ball = triple.ball
    if ball.complete:
        return list(ball.elements)
    reach = max(1, ball.radius // 3)
    return list(ball.elements[: int(np.searchsorted(ball.lengths, reach, side="right"))])


def _test_elements(T1: TripleModel, count: int, seed: int) -> list:
    rng = np.random.default_rng(seed)
    fs = [AlgebraElement.delta(T1.group, s) for s in T1.ball.generators]
    pool = sample_pool(T1)
    fs += [random_element(rng, pool, T1.group, 3) for _ in range(count)]
    return fs


def _residual(A: np.ndarray, cols: np.ndarray):
    """Max entry modulus over ``cols`` plus the first offending column."""
    if len(cols) == 0:
        return 0.0, None
    sub = np.abs(A[:, cols])
    worst = float(sub.max(initial=0.0))
    bad = np.nonzero(sub.max(axis=0) > TOL)[0]
    return worst, (int(cols[bad[0]]) if len(bad) else None)


def _basis_json(triple: TripleModel, col: int):
    n = len(triple.ball)
    x = triple.group.element_to_json(triple.ball.elements[col % n])
    return x if triple.copies == 1 else {"copy": col // n, "element": x}


def _check_explicit_map(report: Report, T1: TripleModel, algebra_map, seed: int):
    rng = np.random.default_rng(seed + 7)
    pool = sample_pool(T1)
    G = T1.group
    one = algebra_map(AlgebraElement.delta(G, G.identity))
    unital = one.allclose(AlgebraElement.delta(one.group, one.group.identity))
    mult = invol = True
    witness = None
    for _ in range(EXPLICIT_MAP_SAMPLES):
        f = random_element(rng, pool, G, 2)
        g = random_element(rng, pool, G, 2)
        if not algebra_map(convolve(f, g)).allclose(convolve(algebra_map(f), algebra_map(g))):
            mult, witness = False, witness or ("multiplicative", f.to_json(), g.to_json())
        if not algebra_map(involution(f)).allclose(involution(algebra_map(f))):
            invol, witness = False, witness or ("involutive", f.to_json())
    report.status["algebra_map"] = unital and mult and invol
    report.values["algebra_map"] = {
        "unital": unital,
        "multiplicative": mult,
        "involutive": invol,
        "samples": EXPLICIT_MAP_SAMPLES,
    }
    if witness:
        report.witnesses["algebra_map"] = witness


def check_morphism(
    T1: TripleModel,
    T2: TripleModel,
    algebra_map=None,
    Phi: Operator | None = None,
    override: bool = False,
    samples: int = RANDOM_SAMPLES,
    seed: int = 0,
    phi_margin: int = 0,
) -> MorphismReport:
    """Verify the representation and Dirac intertwinings of ``(phi, Phi)`` on the safe core."""
    if not override and not (T1.spectral and T2.spectral):
        raise NotSpectral("both triples must be spectral (pass override=True to study counterexamples)")
    algebra_map = _normalize_map(T1, T2, algebra_map)
    if Phi is None:
        if T1.dimension != T2.dimension:
            raise DimensionMismatch("an implicit identity Phi needs equal dimensions")
        Phi = Operator(T1.space, T2.space, np.eye(T1.dimension))
    if Phi.shape != (T2.dimension, T1.dimension):
        raise DimensionMismatch(f"Phi has shape {Phi.shape}, expected {(T2.dimension, T1.dimension)}")
    if Phi.antilinear:
        raise InputError("Phi must be linear")
    report = MorphismReport()
    M = Phi.matrix
    report.values["degenerate"] = bool(not M.any())
    if not isinstance(algebra_map, GroupHom):
        _check_explicit_map(report, T1, algebra_map, seed)

    worst, witness, min_cols = 0.0, None, None
    for f in _test_elements(T1, samples, seed):
        g = _apply_map(algebra_map, f)
        if g.group != T2.group:
            raise GroupMismatch("algebra map lands in the wrong group")
        lhs = M @ T1.represent(f).matrix
        rhs = T2.represent(g).matrix @ M
        cols = safe_columns(T1, T2, M, support_length(f, T1.ball) + phi_margin, support_length(g, T2.ball))
        min_cols = len(cols) if min_cols is None else min(min_cols, len(cols))
        r, bad = _residual(lhs - rhs, cols)
        worst = max(worst, r)
        if bad is not None and witness is None:
            witness = {"element": f.to_json(), "basis_vector": _basis_json(T1, bad)}
    report.status["intertwines_pi"] = witness is None
    report.values["intertwines_pi"] = {"max_residual": worst, "safe_columns": min_cols}
    if witness:
        report.witnesses["intertwines_pi"] = witness
    report.safe_core["intertwines_pi"] = phi_margin

    cols = safe_columns(T1, T2, M, T1.dirac_margin + phi_margin, T2.dirac_margin)
    r, bad = _residual(M @ T1.D.matrix - T2.D.matrix @ M, cols)
    report.status["intertwines_d"] = bad is None
    report.values["intertwines_d"] = {"max_residual": r, "safe_columns": len(cols)}
    report.safe_core["intertwines_d"] = T1.dirac_margin + phi_margin
    if bad is not None:
        out = M[:, bad]
        report.witnesses["intertwines_d"] = {
            "basis_vector": _basis_json(T1, bad),
            "phi_d1": [_cx(v) for v in (M @ T1.D.matrix)[:, bad][out != 0]],
            "d2_phi": [_cx(v) for v in (T2.D.matrix @ M)[:, bad][out != 0]],
        }
    if report.passed:
        report.morphism = TripleMorphism(T1, T2, algebra_map, Phi, margin=phi_margin)
    return report


def _cx(v):
    v = complex(v)
    if v.imag == 0:
        return v.real
    return [v.real, v.imag]


def _flag_check(m: TripleMorphism, A1: Operator, A2: Operator, name: str) -> Report:
    """``A2 Phi = Phi A1`` on source columns whose image stays inside the target ball."""
    lhs = (A2 @ m.phi).matrix
    rhs = (m.phi @ A1).matrix
    cols = safe_columns(m.source, m.target, m.phi.matrix, m.margin, 0)
    r, bad = _residual(lhs - rhs, cols)
    rep = Report()
    rep.status[name] = bad is None
    rep.values[name] = {"max_residual": r}
    if bad is not None:
        rep.witnesses[name] = {
            "basis_vector": _basis_json(m.source, bad),
            "column_residual": float(np.linalg.norm((lhs - rhs)[:, bad])),
            "phi_column_norm": float(np.linalg.norm(m.phi.matrix[:, bad])),
        }
    return rep


def check_real_flag(m: TripleMorphism) -> bool:
    """``J2 Phi = Phi J1``; stores the report under ``m.flag_reports['real']``."""
    rep = _flag_check(m, m.source.J, m.target.J, "intertwines_j")
    m.flag_reports["real"] = rep
    m.real_checked = rep.passed
    return m.real_checked


def check_even_flag(m: TripleMorphism) -> bool:
    if m.source.grading is None or m.target.grading is None:
        raise MissingStructure("both triples need a grading")
    rep = _flag_check(m, m.source.grading, m.target.grading, "intertwines_grading")
    m.flag_reports["even"] = rep
    m.even_checked = rep.passed
    return m.even_checked


def _same_triple(a: TripleModel, b: TripleModel) -> bool:
    if a is b:
        return True
    return (
        a.group == b.group
        and a.copies == b.copies
        and a.ball.elements == b.ball.elements
        and a.ball.radius == b.ball.radius
        and np.array_equal(a.D.matrix, b.D.matrix)
    )


def compose(m2: TripleMorphism, m1: TripleMorphism) -> TripleMorphism:
    """``m2 o m1``; flags propagate as logical and."""
    if not _same_triple(m1.target, m2.source):
        raise NotComposable("target of the first morphism is not the source of the second")
    if m1.hom_induced and m2.hom_induced:
        amap = compose_homs(m2.algebra_map, m1.algebra_map)
    else:
        a1, a2 = m1.algebra_map, m2.algebra_map
        amap = lambda f: _apply_map(a2, _apply_map(a1, f))
    Phi = Operator(m1.source.space, m2.target.space, m2.phi.matrix @ m1.phi.matrix)
    return TripleMorphism(
        m1.source,
        m2.target,
        amap,
        Phi,
        real_checked=m1.real_checked and m2.real_checked,
        even_checked=m1.even_checked and m2.even_checked,
        margin=m1.margin + m2.margin,
    )


def identity(T: TripleModel) -> TripleMorphism:
    m = TripleMorphism(T, T, identity_hom(T.group), T.identity())
    m.real_checked = True
    m.even_checked = T.grading is not None
    return m


# p-forms


@dataclass(eq=False)
class PForm:
    triple: TripleModel
    degree: int
    terms: list
    operator: Operator
    margin: int  # total support length of the longest term

    def recompute(self) -> Operator:
        return build_p_form(self.triple, self.terms).operator


def build_p_form(triple: TripleModel, terms) -> PForm:
    """``sum pi(a0) [D, pi(a1)] ... [D, pi(ap)]``, assembled left to right."""
    terms = [tuple(t) for t in terms]
    if not terms:
        raise InputError("a p-form needs at least one term")
    degree = len(terms[0]) - 1
    if degree < 0 or any(len(t) - 1 != degree for t in terms):
        raise DegreeMismatch("all terms must have the same degree")
    total = np.zeros((triple.dimension, triple.dimension), dtype=np.complex128)
    margin = 0
    for t in terms:
        for a in t:
            if a.group != triple.group:
                raise GroupMismatch("p-form coefficient lives on another group")
        op = triple.represent(t[0]).matrix
        for a in t[1:]:
            op = op @ triple.commutator_D(triple.represent(a)).matrix
        total += op
        margin = max(margin, sum(support_length(a, triple.ball) for a in t))
    return PForm(triple, degree, terms, Operator(triple.space, triple.space, total), margin + triple.dirac_margin * degree)


def random_terms(triple: TripleModel, degree: int, count: int, rng: np.random.Generator) -> list:
    pool = sample_pool(triple)
    return [
        tuple(random_element(rng, pool, triple.group, 2) for _ in range(degree + 1)) for _ in range(count)
    ]


def image_terms(m: TripleMorphism, terms) -> list:
    return [tuple(m.map_element(a) for a in t) for t in terms]


def check_p_form_intertwining(m: TripleMorphism, terms) -> Report:
    """``Phi o omega_1 = omega_2 o Phi`` with ``omega_2`` built from the image coefficients."""
    if not m.hom_induced:
        raise NotHomInduced("p-form images need a hom-induced algebra map")
    w1 = build_p_form(m.source, terms)
    w2 = build_p_form(m.target, image_terms(m, terms))
    M = m.phi.matrix
    cols = safe_columns(m.source, m.target, M, w1.margin + m.margin, w2.margin)
    r, bad = _residual(M @ w1.operator.matrix - w2.operator.matrix @ M, cols)
    rep = Report()
    rep.status["p_form_intertwining"] = bad is None
    rep.values["p_form_intertwining"] = {"degree": w1.degree, "max_residual": r, "safe_columns": len(cols)}
    rep.safe_core["p_form_intertwining"] = w1.margin + m.margin
    if bad is not None:
        rep.witnesses["p_form_intertwining"] = {"basis_vector": _basis_json(m.source, bad)}
    return rep


def check_fluctuation_compat(m: TripleMorphism, A1: PForm, A2: PForm, samples: int = 20, seed: int = 0) -> Report:
    """``Phi A1 = A2 Phi`` and whether the fluctuated pair is again a morphism."""
    if A1.degree != 1 or A2.degree != 1:
        raise DegreeMismatch("fluctuations are 1-forms")
    if A1.triple is not m.source or A2.triple is not m.target:
        if not (_same_triple(A1.triple, m.source) and _same_triple(A2.triple, m.target)):
            raise InputError("1-forms must live on the morphism's source and target")
    M = m.phi.matrix
    rep = Report()
    for name, A in (("a1", A1), ("a2", A2)):
        cols = A.triple.safe_core(2 * A.margin)
        X = A.operator.matrix[np.ix_(cols, cols)]
        rep.values[f"{name}_self_adjoint_on_core"] = bool(np.max(np.abs(X - X.conj().T), initial=0.0) <= TOL)
    cols = safe_columns(m.source, m.target, M, A1.margin + m.margin, A2.margin)
    r, bad = _residual(M @ A1.operator.matrix - A2.operator.matrix @ M, cols)
    compatible = bad is None
    rep.status["compatible"] = compatible
    rep.values["compatible"] = {"max_residual": r, "safe_columns": len(cols)}
    if bad is not None:
        rep.witnesses["compatible"] = {"basis_vector": _basis_json(m.source, bad)}
    D1 = m.source.deform(A1.operator, A1.margin)
    D2 = m.target.deform(A2.operator, A2.margin)
    deformed = check_morphism(D1, D2, m.algebra_map, m.phi, override=True, samples=samples, seed=seed, phi_margin=m.margin)
    rep.values["deformed_morphism"] = deformed.passed
    rep.values["deformed_status"] = dict(deformed.status)
    if "intertwines_d" in deformed.witnesses:
        rep.values["deformed_witness"] = deformed.witnesses["intertwines_d"]
    rep.status["deformed_consistent"] = deformed.passed == compatible
    return rep


def check_weak_intertwining(
    T1: TripleModel,
    T2: TripleModel,
    algebra_map=None,
    Phi: Operator | None = None,
    override: bool = False,
    samples: int = RANDOM_SAMPLES,
    seed: int = 0,
) -> Report:
    """Only ``Phi [D1, pi1(f)] = [D2, pi2(phi f)] Phi``, next to the strict verdict."""
    strict = check_morphism(T1, T2, algebra_map, Phi, override=override, samples=samples, seed=seed)
    algebra_map = _normalize_map(T1, T2, algebra_map)
    if Phi is None:
        Phi = Operator(T1.space, T2.space, np.eye(T1.dimension))
    M = Phi.matrix
    worst, witness = 0.0, None
    for f in _test_elements(T1, samples, seed):
        g = _apply_map(algebra_map, f)
        lhs = M @ T1.commutator_D(T1.represent(f)).matrix
        rhs = T2.commutator_D(T2.represent(g)).matrix @ M
        cols = safe_columns(
            T1, T2, M, support_length(f, T1.ball) + T1.dirac_margin, support_length(g, T2.ball) + T2.dirac_margin
        )
        r, bad = _residual(lhs - rhs, cols)
        worst = max(worst, r)
        if bad is not None and witness is None:
            witness = {"element": f.to_json(), "basis_vector": _basis_json(T1, bad)}
    rep = Report()
    rep.status["weak"] = witness is None
    rep.values["weak"] = {"max_residual": worst}
    if witness:
        rep.witnesses["weak"] = witness
    rep.values["strict"] = strict.passed
    rep.values["strict_status"] = dict(strict.status)
    rep.values["strict_witnesses"] = dict(strict.witnesses)
    rep.values["degenerate"] = bool(not M.any())
    return rep


def inner_automorphism(triple: TripleModel, g, samples: int = RANDOM_SAMPLES, seed: int = 0) -> MorphismReport:
    """``Phi = pi(g) J pi(g) J`` with algebra map the linearized conjugation by ``g``."""
    i = _ball_index(triple, g)
    g = triple.ball.elements[i]
    P = triple.represent(AlgebraElement.delta(triple.group, g))
    J = triple.J
    Phi = P @ J @ P @ J
    assert not Phi.antilinear
    hom = conjugation_hom(triple.group, g)
    margin = 0 if triple.ball.complete else 2 * int(triple.ball.lengths[i])
    rep = check_morphism(triple, triple, hom, Phi, override=True, samples=samples, seed=seed, phi_margin=margin)
    G = triple.group
    weighted = all(
        triple.weight(G.mul(G.mul(g, h), G.inv(g))) == triple.weight(h) for h in triple.ball.elements
    )
    rep.values["ad_weighted"] = weighted
    rep.values["phi_margin"] = margin
    return rep
