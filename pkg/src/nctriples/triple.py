"""Truncated spectral triples of weighted groups.

The Hilbert space is spanned by the delta functions of a word-metric ball, the
Dirac operator multiplies by the weight and the real structure is the
antilinear map ``delta_x -> delta_{x^-1}`` extended by complex conjugation.
Identities that mix several translations are asserted only on the safe core,
i.e. on basis vectors far enough from the boundary that no intermediate
product leaves the ball.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from . import kernels
from .algebra import (
    AlgebraElement,
    Operator,
    involution,
    operator_norm,
    random_element,
    represent,
    support_length,
)
from .errors import (
    DepthTooLarge,
    ElementOutsideBall,
    InputError,
    NonPositiveT,
    NoValidRealStructure,
)
from .groups import BallIndex, GroupModel, enumerate_ball, full_ball
from .reports import Report
from .weights import (
    FLOAT_TOL,
    ProperCertificate,
    WeightModel,
    WeightReport,
    check_dirac_weight,
    check_proper,
    decompose_weight,
    format_number,
    four_point_witness,
    tolerance_for,
)

MAX_DEPTH = 6
ZEROTH_ORDER_SAMPLES = 50

# KO sign table: J^2, [J, D], [J, Gamma]; "-" = commutes, "+" = anticommutes
KO_TABLE = {
    0: ("+", "-", "-"),
    1: ("+", "+", None),
    2: ("-", "-", "+"),
    3: ("-", "-", None),
    4: ("-", "-", "-"),
    5: ("-", "+", None),
    6: ("+", "-", "+"),
    7: ("+", "-", None),
}


class DoubledSpace:
    """Two copies of a ball, first copy first."""

    def __init__(self, ball: BallIndex):
        self.ball = ball

    def __len__(self):
        return 2 * len(self.ball)

    def __repr__(self):
        return f"DoubledSpace({self.ball!r})"


@dataclass(eq=False)
class TripleModel:
    group: GroupModel
    weight: WeightModel
    ball: BallIndex
    weight_values: np.ndarray  # weight on the ball, ball order
    proper: ProperCertificate
    dirac_report: WeightReport
    copies: int = 1
    grading: Operator | None = None
    dirac_matrix: np.ndarray | None = None  # set for fluctuated (non-diagonal) operators
    base: "TripleModel | None" = None
    dirac_margin: int = 0  # support length of a fluctuation added to D
    structure_checks: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)

    @property
    def spectral(self) -> bool:
        return self.proper.proper is True and self.dirac_report.status.get("dirac") is True

    @cached_property
    def space(self):
        return self.ball if self.copies == 1 else DoubledSpace(self.ball)

    @property
    def dimension(self) -> int:
        return len(self.ball) * self.copies

    @property
    def diagonal(self) -> bool:
        return self.dirac_matrix is None

    @cached_property
    def d_values(self) -> np.ndarray:
        """Diagonal of D (``w`` per copy, with sign flip on the second copy)."""
        w = self.weight_values
        return w if self.copies == 1 else np.concatenate([w, -w])

    @cached_property
    def basis_lengths(self) -> np.ndarray:
        return np.tile(self.ball.lengths, self.copies)

    @cached_property
    def D(self) -> Operator:
        if self.dirac_matrix is not None:
            return Operator(self.space, self.space, self.dirac_matrix)
        return Operator(self.space, self.space, np.diag(self.d_values.astype(np.complex128)))

    @cached_property
    def J(self) -> Operator:
        n = len(self.ball)
        inv = self.ball.inverse_index
        M = np.zeros((n, n), dtype=np.complex128)
        M[inv, np.arange(n)] = 1.0
        if self.copies == 2:
            M = _block_diag(M, M)
        return Operator(self.space, self.space, M, antilinear=True)

    def identity(self) -> Operator:
        return Operator(self.space, self.space, np.eye(self.dimension))

    def represent(self, f: AlgebraElement) -> Operator:
        op = represent(f, self.ball)
        if self.copies == 2:
            return Operator(self.space, self.space, _block_diag(op.matrix, op.matrix))
        return op

    def commutator_D(self, op: Operator) -> Operator:
        """``[D, op]`` for a linear operator, exact for diagonal D."""
        if self.dirac_matrix is None:
            d = self.d_values
            M = d[:, None] * op.matrix - op.matrix * d[None, :]
        else:
            M = self.dirac_matrix @ op.matrix - op.matrix @ self.dirac_matrix
        return Operator(op.domain, op.codomain, M)

    def core_mask(self, margin: int) -> np.ndarray:
        """Boolean mask of basis vectors free of boundary effects at ``margin``."""
        if self.ball.complete:
            return np.ones(self.dimension, dtype=bool)
        return self.basis_lengths <= self.ball.radius - margin

    def safe_core(self, margin: int) -> np.ndarray:
        return np.nonzero(self.core_mask(margin))[0]

    def deform(self, A: Operator, margin: int = 0) -> "TripleModel":
        """The fluctuated triple with Dirac operator ``D + A``; ``margin`` bounds the reach of ``A``."""
        M = self.D.matrix + A.matrix
        return replace(
            self,
            dirac_matrix=M,
            dirac_margin=self.dirac_margin + margin,
            structure_checks={},
            provenance={**self.provenance, "fluctuated": True},
        )

    def summary(self) -> dict:
        g = self.group
        elems = [g.element_to_json(x) for x in self.ball.elements]
        return {
            "group": g.to_spec(),
            "radius": self.ball.radius,
            "size": self.dimension,
            "copies": self.copies,
            "elements": elems,
            "word_length": [int(v) for v in self.ball.lengths],
            "dirac_diagonal": [format_number(_as_number(v)) for v in self.d_values]
            if self.diagonal
            else None,
            "spectral": self.spectral,
            "proper": self.proper.proper,
            "dirac_weight": self.dirac_report.status.get("dirac"),
            "graded": self.grading is not None,
        }


def _as_number(v):
    v = float(v)
    return int(v) if v.is_integer() and abs(v) < 2**53 else v


def _block_diag(A, B):
    n, m = A.shape
    p, q = B.shape
    M = np.zeros((n + p, m + q), dtype=np.complex128)
    M[:n, :m] = A
    M[n:, m:] = B
    return M


def assemble_triple(
    group: GroupModel,
    weight: WeightModel,
    radius: int | None = None,
    generators=None,
    ball: BallIndex | None = None,
) -> TripleModel:
    """Build the ball-truncated triple; not-spectral inputs are built but flagged."""
    if weight.group != group:
        raise InputError("weight lives on a different group")
    if ball is None:
        if radius is None:
            if not group.is_finite:
                raise InputError("infinite groups need a radius or a ball")
            ball = full_ball(group, generators)
        else:
            ball = enumerate_ball(group, generators, radius)
    values = weight.values(ball)
    proper = check_proper(weight, ball)
    dirac = check_dirac_weight(weight, ball, ball.generators)
    return TripleModel(group, weight, ball, values, proper, dirac)


def _ball_index(triple: TripleModel, x) -> int:
    x = triple.group.canonical(x)
    i = triple.ball.index(x)
    if i is None:
        raise ElementOutsideBall(f"{triple.group.element_to_json(x)!r} is not in the ball")
    return i


def commutator_norm(triple: TripleModel, x) -> dict:
    """``||[D, pi(delta_x)]||`` computed as a matrix norm and as a sup of weight differences."""
    i = _ball_index(triple, x)
    op = triple.commutator_D(triple.represent(AlgebraElement.delta(triple.group, triple.ball.elements[i])))
    computed = operator_norm(op)
    analytic = 0.0
    if triple.diagonal:
        row = triple.ball.mul_table[i]
        ok = row >= 0
        w = triple.weight_values
        if ok.any():
            analytic = float(np.max(np.abs(w[row[ok]] - w[ok])))
    else:
        analytic = None
    return {"computed": _as_number(computed), "analytic": None if analytic is None else _as_number(analytic)}


def commutator_bound_sum(triple: TripleModel, f: AlgebraElement) -> dict:
    """``||[D, pi(f)]||`` against ``sum |f(x)| * ||[D, pi(delta_x)]||``."""
    op = triple.commutator_D(triple.represent(f))
    bound = sum(abs(c) * commutator_norm(triple, x)["analytic"] for x, c in f.coeffs.items())
    return {"computed": operator_norm(op), "bound": bound}


def verify_axioms(triple: TripleModel) -> Report:
    r = Report()
    base = triple.base or triple
    if triple.diagonal:
        d = triple.d_values
        r.status["dirac_self_adjoint"] = bool(np.all(np.isfinite(d)))
    else:
        M = triple.dirac_matrix
        r.status["dirac_self_adjoint"] = bool(np.max(np.abs(M - M.conj().T), initial=0.0) <= FLOAT_TOL)
    r.status["compact_resolvent"] = base.proper.proper
    r.values["compact_resolvent"] = {"method": base.proper.method, "reason": base.proper.reason}
    if base.proper.proper is False:
        r.witnesses["compact_resolvent"] = base.proper.evidence or {"reason": base.proper.reason}
    r.status["bounded_commutators"] = base.dirac_report.status.get("dirac")
    r.values["bounded_commutators"] = dict(base.dirac_report.values)
    if base.dirac_report.witnesses.get("dirac"):
        r.witnesses["bounded_commutators"] = base.dirac_report.witnesses["dirac"]
    sups = {}
    for s in triple.ball.generators:
        sups[_json_key(triple.group, s)] = commutator_norm(triple, s)["computed"]
    r.values["generator_commutator_norms"] = sups

    # invariant core: tail of a rapidly decaying domain vector in graph norm
    lengths = triple.basis_lengths.astype(np.float64)
    xi = np.exp(-(lengths**2))
    dxi = np.abs(triple.D.apply(xi)) if not triple.diagonal else np.abs(triple.d_values) * xi
    total = math.sqrt(float(np.sum(xi**2) + np.sum(dxi**2)))
    residuals = []
    for r_ in range(triple.ball.radius + 1):
        tail = lengths > r_
        residuals.append(math.sqrt(float(np.sum(xi[tail] ** 2) + np.sum(dxi[tail] ** 2))) / total)
    monotone = all(b <= a + 1e-15 for a, b in zip(residuals, residuals[1:]))
    r.status["invariant_core"] = monotone and residuals[-1] < 1e-8
    r.values["invariant_core"] = {"graph_norm_residuals": residuals}
    return r


def _json_key(group, x):
    import json

    return json.dumps(group.element_to_json(x), separators=(",", ":"))


def _sign_of(weight_values, inv, tol) -> str | None:
    plus = bool(np.all(np.abs(weight_values[inv] - weight_values) <= tol))
    minus = bool(np.all(np.abs(weight_values[inv] + weight_values) <= tol))
    if plus and minus:
        return "both"
    return "+" if plus else "-" if minus else None


def _sample_pairs(triple: TripleModel, count: int, seed: int, max_terms: int = 2):
    rng = np.random.default_rng(seed)
    ball = triple.ball
    # keep supports small so that a nontrivial safe core remains
    reach = max(0, ball.radius // 3)
    pool = ball.elements[: int(np.searchsorted(ball.lengths, reach, side="right"))]
    out = []
    for _ in range(count):
        f = random_element(rng, pool, triple.group, max_terms)
        g = random_element(rng, pool, triple.group, max_terms)
        out.append((f, g))
    return out


def zeroth_order_residuals(triple: TripleModel, count: int = ZEROTH_ORDER_SAMPLES, seed: int = 0) -> list:
    """``||[pi(f), J pi(g*) J^-1]||`` restricted to the safe core, per sampled pair."""
    J = triple.J
    out = []
    for f, g in _sample_pairs(triple, count, seed):
        pf = triple.represent(f)
        right = J @ triple.represent(involution(g)) @ J
        margin = support_length(f, triple.ball) + support_length(g, triple.ball)
        core = triple.safe_core(margin)
        C = (pf @ right - right @ pf).matrix[:, core]
        out.append((operator_norm(C) if C.size else 0.0, margin))
    return out


def first_order_operator_residuals(triple: TripleModel, count: int = 10, seed: int = 1) -> list:
    """``||[[D, pi(f)], J pi(g*) J^-1]||`` on the safe core for sampled pairs."""
    J = triple.J
    out = []
    for f, g in _sample_pairs(triple, count, seed):
        c = triple.commutator_D(triple.represent(f))
        right = J @ triple.represent(involution(g)) @ J
        margin = support_length(f, triple.ball) + support_length(g, triple.ball)
        core = triple.safe_core(margin)
        C = (c @ right - right @ c).matrix[:, core]
        out.append(operator_norm(C) if C.size else 0.0)
    return out


def verify_real_structure(triple: TripleModel, samples: int = ZEROTH_ORDER_SAMPLES, seed: int = 0) -> Report:
    r = Report()
    g = triple.group
    J = triple.J
    JJ = (J @ J).matrix
    r.status["j_involutive"] = bool(np.array_equal(JJ, np.eye(triple.dimension)))
    tol = tolerance_for(triple.weight_values)
    sign = _sign_of(triple.weight_values, triple.ball.inverse_index, tol)
    r.values["sign"] = sign
    r.status["j_d_sign"] = sign is not None
    if sign is None:
        w = triple.weight_values
        inv = triple.ball.inverse_index
        bad = np.nonzero((np.abs(w[inv] - w) > tol) & (np.abs(w[inv] + w) > tol))[0]
        i = int(bad[0]) if len(bad) else int(np.nonzero(np.abs(w[inv] - w) > tol)[0][0])
        r.witnesses["j_d_sign"] = (g.element_to_json(triple.ball.elements[i]),)

    res = zeroth_order_residuals(triple, samples, seed)
    worst = max((v for v, _ in res), default=0.0)
    r.status["zeroth_order"] = worst < 1e-12
    r.values["zeroth_order"] = {"max_residual": worst, "pairs": len(res)}
    r.safe_core["zeroth_order"] = max((m for _, m in res), default=0)

    ball = triple.ball
    wit, exhaustive = four_point_witness(ball, triple.weight_values, tol, seed)
    r.status["first_order"] = wit is None
    r.values["first_order"] = {"exhaustive": exhaustive, "triples": len(ball) ** 3 if exhaustive else None}
    if wit is not None:
        r.witnesses["first_order"] = tuple(g.element_to_json(ball.elements[i]) for i in wit)
    dec = decompose_weight(triple.base.weight if triple.base else triple.weight, ball, seed)
    r.status["agrees_with_decomposition"] = dec.success == (wit is None) and dec.agree
    r.values["decomposition"] = {k: v for k, v in dec.conditions.items()}
    r.values["valid"] = sign is not None and wit is None
    return r


@dataclass(frozen=True)
class KOSignature:
    j_squared: str
    j_d: tuple  # subset of {"-", "+"}: "-" commute, "+" anticommute
    j_gamma: tuple | None
    dimensions: frozenset

    def to_json(self):
        return {
            "j_squared": self.j_squared,
            "j_d": list(self.j_d),
            "j_gamma": None if self.j_gamma is None else list(self.j_gamma),
            "dimensions": sorted(self.dimensions),
        }


def _relation_signs(A: Operator, B: Operator) -> tuple:
    """Which of commute ("-") / anticommute ("+") hold exactly-ish for ``A`` and ``B``."""
    AB = (A @ B).matrix
    BA = (B @ A).matrix
    out = []
    if np.max(np.abs(AB - BA), initial=0.0) <= FLOAT_TOL:
        out.append("-")
    if np.max(np.abs(AB + BA), initial=0.0) <= FLOAT_TOL:
        out.append("+")
    return tuple(out)


def ko_signature(triple: TripleModel) -> KOSignature:
    base = triple.base or triple
    rs = verify_real_structure(base)
    if not rs.values["valid"]:
        raise NoValidRealStructure("the weight admits no valid real structure")
    J = triple.J
    JJ = (J @ J).matrix
    I = np.eye(triple.dimension)
    if np.max(np.abs(JJ - I)) <= FLOAT_TOL:
        js = "+"
    elif np.max(np.abs(JJ + I)) <= FLOAT_TOL:
        js = "-"
    else:
        raise NoValidRealStructure("J is not an involution up to sign")
    jd = _relation_signs(J, triple.D)
    jg = None if triple.grading is None else _relation_signs(J, triple.grading)
    dims = set()
    for n, (sj, sd, sg) in KO_TABLE.items():
        if sj != js or sd not in jd:
            continue
        if (sg is None) != (jg is None):
            continue
        if sg is not None and sg not in jg:
            continue
        dims.add(n)
    return KOSignature(js, jd, jg, frozenset(dims))


def double_triple(triple: TripleModel, samples: int = 50, seed: int = 0) -> TripleModel:
    """``(H + H, pi + pi, D + (-D))`` with the swap grading and ``J + J``."""
    if triple.copies != 1 or not triple.diagonal:
        raise InputError("only plain diagonal triples can be doubled")
    n = len(triple.ball)
    S = np.zeros((2 * n, 2 * n), dtype=np.complex128)
    S[:n, n:] = np.eye(n)
    S[n:, :n] = np.eye(n)
    space = DoubledSpace(triple.ball)
    out = TripleModel(
        triple.group,
        triple.weight,
        triple.ball,
        triple.weight_values,
        triple.proper,
        triple.dirac_report,
        copies=2,
        base=triple,
        provenance={**triple.provenance, "doubled": True},
    )
    out.__dict__["space"] = space
    out.grading = Operator(space, space, S)
    out.structure_checks = check_grading(out, samples, seed)
    for name, ok in out.structure_checks.items():
        if name != "witness" and ok is False:
            raise AssertionError(f"doubling produced a bad grading: {name}")
    return out


def check_grading(triple: TripleModel, samples: int = 50, seed: int = 0) -> dict:
    """Even-triple axioms for ``triple.grading``: involution, self-adjoint, commutes with pi, anticommutes with D."""
    G = triple.grading
    I = np.eye(triple.dimension)
    out = {
        "involution": bool(np.array_equal((G @ G).matrix, I)),
        "self_adjoint": bool(np.array_equal(G.matrix, G.matrix.conj().T)),
    }
    anti = (G @ triple.D + triple.D @ G).matrix
    out["anticommutes_with_d"] = bool(np.max(np.abs(anti), initial=0.0) == 0.0)
    rng = np.random.default_rng(seed)
    elems = triple.ball.elements
    fs = [AlgebraElement.delta(triple.group, s) for s in triple.ball.generators]
    fs += [random_element(rng, elems, triple.group, 3) for _ in range(samples)]
    commutes = True
    for f in fs:
        P = triple.represent(f)
        C = (G @ P - P @ G).matrix
        if np.max(np.abs(C), initial=0.0) > 0:
            commutes = False
            col = int(np.nonzero(np.abs(C).max(axis=0) > 0)[0][0])
            out["witness"] = {
                "element": f.to_json(),
                "basis_vector": triple.group.element_to_json(elems[col % len(elems)]),
            }
            break
    out["commutes_with_pi"] = commutes
    return out


def grading_obstruction(triple: TripleModel, samples: int = 50, seed: int = 0) -> dict:
    """Whether a grading anticommuting with D can exist, and the zero-weight candidate."""
    w = triple.d_values
    tol = tolerance_for(w)
    if tol == 0:
        keys = [int(v) for v in w]
    else:
        keys = [round(float(v), 12) + 0.0 for v in w]
    counts = Counter(keys)
    paired = all(counts[k] == counts.get(-k, 0) for k in counts)
    constant = len(counts) == 1
    if constant and keys[0] == 0:
        n = len(triple.ball)
        M = np.zeros((n, n), dtype=np.complex128)
        M[triple.ball.inverse_index, np.arange(n)] = 1.0
        if triple.copies == 2:
            M = _block_diag(M, M)
        cand = replace(triple, grading=Operator(triple.space, triple.space, M))
        checks = check_grading(cand, samples, seed)
        ok = all(v for k, v in checks.items() if k != "witness")
        return {
            "diagnosis": "zero-weight-grading",
            "validated": ok,
            "checks": checks,
            "spectrum_paired": True,
        }
    if constant or not paired:
        reason = "nonzero constant weight" if constant else "spectrum of D is not symmetric under negation"
        return {"diagnosis": "obstructed", "reason": reason, "spectrum_paired": paired}
    return {"diagnosis": "spectral-pairing-only", "spectrum_paired": True}


def regularity_estimates(triple: TripleModel, x, depth: int) -> list:
    """Iterated commutators with ``|D|`` against powers of the translate-difference sup."""
    if not isinstance(depth, (int, np.integer)) or depth < 1:
        raise InputError("depth must be a positive integer")
    if depth > MAX_DEPTH:
        raise DepthTooLarge(f"depth {depth} exceeds {MAX_DEPTH}")
    if not triple.diagonal:
        raise InputError("regularity estimates need a diagonal Dirac operator")
    i = _ball_index(triple, x)
    ball = triple.ball
    xe = ball.elements[i]
    absd = np.abs(triple.d_values)
    P = triple.represent(AlgebraElement.delta(triple.group, xe)).matrix
    sup = float(kernels.translate_sup(ball.mul_table, ball.inverse_index, triple.weight_values)[i])
    core = triple.safe_core(int(ball.lengths[i]))
    chain = P
    mixed = triple.commutator_D(Operator(triple.space, triple.space, P)).matrix
    out = []
    for n in range(1, depth + 1):
        chain = absd[:, None] * chain - chain * absd[None, :]
        mixed = absd[:, None] * mixed - mixed * absd[None, :]
        computed = operator_norm(chain[:, core]) if len(core) else 0.0
        mixed_computed = operator_norm(mixed[:, core]) if len(core) else 0.0
        bound, mixed_bound = sup**n, sup ** (n + 1)
        out.append(
            {
                "depth": n,
                "computed": _as_number(computed),
                "bound": _as_number(bound),
                "mixed_computed": _as_number(mixed_computed),
                "mixed_bound": _as_number(mixed_bound),
                "ok": computed <= bound * (1 + 1e-12) + FLOAT_TOL
                and mixed_computed <= mixed_bound * (1 + 1e-12) + FLOAT_TOL,
                "safe_core_margin": int(ball.lengths[i]),
            }
        )
    return out


def heat_trace(triple: TripleModel, t: float) -> dict:
    """Partial sum of ``exp(-t D^2)`` over the ball with a last-shell tail flag."""
    t = float(t)
    if not (t > 0) or not math.isfinite(t):
        raise NonPositiveT(f"t must be positive, got {t!r}")
    if not triple.diagonal:
        raise InputError("heat trace needs a diagonal Dirac operator")
    terms = np.exp(-t * triple.d_values.astype(np.float64) ** 2)
    # correctly rounded sums keep the trace monotone in R and t
    total = math.fsum(terms)
    last = math.fsum(terms[triple.basis_lengths == triple.ball.radius])
    return {
        "value": total,
        "last_shell": last,
        "tail_small": last < 1e-12 * total,
        "radius": triple.ball.radius,
    }
