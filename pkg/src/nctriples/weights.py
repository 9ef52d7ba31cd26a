"""Weights and length functions on groups.

A weight is any real-valued function on a group. Lengths additionally satisfy
subadditivity, symmetry under inversion and vanish exactly at the identity.
Integer-valued weights are kept as Python ints so that equality tests on them
are exact; float-valued ones are compared with an absolute tolerance.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from typing import Any, Callable

import numpy as np

from . import kernels
from .errors import (
    InfiniteFiberSearch,
    InputError,
    KindMismatch,
    NotALength,
    NotNormal,
    PartialTable,
    ProbeOutsideBall,
    RadiusOverflow,
)
from .groups import (
    BallIndex,
    CyclicGroup,
    FreeAbelianGroup,
    FreeGroup,
    GroupHom,
    GroupModel,
    classify_hom,
    enumerate_ball,
    finite_table_group,
    full_ball,
    hom_from_map,
    image_subgroup,
    make_hom,
    max_ball_elements,
    symmetrize,
)

FLOAT_TOL = 1e-12
FOUR_POINT_EXHAUSTIVE_MAX = 60
FOUR_POINT_SAMPLES = 100_000


def parse_number(v):
    """JSON number or decimal string -> int when integral, else float."""
    if isinstance(v, bool):
        raise InputError(f"expected a number, got {v!r}")
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if not math.isfinite(v):
            raise InputError("weight values must be finite")
        return v
    if isinstance(v, str):
        try:
            d = Decimal(v.strip())
        except InvalidOperation as exc:
            raise InputError(f"not a decimal number: {v!r}") from exc
        if not d.is_finite():
            raise InputError("weight values must be finite")
        if d == d.to_integral_value():
            return int(d)
        return float(d)
    raise InputError(f"expected a number, got {v!r}")


def format_number(v) -> str:
    """Decimal-string serialization that keeps integers exact."""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if v.is_integer() and abs(v) < 2**53:
        return str(int(v))
    return repr(v)


def _normalize(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(v)
    return v


def tolerance_for(values) -> float:
    """0 for integral data (exact comparison), else the float tolerance."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        return 0.0
    if np.all(arr == np.round(arr)) and np.all(np.abs(arr) < 2**52):
        return 0.0
    return FLOAT_TOL


def close(a, b, tol=None) -> bool:
    if tol is None:
        tol = 0.0 if isinstance(a, int) and isinstance(b, int) else FLOAT_TOL
    return abs(a - b) <= tol


class WeightModel:
    """A real function on ``group``; call it on canonical elements."""

    kind: str = "abstract"
    group: GroupModel

    def __call__(self, x):
        raise NotImplementedError

    def values(self, ball: BallIndex) -> np.ndarray:
        return np.array([self(x) for x in ball.elements], dtype=np.float64)

    def raw_values(self, ball: BallIndex) -> list:
        return [self(x) for x in ball.elements]

    def to_spec(self) -> dict:
        raise InputError(f"weight kind {self.kind!r} has no JSON form")

    def extends_outside(self, ball: BallIndex) -> bool:
        """Whether the weight may be evaluated off the ball."""
        return True

    def __repr__(self):
        return f"{type(self).__name__}({self.kind})"


class WordLengthWeight(WeightModel):
    kind = "word_length"

    def __init__(self, group: GroupModel, generators=None):
        self.group = group
        if generators is None:
            generators = group.standard_generators()
        self.generators = symmetrize(group, generators)
        self._ball = enumerate_ball(group, self.generators, 0)

    def __call__(self, x):
        return self._ball.word_length(x)

    def values(self, ball):
        if ball.generators == self.generators:
            return ball.lengths.astype(np.float64)
        return super().values(ball)

    def raw_values(self, ball):
        if ball.generators == self.generators:
            return [int(v) for v in ball.lengths]
        return super().raw_values(ball)

    def to_spec(self):
        return {
            "kind": "word_length",
            "generators": [self.group.element_to_json(g) for g in self.generators],
        }


class HomWeight(WeightModel):
    """Additive weight ``x -> sum_i c_i * x_i`` on free abelian or free groups."""

    kind = "hom"

    def __init__(self, group: GroupModel, coefficients):
        if not isinstance(group, (FreeAbelianGroup, FreeGroup)):
            raise KindMismatch(f"hom weights need a free abelian or free group, not {group!r}")
        coefficients = tuple(parse_number(c) for c in coefficients)
        if len(coefficients) != group.rank:
            raise KindMismatch(f"expected {group.rank} coefficients, got {len(coefficients)}")
        self.group = group
        self.coefficients = coefficients

    def __call__(self, x):
        if isinstance(self.group, FreeAbelianGroup):
            return sum(c * k for c, k in zip(self.coefficients, x))
        total = 0
        for k in x:
            c = self.coefficients[abs(k) - 1]
            total += c if k > 0 else -c
        return total

    @property
    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coefficients)

    def to_spec(self):
        return {"kind": "hom", "coefficients": [format_number(c) for c in self.coefficients]}


class ConstantWeight(WeightModel):
    kind = "constant"

    def __init__(self, group: GroupModel, value):
        self.group = group
        self.value = parse_number(value)

    def __call__(self, x):
        return self.value

    def to_spec(self):
        return {"kind": "constant", "value": format_number(self.value)}


class TableWeight(WeightModel):
    """Explicit values on a finite group; never extended."""

    kind = "table"

    def __init__(self, group: GroupModel, values):
        if not group.is_finite:
            raise KindMismatch("table weights need a finite group")
        elems = list(group.elements())
        if isinstance(values, dict):
            table = {}
            for k, v in values.items():
                table[_parse_key(group, k)] = parse_number(v)
        else:
            values = list(values)
            if len(values) != len(elems):
                raise PartialTable(f"table has {len(values)} values for {len(elems)} elements")
            table = {x: parse_number(v) for x, v in zip(elems, values)}
        missing = [x for x in elems if x not in table]
        if missing:
            raise PartialTable(f"table misses elements {[group.element_to_json(m) for m in missing]}")
        self.group = group
        self.table = {x: table[x] for x in elems}

    def __call__(self, x):
        try:
            return self.table[x]
        except KeyError as exc:
            raise InputError(f"{x!r} is not an element of the table group") from exc

    def extends_outside(self, ball):
        return False

    def to_spec(self):
        return {"kind": "table", "values": [format_number(self.table[x]) for x in self.group.elements()]}


def _parse_key(group, k):
    if isinstance(k, str):
        try:
            return group.element_from_json(k)
        except InputError:
            pass
        try:
            import json

            return group.element_from_json(json.loads(k))
        except (ValueError, InputError) as exc:
            raise InputError(f"cannot parse table key {k!r}") from exc
    return group.element_from_json(k)


class AffineWeight(WeightModel):
    kind = "affine"

    def __init__(self, constant, hom: HomWeight):
        self.group = hom.group
        self.constant = parse_number(constant)
        self.hom = hom

    def __call__(self, x):
        return self.constant + self.hom(x)

    def to_spec(self):
        return {
            "kind": "affine",
            "constant": format_number(self.constant),
            "coefficients": [format_number(c) for c in self.hom.coefficients],
        }


class PullbackWeight(WeightModel):
    """``w o hom``."""

    kind = "pullback"

    def __init__(self, hom: GroupHom, base: WeightModel):
        self.group = hom.source
        self.hom = hom
        self.base = base

    def __call__(self, x):
        return self.base(self.hom(x))

    def to_spec(self):
        return {"kind": "pullback", "hom": self.hom.to_spec(), "base": self.base.to_spec()}


class ShiftedWeight(WeightModel):
    kind = "shifted"

    def __init__(self, base: WeightModel, shift):
        self.group = base.group
        self.base = base
        self.shift = parse_number(shift)

    def __call__(self, x):
        return self.base(x) + self.shift

    def extends_outside(self, ball):
        return self.base.extends_outside(ball)

    def to_spec(self):
        return {"kind": "shifted", "shift": format_number(self.shift), "base": self.base.to_spec()}


class CallableWeight(WeightModel):
    """Library-only weight from a Python function."""

    kind = "callable"

    def __init__(self, group: GroupModel, func: Callable, name: str = "callable"):
        self.group = group
        self.func = func
        self.name = name

    def __call__(self, x):
        return _normalize(self.func(x))

    def __repr__(self):
        return f"CallableWeight({self.name})"


def abs_weight(w: WeightModel) -> WeightModel:
    return CallableWeight(w.group, lambda x: abs(w(x)), name=f"|{w!r}|")


def pullback(hom: GroupHom, base: WeightModel) -> WeightModel:
    """``base o hom``, tabulated when the source is finite."""
    if hom.source.is_finite:
        return TableWeight(hom.source, [base(hom(x)) for x in hom.source.elements()])
    return PullbackWeight(hom, base)


def build_weight(spec: dict, group: GroupModel, generators=None) -> WeightModel:
    """Construct a weight from a JSON-style description."""
    if not isinstance(spec, dict) or "kind" not in spec:
        raise InputError("weight spec must be an object with a 'kind' field")
    kind = spec["kind"]
    allowed = {
        "word_length": {"generators"},
        "hom": {"coefficients"},
        "constant": {"value"},
        "table": {"values"},
        "affine": {"constant", "coefficients"},
        "shifted": {"shift", "base"},
        "pullback": {"hom", "base", "target"},
    }
    if kind not in allowed:
        raise InputError(f"unknown weight kind {kind!r}")
    extra = set(spec) - allowed[kind] - {"kind"}
    if extra:
        raise InputError(f"unknown fields for weight kind {kind!r}: {sorted(extra)}")
    try:
        if kind == "word_length":
            gens = spec.get("generators", generators)
            if gens is not None:
                gens = [group.element_from_json(g) for g in gens]
            return WordLengthWeight(group, gens)
        if kind == "hom":
            return HomWeight(group, spec["coefficients"])
        if kind == "constant":
            return ConstantWeight(group, spec["value"])
        if kind == "table":
            return TableWeight(group, spec["values"])
        if kind == "affine":
            return AffineWeight(spec["constant"], HomWeight(group, spec["coefficients"]))
        if kind == "shifted":
            return ShiftedWeight(build_weight(spec["base"], group, generators), spec["shift"])
        from .groups import build_group, build_homomorphism

        target = build_group(spec["target"]) if "target" in spec else group
        hom = build_homomorphism(spec["hom"], group, target)
        return pullback(hom, build_weight(spec["base"], target))
    except KeyError as exc:
        raise InputError(f"weight kind {kind!r} is missing field {exc.args[0]!r}") from exc


# reports


@dataclass
class WeightReport:
    """Per-check verdicts with concrete witnesses for every failure."""

    status: dict = field(default_factory=dict)  # name -> True | False | None
    witnesses: dict = field(default_factory=dict)
    values: dict = field(default_factory=dict)
    exhaustive: bool = True

    @property
    def passed(self) -> bool:
        return all(v is True for v in self.status.values())

    def __getitem__(self, key):
        return self.status[key]


def _pair_values(weight: WeightModel, ball: BallIndex):
    """``w(x_i x_j)`` for all ball pairs; NaN where the product cannot be evaluated."""
    n = len(ball)
    mul = ball.mul_table
    w = weight.values(ball)
    prod = np.full((n, n), np.nan)
    inside = mul >= 0
    prod[inside] = w[mul[inside]]
    if weight.extends_outside(ball):
        g = ball.group
        for i, j in zip(*np.nonzero(~inside)):
            prod[i, j] = weight(g.mul(ball.elements[i], ball.elements[j]))
    return w, prod


def check_length_axioms(weight: WeightModel, ball: BallIndex) -> WeightReport:
    """Subadditivity, symmetry, vanishing exactly at the identity, nonnegativity."""
    g = ball.group
    w, prod = _pair_values(weight, ball)
    tol = tolerance_for(np.concatenate([w, prod[~np.isnan(prod)]]))
    report = WeightReport(exhaustive=not np.isnan(prod).any())
    elems = ball.elements
    j = lambda x: g.element_to_json(x)

    ok = ~np.isnan(prod)
    bad = np.argwhere(ok & (prod > w[:, None] + w[None, :] + tol))
    report.status["subadditive"] = len(bad) == 0
    if len(bad):
        a, b = bad[0]
        report.witnesses["subadditive"] = (j(elems[a]), j(elems[b]))

    inv = ball.inverse_index
    bad = np.nonzero(np.abs(w[inv] - w) > tol)[0]
    report.status["symmetric"] = len(bad) == 0
    if len(bad):
        report.witnesses["symmetric"] = (j(elems[bad[0]]),)

    zero_bad = None
    if abs(w[0]) > tol:
        zero_bad = 0
    else:
        nz = np.nonzero(np.abs(w[1:]) <= tol)[0]
        if len(nz):
            zero_bad = int(nz[0]) + 1
    report.status["zero_only_at_identity"] = zero_bad is None
    if zero_bad is not None:
        report.witnesses["zero_only_at_identity"] = (j(elems[zero_bad]),)

    neg = np.nonzero(w < -tol)[0]
    report.status["nonnegative"] = len(neg) == 0
    if len(neg):
        report.witnesses["nonnegative"] = (j(elems[neg[0]]),)
    return report


def replay_length_witness(weight: WeightModel, axiom: str, witness) -> bool:
    """Re-evaluate a length-axiom witness; True when the failure reproduces."""
    g = weight.group
    xs = [g.element_from_json(v) for v in witness]
    if axiom == "subadditive":
        a, b = xs
        return weight(g.mul(a, b)) > weight(a) + weight(b) + FLOAT_TOL
    (x,) = xs
    if axiom == "symmetric":
        return not close(weight(g.inv(x)), weight(x))
    if axiom == "zero_only_at_identity":
        return (x == g.identity) != close(weight(x), 0)
    if axiom == "nonnegative":
        return weight(x) < -FLOAT_TOL
    raise InputError(f"unknown axiom {axiom!r}")


@dataclass(frozen=True)
class ProperCertificate:
    proper: bool | None
    method: str  # "analytic" | "ball-evidence"
    reason: str
    evidence: dict = field(default_factory=dict)


def check_proper(weight: WeightModel, ball: BallIndex | None = None) -> ProperCertificate:
    """Decide properness analytically per kind; ``None`` when undecidable."""
    g = weight.group
    if g.is_finite:
        return ProperCertificate(True, "analytic", "finite group")
    if isinstance(weight, WordLengthWeight):
        return ProperCertificate(True, "analytic", "word-length balls are finite")
    if isinstance(weight, ConstantWeight):
        return ProperCertificate(False, "analytic", "preimage of the constant is the whole infinite group")
    if isinstance(weight, (HomWeight, AffineWeight)):
        hom = weight if isinstance(weight, HomWeight) else weight.hom
        if hom.is_zero:
            return ProperCertificate(False, "analytic", "zero homomorphism part on an infinite group")
        if hom.group.rank == 1:
            return ProperCertificate(True, "analytic", "nonzero additive weight on Z grows linearly")
        return ProperCertificate(
            False, "analytic", "an additive weight on a group of rank >= 2 has an infinite level set near 0"
        )
    if isinstance(weight, ShiftedWeight):
        base = check_proper(weight.base, ball)
        return ProperCertificate(base.proper, base.method, "shift preserves properness: " + base.reason)
    if isinstance(weight, PullbackWeight):
        base = check_proper(weight.base, None)
        cls = classify_hom(weight.hom)
        if base.proper and cls.mono and cls.mono_exact:
            return ProperCertificate(True, "analytic", "pullback of a proper weight along a monomorphism")
        if cls.kernel is not None and len(cls.kernel) > 1 and not cls.mono_exact:
            pass
    evidence = {}
    if ball is not None:
        w = np.abs(weight.values(ball))
        shell = ball.lengths == ball.radius
        evidence = {
            "radius": ball.radius,
            "min_abs_on_outer_shell": float(w[shell].min()) if shell.any() else None,
            "max_abs_inside": float(w.max()),
        }
    return ProperCertificate(None, "ball-evidence", "no analytic rule for this weight kind", evidence)


def _analytic_dirac(weight: WeightModel) -> str | None:
    if weight.group.is_finite:
        return "finite group"
    if isinstance(weight, WordLengthWeight):
        return "length: difference bounded by the length of the probe"
    if isinstance(weight, (HomWeight, AffineWeight, ConstantWeight)):
        return "additive part: difference is constant"
    if isinstance(weight, (ShiftedWeight, PullbackWeight)):
        return _analytic_dirac(weight.base)
    return None


def check_dirac_weight(weight: WeightModel, ball: BallIndex, probes=None) -> WeightReport:
    """Translate-difference sups ``sup_y |w(y) - w(x^-1 y)|`` per probe ``x``."""
    if probes is None:
        probes = ball.generators
    idx = []
    for p in probes:
        i = ball.index(p)
        if i is None:
            raise ProbeOutsideBall(f"probe {p!r} is not in the ball")
        idx.append(i)
    w = weight.values(ball)
    sups = kernels.translate_sup(ball.mul_table, ball.inverse_index, w)
    g = ball.group
    report = WeightReport()
    report.values["sup"] = {_key(g, ball.elements[i]): _num(sups[i]) for i in idx}
    analytic = _analytic_dirac(weight)
    if analytic is not None:
        report.status["dirac"] = True
        report.values["verdict"] = "bounded"
        report.values["reason"] = analytic
    else:
        prev = ball.sub_ball(ball.radius - 1) if ball.radius > 0 else ball
        prev_sups = kernels.translate_sup(prev.mul_table, prev.inverse_index, weight.values(prev))
        growing = [i for i in idx if i < len(prev) and sups[i] > prev_sups[i] + FLOAT_TOL]
        report.values["previous_radius_sup"] = {
            _key(g, ball.elements[i]): _num(prev_sups[i]) for i in idx if i < len(prev)
        }
        if growing:
            report.status["dirac"] = False
            report.values["verdict"] = "divergent"
            report.witnesses["dirac"] = (g.element_to_json(ball.elements[growing[0]]),)
        else:
            report.status["dirac"] = None
            report.values["verdict"] = "unknown"
        report.exhaustive = False
    if isinstance(weight, WordLengthWeight) or (
        g.is_finite and ball.complete and check_length_axioms(weight, ball).passed
    ):
        lengths = np.array([weight(ball.elements[i]) for i in idx], dtype=np.float64)
        bad = [i for i, l in zip(idx, lengths) if sups[i] > l + FLOAT_TOL]
        report.status["length_bound"] = not bad
        if bad:
            report.witnesses["length_bound"] = (g.element_to_json(ball.elements[bad[0]]),)
    return report


def _key(group, x) -> str:
    import json

    return json.dumps(group.element_to_json(x), separators=(",", ":"))


def _num(v):
    v = float(v)
    return int(v) if v.is_integer() and abs(v) < 2**53 else v


# affine decomposition


@dataclass
class Decomposition:
    """The four equivalent affine-weight conditions evaluated on a ball."""

    conditions: dict
    witnesses: dict
    constant: Any
    hom: WeightModel | None
    exhaustive: bool

    @property
    def success(self) -> bool:
        return all(self.conditions.values())

    @property
    def agree(self) -> bool:
        return len(set(self.conditions.values())) == 1

    def pair(self):
        """``(constant, hom)`` on success, else ``None``."""
        return (self.constant, self.hom) if self.success else None


def four_point_witness(ball: BallIndex, w: np.ndarray, tol: float, seed: int = 0):
    """First triple violating the four-point identity, exhaustive up to 60 elements."""
    mul, inv = ball.mul_table, ball.inverse_index
    n = len(ball)
    if n <= FOUR_POINT_EXHAUSTIVE_MAX:
        return kernels.first_order_witness(mul, inv, w, tol), True
    rng = np.random.default_rng(seed)
    triples = rng.integers(0, n, size=(FOUR_POINT_SAMPLES, 3))
    return kernels.first_order_witness_sampled(mul, inv, w, tol, triples), False


def decompose_weight(weight: WeightModel, ball: BallIndex, seed: int = 0) -> Decomposition:
    """Split ``w = alpha + phi`` with ``phi`` additive, evaluating all four criteria."""
    g = ball.group
    w = weight.values(ball)
    tol = tolerance_for(w)
    mul, inv = ball.mul_table, ball.inverse_index
    alpha = weight(g.identity)
    phi = w - w[0]
    j = lambda i: g.element_to_json(ball.elements[i])
    conditions, witnesses = {}, {}

    wit = kernels.left_constancy_witness(mul, inv, w, tol)
    conditions["left_translate_constant"] = wit is None
    if wit:
        witnesses["left_translate_constant"] = tuple(j(i) for i in wit)

    wit = kernels.additivity_witness(mul, phi, tol)
    conditions["affine"] = wit is None
    if wit:
        witnesses["affine"] = tuple(j(i) for i in wit)

    wit = kernels.right_constancy_witness(mul, inv, w, tol)
    conditions["right_translate_constant"] = wit is None
    if wit:
        witnesses["right_translate_constant"] = tuple(j(i) for i in wit)

    wit, exhaustive = four_point_witness(ball, w, tol, seed)
    conditions["four_point"] = wit is None
    if wit:
        witnesses["four_point"] = tuple(j(i) for i in wit)

    hom = None
    if all(conditions.values()):
        hom = _hom_part(weight, ball, alpha)
    return Decomposition(conditions, witnesses, alpha, hom, exhaustive)


def _hom_part(weight, ball, alpha) -> WeightModel:
    g = ball.group
    if g.is_finite and ball.complete:
        return TableWeight(g, [weight(x) - alpha for x in g.elements()])
    if isinstance(g, (FreeAbelianGroup, FreeGroup)):
        try:
            coeffs = [weight(s) - alpha for s in g.hom_generators()]
            cand = HomWeight(g, coeffs)
        except InputError:
            cand = None
        if cand is not None and all(
            close(cand(x), weight(x) - alpha) for x in ball.elements
        ):
            return cand
    return CallableWeight(g, lambda x: weight(x) - alpha, name="hom-part")


# quotients and push-forwards


def _as_subgroup(group: GroupModel, normal_subgroup):
    """Normalize the subgroup argument to an element set (finite) or modulus (Z)."""
    if isinstance(normal_subgroup, GroupHom):
        cls = classify_hom(normal_subgroup)
        if group.is_finite:
            return set(cls.kernel)
        if isinstance(group, FreeAbelianGroup) and group.rank == 1 and isinstance(
            normal_subgroup.target, CyclicGroup
        ):
            img = normal_subgroup.images[0]
            d = normal_subgroup.target.n // math.gcd(img, normal_subgroup.target.n)
            return d
        raise InfiniteFiberSearch("kernel of this homomorphism cannot be enumerated")
    if isinstance(normal_subgroup, (int, np.integer)) and not isinstance(normal_subgroup, bool):
        if not (isinstance(group, FreeAbelianGroup) and group.rank == 1):
            raise InputError("an integer subgroup spec means dZ inside Z")
        d = abs(int(normal_subgroup))
        if d == 0:
            raise InputError("the zero subgroup of Z gives an infinite quotient")
        return d
    if not group.is_finite:
        raise InfiniteFiberSearch("explicit subgroups are supported for finite groups only")
    return {group.canonical(x) for x in normal_subgroup}


def check_normal(group: GroupModel, subgroup: set):
    """Raise :class:`NotNormal` unless ``subgroup`` is a normal subgroup."""
    if group.identity not in subgroup:
        raise NotNormal(("identity missing",))
    for a in subgroup:
        if group.inv(a) not in subgroup:
            raise NotNormal(("inverse", group.element_to_json(a)))
        for b in subgroup:
            if group.mul(a, b) not in subgroup:
                raise NotNormal(("product", group.element_to_json(a), group.element_to_json(b)))
    for x in group.elements():
        xi = group.inv(x)
        for h in subgroup:
            if group.mul(group.mul(x, h), xi) not in subgroup:
                raise NotNormal(("conjugate", group.element_to_json(x), group.element_to_json(h)))


@dataclass
class Quotient:
    group: GroupModel
    projection: GroupHom
    cosets: list  # cosets[q] = list of elements (finite case)


def quotient_group(group: GroupModel, normal_subgroup) -> Quotient:
    """``G/N`` with its projection; ``Z/dZ`` is realized as ``CyclicGroup(d)``."""
    sub = _as_subgroup(group, normal_subgroup)
    if isinstance(sub, int):
        q = CyclicGroup(sub)
        return Quotient(q, make_hom(group, q, [1]), [])
    check_normal(group, sub)
    elems = list(group.elements())
    coset_of = {}
    cosets = []
    for x in elems:
        if x in coset_of:
            continue
        c = [group.mul(x, h) for h in elems if h in sub]
        for y in c:
            coset_of[y] = len(cosets)
        cosets.append(sorted(c, key=elems.index))
    reps = [c[0] for c in cosets]
    labels = [str(group.element_to_json(r)) for r in reps]
    table = [[coset_of[group.mul(a, b)] for b in reps] for a in reps]
    q = finite_table_group(labels, table)
    proj = hom_from_map(group, q, [coset_of[x] for x in elems])
    return Quotient(q, proj, cosets)


def _length_ball(length: WeightModel, group: GroupModel, radius: int) -> BallIndex:
    if group.is_finite:
        gens = length.generators if isinstance(length, WordLengthWeight) else None
        return full_ball(group, gens)
    gens = length.generators if isinstance(length, WordLengthWeight) else None
    return enumerate_ball(group, gens, radius)


def quotient_length(length: WeightModel, group: GroupModel, normal_subgroup) -> TableWeight:
    """Coset-minimum length on ``G/N`` as a table weight on the quotient group."""
    sub = _as_subgroup(group, normal_subgroup)
    radius = (sub + 1) if isinstance(sub, int) else 0
    report = check_length_axioms(length, _length_ball(length, group, radius))
    if not report.passed:
        raise NotALength(f"input is not a length: {report.witnesses}")
    quot = quotient_group(group, normal_subgroup)
    if isinstance(sub, int):
        values = _z_mod_d_minima(length, sub)
    else:
        values = [min(length(x) for x in coset) for coset in quot.cosets]
    return TableWeight(quot.group, values)


def _z_mod_d_minima(length: WeightModel, d: int) -> list:
    """Certified residue-class minima of a word length on Z.

    A word length with generators bounded by ``s`` in absolute value satisfies
    ``l(n) >= |n| / s``; so once a candidate minimum ``m`` is known in the
    first period window, no representative with ``|n| > s * m`` can beat it.
    """
    if not isinstance(length, WordLengthWeight):
        raise InfiniteFiberSearch("residue-class minima on Z are certified for word lengths only")
    s = max(abs(g[0]) for g in length.generators)
    out = []
    for r in range(d):
        window = [r + k * d for k in range(-1, 2)]
        m = min(length((n,)) for n in window)
        bound = s * m
        lo = r - ((r + bound) // d) * d
        n = lo
        while n <= bound:
            m = min(m, length((n,)))
            n += d
        out.append(m)
    return out


class PushforwardWeight(WeightModel):
    """Fiber-infimum weight ``h -> inf{l(g) : hom(g) = h}`` on the image."""

    kind = "pushforward"

    def __init__(self, hom: GroupHom, length: WeightModel, cache: dict):
        self.group = hom.target
        self.hom = hom
        self.length = length
        self._cache = cache

    def __call__(self, h):
        if h not in self._cache:
            self._cache.update(_fiber_minima(self.hom, self.length, [h]))
        return self._cache[h]

    def table(self) -> dict:
        return dict(self._cache)


def _fiber_minima(hom: GroupHom, length: WeightModel, points) -> dict:
    src = hom.source
    if src.is_finite:
        out: dict = {}
        for x in src.elements():
            h = hom(x)
            v = length(x)
            if h not in out or v < out[h]:
                out[h] = v
        return out if points is None else {p: out[p] for p in points if _in_image(out, p)}
    if not isinstance(length, WordLengthWeight):
        raise InfiniteFiberSearch("fiber infima over infinite groups need a word length")
    # breadth-first layers are word-length levels: the first hit is the minimum
    wanted = set(points)
    out = {}
    seen = {src.identity}
    frontier = [src.identity]
    r = 0
    cap = max_ball_elements()
    while True:
        for x in frontier:
            h = hom(x)
            if h in wanted and h not in out:
                out[h] = r
        if wanted <= set(out):
            return out
        r += 1
        nxt = []
        for x in frontier:
            for s in length.generators:
                y = src.mul(x, s)
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        if not nxt:
            missing = wanted - set(out)
            raise InputError(f"points {missing!r} are not in the image")
        if len(seen) > cap:
            raise RadiusOverflow(cap, r)
        frontier = nxt


def _in_image(table, p):
    if p not in table:
        raise InputError(f"{p!r} is not in the image")
    return True


def pushforward_length(hom: GroupHom, length: WeightModel) -> PushforwardWeight:
    """Push a length forward along ``hom``; finite images are tabulated eagerly."""
    cache: dict = {}
    if hom.target.is_finite:
        image = image_subgroup(hom)
        cache = _fiber_minima(hom, length, sorted(image, key=repr) if not hom.source.is_finite else None)
    elif hom.source.is_finite:
        cache = _fiber_minima(hom, length, None)
    return PushforwardWeight(hom, length, cache)


def compare_pushforward_quotient(hom: GroupHom, length: WeightModel) -> dict:
    """Value-by-value comparison of push-forward and quotient lengths."""
    push = pushforward_length(hom, length)
    quot = quotient_length(length, hom.source, hom)
    qgroup = quot.group
    mismatches = []
    if isinstance(qgroup, CyclicGroup) and not hom.source.is_finite:
        pairs = [((r,), r) for r in range(qgroup.n)]
        proj = lambda x: x[0] % qgroup.n
    else:
        qobj = quotient_group(hom.source, hom)
        pairs = [(coset[0], q) for q, coset in enumerate(qobj.cosets)]
        proj = None
    for rep, q in pairs:
        if not close(push(hom(rep)), quot(q)):
            mismatches.append((hom.source.element_to_json(rep), push(hom(rep)), quot(q)))
    return {"equal": not mismatches, "mismatches": mismatches, "count": len(pairs)}


def check_weighted_hom(hom: GroupHom, wG: WeightModel, wH: WeightModel, ball: BallIndex) -> WeightReport:
    """Weighted (pullback equality), co-isometric and charged-compatibility flags."""
    g = ball.group
    j = g.element_to_json
    report = WeightReport()
    weighted_bad = None
    coiso_bad = None
    for x in ball.elements:
        a, b = wG(x), wH(hom(x))
        if weighted_bad is None and not close(a, b):
            weighted_bad = x
        if coiso_bad is None and abs(b) > abs(a) + FLOAT_TOL:
            coiso_bad = x
    report.status["weighted"] = weighted_bad is None
    if weighted_bad is not None:
        report.witnesses["weighted"] = (j(weighted_bad),)
    report.status["co_isometric"] = coiso_bad is None
    if coiso_bad is not None:
        report.witnesses["co_isometric"] = (j(coiso_bad),)

    target_ball = _length_ball(wH, hom.target, ball.radius) if hom.target.is_finite else enumerate_ball(
        hom.target, None, ball.radius
    )
    rg = check_length_axioms(abs_weight(wG), ball)
    rh = check_length_axioms(abs_weight(wH), target_ball)
    report.status["charged"] = rg.passed and rh.passed
    if not report.status["charged"]:
        report.witnesses["charged"] = tuple(
            ("source" if not rg.passed else "target", k, v)
            for k, v in (rg.witnesses if not rg.passed else rh.witnesses).items()
        )[:1]

    lg = check_length_axioms(wG, ball).passed
    lh = check_length_axioms(wH, target_ball).passed
    if lg and lh and report.status["weighted"]:
        kernel = [x for x in ball.elements if hom(x) == hom.target.identity]
        injective = kernel == [g.identity]
        report.status["isometry_injective"] = injective
        if not injective:
            report.witnesses["isometry_injective"] = (j(kernel[1]),)
        cls = classify_hom(hom)
        if cls.mono_exact:
            report.values["classify_mono"] = cls.mono
            report.status["isometry_injective"] = injective and cls.mono
    return report
