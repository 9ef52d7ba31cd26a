"""The group algebra C[G] and its (twisted) regular representation on a ball."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import (
    AntilinearUnsupported,
    DimensionMismatch,
    DimensionTooLarge,
    GroupMismatch,
    InputError,
)
from .groups import BallIndex, FreeAbelianGroup, GroupHom, GroupModel

MAX_DIM = 4096
NORM_RTOL = 1e-10
NORM_MAX_ITER = 10_000


class AlgebraElement:
    """Finitely supported function ``G -> C``; zero coefficients are dropped."""

    __slots__ = ("group", "coeffs")

    def __init__(self, group: GroupModel, coeffs: Mapping | None = None):
        self.group = group
        clean = {}
        for x, c in (coeffs or {}).items():
            c = complex(c)
            if c != 0:
                x = group.canonical(x)
                clean[x] = clean.get(x, 0) + c
                if clean[x] == 0:
                    del clean[x]
        self.coeffs = clean

    @classmethod
    def delta(cls, group: GroupModel, x, c=1.0) -> "AlgebraElement":
        return cls(group, {x: c})

    @classmethod
    def zero(cls, group: GroupModel) -> "AlgebraElement":
        return cls(group, {})

    def __call__(self, x) -> complex:
        return self.coeffs.get(x, 0j)

    @property
    def support(self):
        return list(self.coeffs)

    def __bool__(self):
        return bool(self.coeffs)

    def _same(self, other):
        if self.group != other.group:
            raise GroupMismatch(f"{self.group!r} vs {other.group!r}")

    def __add__(self, other):
        self._same(other)
        out = dict(self.coeffs)
        for x, c in other.coeffs.items():
            out[x] = out.get(x, 0) + c
        return AlgebraElement(self.group, out)

    def __neg__(self):
        return AlgebraElement(self.group, {x: -c for x, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, AlgebraElement):
            return convolve(self, other)
        return AlgebraElement(self.group, {x: c * other for x, c in self.coeffs.items()})

    def __rmul__(self, scalar):
        return self * scalar

    def __eq__(self, other):
        return (
            isinstance(other, AlgebraElement)
            and self.group == other.group
            and self.coeffs == other.coeffs
        )

    def allclose(self, other, tol=1e-12) -> bool:
        self._same(other)
        keys = set(self.coeffs) | set(other.coeffs)
        return all(abs(self(x) - other(x)) <= tol for x in keys)

    def __repr__(self):
        terms = ", ".join(f"{self.group.element_to_json(x)}: {c}" for x, c in self.coeffs.items())
        return f"AlgebraElement({{{terms}}})"

    def to_json(self):
        return [
            [self.group.element_to_json(x), [c.real, c.imag]] for x, c in self.coeffs.items()
        ]


def delta(group, x, c=1.0) -> AlgebraElement:
    return AlgebraElement.delta(group, x, c)


def convolve(f: AlgebraElement, g: AlgebraElement) -> AlgebraElement:
    """``(f*g)(z) = sum_{xy=z} f(x) g(y)``."""
    f._same(g)
    G = f.group
    out: dict = {}
    for x, a in f.coeffs.items():
        for y, b in g.coeffs.items():
            z = G.mul(x, y)
            out[z] = out.get(z, 0) + a * b
    return AlgebraElement(G, out)


def involution(f: AlgebraElement) -> AlgebraElement:
    """``f*(x) = conj(f(x^-1))``."""
    G = f.group
    return AlgebraElement(G, {G.inv(x): c.conjugate() for x, c in f.coeffs.items()})


def inner_product(f: AlgebraElement, g: AlgebraElement) -> complex:
    """Antilinear in the first slot."""
    f._same(g)
    return sum((f(x).conjugate() * c for x, c in g.coeffs.items()), 0j)


def norm_squared(f: AlgebraElement) -> float:
    return sum(abs(c) ** 2 for c in f.coeffs.values())


def linearize_hom(hom: GroupHom, f: AlgebraElement) -> AlgebraElement:
    """``A_phi(f) = sum f(x) delta_{phi(x)}``, merging coefficients over fibers."""
    if f.group != hom.source:
        raise GroupMismatch("element does not live on the homomorphism source")
    out: dict = {}
    for x, c in f.coeffs.items():
        y = hom(x)
        out[y] = out.get(y, 0) + c
    return AlgebraElement(hom.target, out)


def support_length(f: AlgebraElement, ball: BallIndex) -> int:
    """Largest word length over the support (0 for the zero element)."""
    return max((ball.word_length(x) for x in f.coeffs), default=0)


def random_element(
    rng: np.random.Generator,
    elements,
    group: GroupModel,
    max_terms: int = 3,
    integer: bool = True,
) -> AlgebraElement:
    """Random element supported on ``elements``; Gaussian-integer coefficients by default."""
    elements = list(elements)
    k = int(rng.integers(1, max_terms + 1))
    picks = rng.choice(len(elements), size=min(k, len(elements)), replace=False)
    coeffs = {}
    for i in picks:
        if integer:
            c = 0j
            while c == 0:
                c = complex(int(rng.integers(-3, 4)), int(rng.integers(-3, 4)))
        else:
            c = complex(rng.normal(), rng.normal())
        coeffs[elements[int(i)]] = c
    return AlgebraElement(group, coeffs)


# operators


class Operator:
    """Dense matrix between finite bases; ``antilinear`` means ``v -> M conj(v)``."""

    __slots__ = ("domain", "codomain", "matrix", "antilinear")

    def __init__(self, domain, codomain, matrix, antilinear: bool = False):
        matrix = np.asarray(matrix, dtype=np.complex128)
        if matrix.shape != (len(codomain), len(domain)):
            raise DimensionMismatch(
                f"matrix shape {matrix.shape} does not match {len(codomain)}x{len(domain)}"
            )
        if max(matrix.shape) > MAX_DIM:
            raise DimensionTooLarge(f"dimension {max(matrix.shape)} exceeds {MAX_DIM}")
        self.domain = domain
        self.codomain = codomain
        self.matrix = matrix
        self.antilinear = bool(antilinear)

    @property
    def shape(self):
        return self.matrix.shape

    def __matmul__(self, other: "Operator") -> "Operator":
        if not isinstance(other, Operator):
            return NotImplemented
        if self.shape[1] != other.shape[0]:
            raise DimensionMismatch(f"cannot compose {self.shape} with {other.shape}")
        right = other.matrix.conj() if self.antilinear else other.matrix
        return Operator(other.domain, self.codomain, self.matrix @ right, self.antilinear ^ other.antilinear)

    def _check_same(self, other):
        if self.shape != other.shape or self.antilinear != other.antilinear:
            raise DimensionMismatch("operators differ in shape or linearity")

    def __add__(self, other):
        self._check_same(other)
        return Operator(self.domain, self.codomain, self.matrix + other.matrix, self.antilinear)

    def __sub__(self, other):
        self._check_same(other)
        return Operator(self.domain, self.codomain, self.matrix - other.matrix, self.antilinear)

    def __neg__(self):
        return Operator(self.domain, self.codomain, -self.matrix, self.antilinear)

    def __mul__(self, scalar):
        # (c A) v = c (A v) for either linearity
        return Operator(self.domain, self.codomain, self.matrix * complex(scalar), self.antilinear)

    __rmul__ = __mul__

    def apply(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=np.complex128)
        return self.matrix @ (v.conj() if self.antilinear else v)

    def adjoint(self) -> "Operator":
        if self.antilinear:
            raise AntilinearUnsupported("adjoint of an antilinear operator is not provided")
        return Operator(self.codomain, self.domain, self.matrix.conj().T)

    def columns(self, idx) -> np.ndarray:
        return self.matrix[:, idx]

    def __repr__(self):
        tag = "antilinear " if self.antilinear else ""
        return f"Operator({tag}{self.shape[0]}x{self.shape[1]})"


def identity_operator(space) -> Operator:
    return Operator(space, space, np.eye(len(space)))


def diagonal_operator(space, values) -> Operator:
    return Operator(space, space, np.diag(np.asarray(values, dtype=np.complex128)))


def represent(f: AlgebraElement, ball: BallIndex) -> Operator:
    """Compression of the left-regular action: entry ``(w, y)`` is ``f(w y^-1)``."""
    if f.group != ball.group:
        raise GroupMismatch("element and ball live on different groups")
    n = len(ball)
    if n > MAX_DIM:
        raise DimensionTooLarge(f"ball of size {n} exceeds {MAX_DIM}")
    M = np.zeros((n, n), dtype=np.complex128)
    G = ball.group
    pos = ball.positions
    for x, c in f.coeffs.items():
        for j, y in enumerate(ball.elements):
            k = pos.get(G.mul(x, y))
            if k is not None:
                M[k, j] += c
    return Operator(ball, ball, M)


def represent_delta(x, ball: BallIndex) -> Operator:
    return represent(AlgebraElement.delta(ball.group, x), ball)


@dataclass(frozen=True)
class Cocycle:
    """Normalized unimodular 2-cocycle ``u``.

    Built-in: the bicharacter ``exp(i pi theta (m1 n2 - m2 n1))`` on Z^2.
    Otherwise an explicit phase table on a finite group.
    """

    group: GroupModel
    theta: float | None = None
    table: dict | None = None

    def __post_init__(self):
        if self.table is None:
            if not (isinstance(self.group, FreeAbelianGroup) and self.group.rank == 2):
                raise InputError("the built-in cocycle lives on the rank-2 free abelian group")
            if self.theta is None or not math.isfinite(self.theta):
                raise InputError("theta must be a finite real number")
        else:
            if not self.group.is_finite:
                raise InputError("explicit phase tables need a finite group")
            elems = list(self.group.elements())
            for x in elems:
                for y in elems:
                    if (x, y) not in self.table:
                        raise InputError(f"phase table misses pair {(x, y)!r}")
                    if abs(abs(self.table[(x, y)]) - 1) > 1e-12:
                        raise InputError(f"phase at {(x, y)!r} is not unimodular")

    def __call__(self, x, y) -> complex:
        if self.table is not None:
            return complex(self.table[(x, y)])
        return cmath.exp(1j * math.pi * self.theta * (x[0] * y[1] - x[1] * y[0]))

    def identity_defect(self, x, y, z) -> float:
        G = self.group
        return abs(self(x, y) * self(G.mul(x, y), z) - self(y, z) * self(x, G.mul(y, z)))

    def check(self, samples=None, seed: int = 0, elements=None, tol=1e-12) -> dict:
        """Normalization, unimodularity and the cocycle identity.

        Exhaustive on finite tables; ``samples`` seeded triples from ``elements`` otherwise.
        """
        G = self.group
        if self.table is not None:
            elems = list(G.elements())
            triples = [(x, y, z) for x in elems for y in elems for z in elems]
        else:
            elems = list(elements) if elements is not None else [G.identity]
            rng = np.random.default_rng(seed)
            n = samples or 500
            idx = rng.integers(0, len(elems), size=(n, 3))
            triples = [(elems[a], elems[b], elems[c]) for a, b, c in idx]
        e = G.identity
        worst = 0.0
        witness = None
        for x, y, z in triples:
            d = self.identity_defect(x, y, z)
            if d > worst:
                worst = d
                if d > tol:
                    witness = witness or (x, y, z)
        norm_ok = all(abs(self(x, e) - 1) <= tol and abs(self(e, x) - 1) <= tol for x in elems)
        unimodular = all(abs(abs(self(x, y)) - 1) <= tol for x, y, _ in triples)
        return {
            "cocycle_identity": witness is None,
            "max_defect": worst,
            "normalized": norm_ok,
            "unimodular": unimodular,
            "triples": len(triples),
            "witness": witness,
        }


def represent_twisted(x, cocycle: Cocycle, ball: BallIndex) -> Operator:
    """Twisted left translation: entry ``(xy, y)`` is ``u(y^-1 x^-1, x)``."""
    G = ball.group
    if cocycle.group != G:
        raise GroupMismatch("cocycle and ball live on different groups")
    x = G.canonical(x)
    n = len(ball)
    M = np.zeros((n, n), dtype=np.complex128)
    xi = G.inv(x)
    for j, y in enumerate(ball.elements):
        k = ball.index(G.mul(x, y))
        if k is not None:
            M[k, j] = cocycle(G.mul(G.inv(y), xi), x)
    return Operator(ball, ball, M)


# norms


@dataclass(frozen=True)
class NormResult:
    value: float
    lower: float
    upper: float
    method: str  # "partial-permutation" | "iterative"
    iterations: int = 0

    def __float__(self):
        return self.value


def is_partial_permutation(M: np.ndarray) -> bool:
    nz = M != 0
    return bool((nz.sum(axis=0) <= 1).all() and (nz.sum(axis=1) <= 1).all())


def operator_norm(op: Operator | np.ndarray, rtol: float = NORM_RTOL) -> float:
    return operator_norm_bounds(op, rtol).value


def operator_norm_bounds(op: Operator | np.ndarray, rtol: float = NORM_RTOL) -> NormResult:
    """Largest singular value with a two-sided bound.

    Weighted partial permutations are exact (max modulus). Otherwise the Gram
    matrix ``B = M^H M`` is squared repeatedly; since ``lambda^p <= tr(B^p) <=
    rank * lambda^p`` the trace brackets the top eigenvalue, and the bracket
    closes geometrically with each squaring. A power-iteration estimate from the
    first basis vector is reported as the value, clamped into the bracket.
    """
    if isinstance(op, Operator):
        if op.antilinear:
            raise AntilinearUnsupported("operator norms of antilinear maps are refused")
        M = op.matrix
    else:
        M = np.asarray(op, dtype=np.complex128)
    if M.size == 0:
        return NormResult(0.0, 0.0, 0.0, "partial-permutation")
    if max(M.shape) > MAX_DIM:
        raise DimensionTooLarge(f"dimension {max(M.shape)} exceeds {MAX_DIM}")
    if is_partial_permutation(M):
        v = float(np.abs(M).max())
        return NormResult(v, v, v, "partial-permutation")
    B = M.conj().T @ M if M.shape[0] >= M.shape[1] else M @ M.conj().T
    B = (B + B.conj().T) / 2
    t = float(np.trace(B).real)
    if t <= 0:
        return NormResult(0.0, 0.0, 0.0, "iterative")
    rank = B.shape[0]
    Bk = B / t
    logtr = math.log(t)  # log tr(B^p) with p = 2^k
    p = 1
    lo = hi = 0.0
    it = 0
    while it < NORM_MAX_ITER:
        hi = math.exp(logtr / p)
        lo = math.exp((logtr - math.log(rank)) / p)
        if math.sqrt(hi) - math.sqrt(lo) <= rtol * math.sqrt(lo):
            break
        sq = Bk @ Bk
        s = float(np.sum(np.abs(Bk) ** 2))  # tr(Bk^2) for Hermitian Bk
        Bk = (sq + sq.conj().T) / (2 * s)
        logtr = 2 * logtr + math.log(s)
        p *= 2
        it += 1
    # power-iteration estimate from e_0 (fallback start if it lies in the kernel)
    est = None
    for start in (0, None):
        v = np.zeros(B.shape[0], dtype=np.complex128)
        if start == 0:
            v[0] = 1.0
        else:
            v[:] = np.arange(1, B.shape[0] + 1)
        w = Bk @ v
        nw = np.linalg.norm(w)
        if nw > 1e-300:
            w /= nw
            est = float(np.vdot(w, B @ w).real)
            break
    lam = lo if est is None else min(max(est, lo), hi)
    return NormResult(math.sqrt(lam), math.sqrt(lo), math.sqrt(hi), "iterative", it)


def frobenius_norm(op: Operator) -> float:
    return float(np.linalg.norm(op.matrix))
