"""Concrete discrete groups, word-metric balls and group homomorphisms.

Elements are plain hashable Python values in a canonical form that depends on
the group kind:

* ``CyclicGroup(n)``: an ``int`` in ``range(n)``;
* ``FreeAbelianGroup(rank)``: a ``tuple`` of ``rank`` ints;
* ``FreeGroup(rank)``: a reduced word, a ``tuple`` of nonzero ints where
  ``k`` stands for the ``k``-th generator and ``-k`` for its inverse;
* ``ProductGroup(left, right)``: a pair ``(a, b)``;
* ``FiniteTableGroup``: an ``int`` index into the multiplication table.

Equality of elements is therefore structural equality.
"""

from __future__ import annotations

import itertools
import math
import os
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Any, Iterable, Iterator, Sequence

import numpy as np

from .errors import (
    BadIdentity,
    EmptyGeneratorSet,
    InfiniteGroup,
    InputError,
    MissingInverse,
    NonAssociative,
    NotAHomomorphism,
    NotEpimorphism,
    OrderViolation,
    RadiusOverflow,
)

DEFAULT_MAX_BALL = 200_000
FULL_ASSOCIATIVITY_ORDER = 64
ASSOCIATIVITY_SAMPLES = 1000


def max_ball_elements() -> int:
    """Element cap for ball enumeration (``NCTRIPLES_MAX_BALL`` overrides)."""
    raw = os.environ.get("NCTRIPLES_MAX_BALL")
    if raw is None:
        return DEFAULT_MAX_BALL
    try:
        cap = int(raw)
    except ValueError as exc:
        raise InputError(f"NCTRIPLES_MAX_BALL must be an integer, got {raw!r}") from exc
    if cap <= 0:
        raise InputError("NCTRIPLES_MAX_BALL must be positive")
    return cap


class GroupModel:
    """Common interface of all group kinds."""

    kind: str = "abstract"

    @property
    def identity(self):
        raise NotImplementedError

    def mul(self, a, b):
        raise NotImplementedError

    def inv(self, a):
        raise NotImplementedError

    @property
    def order(self) -> int | None:
        """Group order, ``None`` for infinite groups."""
        return None

    @property
    def is_finite(self) -> bool:
        return self.order is not None

    def elements(self) -> Iterator:
        raise InfiniteGroup(f"{self!r} is infinite")

    def hom_generators(self) -> tuple:
        """Generators whose images determine a homomorphism out of the group."""
        raise NotImplementedError

    def standard_generators(self) -> tuple:
        """Default generating set for word lengths (before symmetrization)."""
        return self.hom_generators()

    def canonical(self, x):
        """Validate ``x`` and return it in canonical form."""
        raise NotImplementedError

    def element_from_json(self, data):
        return self.canonical(data)

    def element_to_json(self, x):
        return x

    def to_spec(self) -> dict:
        raise NotImplementedError

    def power(self, x, k: int):
        if k < 0:
            x = self.inv(x)
            k = -k
        result = self.identity
        base = x
        while k:
            if k & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            k >>= 1
        return result

    def word_length_formula(self, generators: tuple, x) -> int | None:
        """Closed-form word length for standard generating sets, else ``None``."""
        return None

    def is_abelian(self) -> bool | None:
        return None


@dataclass(frozen=True)
class CyclicGroup(GroupModel):
    n: int
    kind = "cyclic"

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n <= 0:
            raise InputError(f"cyclic group order must be a positive integer, got {self.n!r}")

    @property
    def identity(self):
        return 0

    def mul(self, a, b):
        return (a + b) % self.n

    def inv(self, a):
        return (-a) % self.n

    @property
    def order(self):
        return self.n

    def elements(self):
        return iter(range(self.n))

    def hom_generators(self):
        return (1 % self.n,)

    def canonical(self, x):
        if isinstance(x, bool) or not isinstance(x, (int, np.integer)):
            raise InputError(f"cyclic group element must be an integer, got {x!r}")
        return int(x) % self.n

    def to_spec(self):
        return {"kind": "cyclic", "n": self.n}

    def word_length_formula(self, generators, x):
        if set(generators) <= {1 % self.n, (-1) % self.n}:
            return min(x, self.n - x)
        return None

    def is_abelian(self):
        return True


@dataclass(frozen=True)
class FreeAbelianGroup(GroupModel):
    rank: int
    kind = "free_abelian"

    def __post_init__(self):
        if not isinstance(self.rank, int) or self.rank < 1:
            raise InputError(f"free abelian rank must be a positive integer, got {self.rank!r}")

    @property
    def identity(self):
        return (0,) * self.rank

    def mul(self, a, b):
        return tuple(p + q for p, q in zip(a, b))

    def inv(self, a):
        return tuple(-p for p in a)

    def hom_generators(self):
        return tuple(
            tuple(1 if i == j else 0 for j in range(self.rank)) for i in range(self.rank)
        )

    def canonical(self, x):
        if self.rank == 1 and isinstance(x, (int, np.integer)) and not isinstance(x, bool):
            return (int(x),)
        try:
            t = tuple(int(v) for v in x)
        except TypeError as exc:
            raise InputError(f"free abelian element must be a list of ints, got {x!r}") from exc
        if len(t) != self.rank:
            raise InputError(f"expected {self.rank} coordinates, got {x!r}")
        return t

    def element_to_json(self, x):
        return x[0] if self.rank == 1 else list(x)

    def to_spec(self):
        return {"kind": "free_abelian", "rank": self.rank}

    def word_length_formula(self, generators, x):
        std = set(self.hom_generators())
        std |= {self.inv(g) for g in std}
        if set(generators) <= std and len(set(generators)) == len(std):
            return sum(abs(p) for p in x)
        return None

    def is_abelian(self):
        return True


def _letter(k: int) -> str:
    c = chr(ord("a") + abs(k) - 1)
    return c if k > 0 else c.upper()


@dataclass(frozen=True)
class FreeGroup(GroupModel):
    rank: int
    kind = "free"

    def __post_init__(self):
        if not isinstance(self.rank, int) or self.rank < 1:
            raise InputError(f"free group rank must be a positive integer, got {self.rank!r}")

    @property
    def identity(self):
        return ()

    def mul(self, a, b):
        i = 0
        n = min(len(a), len(b))
        while i < n and a[len(a) - 1 - i] == -b[i]:
            i += 1
        return a[: len(a) - i] + b[i:]

    def inv(self, a):
        return tuple(-k for k in reversed(a))

    def hom_generators(self):
        return tuple((k,) for k in range(1, self.rank + 1))

    def canonical(self, x):
        if isinstance(x, str):
            letters = []
            for c in x:
                if not c.isalpha():
                    raise InputError(f"bad free-group letter {c!r}")
                k = ord(c.lower()) - ord("a") + 1
                letters.append(k if c.islower() else -k)
            x = letters
        try:
            word = [int(k) for k in x]
        except TypeError as exc:
            raise InputError(f"free group element must be a word, got {x!r}") from exc
        out: tuple = ()
        for k in word:
            if k == 0 or abs(k) > self.rank:
                raise InputError(f"letter {k} out of range for rank {self.rank}")
            out = self.mul(out, (k,))
        return out

    def element_to_json(self, x):
        if self.rank <= 26:
            return "".join(_letter(k) for k in x)
        return list(x)

    def to_spec(self):
        return {"kind": "free", "rank": self.rank}

    def word_length_formula(self, generators, x):
        std = {(k,) for k in range(1, self.rank + 1)} | {(-k,) for k in range(1, self.rank + 1)}
        if set(generators) == std:
            return len(x)
        return None

    def is_abelian(self):
        return self.rank == 1


@dataclass(frozen=True)
class ProductGroup(GroupModel):
    left: GroupModel
    right: GroupModel
    kind = "product"

    @property
    def identity(self):
        return (self.left.identity, self.right.identity)

    def mul(self, a, b):
        return (self.left.mul(a[0], b[0]), self.right.mul(a[1], b[1]))

    def inv(self, a):
        return (self.left.inv(a[0]), self.right.inv(a[1]))

    @property
    def order(self):
        lo, ro = self.left.order, self.right.order
        if lo is None or ro is None:
            return None
        return lo * ro

    def elements(self):
        if not self.is_finite:
            raise InfiniteGroup(f"{self!r} is infinite")
        return iter(itertools.product(list(self.left.elements()), list(self.right.elements())))

    def hom_generators(self):
        le, re_ = self.left.identity, self.right.identity
        return tuple((g, re_) for g in self.left.hom_generators()) + tuple(
            (le, g) for g in self.right.hom_generators()
        )

    def standard_generators(self):
        le, re_ = self.left.identity, self.right.identity
        return tuple((g, re_) for g in self.left.standard_generators()) + tuple(
            (le, g) for g in self.right.standard_generators()
        )

    def canonical(self, x):
        try:
            a, b = x
        except (TypeError, ValueError) as exc:
            raise InputError(f"product element must be a pair, got {x!r}") from exc
        return (self.left.canonical(a), self.right.canonical(b))

    def element_from_json(self, data):
        try:
            a, b = data
        except (TypeError, ValueError) as exc:
            raise InputError(f"product element must be a pair, got {data!r}") from exc
        return (self.left.element_from_json(a), self.right.element_from_json(b))

    def element_to_json(self, x):
        return [self.left.element_to_json(x[0]), self.right.element_to_json(x[1])]

    def to_spec(self):
        return {"kind": "product", "left": self.left.to_spec(), "right": self.right.to_spec()}

    def is_abelian(self):
        la, ra = self.left.is_abelian(), self.right.is_abelian()
        if la is None or ra is None:
            return None
        return la and ra


@dataclass(frozen=True, eq=True)
class FiniteTableGroup(GroupModel):
    labels: tuple
    table: tuple  # table[i][j] = index of labels[i] * labels[j]
    inverse: tuple
    identity_index: int
    kind = "finite_table"

    @property
    def identity(self):
        return self.identity_index

    def mul(self, a, b):
        return self.table[a][b]

    def inv(self, a):
        return self.inverse[a]

    @property
    def order(self):
        return len(self.labels)

    def elements(self):
        return iter(range(len(self.labels)))

    @cached_property
    def _generating_set(self) -> tuple:
        gens: list[int] = []
        closure = {self.identity_index}
        for x in range(len(self.labels)):
            if x in closure:
                continue
            gens.append(x)
            closure = _subgroup_closure(self, gens)
        return tuple(gens)

    def hom_generators(self):
        return self._generating_set

    def canonical(self, x):
        if isinstance(x, str):
            try:
                return self.labels.index(x)
            except ValueError as exc:
                raise InputError(f"unknown element label {x!r}") from exc
        if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
            if 0 <= int(x) < len(self.labels):
                return int(x)
        raise InputError(f"invalid finite-table element {x!r}")

    def element_to_json(self, x):
        return self.labels[x]

    def label(self, x) -> str:
        return self.labels[x]

    def to_spec(self):
        return {
            "kind": "finite_table",
            "labels": list(self.labels),
            "table": [list(row) for row in self.table],
            "identity": self.labels[self.identity_index],
        }

    def is_abelian(self):
        n = len(self.labels)
        return all(self.table[a][b] == self.table[b][a] for a in range(n) for b in range(n))


def _subgroup_closure(group: GroupModel, gens: Iterable) -> set:
    """Subgroup generated by ``gens`` inside a finite group."""
    gens = list(gens)
    seen = {group.identity}
    frontier = [group.identity]
    while frontier:
        nxt = []
        for x in frontier:
            for s in gens:
                y = group.mul(x, s)
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt
    return seen


def _check_table(labels, table, identity, inverse, seed: int = 0) -> FiniteTableGroup:
    n = len(labels)
    if n == 0:
        raise InputError("finite table group needs at least one element")
    if len(set(labels)) != n:
        raise InputError("element labels must be distinct")
    if len(table) != n or any(len(row) != n for row in table):
        raise InputError("multiplication table must be square with one row per label")
    rows = []
    for row in table:
        out = []
        for v in row:
            if isinstance(v, str):
                if v not in labels:
                    raise InputError(f"unknown label {v!r} in table")
                v = labels.index(v)
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or not 0 <= v < n:
                raise InputError(f"table entry {v!r} is not a valid element index")
            out.append(int(v))
        rows.append(tuple(out))
    if identity is None:
        candidates = [
            e for e in range(n) if all(rows[e][x] == x and rows[x][e] == x for x in range(n))
        ]
        if not candidates:
            raise BadIdentity("table has no two-sided identity")
        e = candidates[0]
    else:
        if isinstance(identity, str):
            if identity not in labels:
                raise BadIdentity(f"identity label {identity!r} unknown")
            identity = labels.index(identity)
        e = int(identity)
        if not 0 <= e < n or any(rows[e][x] != x or rows[x][e] != x for x in range(n)):
            raise BadIdentity(f"element {labels[e] if 0 <= e < n else e!r} is not a two-sided identity")
    if inverse is None:
        inv = []
        for x in range(n):
            cands = [y for y in range(n) if rows[x][y] == e and rows[y][x] == e]
            if not cands:
                raise MissingInverse(labels[x])
            inv.append(cands[0])
    else:
        inv = []
        for x, y in enumerate(inverse):
            if isinstance(y, str):
                y = labels.index(y) if y in labels else -1
            if not 0 <= y < n or rows[x][y] != e or rows[y][x] != e:
                raise MissingInverse(labels[x])
            inv.append(int(y))
    if n <= FULL_ASSOCIATIVITY_ORDER:
        triples = itertools.product(range(n), repeat=3)
    else:
        rng = random.Random(seed)
        triples = (
            (rng.randrange(n), rng.randrange(n), rng.randrange(n))
            for _ in range(ASSOCIATIVITY_SAMPLES)
        )
    for a, b, c in triples:
        if rows[rows[a][b]][c] != rows[a][rows[b][c]]:
            raise NonAssociative((labels[a], labels[b], labels[c]))
    return FiniteTableGroup(tuple(labels), tuple(rows), tuple(inv), e)


def finite_table_group(labels, table, identity=None, inverse=None) -> FiniteTableGroup:
    """Build a validated finite group from a multiplication table."""
    return _check_table(list(labels), table, identity, inverse)


def symmetric_group(n: int) -> FiniteTableGroup:
    """S_n as a table group; labels are one-line notations, composition (p*q)(i) = p(q(i))."""
    if n < 1 or n > 6:
        raise InputError("symmetric group supported for 1 <= n <= 6")
    perms = list(itertools.permutations(range(n)))
    index = {p: i for i, p in enumerate(perms)}
    table = [[index[tuple(p[q[i]] for i in range(n))] for q in perms] for p in perms]
    labels = ["".join(str(i) for i in p) for p in perms]
    return finite_table_group(labels, table)


def build_group(spec: dict) -> GroupModel:
    """Construct a group from a JSON-style description with a ``kind`` field."""
    if not isinstance(spec, dict) or "kind" not in spec:
        raise InputError("group spec must be an object with a 'kind' field")
    kind = spec["kind"]
    allowed = {
        "cyclic": {"n"},
        "free_abelian": {"rank"},
        "free": {"rank"},
        "product": {"left", "right"},
        "finite_table": {"labels", "table", "identity", "inverse"},
        "symmetric": {"n"},
    }
    if kind not in allowed:
        raise InputError(f"unknown group kind {kind!r}")
    extra = set(spec) - allowed[kind] - {"kind"}
    if extra:
        raise InputError(f"unknown fields for group kind {kind!r}: {sorted(extra)}")
    try:
        if kind == "cyclic":
            return CyclicGroup(spec["n"])
        if kind == "free_abelian":
            return FreeAbelianGroup(spec["rank"])
        if kind == "free":
            return FreeGroup(spec["rank"])
        if kind == "product":
            return ProductGroup(build_group(spec["left"]), build_group(spec["right"]))
        if kind == "symmetric":
            return symmetric_group(spec["n"])
        return finite_table_group(
            spec["labels"], spec["table"], spec.get("identity"), spec.get("inverse")
        )
    except KeyError as exc:
        raise InputError(f"group kind {kind!r} is missing field {exc.args[0]!r}") from exc


def symmetrize(group: GroupModel, generators: Sequence) -> tuple:
    """Canonicalize, drop duplicates and the identity, then append missing inverses."""
    out: list = []
    for g in generators:
        g = group.canonical(g)
        if g != group.identity and g not in out:
            out.append(g)
    for g in list(out):
        gi = group.inv(g)
        if gi not in out:
            out.append(gi)
    return tuple(out)


class BallIndex:
    """Word-metric ball enumerated breadth-first, identity first.

    Children are expanded in generator-list order (right multiplication by the
    generators), which fixes the basis ordering used by every matrix.
    """

    def __init__(self, group, generators, radius, elements, lengths, complete):
        self.group = group
        self.generators = generators
        self.radius = radius
        self.elements = elements
        self.lengths = np.asarray(lengths, dtype=np.int64)
        self.positions = {x: i for i, x in enumerate(elements)}
        self.complete = complete
        self._outside: dict = {}

    def __len__(self):
        return len(self.elements)

    def __contains__(self, x):
        return x in self.positions

    def __iter__(self):
        return iter(self.elements)

    def __repr__(self):
        return f"BallIndex({self.group!r}, radius={self.radius}, size={len(self)})"

    def index(self, x) -> int | None:
        return self.positions.get(x)

    def word_length(self, x) -> int:
        """Word length of ``x``; extends the search beyond the ball if needed."""
        i = self.positions.get(x)
        if i is not None:
            return int(self.lengths[i])
        if x in self._outside:
            return self._outside[x]
        formula = self.group.word_length_formula(self.generators, x)
        if formula is None:
            formula = _bfs_word_length(self.group, self.generators, x, max_ball_elements())
        self._outside[x] = formula
        return formula

    def sub_ball(self, radius: int) -> "BallIndex":
        """The ball of smaller radius, an ordered prefix of this one."""
        if radius >= self.radius:
            return self
        count = int(np.searchsorted(self.lengths, radius, side="right"))
        return BallIndex(
            self.group,
            self.generators,
            radius,
            self.elements[:count],
            self.lengths[:count],
            False,
        )

    def extend(self, radius: int) -> "BallIndex":
        return enumerate_ball(self.group, self.generators, radius)

    @cached_property
    def inverse_index(self) -> np.ndarray:
        inv = np.empty(len(self), dtype=np.int64)
        for i, x in enumerate(self.elements):
            j = self.positions.get(self.group.inv(x))
            if j is None:
                raise InputError("ball is not closed under inversion")
            inv[i] = j
        return inv

    @cached_property
    def mul_table(self) -> np.ndarray:
        """``mul_table[i, j]`` is the index of ``elements[i] * elements[j]`` or -1."""
        n = len(self)
        if n > 4096:
            raise RadiusOverflow(4096, self.radius)
        table = np.full((n, n), -1, dtype=np.int64)
        mul = self.group.mul
        pos = self.positions
        elems = self.elements
        for i, x in enumerate(elems):
            row = table[i]
            for j, y in enumerate(elems):
                k = pos.get(mul(x, y))
                if k is not None:
                    row[j] = k
        return table

    def safe_core(self, margin: int) -> np.ndarray:
        """Indices of basis elements with word length at most ``radius - margin``."""
        return np.nonzero(self.lengths <= self.radius - margin)[0]

    def to_summary(self) -> dict:
        return {
            "radius": self.radius,
            "size": len(self),
            "complete": self.complete,
            "generators": [self.group.element_to_json(g) for g in self.generators],
            "elements": [self.group.element_to_json(x) for x in self.elements],
            "word_length": [int(v) for v in self.lengths],
        }


def _bfs_word_length(group, generators, x, cap) -> int:
    seen = {group.identity}
    frontier = [group.identity]
    r = 0
    if x == group.identity:
        return 0
    while frontier:
        r += 1
        nxt = []
        for y in frontier:
            for s in generators:
                z = group.mul(y, s)
                if z in seen:
                    continue
                if z == x:
                    return r
                seen.add(z)
                nxt.append(z)
        if len(seen) > cap:
            raise RadiusOverflow(cap, r)
        frontier = nxt
    raise InputError(f"element {x!r} is not generated by {generators!r}")


def enumerate_ball(group: GroupModel, generators: Sequence | None, radius: int, cap: int | None = None) -> BallIndex:
    """Breadth-first enumeration of all elements at word distance <= ``radius``."""
    if generators is None:
        generators = group.standard_generators()
    gens = symmetrize(group, generators)
    if not gens:
        if list(generators) and group.order == 1:
            gens = ()
        else:
            raise EmptyGeneratorSet("generating set is empty")
    if not isinstance(radius, (int, np.integer)) or radius < 0:
        raise InputError(f"radius must be a nonnegative integer, got {radius!r}")
    if cap is None:
        cap = max_ball_elements()
    e = group.identity
    elements = [e]
    lengths = [0]
    seen = {e}
    frontier = [e]
    for r in range(1, radius + 1):
        nxt = []
        for x in frontier:
            for s in gens:
                y = group.mul(x, s)
                if y not in seen:
                    seen.add(y)
                    elements.append(y)
                    lengths.append(r)
                    nxt.append(y)
                    if len(elements) > cap:
                        raise RadiusOverflow(cap, radius)
        if not nxt:
            break
        frontier = nxt
    complete = group.is_finite and len(elements) == group.order
    return BallIndex(group, gens, int(radius), tuple(elements), lengths, complete)


def full_ball(group: GroupModel, generators: Sequence | None = None) -> BallIndex:
    """The whole finite group as a ball (radius = diameter)."""
    if not group.is_finite:
        raise InfiniteGroup("full_ball needs a finite group")
    return enumerate_ball(group, generators, group.order)


# homomorphisms


@dataclass(frozen=True, eq=False)
class GroupHom:
    source: GroupModel
    target: GroupModel
    images: tuple  # aligned with source.hom_generators()
    table: dict | None = field(default=None, repr=False)  # full element map, finite sources

    def __call__(self, x):
        if self.table is not None:
            return self.table[x]
        return _evaluate(self.source, self.target, self.images, x)

    def __eq__(self, other):
        if not isinstance(other, GroupHom):
            return NotImplemented
        return (
            self.source == other.source
            and self.target == other.target
            and self.images == other.images
        )

    def __hash__(self):
        return hash((self.source, self.target, self.images))

    def element_map(self) -> dict:
        if not self.source.is_finite:
            raise InfiniteGroup("element map needs a finite source")
        if self.table is not None:
            return dict(self.table)
        return {x: self(x) for x in self.source.elements()}

    def to_spec(self) -> dict:
        return {"images": [self.target.element_to_json(y) for y in self.images]}


def _evaluate(source, target, images, x):
    if isinstance(source, CyclicGroup):
        return target.power(images[0], x)
    if isinstance(source, FreeAbelianGroup):
        out = target.identity
        for img, k in zip(images, x):
            if k:
                out = target.mul(out, target.power(img, k))
        return out
    if isinstance(source, FreeGroup):
        out = target.identity
        for k in x:
            img = images[abs(k) - 1]
            out = target.mul(out, img if k > 0 else target.inv(img))
        return out
    if isinstance(source, ProductGroup):
        nl = len(source.left.hom_generators())
        a = _evaluate(source.left, target, images[:nl], x[0])
        b = _evaluate(source.right, target, images[nl:], x[1])
        return target.mul(a, b)
    raise InputError(f"cannot evaluate homomorphism out of {source!r} from generator images")


def _table_from_generators(source: FiniteTableGroup, target, images) -> dict:
    gens = source.hom_generators()
    table = {source.identity: target.identity}
    frontier = [source.identity]
    while frontier:
        nxt = []
        for x in frontier:
            for s, img in zip(gens, images):
                y = source.mul(x, s)
                val = target.mul(table[x], img)
                if y in table:
                    if table[y] != val:
                        raise NotAHomomorphism((source.labels[x], source.labels[s]))
                else:
                    table[y] = val
                    nxt.append(y)
        frontier = nxt
    return table


def _validate_relations(source, target, images):
    """Check the defining relations of built-in kinds on the generator images."""
    if isinstance(source, CyclicGroup):
        if target.power(images[0], source.n) != target.identity:
            raise OrderViolation(target.element_to_json(images[0]), source.n)
    elif isinstance(source, FreeAbelianGroup):
        for i, j in itertools.combinations(range(len(images)), 2):
            a, b = images[i], images[j]
            if target.mul(a, b) != target.mul(b, a):
                gens = source.hom_generators()
                raise NotAHomomorphism((gens[i], gens[j]))
    elif isinstance(source, ProductGroup):
        nl = len(source.left.hom_generators())
        _validate_relations(source.left, target, images[:nl])
        _validate_relations(source.right, target, images[nl:])
        for a in images[:nl]:
            for b in images[nl:]:
                if target.mul(a, b) != target.mul(b, a):
                    raise NotAHomomorphism((a, b))


def make_hom(source: GroupModel, target: GroupModel, images: Sequence, check: bool = True) -> GroupHom:
    """Homomorphism determined by the images of ``source.hom_generators()``."""
    images = tuple(target.canonical(y) for y in images)
    gens = source.hom_generators()
    if len(images) != len(gens):
        raise InputError(f"expected {len(gens)} generator images, got {len(images)}")
    table = None
    if isinstance(source, FiniteTableGroup):
        table = _table_from_generators(source, target, images)
    elif check:
        _validate_relations(source, target, images)
    hom = GroupHom(source, target, images, table)
    if check and source.is_finite:
        _check_exhaustive(hom)
    if table is None and source.is_finite and source.order <= 4096:
        hom = GroupHom(source, target, images, {x: hom(x) for x in source.elements()})
    return hom


def _check_exhaustive(hom: GroupHom):
    src, dst = hom.source, hom.target
    elems = list(src.elements())
    values = {x: hom(x) for x in elems}
    if values[src.identity] != dst.identity:
        raise NotAHomomorphism((src.identity, src.identity))
    if len(elems) <= 1024:
        pairs = itertools.product(elems, repeat=2)
    else:
        rng = random.Random(0)
        pairs = ((rng.choice(elems), rng.choice(elems)) for _ in range(10_000))
    for a, b in pairs:
        if values[src.mul(a, b)] != dst.mul(values[a], values[b]):
            raise NotAHomomorphism((src.element_to_json(a), src.element_to_json(b)))


def hom_from_map(source: GroupModel, target: GroupModel, mapping) -> GroupHom:
    """Homomorphism from a full element map (finite sources only)."""
    if not source.is_finite:
        raise InfiniteGroup("a full element map needs a finite source")
    elems = list(source.elements())
    if isinstance(mapping, dict):
        table = {
            source.element_from_json(k) if not isinstance(source, FiniteTableGroup) or isinstance(k, str)
            else source.canonical(k): target.element_from_json(v)
            for k, v in mapping.items()
        }
    else:
        mapping = list(mapping)
        if len(mapping) != len(elems):
            raise InputError("element map must list one image per source element")
        table = {x: target.element_from_json(v) for x, v in zip(elems, mapping)}
    if set(table) != set(elems):
        raise InputError("element map must cover every source element")
    images = tuple(table[g] for g in source.hom_generators())
    hom = GroupHom(source, target, images, table)
    _check_exhaustive(hom)
    return hom


def build_homomorphism(spec, src: GroupModel, dst: GroupModel) -> GroupHom:
    """Build a homomorphism from ``{"images": [...]}`` or ``{"map": ...}``."""
    if isinstance(spec, (list, tuple)):
        spec = {"images": list(spec)}
    if not isinstance(spec, dict):
        raise InputError("homomorphism spec must be an object")
    extra = set(spec) - {"kind", "images", "map", "source", "target"}
    if extra:
        raise InputError(f"unknown fields in homomorphism spec: {sorted(extra)}")
    if spec.get("kind", "hom") != "hom":
        raise InputError(f"unknown homomorphism kind {spec['kind']!r}")
    if "map" in spec:
        return hom_from_map(src, dst, spec["map"])
    if "images" not in spec:
        raise InputError("homomorphism spec needs 'images' or 'map'")
    images = [dst.element_from_json(y) for y in spec["images"]]
    return make_hom(src, dst, images)


def identity_hom(group: GroupModel) -> GroupHom:
    return make_hom(group, group, group.hom_generators(), check=False)


def compose_homs(psi: GroupHom, phi: GroupHom) -> GroupHom:
    """``psi o phi``."""
    if phi.target != psi.source:
        raise InputError("homomorphisms are not composable")
    images = tuple(psi(phi(g)) for g in phi.source.hom_generators())
    return make_hom(phi.source, psi.target, images, check=False)


def conjugation_hom(group: GroupModel, g) -> GroupHom:
    """Inner automorphism ``h -> g h g^-1``."""
    gi = group.inv(g)
    images = tuple(group.mul(group.mul(g, s), gi) for s in group.hom_generators())
    return make_hom(group, group, images, check=False)


def image_subgroup(hom: GroupHom) -> set:
    """The image of a homomorphism into a finite target."""
    if not hom.target.is_finite:
        raise InfiniteGroup("image enumeration needs a finite target")
    return _subgroup_closure(hom.target, hom.images)


@dataclass(frozen=True)
class HomClassification:
    mono: bool
    epi: bool
    kernel: frozenset | None
    mono_exact: bool
    epi_exact: bool

    @property
    def ball_limited(self) -> bool:
        return not (self.mono_exact and self.epi_exact)


def _rational_rank(rows: list[list[int]]) -> int:
    m = [[Fraction(v) for v in row] for row in rows]
    rank = 0
    ncols = len(m[0]) if m else 0
    for c in range(ncols):
        pivot = next((r for r in range(rank, len(m)) if m[r][c] != 0), None)
        if pivot is None:
            continue
        m[rank], m[pivot] = m[pivot], m[rank]
        for r in range(len(m)):
            if r != rank and m[r][c] != 0:
                f = m[r][c] / m[rank][c]
                m[r] = [a - f * b for a, b in zip(m[r], m[rank])]
        rank += 1
    return rank


def _det(mat: list[list[int]]) -> int:
    m = [[Fraction(v) for v in row] for row in mat]
    n = len(m)
    det = Fraction(1)
    for c in range(n):
        pivot = next((r for r in range(c, n) if m[r][c] != 0), None)
        if pivot is None:
            return 0
        if pivot != c:
            m[c], m[pivot] = m[pivot], m[c]
            det = -det
        det *= m[c][c]
        for r in range(c + 1, n):
            f = m[r][c] / m[c][c]
            m[r] = [a - f * b for a, b in zip(m[r], m[c])]
    return int(det)


def _lattice_is_full(vectors: list[tuple], dim: int) -> bool:
    """Whether integer ``vectors`` generate all of Z^dim."""
    if len(vectors) < dim:
        return False
    g = 0
    for rows in itertools.combinations(vectors, dim):
        g = math.gcd(g, abs(_det([list(r) for r in rows])))
        if g == 1:
            return True
    return False


def classify_hom(hom: GroupHom, ball_radius: int = 3) -> HomClassification:
    """Mono/epi flags plus kernel; exact when the kind allows, else ball-limited."""
    src, dst = hom.source, hom.target
    kernel = None
    if src.is_finite:
        kernel = frozenset(x for x in src.elements() if hom(x) == dst.identity)
        mono, mono_exact = len(kernel) == 1, True
    elif dst.is_finite:
        mono, mono_exact = False, True
    elif isinstance(src, FreeAbelianGroup) and isinstance(dst, FreeAbelianGroup):
        mono, mono_exact = _rational_rank([list(v) for v in hom.images]) == src.rank, True
    else:
        ball = enumerate_ball(src, None, ball_radius)
        kernel = frozenset(x for x in ball if hom(x) == dst.identity)
        mono, mono_exact = len(kernel) == 1, False

    if dst.is_finite:
        epi, epi_exact = len(image_subgroup(hom)) == dst.order, True
    elif isinstance(dst, FreeAbelianGroup) and isinstance(src, (FreeAbelianGroup, FreeGroup)):
        epi, epi_exact = _lattice_is_full(list(hom.images), dst.rank), True
    else:
        ball = enumerate_ball(src, None, ball_radius)
        reached = {hom(x) for x in ball}
        epi = all(g in reached for g in dst.hom_generators())
        epi_exact = False
    return HomClassification(mono, epi, kernel, mono_exact, epi_exact)


def enumerate_splittings(epi: GroupHom) -> list[GroupHom]:
    """All homomorphisms ``psi`` with ``epi o psi = id``, by exhaustive search."""
    src, dst = epi.source, epi.target
    if not (src.is_finite and dst.is_finite):
        raise InfiniteGroup("splitting enumeration needs finite groups")
    if not classify_hom(epi).epi:
        raise NotEpimorphism("homomorphism is not surjective")
    gens = dst.hom_generators()
    src_elems = list(src.elements())
    # only preimages of each generator can serve as its image
    fibers = [[x for x in src_elems if epi(x) == g] for g in gens]
    dst_elems = list(dst.elements())
    found = []
    for images in itertools.product(*fibers):
        try:
            psi = make_hom(dst, src, images)
        except (NotAHomomorphism, OrderViolation):
            continue
        if all(epi(psi(y)) == y for y in dst_elems):
            found.append(psi)
    return found
