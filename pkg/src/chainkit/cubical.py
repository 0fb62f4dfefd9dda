"""Cubical chains with corners: faces, orientation, degeneracy, cutting and creasing.

Conventions
-----------
* ``d[a,b] = {b} - {a}`` and the Leibniz rule
  ``d(Q1 x Q2) = dQ1 x Q2 + (-1)^dim(Q1) Q1 x dQ2``, applied over the
  nondegenerate components in ambient order.
* Reparametrizing a cube by a coordinate permutation or reversal multiplies
  it by the orientation sign of that map; collapsing a coordinate makes the
  cube degenerate, which is zero.
* Cutting at ``x_axis = level``: ``plus`` is the part with ``x_axis >= level``,
  ``minus`` the rest, and ``slice`` is oriented as the boundary of ``plus``
  with reversed sign, so that ``d(plus) = (d c)^+ + slice`` and
  ``d(minus) = (d c)^- - slice``.
* Creasing adds a new ambient coordinate ``t`` in front.  ``K(c)`` satisfies
  ``dK(c) + K(dc) = lift(cut(c), 1) - lift(c, 0)`` where ``cut(c) = plus + minus``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterable, Mapping, Sequence, Union

from .complex import GradedFreeComplex
from .matrix import IntegerMatrix


class CutError(ValueError):
    """A cut level is not generic for the chain being cut."""


def dyadic(value) -> Fraction:
    """Parse an int, Fraction or string like ``"3/4"`` into a dyadic rational."""
    q = Fraction(value)
    den = q.denominator
    if den & (den - 1):
        raise ValueError(f"{value} is not a dyadic rational")
    return q


def _fmt(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True, order=True)
class ElementaryCube:
    """Product of intervals ``[a, b]`` (a < b) and points ``{a}``, dyadic endpoints."""

    components: tuple[tuple[Fraction, Fraction], ...]

    def __post_init__(self):
        comps = []
        for a, b in self.components:
            a, b = dyadic(a), dyadic(b)
            if b < a:
                raise ValueError(f"interval [{a}, {b}] is reversed")
            comps.append((a, b))
        object.__setattr__(self, "components", tuple(comps))

    @classmethod
    def from_spec(cls, *comps) -> "ElementaryCube":
        """``ElementaryCube.from_spec((0, 1), 2)`` is ``[0,1] x {2}``."""
        out = []
        for c in comps:
            if isinstance(c, (tuple, list)):
                out.append((c[0], c[1]))
            else:
                out.append((c, c))
        return cls(tuple(out))

    @classmethod
    def parse(cls, text: str) -> "ElementaryCube":
        comps = []
        for part in text.replace(" ", "").split("x"):
            if part.startswith("[") and part.endswith("]"):
                a, b = part[1:-1].split(",")
                comps.append((a, b))
            elif part.startswith("{") and part.endswith("}"):
                comps.append((part[1:-1], part[1:-1]))
            else:
                raise ValueError(f"cannot parse cube component {part!r}")
        return cls(tuple(comps))

    @property
    def ambient_dim(self) -> int:
        return len(self.components)

    @property
    def nondegenerate_axes(self) -> tuple[int, ...]:
        return tuple(i for i, (a, b) in enumerate(self.components) if a < b)

    @property
    def dim(self) -> int:
        return len(self.nondegenerate_axes)

    def replace(self, axis: int, comp: tuple[Fraction, Fraction]) -> "ElementaryCube":
        comps = list(self.components)
        comps[axis] = comp
        return ElementaryCube(tuple(comps))

    def boundary(self) -> list[tuple["ElementaryCube", int]]:
        out = []
        for m, j in enumerate(self.nondegenerate_axes):
            a, b = self.components[j]
            sign = -1 if m % 2 else 1
            out.append((self.replace(j, (b, b)), sign))
            out.append((self.replace(j, (a, a)), -sign))
        return out

    def lift(self, t) -> "ElementaryCube":
        t = dyadic(t)
        return ElementaryCube(((t, t),) + self.components)

    def sort_key(self):
        return (0, self.dim, self.components)

    def __str__(self) -> str:
        return "x".join(f"[{_fmt(a)},{_fmt(b)}]" if a < b else "{" + _fmt(a) + "}"
                        for a, b in self.components)


@dataclass(frozen=True)
class LabeledCube:
    """An affine map from ``[0,1]^k`` onto ``target``.

    ``assignment[i]`` describes formal coordinate ``i``: ``(axis, +1)`` maps it
    order-preservingly onto target component ``axis``, ``(axis, -1)``
    order-reversingly, and ``(None, 0)`` collapses it.
    """

    target: ElementaryCube
    assignment: tuple[tuple[int | None, int], ...]

    def __post_init__(self):
        hit = []
        for axis, orient in self.assignment:
            if axis is None:
                if orient != 0:
                    raise ValueError("collapsed coordinates carry orientation 0")
                continue
            if orient not in (1, -1):
                raise ValueError("orientation must be +1 or -1")
            hit.append(axis)
        if sorted(hit) != list(self.target.nondegenerate_axes):
            raise ValueError("non-collapsed coordinates must cover each nondegenerate component exactly once")

    @classmethod
    def standard(cls, cube: ElementaryCube) -> "LabeledCube":
        return cls(cube, tuple((j, 1) for j in cube.nondegenerate_axes))

    @property
    def formal_dim(self) -> int:
        return len(self.assignment)

    @property
    def dim(self) -> int:
        return self.formal_dim

    @property
    def is_degenerate(self) -> bool:
        return any(axis is None for axis, _ in self.assignment)

    def canonical(self) -> tuple[int, ElementaryCube]:
        """``(sign, cube)`` with ``self == sign * cube``; sign 0 when degenerate."""
        if self.is_degenerate:
            return 0, self.target
        axes = [axis for axis, _ in self.assignment]
        sign = _permutation_sign(axes)
        for _, orient in self.assignment:
            sign *= orient
        return sign, self.target

    def sort_key(self):
        return (2, self.formal_dim, self.target.components,
                tuple((-1 if a is None else a, o) for a, o in self.assignment))

    def __str__(self) -> str:
        return f"{self.target}<{self.assignment}>"


def _permutation_sign(seq: Sequence[int]) -> int:
    seq = list(seq)
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


@dataclass(frozen=True)
class CreasedCell:
    """The prism ``[0,1] x base`` whose top face is broken along ``x_axis = level``.

    The new coordinate is ambient coordinate 0; ``axis`` indexes ``base``.
    Its boundary is ``{1} x (base+ + base-) - {0} x base - prism(d base)``.
    """

    base: ElementaryCube
    axis: int
    level: Fraction

    def __post_init__(self):
        object.__setattr__(self, "level", dyadic(self.level))
        a, b = self.base.components[self.axis]
        if not a < self.level < b:
            raise CutError("a creased cell needs the level strictly inside the base")

    @property
    def ambient_dim(self) -> int:
        return self.base.ambient_dim + 1

    @property
    def dim(self) -> int:
        return self.base.dim + 1

    def boundary(self) -> list[tuple["Cell", int]]:
        plus, minus = _split(self.base, self.axis, self.level)
        out = [(plus.lift(1), 1), (minus.lift(1), 1), (self.base.lift(0), -1)]
        for face, sign in self.base.boundary():
            out.append((prism(face, self.axis, self.level), -sign))
        return out

    def sort_key(self):
        return (1, self.dim, self.base.components, self.axis, self.level)

    def __str__(self) -> str:
        return f"crease({self.base};{self.axis}@{_fmt(self.level)})"


Cell = Union[ElementaryCube, CreasedCell]
Term = Union[ElementaryCube, CreasedCell, LabeledCube]


def _split(cube: ElementaryCube, axis: int, level: Fraction) -> tuple[ElementaryCube, ElementaryCube]:
    a, b = cube.components[axis]
    return cube.replace(axis, (level, b)), cube.replace(axis, (a, level))


def prism(cube: ElementaryCube, axis: int, level) -> Cell:
    """``[0,1] x cube``, creased when the cut passes through its interior."""
    level = dyadic(level)
    a, b = cube.components[axis]
    if a < level < b:
        return CreasedCell(cube, axis, level)
    return ElementaryCube((((Fraction(0), Fraction(1)),) + cube.components))


class CubicalChain:
    """Finite formal integer combination of cubes (or creased cells).

    Zero coefficients are never stored; terms are kept in canonical order.
    Raw chains may contain :class:`LabeledCube` terms; :func:`normalize_chain`
    rewrites those into elementary cubes.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[Term, int] | Iterable[tuple[Term, int]] = ()):
        acc: dict[Term, int] = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for cell, coef in items:
            if coef:
                acc[cell] = acc.get(cell, 0) + coef
        acc = {c: v for c, v in acc.items() if v}
        dims = {c.dim for c in acc}
        if len(dims) > 1:
            raise ValueError(f"chain mixes dimensions {sorted(dims)}")
        self._terms = dict(sorted(acc.items(), key=lambda kv: kv[0].sort_key()))

    @classmethod
    def of(cls, *cells: Term) -> "CubicalChain":
        return cls((c, 1) for c in cells)

    @property
    def terms(self) -> dict[Term, int]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    @property
    def dim(self) -> int | None:
        for c in self._terms:
            return c.dim
        return None

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __add__(self, other: "CubicalChain") -> "CubicalChain":
        return CubicalChain(list(self.items()) + list(other.items()))

    def __neg__(self) -> "CubicalChain":
        return CubicalChain((c, -v) for c, v in self.items())

    def __sub__(self, other: "CubicalChain") -> "CubicalChain":
        return self + (-other)

    def __rmul__(self, k: int) -> "CubicalChain":
        return CubicalChain((c, k * v) for c, v in self.items())

    def __eq__(self, other) -> bool:
        if not isinstance(other, CubicalChain):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash(tuple(self._terms.items()))

    def __repr__(self) -> str:
        if not self._terms:
            return "CubicalChain(0)"
        return "CubicalChain(" + " ".join(f"{v:+d}*{c}" for c, v in self.items()) + ")"


def normalize_chain(c: CubicalChain) -> CubicalChain:
    """Drop degenerate cubes and rewrite labeled cubes onto the canonical parametrization."""
    out = []
    for cell, coef in c.items():
        if isinstance(cell, LabeledCube):
            sign, cube = cell.canonical()
            if sign:
                out.append((cube, sign * coef))
        else:
            out.append((cell, coef))
    return CubicalChain(out)


def cube_boundary(c: CubicalChain) -> CubicalChain:
    c = normalize_chain(c)
    if c.dim == 0:
        raise ValueError("the boundary of a 0-dimensional chain is not defined here")
    out = []
    for cell, coef in c.items():
        out += [(face, coef * s) for face, s in cell.boundary()]
    return CubicalChain(out)


@dataclass(frozen=True)
class CutResult:
    plus: CubicalChain
    minus: CubicalChain
    slice: CubicalChain
    axis: int
    level: Fraction

    @property
    def pieces(self) -> CubicalChain:
        return self.plus + self.minus


def _check_generic(cube: ElementaryCube, axis: int, level: Fraction) -> None:
    if isinstance(cube, CreasedCell):
        raise CutError("creased cells cannot be cut")
    a, b = cube.components[axis]
    if level in (a, b):
        raise CutError(f"level {level} hits the component {{{a}}}" if a == b
                       else f"level {level} hits an endpoint of [{a}, {b}]")


def cut_chain(c: CubicalChain, axis: int, level) -> CutResult:
    """Split every cube of ``c`` along the hyperplane ``x_axis = level``."""
    level = dyadic(level)
    c = normalize_chain(c)
    plus, minus, sl = [], [], []
    for cube, coef in c.items():
        _check_generic(cube, axis, level)
        a, b = cube.components[axis]
        if b < level:
            minus.append((cube, coef))
        elif a > level:
            plus.append((cube, coef))
        else:
            hi, lo = _split(cube, axis, level)
            plus.append((hi, coef))
            minus.append((lo, coef))
            m = cube.nondegenerate_axes.index(axis)
            sign = 1 if m % 2 else -1
            sl.append((cube.replace(axis, (level, level)), sign * coef))
    return CutResult(CubicalChain(plus), CubicalChain(minus), CubicalChain(sl), axis, level)


def lift_chain(c: CubicalChain, t) -> CubicalChain:
    """Embed a chain into the slice ``{t} x R^N`` of one-higher ambient space."""
    return CubicalChain((cube.lift(t), v) for cube, v in normalize_chain(c).items())


def _crease(c: CubicalChain, axis: int, level: Fraction) -> CubicalChain:
    out = []
    for cube, coef in normalize_chain(c).items():
        _check_generic(cube, axis, level)
        out.append((prism(cube, axis, level), coef))
    return CubicalChain(out)


def crease_homotopy(c: CubicalChain, axis: int, level) -> CubicalChain:
    """Chain homotopy ``K`` between the cut and the identity (see module notes)."""
    level = dyadic(level)
    c = normalize_chain(c)
    if c.dim == 0:
        raise CutError("0-dimensional chains admit no generic cut")
    return _crease(c, axis, level)


def crease_identity_holds(c: CubicalChain, axis: int, level) -> bool:
    """Check ``dK(c) + K(dc) == lift(cut c, 1) - lift(c, 0)`` exactly."""
    level = dyadic(level)
    k = crease_homotopy(c, axis, level)
    lhs = cube_boundary(k)
    dc = cube_boundary(c)
    if dc:
        lhs = lhs + _crease(dc, axis, level)
    rhs = lift_chain(cut_chain(c, axis, level).pieces, 1) - lift_chain(c, 0)
    return lhs == rhs


def cut_identity_holds(c: CubicalChain, axis: int, level) -> bool:
    """Check ``d(plus) = (dc)^+ + slice`` and ``d(minus) = (dc)^- - slice`` exactly."""
    res = cut_chain(c, axis, level)
    dres = cut_chain(cube_boundary(c), axis, level)
    ok_plus = _bd(res.plus) == dres.plus + res.slice
    ok_minus = _bd(res.minus) == dres.minus - res.slice
    return ok_plus and ok_minus


def _bd(c: CubicalChain) -> CubicalChain:
    return cube_boundary(c) if c else CubicalChain()


# ---------------------------------------------------------------------------
# Complexes of cells


@dataclass
class CubicalComplex:
    """Chain complex of a face-closed set of cells plus the cell bookkeeping."""

    complex: GradedFreeComplex
    cells: dict[int, list[Cell]]
    added: frozenset

    def index(self, cell: Cell) -> int:
        return self._index[cell.dim][cell]

    def __post_init__(self):
        self._index = {k: {c: i for i, c in enumerate(v)} for k, v in self.cells.items()}

    def vector(self, chain: CubicalChain) -> list[int]:
        chain = normalize_chain(chain)
        k = chain.dim or 0
        vec = [0] * len(self.cells.get(k, []))
        for cell, coef in chain.items():
            vec[self.index(cell)] += coef
        return vec


def face_closure(cells: Iterable[Cell]) -> set[Cell]:
    seen = set()
    stack = list(cells)
    while stack:
        c = stack.pop()
        if c in seen:
            continue
        seen.add(c)
        if c.dim > 0:
            stack.extend(f for f, _ in c.boundary())
    return seen


def build_complex(cells: Iterable[Cell]) -> CubicalComplex:
    """Cellular chain complex of the face closure of ``cells``."""
    given = set(cells)
    if any(isinstance(c, LabeledCube) for c in given):
        raise TypeError("pass elementary cubes or creased cells, not labeled cubes")
    closed = face_closure(given)
    top = max((c.dim for c in closed), default=-1)
    by_dim = {k: sorted((c for c in closed if c.dim == k), key=lambda c: c.sort_key())
              for k in range(0, top + 1)}
    index = {k: {c: i for i, c in enumerate(v)} for k, v in by_dim.items()}
    bnds = {}
    for k in range(1, top + 1):
        rows = [[0] * len(by_dim[k]) for _ in by_dim[k - 1]]
        for j, cell in enumerate(by_dim[k]):
            for face, s in cell.boundary():
                rows[index[k - 1][face]][j] += s
        bnds[k] = IntegerMatrix.from_rows(rows, len(by_dim[k]))
    gens = {k: [str(c) for c in v] for k, v in by_dim.items()}
    cx = GradedFreeComplex(gens, bnds)
    return CubicalComplex(cx, by_dim, frozenset(closed - given))


def subdivide(cells: Iterable[ElementaryCube], axis: int, level) -> set[ElementaryCube]:
    """Globally cut a face-closed cube set along ``x_axis = level``."""
    level = dyadic(level)
    out = set()
    for cube in face_closure(cells):
        _check_generic(cube, axis, level)
        a, b = cube.components[axis]
        if a < level < b:
            hi, lo = _split(cube, axis, level)
            out |= {hi, lo, cube.replace(axis, (level, level))}
        else:
            out.add(cube)
    return face_closure(out)


def subdivision_map(before: CubicalComplex, after: CubicalComplex, axis: int, level) -> dict[int, IntegerMatrix]:
    """Chain map sending each cube to ``plus + minus`` of its cut."""
    level = dyadic(level)
    mats = {}
    for k, cells in before.cells.items():
        cols = []
        for cube in cells:
            pieces = cut_chain(CubicalChain.of(cube), axis, level).pieces
            cols.append(after.vector(pieces))
        mats[k] = IntegerMatrix.from_columns(cols, len(after.cells.get(k, [])))
    return mats


# ---------------------------------------------------------------------------
# Random fixtures


def random_cube(rng: random.Random, ambient: int, dim: int, span: int = 3) -> ElementaryCube:
    axes = set(rng.sample(range(ambient), dim))
    comps = []
    for i in range(ambient):
        a = rng.randint(0, span - 1)
        if i in axes:
            comps.append((a, a + rng.randint(1, 2)))
        else:
            comps.append((a, a))
    return ElementaryCube(tuple(comps))


def random_labeled_cube(rng: random.Random, ambient: int, formal_dim: int,
                        collapse_prob: float = 0.15) -> LabeledCube:
    collapsed = sum(1 for _ in range(formal_dim) if rng.random() < collapse_prob)
    cube = random_cube(rng, ambient, min(formal_dim - collapsed, ambient))
    axes = list(cube.nondegenerate_axes)
    slots = [(a, rng.choice((1, -1))) for a in axes] + [(None, 0)] * (formal_dim - len(axes))
    rng.shuffle(slots)
    return LabeledCube(cube, tuple(slots))


def random_chain(rng: random.Random, ambient: int, dim: int, terms: int = 3) -> CubicalChain:
    return CubicalChain((random_labeled_cube(rng, ambient, dim), rng.choice((-2, -1, 1, 1, 2)))
                        for _ in range(terms))


def random_cube_set(rng: random.Random, ambient: int, grid: int = 3, density: float = 0.35) -> set[ElementaryCube]:
    """Random face-closed union of unit cells in the integer grid ``[0, grid]^ambient``."""
    cells = []
    for dims in product((0, 1), repeat=ambient):
        for corner in product(range(grid), repeat=ambient):
            if rng.random() < density / (1 + sum(dims)):
                cells.append(ElementaryCube(tuple((c, c + d) for c, d in zip(corner, dims))))
    if not cells:
        cells.append(ElementaryCube(tuple((0, 0) for _ in range(ambient))))
    return face_closure(cells)


def random_generic_level(rng: random.Random, chain_or_cells, axis: int, depth: int = 4) -> Fraction:
    """A dyadic level avoiding every endpoint on ``axis``."""
    ends = set()
    items = chain_or_cells.items() if isinstance(chain_or_cells, CubicalChain) else ((c, 1) for c in chain_or_cells)
    for cell, _ in items:
        if isinstance(cell, LabeledCube):
            cell = cell.target
        ends |= set(cell.components[axis])
    lo = min(ends, default=Fraction(0))
    hi = max(ends, default=Fraction(1))
    while True:
        num = rng.randint(int(lo * 2 ** depth) - 1, int(hi * 2 ** depth) + 1)
        level = Fraction(2 * num + 1, 2 ** (depth + 1))
        if level not in ends:
            return level
