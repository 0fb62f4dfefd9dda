"""Circle-equivariant complexes built from a complex with a rotation operator.

A :class:`CircleComplex` is a chain complex ``(C, D)`` with an operator ``J``
of degree +1 satisfying ``JD = -DJ`` and ``JJ = 0``.  Tensoring with a
polynomial variable ``u`` of degree -2 gives the twisted differential

    d_J(g u^k) = (D g) u^k + (J g) u^(k+1)

on three variants: ``plus`` (k >= 0), ``laurent`` (all k) and ``minus``
(k <= 0, with terms landing at positive powers dropped).  Only a finite
window of degrees is ever built; it is padded by two on each side so that
the homology reported inside the window is exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .complex import (
    ChainMap,
    ComplexError,
    GradedFreeComplex,
    HomologyGroup,
    JointReport,
    ShortExactSequence,
    homology,
    long_exact_sequence_check,
    verify_complex,
)
from .matrix import IntegerMatrix

VARIANTS = ("plus", "laurent", "minus")
PAD = 2


@dataclass
class CircleComplex:
    base: GradedFreeComplex
    rotation: Mapping[int, IntegerMatrix] = field(default_factory=dict)

    def __post_init__(self):
        rot = {}
        for k, mat in self.rotation.items():
            if mat.shape != (self.base.rank(k + 1), self.base.rank(k)):
                raise ComplexError(f"rotation in degree {k} has shape {mat.shape}, "
                                   f"expected {(self.base.rank(k + 1), self.base.rank(k))}")
            if not mat.is_zero():
                rot[int(k)] = mat
        self.rotation = rot

    def J(self, k: int) -> IntegerMatrix:
        mat = self.rotation.get(k)
        if mat is None:
            return IntegerMatrix.zeros(self.base.rank(k + 1), self.base.rank(k))
        return mat


def verify_circle_complex(x: CircleComplex) -> list[str]:
    """Violations of ``D^2 = 0``, ``JD + DJ = 0`` and ``J^2 = 0``; empty means pass."""
    out = [f"D^2 != 0 in degree {k}" for k in verify_complex(x.base)]
    b = x.base
    for k in b.degrees:
        anti = b.boundary(k + 1) @ x.J(k) + x.J(k - 1) @ b.boundary(k)
        if not anti.is_zero():
            out.append(f"JD + DJ != 0 on degree {k}")
        if not (x.J(k + 1) @ x.J(k)).is_zero():
            out.append(f"J^2 != 0 on degree {k}")
    return out


def _power_allowed(variant: str, k: int) -> bool:
    if variant == "plus":
        return k >= 0
    if variant == "minus":
        return k <= 0
    return True


@dataclass
class EquivariantComplex:
    """A built variant on degrees ``[window[0] - 2, window[1] + 2]``."""

    variant: str
    window: tuple[int, int]
    complex: GradedFreeComplex
    # generator (base_degree, base_index, power) for each position in each degree
    index: dict[int, list[tuple[int, int, int]]]

    def generator_count(self, d: int) -> int:
        return len(self.index.get(d, []))


def _label(x: CircleComplex, e: int, a: int, k: int) -> str:
    return f"{x.base.labels(e)[a]}u{k}"


def _build(x: CircleComplex, variant: str, lo: int, hi: int) -> tuple[GradedFreeComplex, dict]:
    b = x.base
    index: dict[int, list[tuple[int, int, int]]] = {}
    for d in range(lo, hi + 1):
        gens = []
        for e in b.degrees:
            if (e - d) % 2:
                continue
            k = (e - d) // 2
            if _power_allowed(variant, k):
                gens += [(e, a, k) for a in range(b.rank(e))]
        index[d] = gens
    pos = {d: {g: i for i, g in enumerate(v)} for d, v in index.items()}
    bnds = {}
    for d in range(lo + 1, hi + 1):
        rows = [[0] * len(index[d]) for _ in index[d - 1]]
        for j, (e, a, k) in enumerate(index[d]):
            if e - 1 >= b.lo:
                for a2, c in enumerate(b.boundary(e).column(a)):
                    if c:
                        rows[pos[d - 1][(e - 1, a2, k)]][j] += c
            if _power_allowed(variant, k + 1):
                for a2, c in enumerate(x.J(e).column(a)):
                    if c:
                        rows[pos[d - 1][(e + 1, a2, k + 1)]][j] += c
        bnds[d] = IntegerMatrix.from_rows(rows, len(index[d]))
    gens = {d: [_label(x, e, a, k) for e, a, k in v] for d, v in index.items()}
    return GradedFreeComplex(gens, bnds), index


def _checked(x: CircleComplex, variant: str, window: tuple[int, int]) -> tuple[int, int]:
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    lo, hi = window
    if lo > hi:
        raise ValueError(f"empty window {window}")
    problems = verify_circle_complex(x)
    if problems:
        raise ComplexError("; ".join(problems))
    return lo, hi


def build_variant(x: CircleComplex, variant: str, window: tuple[int, int]) -> EquivariantComplex:
    lo, hi = _checked(x, variant, window)
    cx, index = _build(x, variant, lo - PAD, hi + PAD)
    return EquivariantComplex(variant, (lo, hi), cx, index)


def expected_generator_count(x: CircleComplex, variant: str, d: int) -> int:
    """Closed-form rank of the degree-d chain group: sum of rank C_e over admissible powers."""
    total = 0
    for e in x.base.degrees:
        if (e - d) % 2 == 0 and _power_allowed(variant, (e - d) // 2):
            total += x.base.rank(e)
    return total


def equivariant_homology(x: CircleComplex, variant: str, window: tuple[int, int]) -> list[HomologyGroup]:
    """Homology of the chosen variant in every degree of ``window``."""
    ec = build_variant(x, variant, window)
    lo, hi = ec.window
    return [h for h in homology(ec.complex) if lo <= h.degree <= hi]


def _shifted(cx: GradedFreeComplex, shift: int) -> GradedFreeComplex:
    """Reindex so that new degree d holds old degree d + shift."""
    gens = {d - shift: v for d, v in cx.generators.items()}
    bnds = {d - shift: m for d, m in cx.boundaries.items()}
    return GradedFreeComplex(gens, bnds)


def _restrict(cx: GradedFreeComplex, lo: int, hi: int) -> GradedFreeComplex:
    gens = {d: cx.labels(d) for d in range(lo, hi + 1)}
    bnds = {d: cx.boundary(d) for d in range(lo + 1, hi + 1)}
    return GradedFreeComplex(gens, bnds)


def _u_map(src_index, dst_index, lo, hi, src, dst) -> ChainMap:
    mats = {}
    for d in range(lo, hi + 1):
        pos = {g: i for i, g in enumerate(dst_index[d])}
        rows = [[0] * len(src_index[d + 2]) for _ in dst_index[d]]
        for j, (e, a, k) in enumerate(src_index[d + 2]):
            rows[pos[(e, a, k + 1)]][j] = 1
        mats[d] = IntegerMatrix.from_rows(rows, len(src_index[d + 2]))
    return ChainMap(src, dst, mats)


def gysin_sequence(x: CircleComplex, window: tuple[int, int]) -> ShortExactSequence:
    """``0 -> C+[shifted by 2] --u--> C+ -> C -> 0`` on the padded window."""
    lo, hi = _checked(x, "plus", window)
    lo, hi = lo - PAD, hi + PAD
    plus, index = _build(x, "plus", lo, hi + 2)
    a = _shifted(_restrict(plus, lo + 2, hi + 2), 2)
    b = _restrict(plus, lo, hi)
    c = _restrict(x.base, lo, hi)
    i = _u_map(index, index, lo, hi, a, b)
    pmats = {}
    for d in range(lo, hi + 1):
        rows = [[0] * len(index[d]) for _ in range(c.rank(d))]
        for j, (e, ai, k) in enumerate(index[d]):
            if k == 0:
                rows[ai][j] = 1
        pmats[d] = IntegerMatrix.from_rows(rows, len(index[d]))
    return ShortExactSequence(a, b, c, i, ChainMap(b, c, pmats))


def localization_sequence(x: CircleComplex, window: tuple[int, int]) -> ShortExactSequence:
    """``0 -> C+[shifted by 2] --u--> C_laurent -> C- -> 0`` on the padded window."""
    lo, hi = _checked(x, "laurent", window)
    lo, hi = lo - PAD, hi + PAD
    plus, pidx = _build(x, "plus", lo + 2, hi + 2)
    laurent, lidx = _build(x, "laurent", lo, hi)
    minus, midx = _build(x, "minus", lo, hi)
    a = _shifted(plus, 2)
    i = _u_map(pidx, lidx, lo, hi, a, laurent)
    pmats = {}
    for d in range(lo, hi + 1):
        pos = {g: n for n, g in enumerate(midx[d])}
        rows = [[0] * len(lidx[d]) for _ in midx[d]]
        for j, g in enumerate(lidx[d]):
            if g in pos:
                rows[pos[g]][j] = 1
        pmats[d] = IntegerMatrix.from_rows(rows, len(lidx[d]))
    return ShortExactSequence(a, laurent, minus, i, ChainMap(laurent, minus, pmats))


@dataclass
class SequenceReport:
    joints: list[JointReport]
    window: tuple[int, int]

    @property
    def exact(self) -> bool:
        return all(j.exact for j in self.joints)

    def failures(self) -> list[JointReport]:
        return [j for j in self.joints if not j.exact]


def gysin_check(x: CircleComplex, window: tuple[int, int]) -> SequenceReport:
    s = gysin_sequence(x, window)
    return SequenceReport(long_exact_sequence_check(s), window)


@dataclass
class LocalizationReport:
    sequence: SequenceReport
    laurent: list[HomologyGroup]
    stabilized_plus: dict[int, HomologyGroup]
    chain_groups_agree: bool

    @property
    def isomorphic(self) -> bool:
        return all(_same(h, self.stabilized_plus[h.degree]) for h in self.laurent)

    @property
    def ok(self) -> bool:
        return self.sequence.exact and self.isomorphic and self.chain_groups_agree


def _same(a: HomologyGroup, b: HomologyGroup) -> bool:
    return a.betti == b.betti and a.torsion == b.torsion


def localization_check(x: CircleComplex, window: tuple[int, int]) -> LocalizationReport:
    """Exactness of the plus/laurent/minus sequence and H_laurent = u^-1 H_plus.

    Multiplication by u identifies the plus and laurent chain groups in degrees
    <= 0, so H_plus is already stable in degrees <= -1; each laurent degree is
    compared with the plus degree of the same parity at -1 or -2.
    """
    seq = SequenceReport(long_exact_sequence_check(localization_sequence(x, window)), window)
    lo, hi = window
    laurent = equivariant_homology(x, "laurent", window)
    plus = {h.degree: h for h in equivariant_homology(x, "plus", (-2, -1))}
    stab = {d: plus[-1 if d % 2 else -2] for d in range(lo, hi + 1)}
    stab = {d: HomologyGroup(d, h.betti, h.torsion) for d, h in stab.items()}
    # chain groups of plus and laurent coincide in degrees <= 0
    low = min(lo, -2)
    cp = build_variant(x, "plus", (low, 0)).complex
    cl = build_variant(x, "laurent", (low, 0)).complex
    agree = all(cp.labels(d) == cl.labels(d) for d in range(low - PAD, 1))
    return LocalizationReport(seq, laurent, stab, agree)


# ---------------------------------------------------------------------------
# Fixtures


def point_circle_complex() -> CircleComplex:
    return CircleComplex(GradedFreeComplex({0: ["pt"]}))


def circle_rotation_complex() -> CircleComplex:
    """The rotating circle: p in degree 0, c in degree 1, D = 0, J(p) = c."""
    base = GradedFreeComplex({0: ["p"], 1: ["c"]})
    return CircleComplex(base, {0: IntegerMatrix.from_rows([[1]])})
