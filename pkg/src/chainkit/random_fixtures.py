"""Seeded random generators for matrices, complexes and circle complexes."""

from __future__ import annotations

import random

from .complex import GradedFreeComplex
from .equivariant import CircleComplex
from .matrix import IntegerMatrix


def random_matrix(rng: random.Random, rows: int, cols: int, bound: int = 9) -> IntegerMatrix:
    return IntegerMatrix(rows, cols, [rng.randint(-bound, bound) for _ in range(rows * cols)])


def random_unimodular(rng: random.Random, n: int, moves: int = 2) -> tuple[IntegerMatrix, IntegerMatrix]:
    """A unimodular matrix built from a few elementary moves, with its inverse."""
    u = IntegerMatrix.identity(n).tolist()
    inv = IntegerMatrix.identity(n).tolist()
    if n < 2:
        if n == 1 and rng.random() < 0.5:
            return IntegerMatrix.from_rows([[-1]]), IntegerMatrix.from_rows([[-1]])
        return IntegerMatrix.identity(n), IntegerMatrix.identity(n)
    for _ in range(moves):
        i, j = rng.sample(range(n), 2)
        q = rng.choice((-1, 1))
        # row_i += q * row_j on u; col_j -= q * col_i on the inverse
        for c in range(n):
            u[i][c] += q * u[j][c]
        for r in range(n):
            inv[r][j] -= q * inv[r][i]
    return IntegerMatrix.from_rows(u, n), IntegerMatrix.from_rows(inv, n)


def _pieces(rng: random.Random, lo: int, hi: int, labels: str) -> tuple[dict, dict]:
    """Generators and boundary entries of a sum of elementary complexes."""
    gens: dict[int, list[str]] = {d: [] for d in range(lo, hi + 1)}
    entries: list[tuple[int, int, int, int]] = []  # (degree, row, col, value)
    count = rng.randint(1, 4)
    for n in range(count):
        if hi > lo and rng.random() < 0.6:
            d = rng.randint(lo + 1, hi)
            gens[d].append(f"{labels}{n}")
            gens[d - 1].append(f"{labels}{n}'")
            entries.append((d, len(gens[d - 1]) - 1, len(gens[d]) - 1, rng.randint(1, 3)))
        else:
            gens[rng.randint(lo, hi)].append(f"{labels}{n}")
    return gens, entries


def _assemble(gens: dict, entries) -> dict[int, IntegerMatrix]:
    mats = {}
    for d in gens:
        if d - 1 in gens:
            rows = [[0] * len(gens[d]) for _ in gens[d - 1]]
            mats[d] = rows
    for d, r, c, v in entries:
        mats[d][r][c] = v
    return {d: IntegerMatrix.from_rows(rows, len(gens[d])) for d, rows in mats.items()}


def _change_basis(rng: random.Random, gens, bnds, rot=None, bound: int = 3, tries: int = 20):
    """Conjugate by per-degree unimodular changes, keeping entries within ``bound``."""
    best = (bnds, rot or {})
    for _ in range(tries):
        us = {d: random_unimodular(rng, len(v), rng.randint(0, 2)) for d, v in gens.items()}
        nb = {d: us[d - 1][0] @ m @ us[d][1] for d, m in bnds.items()}
        nr = {d: us[d + 1][0] @ m @ us[d][1] for d, m in (rot or {}).items()}
        if all(m.max_abs() <= bound for m in list(nb.values()) + list(nr.values())):
            return nb, nr
    return best


def random_complex(rng: random.Random, lo: int = 0, hi: int = 3, bound: int = 3) -> GradedFreeComplex:
    """A random free complex on degrees ``lo..hi`` with known homology up to basis change."""
    gens, entries = _pieces(rng, lo, hi, "g")
    bnds, _ = _change_basis(rng, gens, _assemble(gens, entries), bound=bound)
    return GradedFreeComplex(gens, bnds)


def random_circle_complex(rng: random.Random, top: int = 4, bound: int = 3) -> CircleComplex:
    """A random complex with rotation on degrees ``0..top``.

    The base is ``P + P[1] + F`` with ``J`` moving ``P`` onto its shifted copy
    and vanishing on ``F``, followed by a bounded basis change.
    """
    pg, pe = _pieces(rng, 0, top - 1, "p")
    fg, fe = _pieces(rng, 0, top, "f")
    gens: dict[int, list[str]] = {d: [] for d in range(0, top + 1)}
    entries = []
    # layout per degree: P_d, then shifted P_(d-1), then F_d
    off_q = {d: len(pg.get(d, [])) for d in gens}
    off_f = {d: off_q[d] + len(pg.get(d - 1, [])) for d in gens}
    for d in gens:
        gens[d] = list(pg.get(d, [])) + [s + "j" for s in pg.get(d - 1, [])] + list(fg[d])
    for d, r, c, v in pe:
        entries.append((d, r, c, v))
        entries.append((d + 1, off_q[d] + r, off_q[d + 1] + c, -v))
    for d, r, c, v in fe:
        entries.append((d, off_f[d - 1] + r, off_f[d] + c, v))
    bnds = _assemble(gens, entries)
    rot = {}
    for d in range(0, top):
        rows = [[0] * len(gens[d]) for _ in gens[d + 1]]
        for a in range(len(pg.get(d, []))):
            rows[off_q[d + 1] + a][a] = 1
        rot[d] = IntegerMatrix.from_rows(rows, len(gens[d]))
    bnds, rot = _change_basis(rng, gens, bnds, rot, bound=bound)
    return CircleComplex(GradedFreeComplex(gens, bnds), rot)
