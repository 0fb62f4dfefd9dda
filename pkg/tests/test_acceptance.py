"""Acceptance criteria, one test each, with a PASS/FAIL line per criterion."""

import io
import random
import time

from chainkit.cli import run
from chainkit.complex import ChainMap, GradedFreeComplex, homology, universal_coefficients_check, verify_complex
from chainkit.cubical import (
    build_complex,
    crease_identity_holds,
    cube_boundary,
    cut_identity_holds,
    normalize_chain,
    random_chain,
    random_cube_set,
    random_generic_level,
    subdivide,
    subdivision_map,
)
from chainkit.equivariant import (
    circle_rotation_complex,
    equivariant_homology,
    gysin_check,
    localization_check,
    point_circle_complex,
)
from chainkit.matrix import IntegerMatrix, determinant, determinant_divisors, smith_normal_form
from chainkit.morse import (
    SYMBOLIC_FIXTURES,
    build_morse_complex,
    filtration_report,
    morse_homology,
    symbolic_fixture,
)
from chainkit.random_fixtures import random_circle_complex, random_matrix


def report(capsys, number, title, ok, seconds, limit, detail=""):
    verdict = "PASS" if ok and seconds < limit else "FAIL"
    line = f"{verdict}  [{number:>2}] {title}: {seconds:.2f} s (limit {limit:g} s)"
    with capsys.disabled():
        print("\n" + line + (f"  {detail}" if detail else ""))
    assert ok, f"{title}: {detail}"
    assert seconds < limit, f"{title}: {seconds:.2f} s exceeds {limit} s"


def close(p, q, tol=1e-6):
    return max(abs(a - b) for a, b in zip(p, q)) <= tol


def betti(groups):
    return [h.betti for h in groups]


# ---------------------------------------------------------------------------


def test_point_homology(capsys):
    t0 = time.perf_counter()
    code, rep = run(["homology", "pt.cx"], io.StringIO())
    dt = time.perf_counter() - t0
    rows = {r.degree: (r.betti, r.torsion) for r in rep.rows}
    ok = code == 0 and rows == {0: (1, ())}
    report(capsys, 1, "point homology H0 = Z, Hk = 0", ok, dt, 1, f"rows {rows}")


def test_equivariant_values(capsys):
    window = (-6, 2)
    degrees = range(window[0], window[1] + 1)
    t0 = time.perf_counter()
    pt, s1 = point_circle_complex(), circle_rotation_complex()
    got = {
        "plus(pt)": equivariant_homology(pt, "plus", window),
        "laurent(pt)": equivariant_homology(pt, "laurent", window),
        "plus(S1)": equivariant_homology(s1, "plus", window),
        "laurent(S1)": equivariant_homology(s1, "laurent", window),
        "minus(S1)": equivariant_homology(s1, "minus", window),
    }
    dt = time.perf_counter() - t0
    want = {
        "plus(pt)": {d: int(d <= 0 and d % 2 == 0) for d in degrees},
        "laurent(pt)": {d: int(d % 2 == 0) for d in degrees},
        "plus(S1)": {d: int(d == 1) for d in degrees},
        "laurent(S1)": {d: 0 for d in degrees},
        "minus(S1)": {d: int(d == 0) for d in degrees},
    }
    bad = [k for k, hs in got.items()
           if {h.degree: h.betti for h in hs} != want[k] or any(h.torsion for h in hs)]
    report(capsys, 2, "equivariant homology of pt and S1 on [-6, 2]", not bad, dt, 1,
           f"mismatch in {bad}" if bad else "5 tables exact")


def test_gysin_and_localization(capsys):
    rng = random.Random(2024)
    t0 = time.perf_counter()
    cases = [point_circle_complex(), circle_rotation_complex()]
    cases += [random_circle_complex(rng, top=4, bound=3) for _ in range(24)]
    failures = []
    for n, x in enumerate(cases):
        entries = [v for m in list(x.base.boundaries.values()) + list(x.rotation.values())
                   for row in m.tolist() for v in row]
        if x.base.hi > 4 or any(abs(v) > 3 for v in entries):
            failures.append(f"case {n} outside the fixture bounds")
        if not gysin_check(x, (-6, 2)).exact:
            failures.append(f"gysin {n}")
        if not localization_check(x, (-6, 2)).ok:
            failures.append(f"localization {n}")
    dt = time.perf_counter() - t0
    report(capsys, 3, "Gysin and localization exactness", not failures, dt, 30,
           f"{len(cases)} complexes" + (f", failures {failures}" if failures else ""))


def _snf_ok(a):
    snf = smith_normal_form(a)
    if snf.U @ a @ snf.V != snf.D:
        return False
    if abs(determinant(snf.U)) != 1 or abs(determinant(snf.V)) != 1:
        return False
    if any(snf.D[i, j] for i in range(a.rows) for j in range(a.cols) if i != j):
        return False
    d = [x for x in snf.diagonal if x]
    if any(x <= 0 for x in d) or any(d[i + 1] % d[i] for i in range(len(d) - 1)):
        return False
    return d == determinant_divisors(a)


def test_smith_normal_form(capsys):
    rng = random.Random(7)
    mats = [IntegerMatrix.from_rows([[2, 4], [6, 8]])]
    for _ in range(40):
        mats.append(random_matrix(rng, rng.randint(1, 8), rng.randint(1, 8), 9))
    # shared factors and rank defects keep the oracle from collapsing to ones
    for _ in range(10):
        r, c, f = rng.randint(2, 8), rng.randint(2, 8), rng.choice((2, 3))
        mats.append(IntegerMatrix(r, c, [f * rng.randint(-9 // f, 9 // f) for _ in range(r * c)]))
    for _ in range(10):
        r, c = rng.randint(2, 8), rng.randint(2, 8)
        rows = random_matrix(rng, r - 1, c, 9).tolist()
        rows.insert(rng.randrange(r), [-v for v in rows[0]])
        mats.append(IntegerMatrix.from_rows(rows, c))
    t0 = time.perf_counter()
    bad = [n for n, a in enumerate(mats) if not _snf_ok(a)]
    dt = time.perf_counter() - t0
    ok = not bad and smith_normal_form(mats[0]).diagonal == [2, 4]
    report(capsys, 4, "Smith normal form vs determinant divisors", ok, dt, 10,
           f"{len(mats)} matrices" + (f", failures {bad}" if bad else ""))


def test_cubical_calculus(capsys):
    rng = random.Random(11)
    t0 = time.perf_counter()
    squares = cuts = subdivisions = 0
    failures = []
    while squares < 220:
        amb = rng.randint(2, 4)
        c = normalize_chain(random_chain(rng, amb, rng.randint(2, amb), rng.randint(1, 4)))
        if not c:
            continue
        squares += 1
        if cube_boundary(cube_boundary(c)):
            failures.append(f"d^2 on {c!r}")
    while cuts < 120:
        amb = rng.randint(1, 4)
        c = normalize_chain(random_chain(rng, amb, rng.randint(1, amb), rng.randint(1, 4)))
        if not c:
            continue
        axis = rng.randrange(amb)
        level = random_generic_level(rng, c, axis)
        cuts += 1
        if not cut_identity_holds(c, axis, level):
            failures.append(f"cut of {c!r} at x{axis} = {level}")
        if not crease_identity_holds(c, axis, level):
            failures.append(f"crease of {c!r} at x{axis} = {level}")
    while subdivisions < 10:
        amb = rng.randint(2, 3)
        cells = random_cube_set(rng, amb, grid=3 if amb == 2 else 2)
        before = build_complex(cells)
        axis = rng.randrange(amb)
        level = random_generic_level(rng, before.cells[0], axis)
        after = build_complex(subdivide(cells, axis, level))
        subdivisions += 1
        hb, ha = homology(before.complex), homology(after.complex)
        same = [(h.betti, h.torsion) for h in hb] == [(h.betti, h.torsion) for h in ha]
        chain_map = ChainMap(before.complex, after.complex, subdivision_map(before, after, axis, level))
        if not same or chain_map.violations():
            failures.append(f"subdivision {subdivisions}")
    dt = time.perf_counter() - t0
    report(capsys, 5, "cubical d^2, cut, crease and subdivision", not failures, dt, 60,
           f"{squares} d^2, {cuts} cuts, {subdivisions} subdivisions"
           + (f", failures {failures[:3]}" if failures else ""))


def _numeric(numeric, name):
    data, seconds = numeric(name)
    t0 = time.perf_counter()
    hz = morse_homology(data, "z")
    h2 = morse_homology(data, "z2")
    return data, hz, h2, seconds + time.perf_counter() - t0


def test_numerical_sphere(capsys, numeric):
    data, hz, h2, dt = _numeric(numeric, "sphere")
    pos = sorted(c.position for c in data.points)
    ok = (len(data.points) == 2 and close(pos[0], (0, 0, -1)) and close(pos[1], (0, 0, 1))
          and betti(hz) == [1, 0, 1] and betti(h2) == [1, 0, 1] and not data.flags)
    report(capsys, 6, "numerical Morse homology of the sphere", ok, dt, 10,
           f"points {[(c.index, c.position) for c in data.points]}, betti {betti(hz)}")


def test_numerical_torus(capsys, numeric):
    data, hz, h2, dt = _numeric(numeric, "torus")
    expected = [(-3, 0, 0), (-1, 0, 0), (1, 0, 0), (3, 0, 0)]
    ok = (len(data.points) == 4
          and all(close(c.position, p) for c, p in zip(data.points, expected))
          and [c.index for c in data.points] == [0, 1, 1, 2]
          and all(data.incidence[k].is_zero() and data.incidence_z2[k].is_zero() for k in (1, 2))
          and betti(hz) == [1, 2, 1] and betti(h2) == [1, 2, 1] and not data.flags)
    report(capsys, 7, "numerical Morse homology of the torus", ok, dt, 60,
           f"indices {[c.index for c in data.points]}, betti {betti(hz)}")


def test_numerical_dented_sphere(capsys, numeric):
    data, hz, h2, dt = _numeric(numeric, "dented")
    cx = build_morse_complex(data, "z")
    d2 = data.incidence[2]
    z2_rank = smith_normal_form(data.incidence_z2[2]).rank  # entries are 0/1 with one row
    ok = (len(data.points) == 4 and [c.index for c in data.points] == [0, 1, 2, 2]
          and z2_rank == 1 and sorted(d2.tolist()[0]) == [-1, 1]
          and verify_complex(cx) == [] and betti(hz) == [1, 0, 1] and betti(h2) == [1, 0, 1]
          and not data.flags)
    report(capsys, 8, "dented sphere incidence and homology", ok, dt, 60,
           f"d2 = {d2.tolist()}, betti {betti(hz)}")


def test_filtration(capsys, numeric):
    datasets = {f"symbolic {n}": symbolic_fixture(n) for n in SYMBOLIC_FIXTURES}
    for name in ("sphere", "torus", "dented", "genus2"):
        datasets[f"numerical {name}"] = numeric(name)[0]
    t0 = time.perf_counter()
    bad = []
    for name, data in datasets.items():
        rings = ("z", "z2") if not name.endswith("rp2") else ("z2",)
        for ring in rings:
            rep = filtration_report(data, ring)
            levels_ok = all(
                all(h.betti == lvl.counts.get(h.degree, 0) and not h.torsion for h in lvl.relative)
                for lvl in rep.levels)
            same = [(h.degree, h.betti, h.torsion) for h in rep.total] == \
                [(h.degree, h.betti, h.torsion) for h in morse_homology(data, ring)]
            if not (rep.ok and levels_ok and same):
                bad.append(f"{name}/{ring}")
    dt = time.perf_counter() - t0
    report(capsys, 9, "filtration levels and reassembly", not bad, dt, 10,
           f"{len(datasets)} data sets" + (f", failures {bad}" if bad else ""))


def _field_betti(x, p):
    """Betti numbers over Z/p by elimination mod p (independent of the module)."""
    def rank_mod(m):
        rows = [[v % p for v in r] for r in m.tolist()]
        r = 0
        for c in range(m.cols):
            piv = next((i for i in range(r, len(rows)) if rows[i][c]), None)
            if piv is None:
                continue
            rows[r], rows[piv] = rows[piv], rows[r]
            inv = pow(rows[r][c], -1, p)
            rows[r] = [v * inv % p for v in rows[r]]
            for i in range(len(rows)):
                if i != r and rows[i][c]:
                    f = rows[i][c]
                    rows[i] = [(a - f * b) % p for a, b in zip(rows[i], rows[r])]
            r += 1
        return r
    out = {}
    for k in x.degrees:
        out[k] = x.rank(k) - (rank_mod(x.boundary(k)) if k > x.lo else 0) - \
            (rank_mod(x.boundary(k + 1)) if k < x.hi else 0)
    return out


def test_universal_coefficients(capsys):
    rng = random.Random(5)
    fixture = GradedFreeComplex({0: ["v"], 1: ["e"]}, {1: IntegerMatrix.from_rows([[2]])})
    complexes = [fixture] + [build_complex(random_cube_set(rng, rng.randint(2, 3), grid=2 if i % 2 else 3)).complex
                             for i in range(10)]
    t0 = time.perf_counter()
    bad = []
    for n, x in enumerate(complexes):
        for m in (2, 3, 4):
            res = universal_coefficients_check(x, m)
            if not all(r.ok for r in res):
                bad.append(f"{n}/m={m}")
            if m in (2, 3):
                fb = _field_betti(x, m)
                if any(fb[r.degree] != r.lhs for r in res):
                    bad.append(f"{n}/m={m} field rank")
    dt = time.perf_counter() - t0
    r0, r1 = universal_coefficients_check(fixture, 2)
    ok = not bad and (r0.lhs, r0.tensor, r0.tor, r1.lhs, r1.tensor, r1.tor) == (1, 1, 0, 1, 0, 1)
    report(capsys, 10, "universal coefficients rank identity", ok, dt, 10,
           f"{len(complexes)} complexes x m in 2,3,4" + (f", failures {bad}" if bad else ""))
