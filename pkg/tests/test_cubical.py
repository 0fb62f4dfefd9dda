import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chainkit.complex import ChainMap, homology, verify_complex
from chainkit.cubical import (
    CreasedCell,
    CubicalChain,
    CutError,
    ElementaryCube,
    LabeledCube,
    build_complex,
    crease_homotopy,
    crease_identity_holds,
    cube_boundary,
    cut_chain,
    cut_identity_holds,
    dyadic,
    lift_chain,
    normalize_chain,
    random_chain,
    random_cube_set,
    random_generic_level,
    subdivide,
    subdivision_map,
)
from chainkit.matrix import determinant

Q = ElementaryCube.parse


def chain(*pairs):
    return CubicalChain((Q(s) if isinstance(s, str) else s, v) for s, v in pairs)


def groups(cells):
    return [str(h) for h in homology(build_complex(cells).complex)]


seeds = st.integers(0, 10 ** 6)


def test_parse_and_print():
    c = Q("[0,1]x{1/2}x[1/4,3/4]")
    assert c.dim == 2 and c.ambient_dim == 3
    assert c.nondegenerate_axes == (0, 2)
    assert str(c) == "[0,1]x{1/2}x[1/4,3/4]"
    assert ElementaryCube.from_spec((0, 1), 2) == Q("[0,1]x{2}")


def test_bad_cubes():
    with pytest.raises(ValueError):
        Q("[1,0]")
    with pytest.raises(ValueError):
        Q("(0,1)")
    with pytest.raises(ValueError):
        dyadic(Fraction(1, 3))
    with pytest.raises(ValueError):
        LabeledCube(Q("[0,1]x[0,1]"), ((0, 1), (0, 1)))
    with pytest.raises(ValueError):
        CubicalChain([(Q("[0,1]"), 1), (Q("{0}"), 1)])


def test_interval_boundary():
    assert cube_boundary(chain(("[0,1]", 1))) == chain(("{1}", 1), ("{0}", -1))


def test_square_boundary():
    expected = chain(("{1}x[0,1]", 1), ("{0}x[0,1]", -1), ("[0,1]x{1}", -1), ("[0,1]x{0}", 1))
    assert cube_boundary(chain(("[0,1]x[0,1]", 1))) == expected


def test_boundary_of_point_rejected():
    with pytest.raises(ValueError):
        cube_boundary(chain(("{0}", 1)))


def test_boundary_squared_on_three_cube():
    b = cube_boundary(chain(("[0,1]x[0,2]x[1,2]", 1)))
    assert len(b) == 6
    assert not cube_boundary(b)


def test_degenerate_labeled_cube_is_zero():
    cube = Q("[0,1]x{0}")
    lc = LabeledCube(cube, ((0, 1), (None, 0)))
    assert not normalize_chain(CubicalChain.of(lc))


def test_swapped_and_reversed_coordinates():
    cube = Q("[0,1]x[0,1]x[0,1]")
    sigma = LabeledCube.standard(cube)
    # a 3-cycle of formal coordinates is an even permutation
    cyc = LabeledCube(cube, ((1, 1), (2, 1), (0, 1)))
    assert normalize_chain(CubicalChain([(sigma, 1), (cyc, 1)])) == chain((cube, 2))
    rev = LabeledCube(cube, ((0, -1), (1, 1), (2, 1)))
    assert not normalize_chain(CubicalChain([(sigma, 1), (rev, 1)]))
    swap = LabeledCube(cube, ((1, 1), (0, 1), (2, 1)))
    assert normalize_chain(CubicalChain.of(swap)) == chain((cube, -1))


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_normalize_idempotent_and_linear(seed):
    rng = random.Random(seed)
    amb = rng.randint(1, 4)
    dim = rng.randint(1, amb)
    a, b = random_chain(rng, amb, dim), random_chain(rng, amb, dim)
    na = normalize_chain(a)
    assert normalize_chain(na) == na
    assert normalize_chain(a + b) == na + normalize_chain(b)
    assert normalize_chain(3 * a) == 3 * na


@settings(max_examples=150, deadline=None)
@given(seeds)
def test_boundary_squared_zero(seed):
    rng = random.Random(seed)
    amb = rng.randint(2, 4)
    dim = rng.randint(2, amb)
    c = normalize_chain(random_chain(rng, amb, dim, rng.randint(1, 4)))
    if c:
        assert not cube_boundary(cube_boundary(c))


def test_cut_interval():
    res = cut_chain(chain(("[0,1]", 1)), 0, "1/2")
    assert res.plus == chain(("[1/2,1]", 1))
    assert res.minus == chain(("[0,1/2]", 1))
    assert res.slice == chain(("{1/2}", -1))
    # d(plus) = {1} - {1/2} = (dc)^+ + slice
    assert cube_boundary(res.plus) == chain(("{1}", 1), ("{1/2}", -1))
    assert cut_identity_holds(chain(("[0,1]", 1)), 0, "1/2")


def test_cut_missing_the_chain():
    c = chain(("{0}x[0,1]", 1), ("{1}x[0,1]", 2))
    res = cut_chain(c, 0, "1/2")
    assert res.plus == chain(("{1}x[0,1]", 2))
    assert res.minus == chain(("{0}x[0,1]", 1))
    assert not res.slice
    res = cut_chain(c, 0, 4)
    assert res.minus == c and not res.plus and not res.slice


def test_non_generic_cuts_rejected():
    with pytest.raises(CutError):
        cut_chain(chain(("[0,1]", 1)), 0, 1)
    with pytest.raises(CutError):
        cut_chain(chain(("{1/2}x[0,1]", 1)), 0, "1/2")
    with pytest.raises(CutError):
        crease_homotopy(chain(("{0}", 1)), 0, "1/2")
    with pytest.raises(CutError):
        CreasedCell(Q("[0,1]"), 0, 1)


def test_crease_of_interval_by_expansion():
    c = chain(("[0,1]", 1))
    k = crease_homotopy(c, 0, "1/2")
    assert k == CubicalChain.of(CreasedCell(Q("[0,1]"), 0, Fraction(1, 2)))
    expected = chain(("{1}x[1/2,1]", 1), ("{1}x[0,1/2]", 1), ("{0}x[0,1]", -1),
                     ("[0,1]x{1}", -1), ("[0,1]x{0}", 1))
    assert cube_boundary(k) == expected
    # K(dc) = prism({1}) - prism({0}) cancels the side walls
    assert cube_boundary(k) + chain(("[0,1]x{1}", 1), ("[0,1]x{0}", -1)) == \
        lift_chain(cut_chain(c, 0, "1/2").pieces, 1) - lift_chain(c, 0)
    assert crease_identity_holds(c, 0, "1/2")


def test_crease_away_from_chain_is_plain_prism():
    k = crease_homotopy(chain(("{0}x[0,1]", 1)), 0, "1/2")
    assert k == chain(("[0,1]x{0}x[0,1]", 1))


@settings(max_examples=120, deadline=None)
@given(seeds)
def test_cut_and_crease_identities(seed):
    rng = random.Random(seed)
    amb = rng.randint(1, 4)
    dim = rng.randint(1, amb)
    c = normalize_chain(random_chain(rng, amb, dim, rng.randint(1, 4)))
    if not c:
        return
    axis = rng.randrange(amb)
    level = random_generic_level(rng, c, axis)
    assert cut_identity_holds(c, axis, level)
    assert crease_identity_holds(c, axis, level)


def test_creased_cells_assemble_into_a_complex():
    c = chain(("[0,1]x[0,1]", 1))
    k = crease_homotopy(c, 1, "1/4")
    cx = build_complex(k.terms)
    assert verify_complex(cx.complex) == []
    assert [str(h) for h in homology(cx.complex)] == ["Z", "0", "0", "0"]


def test_cycle_and_its_cut_are_homologous():
    # the boundary of the crease exhibits the homology
    z = cube_boundary(chain(("[0,2]x[0,2]", 1)))
    k = crease_homotopy(z, 0, "1/2")
    assert cube_boundary(k) == lift_chain(cut_chain(z, 0, "1/2").pieces, 1) - lift_chain(z, 0)


def test_build_complex_examples():
    perimeter = {Q("[0,1]x{0}"), Q("[0,1]x{1}"), Q("{0}x[0,1]"), Q("{1}x[0,1]")}
    cx = build_complex(perimeter)
    assert len(cx.added) == 4
    assert cx.complex.euler_characteristic() == 0
    assert groups(perimeter) == ["Z", "Z"]
    assert groups({Q("{0}x{0}")}) == ["Z"]
    assert groups({Q("[0,1]x[0,1]")}) == ["Z", "0", "0"]
    hollow = {f for f, _ in Q("[0,1]x[0,1]x[0,1]").boundary()}
    assert groups(hollow) == ["Z", "0", "Z"]


def test_build_complex_vector():
    cx = build_complex({Q("[0,1]")})
    v = cx.vector(chain(("{1}", 1), ("{0}", -1)))
    assert sorted(v) == [-1, 1]


def test_build_complex_rejects_labeled_cubes():
    with pytest.raises(TypeError):
        build_complex({LabeledCube.standard(Q("[0,1]"))})


def _check_subdivision(rng, cells, ambient):
    before = build_complex(cells)
    axis = rng.randrange(ambient)
    level = random_generic_level(rng, before.cells[0], axis)
    after_cells = subdivide(cells, axis, level)
    after = build_complex(after_cells)
    hb, ha = homology(before.complex), homology(after.complex)
    assert [str(h) for h in hb] == [str(h) for h in ha]
    f = ChainMap(before.complex, after.complex, subdivision_map(before, after, axis, level))
    assert f.violations() == []
    for k in before.complex.degrees:
        ind = f.induced(k)
        if hb[k].betti and not hb[k].torsion:
            assert abs(determinant(ind)) == 1


def test_subdivision_invariance_fixed():
    rng = random.Random(11)
    hollow = {f for f, _ in Q("[0,1]x[0,1]x[0,1]").boundary()}
    _check_subdivision(rng, hollow, 3)


@settings(max_examples=10, deadline=None)
@given(seeds)
def test_subdivision_invariance_random(seed):
    rng = random.Random(seed)
    amb = rng.randint(2, 3)
    cells = random_cube_set(rng, amb, grid=3 if amb == 2 else 2)
    _check_subdivision(rng, cells, amb)
