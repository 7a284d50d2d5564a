import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from idealpoints.triangulation import (
    DATA_DIR,
    MonomialEquation,
    TriangulationError,
    build_gluing_equations,
    compute_edge_classes,
    edge_slot,
    load_triangulation,
    match_shape_slots,
    parse_triangulation,
    translate_shapes,
)

from conftest import P0

GOOD_ONE_TET = """name one
tetrahedra 1
0: 0:(1023) 0:(1023) 0:(0132) 0:(0132)
"""


def test_m137_shape(m137):
    assert m137.name == "m137"
    assert m137.num_tets == 4
    assert [c.label for c in m137.curves] == ["alpha", "beta"]
    assert len(m137.equations) == 4


def test_m137_has_four_edge_classes(m137):
    classes = compute_edge_classes(m137)
    assert len(classes) == 4


def test_edge_classes_partition_all_edges(m137):
    classes = compute_edge_classes(m137)
    seen = [(t, e) for c in classes for t, e, _ in c.members]
    assert len(seen) == 6 * m137.num_tets
    assert len(set(seen)) == len(seen)


def test_each_tet_contributes_each_slot_twice(m137):
    # every tet has two edges of each slot; summed over all classes
    counts = np.zeros((m137.num_tets, 3), dtype=int)
    for c in compute_edge_classes(m137):
        for t, _, s in c.members:
            counts[t, s] += 1
    assert np.all(counts == 2)


def test_edge_slot_opposite_edges_agree():
    assert edge_slot(0, 1) == edge_slot(2, 3) == 0
    assert edge_slot(0, 2) == edge_slot(1, 3) == 1
    assert edge_slot(0, 3) == edge_slot(1, 2) == 2


def test_text_round_trip(m137):
    again = parse_triangulation(m137.to_text())
    assert again == m137


def test_load_by_path_and_by_name(m137):
    assert load_triangulation(DATA_DIR / "m137.tri") == m137


def test_comments_and_blank_lines_ignored():
    tri = parse_triangulation("# hi\n\n" + GOOD_ONE_TET.replace("\n", "  # c\n"))
    assert tri.num_tets == 1


@pytest.mark.parametrize(
    "text, fragment, lineno",
    [
        ("tetrahedra 1\n0: 0:(1023) 0:(1023) 0:(0132) 0:(0132)\n", "missing 'name'", None),
        ("name x\ntetrahedra 1\n0: 0:(1023) 0:(1023) 0:(0132)\n", "expected 4 gluing entries", 3),
        ("name x\ntetrahedra 1\n0: 0:(1023) 0:(1023) 0:(0132) 0:(0133)\n", "malformed permutation", 3),
        ("name x\ntetrahedra 1\n0: 0:(1023) 0:(1023) 0:(0132) 3:(0132)\n", "dangling", 3),
        ("name x\ntetrahedra 1\n0: 0:(0132) 0:(0132) 0:(0132) 0:(1032)\n", "non-involutive", 3),
        ("name x\ntetrahedra 2\n0: 1:(0123) 1:(0123) 1:(0123) 1:(0123)\n", "missing gluing rows", None),
        ("name x\ntetrahedra 1\nbogus line\n", "unrecognized", 3),
        ("name x\ntetrahedra one\n", "bad tetrahedron count", 2),
    ],
)
def test_parse_errors_carry_line_numbers(text, fragment, lineno):
    with pytest.raises(TriangulationError) as info:
        parse_triangulation(text)
    assert fragment in str(info.value)
    assert info.value.lineno == lineno


def test_curve_exponent_length_checked():
    with pytest.raises(TriangulationError):
        parse_triangulation(GOOD_ONE_TET + "curve alpha a=(1,0) b=(0,0) sign=1\n")


def test_monomial_equation_evaluation_convention():
    e = MonomialEquation((1, 0), (0, 2), -1, "x")
    pa, pb, qa, qb = e.cleared()
    assert list(pa) == [1, 0] and list(pb) == [0, 2]
    assert list(qa) == [0, 0] and list(qb) == [0, 0]


@settings(max_examples=30, deadline=None)
@given(st.permutations(range(4)))
def test_relabeling_is_an_isomorphism(m137, order):
    other = m137.relabel(order)
    a = sorted(sorted(len(c) for c in compute_edge_classes(m137)))
    b = sorted(sorted(len(c) for c in compute_edge_classes(other)))
    assert a == b
    # the edge equations are permuted along with the tetrahedra
    eqs = build_gluing_equations(m137, compute_edge_classes(m137))
    eqs2 = build_gluing_equations(other, compute_edge_classes(other))
    key = lambda e: (e.a, e.b, e.sign)
    moved = sorted(key(MonomialEquation(tuple(e.a[i] for i in order), tuple(e.b[i] for i in order), e.sign)) for e in eqs)
    assert moved == sorted(key(e) for e in eqs2)


def test_built_equations_vanish_at_complete_structure(m137, derived):
    w = derived.from_explicit(P0).shapes
    for e in build_gluing_equations(m137, compute_edge_classes(m137)):
        val = np.prod(w ** np.array(e.a)) * np.prod((1 - w) ** np.array(e.b))
        assert abs(val - e.sign) < 1e-12


def test_slot_match_is_unique(m137):
    built = build_gluing_equations(m137, compute_edge_classes(m137))
    assert match_shape_slots(built, m137.equations) == (0, 2, 0, 0)


def test_translate_shapes_round_trip():
    w = np.array([0.3 + 0.7j, 1.2 + 0.4j, -0.5 + 0.2j])
    for slots in itertools.product(range(3), repeat=3):
        z = translate_shapes(w, slots)
        inverse = tuple({0: 0, 1: 2, 2: 1}[s] for s in slots)
        assert np.allclose(translate_shapes(z, inverse), w)


def test_translate_shapes_degenerate_goes_to_infinity():
    z = translate_shapes([1.0, 0.0], (1, 2))
    assert np.all(np.isinf(z.real))
