from itertools import combinations
from math import factorial

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sticky_landscape import geometry as geo
from sticky_landscape.clusters import (
    CatalogError, ContactGraph, characterize, enumerate_catalog, format_catalog, is_rigid,
    isomorphism, load_catalog, parse_catalog, realize, rigid_multiplicity, symmetry_number,
    canonical_key)

K4 = ContactGraph(4, tuple(combinations(range(4), 2)))
OCTA_GRAPH = ContactGraph(6, tuple((i, j) for i, j in combinations(range(6), 2)
                                   if (i // 2) != (j // 2)))


def test_realize_tetrahedron():
    x = realize(K4, seed=0)
    d = np.linalg.norm(x[:, None] - x[None], axis=2)[np.triu_indices(4, 1)]
    assert np.allclose(d, 1.0, atol=1e-10)


def test_realize_octahedron():
    x = realize(OCTA_GRAPH, seed=3)
    assert geo.rotational_factor(x) == pytest.approx(2.83, abs=0.01)
    assert is_rigid(x, OCTA_GRAPH)
    assert not is_rigid(x, OCTA_GRAPH.without(OCTA_GRAPH.edges[0]))


def test_square_is_not_rigid():
    x = np.array([[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0]], float)
    sq = ContactGraph(4, ((0, 1), (1, 2), (2, 3), (0, 3)))
    assert not is_rigid(x, sq)


def test_symmetry_numbers(cat6):
    tet = characterize(1, K4, realize(K4))
    assert symmetry_number(tet) == (12, False)
    assert rigid_multiplicity(tet) == 1
    poly, octa = cat6[1], cat6[2]
    assert symmetry_number(octa) == (24, False)
    assert symmetry_number(poly) == (2, False)


def test_multiplicity_conventions(cat6):
    poly, octa = cat6[1], cat6[2]
    assert rigid_multiplicity(octa, "table") == 15
    assert rigid_multiplicity(poly, "table") == 180
    assert rigid_multiplicity(octa, "proper") == 30
    assert rigid_multiplicity(poly, "proper") == 360
    with pytest.raises(ValueError):
        rigid_multiplicity(octa, "other")


def test_isomorphism_examples(cat6):
    assert list(isomorphism(OCTA_GRAPH, OCTA_GRAPH)) == list(range(6))
    poly, octa = cat6[1].graph, cat6[2].graph
    assert isomorphism(poly, octa) is None
    assert isomorphism(OCTA_GRAPH, octa) is not None


@settings(max_examples=30, deadline=None)
@given(st.permutations(range(6)))
def test_isomorphism_is_symmetric_and_valid(perm):
    a = ContactGraph(6, ((0, 3), (0, 4), (0, 5), (1, 2), (1, 4), (1, 5), (2, 3), (2, 4),
                         (2, 5), (3, 4), (3, 5), (4, 5)))
    b = a.permuted(perm)
    p = isomorphism(a, b)
    assert p is not None and isomorphism(b, a) is not None
    A, B = a.adjacency, b.adjacency
    assert np.array_equal(A, B[np.ix_(p, p)])
    assert canonical_key(a) == canonical_key(b)


def test_catalog_invariants(cat5, cat6):
    for cat in (cat5, cat6):
        for m in cat.rigid:
            res = geo.excesses(m.representative, m.graph.bonds)
            assert np.abs(res).max() < 1e-10
            nb = [p for p in geo.pair_index(cat.n) if tuple(p) not in set(m.graph.edges)]
            assert geo.excesses(m.representative, nb).min() > 0
            assert is_rigid(m.representative, m.graph)
            assert (2 if m.chiral else 1) * factorial(cat.n) % m.sigma == 0
            assert rigid_multiplicity(m, "proper") == 2 * rigid_multiplicity(m, "table")


def test_catalog_counts(cat5, cat6):
    assert len(cat5) == 1
    assert len(cat6) == 2


@pytest.mark.parametrize("n", [5, 6])
def test_enumeration_matches_shipped(n):
    shipped = load_catalog(n=n)
    found = enumerate_catalog(n)
    assert len(found) == len(shipped)
    for m in found.rigid:
        assert shipped.identify(m.graph) is not None


def test_shipped_n7_n8_counts():
    assert len(parse_catalog(_shipped_text(7))) == 5
    assert len(parse_catalog(_shipped_text(8))) == 13


def _shipped_text(n):
    from importlib import resources
    return (resources.files("sticky_landscape") / "data" / f"rigid_n{n}.txt").read_text()


@pytest.mark.slow
@pytest.mark.parametrize("n,count", [(7, 5), (8, 13)])
def test_load_n7_n8(n, count):
    cat = load_catalog(n=n)
    assert len(cat) == count
    for m in cat.rigid:
        assert is_rigid(m.representative, m.graph)
        assert rigid_multiplicity(m, "table") > 0


def test_catalog_format_roundtrip(cat6):
    text = format_catalog(cat6)
    again = parse_catalog(text)
    assert [g for _, g in again] == [m.graph for m in cat6.rigid]


def test_catalog_parse_errors():
    with pytest.raises(CatalogError):
        parse_catalog("n=6 id=1 bonds=0-1,2")
    with pytest.raises(CatalogError):
        parse_catalog("n=6 id=1")
    with pytest.raises(CatalogError):
        parse_catalog("garbage")
