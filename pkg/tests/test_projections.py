from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from bsrw.core import BSGroup
from bsrw.errors import NotAdjacent, WrongClass
from bsrw.projections import (
    HypPoint,
    PlanePoint,
    TreeEnd,
    TreeVertex,
    affine_map,
    base_vertex,
    end_prefix,
    euclid_map,
    format_path,
    parse_path,
    project_euclid,
    project_hyp,
    project_tree,
    tree_neighbours,
)

words = st.lists(st.sampled_from("aAbB"), max_size=30).map("".join)
HYP = [(2, 3), (2, -3), (3, 5), (3, -7)]
EUC = [(2, 2), (2, -2), (3, 3)]


def test_hyp_examples():
    G = BSGroup(2, 3)
    assert project_hyp(G.reduce("a")) == HypPoint(Fraction(3, 2), Fraction(0))
    assert project_hyp(G.reduce("b")) == HypPoint(Fraction(1), Fraction(1))
    assert project_hyp(G.reduce("a b")) == HypPoint(Fraction(3, 2), Fraction(3, 2))
    assert project_hyp(G.reduce("b a")) == HypPoint(Fraction(3, 2), Fraction(1))
    assert str(project_hyp(G.reduce("a b"))) == "A=3/2 B=3/2 s=+1"
    assert HypPoint.parse("A=3/2 B=3/2 s=+1") == project_hyp(G.reduce("a b"))


def test_sign_twist():
    H = BSGroup(2, -3)
    m = affine_map(H.reduce("a"))
    assert m.sign == -1 and m.A == Fraction(3, 2)
    z = project_hyp(H.reduce("a b"))
    assert z == HypPoint(Fraction(3, 2), Fraction(-3, 2), -1)
    assert affine_map(H.reduce("a a")).sign == 1


def test_euclid_examples():
    G = BSGroup(2, -2)
    assert project_euclid(G.reduce("a b")) == PlanePoint(-1, 1, -1)
    assert project_euclid(G.reduce("b a")) == PlanePoint(1, 1, -1)
    assert project_euclid(BSGroup(2, 2).reduce("a b")) == PlanePoint(1, 1, 1)


def test_wrong_class():
    with pytest.raises(WrongClass):
        project_hyp(BSGroup(2, 2).identity)
    with pytest.raises(WrongClass):
        project_hyp(BSGroup(1, 2).identity)
    with pytest.raises(WrongClass):
        project_euclid(BSGroup(2, 3).identity)


@pytest.mark.parametrize("p,q", HYP)
@given(u=words, v=words)
def test_affine_homomorphism(p, q, u, v):
    G = BSGroup(p, q)
    g, h = G.reduce(u), G.reduce(v)
    assert affine_map(g * h) == affine_map(g).compose(affine_map(h))
    z = project_hyp(g)
    assert z.A == Fraction(abs(q), p) ** g.level
    assert z.sign == (-1 if q < 0 else 1) ** abs(g.level)


@pytest.mark.parametrize("p,q", EUC)
@given(u=words, v=words)
def test_euclid_homomorphism(p, q, u, v):
    G = BSGroup(p, q)
    g, h = G.reduce(u), G.reduce(v)
    assert euclid_map(g * h) == euclid_map(g).compose(euclid_map(h))
    assert project_euclid(g).y == g.level


@pytest.mark.parametrize("p,q", HYP + EUC + [(1, 2)])
@given(w=words)
def test_coset_constancy(p, q, w):
    # g and g b^k project to the same tree vertex
    G = BSGroup(p, q)
    g = G.reduce(w)
    for k in (-7, -1, 1, 5):
        assert project_tree(g * G.b_power(k)) == project_tree(g)


@pytest.mark.parametrize("p,q", HYP + EUC)
@given(w=words)
def test_tree_neighbours(p, q, w):
    G = BSGroup(p, q)
    v = project_tree(G.reduce(w))
    nbrs = tree_neighbours(v)
    assert len(nbrs) == p + abs(q)
    assert len(set(nbrs)) == p + abs(q)
    assert sum(1 for u in nbrs if u.level == v.level + 1) == abs(q)
    assert sum(1 for u in nbrs if u.level == v.level - 1) == p
    # the neighbours are exactly the images gB -> g b^j a^(+-1) B
    g = v.representative()
    expected = {project_tree(g * G.reduce(f"b^{j} a^{e}"))
                for e in (1, -1) for j in range(-8, 9)}
    assert set(nbrs) == expected
    for u in nbrs:
        assert v in tree_neighbours(u)


def test_tree_strings():
    G = BSGroup(2, 3)
    assert str(base_vertex(2, 3)) == "B"
    v = project_tree(G.reduce("b a B A"))
    assert str(v) == "u1 d1"
    assert parse_path("u1 d1") == v.path
    assert format_path(v.path) == "u1 d1"
    assert TreeEnd.parse("u0 d1").depth == 2
    assert str(TreeEnd.parse("u0 d1").prefix(1)) == "u0"


def test_end_prefix():
    G = BSGroup(2, 3)
    walk = [project_tree(G.reduce(w)) for w in ["", "a", "a b a", "a", "a b^2 a", "a b^2 a A"]]
    # a b^2 a A reduces back to a b^2, i.e. the vertex of a
    e = end_prefix(walk[:5])
    assert str(e) == "u0 u2"
    assert end_prefix(walk).edges == project_tree(G.reduce("a")).path
    with pytest.raises(NotAdjacent):
        end_prefix([base_vertex(2, 3), project_tree(G.reduce("a a"))])
    assert end_prefix([]).depth == 0


def test_vertex_representative_roundtrip():
    G = BSGroup(2, 3)
    g = G.reduce("a b A A b a")
    v = project_tree(g)
    assert project_tree(v.representative()) == v
    assert v.level == g.level
    assert isinstance(v, TreeVertex)
