import random

import pytest
from hypothesis import given, strategies as st

from bsrw.core import (
    BSGroup,
    GroupClass,
    NormalForm,
    check_normal_form,
    classify,
    parse_word,
)
from bsrw.errors import PresentationMismatch, ZeroParameter
from oracles import is_trivial, letters_of, word_sample

GROUPS = [(2, 3), (2, -3), (2, 2), (2, -2), (3, 5), (1, 2)]
words = st.lists(st.sampled_from("aAbB"), max_size=30).map("".join)


@pytest.mark.parametrize("p,q,cls,norm", [
    (1, 2, GroupClass.AMENABLE, (1, 2)),
    (2, 3, GroupClass.POSPOS, (2, 3)),
    (-2, -3, GroupClass.POSPOS, (2, 3)),
    (2, -2, GroupClass.EQUALABS, (2, -2)),
    (-2, 2, GroupClass.EQUALABS, (2, -2)),
    (3, -2, GroupClass.POSNEG, (2, -3)),
    (3, 2, GroupClass.POSPOS, (2, 3)),
    (2, 2, GroupClass.EQUALABS, (2, 2)),
    (-1, 5, GroupClass.AMENABLE, (1, -5)),
])
def test_classify(p, q, cls, norm):
    pres = classify(p, q)
    assert pres.group_class is cls
    assert pres.normalized == norm


@pytest.mark.parametrize("p,q", [(0, 3), (2, 0), (0, 0)])
def test_classify_zero(p, q):
    with pytest.raises(ZeroParameter):
        classify(p, q)


@pytest.mark.parametrize("p,q", [(3, 2), (-2, -3), (-3, 2), (5, -3)])
def test_translation_preserves_triviality(p, q):
    # the defining relator of the original presentation must vanish after translation
    pres = classify(p, q)
    G = BSGroup(*pres.normalized)
    rel = [("a", 1), ("b", p), ("a", -1), ("b", -q)]
    assert G.reduce(pres.translate(rel)).is_identity()


def test_parse_word():
    assert parse_word("a b^2 A B^-3") == [("a", 1), ("b", 2), ("a", -1), ("b", 3)]
    assert parse_word("abA") == [("a", 1), ("b", 1), ("a", -1)]
    assert parse_word("") == []
    with pytest.raises(ValueError):
        parse_word("c")


def test_reduce_examples():
    G = BSGroup(2, 3)
    assert G.reduce("a b b A") == G.b_power(3)
    assert G.reduce("").is_identity()
    assert G.reduce("A b^3 a") == G.b_power(2)
    g = G.reduce("a b A")
    assert g.syllable_count == 2 and g.r0 == 0
    assert g.syllables == [(1, 1), (-1, 0)]
    assert str(G.reduce("a b^2 A")) == "b^3"


def test_multiply_invert_examples():
    G = BSGroup(2, 3)
    assert G.reduce("a b") * G.reduce("b A") == G.b_power(3)
    g = G.reduce("a b^5 A b a")
    assert g * G.identity == g
    inv = ~G.reduce("a b")
    assert inv == G.reduce("B A")
    # canonical fields (r0 must lie in [0, p) before an A)
    assert inv.r0 == 1 and inv.syllables == [(-1, -3)]
    assert check_normal_form(inv) == []


def test_push_right_carries():
    G = BSGroup(2, 3)
    assert G.reduce("b^3 a") == G.reduce("a b^2")
    assert G.reduce("b^-1 a") == G.element([(1, 2)], -2)
    H = BSGroup(2, -3)
    # b^{3} a = a b^{-2} in BS(2,-3)
    assert H.reduce("b^3 a") == H.reduce("a b^-2")


def test_presentation_mismatch():
    with pytest.raises(PresentationMismatch):
        BSGroup(2, 3).identity * BSGroup(2, -3).identity


def test_unnormalized_group_rejected():
    with pytest.raises(ValueError):
        BSGroup(3, 2)
    assert BSGroup.from_parameters(3, 2) == BSGroup(2, 3)


@pytest.mark.parametrize("p,q", GROUPS)
def test_britton_oracle_agreement(p, q):
    G = BSGroup(p, q)
    for letters in word_sample(p * 100 + q, 600, p, q):
        assert G.reduce("".join(letters)).is_identity() == is_trivial(letters, p, q)


@pytest.mark.parametrize("p,q", GROUPS)
@given(w=words)
def test_normal_form_invariants(p, q, w):
    G = BSGroup(p, q)
    g = G.reduce(w)
    assert check_normal_form(g) == []
    assert check_normal_form(~g) == []
    # round trip through the word form
    assert G.reduce(g.to_word()) == g
    assert G.reduce(str(g)) == g


@pytest.mark.parametrize("p,q", GROUPS)
@given(u=words, v=words, w=words)
def test_group_axioms(p, q, u, v, w):
    G = BSGroup(p, q)
    x, y, z = G.reduce(u), G.reduce(v), G.reduce(w)
    assert (x * y) * z == x * (y * z)
    assert (x * ~x).is_identity() and (~x * x).is_identity()
    assert ~~x == x
    assert x * G.identity == x == G.identity * x
    assert G.reduce(u + v) == x * y


@pytest.mark.parametrize("p,q", GROUPS)
@given(u=words, v=words)
def test_equality_matches_oracle(p, q, u, v):
    G = BSGroup(p, q)
    same = G.reduce(u) == G.reduce(v)
    assert same == is_trivial(list(u) + [c.swapcase() for c in reversed(v)], p, q)


@pytest.mark.parametrize("p,q", [(2, 3), (2, -3), (2, 2), (3, 5)])
def test_free_subgroup_witness(p, q):
    G = BSGroup(p, q)
    x, y = G.reduce("a"), G.reduce("b a B")
    gens = {"x": x, "X": ~x, "y": y, "Y": ~y}
    inverse = {"x": "X", "X": "x", "y": "Y", "Y": "y"}
    layer = [("", G.identity)]
    count = 0
    for _ in range(6):
        nxt = []
        for w, g in layer:
            for c, h in gens.items():
                if w and inverse[w[-1]] == c:
                    continue
                gh = g * h
                assert not gh.is_identity(), w + c
                nxt.append((w + c, gh))
                count += 1
        layer = nxt
    assert count == 4 * (3 ** 6 - 1) // 2


def test_big_exponents():
    G = BSGroup(2, 3)
    g = G.reduce("A" * 200 + "b" + "a" * 200)
    assert not g.is_identity()
    assert g.level == 0
    assert G.reduce(g.to_word()) == g
    # a^n b^(2^n) A^n = b^(3^n)
    n = 60
    assert G.reduce("a" * n + f"b^{2 ** n}" + "A" * n) == G.b_power(3 ** n)


def test_oracle_self_check():
    assert is_trivial(letters_of("a b^2 A b^-3"), 2, 3)
    assert not is_trivial(letters_of("a b A"), 2, 3)
    assert is_trivial(letters_of("A b^3 a b^-2"), 2, 3)
    assert is_trivial([], 2, 3)


def test_normal_form_is_hashable_and_frozen():
    G = BSGroup(2, 3)
    g = G.reduce("ab")
    h = G.reduce("b^3 a b^-2")
    assert h != g
    assert {g: 1}[G.reduce("a b^3 B^2")] == 1
    assert len({g, G.reduce("a b"), h}) == 2
    with pytest.raises(Exception):
        g.tail = 4
    assert isinstance(g, NormalForm)


def test_random_long_words_roundtrip():
    rng = random.Random(5)
    G = BSGroup(2, -3)
    for _ in range(200):
        w = "".join(rng.choice("aAbB") for _ in range(rng.randint(0, 120)))
        g = G.reduce(w)
        assert G.reduce(w + "".join(c.swapcase() for c in reversed(w))).is_identity()
        assert check_normal_form(g) == []
