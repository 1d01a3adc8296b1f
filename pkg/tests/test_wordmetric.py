import pytest
from hypothesis import given, strategies as st

from bsrw.core import BSGroup
from bsrw.geometry import bfs_ball
from bsrw.wordmetric import (
    WordLengthBound,
    b_power_length,
    b_power_word,
    witness_length,
    witness_word,
    word_length,
    word_metric,
)

GROUPS = [(2, 3), (2, -3), (2, 2), (2, -2), (3, 5)]


def test_examples():
    G = BSGroup(2, 3)
    assert word_length(G.b_power(3)) == WordLengthBound(3, 3, 3)
    assert word_length(G.identity).exact == 0
    b9 = G.b_power(9)
    w = word_length(b9)
    assert w.exact == 8
    bounds = word_metric(G).bounds_only(b9)
    assert bounds.upper <= 8
    assert G.reduce(witness_word(b9)) == b9


def test_bound_invariant_enforced():
    with pytest.raises(AssertionError):
        WordLengthBound(5, 4)


@pytest.mark.parametrize("p,q", GROUPS)
def test_bounds_bracket_exact_lengths(p, q):
    G = BSGroup(p, q)
    metric = word_metric(G, 8)
    for g, d in metric.table.items():
        b = metric.bounds_only(g)
        assert b.lower <= d <= b.upper, (str(g), d, b)
        assert G.reduce(witness_word(g)) == g


@pytest.mark.parametrize("p,q", GROUPS)
def test_outside_ball_lower_bound(p, q):
    G = BSGroup(p, q)
    metric = word_metric(G, 4)
    inner = set(metric.table)
    for g in bfs_ball(G, 6).elements:
        w = metric.length(g)
        assert w.lower <= w.upper
        if g not in inner:
            assert w.exact is None and w.lower >= 5


@pytest.mark.parametrize("p,q", GROUPS)
@given(n=st.integers(-10 ** 30, 10 ** 30))
def test_b_power_witness(p, q, n):
    word = b_power_word(n, p, q)
    G = BSGroup(p, q)
    assert G.reduce(word) == G.b_power(n)
    assert sum(abs(e) for _, e in word) == b_power_length(n, p, q) <= abs(n)


@pytest.mark.parametrize("p,q", GROUPS)
@given(w=st.lists(st.sampled_from("aAbB"), max_size=40).map("".join))
def test_witness_beats_normal_form_spelling(p, q, w):
    G = BSGroup(p, q)
    g = G.reduce(w)
    assert G.reduce(witness_word(g)) == g
    assert witness_length(g) == sum(abs(e) for _, e in witness_word(g))
    plain = sum(abs(r) + 1 for _, r in g.edges) + b_power_length(g.tail, p, q)
    assert witness_length(g) <= plain


def test_large_powers_compress():
    p, q = 2, 3
    # b^(3^k m) = a^k b^(2^k m) A^k
    for k in range(1, 30):
        assert b_power_length(3 ** k * 5, p, q) <= 2 * k + b_power_length(2 ** k * 5, p, q)
    lengths = [b_power_length(10 ** e, p, q) for e in (6, 12, 24)]
    assert lengths[1] < 2.5 * lengths[0] and lengths[2] < 2.5 * lengths[1]
