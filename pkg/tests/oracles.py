"""Reference implementations kept independent of the package internals."""

import random
from collections import deque


def letters_of(word):
    """'a b^2 A' -> ['a', 'b', 'b', 'A'] without using the package parser."""
    out = []
    for tok in word.split():
        base, _, exp = tok.partition("^")
        n = int(exp) if exp else 1
        letter = base if n > 0 else base.swapcase()
        out.extend([letter] * abs(n))
    return out


def _free_reduce(syl):
    out = []
    for kind, val in syl:
        if kind == "b" and val == 0:
            continue
        if out and out[-1][0] == kind == "b":
            v = out[-1][1] + val
            out.pop()
            if v:
                out.append(("b", v))
        elif out and out[-1][0] == kind == "a" and out[-1][1] == -val:
            out.pop()
        else:
            out.append((kind, val))
    return out


def is_trivial(letters, p, q):
    """Pinch search: repeatedly remove a b^r A (p divides r) and A b^r a (q divides r)."""
    syl = [("a", 1) if x == "a" else ("a", -1) if x == "A" else ("b", 1 if x == "b" else -1)
           for x in letters]
    syl = _free_reduce(syl)
    while True:
        for i in range(len(syl) - 2):
            (k1, e1), (k2, r), (k3, e3) = syl[i:i + 3]
            if k1 == k3 == "a" and k2 == "b" and e1 == -e3:
                if e1 == 1 and r % p == 0:
                    syl = _free_reduce(syl[:i] + [("b", r // p * q)] + syl[i + 3:])
                    break
                if e1 == -1 and r % abs(q) == 0:
                    syl = _free_reduce(syl[:i] + [("b", r // q * p)] + syl[i + 3:])
                    break
        else:
            return not syl


def inverse_letters(letters):
    return [x.swapcase() for x in reversed(letters)]


def relator(p, q):
    r = ["a"] + (["b"] * p if p > 0 else ["B"] * -p) + ["A"]
    r += ["B"] * q if q > 0 else ["b"] * -q
    return r


def random_letters(rng, n):
    return [rng.choice("aAbB") for _ in range(n)]


def random_trivial(rng, p, q, max_len=40):
    """A product of conjugated relators, free of any reduction."""
    while True:
        w = []
        for _ in range(rng.randint(1, 2)):
            u = random_letters(rng, rng.randint(0, 5))
            r = relator(p, q)
            if rng.random() < 0.5:
                r = inverse_letters(r)
            w += u + r + inverse_letters(u)
        if len(w) <= max_len:
            return w


def word_sample(seed, count, p, q, max_len=40):
    rng = random.Random(seed)
    out = []
    for i in range(count):
        if i % 2:
            out.append(random_trivial(rng, p, q, max_len))
        else:
            out.append(random_letters(rng, rng.randint(0, max_len)))
    return out


def bfs_distances(start, neighbours, limit=None):
    dist = {start: 0}
    queue = deque([start])
    while queue:
        x = queue.popleft()
        if limit is not None and dist[x] >= limit:
            continue
        for y in neighbours(x):
            if y not in dist:
                dist[y] = dist[x] + 1
                queue.append(y)
    return dist
