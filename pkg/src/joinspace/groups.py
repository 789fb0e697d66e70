"""Word arithmetic for the group presets used to build Cayley balls.

Free products of cyclic groups (including free groups) have an exact normal
form, so their Cayley graphs never need to be stored.  Triangle groups use
the faithful reflection representation to identify words, and arbitrary
finite presentations use Dehn-style rewriting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

IDENTITY = "e"


class PresentationError(ValueError):
    """Raised when a presentation cannot be turned into a consistent ball."""


def _letter(i: int, sign: int) -> str:
    c = "abcdfghijklmnopqrstuvwxyz"[i]
    return c if sign > 0 else c.upper()


@dataclass(frozen=True)
class FreeProduct:
    """Free product of cyclic groups; order 0 means infinite cyclic.

    Elements are tuples of syllables ``(generator index, exponent)``.  For a
    finite order ``p`` the exponent is kept in ``1..p-1``.  Letter names are
    a, b, c, d, f, ... (``e`` is reserved for the identity) and upper case
    letters denote inverses.
    """

    orders: tuple

    @property
    def rank(self) -> int:
        return len(self.orders)

    def generators(self) -> list:
        """Elements joined to the identity by an edge of the Cayley graph."""
        gens = []
        for i, p in enumerate(self.orders):
            gens.append(((i, 1),))
            inv = self._norm(i, -1)
            if inv is not None and (i, inv) != (i, 1):
                gens.append(((i, inv),))
        return gens

    def _norm(self, i: int, k: int):
        p = self.orders[i]
        if p:
            k %= p
        return k if k != 0 else None

    def mul(self, u: tuple, v: tuple) -> tuple:
        out = list(u)
        for i, k in v:
            if out and out[-1][0] == i:
                j, k0 = out.pop()
                nk = self._norm(i, k0 + k)
                if nk is not None:
                    out.append((i, nk))
            else:
                nk = self._norm(i, k)
                if nk is not None:
                    out.append((i, nk))
        return tuple(out)

    def inv(self, u: tuple) -> tuple:
        return tuple((i, self._norm(i, -k)) for i, k in reversed(u))

    def syllable_length(self, i: int, k: int) -> int:
        p = self.orders[i]
        if p == 0:
            return abs(k)
        return min(k, p - k)

    def length(self, u: tuple) -> int:
        return sum(self.syllable_length(i, k) for i, k in u)

    def dist(self, u: tuple, v: tuple) -> int:
        return self.length(self.mul(self.inv(u), v))

    def to_word(self, u: tuple) -> str:
        if not u:
            return IDENTITY
        parts = []
        for i, k in u:
            p = self.orders[i]
            if p == 0:
                parts.append(_letter(i, 1 if k > 0 else -1) * abs(k))
            elif k <= p - k:
                parts.append(_letter(i, 1) * k)
            else:
                parts.append(_letter(i, -1) * (p - k))
        return "".join(parts)

    def parse(self, word: str) -> tuple:
        if word in (IDENTITY, ""):
            return ()
        out = ()
        for ch in word:
            i = "abcdfghijklmnopqrstuvwxyz".find(ch.lower())
            if i < 0 or i >= self.rank:
                raise PresentationError(f"unknown letter {ch!r} in {word!r}")
            out = self.mul(out, ((i, 1 if ch.islower() else -1),))
        return out

    def ball(self, radius: int):
        """Yield elements of length <= radius in breadth-first order."""
        frontier = [()]
        seen = {()}
        yield ()
        gens = self.generators()
        for _ in range(radius):
            nxt = []
            for u in frontier:
                for g in gens:
                    w = self.mul(u, g)
                    if w not in seen and self.length(w) == self.length(u) + 1:
                        seen.add(w)
                        nxt.append(w)
            for w in nxt:
                yield w
            frontier = nxt

    def count_ball(self, radius: int) -> int:
        return sum(1 for _ in self.ball(radius))

    def letter_swap(self, perm: Sequence[int]) -> "callable":
        """Automorphism permuting generators of equal order."""
        if any(self.orders[i] != self.orders[j] for i, j in enumerate(perm)):
            raise PresentationError("permuted generators must have equal orders")

        def f(u: tuple) -> tuple:
            return tuple((perm[i], k) for i, k in u)

        return f


PRESETS = {
    "f2": (0, 0),
    "f3": (0, 0, 0),
    "z2*z3": (2, 3),
    "z3*z3": (3, 3),
    "z2*z2*z2": (2, 2, 2),
}


def coxeter_triangle_matrices(p: int, q: int, r: int) -> list:
    """Reflection representation of the Coxeter group with labels (p, q, r).

    Generators s0, s1, s2 with (s0 s1)^p = (s1 s2)^q = (s2 s0)^r = 1.
    """
    m = {(0, 1): p, (1, 2): q, (0, 2): r}
    B = np.eye(3)
    for (i, j), mij in m.items():
        B[i, j] = B[j, i] = -math.cos(math.pi / mij)
    mats = []
    for s in range(3):
        M = np.eye(3)
        # sigma_s(v) = v - 2 B(e_s, v) e_s
        M[s, :] -= 2.0 * B[s, :]
        mats.append(M)
    return mats


def _matrix_key(M: np.ndarray) -> tuple:
    return tuple(np.round(M.flatten(), 6) + 0.0)


def triangle_ball(p: int, q: int, r: int, radius: int):
    """Cayley ball of a (p,q,r) reflection triangle group.

    Returns ``(words, edges)`` where words are strings over a, b, c.
    Identification uses the reflection representation, which is faithful.
    """
    mats = coxeter_triangle_matrices(p, q, r)
    letters = "abc"
    key0 = _matrix_key(np.eye(3))
    words = [IDENTITY]
    elems = [np.eye(3)]
    index = {key0: 0}
    edges = set()
    frontier = [0]
    for _ in range(radius):
        nxt = []
        for v in frontier:
            for s, M in enumerate(mats):
                W = elems[v] @ M
                k = _matrix_key(W)
                if k not in index:
                    index[k] = len(words)
                    w = words[v]
                    words.append((w if w != IDENTITY else "") + letters[s])
                    elems.append(W)
                    nxt.append(index[k])
                u = index[k]
                if u != v:
                    edges.add((min(u, v), max(u, v)))
        frontier = nxt
    # close edges among the outer sphere
    for v in frontier:
        for M in mats:
            k = _matrix_key(elems[v] @ M)
            if k in index and index[k] != v:
                u = index[k]
                edges.add((min(u, v), max(u, v)))
    return words, sorted(edges)


def _free_reduce(word: list) -> list:
    out = []
    for x in word:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return out


class DehnRewriter:
    """Dehn's algorithm for a finite presentation.

    Letters are non-zero ints (``-i`` is the inverse of ``i``).  Any subword
    that is more than half of a cyclic conjugate of a relator (or its
    inverse) is replaced by the inverse of the complement.
    """

    def __init__(self, relators: list):
        self.pieces = []
        for rel in relators:
            rel = _free_reduce(list(rel))
            if not rel:
                continue
            n = len(rel)
            for cand in (rel, [-x for x in reversed(rel)]):
                for s in range(n):
                    cyc = cand[s:] + cand[:s]
                    for k in range(n // 2 + 1, n + 1):
                        lhs = tuple(cyc[:k])
                        rhs = tuple(-x for x in reversed(cyc[k:]))
                        self.pieces.append((lhs, rhs))
        self.pieces.sort(key=lambda pr: -len(pr[0]))

    def reduce(self, word: list) -> list:
        w = _free_reduce(list(word))
        changed = True
        while changed:
            changed = False
            for lhs, rhs in self.pieces:
                k = len(lhs)
                for i in range(len(w) - k + 1):
                    if tuple(w[i:i + k]) == lhs:
                        w = _free_reduce(w[:i] + list(rhs) + w[i + k:])
                        changed = True
                        break
                if changed:
                    break
        return w

    def is_trivial(self, word: list) -> bool:
        return not self.reduce(word)


def parse_relator(text: str, generators: list) -> list:
    """Parse a relator like ``"abAB"`` or ``"a^3"`` into signed ints."""
    out = []
    i = 0
    names = {g: n + 1 for n, g in enumerate(generators)}
    while i < len(text):
        ch = text[i]
        if ch.lower() in names and ch.lower() == ch:
            x = names[ch]
        elif ch.lower() in names:
            x = -names[ch.lower()]
        else:
            raise PresentationError(f"unknown generator {ch!r} in relator {text!r}")
        i += 1
        power = 1
        if i < len(text) and text[i] == "^":
            j = i + 1
            while j < len(text) and (text[j].isdigit() or text[j] == "-"):
                j += 1
            power = int(text[i + 1:j])
            i = j
        out.extend([x if power > 0 else -x] * abs(power))
    return out


def presentation_ball(generators: list, relators: list, radius: int):
    """Cayley ball of a finite presentation using Dehn rewriting.

    After building, every relator is read from every vertex deep enough in
    the ball; if some relator loop fails to close the rewriting is not a
    valid solution of the word problem at this scale and
    ``PresentationError`` is raised.
    """
    for g in generators:
        if len(g) != 1 or not g.islower() or g == IDENTITY:
            raise PresentationError(f"generator names must be single lower-case letters other than 'e': {g!r}")
    rels = [parse_relator(r, generators) for r in relators]
    dehn = DehnRewriter(rels)
    letters = []
    for n in range(1, len(generators) + 1):
        letters.extend([n, -n])

    def name(w):
        if not w:
            return IDENTITY
        return "".join(generators[abs(x) - 1] if x > 0 else generators[abs(x) - 1].upper() for x in w)

    words = [[]]
    spheres = [[0]]
    edges = set()
    step = {}
    for rad in range(1, radius + 1):
        sphere = []
        for v in spheres[-1]:
            for x in letters:
                w = _free_reduce(words[v] + [x])
                target = _lookup(w, words, spheres + [sphere], dehn, rad)
                if target is None:
                    target = len(words)
                    words.append(w)
                    sphere.append(target)
                step[(v, x)] = target
                if target != v:
                    edges.add((min(v, target), max(v, target)))
        spheres.append(sphere)
    # edges among the outermost sphere
    outer = spheres[-1]
    for v in outer:
        for x in letters:
            w = _free_reduce(words[v] + [x])
            t = _lookup(w, words, spheres, dehn, radius)
            if t is not None and t != v:
                edges.add((min(v, t), max(v, t)))
            if t is not None:
                step[(v, x)] = t
    _check_relators(rels, words, spheres, step, radius)
    return [name(w) for w in words], sorted(edges)


def _lookup(w, words, spheres, dehn, rad):
    # a neighbour of a vertex at distance rad - 1 lies at distance rad - 2, rad - 1 or rad
    inv = [-x for x in reversed(w)]
    for level in range(max(0, rad - 2), min(rad, len(spheres) - 1) + 1):
        for v in spheres[level]:
            if dehn.is_trivial(words[v] + inv):
                return v
    return None


def _check_relators(rels, words, spheres, step, radius):
    if not rels:
        return
    longest = max(len(r) for r in rels)
    depth = radius - (longest + 1) // 2
    for level in range(0, max(depth, 0) + 1):
        for v in spheres[level]:
            for rel in rels:
                cur = v
                for x in rel:
                    cur = step.get((cur, x))
                    if cur is None:
                        break
                if cur != v:
                    raise PresentationError(
                        "relator rewriting did not stabilize within the word-length bound "
                        f"(relator loop from vertex {v} does not close)"
                    )
