"""Group models with solvable word problem.

Every model exposes the same small contract: an identity payload, right
multiplication by a generator symbol, left multiplication, inversion and a
byte key.  Payloads are plain hashable tuples so they can be used directly
as dictionary keys by the search code.

Generator symbols are numbered so that ``s ^ 1`` is the formal inverse of
``s``.  For every family the letter comes before its inverse, which fixes
the ShortLex order used for tie-breaking.
"""
from __future__ import annotations

import hashlib
import itertools
import json
import struct
from dataclasses import dataclass
from typing import Iterable, Sequence


class GroupError(ValueError):
    """Raised for malformed group descriptions or foreign symbols."""


@dataclass(frozen=True)
class GeneratorSymbol:
    id: int
    label: str
    inverse_id: int


@dataclass(frozen=True)
class DefiningGraph:
    vertices: int
    edges: tuple

    def __post_init__(self):
        seen = set()
        for e in self.edges:
            i, j = e
            if i == j:
                raise GroupError(f"loop at vertex {i}")
            if not (0 <= i < self.vertices and 0 <= j < self.vertices):
                raise GroupError(f"edge {e} out of range")
            k = (min(i, j), max(i, j))
            if k in seen:
                raise GroupError(f"duplicate edge {e}")
            seen.add(k)

    @classmethod
    def path(cls, k: int) -> "DefiningGraph":
        return cls(k, tuple((i, i + 1) for i in range(k - 1)))

    def adjacency(self):
        adj = [[False] * self.vertices for _ in range(self.vertices)]
        for i, j in self.edges:
            adj[i][j] = adj[j][i] = True
        return adj


def _letter_labels(k: int) -> list[str]:
    if k <= 26:
        return [chr(ord("a") + i) for i in range(k)]
    return [f"x{i}" for i in range(k)]


def _symbols(letters: Sequence[str]) -> list[GeneratorSymbol]:
    out = []
    for i, lab in enumerate(letters):
        out.append(GeneratorSymbol(2 * i, lab, 2 * i + 1))
        out.append(GeneratorSymbol(2 * i + 1, lab + "^-1", 2 * i))
    return out


def _signed_perms(perms) -> list[tuple]:
    """Symbol maps for vertex permutations combined with inversions."""
    out = []
    for p in perms:
        k = len(p)
        for signs in itertools.product((0, 1), repeat=k):
            m = [0] * (2 * k)
            for i in range(k):
                m[2 * i] = 2 * p[i] + signs[i]
                m[2 * i + 1] = 2 * p[i] + (1 - signs[i])
            out.append(tuple(m))
    return sorted(out)


def _reduce_append(w: tuple, s: int) -> tuple:
    if w and w[-1] == s ^ 1:
        return w[:-1]
    return w + (s,)


def _reduce_prepend(s: int, w: tuple) -> tuple:
    if w and w[0] == s ^ 1:
        return w[1:]
    return (s,) + w


def free_reduce(word: Iterable[int]) -> tuple:
    out: list[int] = []
    for s in word:
        if out and out[-1] == s ^ 1:
            out.pop()
        else:
            out.append(s)
    return tuple(out)


def invert_word(word: Sequence[int]) -> list[int]:
    return [s ^ 1 for s in reversed(word)]


class GroupModel:
    """Base class.  Subclasses fill in the arithmetic."""

    family = "abstract"
    exact = True
    is_tree = False
    has_length = False

    def __init__(self, letters: Sequence[str]):
        self.generators = _symbols(letters)
        self.ngens = len(self.generators)
        self._by_label = {g.label: g.id for g in self.generators}
        if len(self._by_label) != self.ngens:
            raise GroupError("generator labels must be unique")

    # arithmetic, overridden
    identity: object = ()

    def mul(self, x, s: int):
        raise NotImplementedError

    def lmul(self, s: int, x):
        return self.inv(self.mul(self.inv(x), s ^ 1))

    def inv(self, x):
        return self.evaluate(invert_word(self.word_of(x)))

    def word_of(self, x) -> list[int]:
        """A word representing x (the normal-form word where one exists)."""
        raise NotImplementedError

    def length(self, x) -> int:
        """Exact word length; only meaningful when ``has_length``."""
        raise NotImplementedError

    def length_lower_bound(self, x) -> int:
        return 0

    def key(self, x) -> bytes:
        raise NotImplementedError

    def from_key(self, k: bytes):
        raise NotImplementedError

    def canon(self, x):
        """Hashable deduplication handle; equal to x for exact models."""
        return x

    def equal(self, x, y) -> bool:
        return x == y

    def abelianization(self, x) -> tuple:
        counts = [0] * (self.ngens // 2)
        for s in self.word_of(x):
            counts[s >> 1] += -1 if s & 1 else 1
        return tuple(counts)

    def automorphisms(self) -> list[tuple]:
        """Symbol permutations that extend to automorphisms.

        Each entry maps symbol id -> symbol id and respects inverses, so it
        is an isometry of the Cayley graph fixing the identity.
        """
        return [tuple(range(self.ngens))]

    def describe(self) -> dict:
        raise NotImplementedError

    # helpers shared by all families

    def check_symbol(self, s: int) -> int:
        if not isinstance(s, int) or not 0 <= s < self.ngens:
            raise GroupError(f"symbol {s!r} does not belong to this model")
        return s

    def evaluate(self, word: Iterable[int], start=None):
        x = self.identity if start is None else start
        for s in word:
            x = self.mul(x, self.check_symbol(s))
        return x

    def product(self, x, y):
        return self.evaluate(self.word_of(y), x)

    def is_identity(self, x) -> bool:
        return self.equal(x, self.identity)

    def apply_automorphism(self, perm: tuple, x):
        return self.evaluate(perm[s] for s in self.word_of(x))

    def group_hash(self) -> int:
        blob = json.dumps(self.describe(), sort_keys=True).encode()
        return int.from_bytes(hashlib.sha256(blob).digest()[:8], "little")

    def label(self, s: int) -> str:
        return self.generators[s].label

    def format_word(self, word: Sequence[int]) -> str:
        return " ".join(self.generators[s].label for s in word) or "1"

    def format(self, x) -> str:
        return self.format_word(self.word_of(x))

    def parse_word(self, text) -> list[int]:
        """Parse a word given as a list of ids or a string.

        Strings are whitespace separated labels (``a b^-1``), where ``⁻¹``
        is accepted for ``^-1``.  When all labels are single letters a
        compact form is also accepted with upper case meaning inverse
        (``abA``).  ``"1"`` and ``""`` denote the empty word.
        """
        if isinstance(text, (list, tuple)):
            return [self.check_symbol(int(s)) for s in text]
        text = text.replace("⁻¹", "^-1").strip()
        if text in ("", "1"):
            return []
        out = []
        for tok in text.split():
            if tok in self._by_label:
                out.append(self._by_label[tok])
                continue
            m = None
            if tok.endswith("^-1") and tok[:-3] in self._by_label:
                m = [self._by_label[tok[:-3]] ^ 1]
            elif self._compact_ok():
                m = []
                for ch in tok:
                    if ch in self._by_label:
                        m.append(self._by_label[ch])
                    elif ch.lower() in self._by_label and ch.isupper():
                        m.append(self._by_label[ch.lower()] ^ 1)
                    else:
                        m = None
                        break
            if m is None:
                raise GroupError(f"cannot parse token {tok!r}")
            out.extend(m)
        return out

    def _compact_ok(self) -> bool:
        base = [g.label for g in self.generators[0::2]]
        return all(len(b) == 1 and b.islower() for b in base)

    def element(self, text):
        return self.evaluate(self.parse_word(text))

    def __repr__(self):
        return f"<{type(self).__name__} {self.describe()}>"


class ZN(GroupModel):
    """Free abelian group; payload is the integer vector."""

    family = "zn"
    has_length = True

    def __init__(self, n: int):
        if not isinstance(n, int) or n < 1:
            raise GroupError("zn needs n >= 1")
        self.n = n
        super().__init__([f"e{i + 1}" for i in range(n)])
        self.identity = (0,) * n
        self._fmt = struct.Struct(f"<{n}i")

    def mul(self, x, s):
        i = s >> 1
        return x[:i] + (x[i] + (-1 if s & 1 else 1),) + x[i + 1:]

    def lmul(self, s, x):
        return self.mul(x, s)

    def inv(self, x):
        return tuple(-v for v in x)

    def word_of(self, x):
        out = []
        for i, v in enumerate(x):
            out.extend([2 * i + (v < 0)] * abs(v))
        return out

    def length(self, x):
        return sum(abs(v) for v in x)

    length_lower_bound = length

    def key(self, x):
        return self._fmt.pack(*x)

    def from_key(self, k):
        return self._fmt.unpack(k)

    def abelianization(self, x):
        return tuple(x)

    def automorphisms(self):
        return _signed_perms(list(itertools.permutations(range(self.n))))

    def describe(self):
        return {"family": "zn", "n": self.n}


class Free(GroupModel):
    """Free group; payload is the freely reduced word."""

    family = "free"
    has_length = True
    is_tree = True
    identity = ()

    def __init__(self, k: int):
        if not isinstance(k, int) or k < 1:
            raise GroupError("free needs k >= 1")
        self.k = k
        super().__init__(_letter_labels(k))

    def mul(self, x, s):
        return _reduce_append(x, s)

    def lmul(self, s, x):
        return _reduce_prepend(s, x)

    def inv(self, x):
        return tuple(s ^ 1 for s in reversed(x))

    def word_of(self, x):
        return list(x)

    def length(self, x):
        return len(x)

    def length_lower_bound(self, x):
        return len(x)

    def key(self, x):
        return bytes(x)

    def from_key(self, k):
        return tuple(k)

    def automorphisms(self):
        return _signed_perms(list(itertools.permutations(range(self.k))))

    def describe(self):
        return {"family": "free", "k": self.k}


class RAAG(GroupModel):
    """Right-angled Artin group with ShortLex-least normal forms.

    The payload is the ShortLex-least word among all words representing the
    element.  Multiplication keeps that invariant incrementally: a new letter
    first looks for a formal inverse it can reach through a commuting block,
    otherwise it slides left through commuting letters to the first position
    where it is smaller than the letter it lands in front of.
    """

    family = "raag"
    has_length = True
    identity = ()

    def __init__(self, graph: DefiningGraph, labels: Sequence[str] | None = None):
        self.graph = graph
        super().__init__(list(labels) if labels else _letter_labels(graph.vertices))
        self.comm = graph.adjacency()

    def mul(self, w, x):
        v = x >> 1
        comm = self.comm[v]
        n = len(w)
        for j in range(n - 1, -1, -1):
            y = w[j]
            if y == x ^ 1:
                return w[:j] + w[j + 1:]
            u = y >> 1
            if u == v or not comm[u]:
                break
        pos = n
        for j in range(n - 1, -1, -1):
            y = w[j]
            u = y >> 1
            if u == v or not comm[u]:
                break
            if y > x:
                pos = j
        return w[:pos] + (x,) + w[pos:]

    def inv(self, w):
        x = ()
        for s in reversed(w):
            x = self.mul(x, s ^ 1)
        return x

    def word_of(self, x):
        return list(x)

    def length(self, x):
        return len(x)

    def length_lower_bound(self, x):
        return len(x)

    def key(self, x):
        return bytes(x)

    def from_key(self, k):
        return tuple(k)

    def automorphisms(self):
        k = self.graph.vertices
        edges = {frozenset(e) for e in self.graph.edges}
        perms = []
        if k <= 8:
            for p in itertools.permutations(range(k)):
                if all(frozenset((p[i], p[j])) in edges for i, j in self.graph.edges):
                    perms.append(p)
        else:
            perms.append(tuple(range(k)))
        return _signed_perms(perms)

    def describe(self):
        return {
            "family": "raag",
            "graph": {"vertices": self.graph.vertices, "edges": [list(e) for e in self.graph.edges]},
        }


def _join_keys(parts: Sequence[bytes]) -> bytes:
    return b"".join(struct.pack("<H", len(p)) + p for p in parts)


def _split_keys(k: bytes) -> list[bytes]:
    out, i = [], 0
    while i < len(k):
        (n,) = struct.unpack_from("<H", k, i)
        out.append(k[i + 2:i + 2 + n])
        i += 2 + n
    return out


def _merged_labels(a: GroupModel, b: GroupModel) -> list[str]:
    la = [g.label for g in a.generators[0::2]]
    lb = [g.label for g in b.generators[0::2]]
    if set(la) & set(lb):
        la = [f"{x}_1" for x in la]
        lb = [f"{x}_2" for x in lb]
    return la + lb


class DirectProduct(GroupModel):
    family = "direct"

    def __init__(self, a: GroupModel, b: GroupModel):
        if not (a.exact and b.exact):
            raise GroupError("direct product needs exact factors")
        self.A, self.B = a, b
        super().__init__(_merged_labels(a, b))
        self.off = a.ngens
        self.identity = (a.identity, b.identity)
        self.has_length = a.has_length and b.has_length
        self.is_tree = False

    def mul(self, x, s):
        if s < self.off:
            return (self.A.mul(x[0], s), x[1])
        return (x[0], self.B.mul(x[1], s - self.off))

    def lmul(self, s, x):
        if s < self.off:
            return (self.A.lmul(s, x[0]), x[1])
        return (x[0], self.B.lmul(s - self.off, x[1]))

    def inv(self, x):
        return (self.A.inv(x[0]), self.B.inv(x[1]))

    def word_of(self, x):
        return self.A.word_of(x[0]) + [s + self.off for s in self.B.word_of(x[1])]

    def length(self, x):
        return self.A.length(x[0]) + self.B.length(x[1])

    def length_lower_bound(self, x):
        return self.A.length_lower_bound(x[0]) + self.B.length_lower_bound(x[1])

    def key(self, x):
        return _join_keys([self.A.key(x[0]), self.B.key(x[1])])

    def from_key(self, k):
        ka, kb = _split_keys(k)
        return (self.A.from_key(ka), self.B.from_key(kb))

    def abelianization(self, x):
        return self.A.abelianization(x[0]) + self.B.abelianization(x[1])

    def automorphisms(self):
        out = []
        for pa in self.A.automorphisms():
            for pb in self.B.automorphisms():
                out.append(tuple(pa) + tuple(s + self.off for s in pb))
        return sorted(out)

    def describe(self):
        return {"family": "direct", "factors": [self.A.describe(), self.B.describe()]}


class FreeProduct(GroupModel):
    """Free product; payload is the alternating tuple of (factor, element)."""

    family = "freeprod"
    identity = ()

    def __init__(self, a: GroupModel, b: GroupModel):
        if not (a.exact and b.exact):
            raise GroupError("free product needs exact factors")
        self.F = (a, b)
        super().__init__(_merged_labels(a, b))
        self.off = a.ngens
        self.has_length = a.has_length and b.has_length
        self.is_tree = a.is_tree and b.is_tree

    def _split(self, s):
        return (0, s) if s < self.off else (1, s - self.off)

    def mul(self, x, s):
        f, t = self._split(s)
        F = self.F[f]
        if x and x[-1][0] == f:
            y = F.mul(x[-1][1], t)
            if y == F.identity:
                return x[:-1]
            return x[:-1] + ((f, y),)
        return x + ((f, F.mul(F.identity, t)),)

    def lmul(self, s, x):
        f, t = self._split(s)
        F = self.F[f]
        if x and x[0][0] == f:
            y = F.lmul(t, x[0][1])
            if y == F.identity:
                return x[1:]
            return ((f, y),) + x[1:]
        return ((f, F.lmul(t, F.identity)),) + x

    def inv(self, x):
        return tuple((f, self.F[f].inv(y)) for f, y in reversed(x))

    def word_of(self, x):
        out = []
        for f, y in x:
            sh = 0 if f == 0 else self.off
            out.extend(s + sh for s in self.F[f].word_of(y))
        return out

    def length(self, x):
        return sum(self.F[f].length(y) for f, y in x)

    def length_lower_bound(self, x):
        return sum(self.F[f].length_lower_bound(y) for f, y in x)

    def key(self, x):
        return _join_keys([bytes([f]) + self.F[f].key(y) for f, y in x])

    def from_key(self, k):
        return tuple((p[0], self.F[p[0]].from_key(p[1:])) for p in _split_keys(k))

    def abelianization(self, x):
        va = [0] * (self.off // 2)
        vb = [0] * ((self.ngens - self.off) // 2)
        for f, y in x:
            tgt = va if f == 0 else vb
            for i, c in enumerate(self.F[f].abelianization(y)):
                tgt[i] += c
        return tuple(va + vb)

    def automorphisms(self):
        out = []
        for pa in self.F[0].automorphisms():
            for pb in self.F[1].automorphisms():
                out.append(tuple(pa) + tuple(s + self.off for s in pb))
        return sorted(out)

    def describe(self):
        return {"family": "freeprod", "factors": [self.F[0].describe(), self.F[1].describe()]}


_A, _AI, _B, _BI, _T, _TI = range(6)


def _phi_word(w: tuple, m: int) -> tuple:
    """Apply phi^m to a reduced word over a, b (ids 0..3)."""
    if m == 0:
        return w
    out: list[int] = []
    bs = [_B] * m if m > 0 else [_BI] * (-m)
    bsi = [s ^ 1 for s in bs]
    for s in w:
        if s == _A:
            img = [_A] + bs
        elif s == _AI:
            img = bsi + [_AI]
        else:
            img = [s]
        for y in img:
            if out and out[-1] == y ^ 1:
                out.pop()
            else:
                out.append(y)
    return tuple(out)


class Gersten(GroupModel):
    """F2 x| Z with phi(a) = ab, phi(b) = b.

    Payload ``(w, m)`` stands for ``w t^m`` with w a reduced word in a, b.
    Normal form length is not the word metric; distances come from balls.
    """

    family = "gersten"
    identity = ((), 0)

    def __init__(self):
        super().__init__(["a", "b", "t"])

    def mul(self, x, s):
        w, m = x
        if s == _A:
            w = _reduce_append(w, _A)
            y = _B if m > 0 else _BI
            for _ in range(abs(m)):
                w = _reduce_append(w, y)
            return (w, m)
        if s == _AI:
            y = _BI if m > 0 else _B
            for _ in range(abs(m)):
                w = _reduce_append(w, y)
            return (_reduce_append(w, _AI), m)
        if s == _B or s == _BI:
            return (_reduce_append(w, s), m)
        return (w, m + (1 if s == _T else -1))

    def lmul(self, s, x):
        w, m = x
        if s < _T:
            return (_reduce_prepend(s, w), m)
        if s == _T:
            return (_phi_word(w, 1), m + 1)
        return (_phi_word(w, -1), m - 1)

    def inv(self, x):
        w, m = x
        winv = tuple(s ^ 1 for s in reversed(w))
        return (_phi_word(winv, -m), -m)

    def word_of(self, x):
        w, m = x
        return list(w) + ([_T] * m if m > 0 else [_TI] * (-m))

    def length_lower_bound(self, x):
        w, m = x
        ea = 0
        for s in w:
            if s == _A:
                ea += 1
            elif s == _AI:
                ea -= 1
        return abs(ea) + abs(m)

    def abelianization(self, x):
        w, m = x
        ea = sum(1 if s == _A else -1 if s == _AI else 0 for s in w)
        return (ea, m)

    def key(self, x):
        return struct.pack("<i", x[1]) + bytes(x[0])

    def from_key(self, k):
        (m,) = struct.unpack_from("<i", k, 0)
        return (tuple(k[4:]), m)

    def automorphisms(self):
        # a -> a, b -> b^-1, t -> t^-1 preserves both relations
        return [tuple(range(6)), (_A, _AI, _BI, _B, _TI, _T)]

    def describe(self):
        return {"family": "gersten"}


class CyclicAmalgam(GroupModel):
    """A *_{<uA> = <uB>} B with equality decided by pinching.

    Payload: a tuple of syllables (f, x) alternating between the factors,
    none lying in the edge group except a lone syllable, which is then kept
    in factor A.  Such sequences are not canonical (edge elements can slide
    between neighbours), so keys are only bucket hashes and equality goes
    through reduction of x y^-1.
    """

    family = "amalgam"
    exact = False
    identity = ()

    def __init__(self, a: GroupModel, b: GroupModel, ua, ub):
        for f in (a, b):
            if not f.exact:
                raise GroupError("nested amalgams are not supported")
        if a.is_identity(ua) or b.is_identity(ub):
            raise GroupError("edge elements must be nontrivial")
        self.F = (a, b)
        self.u = (ua, ub)
        self.uinv = (a.inv(ua), b.inv(ub))
        self.uwords = (a.word_of(ua), b.word_of(ub))
        super().__init__(_merged_labels(a, b))
        self.off = a.ngens
        self._powers = [{a.identity: 0}, {b.identity: 0}]
        self._bypow = [{0: a.identity}, {0: b.identity}]
        self._pmax = [0, 0]
        self._pos = [a.identity, b.identity]
        self._neg = [a.identity, b.identity]
        abA = a.abelianization(ua)
        abB = b.abelianization(ub)
        self._relvec = tuple(abA) + tuple(-c for c in abB)

    def power_cap(self, m: int) -> int:
        return m

    def _grow_powers(self, f, k):
        F = self.F[f]
        while self._pmax[f] < k:
            self._pmax[f] += 1
            self._pos[f] = F.product(self._pos[f], self.u[f])
            self._neg[f] = F.product(self._neg[f], self.uinv[f])
            self._powers[f].setdefault(self._pos[f], self._pmax[f])
            self._powers[f].setdefault(self._neg[f], -self._pmax[f])
            self._bypow[f][self._pmax[f]] = self._pos[f]
            self._bypow[f][-self._pmax[f]] = self._neg[f]

    def edge_power(self, f: int, x):
        """k with x = u_f^k, or None.  Only |k| <= power_cap(|x|) is tried."""
        cap = self.power_cap(len(self.F[f].word_of(x)))
        self._grow_powers(f, cap)
        k = self._powers[f].get(x)
        if k is not None and abs(k) <= cap:
            return k
        return None

    def _upow(self, f, k):
        self._grow_powers(f, abs(k))
        return self._bypow[f][k]

    def _gen_elem(self, s):
        f = 0 if s < self.off else 1
        t = s if f == 0 else s - self.off
        F = self.F[f]
        return f, F.mul(F.identity, t)

    def _push(self, sylls: list, f: int, y):
        F = self.F
        while True:
            if sylls and sylls[-1][0] == f:
                y = F[f].product(sylls.pop()[1], y)
                if F[f].is_identity(y):
                    return
            elif len(sylls) == 1 and self.edge_power(sylls[0][0], sylls[0][1]) is not None:
                # a lone edge element is absorbed into the incoming factor
                g, z = sylls.pop()
                k = self.edge_power(g, z)
                y = F[f].product(self._upow(f, k), y)
                if F[f].is_identity(y):
                    return
                continue
            k = self.edge_power(f, y)
            if k is None:
                sylls.append((f, y))
                return
            if not sylls:
                sylls.append((0, self._upow(0, k)))
                return
            f = 1 - f
            y = self._upow(f, k)

    def mul(self, x, s):
        sylls = list(x)
        f, y = self._gen_elem(self.check_symbol(s))
        self._push(sylls, f, y)
        return tuple(sylls)

    def inv(self, x):
        return tuple((f, self.F[f].inv(y)) for f, y in reversed(x))

    def times(self, x, y):
        sylls = list(x)
        for f, z in y:
            self._push(sylls, f, z)
        return tuple(sylls)

    def equal(self, x, y):
        return self.times(x, self.inv(y)) == ()

    def is_identity(self, x):
        return x == ()

    def word_of(self, x):
        out = []
        for f, y in x:
            sh = 0 if f == 0 else self.off
            out.extend(s + sh for s in self.F[f].word_of(y))
        return out

    def abelianization(self, x):
        na = len(self.F[0].abelianization(self.F[0].identity))
        vec = [0] * len(self._relvec)
        for f, y in x:
            ab = self.F[f].abelianization(y)
            sh = 0 if f == 0 else na
            for i, c in enumerate(ab):
                vec[sh + i] += c
        v = self._relvec
        piv = next((i for i, c in enumerate(v) if c), None)
        if piv is not None:
            p = v[piv]
            if p < 0:
                v = tuple(-c for c in v)
                p = -p
            q = vec[piv] // p
            vec = [c - q * d for c, d in zip(vec, v)]
        return tuple(vec)

    def key(self, x):
        ab = self.abelianization(x)
        return struct.pack(f"<I{len(ab)}i", len(x), *ab)

    def canon(self, x):
        return self.key(x)

    def describe(self):
        return {
            "family": "amalgam",
            "A": self.F[0].describe(),
            "B": self.F[1].describe(),
            "uA": self.F[0].word_of(self.u[0]),
            "uB": self.F[1].word_of(self.u[1]),
        }


# constructors with the documented names

def make_zn(n: int) -> ZN:
    return ZN(n)


def make_free(k: int) -> Free:
    return Free(k)


def make_raag(graph: DefiningGraph, labels=None) -> RAAG:
    return RAAG(graph, labels)


def make_direct_product(a: GroupModel, b: GroupModel) -> DirectProduct:
    return DirectProduct(a, b)


def make_free_product(a: GroupModel, b: GroupModel) -> FreeProduct:
    return FreeProduct(a, b)


def make_gersten() -> Gersten:
    return Gersten()


def make_cyclic_amalgam(a: GroupModel, b: GroupModel, ua, ub) -> CyclicAmalgam:
    return CyclicAmalgam(a, b, ua, ub)


def path_raag(k: int) -> RAAG:
    return RAAG(DefiningGraph.path(k))


def _graph_from(d: dict) -> DefiningGraph:
    try:
        k = int(d["vertices"])
        edges = tuple(tuple(int(v) for v in e) for e in d.get("edges", []))
    except (KeyError, TypeError, ValueError) as exc:
        raise GroupError(f"bad graph description: {exc}") from None
    return DefiningGraph(k, edges)


def make_group(desc: dict) -> GroupModel:
    """Build a model from its JSON description."""
    if not isinstance(desc, dict) or "family" not in desc:
        raise GroupError("group description needs a 'family' field")
    fam = desc["family"]
    if fam == "zn":
        return ZN(desc.get("n", 0))
    if fam == "free":
        return Free(desc.get("k", desc.get("rank", 0)))
    if fam == "raag":
        g = desc.get("graph", desc)
        if "path" in desc:
            return path_raag(int(desc["path"]))
        return RAAG(_graph_from(g), desc.get("labels"))
    if fam in ("direct", "freeprod"):
        fac = desc.get("factors")
        if not isinstance(fac, list) or len(fac) != 2:
            raise GroupError(f"{fam} needs exactly two factors")
        a, b = make_group(fac[0]), make_group(fac[1])
        return DirectProduct(a, b) if fam == "direct" else FreeProduct(a, b)
    if fam == "gersten":
        return Gersten()
    if fam == "amalgam":
        a, b = make_group(desc["A"]), make_group(desc["B"])
        ua = a.element(desc["uA"])
        ub = b.element(desc["uB"])
        return CyclicAmalgam(a, b, ua, ub)
    raise GroupError(f"unknown family {fam!r}")
