"""Balls, distances and path search in Cayley graphs.

The central routine is :func:`avoidant_path`, an A* search from ``a`` to
``b`` that skips every vertex of an open forbidden ball and every vertex
outside an ambient ball around the identity.  The heuristic is the word
length of ``b^-1 v`` (exact for models with a length function, otherwise a
ball lookup with a lower bound outside the ball), which is consistent, so
the first time ``b`` is popped its label is the restricted distance.
"""
from __future__ import annotations

import heapq
import struct
from dataclasses import dataclass
from typing import Iterable, Optional

from .groups import GroupModel, GroupError

CACHE_VERSION = 1
CACHE_MAGIC = b"DVLB"

# rough memory cost of one ball entry in CPython, used for budgeting
ENTRY_BYTES = 320


class ResourceLimit(RuntimeError):
    """A memory or node budget was exhausted."""

    def __init__(self, msg, achieved=None):
        super().__init__(msg)
        self.achieved = achieved


# ---------------------------------------------------------------- values

@dataclass(frozen=True)
class ExtendedLength:
    """Finite(k), Infinite (certified) or Censored(lower bound)."""

    tag: str
    value: Optional[int] = None
    upper: Optional[int] = None
    note: str = ""

    @property
    def is_finite(self):
        return self.tag == "finite"

    @property
    def is_infinite(self):
        return self.tag == "infinite"

    @property
    def is_censored(self):
        return self.tag == "censored"

    def __str__(self):
        if self.tag == "finite":
            return f"Finite({self.value})"
        if self.tag == "infinite":
            return "Infinite"
        return f"Censored(>={self.value})"


def Finite(k: int) -> ExtendedLength:
    return ExtendedLength("finite", int(k))


def Infinite(note: str = "") -> ExtendedLength:
    return ExtendedLength("infinite", None, None, note)


def Censored(lower: int, upper: Optional[int] = None, note: str = "") -> ExtendedLength:
    return ExtendedLength("censored", max(1, int(lower)), upper, note)


@dataclass
class PathQuery:
    a: object
    b: object
    forbidden_center: object
    forbidden_radius: float
    ambient_radius: int


def default_ambient(d: int, mult: float = 3.0, extra: int = 8, cap: Optional[int] = None) -> int:
    amb = max(int(mult * d), d + extra)
    return min(amb, cap) if cap else amb


# ---------------------------------------------------------------- balls

class Ball:
    """Closed ball around the identity with BFS distances and parents.

    ``parents`` holds, for each element, the least symbol s such that
    x = p s with p one layer closer to the identity.
    """

    def __init__(self, model: GroupModel):
        self.model = model
        self.radius = -1
        self.elems: list = []
        self.dists: list[int] = []
        self.parents: list[int] = []
        self.layers: list[list[int]] = []
        self._index: dict = {}

    def __len__(self):
        return len(self.elems)

    def _lookup(self, x) -> Optional[int]:
        G = self.model
        h = G.canon(x)
        if G.exact:
            return self._index.get(h)
        for i in self._index.get(h, ()):
            if G.equal(self.elems[i], x):
                return i
        return None

    def _add(self, x, d, parent) -> int:
        i = len(self.elems)
        self.elems.append(x)
        self.dists.append(d)
        self.parents.append(parent)
        h = self.model.canon(x)
        if self.model.exact:
            self._index[h] = i
        else:
            self._index.setdefault(h, []).append(i)
        return i

    def __contains__(self, x):
        return self._lookup(x) is not None

    def dist_of(self, x) -> Optional[int]:
        i = self._lookup(x)
        return None if i is None else self.dists[i]

    def parent_of(self, x) -> Optional[int]:
        i = self._lookup(x)
        if i is None:
            raise KeyError("element outside ball")
        p = self.parents[i]
        return None if p < 0 else p

    def entries(self):
        """(key, element, dist, parent symbol or None) in sorted order."""
        G = self.model
        for layer in self.layers:
            for i in layer:
                p = self.parents[i]
                yield G.key(self.elems[i]), self.elems[i], self.dists[i], (None if p < 0 else p)

    def sphere_sizes(self) -> list[int]:
        return [len(L) for L in self.layers]


def build_ball(G: GroupModel, R: int, budget_mb: Optional[float] = None) -> Ball:
    """Breadth-first closure of the identity up to radius R."""
    if R < 0:
        raise ValueError("radius must be nonnegative")
    ball = Ball(G)
    limit = None if budget_mb is None else int(budget_mb * 2 ** 20 / ENTRY_BYTES)
    ball._add(G.identity, 0, -1)
    ball.layers.append([0])
    ball.radius = 0
    for d in range(1, R + 1):
        prev = ball.layers[-1]
        if limit is not None and d >= 2:
            ratio = len(prev) / max(1, len(ball.layers[-2]))
            if len(ball) + len(prev) * ratio > limit:
                raise ResourceLimit(
                    f"ball budget exceeded; achieved radius {d - 1}", achieved=d - 1)
        new = []
        for i in prev:
            p = ball.elems[i]
            for s in range(G.ngens):
                y = G.mul(p, s)
                j = ball._lookup(y)
                if j is None:
                    new.append(ball._add(y, d, s))
                elif ball.dists[j] == d and s < ball.parents[j]:
                    ball.parents[j] = s
        new.sort(key=lambda j: G.key(ball.elems[j]))
        ball.layers.append(new)
        ball.radius = d
    return ball


def sphere(ball: Ball, r: int) -> list:
    if r < 0 or r > ball.radius:
        raise ValueError(f"sphere radius {r} outside ball radius {ball.radius}")
    return [ball.elems[i] for i in ball.layers[r]]


def distance(ball: Ball, x, y) -> Optional[int]:
    G = ball.model
    return ball.dist_of(G.product(G.inv(x), y))


def geodesic(ball: Ball, x, y) -> list[int]:
    """Deterministic geodesic word from x to y by parent backtracking."""
    G = ball.model
    z = G.product(G.inv(x), y)
    if z not in ball:
        raise ValueError("x^-1 y outside ball")
    word = []
    while True:
        s = ball.parent_of(z)
        if s is None:
            break
        word.append(s)
        z = G.mul(z, s ^ 1)
    word.reverse()
    return word


def path_points(G: GroupModel, x, word: Iterable[int]) -> list:
    pts = [x]
    for s in word:
        x = G.mul(x, s)
        pts.append(x)
    return pts


def nearest_point_projection(ball: Ball, target: Iterable, x) -> list:
    """All elements of target at minimal distance from x, sorted by key."""
    G = ball.model
    best, out = None, []
    xinv = G.inv(x)
    for t in target:
        d = ball.dist_of(G.product(xinv, t))
        if d is None:
            raise ValueError("target point too far from x for this ball")
        if best is None or d < best:
            best, out = d, [t]
        elif d == best:
            out.append(t)
    if best is None:
        raise ValueError("empty target")
    return sorted(out, key=G.key)


# ---------------------------------------------------------------- cache

def save_ball(ball: Ball, path) -> None:
    G = ball.model
    if not G.exact:
        raise GroupError("ball cache needs exact keys")
    with open(path, "wb") as fh:
        fh.write(CACHE_MAGIC)
        fh.write(struct.pack("<IQI", CACHE_VERSION, G.group_hash(), ball.radius))
        fh.write(struct.pack("<Q", len(ball)))
        for k, _x, d, p in sorted(ball.entries(), key=lambda e: e[0]):
            fh.write(struct.pack("<I", len(k)))
            fh.write(k)
            fh.write(struct.pack("<Ii", d, -1 if p is None else p))


def load_ball(G: GroupModel, path) -> Ball:
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:4] != CACHE_MAGIC:
        raise ValueError("not a ball cache file")
    ver, gh, R = struct.unpack_from("<IQI", data, 4)
    if ver != CACHE_VERSION:
        raise ValueError(f"unsupported cache version {ver}")
    if gh != G.group_hash():
        raise ValueError("cache was written for a different group")
    (n,) = struct.unpack_from("<Q", data, 20)
    pos = 28
    recs = []
    for _ in range(n):
        (kl,) = struct.unpack_from("<I", data, pos)
        k = data[pos + 4:pos + 4 + kl]
        d, p = struct.unpack_from("<Ii", data, pos + 4 + kl)
        pos += 12 + kl
        recs.append((d, k, p))
    recs.sort()
    ball = Ball(G)
    ball.radius = R
    ball.layers = [[] for _ in range(R + 1)]
    for d, k, p in recs:
        i = ball._add(G.from_key(k), d, p)
        ball.layers[d].append(i)
    return ball


# ---------------------------------------------------------------- metric

class Metric:
    """Word length, exact where possible.

    ``norm(x)`` returns ``(value, exact)``; when not exact, value is a lower
    bound (outside the ball the length exceeds the ball radius).
    """

    def __init__(self, G: GroupModel, ball: Optional[Ball] = None):
        self.G = G
        self.ball = ball
        self.exact_everywhere = G.has_length

    def norm(self, x):
        G = self.G
        if G.has_length:
            return G.length(x), True
        if self.ball is not None:
            d = self.ball.dist_of(x)
            if d is not None:
                return d, True
            lb = max(self.ball.radius + 1, G.length_lower_bound(x))
        else:
            lb = G.length_lower_bound(x)
        # the normal-form word is a path, so matching bounds certify the length
        if len(G.word_of(x)) == lb:
            return lb, True
        return lb, False

    def exact(self, x) -> Optional[int]:
        v, ok = self.norm(x)
        return v if ok else None

    def upper(self, x) -> int:
        v, ok = self.norm(x)
        return v if ok else len(self.G.word_of(x))


# ---------------------------------------------------------------- search

class _Seen:
    """Visited-set keyed by canonical handle, with bucketed equality."""

    def __init__(self, G):
        self.G = G
        self.d: dict = {}

    def get(self, x):
        G = self.G
        if G.exact:
            return self.d.get(x)
        for y, v in self.d.get(G.canon(x), ()):
            if G.equal(x, y):
                return v
        return None

    def put(self, x, v):
        G = self.G
        if G.exact:
            self.d[x] = v
            return
        lst = self.d.setdefault(G.canon(x), [])
        for i, (y, _) in enumerate(lst):
            if G.equal(x, y):
                lst[i] = (y, v)
                return
        lst.append((x, v))

    def __len__(self):
        return len(self.d)


def tree_certificate(G: GroupModel, metric: Metric, q: PathQuery) -> Optional[ExtendedLength]:
    """In a tree every a-b path visits each vertex of the geodesic."""
    if not G.is_tree:
        return None
    cinv = G.inv(q.forbidden_center)
    z = G.product(G.inv(q.a), q.b)
    pts = path_points(G, q.a, G.word_of(z))
    for p in pts:
        if metric.norm(G.product(cinv, p))[0] < q.forbidden_radius:
            return Infinite("tree: geodesic meets forbidden ball")
    if all(metric.norm(p)[0] <= q.ambient_radius for p in pts):
        return Finite(len(pts) - 1)
    return None


def avoidant_path(G: GroupModel, q: PathQuery, membership: Optional[Ball] = None,
                  max_nodes: int = 2_000_000, metric: Optional[Metric] = None,
                  use_tree: bool = True) -> ExtendedLength:
    """Shortest a-b path avoiding the open ball B(c, rho) inside the ambient ball.

    Vertices v are allowed when dist(c, v) >= rho and dist(1, v) <= ambient.
    Returns Finite(k); Infinite when the explored component is exhausted
    without ever touching the ambient boundary (or, for trees, when the
    unique geodesic meets the forbidden ball); Censored(lower bound) when
    the ambient boundary or the node budget cut the search short.
    """
    if metric is None:
        metric = Metric(G, membership)
    a, b, c, rho, amb = q.a, q.b, q.forbidden_center, q.forbidden_radius, q.ambient_radius
    c_is_id = G.is_identity(c)
    cinv = G.inv(c)
    binv = G.inv(b)

    def cdist(v, vc):
        return metric.norm(v if c_is_id else vc)

    for name, p in (("a", a), ("b", b)):
        dv, ok = cdist(p, G.product(cinv, p))
        if dv < rho:
            if ok:
                raise ValueError(f"{name} lies inside the forbidden ball")
    if G.equal(a, b):
        return Finite(0)
    if use_tree and rho > 0:
        cert = tree_certificate(G, metric, q)
        if cert is not None:
            return cert

    a_up = metric.upper(a)
    seen = _Seen(G)
    ac = a if c_is_id else G.product(cinv, a)
    ab = G.product(binv, a)
    h0 = metric.norm(ab)[0]
    # heap: (f, -g, serial, vertex, v_c, b^-1 v, unknown flag)
    heap = [(h0, 0, 0, a, ac, ab, False)]
    seen.put(a, 0)
    closed = _Seen(G)
    serial = 1
    touch = None
    expanded = 0
    while heap:
        f, ng, _, v, vc, vb, unknown = heapq.heappop(heap)
        g = -ng
        if unknown:
            return Censored(f, note="unknown vertex beyond ball at search frontier")
        if closed.get(v) is not None:
            continue
        if G.is_identity(vb):
            return Finite(g)
        closed.put(v, True)
        expanded += 1
        if expanded > max_nodes:
            return Censored(f, note="node budget")
        g1 = g + 1
        for s in range(G.ngens):
            y = G.mul(v, s)
            if closed.get(y) is not None:
                continue
            yc = y if c_is_id else G.mul(vc, s)
            dc, okc = cdist(y, yc)
            yb = G.mul(vb, s)
            hy = metric.norm(yb)[0]
            if dc < rho:
                if okc:
                    continue
                unk = True
            else:
                unk = False
            ny, oky = metric.norm(y) if not c_is_id else (dc, okc)
            if oky:
                if ny > amb:
                    t = g1 + hy
                    if touch is None or t < touch:
                        touch = t
                    continue
            elif ny > amb:
                t = g1 + hy
                if touch is None or t < touch:
                    touch = t
                continue
            elif a_up + g1 > amb:
                unk = True
            old = seen.get(y)
            if old is not None and old <= g1:
                continue
            seen.put(y, g1)
            heapq.heappush(heap, (g1 + hy, -g1, serial, y, yc, yb, unk))
            serial += 1
    if touch is None:
        return Infinite("component exhausted inside ambient ball")
    return Censored(touch, note="ambient boundary reached")
