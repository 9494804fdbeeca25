"""Finite-scale checks of network structure built from subgroup cosets.

Membership is decided for standard subgroups (generated by a subset of the
generators) of free abelian, free and right-angled Artin models and their
direct and free products: x lies in H exactly when the letters of its normal
form all belong to H.  Single-generator subgroups are also accepted for the
quasi-convexity audit, with membership tested through powers.
"""
from __future__ import annotations

import math
import random
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .cayley import Ball, path_points
from .divergence import (MIDPOINT, DivergenceParams, DivergenceTable, div_function,
                         group_label)
from .groups import (RAAG, DefiningGraph, GroupError, GroupModel, make_free, make_zn)
from .order import NOT_PRECEQ, UNDETERMINED, OrderVerdict, SampledFunction, preceq_search

_LETTER_FAMILIES = ("zn", "free", "raag")


def _letter_support_ok(G: GroupModel) -> bool:
    if G.family in _LETTER_FAMILIES:
        return True
    if G.family == "direct":
        return _letter_support_ok(G.A) and _letter_support_ok(G.B)
    if G.family == "freeprod":
        return all(_letter_support_ok(f) for f in G.F)
    return False


@dataclass
class SubgroupSpec:
    generators: list
    label: str
    group_hash: int
    letters: Optional[frozenset] = None

    @property
    def standard(self):
        return self.letters is not None


def make_subgroup(G: GroupModel, gens: Iterable, label: Optional[str] = None) -> SubgroupSpec:
    """Subgroup generated by words (strings or symbol lists) over G."""
    words = [G.parse_word(w) if isinstance(w, str) else [G.check_symbol(s) for s in w]
             for w in gens]
    if not words:
        raise ValueError("a subgroup needs at least one generator")
    for w in words:
        if G.is_identity(G.evaluate(w)):
            raise ValueError(f"generator {G.format_word(w)} is trivial")
    letters = None
    if all(len(w) == 1 for w in words):
        letters = frozenset(w[0] >> 1 for w in words)
    if label is None:
        label = "<" + ",".join(G.format_word(w) for w in words) + ">"
    return SubgroupSpec(words, label, G.group_hash(), letters)


def _check_owner(G: GroupModel, H: SubgroupSpec):
    if H.group_hash != G.group_hash():
        raise ValueError(f"subgroup {H.label} was defined over a different group")


def is_member(G: GroupModel, H: SubgroupSpec, x) -> bool:
    _check_owner(G, H)
    if H.standard and _letter_support_ok(G):
        return all((s >> 1) in H.letters for s in G.word_of(x))
    if len(H.generators) == 1 and G.has_length:
        # powers h^k with |k| <= |x| + 1; assumes <h> is undistorted
        h = G.evaluate(H.generators[0])
        hi = G.inv(h)
        n = G.length(x)
        if G.is_identity(x):
            return True
        y, z = G.identity, G.identity
        for _ in range(n + 1):
            y, z = G.product(y, h), G.product(z, hi)
            if G.equal(y, x) or G.equal(z, x):
                return True
        return False
    raise GroupError(f"membership in {H.label} is not decidable for the {G.family} model")


def _require_standard(G: GroupModel, H: SubgroupSpec):
    _check_owner(G, H)
    if not (H.standard and _letter_support_ok(G)):
        raise GroupError(f"{H.label} is not a standard subgroup of a letter-support model")


def coset_rep(G: GroupModel, H: SubgroupSpec, c):
    """Shortest element of cH, found by stripping H letters from the right."""
    _require_standard(G, H)
    syms = sorted(s for v in H.letters for s in (2 * v, 2 * v + 1))
    n = G.length(c)
    moved = True
    while moved:
        moved = False
        for s in syms:
            d = G.mul(c, s)
            m = G.length(d)
            if m < n:
                c, n, moved = d, m, True
                break
    return c


def dist_to_coset(G: GroupModel, H: SubgroupSpec, c, w) -> int:
    """d(w, cH) = |shortest element of (w^-1 c)H|."""
    return G.length(coset_rep(G, H, G.product(G.inv(w), c)))


@dataclass
class CosetPatch:
    g: object
    members: list
    label: str
    radius: int

    def __len__(self):
        return len(self.members)


def coset_patch(G: GroupModel, H: SubgroupSpec, g, ball: Ball) -> CosetPatch:
    """Elements of the ball that lie in gH."""
    gi = G.inv(g)
    mem = [x for _k, x, _d, _p in ball.entries() if is_member(G, H, G.product(gi, x))]
    return CosetPatch(g, mem, f"{G.format(g)}{H.label}", ball.radius)


def subgroup_ball(G: GroupModel, H: SubgroupSpec, R: int) -> list:
    """H ∩ B(R) by BFS along H's letters; exact for standard subgroups."""
    _require_standard(G, H)
    syms = sorted(s for v in H.letters for s in (2 * v, 2 * v + 1))
    seen = {G.key(G.identity)}
    layer, out = [G.identity], [G.identity]
    for _ in range(R):
        nxt = []
        for x in layer:
            for s in syms:
                y = G.mul(x, s)
                k = G.key(y)
                if k not in seen and G.length(y) == G.length(x) + 1:
                    seen.add(k)
                    nxt.append(y)
        nxt.sort(key=G.key)
        out.extend(nxt)
        layer = nxt
    return out


# ---------------------------------------------------------------- quasi-convexity

def _neighbourhood(G: GroupModel, seeds: Iterable, C: int) -> set:
    keys = {G.key(x) for x in seeds}
    frontier = list(seeds)
    for _ in range(C):
        nxt = []
        for x in frontier:
            for s in range(G.ngens):
                y = G.mul(x, s)
                k = G.key(y)
                if k not in keys:
                    keys.add(k)
                    nxt.append(y)
        frontier = nxt
    return keys


def _path_inside(G: GroupModel, allowed: set, p, q, limit: int) -> Optional[list]:
    """Shortest vertex path p -> q through ``allowed`` of length <= limit."""
    kq = G.key(q)
    prev = {G.key(p): None}
    dq = deque([(p, 0)])
    while dq:
        x, d = dq.popleft()
        kx = G.key(x)
        if kx == kq:
            out = []
            while kx is not None:
                out.append(G.from_key(kx))
                kx = prev[kx]
            return out[::-1]
        if d >= limit:
            continue
        for s in range(G.ngens):
            y = G.mul(x, s)
            ky = G.key(y)
            if ky in allowed and ky not in prev:
                prev[ky] = kx
                dq.append((y, d + 1))
    return None


def _dist(G: GroupModel, x, y) -> int:
    return G.length(G.product(G.inv(x), y))


def _is_qg(G: GroupModel, pts: Sequence, L: float, C: float) -> bool:
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            if j - i > L * _dist(G, pts[i], pts[j]) + C + 1e-9:
                return False
    return True


@dataclass
class QuasiConvexityAudit:
    subgroup: str
    C: int
    L: float
    radius: int
    pairs: int
    strict_failures: int
    detour_passes: int
    failures: list
    scale_limited: bool = True

    @property
    def passed(self):
        return not self.failures


def _members(G, H, R, ball):
    if H.standard:
        return subgroup_ball(G, H, R)
    if ball is None:
        raise ValueError("a ball is needed for non-standard subgroups")
    return [x for _k, x, d, _p in ball.entries() if d <= R and is_member(G, H, x)]


def quasiconvexity_audit(G: GroupModel, H: SubgroupSpec, C: int, L: float, R: int,
                         ball: Optional[Ball] = None, pair_budget: int = 50_000,
                         seed: int = 0) -> QuasiConvexityAudit:
    """Check that geodesics between members of H ∩ B(R/2) stay C-close to H.

    A failing normal-form geodesic is retried with the shortest path inside
    the C-neighbourhood of H ∩ B(R); the pair fails only if that path is
    missing or is not an (L, L)-quasi-geodesic.
    """
    if not G.has_length:
        raise GroupError("quasi-convexity audit needs a model with a length function")
    target = _members(G, H, R, ball)
    near = _neighbourhood(G, target, C)
    half = [x for x in target if G.length(x) <= R // 2]
    pairs = [(i, j) for i in range(len(half)) for j in range(i + 1, len(half))]
    if len(pairs) > pair_budget:
        pairs = sorted(random.Random(f"qc:{seed}").sample(pairs, pair_budget))
    strict, detour, fails = 0, 0, []
    for i, j in pairs:
        p, q = half[i], half[j]
        word = G.word_of(G.product(G.inv(p), q))
        if all(G.key(y) in near for y in path_points(G, p, word)):
            continue
        strict += 1
        d = len(word)
        path = _path_inside(G, near, p, q, int(L * d + L))
        if path is not None and _is_qg(G, path, L, L):
            detour += 1
        else:
            fails.append((p, q))
    return QuasiConvexityAudit(H.label, C, L, R, len(pairs), strict, detour, fails)


# ---------------------------------------------------------------- chains

@dataclass
class Coset:
    rep: object
    index: int
    label: str


@dataclass
class ChainLink:
    diameter: int
    connected: bool
    meets: bool
    size: int


@dataclass
class ChainRecord:
    found: bool
    cosets: list
    links: list
    threshold: int
    reason: str = ""
    scale_flags: list = field(default_factory=lambda: ["infinite diameter read as diameter >= R - 2"])

    @property
    def length(self):
        return len(self.cosets)


class _CosetWorld:
    """Cosets of standard subgroups seen inside the ball B(x, R)."""

    def __init__(self, G: GroupModel, subgroups: Sequence[SubgroupSpec], x, ball: Ball, tau: int):
        for H in subgroups:
            _require_standard(G, H)
        self.G, self.H, self.x, self.ball, self.tau = G, list(subgroups), x, ball, tau
        self.local = [G.product(x, z) for _k, z, _d, _p in ball.entries()]
        self.local_keys = {G.key(y) for y in self.local}
        self._nbhd = {}

    def coset(self, g, i) -> Coset:
        G = self.G
        rep = coset_rep(G, self.H[i], g)
        return Coset(rep, i, f"{G.format(rep)}{self.H[i].label}")

    def ident(self, c: Coset):
        return (c.index, self.G.key(c.rep))

    def neighbourhood(self, c: Coset) -> dict:
        """key -> element for points of B(x, R) within tau of the coset."""
        k = self.ident(c)
        if k not in self._nbhd:
            G, H = self.G, self.H[c.index]
            self._nbhd[k] = {G.key(y): y for y in self.local
                             if dist_to_coset(G, H, c.rep, y) <= self.tau}
        return self._nbhd[k]

    def link(self, a: Coset, b: Coset, eta: int, threshold: int) -> ChainLink:
        G = self.G
        na, nb = self.neighbourhood(a), self.neighbourhood(b)
        inter = [na[k] for k in sorted(na.keys() & nb.keys())]
        if not inter:
            return ChainLink(0, False, False, 0)
        meets = any(_dist(G, self.x, y) <= eta for y in inter)
        diam = 0
        for i, p in enumerate(inter):
            for q in inter[i + 1:]:
                diam = max(diam, _dist(G, p, q))
            if diam >= threshold:
                break
        # eta-path connectivity inside the intersection
        keys = {G.key(y): y for y in inter}
        steps = [z for _k, z, d, _p in self.ball.entries() if 0 < d <= eta]
        start = G.key(inter[0])
        seen = {start}
        stack = [inter[0]]
        while stack:
            y = stack.pop()
            for z in steps:
                w = G.product(y, z)
                kw = G.key(w)
                if kw in keys and kw not in seen:
                    seen.add(kw)
                    stack.append(w)
        return ChainLink(diam, len(seen) == len(keys), meets, len(inter))


def chain_audit(G: GroupModel, subgroups: Sequence[SubgroupSpec], x, tau: int, eta: int,
                ball: Ball, source=0, target=-1) -> ChainRecord:
    """Shortest chain of cosets from ``source`` to ``target`` near x.

    Cosets are given as a subgroup index (the coset through x) or as a pair
    (g, index).  Consecutive cosets must have tau-neighbourhood intersections
    of diameter >= R - 2, eta-path connected, and meeting B(x, eta).
    """
    world = _CosetWorld(G, subgroups, x, ball, tau)
    threshold = ball.radius - 2

    def as_coset(spec):
        if isinstance(spec, tuple):
            g, i = spec
        else:
            g, i = x, spec
        return world.coset(g, i % len(subgroups))

    near = [G.product(x, z) for _k, z, d, _p in ball.entries() if d <= 3 * tau]
    cosets, ids = [], {}
    for y in near:
        for i in range(len(subgroups)):
            c = world.coset(y, i)
            k = world.ident(c)
            if k not in ids:
                ids[k] = len(cosets)
                cosets.append(c)
    if not cosets:
        raise ValueError("no coset meets B(x, 3 tau)")
    a, b = as_coset(source), as_coset(target)
    for c in (a, b):
        k = world.ident(c)
        if k not in ids:
            ids[k] = len(cosets)
            cosets.append(c)
    ia, ib = ids[world.ident(a)], ids[world.ident(b)]
    prev = {ia: None}
    links = {}
    dq = deque([ia])
    while dq:
        u = dq.popleft()
        if u == ib:
            break
        if len(_trace(prev, u)) >= eta:
            continue
        for v in range(len(cosets)):
            if v in prev:
                continue
            ln = world.link(cosets[u], cosets[v], eta, threshold)
            if ln.diameter >= threshold and ln.connected and ln.meets:
                prev[v] = u
                links[v] = ln
                dq.append(v)
    if ib not in prev:
        return ChainRecord(False, [a, b], [], threshold,
                           f"no chain of at most {eta} cosets among {len(cosets)} near x")
    idx = _trace(prev, ib)
    return ChainRecord(True, [cosets[i] for i in idx], [links[i] for i in idx[1:]], threshold)


def _trace(prev, u) -> list:
    out = []
    while u is not None:
        out.append(u)
        u = prev[u]
    return out[::-1]


# ---------------------------------------------------------------- covering

@dataclass
class CoverStep:
    point: object
    index: int
    coset: Coset


@dataclass
class CoverRecord:
    steps: list
    endpoint: object
    length: int
    tau: int

    @property
    def n(self):
        return len(self.steps)


def geodesic_cover(G: GroupModel, subgroups: Sequence[SubgroupSpec], word, tau: int,
                   x=None) -> CoverRecord:
    """Greedy decomposition of the path x·word by cosets.

    From the current point x_k pick, among the cosets at distance < tau from
    x_k, the one whose closed 2 tau neighbourhood reaches farthest along the
    path; that farthest point is x_{k+1}.
    """
    if tau < 1:
        raise ValueError("tau must be at least 1")
    for H in subgroups:
        _require_standard(G, H)
    word = G.parse_word(word) if isinstance(word, str) else list(word)
    x = G.identity if x is None else x
    pts = path_points(G, x, word)
    if len(word) != G.length(G.product(G.inv(x), pts[-1])):
        raise ValueError("the word is not a geodesic")
    steps, k = [], 0
    last = len(pts) - 1
    while k < last:
        y = pts[k]
        best = None
        for z in _ball_words(G, tau - 1):
            yz = G.product(y, z)
            for i, H in enumerate(subgroups):
                c = coset_rep(G, H, yz)
                if dist_to_coset(G, H, c, y) >= tau:
                    continue
                far = max(j for j in range(k, len(pts)) if dist_to_coset(G, H, c, pts[j]) <= 2 * tau)
                if best is None or far > best[0]:
                    best = (far, Coset(c, i, f"{G.format(c)}{H.label}"))
        if best is None:
            raise ValueError(f"no coset within {tau} of path point {k}")
        if best[0] <= k:
            raise ValueError(f"covering stalls at path point {k}")
        steps.append(CoverStep(y, k, best[1]))
        k = best[0]
    return CoverRecord(steps, pts[-1], len(word), tau)


def _ball_words(G: GroupModel, R: int) -> list:
    seen = {G.key(G.identity)}
    layer, out = [G.identity], [G.identity]
    for _ in range(R):
        nxt = []
        for y in layer:
            for s in range(G.ngens):
                w = G.mul(y, s)
                k = G.key(w)
                if k not in seen:
                    seen.add(k)
                    nxt.append(w)
        nxt.sort(key=G.key)
        out.extend(nxt)
        layer = nxt
    return out


def check_cover(G: GroupModel, subgroups: Sequence[SubgroupSpec], rec: CoverRecord) -> list:
    """Problems with a cover: the two numbered properties and the length bound."""
    probs = []
    pts = [s.point for s in rec.steps] + [rec.endpoint]
    for i, st in enumerate(rec.steps):
        H = subgroups[st.coset.index]
        for p in (pts[i], pts[i + 1]):
            if dist_to_coset(G, H, st.coset.rep, p) >= 3 * rec.tau:
                probs.append(f"step {i}: point not within 3 tau of its coset")
    for i in range(len(pts) - 2):
        if _dist(G, pts[i], pts[i + 1]) < rec.tau:
            probs.append(f"step {i}: spacing below tau")
    if rec.n > max(1, math.ceil(rec.length / rec.tau)):
        probs.append("too many steps")
    return probs


# ---------------------------------------------------------------- divergence bound

def standalone_model(G: GroupModel, H: SubgroupSpec) -> GroupModel:
    """A standalone model isomorphic to a standard subgroup."""
    _require_standard(G, H)
    vs = sorted(H.letters)
    if G.family == "zn":
        return make_zn(len(vs))
    if G.family == "free":
        return make_free(len(vs))
    if G.family == "raag":
        pos = {v: i for i, v in enumerate(vs)}
        edges = [(pos[a], pos[b]) for a, b in G.graph.edges if a in pos and b in pos]
        labels = [G.generators[2 * v].label for v in vs]
        return RAAG(DefiningGraph(len(vs), edges), labels)
    raise GroupError(f"no standalone model for subgroups of the {G.family} model")


@dataclass
class NetworkReport:
    verdict: OrderVerdict
    g_table: DivergenceTable
    h_tables: list
    g_values: list
    scale_flags: list
    notes: list

    def to_json(self):
        return {
            "preceq": {"verdict": self.verdict.relation, "C": self.verdict.C,
                       "detail": self.verdict.detail},
            "g": [[s.n, str(s.value)] for s in self.g_table.samples],
            "n_max_div_h": [[n, v] for n, v in self.g_values],
            "subgroup_tables": [{"label": t.group, "values": [[s.n, str(s.value)] for s in t.samples]}
                                for t in self.h_tables],
            "scale_flags": self.scale_flags,
            "notes": self.notes,
        }


def network_divergence_audit(G: GroupModel, subgroups: Sequence[SubgroupSpec], n_grid,
                             params: Optional[DivergenceParams] = None, mode: str = MIDPOINT,
                             threads: int = 1, c_grid=None) -> NetworkReport:
    """Compare Div^G(n) with n · max_H Div^H(n).

    Each subgroup table is computed on its standalone model, one grid step
    past the end of n_grid so that g(x + 1) is available at the last x.
    """
    params = params or DivergenceParams()
    n_grid = sorted(set(int(n) for n in n_grid))
    for H in subgroups:
        _check_owner(G, H)
    models = {}
    for H in subgroups:
        M = standalone_model(G, H)
        models.setdefault(M.group_hash(), (M, H.label))
    step = n_grid[-1] - n_grid[-2] if len(n_grid) > 1 else 1
    h_grid = n_grid + [n_grid[-1] + step]
    gt = div_function(G, n_grid, params, mode, threads=threads)
    hts = []
    for _h, (M, lab) in sorted(models.items()):
        hts.append(div_function(M, h_grid, params, mode, threads=threads,
                                label=f"{group_label(M)} as {lab}"))
    flags = ["finite grid", "standalone subgroup models"]
    notes = ["subgroup divergence measured on standalone models with their own generators"]
    bad = [t for t in [gt] + hts if not t.all_finite()]
    gvals = []
    if bad:
        v = OrderVerdict(UNDETERMINED, None, None,
                         "non-finite values in " + ", ".join(t.group for t in bad))
        flags.append("censored")
        return NetworkReport(v, gt, hts, gvals, flags, notes)
    for i, n in enumerate(h_grid):
        gvals.append((n, n * max(t.samples[i].value.value for t in hts)))
    f = SampledFunction.from_table(gt)
    g = SampledFunction(gvals)
    v = preceq_search(f, g) if c_grid is None else preceq_search(f, g, c_grid)
    if v.relation == NOT_PRECEQ and v.detail:
        flags.append("undetermined at some C")
    return NetworkReport(v, gt, hts, gvals, flags, notes)
