"""Contraction and Morse diagnostics for element axes.

Everything here is evidence at a finite scale, never a certificate; the
reports carry ``scale_limited = True`` to make that explicit.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .cayley import Ball, Metric, path_points
from .divergence import DivergenceTable, has_infinite_order
from .groups import GroupModel
from .order import (C_GRID, NOT_PRECEQ, PRECEQ, UNDETERMINED, OrderVerdict,
                    SampledFunction, preceq_check)


class _Dist:
    """d(x, y) = |x^-1 y|, exact or an error."""

    def __init__(self, G: GroupModel, ball: Optional[Ball]):
        self.G = G
        self.metric = Metric(G, ball)

    def __call__(self, x, y) -> int:
        G = self.G
        v = self.metric.exact(G.product(G.inv(x), y))
        if v is None:
            raise ValueError("distance not resolvable inside the ball; use a larger ball")
        return v


@dataclass
class AxisSpec:
    g: object
    m: int
    points: list
    norms: list

    def __len__(self):
        return len(self.points)


def make_axis(G: GroupModel, g, m: int, ball: Optional[Ball] = None) -> AxisSpec:
    """Vertices of the path g^-m ... g^m spelled with the normal form of g."""
    if m < 1:
        raise ValueError("span m must be positive")
    if G.is_identity(g) or not has_infinite_order(G, g, 2 * m + 1):
        raise ValueError("axis element looks like it has finite order")
    word = G.word_of(g)
    x = G.identity
    ginv = G.inv(g)
    for _ in range(m):
        x = G.product(x, ginv)
    pts = path_points(G, x, word * (2 * m))
    # dedupe while keeping order; a non cyclically reduced g backtracks
    seen, uniq = set(), []
    for p in pts:
        k = G.key(p)
        if k not in seen:
            seen.add(k)
            uniq.append(p)
    dist = _Dist(G, ball)
    return AxisSpec(g, m, uniq, [dist(G.identity, p) for p in uniq])


def _dist_to_set(dist, y, pts) -> tuple[int, list]:
    best, idx = None, []
    for i, p in enumerate(pts):
        d = dist(y, p)
        if best is None or d < best:
            best, idx = d, [i]
        elif d == best:
            idx.append(i)
    return best, idx


@dataclass
class ContractionSample:
    center: object
    radius: int
    diameter: int
    sampled: int
    total: int


@dataclass
class ContractionReport:
    samples: list
    D_estimate: int
    scale_limited: bool = True

    def csv_rows(self, G: GroupModel):
        return [[G.format(s.center), s.radius, s.diameter] for s in self.samples]


def sample_centers(G: GroupModel, axis: AxisSpec, ball: Ball, count: int, seed: int = 0,
                   max_offset: Optional[int] = None) -> list:
    """Seeded choice of ball elements off the axis, sorted by key."""
    dist = _Dist(G, ball)
    cands = []
    for _k, x, _d, _p in ball.entries():
        off, _ = _dist_to_set(dist, x, axis.points)
        if off >= 1 and (max_offset is None or off <= max_offset):
            cands.append(x)
    rnd = random.Random(f"centers:{seed}")
    if len(cands) > count:
        cands = rnd.sample(cands, count)
    return sorted(cands, key=G.key)


def contraction_profile(G: GroupModel, axis: AxisSpec, centers: Iterable, ball: Ball,
                        sample_cap: int = 400, seed: int = 0) -> ContractionReport:
    """Projection diameters of the balls B(x, d(x, axis) - 1) onto the axis."""
    dist = _Dist(G, ball)
    out = []
    for x in centers:
        off, _ = _dist_to_set(dist, x, axis.points)
        if off == 0:
            raise ValueError(f"center {G.format(x)} lies on the axis")
        rad = off - 1
        if rad > ball.radius:
            raise ValueError(f"ball of radius {rad} exceeds the enumerated radius {ball.radius}")
        offsets = [ball.elems[i] for r in range(rad + 1) for i in ball.layers[r]]
        total = len(offsets)
        if total > sample_cap:
            rnd = random.Random(f"contraction:{seed}:{G.key(x).hex()}")
            offsets = rnd.sample(offsets, sample_cap)
        proj = set()
        for z in offsets:
            y = G.product(x, z)
            d, idx = _dist_to_set(dist, y, axis.points)
            if d < 1:
                raise AssertionError("sampled ball meets the axis")
            proj.update(idx)
        proj = sorted(proj)
        diam = 0
        for i, a in enumerate(proj):
            for b in proj[i + 1:]:
                diam = max(diam, dist(axis.points[a], axis.points[b]))
        out.append(ContractionSample(x, rad, diam, len(offsets), total))
    D = max((s.diameter for s in out), default=0)
    return ContractionReport(out, D)


# ---------------------------------------------------------------- Morse

def is_quasi_geodesic(dist, pts: Sequence, L: float, C: float) -> bool:
    """|i - j| <= L d(p_i, p_j) + C for every pair of path vertices."""
    n = len(pts)
    for i in range(n):
        for j in range(i + 1, n):
            if j - i > L * dist(pts[i], pts[j]) + C + 1e-9:
                return False
    return True


@dataclass
class MorseWitness:
    max_deviation: int
    checked: int
    accepted: int
    worst: Optional[tuple] = None
    scale_limited: bool = True
    deviations: list = field(default_factory=list)


def morse_witness(G: GroupModel, axis: AxisSpec, L: float, C: float,
                  pairs: Optional[Iterable[tuple]] = None, ball: Optional[Ball] = None,
                  detour: int = 3, paths: Optional[Iterable[tuple]] = None) -> MorseWitness:
    """Largest axis deviation over quasi-geodesic paths between axis points.

    Candidates are the normal-form geodesic between each endpoint pair and,
    for every signed generator s and 1 <= h <= detour, the path that walks
    s^h first and then takes the geodesic.  Extra ``paths`` are given as
    (start, word).  Only candidates passing the (L, C) test count.
    """
    dist = _Dist(G, ball)
    pts = axis.points
    cands = []
    if pairs is None:
        mid = len(pts) // 2
        pairs = [(mid - k, mid + k) for k in range(1, mid + 1, max(1, mid // 4))]
    for i, j in pairs:
        p, q = pts[i], pts[j]
        geo = G.word_of(G.product(G.inv(p), q))
        cands.append((p, geo))
        for s in range(G.ngens):
            for h in range(1, detour + 1):
                z = p
                for _ in range(h):
                    z = G.mul(z, s)
                cands.append((p, [s] * h + G.word_of(G.product(G.inv(z), q))))
    for start, word in paths or ():
        cands.append((start, list(word)))
    best, worst, acc, devs = 0, None, 0, []
    for start, word in cands:
        ppts = path_points(G, start, word)
        for end in (ppts[0], ppts[-1]):
            if _dist_to_set(dist, end, pts)[0] != 0:
                raise ValueError("path endpoints must lie on the axis")
        if not is_quasi_geodesic(dist, ppts, L, C):
            continue
        acc += 1
        dev = max(_dist_to_set(dist, y, pts)[0] for y in ppts)
        devs.append(dev)
        if dev > best or worst is None:
            best, worst = max(best, dev), (start, word)
    return MorseWitness(best, len(cands), acc, worst, True, devs)


# ---------------------------------------------------------------- quadratic audit

def quadratic_lower_audit(axis_div: DivergenceTable, c_grid=C_GRID,
                          coverage: float = 0.5) -> OrderVerdict:
    """Does x^2 <=_C Div^q hold at the sampled scale?

    For each C the reference x^2 is checked at the grid points x whose image
    Cx + C is still inside the table, and the C counts only when those
    points make up at least ``coverage`` of the grid.
    """
    bad = [s for s in axis_div.samples if not s.value.is_finite]
    if bad:
        kinds = sorted({s.value.tag for s in bad})
        return OrderVerdict(UNDETERMINED, None, float(bad[0].n),
                            f"non-finite values ({', '.join(kinds)}) at r={[s.n for s in bad]}")
    if len(axis_div.samples) < 4:
        raise ValueError("need at least 4 finite grid points")
    g = SampledFunction.from_table(axis_div)
    xs = list(g.x)
    need = coverage * len(xs)
    last = None
    for C in c_grid:
        pts = [x for x in xs if C * x + C <= xs[-1]]
        if len(pts) < max(2, need):
            continue
        v = preceq_check(SampledFunction((x, x * x) for x in pts), g, C)
        if v.relation == PRECEQ:
            return v
        last = v
    return OrderVerdict(NOT_PRECEQ, float(c_grid[-1]), last.violating_x if last else None,
                        "" if last else "no C with enough in-range samples")
