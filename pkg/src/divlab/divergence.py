"""Divergence of triples, divergence functions and axis divergence.

The center c is always moved to the identity (Cayley graphs are vertex
transitive), so one ball and one length function serve every triple.
Sup computations walk admissible pairs in a fixed order, keep the first
pair attaining the running maximum as witness and stop early on the first
Infinite value.  Automorphisms of the generating set fixing the identity
are isometries, so only orbit representatives of the first point are
visited.
"""
from __future__ import annotations

import math
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

from .cayley import (Ball, Censored, ExtendedLength, Finite, Infinite, Metric,
                     PathQuery, ResourceLimit, avoidant_path, build_ball,
                     default_ambient, sphere)
from .groups import GroupModel

MIDPOINT, BETWEEN, FREE_CENTER, SMALL = "midpoint", "between", "freecenter", "small"
MODES = (MIDPOINT, BETWEEN, FREE_CENTER)

AXIS_BALL_CAP = 9

CSV_COLUMNS = ["group", "mode", "n", "delta", "gamma", "lambda", "status", "value",
               "witness_a", "witness_b", "pairs", "exhaustive", "ms"]


@dataclass
class DivergenceParams:
    delta: float = 0.5
    gamma: float = 2.0
    lam: float = 2.0
    ambient_mult: float = 3.0
    ambient_extra: int = 8
    ambient_cap: Optional[int] = None
    exhaustive_pairs: int = 2_000_000
    samples: int = 2000
    seed: int = 0
    max_nodes: int = 400_000
    ball_budget_mb: float = 1024.0
    use_symmetry: bool = True
    record_timing: bool = False

    def validate(self):
        if not 0 < self.delta < 1:
            raise ValueError(f"delta={self.delta} outside the allowed range (0,1)")
        if self.gamma < 0:
            raise ValueError(f"gamma={self.gamma} must be nonnegative")
        if self.lam < 2:
            raise ValueError(f"lambda={self.lam} must be at least 2")
        if self.samples < 1 or self.exhaustive_pairs < 0:
            raise ValueError("pair budget must be positive")
        return self

    def rho(self, r) -> float:
        return self.delta * r - self.gamma

    def ambient(self, d) -> int:
        return default_ambient(d, self.ambient_mult, self.ambient_extra, self.ambient_cap)


@dataclass
class DivergenceSample:
    n: int
    value: ExtendedLength
    witness: Optional[tuple] = None
    pairs: int = 0
    exhaustive: bool = True
    ms: Optional[float] = None
    extra: dict = field(default_factory=dict)


@dataclass
class DivergenceTable:
    group: str
    mode: str
    params: DivergenceParams
    samples: list

    def xs(self):
        return [s.n for s in self.samples]

    def finite_points(self):
        return [(s.n, s.value.value) for s in self.samples if s.value.is_finite]

    def all_finite(self):
        return all(s.value.is_finite for s in self.samples)

    def csv_rows(self, G: GroupModel):
        p = self.params
        for s in self.samples:
            wa, wb = ("", "") if s.witness is None else (G.format(s.witness[0]), G.format(s.witness[1]))
            v = s.value
            yield [self.group, self.mode, s.n, _num(p.delta), _num(p.gamma), _num(p.lam),
                   v.tag, "inf" if v.is_infinite else v.value, wa, wb, s.pairs,
                   int(s.exhaustive), "" if s.ms is None else f"{s.ms:.0f}"]


def _num(x):
    return repr(float(x))


def group_label(G: GroupModel) -> str:
    d = G.describe()
    fam = d["family"]
    if fam == "zn":
        return f"Z^{d['n']}"
    if fam == "free":
        return f"F{d['k']}"
    if fam == "raag":
        g = d["graph"]
        if g["edges"] == [[i, i + 1] for i in range(g["vertices"] - 1)]:
            return f"RAAG(P{g['vertices']})"
        return "RAAG(" + ";".join(f"{i}-{j}" for i, j in g["edges"]) + f";v{g['vertices']})"
    if fam == "gersten":
        return "Gersten"
    if fam in ("direct", "freeprod"):
        sub = [group_label(f) for f in (G.A, G.B)] if fam == "direct" else [group_label(f) for f in G.F]
        return ("x" if fam == "direct" else "*").join(sub)
    return fam


# ---------------------------------------------------------------- triples

class DivergenceEngine:
    """Shared state for many triple evaluations on one model."""

    def __init__(self, G: GroupModel, params: DivergenceParams, ball: Optional[Ball] = None):
        self.G = G
        self.p = params.validate()
        self.ball = ball
        self.metric = Metric(G, ball)

    def norm(self, x) -> int:
        v, ok = self.metric.norm(x)
        if not ok:
            raise ResourceLimit("element outside the distance ball; enlarge the ball")
        return v

    def dist(self, x, y) -> int:
        G = self.G
        return self.norm(G.product(G.inv(x), y))

    def triple_at_identity(self, a, b, d=None, ambient=None) -> ExtendedLength:
        """div(a, b, 1) with r = min(|a|, |b|)."""
        G = self.G
        r = min(self.norm(a), self.norm(b))
        if r == 0:
            raise ValueError("r = 0: the center coincides with an endpoint")
        rho = self.p.rho(r)
        if d is None:
            d = self.dist(a, b)
        if rho <= 0:
            return Finite(d)
        amb = ambient if ambient is not None else max(self.p.ambient(d), self.norm(a), self.norm(b))
        q = PathQuery(a, b, G.identity, rho, amb)
        return avoidant_path(G, q, self.ball, max_nodes=self.p.max_nodes, metric=self.metric)


def div_triple(G: GroupModel, a, b, c, delta=0.5, gamma=2.0, ambient=None,
               ball: Optional[Ball] = None, max_nodes=400_000) -> ExtendedLength:
    """Length of a shortest a-b path avoiding B(c, delta*r - gamma)."""
    p = DivergenceParams(delta=delta, gamma=gamma, max_nodes=max_nodes)
    eng = DivergenceEngine(G, p, ball)
    cinv = G.inv(c)
    a1, b1 = G.product(cinv, a), G.product(cinv, b)
    if G.is_identity(a1) or G.is_identity(b1):
        raise ValueError("r = 0: the center coincides with an endpoint")
    return eng.triple_at_identity(a1, b1, ambient=ambient)


# ---------------------------------------------------------------- reduction

class _SupAccumulator:
    def __init__(self):
        self.best_f = None      # (value, index, pair)
        self.best_c = None
        self.inf = None
        self.count = 0

    def add(self, idx, pair, v: ExtendedLength):
        self.count += 1
        if v.is_infinite:
            if self.inf is None or idx < self.inf[0]:
                self.inf = (idx, pair, v)
            return True
        slot = "best_f" if v.is_finite else "best_c"
        cur = getattr(self, slot)
        if cur is None or v.value > cur[0] or (v.value == cur[0] and idx < cur[1]):
            setattr(self, slot, (v.value, idx, pair, v))
        return False

    def merge(self, other: "_SupAccumulator"):
        self.count += other.count
        if other.inf is not None and (self.inf is None or other.inf[0] < self.inf[0]):
            self.inf = other.inf
        for slot in ("best_f", "best_c"):
            o, s = getattr(other, slot), getattr(self, slot)
            if o is not None and (s is None or o[0] > s[0] or (o[0] == s[0] and o[1] < s[1])):
                setattr(self, slot, o)

    def result(self):
        if self.inf is not None:
            idx, pair, _ = self.inf
            return Infinite("witness pair disconnected"), pair, idx + 1
        if self.best_c is not None:
            lb = self.best_c[0]
            pair = self.best_c[2]
            if self.best_f is not None and self.best_f[0] > lb:
                lb, pair = self.best_f[0], self.best_f[2]
            return Censored(lb, note="some pair censored"), pair, self.count
        if self.best_f is None:
            return None, None, 0
        return Finite(self.best_f[0]), self.best_f[2], self.count


def _eval_pairs(eng: DivergenceEngine, pairs, start=0, stop_on_inf=True):
    acc = _SupAccumulator()
    for k, (a, b, d) in enumerate(pairs):
        v = eng.triple_at_identity(a, b, d)
        if acc.add(start + k, (a, b), v) and stop_on_inf:
            break
    return acc


def _chunk_worker(args):
    G, params, ball, pairs, start = args
    eng = DivergenceEngine(G, params, ball)
    return _eval_pairs(eng, pairs, start)


# ---------------------------------------------------------------- enumeration

def orbit_representatives(G: GroupModel, elems, use_symmetry=True):
    """Elements that are key-minimal in their automorphism orbit."""
    if not use_symmetry:
        return list(elems)
    auts = G.automorphisms()[1:]
    out = []
    for x in elems:
        k = G.key(x)
        if all(G.key(G.apply_automorphism(p, x)) >= k for p in auts):
            out.append(x)
    return out


class PairSource:
    """Enumerates or samples admissible (a, b, dist) triples for one n."""

    def __init__(self, eng: DivergenceEngine, mode: str, n: int, lam: Optional[float] = None):
        self.eng = eng
        self.G = eng.G
        self.mode = mode
        self.n = n
        self.lam = lam
        p = eng.p
        # beyond this radius every geodesic of length <= n avoids the ball
        if mode in (FREE_CENTER, SMALL):
            bound = (n // 2 - p.gamma) / (1 - p.delta)
            self.r_max = max(0, math.ceil(bound) - 1)
        else:
            self.r_max = n

    def r_range(self):
        n = self.n
        if self.mode == MIDPOINT:
            # n = 1 has no midpoint triple with r > 0; the baseline applies
            return [n // 2] if n // 2 > 0 else []
        if self.mode == BETWEEN:
            return list(range(1, n // 2 + 1))
        lo = 1
        if self.mode == SMALL:
            lo = max(1, math.ceil(1 / self.lam))
        return list(range(lo, self.r_max + 1))

    def ball_radius_needed(self):
        n = self.n
        if self.mode == MIDPOINT:
            return n - n // 2 if self.G.has_length else n
        if self.mode == BETWEEN:
            return n
        return max(n, self.r_max)

    def admissible(self, ra, rb, d):
        n = self.n
        if self.mode == MIDPOINT:
            return d == n
        if self.mode == BETWEEN:
            return d == ra + rb and d <= n
        if d > n or rb < ra or rb == 0:
            return False
        if self.mode == SMALL:
            return self.lam * ra >= d
        return True

    def pair_bound(self, ball: Ball):
        sizes = ball.sphere_sizes()
        tot = 0
        for r in self.r_range():
            if r > ball.radius:
                return None
            if self.mode == MIDPOINT:
                tot += sizes[r] * sizes[self.n - r]
            elif self.mode == BETWEEN:
                tot += sizes[r] * sum(sizes[r:self.n - r + 1])
            else:
                tot += sizes[r] * sum(sizes[:self.n + 1])
        return tot

    def enumerate(self, ball: Ball, use_symmetry=True):
        G, eng = self.G, self.eng
        n = self.n
        for r in self.r_range():
            reps = orbit_representatives(G, sphere(ball, r), use_symmetry)
            for a in reps:
                ainv = G.inv(a)
                if self.mode == MIDPOINT:
                    cands = [(y, n - r) for y in sphere(ball, n - r)]
                elif self.mode == BETWEEN:
                    cands = [(y, rb) for rb in range(r, n - r + 1) for y in sphere(ball, rb)]
                else:
                    cands = None
                if cands is not None:
                    for b, rb in cands:
                        z = G.product(ainv, b)
                        d = eng.metric.exact(z)
                        if d is None:
                            d = ball.dist_of(z)
                        if d is not None and self.admissible(r, rb, d):
                            yield a, b, d
                    continue
                # free center: b = a z with |z| <= n
                seen = set()
                found = []
                for dz in range(1, n + 1):
                    for z in sphere(ball, dz):
                        b = G.product(a, z)
                        rb = eng.norm(b)
                        if not self.admissible(r, rb, dz):
                            continue
                        k = G.key(b)
                        if k in seen:
                            continue
                        seen.add(k)
                        found.append((k, b, dz))
                found.sort(key=lambda t: t[0])
                for _k, b, dz in found:
                    yield a, b, dz

    # sampling

    def _random_geodesic(self, rnd, length, base=None):
        """Random x with |x| = length and, if base given, |base^-1 x| = |base| + length."""
        G, eng = self.G, self.eng
        for _attempt in range(200):
            x = G.identity
            bx = base
            ok = True
            for i in range(length):
                opts = []
                for s in range(G.ngens):
                    y = G.mul(x, s)
                    if eng.norm(y) != i + 1:
                        continue
                    if bx is not None:
                        by = G.mul(bx, s)
                        if eng.norm(by) != eng.norm(bx) + 1:
                            continue
                        opts.append((s, y, by))
                    else:
                        opts.append((s, y, None))
                if not opts:
                    ok = False
                    break
                s, x, bx = opts[rnd.randrange(len(opts))]
            if ok:
                return x
        return None

    def sample(self, count: int, seed: int):
        G, eng = self.G, self.eng
        rnd = random.Random(f"{seed}:{self.mode}:{self.n}")
        rs = self.r_range()
        if not rs:
            return
        got = 0
        tries = 0
        while got < count and tries < 20 * count:
            tries += 1
            r = rs[rnd.randrange(len(rs))]
            a = self._random_geodesic(rnd, r)
            if a is None:
                continue
            ainv = G.inv(a)
            if self.mode == MIDPOINT:
                b = self._random_geodesic(rnd, self.n - r, base=ainv)
                d = self.n
            elif self.mode == BETWEEN:
                rb = rnd.randint(r, self.n - r)
                b = self._random_geodesic(rnd, rb, base=ainv)
                d = r + rb
            else:
                d = rnd.randint(1, self.n)
                z = self._random_geodesic(rnd, d)
                if z is None:
                    continue
                b = G.product(a, z)
                rb = eng.norm(b)
                if not self.admissible(r, rb, d):
                    continue
            if b is None:
                continue
            got += 1
            yield a, b, d


# ---------------------------------------------------------------- drivers

def _sizes_estimate(G, R: int, budget_mb: float, probe: int = 6):
    """Sphere sizes up to R, measured on a small ball and extrapolated."""
    small = build_ball(G, min(R, probe), budget_mb)
    sizes = small.sphere_sizes()
    while len(sizes) <= R:
        ratio = sizes[-1] / max(1, sizes[-2]) if len(sizes) > 1 else 1
        sizes.append(int(math.ceil(sizes[-1] * ratio)))
    return sizes


class _BallCache:
    def __init__(self, G, ball=None):
        self.G = G
        self.ball = ball

    def get(self, R, budget_mb):
        if self.ball is not None and self.ball.radius >= R:
            return self.ball
        try:
            self.ball = build_ball(self.G, R, budget_mb)
        except ResourceLimit:
            return None
        return self.ball


def _with_baseline(value: ExtendedLength, witness, n):
    """Pairs at distance n with an empty forbidden set always exist."""
    if value is None:
        return Finite(n), None
    if value.is_finite and value.value < n:
        return Finite(n), None
    if value.is_censored and value.value < n:
        return Censored(n, note=value.note), witness
    return value, witness


def _sup_for_n(eng: DivergenceEngine, mode: str, n: int, cache: _BallCache,
               threads: int = 1, lam=None) -> DivergenceSample:
    p = eng.p
    G = eng.G
    t0 = time.perf_counter()
    if n <= 0:
        return DivergenceSample(n, Finite(0), None, 0, True)
    src = PairSource(eng, mode, n, lam)
    need = src.ball_radius_needed()
    nauts = len(G.automorphisms()) if p.use_symmetry else 1
    exhaustive = False
    big = None
    if cache.ball is not None and cache.ball.radius >= need:
        big = cache.ball
    else:
        est = _sizes_estimate(G, need, p.ball_budget_mb)
        fake = Ball(G)
        fake.radius = need
        fake.layers = [[0] * k for k in est]
        guess = src.pair_bound(fake)
        if guess is not None and guess / nauts <= 2 * p.exhaustive_pairs:
            big = cache.get(need, p.ball_budget_mb)
    if big is not None:
        bound = src.pair_bound(big)
        exhaustive = bound is not None and bound / nauts <= 2 * p.exhaustive_pairs
    if exhaustive:
        pairs = list(src.enumerate(big, p.use_symmetry))
        exhaustive = len(pairs) <= p.exhaustive_pairs
    if not exhaustive:
        if not G.has_length:
            raise ResourceLimit("sampling needs a model with an exact length function")
        pairs = list(src.sample(p.samples, p.seed))
    if threads > 1 and len(pairs) > 64:
        acc = _parallel(eng, pairs, threads)
    else:
        acc = _eval_pairs(eng, pairs)
    value, witness, count = acc.result()
    value, witness = _with_baseline(value, witness, n)
    ms = (time.perf_counter() - t0) * 1000 if p.record_timing else None
    return DivergenceSample(n, value, witness, count, exhaustive, ms)


def _parallel(eng, pairs, threads):
    k = threads
    size = math.ceil(len(pairs) / k)
    jobs = [(eng.G, eng.p, eng.ball, pairs[i:i + size], i) for i in range(0, len(pairs), size)]
    acc = _SupAccumulator()
    with ProcessPoolExecutor(max_workers=k) as ex:
        for part in ex.map(_chunk_worker, jobs):
            acc.merge(part)
    if acc.inf is not None:
        acc.count = acc.inf[0] + 1
    return acc


def div_function(G: GroupModel, n_grid, params: Optional[DivergenceParams] = None,
                 mode: str = MIDPOINT, ball: Optional[Ball] = None, threads: int = 1,
                 label: Optional[str] = None) -> DivergenceTable:
    """Sampled divergence function over an increasing grid of n."""
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    params = (params or DivergenceParams()).validate()
    grid = list(n_grid)
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("n grid must be strictly increasing")
    eng = DivergenceEngine(G, params, ball)
    cache = _BallCache(G, ball)
    samples = [_sup_for_n(eng, mode, n, cache, threads) for n in grid]
    return DivergenceTable(label or group_label(G), mode, params, samples)


def small_div(G: GroupModel, n: int, params: Optional[DivergenceParams] = None,
              ball: Optional[Ball] = None) -> DivergenceSample:
    """Small divergence: pairs with lambda * r >= dist(a, b)."""
    params = params or DivergenceParams()
    if params.lam < 2:
        raise ValueError(f"lambda={params.lam} must be at least 2")
    params.validate()
    eng = DivergenceEngine(G, params, ball)
    return _sup_for_n(eng, SMALL, n, _BallCache(G, ball), lam=params.lam)


def small_div_table(G, n_grid, params=None, ball=None, label=None) -> DivergenceTable:
    params = params or DivergenceParams()
    return DivergenceTable(label or group_label(G), SMALL, params,
                           [small_div(G, n, params, ball) for n in n_grid])


# ---------------------------------------------------------------- axes

def has_infinite_order(G: GroupModel, g, k: int = 8) -> bool:
    seen = {G.key(G.identity)}
    x = G.identity
    for _ in range(k):
        x = G.product(x, g)
        kk = G.key(x)
        if kk in seen:
            return False
        seen.add(kk)
    return True


def axis_divergence(G: GroupModel, g, r_grid, params: Optional[DivergenceParams] = None,
                    ball: Optional[Ball] = None, label: Optional[str] = None) -> DivergenceTable:
    """div(g^m, g^-m, 1) where m is least with |g^m| >= r."""
    params = (params or DivergenceParams()).validate()
    if G.is_identity(g):
        raise ValueError("axis element must not be the identity")
    if not has_infinite_order(G, g):
        raise ValueError("axis element looks like it has finite order")
    grid = list(r_grid)
    if ball is None and not G.has_length:
        # distances come from a ball; beyond it the metric is a lower bound
        ball = build_ball(G, min(2 * max(grid), AXIS_BALL_CAP), params.ball_budget_mb)
    eng = DivergenceEngine(G, params, ball)
    ginv = G.inv(g)
    out = []
    for r in grid:
        t0 = time.perf_counter()
        m, x = 0, G.identity
        while True:
            m += 1
            x = G.product(x, g)
            if eng.norm(x) >= r:
                break
            if m > 10 * max(1, r) + 10:
                raise ValueError("axis does not leave the ball")
        y = G.identity
        for _ in range(m):
            y = G.product(y, ginv)
        v = eng.triple_at_identity(x, y)
        ms = (time.perf_counter() - t0) * 1000 if params.record_timing else None
        out.append(DivergenceSample(r, v, (x, y), 1, True, ms,
                                    {"m": m, "dist": eng.norm(x)}))
    return DivergenceTable(label or group_label(G), "axis", params, out)
