"""Acceptance criteria 1-9, each driven through the command-line configs.

Every criterion runs its configs once (session cache); criterion 9 reruns
all of them into a second directory and compares CSV bytes.
"""
import csv
import json
import time
from itertools import product

import pytest

import oracles
from divlab import make_free, make_zn
from divlab.cli import run_config
from divlab.order import SampledFunction, power_law, preceq_search

Z2 = {"family": "zn", "n": 2}
P3 = {"family": "raag", "path": 3}
P4 = {"family": "raag", "path": 4}
F2 = {"family": "free", "k": 2}
GERSTEN = {"family": "gersten"}
F2_AXES = ["a", "a b", "a a b", "a b^-1", "a b a^-1"]


def _z2_word(i, j):
    parts = (["e1"] * i if i > 0 else ["e1^-1"] * -i) + (["e2"] * j if j > 0 else ["e2^-1"] * -j)
    return " ".join(parts)


Z2_POINTS = [(i, j) for i, j in product(range(-2, 3), repeat=2) if abs(i) + abs(j) <= 2]


def _configs():
    c = {}
    for name, g in (("z2", Z2), ("p3", P3)):
        c[f"c1_{name}"] = {"command": "divergence", "group": g, "mode": "midpoint",
                           "delta": 0.5, "gamma": 2.0, "n_grid": [4, 6, 8, 10], "seed": 1}
        c[f"c2_{name}"] = {"command": "divergence", "group": g, "mode": "midpoint",
                           "delta": 0.5, "gamma": 2.0, "n_grid": {"start": 4, "stop": 24},
                           "exhaustive_pairs": 200000, "samples": 2000, "seed": 1}
    c["c3_p4"] = {"command": "divergence", "group": P4, "mode": "midpoint", "delta": 0.75,
                  "gamma": 3.25, "n_grid": [6, 8, 10, 12, 14], "exhaustive_pairs": 300000,
                  "samples": 2000, "seed": 1}
    c["c3_gersten"] = {"command": "axis-divergence", "group": GERSTEN, "element": "a",
                       "r_grid": [3, 4, 5, 6], "delta": 0.75, "gamma": 2.5, "max_nodes": 3000000}
    for mode in ("midpoint", "between", "freecenter"):
        c[f"c4_{mode}"] = {"command": "divergence", "group": Z2, "mode": mode, "delta": 0.5,
                           "gamma": 2.0, "n_grid": {"start": 2, "stop": 10}, "seed": 1}
    for mode in ("midpoint", "between", "freecenter", "small"):
        c[f"c5_{mode}"] = {"command": "divergence", "group": F2, "mode": mode, "delta": 0.5,
                           "gamma": 0.0, "n_grid": {"start": 2, "stop": 8}, "seed": 1}
    net = {"command": "network-audit", "group": P4, "ball_radius": 3, "tau": 1, "eta": 2,
           "delta": 0.5, "gamma": 2.0, "n_grid": {"start": 4, "stop": 12},
           "exhaustive_pairs": 200000, "seed": 1}
    c["c6_network"] = dict(net, subgroups=[["a", "b", "c"], ["b", "c", "d"]])
    c["c6_trivial"] = dict(net, subgroups=[["a", "b", "c", "d"]])
    for i, w in enumerate(F2_AXES):
        c[f"c7_f2_{i}"] = {"command": "contraction", "group": F2, "element": w, "span": 3,
                           "ball_radius": 9, "centers": {"count": 12, "max_offset": 3},
                           "sample_cap": 100000, "seed": 3}
    c["c7_z2"] = {"command": "contraction", "group": Z2, "element": "e1", "span": 10,
                  "ball_radius": 10, "centers": [_z2_word(0, k) for k in range(1, 9)], "seed": 3}
    c["c8_f2"] = {"command": "conjugacy", "group": F2, "R_max": 4, "seed": 8,
                  "pairs": {"count": 100, "u_len": 6, "g_len": 4}}
    c["c8_z2"] = {"command": "conjugacy", "group": Z2, "R_max": 4, "seed": 8,
                  "pairs": [[_z2_word(*p), _z2_word(*q)] for p in Z2_POINTS for q in Z2_POINTS
                            if p != q]}
    return c


CONFIGS = _configs()


class Runs:
    def __init__(self, root):
        self.root = root
        self.times = {}

    def get(self, name, sub="first"):
        out = self.root / sub / name
        if (sub, name) not in self.times:
            t0 = time.perf_counter()
            code = run_config(CONFIGS[name], out)
            self.times[(sub, name)] = time.perf_counter() - t0
            assert code == 0, f"{name} exited with {code}"
        return out

    def rows(self, name, file):
        with open(self.get(name) / file, newline="") as fh:
            return list(csv.DictReader(fh))

    def json(self, name, file):
        return json.loads((self.get(name) / file).read_text())

    def elapsed(self, *names):
        return sum(self.times[("first", n)] for n in names)


@pytest.fixture(scope="session")
def runs(tmp_path_factory):
    return Runs(tmp_path_factory.mktemp("acceptance"))


def _values(rows):
    return [int(r["value"]) for r in rows]


def _fn(rows):
    return SampledFunction((int(r["n"]), int(r["value"])) for r in rows)


def _lt(G, text):
    return oracles.free_reduce([(s // 2, -1 if s % 2 else 1) for s in G.word_of(G.element(text))])


# ---------------------------------------------------------------- 1

def test_criterion_1_oracle_equivalence(runs, criterion):
    got = {k: _values(runs.rows(f"c1_{k}", "divergence.csv")) for k in ("z2", "p3")}
    tool_s = runs.elapsed("c1_z2", "c1_p3")
    ns = (4, 6, 8, 10)
    want = {"z2": [oracles.z2_midpoint_div(n, 0.5, 2.0) for n in ns],
            "p3": [oracles.p3_midpoint_div(n, 0.5, 2.0) for n in ns]}
    ok = got == want and tool_s < 120
    criterion(1, ok, f"tool {got}, oracle {want}, {tool_s:.1f}s")
    assert ok


# ---------------------------------------------------------------- 2

def test_criterion_2_linear_regime(runs, criterion):
    verdicts, details = [], []
    for k in ("z2", "p3"):
        rows = runs.rows(f"c2_{k}", "divergence.csv")
        finite = all(r["status"] == "finite" for r in rows)
        v = preceq_search(_fn(rows), power_law(1)) if finite else None
        verdicts.append(finite and v.relation == "PrecEq" and v.C <= 8)
        details.append(f"{k}: {v}")
    secs = runs.elapsed("c2_z2", "c2_p3")
    ok = all(verdicts) and secs < 600
    criterion(2, ok, f"{'; '.join(details)}, {secs:.1f}s")
    assert ok


# ---------------------------------------------------------------- 3

def _strict_run(ratios, k=3):
    best = cur = 1
    for a, b in zip(ratios, ratios[1:]):
        cur = cur + 1 if b > a else 1
        best = max(best, cur)
    return best >= k


def test_criterion_3_superlinear_regime(runs, criterion):
    parts, oks = [], []
    for name, file in (("c3_p4", "divergence.csv"), ("c3_gersten", "axis_divergence.csv")):
        rows = runs.rows(name, file)
        finite = all(r["status"] == "finite" for r in rows)
        if not finite:
            oks.append(False)
            parts.append(f"{name}: non-finite values {[r['status'] for r in rows]}")
            continue
        ratios = [int(r["value"]) / int(r["n"]) for r in rows]
        v = preceq_search(_fn(rows), power_law(2))
        ok = _strict_run(ratios) and v.relation == "PrecEq" and v.C <= 16
        oks.append(ok)
        parts.append(f"{name}: values {_values(rows)}, Div/n {[round(x, 2) for x in ratios]}, {v}")
    secs = runs.elapsed("c3_p4", "c3_gersten")
    ok = all(oks) and secs < 1800
    criterion(3, ok, f"{'; '.join(parts)}, {secs:.1f}s")
    assert ok


# ---------------------------------------------------------------- 4

def test_criterion_4_variant_equivalences(runs, criterion):
    tabs = {m: runs.rows(f"c4_{m}", "divergence.csv") for m in ("midpoint", "between", "freecenter")}
    exhaustive = all(r["exhaustive"] == "1" for t in tabs.values() for r in t)
    vals = {m: _values(t) for m, t in tabs.items()}
    ordered = all(a <= b <= c for a, b, c in zip(vals["midpoint"], vals["between"], vals["freecenter"]))
    mono = all(b >= a for a, b in zip(vals["midpoint"], vals["midpoint"][1:]))
    v = preceq_search(_fn(tabs["freecenter"]), _fn(tabs["midpoint"]), monotone=mono)
    secs = runs.elapsed(*(f"c4_{m}" for m in tabs))
    ok = exhaustive and ordered and v.relation == "PrecEq" and v.C <= 8 and secs < 300
    criterion(4, ok, f"exhaustive={exhaustive}, ordered={ordered}, FreeCenter vs Midpoint {v}, {secs:.1f}s")
    assert ok


# ---------------------------------------------------------------- 5

def test_criterion_5_tree_infinities(runs, criterion):
    F = make_free(2)
    all_inf, validated, checked = True, True, 0
    for mode in ("midpoint", "between", "freecenter", "small"):
        for r in runs.rows(f"c5_{mode}", "divergence.csv"):
            all_inf &= r["status"] == "infinite"
            a, b = _lt(F, r["witness_a"]), _lt(F, r["witness_b"])
            rho = 0.5 * min(len(a), len(b))
            # the certificate claims no path at any ambient; check every ambient up to 8
            for amb in range(max(len(a), len(b)), 9):
                checked += 1
                validated &= not oracles.f2_reachable(a, b, rho, amb)
    ok = all_inf and validated and checked > 0
    criterion(5, ok, f"all Infinite={all_inf}, certificates agree with search={validated} over {checked} ambient checks")
    assert ok


# ---------------------------------------------------------------- 6

def test_criterion_6_network_bound(runs, criterion):
    rep = runs.json("c6_network", "network_audit.json")
    triv = runs.json("c6_trivial", "network_audit.json")
    p, t = rep["preceq"], triv["preceq"]
    ok = (p["verdict"] == "PrecEq" and p["C"] <= 16 and t["verdict"] == "PrecEq" and t["C"] == 1)
    criterion(6, ok, f"network {p['verdict']}(C={p['C']}), trivial {t['verdict']}(C={t['C']})")
    assert ok


# ---------------------------------------------------------------- 7

def test_criterion_7_contraction_dichotomy(runs, criterion):
    F = make_free(2)
    tree_ok, tree_exact = True, True
    worst = 0
    for i, w in enumerate(F2_AXES):
        name = f"c7_f2_{i}"
        d = runs.json(name, "contraction.json")["D_estimate"]
        worst = max(worst, d)
        tree_ok &= d <= 1
        g = F.element(w)
        x = F.identity
        for _ in range(3):
            x = F.product(x, F.inv(g))
        axis = [_lt(F, F.format(x))]
        for s in F.word_of(g) * 6:
            x = F.mul(x, s)
            axis.append(_lt(F, F.format(x)))
        for r in runs.rows(name, "contraction.csv"):
            want = oracles.f2_projection_diameter(_lt(F, r["center"]), axis, int(r["ball_radius"]))
            tree_exact &= int(r["proj_diameter"]) == want
    Z = make_zn(2)
    zrows = runs.rows("c7_z2", "contraction.csv")
    axis = [(k, 0) for k in range(-10, 11)]
    diams = [int(r["proj_diameter"]) for r in zrows]
    offs = [abs(Z.element(r["center"])[1]) for r in zrows]
    want = [oracles.z2_projection_diameter((0, k), axis, k - 1) for k in offs]
    grid_ok = (diams == want and all(d >= k - 1 for d, k in zip(diams, offs))
               and all(b > a for a, b in zip(diams, diams[1:])))
    ok = tree_ok and tree_exact and grid_ok
    criterion(7, ok, f"F2 max D={worst}, F2 exact={tree_exact}, Z^2 diameters {diams} at offsets {offs}")
    assert ok


# ---------------------------------------------------------------- 8

def test_criterion_8_conjugacy(runs, criterion):
    F = make_free(2)
    rows = runs.rows("c8_f2", "conjugacy.csv")
    planted = runs.json("c8_f2", "conjugacy_pairs.json")
    found = bound = exact = True
    for r, p in zip(rows, planted):
        found &= r["status"] == "Found"
        if not found:
            break
        k = int(r["shortest_g"])
        bound &= k <= p["planted_len"]
        exact &= k == oracles.free_shortest_conjugator(_lt(F, p["u"]), _lt(F, p["v"]))
    zrows = runs.rows("c8_z2", "conjugacy.csv")
    z_ok = len(zrows) == len(CONFIGS["c8_z2"]["pairs"]) and all(
        r["status"] == "NotFoundUpTo" for r in zrows)
    secs = runs.elapsed("c8_f2", "c8_z2")
    ok = len(rows) == 100 and found and bound and exact and z_ok and secs < 300
    criterion(8, ok, f"F2 found={found}, <= planted={bound}, oracle match={exact}; Z^2 all NotFoundUpTo={z_ok}; {secs:.1f}s")
    assert ok


# ---------------------------------------------------------------- 9

def test_criterion_9_determinism(runs, criterion):
    diffs, compared = [], 0
    for name in CONFIGS:
        first = runs.get(name)
        second = runs.get(name, "second")
        for f in sorted(first.glob("*.csv")):
            compared += 1
            if f.read_bytes() != (second / f.name).read_bytes():
                diffs.append(f"{name}/{f.name}")
    ok = not diffs and compared > 0
    criterion(9, ok, f"{compared} CSV files compared, differing: {diffs or 'none'}")
    assert ok
