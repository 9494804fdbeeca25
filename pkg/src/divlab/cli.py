"""Command-line front end.

    divlab --config run.json --out results/ [--threads N] [--budget-mb M] [--seed S]

The config is a JSON object with a ``command`` and, for most commands, a
``group`` description.  Exit codes: 0 success, 2 invalid input, 3 resource
ceiling reached (a partial manifest is still written).
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import random
import sys
import time
from pathlib import Path
from typing import Optional

from . import __version__
from .cayley import ResourceLimit, build_ball
from .conjugacy import (acylindricity_profile, conjugate,
                        shortest_conjugator_table)
from .divergence import (CSV_COLUMNS, MODES, DivergenceParams, axis_divergence,
                         div_function, small_div_table)
from .groups import GroupError, make_group
from .morse import contraction_profile, make_axis, quadratic_lower_audit, sample_centers
from .network import (chain_audit, geodesic_cover, make_subgroup, network_divergence_audit,
                      quasiconvexity_audit)
from .order import (ASYMP, SampledFunction, asymp_search, power_law, preceq_search)

COMMANDS = ("ball-stats", "divergence", "axis-divergence", "contraction", "network-audit",
            "conjugacy", "order-compare")

EXIT_OK, EXIT_INVALID, EXIT_RESOURCE = 0, 2, 3


class ConfigError(ValueError):
    pass


def _grid(spec, name):
    """A list of ints, or {"start", "stop", "step"} with stop inclusive."""
    if isinstance(spec, list):
        try:
            out = [int(x) for x in spec]
        except (TypeError, ValueError):
            raise ConfigError(f"{name} must hold integers") from None
    elif isinstance(spec, dict):
        try:
            out = list(range(int(spec["start"]), int(spec["stop"]) + 1, int(spec.get("step", 1))))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"{name}: bad range ({exc})") from None
    else:
        raise ConfigError(f"{name} is required")
    if not out or any(b <= a for a, b in zip(out, out[1:])) or out[0] < 0:
        raise ConfigError(f"{name} must be a nonempty increasing list of nonnegative integers")
    return out


def _params(cfg, seed, budget) -> DivergenceParams:
    p = DivergenceParams(
        delta=float(cfg.get("delta", 0.5)),
        gamma=float(cfg.get("gamma", 2.0)),
        lam=float(cfg.get("lambda", 2.0)),
        exhaustive_pairs=int(cfg.get("exhaustive_pairs", 2_000_000)),
        samples=int(cfg.get("samples", 2000)),
        seed=seed,
        max_nodes=int(cfg.get("max_nodes", 400_000)),
        ball_budget_mb=budget,
        record_timing=bool(cfg.get("record_timing", False)),
    )
    if "ambient_mult" in cfg:
        p.ambient_mult = float(cfg["ambient_mult"])
    if "ambient_extra" in cfg:
        p.ambient_extra = int(cfg["ambient_extra"])
    try:
        return p.validate()
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


class Run:
    def __init__(self, cfg: dict, out: Path, threads: int, budget: float, seed: int):
        self.cfg, self.out, self.threads, self.budget, self.seed = cfg, out, threads, budget, seed
        self.files: list[str] = []
        self.flags: list[str] = []

    def write(self, name: str, text: str):
        self.out.mkdir(parents=True, exist_ok=True)
        (self.out / name).write_text(text)
        self.files.append(name)

    def write_json(self, name: str, obj):
        self.write(name, json.dumps(obj, indent=2, sort_keys=True) + "\n")

    def group(self):
        if "group" not in self.cfg:
            raise ConfigError("config needs a 'group' description")
        return make_group(self.cfg["group"])

    def note_table(self, table):
        for s in table.samples:
            if s.value.is_censored:
                self.flags.append(f"censored: {table.group} {table.mode} n={s.n}")


def cmd_ball_stats(run: Run):
    G = run.group()
    R = int(run.cfg.get("R", -1))
    if R < 0:
        raise ConfigError("ball-stats needs R >= 0")
    ball = build_ball(G, R, run.budget)
    sizes = ball.sphere_sizes()
    rows, tot = [], 0
    for r, s in enumerate(sizes):
        tot += s
        rows.append([r, s, tot])
    run.write("ball_stats.csv", _csv_text(["r", "sphere_size", "ball_size"], rows))


def _divergence_rows(run, G, table):
    run.note_table(table)
    return _csv_text(CSV_COLUMNS, table.csv_rows(G))


def cmd_divergence(run: Run):
    G = run.group()
    cfg = run.cfg
    p = _params(cfg, run.seed, run.budget)
    grid = _grid(cfg.get("n_grid"), "n_grid")
    mode = cfg.get("mode", "midpoint")
    if mode == "small":
        table = small_div_table(G, grid, p)
    elif mode in MODES:
        table = div_function(G, grid, p, mode, threads=run.threads)
    else:
        raise ConfigError(f"mode must be one of {MODES + ('small',)}")
    run.write("divergence.csv", _divergence_rows(run, G, table))
    run.write("plot.csv", _plot_csv(table))


def _plot_csv(table) -> str:
    rows = [[s.n, "inf" if s.value.is_infinite else s.value.value, s.value.tag] for s in table.samples]
    return _csv_text(["x", "y", "status"], rows)


def cmd_axis_divergence(run: Run):
    G = run.group()
    cfg = run.cfg
    if "element" not in cfg:
        raise ConfigError("axis-divergence needs an 'element' word")
    p = _params(cfg, run.seed, run.budget)
    g = G.element(cfg["element"])
    table = axis_divergence(G, g, _grid(cfg.get("r_grid"), "r_grid"), p)
    run.write("axis_divergence.csv", _divergence_rows(run, G, table))
    run.write("plot.csv", _plot_csv(table))
    if len(table.samples) >= 4:
        v = quadratic_lower_audit(table)
        run.write_json("quadratic_audit.json", {"verdict": v.relation, "C": v.C,
                                                "detail": v.detail, "scale_limited": True})


def cmd_contraction(run: Run):
    G = run.group()
    cfg = run.cfg
    if "element" not in cfg:
        raise ConfigError("contraction needs an 'element' word")
    R = int(cfg.get("ball_radius", 8))
    m = int(cfg.get("span", 10))
    ball = build_ball(G, R, run.budget)
    axis = make_axis(G, G.element(cfg["element"]), m, ball)
    cs = cfg.get("centers", {"count": 20})
    if isinstance(cs, list):
        centers = [G.element(w) for w in cs]
    elif isinstance(cs, dict):
        centers = sample_centers(G, axis, ball, int(cs.get("count", 20)), run.seed,
                                 cs.get("max_offset"))
    else:
        raise ConfigError("centers must be a list of words or {count, max_offset}")
    rep = contraction_profile(G, axis, centers, ball, int(cfg.get("sample_cap", 400)), run.seed)
    run.write("contraction.csv", _csv_text(["center", "ball_radius", "proj_diameter"],
                                           rep.csv_rows(G)))
    run.write_json("contraction.json", {"D_estimate": rep.D_estimate, "centers": len(rep.samples),
                                        "scale_limited": True})


def cmd_network_audit(run: Run):
    G = run.group()
    cfg = run.cfg
    subs = cfg.get("subgroups")
    if not isinstance(subs, list) or not subs:
        raise ConfigError("network-audit needs a nonempty 'subgroups' list of generator lists")
    Hs = [make_subgroup(G, gens) for gens in subs]
    tau, eta = int(cfg.get("tau", 1)), int(cfg.get("eta", 2))
    report = {"tau": tau, "eta": eta, "chains": [], "covering": [], "quasiconvexity": []}
    R = int(cfg.get("ball_radius", 4))
    ball = build_ball(G, R, run.budget)
    for i, H in enumerate(Hs):
        qc = quasiconvexity_audit(G, H, int(cfg.get("qc_C", 2)), float(cfg.get("qc_L", 1)), R, ball)
        report["quasiconvexity"].append({"subgroup": H.label, "passed": qc.passed,
                                         "pairs": qc.pairs, "failures": len(qc.failures)})
    for i in range(len(Hs)):
        for j in range(i, len(Hs)):
            ch = chain_audit(G, Hs, G.identity, tau, eta, ball, i, j)
            report["chains"].append({
                "source": Hs[i].label, "target": Hs[j].label, "found": ch.found,
                "cosets": [c.label for c in ch.cosets],
                "links": [{"diameter_at_least": ln.diameter, "connected": ln.connected,
                           "meets": ln.meets} for ln in ch.links],
                "threshold": ch.threshold, "reason": ch.reason})
    for w in cfg.get("geodesics", []):
        cov = geodesic_cover(G, Hs, w, tau)
        report["covering"].append({"geodesic": w, "n": cov.n,
                                   "steps": [[G.format(s.point), s.coset.label] for s in cov.steps]})
    if "n_grid" in cfg:
        p = _params(cfg, run.seed, run.budget)
        nr = network_divergence_audit(G, Hs, _grid(cfg["n_grid"], "n_grid"), p,
                                      threads=run.threads)
        for t in [nr.g_table] + nr.h_tables:
            run.note_table(t)
        j = nr.to_json()
        report["preceq"] = j["preceq"]
        report["divergence"] = {k: j[k] for k in ("g", "n_max_div_h", "subgroup_tables")}
        report["scale_flags"] = j["scale_flags"] + ["infinite diameter read as diameter >= R - 2"]
        report["notes"] = j["notes"]
        rows = [[n, s.value.tag, "inf" if s.value.is_infinite else s.value.value, gv]
                for s, (n, gv) in zip(nr.g_table.samples, nr.g_values or
                                      [(s.n, "") for s in nr.g_table.samples])]
        run.write("network_divergence.csv", _csv_text(["n", "status", "div_g", "n_max_div_h"], rows))
    else:
        report["scale_flags"] = ["infinite diameter read as diameter >= R - 2"]
    run.write_json("network_audit.json", report)


def _random_pairs(G, spec, seed):
    rnd = random.Random(f"conjugacy:{seed}")
    count = int(spec.get("count", 20))
    ul, gl = int(spec.get("u_len", 6)), int(spec.get("g_len", 4))
    out = []
    for _ in range(count):
        u = G.evaluate([rnd.randrange(G.ngens) for _ in range(rnd.randint(1, ul))])
        g = G.evaluate([rnd.randrange(G.ngens) for _ in range(rnd.randint(0, gl))])
        out.append((u, conjugate(G, g, u), g))
    return out


def cmd_conjugacy(run: Run):
    G = run.group()
    cfg = run.cfg
    R = int(cfg.get("R_max", 4))
    if R < 0:
        raise ConfigError("R_max must be nonnegative")
    pairs = cfg.get("pairs")
    if isinstance(pairs, list):
        pp = [(G.element(u), G.element(v)) for u, v in pairs]
    elif isinstance(pairs, dict):
        planted = _random_pairs(G, pairs, run.seed)
        pp = [(u, v) for u, v, _g in planted]
        run.write_json("conjugacy_pairs.json", [
            {"u": G.format(u), "v": G.format(v), "planted_g": G.format(g),
             "planted_len": G.length(g) if G.has_length else None}
            for u, v, g in planted])
    elif "acylindricity" not in cfg:
        raise ConfigError("conjugacy needs 'pairs' or 'acylindricity'")
    else:
        pp = []
    if pp:
        tab = shortest_conjugator_table(G, pp, R)
        run.write("conjugacy.csv", _csv_text(["len_u", "len_v", "shortest_g", "checked", "status"],
                                             tab.csv_rows()))
    ac = cfg.get("acylindricity")
    if ac is not None:
        ball = build_ball(G, int(ac.get("ball_radius", 6)), run.budget)
        prof = acylindricity_profile(G, int(ac.get("R", 2)), ball)
        run.write_json("acylindricity.json", prof.to_json(G))


def _load_table(path: str) -> SampledFunction:
    """(x, y) from a divergence CSV (n, value) or a plot CSV (x, y)."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ConfigError(f"{path}: empty table")
    xk = "n" if "n" in rows[0] else "x"
    yk = "value" if "value" in rows[0] else "y"
    pts = []
    for r in rows:
        st = r.get("status", "finite")
        if st not in ("finite", ""):
            raise ConfigError(f"{path}: non-finite entry at {xk}={r[xk]} ({st})")
        pts.append((int(float(r[xk])), float(r[yk])))
    return SampledFunction(pts)


def _reference(spec, xmax) -> SampledFunction:
    p = float(spec.get("power", 1))
    return power_law(p, max(4096, xmax), float(spec.get("coef", 1)))


def cmd_order_compare(run: Run):
    cfg = run.cfg
    tabs = cfg.get("tables")
    if not isinstance(tabs, list) or not 1 <= len(tabs) <= 2:
        raise ConfigError("order-compare needs 'tables': one or two CSV paths")
    f = _load_table(tabs[0])
    if len(tabs) == 2:
        g = _load_table(tabs[1])
    elif "reference" in cfg:
        g = _reference(cfg["reference"], int(f.x[-1]) * 130)
    else:
        raise ConfigError("a single table needs a 'reference' such as {\"power\": 2}")
    rel = cfg.get("relation", "asymp")
    mono = cfg.get("monotone", "auto")
    if mono == "auto":
        mono = all(b >= a for a, b in zip(g.y, g.y[1:])) and all(b >= a for a, b in zip(f.y, f.y[1:]))
    if rel == "preceq":
        v = preceq_search(f, g, monotone=bool(mono))
    elif rel == "asymp":
        v = asymp_search(f, g, monotone=bool(mono))
    else:
        raise ConfigError("relation must be 'preceq' or 'asymp'")
    text = f"{tabs[0]} vs {tabs[1] if len(tabs) == 2 else cfg['reference']}: {v}"
    run.write_json("order_compare.json", {"relation": rel, "verdict": v.relation, "C": v.C,
                                          "violating_x": v.violating_x, "detail": v.detail,
                                          "monotone_extension": bool(mono), "summary": text,
                                          "holds": v.relation in ("PrecEq", ASYMP)})
    print(text)


HANDLERS = {
    "ball-stats": cmd_ball_stats,
    "divergence": cmd_divergence,
    "axis-divergence": cmd_axis_divergence,
    "contraction": cmd_contraction,
    "network-audit": cmd_network_audit,
    "conjugacy": cmd_conjugacy,
    "order-compare": cmd_order_compare,
}


def config_hash(cfg: dict) -> str:
    return hashlib.sha256(json.dumps(cfg, sort_keys=True, separators=(",", ":")).encode()).hexdigest()


def _write_manifest(run: Run, cfg, t0, status, error=None):
    man = {
        "config_hash": config_hash(cfg),
        "tool_version": __version__,
        "command": cfg.get("command"),
        "seed": run.seed,
        "wall_time_s": round(time.perf_counter() - t0, 3),
        "status": status,
        "censored": bool(run.flags),
        "censoring_flags": run.flags,
        "files": sorted(run.files) + ["manifest.json"],
    }
    if error:
        man["error"] = error
    run.out.mkdir(parents=True, exist_ok=True)
    (run.out / "manifest.json").write_text(json.dumps(man, indent=2, sort_keys=True) + "\n")


def run_config(cfg: dict, out: Path, threads: int = 1, budget_mb: Optional[float] = None,
               seed: Optional[int] = None) -> int:
    t0 = time.perf_counter()
    if not isinstance(cfg, dict):
        print("error: config must be a JSON object", file=sys.stderr)
        return EXIT_INVALID
    cmd = cfg.get("command")
    if cmd not in HANDLERS:
        print(f"error: command must be one of {', '.join(COMMANDS)}", file=sys.stderr)
        return EXIT_INVALID
    if seed is None:
        if "seed" not in cfg and cmd in ("divergence", "contraction", "conjugacy", "network-audit"):
            print("error: 'seed' is required for commands that may sample", file=sys.stderr)
            return EXIT_INVALID
        seed = int(cfg.get("seed", 0))
    if budget_mb is None:
        budget_mb = float(os.environ.get("DIVLAB_BUDGET_MB", 1024))
    if threads == 0:
        threads = os.cpu_count() or 1
    run = Run(cfg, out, threads, budget_mb, seed)
    try:
        HANDLERS[cmd](run)
    except (ConfigError, GroupError, ValueError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ResourceLimit, MemoryError) as exc:
        print(f"resource ceiling: {exc}", file=sys.stderr)
        run.flags.append(f"resource ceiling: {exc}")
        _write_manifest(run, cfg, t0, "resource-limit", str(exc))
        return EXIT_RESOURCE
    _write_manifest(run, cfg, t0, "ok")
    return EXIT_OK


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="divlab", description="Divergence and network experiments on Cayley graphs.")
    ap.add_argument("--config", required=True, help="JSON experiment config")
    ap.add_argument("--out", default="divlab_out", help="output directory")
    ap.add_argument("--threads", type=int, default=1, help="worker processes (0 = auto)")
    ap.add_argument("--budget-mb", type=float, default=None, help="ball memory ceiling in MB")
    ap.add_argument("--seed", type=int, default=None, help="override the config seed")
    args = ap.parse_args(argv)
    try:
        cfg = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return run_config(cfg, Path(args.out), args.threads, args.budget_mb, args.seed)


if __name__ == "__main__":
    sys.exit(main())
