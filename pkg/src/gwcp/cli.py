"""Command-line entry point.

Exit codes: 0 success, 1 self-check failure, 2 usage error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from importlib.metadata import PackageNotFoundError, version

from . import bounds, walk
from .dist import DistributionError, degenerate, from_descriptor, geometric_from_rate
from .mc import Mode, TrialPlan, bisect_critical, estimate_survival_curve, run_trials, BracketNotSeparating

FORMATS = ("json", "csv")

BRW_COLUMNS = ["trial", "seed", "extinct", "capped", "generations_survived", "root_returns"]
CP_COLUMNS = [
    "trial",
    "seed",
    "lambda",
    "died_out",
    "t_end",
    "max_infected",
    "root_reinfections",
    "frontier_exit",
    "suppressed_births",
]


class SelfCheckFailed(RuntimeError):
    pass


class _IOFailure(Exception):
    pass


def _version() -> str:
    try:
        return version("gwcp")
    except PackageNotFoundError:
        return "0+unknown"


@dataclass
class RunConfig:
    command: str
    options: dict = field(default_factory=dict)
    seed: int = 0
    threads: int = 0
    out: str | None = None
    format: str | None = None

    def resolved(self) -> dict:
        return {
            "command": self.command,
            "seed": self.seed,
            "threads": self.threads,
            "out": self.out,
            "format": self.format,
            **{k: v for k, v in sorted(self.options.items())},
        }


def _float_list(text: str) -> list[float]:
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _pair(text: str) -> tuple[float, float]:
    vals = _float_list(text)
    if len(vals) != 2:
        raise argparse.ArgumentTypeError("expected A,B")
    return vals[0], vals[1]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    common.add_argument("--threads", type=int, default=0, help="worker processes (0 = all cores; env GWCP_THREADS wins)")
    common.add_argument("--out", default=None, help="output path (default stdout)")
    common.add_argument("--format", choices=FORMATS, default=None, help="output format")

    p = argparse.ArgumentParser(prog="gwcp", description="Branching random walks and contact processes on GW trees.")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bounds", parents=[common], help="certified bounds for a tree law")
    b.add_argument("--dist", required=True, help="JSON distribution descriptor file")
    b.add_argument("--grid", type=int, default=200)

    c = sub.add_parser("certify", parents=[common], help="check a supermartingale certificate")
    c.add_argument("--hmin", type=int, required=True)
    c.add_argument("--nu", type=float, required=True)
    c.add_argument("--r", type=float, required=True)
    c.add_argument("--b", type=float, required=True)
    c.add_argument("--c", default="auto", help="'auto' for c = b*r")
    c.add_argument("--eps", type=float, default=bounds.DEFAULT_EPS)
    c.add_argument("--n-v-max", type=int, default=10_000)

    s = sub.add_parser("search-certificate", parents=[common], help="maximise the certified rate")
    s.add_argument("--hmin", type=int, required=True)
    s.add_argument("--grid", type=int, default=200)
    s.add_argument("--eps", type=float, default=bounds.DEFAULT_EPS)

    sr = sub.add_parser("spectral-radius", parents=[common], help="spectral radius for minimal offspring H")
    sr.add_argument("--hmin", type=int, required=True)
    sr.add_argument("--dp", action="store_true", help="also evaluate the regular-tree DP estimate")
    sr.add_argument("--steps", type=int, default=1000)

    sim = sub.add_parser("simulate", help="run BRW or CP trials")
    simsub = sim.add_subparsers(dest="process", required=True)
    sb = simsub.add_parser("brw", parents=[common])
    sb.add_argument("--dist", required=True)
    g = sb.add_mutually_exclusive_group(required=True)
    g.add_argument("--mu", type=float, help="geometric reproduction law with this mean")
    g.add_argument("--geometric-lambda", type=float, help="continuous-time BRW birth rate (death rate 1)")
    g.add_argument("--repro", help="JSON descriptor of the reproduction law")
    sb.add_argument("--horizon", type=int, default=100)
    sb.add_argument("--trials", type=int, default=1000)
    sb.add_argument("--pop-cap", type=int, default=1_000_000)
    sb.add_argument("--spatial-cap", type=int, default=10_000)
    sb.add_argument("--tree-mode", choices=["AGW", "GW"], default="AGW")

    sc = simsub.add_parser("cp", parents=[common])
    sc.add_argument("--dist", required=True)
    g = sc.add_mutually_exclusive_group(required=True)
    g.add_argument("--lambda", dest="lam", type=float)
    g.add_argument("--lambdas", type=_float_list)
    sc.add_argument("--t-max", type=float, default=30.0)
    sc.add_argument("--trials", type=int, default=1000)
    sc.add_argument("--depth-cap", type=int, default=60)
    sc.add_argument("--max-infected", type=int, default=1000)
    sc.add_argument("--tree-mode", choices=["AGW", "GW"], default="AGW")

    e = sub.add_parser("estimate-critical", parents=[common], help="empirical critical-value bisection")
    e.add_argument("--process", choices=["cp", "brw"], required=True)
    e.add_argument("--mode", choices=["global", "local"], default="global")
    e.add_argument("--dist", required=True)
    e.add_argument("--bracket", type=_pair, required=True)
    e.add_argument("--tol", type=float, default=0.1)
    e.add_argument("--trials", type=int, default=1000)
    e.add_argument("--horizon", type=int, default=24)
    e.add_argument("--t-max", type=float, default=30.0)
    e.add_argument("--max-infected", type=int, default=1000)
    e.add_argument("--threshold", type=float, default=0.02)
    e.add_argument("--spatial-cap", type=int, default=1_000_000, help="BRW: track positions up to this many particles")
    e.add_argument("--csv", default=None, help="also write per-probe estimates as CSV")

    pt = sub.add_parser("paper-table", parents=[common], help="all certified constants for h_min = 4..12")
    pt.add_argument("--hmin-max", type=int, default=12)
    return p


def parse_config(argv=None) -> RunConfig:
    """Parse ``argv``; argparse exits with status 2 on usage errors."""
    ns = build_parser().parse_args(argv)
    opts = {k: v for k, v in vars(ns).items() if k not in ("command", "seed", "threads", "out", "format")}
    command = ns.command
    if command == "simulate":
        command = f"simulate {opts.pop('process')}"
    return RunConfig(command, opts, ns.seed, ns.threads, ns.out, ns.format)


# -- output ---------------------------------------------------------------


def _meta(cfg: RunConfig) -> dict:
    return {"tool": "gwcp", "version": _version(), "config": _jsonable(cfg.resolved()), "seed": cfg.seed}


def _jsonable(x):
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def render_json(cfg: RunConfig, result) -> str:
    return json.dumps({"meta": _meta(cfg), "result": _jsonable(result)}, indent=2) + "\n"


def render_csv(cfg: RunConfig, rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    buf.write("# " + json.dumps(_meta(cfg)) + "\n")
    w = csv.DictWriter(buf, fieldnames=columns, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow(_jsonable(row))
    return buf.getvalue()


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.out in (None, "-"):
        sys.stdout.write(text)
        return
    try:
        with open(cfg.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise _IOFailure(str(exc))


def _load_dist(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            desc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise _IOFailure(f"cannot read distribution {path}: {exc}")
    return from_descriptor(desc)


# -- commands -------------------------------------------------------------


def cmd_bounds(cfg: RunConfig) -> int:
    law = _load_dist(cfg.options["dist"])
    rep = bounds.bound_report(law, grid=cfg.options["grid"])
    _emit(cfg, render_json(cfg, rep.to_dict()))
    return 0


def cmd_certify(cfg: RunConfig) -> int:
    o = cfg.options
    c = None if o["c"] == "auto" else float(o["c"])
    cert = bounds.Certificate(o["hmin"], o["nu"], o["r"], o["b"], c, o["eps"])
    chk = bounds.check_certificate(cert)
    full = bounds.certificate_full_slacks(cert, o["n_v_max"]).min(axis=1)
    result = {
        "certificate": cert.to_dict(),
        "feasible": chk.feasible,
        "lhs": [chk.lhs1, chk.lhs2],
        "slack": [chk.slack1, chk.slack2],
        "full_check": bool((full > 0).all()),
        "full_min_slack": full.tolist(),
        "n_v_max": o["n_v_max"],
    }
    _emit(cfg, render_json(cfg, result))
    return 0


def cmd_search_certificate(cfg: RunConfig) -> int:
    o = cfg.options
    cert = bounds.search_certificate(o["hmin"], grid=o["grid"], eps=o["eps"])
    result = None
    if cert is not None:
        chk = bounds.check_certificate(cert)
        result = cert.to_dict() | {"slack": [chk.slack1, chk.slack2]}
    _emit(cfg, render_json(cfg, {"certificate": result}))
    return 0


def cmd_spectral_radius(cfg: RunConfig) -> int:
    o = cfg.options
    h = o["hmin"]
    result = {"h_min": h, "formula": walk.spectral_radius_formula(h)}
    if o["dp"]:
        result["dp_steps"] = o["steps"]
        result["dp_estimate"] = walk.spectral_radius_dp_estimate(walk.DistanceChain(h), o["steps"])
    _emit(cfg, render_json(cfg, result))
    return 0


def _trial_rows(records) -> list[dict]:
    return [row for trial in records for row in trial]


def cmd_simulate_brw(cfg: RunConfig) -> int:
    o = cfg.options
    law = _load_dist(o["dist"])
    if o["repro"] is not None:
        repro = _load_dist(o["repro"])
        mu = repro.mean
    else:
        mu = o["mu"] if o["mu"] is not None else o["geometric_lambda"]
        repro = geometric_from_rate(mu)
    plan = TrialPlan(
        "brw", law, param=mu, trials=o["trials"], seed=cfg.seed, tree_mode=o["tree_mode"],
        horizon=o["horizon"], pop_cap=o["pop_cap"], spatial_cap=o["spatial_cap"],
        reproduction=repro, workers=cfg.threads,
    )
    records = run_trials(plan)
    if (cfg.format or "csv") == "csv":
        _emit(cfg, render_csv(cfg, _trial_rows(records), BRW_COLUMNS))
    else:
        ests = {m.value: estimate_survival_curve(plan, m, records)[0].to_dict() for m in Mode}
        _emit(cfg, render_json(cfg, {"estimates": ests, "mean": mu}))
    return 0


def cmd_simulate_cp(cfg: RunConfig) -> int:
    o = cfg.options
    law = _load_dist(o["dist"])
    lambdas = tuple(sorted(o["lambdas"])) if o["lambdas"] else None
    plan = TrialPlan(
        "cp", law, param=o["lam"] if o["lam"] is not None else 1.0, trials=o["trials"], seed=cfg.seed,
        tree_mode=o["tree_mode"], t_max=o["t_max"], max_infected=o["max_infected"],
        depth_cap=o["depth_cap"], lambdas=lambdas, workers=cfg.threads,
    )
    records = run_trials(plan)
    if (cfg.format or "csv") == "csv":
        _emit(cfg, render_csv(cfg, _trial_rows(records), CP_COLUMNS))
    else:
        ests = {m.value: [e.to_dict() for e in estimate_survival_curve(plan, m, records)] for m in Mode}
        _emit(cfg, render_json(cfg, {"estimates": ests}))
    return 0


def cmd_estimate_critical(cfg: RunConfig) -> int:
    o = cfg.options
    law = _load_dist(o["dist"])
    plan = TrialPlan(
        o["process"], law, trials=o["trials"], seed=cfg.seed, horizon=o["horizon"],
        t_max=o["t_max"], max_infected=o["max_infected"], workers=cfg.threads,
        spatial_cap=o["spatial_cap"],
    )
    try:
        res = bisect_critical(plan, o["mode"], o["bracket"], o["tol"], o["trials"], o["threshold"])
    except BracketNotSeparating as exc:
        print(f"gwcp: {exc}", file=sys.stderr)
        return 1
    result = res.to_dict() | {
        "process": o["process"],
        "note": "finite-horizon proxy; a consistency check, not the true critical value",
    }
    _emit(cfg, render_json(cfg, result))
    if o["csv"]:
        sub = RunConfig(cfg.command, cfg.options, cfg.seed, cfg.threads, o["csv"], "csv")
        rows = [p | {"ci_low": p["ci"][0], "ci_high": p["ci"][1]} for p in res.probes]
        _emit(sub, render_csv(sub, rows, ["lambda", "p_hat", "ci_low", "ci_high", "n_trials", "n_success"]))
    return 0


PAPER_COLUMNS = [
    "h_min",
    "lambda_brw_lower",
    "lambda_g_upper_simple",
    "lambda_g_upper_refined",
    "lambda_l_lower_cert",
    "verdict",
    "separating_pair",
]


def paper_table(h_max: int = 12) -> tuple[list[dict], list[str]]:
    """Rows for h_min = 4..h_max on degenerate laws, plus self-check failures."""
    rows, failures = [], []
    for h in range(4, h_max + 1):
        rep = bounds.bound_report(degenerate(h))
        rows.append({k: rep.to_dict()[k] for k in PAPER_COLUMNS})
        if not rep.weak_survival:
            failures.append(f"h_min={h}: weak survival not certified")
        if abs(rep.lambda_brw_lower - (h + 1) / (2 * math.sqrt(h))) > 1e-12:
            failures.append(f"h_min={h}: BRW lower bound mismatch")
    anchors = {4: (1.45, 1.46, 1.50), 5: (1.34, 1.35, 1.59)}
    for row in rows:
        h = row["h_min"]
        if h in anchors:
            lo, hi, cert = anchors[h]
            if not lo < row["lambda_g_upper_refined"] <= hi:
                failures.append(f"h_min={h}: refined upper bound {row['lambda_g_upper_refined']} outside ({lo}, {hi}]")
            if row["lambda_l_lower_cert"] is None or row["lambda_l_lower_cert"] < cert:
                failures.append(f"h_min={h}: certified lower bound below {cert}")
    if rows and abs(rows[0]["lambda_brw_lower"] - 1.25) > 1e-12:
        failures.append("h_min=4: BRW lower bound is not 1.25")
    return rows, failures


def _text_table(rows: list[dict]) -> str:
    head = f"{'h_min':>5} {'BRW lower':>10} {'g upper':>9} {'g refined':>10} {'l cert':>8}  verdict"
    lines = [head, "-" * len(head)]
    for r in rows:
        lines.append(
            f"{r['h_min']:>5} {r['lambda_brw_lower']:>10.5f} {r['lambda_g_upper_simple']:>9.5f} "
            f"{r['lambda_g_upper_refined']:>10.5f} {r['lambda_l_lower_cert']:>8.5f}  "
            f"{r['verdict']} ({r['separating_pair']})"
        )
    return "\n".join(lines) + "\n"


def cmd_paper_table(cfg: RunConfig) -> int:
    rows, failures = paper_table(cfg.options["hmin_max"])
    if cfg.format == "json":
        _emit(cfg, render_json(cfg, {"rows": rows, "failures": failures}))
    elif cfg.format == "csv":
        _emit(cfg, render_csv(cfg, rows, PAPER_COLUMNS))
    else:
        _emit(cfg, "# " + json.dumps(_meta(cfg)) + "\n" + _text_table(rows))
    for f in failures:
        print(f"self-check failed: {f}", file=sys.stderr)
    return 1 if failures else 0


COMMANDS = {
    "bounds": cmd_bounds,
    "certify": cmd_certify,
    "search-certificate": cmd_search_certificate,
    "spectral-radius": cmd_spectral_radius,
    "simulate brw": cmd_simulate_brw,
    "simulate cp": cmd_simulate_cp,
    "estimate-critical": cmd_estimate_critical,
    "paper-table": cmd_paper_table,
}


def main(argv=None) -> int:
    cfg = parse_config(argv)
    try:
        return COMMANDS[cfg.command](cfg)
    except _IOFailure as exc:
        print(f"gwcp: {exc}", file=sys.stderr)
        return 3
    except (DistributionError, bounds.BadCertificate, walk.BadInput, ValueError) as exc:
        print(f"gwcp: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
