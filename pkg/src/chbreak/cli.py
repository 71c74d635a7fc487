"""Command line front end.

Subcommands: simulate (one run from a config file), criteria (evaluate the
breaking criteria for a config's datum), riccati (the comparison problems
standalone), sweep (a batch of runs over datum cells), version.

Exit codes: 0 success, 2 configuration error, 3 run failure (step
underflow, loss of edge decay, failed search). Machine outputs are
deterministic: CSV floats use repr (shortest round-trip form), JSON is
sorted and newline-terminated, and wall-clock time goes to the console
only, never into files.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .config import RunConfig, emit_config, load_config, parse_config
from .criteria import check_criterion1, check_criterion2
from .diagnostics import estimate_blowup
from .errors import ChbreakError, ConfigError
from .riccati import omega_bound, solve_coupled, solve_omega, two_sided_bound
from .solver import run
from .svg import Series, write_line_chart

CSV_COLUMNS = ("t", "E", "m", "x_argmin", "sup_abs_u", "dt", "lambda_int")


def _jsonable(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return _jsonable(dataclasses.asdict(obj))
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def _write_json(path: str, payload: dict) -> None:
    text = json.dumps(_jsonable(payload), sort_keys=True, indent=2, allow_nan=False)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text + "\n")


def _record_row(rec) -> list:
    return [repr(v) for v in (rec.t, rec.energy, rec.min_slope, rec.x_at_min,
                              rec.sup_abs, rec.dt, rec.lam_integral)]


def _run_summary(cfg: RunConfig, outcome, est) -> dict:
    report1 = check_criterion1_cfg(cfg)
    report2 = check_criterion2_cfg(cfg)
    t_star = None if est is None else est.t_star
    le_t1 = le_t2 = None
    if t_star is not None and report1.t_bound is not None:
        le_t1 = bool(t_star <= report1.t_bound)
    if t_star is not None and report2.t_bound is not None:
        le_t2 = bool(t_star <= report2.t_bound)
    location_check = None
    if report2.satisfied and report2.location is not None and outcome.records:
        lo, hi = report2.location
        x_final = outcome.records[-1].x_at_min
        location_check = {"interval": report2.location, "x_argmin_final": x_final,
                          "inside": bool(lo <= x_final <= hi)}
    return {
        "version": __version__,
        "outcome": outcome.kind,
        "t_final": outcome.t_final,
        "t_switch": outcome.t_switch,
        "m_switch": outcome.m_switch,
        "frozen_forcing": outcome.frozen_forcing,
        "resolution_degraded": outcome.resolution_degraded,
        "dissipative": outcome.dissipative,
        "energy0": outcome.energy0,
        "n_records": len(outcome.records),
        "grid": {"half_length": cfg.grid.half_length, "n_points": cfg.grid.n_points},
        "t_end": cfg.t_end,
        "criterion1": report1,
        "criterion2": report2,
        "blowup": est,
        "bound_checks": {"t_star": t_star, "t1_bound": report1.t_bound,
                         "t2_bound": report2.t_bound,
                         "t_star_le_t1": le_t1, "t_star_le_t2": le_t2},
        "location_check": location_check,
        "tracks": [
            {"seed": tr.seed, "n_samples": tr.n_samples,
             "edge_contaminated": tr.edge_contaminated,
             "final_position": tr.positions[-1], "final_slope": tr.ux_vals[-1]}
            for tr in outcome.tracks
        ],
        "config": emit_config(cfg),
    }


def check_criterion1_cfg(cfg: RunConfig):
    from .model import make_datum

    u0 = make_datum(cfg.datum, cfg.grid, cfg.edge_tol)
    return check_criterion1(u0, cfg.profile.delta_sup)


def check_criterion2_cfg(cfg: RunConfig):
    from .model import make_datum

    u0 = make_datum(cfg.datum, cfg.grid, cfg.edge_tol)
    return check_criterion2(u0, cfg.profile.delta_sup)


def _write_plots(plots_dir: str, outcome, est) -> None:
    os.makedirs(plots_dir, exist_ok=True)
    ts = tuple(r.t for r in outcome.records)
    ms = tuple(r.min_slope for r in outcome.records)
    es = tuple(r.energy for r in outcome.records)
    law = tuple(math.exp(-2.0 * r.lam_integral) * outcome.energy0 for r in outcome.records)
    write_line_chart(
        os.path.join(plots_dir, "slope_min.svg"),
        "minimum slope", "t", "m(t)", [Series("m", ts, ms)])
    recip = tuple(-1.0 / m if m < 0 else math.nan for m in ms)
    series = [Series("-1/m", ts, recip)]
    if est is not None:
        line = tuple((est.t_star - t) / (-est.rate) for t in ts)
        series.append(Series("fit", ts, line, dashed=True))
    write_line_chart(
        os.path.join(plots_dir, "reciprocal_slope.svg"),
        "reciprocal slope and linear fit", "t", "-1/m", series)
    write_line_chart(
        os.path.join(plots_dir, "energy_law.svg"),
        "energy vs decay law", "t", "E(t)",
        [Series("measured", ts, es), Series("law", ts, law, dashed=True)])


def _cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    records_csv = args.records_csv or cfg.records_csv
    summary_json = args.summary_json or cfg.summary_json
    plots_dir = args.plots_dir or cfg.plots_dir
    sink = None
    csv_fh = None
    if records_csv:
        csv_fh = open(records_csv, "w", encoding="utf-8", newline="")
        writer = csv.writer(csv_fh)
        writer.writerow(CSV_COLUMNS)
        sink = lambda rec: writer.writerow(_record_row(rec))
    started = time.perf_counter()
    try:
        outcome = run(cfg.to_solver_config(), sink=sink)
    finally:
        if csv_fh is not None:
            csv_fh.close()
    elapsed = time.perf_counter() - started
    est = estimate_blowup(outcome.records)
    if summary_json:
        _write_json(summary_json, _run_summary(cfg, outcome, est))
    if plots_dir:
        _write_plots(plots_dir, outcome, est)
    print(f"outcome: {outcome.kind}")
    print(f"t_final: {outcome.t_final!r}")
    if outcome.t_switch is not None:
        print(f"t_switch: {outcome.t_switch!r}  m_switch: {outcome.m_switch!r}")
    if outcome.resolution_degraded:
        print("warning: resolution degraded without a breaking certificate")
    if est is not None:
        print(f"t_star: {est.t_star!r}  rate: {est.rate!r}  "
              f"fit_residual: {est.fit_residual!r}")
    print(f"elapsed: {elapsed:.3f} s ({len(outcome.records)} records)")
    if outcome.kind in ("dt_underflow", "edge_decay_lost"):
        print(f"error: run ended with {outcome.kind}", file=sys.stderr)
        return 3
    return 0


def _cmd_criteria(args) -> int:
    cfg = load_config(args.config)
    r1 = check_criterion1_cfg(cfg)
    r2 = check_criterion2_cfg(cfg)
    for rep in (r1, r2):
        verdict = "satisfied" if rep.satisfied else "not satisfied"
        print(f"{rep.kind}: {verdict}")
        print(f"  energy: {rep.energy!r}  forcing_bound: {rep.forcing_bound!r}")
        print(f"  threshold: {rep.threshold!r}  extreme: {rep.extreme!r}  "
              f"margin: {rep.margin!r}")
        if rep.t_bound is not None:
            print(f"  t_bound: {rep.t_bound!r}")
        if rep.location is not None:
            print(f"  location: [{rep.location[0]!r}, {rep.location[1]!r}]")
    if args.json:
        _write_json(args.json, {"criterion1": r1, "criterion2": r2,
                                "version": __version__})
    return 0


def _cmd_riccati(args) -> int:
    rows = []
    if args.coupled:
        traj = solve_coupled(args.delta, args.forcing, args.rising0, args.falling0,
                             t_max=args.t_max)
        g0 = math.sqrt(max(0.0, -args.rising0 * args.falling0))
        bound = two_sided_bound(args.delta, args.forcing, g0)
        rows.append(("coupled", args.falling0, traj.blew_up, traj.t_blowup, bound))
    else:
        for w0 in args.omega0:
            traj = solve_omega(args.delta, args.forcing, w0, t_max=args.t_max)
            bound = omega_bound(args.delta, args.forcing, w0)
            rows.append(("scalar", w0, traj.blew_up, traj.t_blowup, bound))
    print("case,start,blew_up,t_numeric,t_bound")
    for kind, start, blew, t_num, bound in rows:
        print(",".join([kind, repr(float(start)), str(blew).lower(),
                        "" if t_num is None else repr(t_num),
                        "" if bound is None else repr(bound)]))
    if args.csv:
        with open(args.csv, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["case", "start", "blew_up", "t_numeric", "t_bound"])
            for kind, start, blew, t_num, bound in rows:
                writer.writerow([kind, repr(float(start)), str(blew).lower(),
                                 "" if t_num is None else repr(t_num),
                                 "" if bound is None else repr(bound)])
    return 0


SWEEP_COLUMNS = ("index", "family", "amplitude", "width", "delta", "energy",
                 "forcing_bound", "threshold", "min_slope", "criterion1",
                 "t_bound", "outcome", "t_final", "t_switch", "t_star", "rate",
                 "status")


def _sweep_cell(packed):
    index, text, amplitude, width, delta = packed
    try:
        cfg = parse_config(text, "<sweep>")
        datum = dataclasses.replace(cfg.datum, amplitude=amplitude, width=width)
        profile = cfg.profile
        if delta is not None:
            from .model import DissipationProfile

            profile = DissipationProfile.constant(delta)
        cfg = dataclasses.replace(cfg, datum=datum, profile=profile)
        rep = check_criterion1_cfg(cfg)
        outcome = run(cfg.to_solver_config())
        est = estimate_blowup(outcome.records)
        return {
            "index": index, "family": datum.family, "amplitude": amplitude,
            "width": width, "delta": profile.delta_sup, "energy": rep.energy,
            "forcing_bound": rep.forcing_bound, "threshold": rep.threshold,
            "min_slope": rep.slope_at_point, "criterion1": rep.satisfied,
            "t_bound": rep.t_bound, "outcome": outcome.kind,
            "t_final": outcome.t_final, "t_switch": outcome.t_switch,
            "t_star": None if est is None else est.t_star,
            "rate": None if est is None else est.rate,
            "status": "ok",
        }
    except ChbreakError as exc:
        return {"index": index, "family": "", "amplitude": amplitude,
                "width": width, "delta": delta, "energy": None,
                "forcing_bound": None, "threshold": None, "min_slope": None,
                "criterion1": None, "t_bound": None, "outcome": None,
                "t_final": None, "t_switch": None, "t_star": None, "rate": None,
                "status": f"error: {exc}"}


def _workers(flag: int | None) -> int:
    if flag is not None:
        return max(1, flag)
    raw = os.environ.get("CHBREAK_WORKERS", "").strip()
    if raw:
        return max(1, int(raw))
    return os.cpu_count() or 1


def _cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    if cfg.datum.family == "samples":
        raise ConfigError("sweep needs an analytic datum family as the template")
    text = emit_config(cfg)
    deltas = args.deltas if args.deltas else [None]
    if args.deltas and cfg.profile.kind != "constant":
        raise ConfigError("--deltas requires a constant dissipation profile")
    cells = []
    index = 0
    for delta in deltas:
        for amplitude in args.amplitudes:
            for width in args.widths:
                cells.append((index, text, amplitude, width, delta))
                index += 1
    workers = _workers(args.workers)
    started = time.perf_counter()
    if len(cells) == 1 or workers == 1:
        rows = [_sweep_cell(c) for c in cells]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_cell, cells))
    elapsed = time.perf_counter() - started

    def cell_text(value):
        if value is None:
            return ""
        if isinstance(value, bool):
            return str(value).lower()
        if isinstance(value, float):
            return repr(value)
        return str(value)

    out_fh = open(args.csv, "w", encoding="utf-8", newline="") if args.csv else sys.stdout
    try:
        writer = csv.writer(out_fh)
        writer.writerow(SWEEP_COLUMNS)
        for row in rows:
            writer.writerow([cell_text(row[c]) for c in SWEEP_COLUMNS])
    finally:
        if args.csv:
            out_fh.close()
    n_bad = sum(1 for r in rows if r["status"] != "ok")
    print(f"sweep: {len(rows)} cells, {n_bad} failed, {elapsed:.3f} s",
          file=sys.stderr)
    return 0 if n_bad == 0 else 3


def _float_list(raw: str) -> list[float]:
    return [float(tok) for tok in raw.replace(",", " ").split()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chbreak",
        description="Spectral laboratory for wave breaking in a damped "
                    "Camassa-Holm-type equation.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run one configured simulation")
    p_sim.add_argument("config")
    p_sim.add_argument("--records-csv", default=None)
    p_sim.add_argument("--summary-json", default=None)
    p_sim.add_argument("--plots-dir", default=None)
    p_sim.set_defaults(func=_cmd_simulate)

    p_cri = sub.add_parser("criteria", help="evaluate the breaking criteria")
    p_cri.add_argument("config")
    p_cri.add_argument("--json", default=None)
    p_cri.set_defaults(func=_cmd_criteria)

    p_ric = sub.add_parser("riccati", help="solve the comparison problems")
    p_ric.add_argument("--delta", type=float, default=0.0)
    p_ric.add_argument("--forcing", type=float, required=True)
    p_ric.add_argument("--omega0", type=_float_list, default=[-3.0])
    p_ric.add_argument("--t-max", type=float, default=20.0)
    p_ric.add_argument("--coupled", action="store_true")
    p_ric.add_argument("--rising0", type=float, default=3.0,
                       help="start of the positive (u - u_x) component")
    p_ric.add_argument("--falling0", type=float, default=-3.0,
                       help="start of the negative (u + u_x) component")
    p_ric.add_argument("--csv", default=None)
    p_ric.set_defaults(func=_cmd_riccati)

    p_swp = sub.add_parser("sweep", help="batch runs over datum cells")
    p_swp.add_argument("config")
    p_swp.add_argument("--amplitudes", type=_float_list, required=True)
    p_swp.add_argument("--widths", type=_float_list, required=True)
    p_swp.add_argument("--deltas", type=_float_list, default=None)
    p_swp.add_argument("--workers", type=int, default=None,
                       help="cell parallelism (default: CHBREAK_WORKERS or all cores)")
    p_swp.add_argument("--csv", default=None)
    p_swp.set_defaults(func=_cmd_sweep)

    p_ver = sub.add_parser("version", help="print the version")
    p_ver.set_defaults(func=lambda args: (print(f"chbreak {__version__}"), 0)[1])

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ChbreakError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
