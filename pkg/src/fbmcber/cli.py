"""Command-line front end.

Subcommands: filter-info (taps, set size, SIR, magnitude decay), bep
(analytic curves), simulate (Monte Carlo BER) and compare (analytic vs
simulated with z-scores).  Output is CSV plus a JSON run manifest; all
SNR inputs are gamma_b in dB.

Exit codes: 0 success, 2 usage error, 3 enumeration budget exceeded,
4 comparison failure (|z| > 3 somewhere).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import analytic
from .enumeration import DEFAULT_BUDGET
from .errors import EnumerationBudgetExceeded, FbmcBerError, GridError
from .filters import load_taps, make_egf, make_martin, make_rect, save_taps
from .interference import (
    FbmcGrid,
    build_set,
    export_table_csv,
    ordered_magnitudes,
    set_size,
    sir,
    truncate,
)
from .simulate import (
    ChannelModel,
    FbmcSystem,
    OfdmSystem,
    PamSystem,
    StopRule,
    run_ber,
    z_scores,
)

USAGE_ERROR = 2
BUDGET_ERROR = 3
COMPARE_ERROR = 4


def _parse_grid(text: str) -> np.ndarray:
    """SNR grid: 'start:stop:step' (inclusive) or comma-separated values."""
    if ":" in text:
        parts = [float(x) for x in text.split(":")]
        if len(parts) == 2:
            start, stop, step = parts[0], parts[1], 1.0
        elif len(parts) == 3:
            start, stop, step = parts
        else:
            raise ValueError(f"bad grid {text!r}")
        if step <= 0 or stop < start:
            raise ValueError(f"bad grid {text!r}")
        n = int(round((stop - start) / step))
        return start + step * np.arange(n + 1)
    return np.array([float(x) for x in text.split(",")])


def _load_config_file(path) -> dict:
    """key=value lines; '#' comments; keys use flag names with dashes or _."""
    out = {}
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"bad config line {raw.rstrip()!r}")
            key, value = line.split("=", 1)
            out[key.strip().replace("-", "_")] = value.strip()
    return out


def _merge_config(args: argparse.Namespace, argv: list[str]):
    """Fill flags from --config; flags given on the command line win."""
    if not getattr(args, "config", None):
        return
    overrides = _load_config_file(args.config)
    actions = {a.dest: a for a in args.parser_ref._actions}
    explicit = {
        tok.split("=", 1)[0][2:].replace("-", "_")
        for tok in argv if tok.startswith("--")
    }
    for key, raw in overrides.items():
        if key not in actions or key in ("help", "fn", "parser_ref", "config"):
            raise ValueError(f"unknown config key {key!r}")
        if key in explicit:
            continue
        action = actions[key]
        setattr(args, key, action.type(raw) if action.type else raw)


def _build_filter(args):
    m, k = args.m, args.k
    if args.filter == "martin":
        return make_martin(k, m)
    if args.filter == "egf":
        if args.alpha is None:
            raise ValueError("--alpha required for the EGF family")
        return make_egf(args.alpha, k, m)
    if args.filter == "rect":
        return make_rect(m, k)
    if args.filter.startswith("file:"):
        return load_taps(args.filter[5:], overlap=k)
    raise ValueError(f"unknown filter {args.filter!r}")


def _workers(args) -> int:
    if getattr(args, "workers", None):
        return args.workers
    env = os.environ.get("FBMCBER_WORKERS")
    if env:
        return int(env)
    return os.cpu_count() or 1


def _write_manifest(path, payload: dict):
    payload = dict(payload)
    payload["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%S")
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, default=str)
        fh.write("\n")


def _out_paths(args, suffix: str):
    base = args.out or f"fbmcber-{suffix}"
    return base + ".csv", base + ".manifest.json"


# ---------------------------------------------------------------------------
# Subcommands

def cmd_filter_info(args, parser) -> int:
    filt = _build_filter(args)
    grid = FbmcGrid(args.m, filt)
    table = build_set(grid)
    mags = ordered_magnitudes(table)
    print(f"filter          {filt.label}")
    print(f"taps            {filt.length} (K={filt.overlap}, M={args.m})")
    print(f"pulse energy    {filt.energy():.15f}")
    print(f"|E| (formula)   {set_size(args.m, filt.length)}")
    print(f"|E| (table)     {len(table)}"
          f"  numerically null: {int(table.null_mask().sum())}")
    print(f"SIR             {sir(table):.2f} dB")
    print("largest |eps|:")
    for rank, mag in enumerate(mags[: args.decay], start=1):
        print(f"  {rank:3d}  {mag:.6e}")
    if args.out:
        export_table_csv(table, args.out + ".csv")
        if args.taps_out:
            save_taps(filt, args.taps_out)
        _write_manifest(args.out + ".manifest.json", {
            "command": "filter-info", "filter": filt.label, "m": args.m,
            "k": filt.overlap, "length": filt.length,
            "sir_db": sir(table), "set_size": len(table),
        })
        print(f"table written to {args.out}.csv")
    elif args.taps_out:
        save_taps(filt, args.taps_out)
    return 0


def _analytic_curve(args, ebn0_db, workers):
    gammas = analytic.db_to_linear(ebn0_db)
    what = (args.system, args.channel, args.form)
    filt_label, kmax, n_cp = "", None, None
    if args.system == "pam":
        fn = {
            ("awgn", "approx"): analytic.pam_awgn_approx,
            ("awgn", "exact"): analytic.pam_awgn_exact,
            ("rayleigh", "approx"): analytic.pam_rayleigh_approx,
            ("rayleigh", "exact"): analytic.pam_rayleigh_exact,
        }[(args.channel, args.form)]
        probs = fn(args.np, gammas)
    elif args.system == "ofdm":
        if args.form != "exact":
            raise ValueError("OFDM curves implement the exact form only")
        fn = analytic.ofdm_awgn if args.channel == "awgn" else analytic.ofdm_rayleigh
        probs = fn(args.nq, args.m, args.ncp, gammas)
        n_cp = args.ncp
    elif args.system == "fbmc":
        filt = _build_filter(args)
        grid = FbmcGrid(args.m, filt)
        table = truncate(build_set(grid), args.kmax)
        tick = time.time()
        fn = {
            ("awgn", "approx"): analytic.fbmc_awgn_approx,
            ("awgn", "exact"): analytic.fbmc_awgn_exact,
            ("rayleigh", "approx"): analytic.fbmc_rayleigh_approx,
            ("rayleigh", "exact"): analytic.fbmc_rayleigh_exact,
        }[(args.channel, args.form)]
        probs = fn(args.np, table, gammas, budget=args.budget, workers=workers)
        count = args.np ** len(table)
        print(f"# enumerated {count} offsets/point over {len(table)} elements "
              f"in {time.time() - tick:.1f}s total", file=sys.stderr)
        filt_label, kmax = filt.label, args.kmax
    else:
        raise ValueError(f"unknown system {args.system!r}")
    model = "-".join(what)
    return analytic.BepCurve(model, ebn0_db, probs, filt_label, kmax, n_cp)


def cmd_bep(args, parser) -> int:
    ebn0_db = _parse_grid(args.ebn0)
    curve = _analytic_curve(args, ebn0_db, _workers(args))
    csv_path, manifest_path = _out_paths(args, "bep")
    analytic.export_curve_csv(curve, csv_path)
    _write_manifest(manifest_path, {
        "command": "bep", "model": curve.model, "filter": curve.filter_label,
        "kmax": curve.kmax, "n_cp": curve.n_cp,
        "ebn0_db": list(map(float, ebn0_db)),
    })
    print(f"wrote {csv_path}")
    return 0


def _build_system(args):
    if args.system == "pam":
        return PamSystem(args.np)
    if args.system == "ofdm":
        return OfdmSystem(args.nq, args.m, args.ncp)
    if args.system == "fbmc":
        filt = _build_filter(args)
        return FbmcSystem(args.np, FbmcGrid(args.m, filt),
                          frame_symbols=args.frame_symbols)
    raise ValueError(f"unknown system {args.system!r}")


def cmd_simulate(args, parser) -> int:
    ebn0_db = _parse_grid(args.ebn0)
    system = _build_system(args)
    channel = ChannelModel(args.channel, args.coherence)
    stop = StopRule(args.min_errors, args.max_bits, args.min_frames,
                    args.target_rel_se)
    result = run_ber(system, channel, ebn0_db, stop, seed=args.seed)
    csv_path, manifest_path = _out_paths(args, "sim")
    result.to_csv(csv_path)
    _write_manifest(manifest_path, {
        "command": "simulate", "seed": result.seed, "config": result.config,
    })
    print(f"wrote {csv_path}")
    return 0


def cmd_compare(args, parser) -> int:
    ebn0_db = _parse_grid(args.ebn0)
    workers = _workers(args)
    curve = _analytic_curve(args, ebn0_db, workers)

    if args.sim_csv:
        rows = []
        with open(args.sim_csv) as fh:
            header = fh.readline()
            for line in fh:
                if line.strip():
                    rows.append(line.strip().split(","))
        if not rows:
            raise ValueError(f"simulation input {args.sim_csv} is empty")
        sim_db = np.array([float(r[0]) for r in rows])
        if sim_db.size != ebn0_db.size or not np.allclose(sim_db, ebn0_db):
            raise GridError(
                f"simulated grid {sim_db.tolist()} != analytic {ebn0_db.tolist()}"
            )
        from .simulate import SimPoint, SimResult
        points = [
            SimPoint(float(r[0]), int(r[1]), int(r[2]), float(r[3]),
                     float(r[4]), float(r[4]) / 1.96)
            for r in rows
        ]
        result = SimResult(points=points, seed=-1)
    else:
        system = _build_system(args)
        channel = ChannelModel(args.channel, args.coherence)
        stop = StopRule(args.min_errors, args.max_bits, args.min_frames,
                        args.target_rel_se)
        result = run_ber(system, channel, ebn0_db, stop, seed=args.seed)

    zs = z_scores(result, curve.prob)
    csv_path, manifest_path = _out_paths(args, "compare")
    with open(csv_path, "w") as fh:
        fh.write("ebn0_db,bep,ber,bits,errors,ci95,z,flag\n")
        for point, bep, z in zip(result.points, curve.prob, zs):
            flag = "OK" if abs(z) <= 3.0 else "DIVERGENT"
            fh.write(f"{point.ebn0_db:.6g},{bep:.14e},{point.ber:.10e},"
                     f"{point.bits},{point.errors},{point.ci95:.6e},"
                     f"{z:+.3f},{flag}\n")
    worst = float(np.max(np.abs(zs)))
    _write_manifest(manifest_path, {
        "command": "compare", "model": curve.model, "seed": result.seed,
        "config": result.config, "worst_abs_z": worst,
    })
    print(f"wrote {csv_path} (worst |z| = {worst:.2f})")
    if worst > 3.0:
        print("comparison FAILED: at least one point beyond 3 sigma",
              file=sys.stderr)
        return COMPARE_ERROR
    return 0


# ---------------------------------------------------------------------------
# Parser

def _add_filter_flags(p):
    p.add_argument("--filter", default="martin",
                   help="martin | egf | rect | file:PATH (default martin)")
    p.add_argument("--alpha", type=float, default=None,
                   help="EGF spreading factor in [0.25, 2]")
    p.add_argument("--k", type=int, default=4, help="overlap factor (default 4)")
    p.add_argument("--m", type=int, default=16,
                   help="subcarrier count (default 16)")


def _add_model_flags(p):
    p.add_argument("--system", choices=("pam", "ofdm", "fbmc"), default="fbmc")
    p.add_argument("--channel", choices=("awgn", "rayleigh"), default="awgn")
    p.add_argument("--form", choices=("approx", "exact"), default="exact")
    p.add_argument("--np", type=int, default=8, help="PAM order (default 8)")
    p.add_argument("--nq", type=int, default=64, help="QAM order (default 64)")
    p.add_argument("--ncp", type=int, default=2,
                   help="OFDM cyclic prefix length (default 2 = M/8)")
    p.add_argument("--kmax", type=int, default=8,
                   help="kept interference elements (default 8)")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET,
                   help="max enumerated offsets per point")
    p.add_argument("--ebn0", default="0:12:1",
                   help="gamma_b grid in dB: start:stop:step or v1,v2,...")
    p.add_argument("--workers", type=int, default=None,
                   help="parallel workers (default: env FBMCBER_WORKERS or cores)")


def _add_sim_flags(p):
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--min-errors", type=int, default=300)
    p.add_argument("--max-bits", type=int, default=20_000_000)
    p.add_argument("--min-frames", type=int, default=1,
                   help="minimum frame replicates (fade draws under Rayleigh)")
    p.add_argument("--target-rel-se", type=float, default=None,
                   help="keep simulating until the blocked SE is below this "
                        "fraction of the BER estimate")
    p.add_argument("--coherence", type=int, default=1,
                   help="fade redraw granularity (Rayleigh only)")
    p.add_argument("--frame-symbols", type=int, default=48,
                   help="FBMC symbol columns per frame")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fbmcber",
        description="Closed-form BEP and Monte Carlo BER for FBMC/OFDM/PAM links.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("filter-info",
                       help="prototype filter report: taps, |E|, SIR, decay")
    _add_filter_flags(p)
    p.add_argument("--decay", type=int, default=20,
                   help="ordered magnitudes to print (default 20)")
    p.add_argument("--out", default=None, help="CSV/manifest basename")
    p.add_argument("--taps-out", default=None, help="write taps to this file")
    p.add_argument("--config", default=None, help="key=value config file")
    p.set_defaults(fn=cmd_filter_info, parser_ref=p)

    p = sub.add_parser("bep", help="evaluate an analytic BEP curve")
    _add_filter_flags(p)
    _add_model_flags(p)
    p.add_argument("--out", default=None, help="output basename")
    p.add_argument("--config", default=None, help="key=value config file")
    p.set_defaults(fn=cmd_bep, parser_ref=p)

    p = sub.add_parser("simulate", help="Monte Carlo BER measurement")
    _add_filter_flags(p)
    _add_model_flags(p)
    _add_sim_flags(p)
    p.add_argument("--out", default=None, help="output basename")
    p.add_argument("--config", default=None, help="key=value config file")
    p.set_defaults(fn=cmd_simulate, parser_ref=p)

    p = sub.add_parser("compare",
                       help="overlay analytic BEP and simulated BER with z-scores")
    _add_filter_flags(p)
    _add_model_flags(p)
    _add_sim_flags(p)
    p.add_argument("--sim-csv", default=None,
                   help="reuse an existing simulate CSV instead of rerunning")
    p.add_argument("--out", default=None, help="output basename")
    p.add_argument("--config", default=None, help="key=value config file")
    p.set_defaults(fn=cmd_compare, parser_ref=p)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    argv = list(argv) if argv is not None else sys.argv[1:]
    args = parser.parse_args(argv)
    try:
        _merge_config(args, argv)
        return args.fn(args, parser)
    except EnumerationBudgetExceeded as exc:
        print(f"error: {exc}; rerun with a smaller --kmax or larger --budget",
              file=sys.stderr)
        return BUDGET_ERROR
    except (FbmcBerError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
