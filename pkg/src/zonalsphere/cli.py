"""Command-line harness: coefficient dumps, the verification suite,
single runs, epsilon scans, and the attractor-collapse experiment.

Exit codes: 0 success, 1 check failure (verify) or blow-up, 2 usage or
configuration error.  ZONALSPHERE_THREADS caps trajectory concurrency.
Each command writes an experiment manifest; feeding a manifest's "config"
object back through --config reproduces the outputs bit-for-bit.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import datetime
import json
import math
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .diagnostics import (grashof, make_scan_result, tail_statistics,
                          write_scan_csv, write_scan_sidecar)
from .solver import (BlowUpError, ConfigError, SolverConfig, config_to_dict,
                     default_config, distance, load_config, run)
from .spharm import load_spectral, save_spectral
from .triads import JACOBIAN_SIGN, LEMMA_SIGN, build_table, write_csv
from .verify import run_suite

SLOPE_BAND = (0.8, 1.2)


def _thread_cap(n_tasks: int) -> int:
    env = os.environ.get("ZONALSPHERE_THREADS")
    if env:
        try:
            return max(1, min(int(env), n_tasks))
        except ValueError as exc:
            raise ConfigError(f"ZONALSPHERE_THREADS must be an integer: "
                              f"{env!r}") from exc
    return max(1, min(os.cpu_count() or 1, n_tasks))


def _write_manifest(path: Path, command: str, cfg: SolverConfig | None,
                    outputs: list, **extra) -> None:
    payload = {
        "command": command,
        "version": __version__,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "sign_convention": {"lemma": LEMMA_SIGN,
                            "jacobian_formula": JACOBIAN_SIGN},
        "outputs": [str(p) for p in outputs],
    }
    if cfg is not None:
        payload["config"] = config_to_dict(cfg)
    payload.update(extra)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _load_cfg(path: str) -> SolverConfig:
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    return load_config(path)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_coeffs(args) -> int:
    if args.K > 31:
        print(f"error: K={args.K} exceeds the coefficient-dump guard (31)",
              file=sys.stderr)
        return 2
    if args.K < 1:
        print("error: K must be >= 1", file=sys.stderr)
        return 2
    table = build_table(args.K)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_csv(table, out)
    info = table.summary()
    print(f"wrote {out} ({info['total']} triads, "
          f"{info['resonant']} resonant, {info['zonal_target']} with lhat=0)")
    _write_manifest(out.with_suffix(out.suffix + ".manifest.json"), "coeffs",
                    None, [out], K=args.K, triads=info)
    return 0


def cmd_verify(args) -> int:
    if args.K > 12:
        print(f"error: verify is capped at K=12 (got {args.K})",
              file=sys.stderr)
        return 2
    results, meta = run_suite(args.K, fault=args.inject_fault)
    width = max(len(r.name) for r in results)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        line = (f"{status}  {r.name:<{width}}  max_residual={r.residual:.3e}"
                f"  tol={r.tolerance:g}")
        if r.detail:
            line += f"  [{r.detail}]"
        print(line)
    n_fail = sum(not r.passed for r in results)
    print(f"\n{len(results) - n_fail}/{len(results)} checks passed at "
          f"K={args.K}; sigma_lemma={meta['sigma_lemma']:+.0f}, "
          f"sigma_jacobian={meta['sigma_jacobian']:+.0f}")
    if args.manifest:
        _write_manifest(Path(args.manifest), "verify", None, [],
                        K=args.K, suite=meta,
                        checks=[{"name": r.name, "residual": r.residual,
                                 "tolerance": r.tolerance,
                                 "passed": r.passed} for r in results])
    if n_fail:
        print(f"FAILED checks: {[r.name for r in results if not r.passed]}",
              file=sys.stderr)
        return 1
    return 0


def cmd_run(args) -> int:
    cfg = _load_cfg(args.config)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    initial = None
    t_start = 0.0
    if args.resume:
        initial = load_spectral(args.resume)
        t_start = args.t_start
    try:
        rec = run(cfg, initial_state=initial, t_start=t_start)
    except BlowUpError as exc:
        if exc.record is not None:
            exc.record.write_csv(out_dir / "trajectory.csv")
        print(f"error: {exc}", file=sys.stderr)
        return 1
    traj = out_dir / "trajectory.csv"
    rec.write_csv(traj)
    snap = out_dir / "final_snapshot.txt"
    save_spectral(rec.final_state, snap)
    outputs = [traj, snap]
    if not args.no_plots:
        from .plots import trajectory_figure
        fig = out_dir / "trajectory.png"
        trajectory_figure(rec, fig)
        outputs.append(fig)
    G = grashof(cfg.forcing.to_field(cfg.K), cfg.mu)
    print(f"integrated to t={rec.final_time:g} "
          f"(dt={cfg.effective_dt:g}, K={cfg.K}, Grashof={G:.4g})")
    print(f"final: energy={rec.energy[-1]:.6g} "
          f"zonal={rec.zonal_energy[-1]:.6g} "
          f"nonzonal={rec.nonzonal_energy[-1]:.6g}")
    _write_manifest(out_dir / "manifest.json", "run", cfg, outputs,
                    resume=args.resume, t_start=t_start)
    return 0


def _parse_epsilons(text: str) -> list:
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        if tok.lower() in ("inf", "infinity"):
            out.append(math.inf)
        else:
            try:
                out.append(float(tok))
            except ValueError as exc:
                raise ConfigError(f"bad epsilon value {tok!r}") from exc
    if len([e for e in out if math.isfinite(e)]) < 3:
        raise ConfigError("need at least 3 finite epsilon values")
    return out


def cmd_scan_epsilon(args) -> int:
    cfg = _load_cfg(args.config)
    epsilons = _parse_epsilons(args.epsilons)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    def one(eps: float):
        return run(replace(cfg, epsilon=eps))

    n_workers = _thread_cap(len(epsilons))
    with concurrent.futures.ThreadPoolExecutor(max_workers=n_workers) as ex:
        records = list(ex.map(one, epsilons))

    outputs = []
    sups, avgs = [], []
    window = None
    for i, (eps, rec) in enumerate(zip(epsilons, records)):
        try:
            sup, avg, window = tail_statistics(rec, cfg.mu)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        sups.append(sup)
        avgs.append(avg)
        traj = out_dir / f"traj_eps{i}.csv"
        rec.write_csv(traj)
        outputs.append(traj)
        tag = "inf" if math.isinf(eps) else f"{eps:g}"
        print(f"eps={tag}: sup tail |w~|^2 = {sup:.6g}, "
              f"mu*avg |grad w~|^2 = {avg:.6g}")

    scan = make_scan_result(epsilons, sups, avgs, window)
    scan_csv = out_dir / "scan.csv"
    write_scan_csv(scan, scan_csv)
    sidecar = out_dir / "scan_fit.json"
    write_scan_sidecar(scan, sidecar)
    outputs += [scan_csv, sidecar]
    if not args.no_plots:
        from .plots import scan_figure
        fig = out_dir / "scan.png"
        scan_figure(scan, fig)
        outputs.append(fig)

    lo, hi = SLOPE_BAND
    in_band = lo <= scan.slope <= hi
    print(f"fitted slope {scan.slope:.4f} (r^2={scan.r_squared:.4f}); "
          f"band [{lo}, {hi}]: "
          + ("within band"
         if in_band else "OUTSIDE band (experiment failure, not library "
                         "failure; see scan_fit.json)"))
    finite = [(e, s) for e, s in zip(epsilons, sups) if math.isfinite(e)]
    finite.sort(key=lambda p: -p[0])
    inversions = sum(1 for (ea, sa), (eb, sb) in zip(finite, finite[1:])
                     if sb > sa * 1.10)
    print(f"tail sup monotone non-increasing in 1/eps: "
          f"{inversions} inversion(s) beyond 10%")
    _write_manifest(out_dir / "manifest.json", "scan-epsilon", cfg, outputs,
                    epsilons=["inf" if math.isinf(e) else e for e in epsilons],
                    slope=scan.slope, r_squared=scan.r_squared,
                    slope_band=list(SLOPE_BAND), slope_in_band=bool(in_band),
                    threads=n_workers)
    return 0


def cmd_attractor(args) -> int:
    cfg = _load_cfg(args.config)
    if cfg.forcing.profile[0] != "steady":
        raise ConfigError("attractor experiment requires steady forcing")
    try:
        seed_a, seed_b = (int(s) for s in args.seeds.split(","))
    except ValueError as exc:
        raise ConfigError(f"--seeds must be two integers, got "
                          f"{args.seeds!r}") from exc
    eps = math.inf if args.epsilon.lower() in ("inf", "infinity") \
        else float(args.epsilon)
    cfg = replace(cfg, epsilon=eps)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    dt = cfg.effective_dt
    n_records = max(1, int(round(cfg.t_end / dt)) // cfg.record_every)
    stride = max(1, -(-n_records // 2000))

    def one(seed: int):
        return run(replace(cfg, seed=seed), keep_states=True,
                   keep_states_stride=stride)

    with concurrent.futures.ThreadPoolExecutor(max_workers=_thread_cap(2)) \
            as ex:
        rec_a, rec_b = list(ex.map(one, [seed_a, seed_b]))

    times = [t for t, _ in rec_a.states]
    dists = [distance(fa, fb, 0.0)
             for (_, fa), (_, fb) in zip(rec_a.states, rec_b.states)]
    times.append(rec_a.final_time)
    dists.append(distance(rec_a.final_state, rec_b.final_state, 0.0))

    first_cross = next((t for t, d in zip(times, dists)
                        if d < args.threshold), None)
    final_dist = dists[-1]

    csv_path = out_dir / "attractor.csv"
    with open(csv_path, "w", encoding="utf-8") as fh:
        fh.write("t,distance_l2\n")
        for t, d in zip(times, dists):
            fh.write(f"{t:.17g},{d:.17g}\n")
    report = {
        "epsilon": "inf" if math.isinf(eps) else eps,
        "seeds": [seed_a, seed_b],
        "threshold": args.threshold,
        "final_time": rec_a.final_time,
        "final_distance": final_dist,
        "first_time_below_threshold": first_cross,
        "converged": bool(final_dist < args.threshold),
    }
    report_path = out_dir / "attractor_report.json"
    with open(report_path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    outputs = [csv_path, report_path]
    if not args.no_plots:
        from .plots import attractor_figure
        fig = out_dir / "attractor.png"
        attractor_figure(np.asarray(times), np.asarray(dists),
                         args.threshold, fig)
        outputs.append(fig)
    print(f"final L2 distance at t={rec_a.final_time:g}: {final_dist:.6g}")
    print("first time below threshold "
          f"{args.threshold:g}: "
          + (f"{first_cross:g}" if first_cross is not None else "never"))
    _write_manifest(out_dir / "manifest.json", "attractor", cfg, outputs,
                    seeds=[seed_a, seed_b], threshold=args.threshold,
                    report=report)
    return 0


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="zonalsphere",
        description="Spectral solver and triad verification suite for the "
                    "vorticity equation on a rapidly rotating sphere.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("coeffs", help="dump the triad coefficient table")
    c.add_argument("--K", type=int, required=True)
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_coeffs)

    v = sub.add_parser("verify", help="run the property-check suite")
    v.add_argument("--K", type=int, required=True)
    v.add_argument("--inject-fault", choices=["jsign"], default=None,
                   help="deliberately corrupt a convention (testing hook)")
    v.add_argument("--manifest", default=None,
                   help="optional path for the verify manifest")
    v.set_defaults(func=cmd_verify)

    r = sub.add_parser("run", help="integrate one trajectory")
    r.add_argument("--config", required=True)
    r.add_argument("--out-dir", required=True)
    r.add_argument("--resume", default=None,
                   help="spectral snapshot to resume from")
    r.add_argument("--t-start", type=float, default=0.0,
                   help="time of the resume snapshot")
    r.add_argument("--no-plots", action="store_true")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("scan-epsilon", help="zonalization scaling experiment")
    s.add_argument("--config", required=True)
    s.add_argument("--epsilons", required=True,
                   help="comma-separated list; 'inf' allowed as control")
    s.add_argument("--out-dir", required=True)
    s.add_argument("--no-plots", action="store_true")
    s.set_defaults(func=cmd_scan_epsilon)

    a = sub.add_parser("attractor", help="two-trajectory collapse experiment")
    a.add_argument("--config", required=True)
    a.add_argument("--epsilon", required=True)
    a.add_argument("--seeds", required=True, help="two integers, e.g. 11,12")
    a.add_argument("--out-dir", required=True)
    a.add_argument("--threshold", type=float, default=1e-6)
    a.add_argument("--no-plots", action="store_true")
    a.set_defaults(func=cmd_attractor)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
