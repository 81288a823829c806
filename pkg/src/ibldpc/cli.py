"""Command-line interface: design, simulate, sweep, search-snr,
dump-schedule, dump-mi. Configuration comes from JSON files with flag
overrides; results are CSV. Exit codes: 0 success, 2 config error, 3 job
failure."""

from __future__ import annotations

import argparse
import csv
import json
import sys
from fractions import Fraction

from .errors import IbldpcError

EXIT_OK, EXIT_CONFIG, EXIT_JOB = 0, 2, 3


def _load_json(path: str) -> dict:
    with open(path) as f:
        return json.load(f)


def _design_from_config(cfg_d: dict):
    from .code import build_code
    from .dde import design_decoder, design_decoder_optimized, \
        design_rate_compatible
    from .params import Resolutions
    from .scheduling import build_schedule

    res = Resolutions(w=int(cfg_d["w"]), wch=int(cfg_d.get("wch", 4)),
                      wp=int(cfg_d.get("wp", 7)),
                      kappa_v=float(cfg_d.get("kappa_v", 0.25)))
    av, ac = cfg_d.get("alignment", "column-row").split("-")
    kind = cfg_d.get("schedule", "flooding")
    imax = float(cfg_d.get("imax", 30))
    cn_kind = cfg_d.get("cn_kind", "minsum")
    cn_aware = bool(cfg_d.get("cn_aware", False))
    bg = cfg_d.get("bg")
    rates = cfg_d.get("rates")
    if rates:
        builds = [build_code(int(cfg_d["K"]), Fraction(r), bg=bg)
                  for r in rates]
        ebn0 = cfg_d["design_ebn0"]
        if not isinstance(ebn0, list):
            raise ValueError("rate-compatible design needs a design_ebn0 list")
        return design_rate_compatible(
            builds, kind.removesuffix("_opt"), imax, av, ac, res,
            [float(x) for x in ebn0], cn_kind, cn_aware,
            optimized=kind.endswith("_opt"))
    code, gi = build_code(int(cfg_d["K"]), Fraction(cfg_d["rate"]), bg=bg)
    ebn0 = float(cfg_d["design_ebn0"])
    if kind.endswith("_opt"):
        return design_decoder_optimized(code, gi, kind.removesuffix("_opt"),
                                        imax, av, ac, res, ebn0,
                                        cn_kind=cn_kind, cn_aware=cn_aware)
    sched = build_schedule(kind, gi, imax)
    return design_decoder(code, gi, sched, av, ac, res, ebn0,
                          cn_kind=cn_kind, cn_aware=cn_aware)


def cmd_design(args) -> int:
    from .paramio import export_params
    cfg_d = _load_json(args.config)
    dr = _design_from_config(cfg_d)
    export_params(dr.params, args.output)
    print(f"designed {len(dr.params.steps)} steps -> {args.output}")
    return EXIT_OK


def cmd_dump_mi(args) -> int:
    cfg_d = _load_json(args.config)
    dr = _design_from_config(cfg_d)
    with open(args.output, "w", newline="") as f:
        wr = csv.writer(f)
        wr.writerow(["step", "iteration", "region", "I_bits"])
        for k, iota, region, bits in dr.mi_curve.steps:
            wr.writerow([k, repr(iota), region, repr(bits)])
    print(f"MI curve ({len(dr.mi_curve.steps)} rows) -> {args.output}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    from .paramio import import_params
    from .sim import SimConfig, run_fer

    cfg_d = _load_json(args.config) if args.config else {}
    if args.ebn0:
        cfg_d["ebn0_grid"] = [float(x) for x in args.ebn0.split(",")]
    for name in ("seed", "workers", "min_errors", "max_frames"):
        v = getattr(args, name)
        if v is not None:
            cfg_d[name] = v
    params = import_params(args.params) if args.params else None
    sim = SimConfig(
        K=int(cfg_d["K"]), r=Fraction(cfg_d["rate"]),
        decoder=cfg_d.get("decoder", "designed"),
        ebn0_grid=cfg_d["ebn0_grid"], params=params,
        imax=int(cfg_d.get("imax", 30)),
        baseline_param=float(cfg_d.get("baseline_param", 0.0)),
        baseline_qbits=cfg_d.get("baseline_qbits"),
        baseline_qstep=float(cfg_d.get("baseline_qstep", 0.5)),
        baseline_schedule=cfg_d.get("baseline_schedule", "flooding"),
        max_frames=int(cfg_d.get("max_frames", 10_000_000)),
        min_errors=int(cfg_d.get("min_errors", 100)),
        seed=int(cfg_d.get("seed", 0)),
        workers=int(cfg_d.get("workers", 1)),
        bg=cfg_d.get("bg"))
    out = run_fer(sim)
    with open(args.output, "w", newline="") as f:
        wr = csv.writer(f)
        wr.writerow(["EbN0", "EsN0", "frames", "frame_errors", "bit_errors",
                     "FER", "BER", "avg_iter", "ci95"])
        for p in out.points:
            wr.writerow([repr(p.ebn0_db), repr(p.esn0_db), p.frames,
                         p.frame_errors, p.bit_errors, repr(p.fer),
                         repr(p.ber), repr(p.avg_iter), repr(p.ci95)])
    print(f"{len(out.points)} points -> {args.output}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    from .sim import SWEEP_COLUMNS, enumerate_jobs, sweep

    spec = _load_json(args.config)
    if args.dry_run:
        jobs = enumerate_jobs(spec)
        print(f"{len(jobs)} jobs")
        return EXIT_OK
    rows, failures = sweep(spec)
    with open(args.output, "w", newline="") as f:
        wr = csv.writer(f)
        wr.writerow(SWEEP_COLUMNS)
        wr.writerows(rows)
    for job, err in failures:
        print(f"job failed: {err} ({job})", file=sys.stderr)
    print(f"{len(rows)} rows -> {args.output}; {len(failures)} failures")
    return EXIT_JOB if failures else EXIT_OK


def cmd_search_snr(args) -> int:
    from .sim import SimConfig, run_fer, search_design_snr

    cfg_d = _load_json(args.config)

    def design_fn(ebn0):
        d = dict(cfg_d)
        d["design_ebn0"] = ebn0
        return _design_from_config(d)

    def pilot_fn(dr, ebn0):
        sim = SimConfig(
            K=int(cfg_d["K"]), r=Fraction(cfg_d["rate"]), decoder="designed",
            ebn0_grid=[float(cfg_d.get("pilot_ebn0", ebn0))],
            params=dr.params, max_frames=int(cfg_d.get("pilot_frames", 2000)),
            min_errors=int(cfg_d.get("pilot_min_errors", 10 ** 9)),
            seed=int(cfg_d.get("seed", 0)),
            workers=int(cfg_d.get("workers", 1)), bg=cfg_d.get("bg"))
        return run_fer(sim).points[0].fer

    best = search_design_snr(design_fn, pilot_fn, float(args.lo),
                             float(args.hi))
    print(f"design_ebn0 {best}")
    return EXIT_OK


def cmd_dump_schedule(args) -> int:
    from .code import build_code
    from .scheduling import build_schedule

    _, gi = build_code(int(args.K), Fraction(args.rate), bg=args.bg)
    sched = build_schedule(args.kind, gi, float(args.imax))
    print(f"# {args.kind} schedule, {len(sched.layers)} layers,"
          f" {len(sched.steps)} steps, iota {float(sched.total_iota()):.3f}")
    for lid, group in enumerate(sched.layers):
        print(f"layer {lid}: {' '.join(str(i) for i in group)}")
    return EXIT_OK


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="ibldpc",
                                 description="coarsely quantized 5G LDPC "
                                             "decoder design and evaluation")
    sub = ap.add_subparsers(dest="cmd", required=True)

    d = sub.add_parser("design", help="design a decoder parameter set")
    d.add_argument("--config", required=True)
    d.add_argument("-o", "--output", required=True)
    d.set_defaults(fn=cmd_design)

    s = sub.add_parser("simulate", help="Monte Carlo FER/BER campaign")
    s.add_argument("--config")
    s.add_argument("--params")
    s.add_argument("--ebn0", help="comma list override")
    s.add_argument("--seed", type=int)
    s.add_argument("--workers", type=int)
    s.add_argument("--min-errors", dest="min_errors", type=int)
    s.add_argument("--max-frames", dest="max_frames", type=int)
    s.add_argument("-o", "--output", required=True)
    s.set_defaults(fn=cmd_simulate)

    w = sub.add_parser("sweep", help="design+simulate a config cross product")
    w.add_argument("--config", required=True)
    w.add_argument("-o", "--output", default="sweep.csv")
    w.add_argument("--dry-run", action="store_true")
    w.set_defaults(fn=cmd_sweep)

    q = sub.add_parser("search-snr", help="find the best design Eb/N0")
    q.add_argument("--config", required=True)
    q.add_argument("--lo", required=True)
    q.add_argument("--hi", required=True)
    q.set_defaults(fn=cmd_search_snr)

    g = sub.add_parser("dump-schedule", help="print a layer table")
    g.add_argument("--K", required=True)
    g.add_argument("--rate", required=True)
    g.add_argument("--kind", default="row_layered")
    g.add_argument("--imax", default=1)
    g.add_argument("--bg", type=int)
    g.set_defaults(fn=cmd_dump_schedule)

    m = sub.add_parser("dump-mi", help="design and dump the MI curve as CSV")
    m.add_argument("--config", required=True)
    m.add_argument("-o", "--output", required=True)
    m.set_defaults(fn=cmd_dump_mi)

    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IbldpcError as exc:
        print(f"job failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_JOB


if __name__ == "__main__":
    sys.exit(main())
