#!/usr/bin/env python3
"""Benchmark the compiled decode kernels against the pure-numpy reference.

Usage: python benchmarks/bench_kernels.py [--K 1032] [--rate 1/3] [--frames 40]
"""

import argparse
import time

import numpy as np

import ibldpc.kernels as kernels
from ibldpc.code import build_code, encode
from ibldpc.dde import design_decoder
from ibldpc.params import Resolutions
from ibldpc.runtime import bp_batch, build_plan, decode_batch
from ibldpc.scheduling import build_schedule


def make_frames(cfg, gi, clip, n, ebn0, seed=0):
    rng = np.random.default_rng(seed)
    u = rng.integers(0, 2, (n, cfg.K)).astype(np.uint8)
    b = encode(u, cfg, gi)
    sigma2 = 1.0 / (2 * float(cfg.r) * 10 ** (ebn0 / 10))
    y = (1 - 2 * b.astype(float)) + rng.normal(0, np.sqrt(sigma2), b.shape)
    llr = 2 * y / sigma2
    llr[:, ~cfg.transmitted_mask] = 0.0
    llr[:, cfg.filler_mask] = clip
    return llr


def timed(fn, *args, **kw):
    t0 = time.perf_counter()
    out = fn(*args, **kw)
    return time.perf_counter() - t0, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--K", type=int, default=1032)
    ap.add_argument("--rate", default="1/3")
    ap.add_argument("--frames", type=int, default=40)
    ap.add_argument("--w", type=int, default=3)
    args = ap.parse_args()

    cfg, gi = build_code(args.K, args.rate)
    sched = build_schedule("flooding", gi, 30)
    dr = design_decoder(cfg, gi, sched, "column", "row",
                        Resolutions(w=args.w), 1.8, cn_kind="minsum")
    plan = build_plan(dr.params, cfg, gi)
    llr = make_frames(cfg, gi, dr.params.lch_max, args.frames, 1.5)

    print(f"code {cfg.signature()}  |N|={gi.nloc}  frames={args.frames}")
    rows = []
    for name in ("compiled", "reference"):
        try:
            kernels.use(name)
        except ImportError:
            print(f"{name:10s}  (not available)")
            continue
        t, res = timed(decode_batch, llr, plan, False)
        tb, _ = timed(bp_batch, llr, cfg, gi, 30, False)
        rows.append((name, t, tb))
        print(f"{name:10s}  designed {1e3 * t / args.frames:8.2f} ms/frame   "
              f"float BP {1e3 * tb / args.frames:8.2f} ms/frame")
    if len(rows) == 2:
        print(f"speedup     designed {rows[1][1] / rows[0][1]:8.1f}x          "
              f"float BP {rows[1][2] / rows[0][2]:8.1f}x")
    kernels.use("c" if rows and rows[0][0] == "compiled" else "py")


if __name__ == "__main__":
    main()
