"""Fixed-point decoder runtime plus float BP and NMS/OMS baselines.

A designed parameter set is compiled into a :class:`DecodePlan` of flat
arrays; the per-frame message-passing loops live in :mod:`ibldpc.kernels`
(compiled extension with a pure-numpy fallback). Messages are stored
sign-magnitude, VN arithmetic uses wide integer accumulation with a single
clamp to the w'-bit range, and early termination checks the core parity
checks on the APP hard decision.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .code import CodeConfig, GraphIndex
from .errors import ParamsMismatch
from .infoquant import message_alphabet
from .params import DecoderParams
from .scheduling import Schedule, ScheduleStep


@dataclass
class DecodeResult:
    bits: np.ndarray          # hard decision, all J*Z positions
    success: bool             # core parity checks satisfied
    iterations: float         # fractional iteration count at termination
    mass: int                 # location updates performed
    snaps_v: np.ndarray | None = None   # (nsnap, nloc, Z) int8
    snaps_c: np.ndarray | None = None


class DecodePlan:
    """Flat-array compilation of (DecoderParams, code) for the kernels."""

    def __init__(self, params: DecoderParams, cfg: CodeConfig, gi: GraphIndex):
        ri = params.rate_index(cfg.signature())
        if ri < 0:
            raise ParamsMismatch(
                f"params designed for {params.signatures}, not {cfg.signature()}")
        self.params = params
        self.cfg = cfg
        self.gi = gi
        res = params.res
        self.Z = gi.Z
        self.nloc = gi.nloc
        self.J = gi.J
        self.w = res.w
        self.half = 1 << (res.w - 1)
        self.M = res.clip
        self.zmax = res.zmax
        self.loc_row = gi.loc_row
        self.loc_col = gi.loc_col
        self.loc_shift = gi.loc_shift
        self.row_ptr, self.row_loc = gi.row_ptr, gi.row_loc
        self.col_ptr, self.col_loc = gi.col_ptr, gi.col_loc
        self.core_rows = gi.core_rows.astype(np.int32)
        core_cols = np.unique(gi.loc_col[np.isin(gi.loc_row, gi.core_rows)])
        self.hd_cols = core_cols.astype(np.int32)
        self.tau_ch = np.asarray(params.tau_ch, dtype=np.float64)
        self.phi_ch = np.asarray(params.phi_ch[ri], dtype=np.int32)

        from .alignment import alignment_map
        av = alignment_map(params.align_v, gi).region_of
        ac = alignment_map(params.align_c, gi).region_of
        ckeys = sorted(set(map(int, ac)) |
                       {k for sp in params.steps if sp.kind == "v"
                        for k in sp.recs})
        vkeys = sorted(set(map(int, av)) |
                       {k for sp in params.steps if sp.kind == "c_comp"
                        for k in sp.recs})
        cmap = {k: i for i, k in enumerate(ckeys)}
        vmap = {k: i for i, k in enumerate(vkeys)}
        self.ncreg, self.nvreg = len(ckeys), len(vkeys)
        self.rc_of = np.array([cmap[int(k)] for k in ac], dtype=np.int32)
        self.rv_of = np.array([vmap[int(k)] for k in av], dtype=np.int32)

        sched = Schedule(kind=params.schedule_kind,
                         steps=[ScheduleStep(*s) for s in params.schedule_steps],
                         layers=[tuple(g) for g in params.layers],
                         layer_axis=params.layer_axis, imax=params.imax)
        ns = len(sched.steps)
        kinds = []
        locs_per_step = []
        for st, sp in zip(sched.steps, params.steps):
            locs_per_step.append(sched.resolve(st, gi))
            if st.kind == "v":
                kinds.append(0)
            else:
                kinds.append(1 if sp.kind == "c_comp" else 2)
        self.step_kind = np.array(kinds, dtype=np.int32)
        self.step_check = np.array([s.check for s in sched.steps], dtype=np.uint8)
        self.step_ptr = np.zeros(ns + 1, dtype=np.int64)
        self.step_loc = np.concatenate(locs_per_step).astype(np.int32) \
            if ns else np.zeros(0, np.int32)
        np.cumsum([len(u) for u in locs_per_step], out=self.step_ptr[1:])

        # per-step region tables, flattened
        nthr = self.half - 1
        tau_rows = [np.zeros((0, nthr), np.int32)]
        tau_row_of: list[dict[int, int]] = []
        nrow = 0
        for sp in params.steps:
            d = {}
            for key in sorted(sp.taus):
                cuts = np.asarray(sp.taus[key], dtype=np.int32).reshape(nthr)
                tau_rows.append(cuts[None, :])
                d[key] = nrow
                nrow += 1
            tau_row_of.append(d)
        self.tau_flat = np.concatenate(tau_rows, axis=0) if nrow else \
            np.zeros((1, nthr), np.int32)

        self.step_tau_idx = np.zeros(len(self.step_loc), dtype=np.int32)
        self.rec_flat = np.zeros((ns, self.ncreg, self.half), dtype=np.int32)
        self.crec_flat = np.zeros((ns, self.nvreg, self.half), dtype=np.int32) \
            if any(k == 1 for k in kinds) else np.zeros((0, 0, 0), np.int32)
        upd_ids = []
        upd_ptr = np.zeros(ns + 1, dtype=np.int64)
        for k, (st, sp) in enumerate(zip(sched.steps, params.steps)):
            lo, hi = self.step_ptr[k], self.step_ptr[k + 1]
            if st.kind == "v":
                amap = ac if sp.aware else av
                for key, rec in sp.recs.items():
                    self.rec_flat[k, cmap[int(key)], :] = rec.values
                    upd_ids.append(cmap[int(key)])
                for i in range(lo, hi):
                    n = self.step_loc[i]
                    self.step_tau_idx[i] = tau_row_of[k][int(amap[n])]
            elif sp.kind == "c_comp":
                for key, rec in sp.recs.items():
                    self.crec_flat[k, vmap[int(key)], :] = rec.values
                for i in range(lo, hi):
                    n = self.step_loc[i]
                    self.step_tau_idx[i] = tau_row_of[k][int(ac[n])]
            upd_ptr[k + 1] = len(upd_ids)
        self.rec_upd_ptr = upd_ptr
        self.rec_upd_ids = np.array(upd_ids, dtype=np.int32)

    def quantize_channel(self, llr: np.ndarray) -> np.ndarray:
        """Channel LLRs -> symbol indices 0..2^wch-1, shape (..., J, Z)."""
        idx = np.searchsorted(self.tau_ch, llr, side="right")
        return idx.reshape(llr.shape[:-1] + (self.J, self.Z)).astype(np.int32)


def build_plan(params: DecoderParams, cfg: CodeConfig, gi: GraphIndex) -> DecodePlan:
    return DecodePlan(params, cfg, gi)


def decode(llr: np.ndarray, plan: DecodePlan, early_term: bool = True,
           snap_steps: np.ndarray | None = None) -> DecodeResult:
    """Run the designed fixed-point decoder on one frame of channel LLRs."""
    res = decode_batch(llr[None, :], plan, early_term, snap_steps)
    return res[0]


def decode_batch(llrs: np.ndarray, plan: DecodePlan, early_term: bool = True,
                 snap_steps: np.ndarray | None = None) -> list[DecodeResult]:
    llrs = np.asarray(llrs, dtype=np.float64)
    tch = plan.quantize_channel(llrs)
    snap = np.asarray(snap_steps, dtype=np.int32) if snap_steps is not None \
        else np.zeros(0, np.int32)
    bits, ok, mass, sv, sc = kernels.backend.run_designed(
        plan, tch, bool(early_term), snap)
    out = []
    for f in range(llrs.shape[0]):
        out.append(DecodeResult(
            bits=bits[f], success=bool(ok[f]),
            iterations=float(mass[f]) / (2.0 * plan.nloc), mass=int(mass[f]),
            snaps_v=sv[f] if len(snap) else None,
            snaps_c=sc[f] if len(snap) else None))
    return out


def decode_bp_float(llr: np.ndarray, cfg: CodeConfig, gi: GraphIndex,
                    imax: int) -> DecodeResult:
    """Float sum-product reference decoder (flooding, same termination rule)."""
    return bp_batch(llr[None, :], cfg, gi, imax)[0]


def bp_batch(llrs: np.ndarray, cfg: CodeConfig, gi: GraphIndex,
             imax: int, early_term: bool = True) -> list[DecodeResult]:
    llrs = np.asarray(llrs, dtype=np.float64)
    bits, ok, mass = kernels.backend.run_bp(gi, llrs, int(imax), early_term)
    return [DecodeResult(bits=bits[f], success=bool(ok[f]),
                         iterations=float(mass[f]) / (2.0 * gi.nloc),
                         mass=int(mass[f]))
            for f in range(llrs.shape[0])]


def decode_minsum_baseline(llr: np.ndarray, cfg: CodeConfig, gi: GraphIndex,
                           variant: str, param: float, qbits: int | None,
                           imax: int, schedule: str = "flooding",
                           qstep: float = 0.5) -> DecodeResult:
    """Fixed-point normalized (NMS) or offset (OMS) min-sum baseline with
    static uniform quantization."""
    return minsum_batch(llr[None, :], cfg, gi, variant, param, qbits, imax,
                        schedule, qstep)[0]


def minsum_batch(llrs: np.ndarray, cfg: CodeConfig, gi: GraphIndex,
                 variant: str, param: float, qbits: int | None, imax: int,
                 schedule: str = "flooding", qstep: float = 0.5,
                 early_term: bool = True) -> list[DecodeResult]:
    if variant not in ("nms", "oms"):
        raise ValueError("variant must be 'nms' or 'oms'")
    llrs = np.asarray(llrs, dtype=np.float64)
    bits, ok, mass = kernels.backend.run_minsum(
        gi, llrs, variant, float(param), 0 if qbits is None else int(qbits),
        float(qstep), int(imax), schedule == "row_layered", early_term)
    return [DecodeResult(bits=bits[f], success=bool(ok[f]),
                         iterations=float(mass[f]) / (2.0 * gi.nloc),
                         mass=int(mass[f]))
            for f in range(llrs.shape[0])]


def collect_histograms(plan: DecodePlan, snap_steps: np.ndarray,
                       llrs: np.ndarray, codewords: np.ndarray
                       ) -> tuple[np.ndarray, np.ndarray]:
    """Empirical joint (transmitted bit, message) counts per memory location.

    Returns (counts_v, counts_c) of shape (nsnap, nloc, 2, 2^w): counts of
    each message symbol jointly with the code bit at the location's column.
    """
    syms = message_alphabet(plan.w)
    sym_idx = {int(s): i for i, s in enumerate(syms)}
    nsnap = len(snap_steps)
    counts_v = np.zeros((nsnap, plan.nloc, 2, len(syms)), dtype=np.int64)
    counts_c = np.zeros_like(counts_v)
    results = decode_batch(llrs, plan, early_term=False, snap_steps=snap_steps)
    lut = np.zeros(2 * plan.half + 1, dtype=np.int64)
    for s, i in sym_idx.items():
        lut[s + plan.half] = i
    nsym = len(syms)
    loc_idx = np.repeat(np.arange(plan.nloc, dtype=np.int64), plan.Z)
    cw = codewords.reshape(codewords.shape[0], plan.J, plan.Z)
    for f, r in enumerate(results):
        xbit = cw[f, plan.loc_col, :].astype(np.int64).ravel()   # (nloc*Z,)
        for si in range(nsnap):
            for counts, snaps in ((counts_v, r.snaps_v), (counts_c, r.snaps_c)):
                sym = lut[snaps[si].astype(np.int64).ravel() + plan.half]
                flat = (loc_idx * 2 + xbit) * nsym + sym
                np.add.at(counts[si].reshape(-1), flat, 1)
    return counts_v, counts_c
