"""Discrete density evolution design engine.

Tracks joint (bit, message) pmfs per memory location through a decoding
schedule and designs the reconstruction tables and quantizer thresholds for
every update step. Supports per-region alignment pooling, computational and
min-sum check updates, CN-aware variable-node quantizer design, optimized
static layer orders, and rate-compatible pooling over a rate set.

Internal conventions: message pmfs are (2, 2^w) arrays over the ordered
sign-magnitude alphabet; integer-LLR pmfs are dense (2, 2M+1) arrays over
[-M..M] with M = 2^(w'-1)-1; all sums use wide accumulation with a single
clamp at the end, matching the fixed-point runtime exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.special import ndtr

from .alignment import Alignment, alignment_map
from .code import BIT_FILLER, BIT_PUNCTURED, CodeConfig, GraphIndex
from .errors import IncompatibleRates
from .infoquant import (JointPmf, MICurve, Quantizer, design_quantizer,
                        message_alphabet, mutual_information, quantize_pmf,
                        symmetrize)
from .params import DecoderParams, Reconstruction, Resolutions, StepParams
from .scheduling import Schedule, build_schedule, orthogonal_row_groups, \
    column_layer_groups

_EPS = 1e-300


def rnd_kappa(x, kappa: float):
    """rnd_k(l) = sgn(l) * floor(|l|/kappa + 0.5)."""
    x = np.asarray(x, dtype=np.float64)
    return np.sign(x) * np.floor(np.abs(x) / kappa + 0.5)


def phi_transform(x):
    """phi(|l|) = -log tanh(|l|/2); self-inverse on (0, inf)."""
    x = np.asarray(x, dtype=np.float64)
    with np.errstate(divide="ignore", over="ignore"):
        return -np.log(np.tanh(x / 2.0))


# ---------------------------------------------------------------------------
# channel model


def channel_pmf(cfg: CodeConfig, design_ebn0: float, kappa_ch: float | None = None,
                lch_max: float | None = None) -> tuple[list[JointPmf], float, float]:
    """Per-column joint pmfs p(b_j, l^ch_j) on the fine LLR grid.

    Punctured positions are uniform, filler positions a point mass at
    +lch_max conditioned on b=0, transmitted positions the bin-integrated
    Gaussian LLR with variance from Eb/N0 and the code rate.
    """
    sigma2 = 1.0 / (2.0 * float(cfg.r) * 10.0 ** (design_ebn0 / 10.0))
    if lch_max is None:
        lch_max = 6.0 * np.sqrt(2.0 / sigma2)
    if kappa_ch is None:
        kappa_ch = lch_max / 256.0
    L = int(round(lch_max / kappa_ch))
    grid = np.arange(-L, L + 1, dtype=np.int64)
    ncell = len(grid)

    mu, sd = 2.0 / sigma2, 2.0 / np.sqrt(sigma2)
    inner = (grid[:-1] + 0.5) * kappa_ch       # upper bin edges, tails absorbed
    cdf0 = np.concatenate([[0.0], ndtr((inner - mu) / sd), [1.0]])
    p_b0 = np.diff(cdf0)
    trans = np.stack([0.5 * p_b0, 0.5 * p_b0[::-1]])

    punct = np.full((2, ncell), 1.0 / (2 * ncell))
    filler = np.zeros((2, ncell))
    filler[0, -1] = 1.0

    kinds = cfg.bit_kind.reshape(cfg.J, cfg.Z)
    out = []
    for j in range(cfg.J):
        kj = kinds[j]
        wp = float(np.mean(kj == BIT_PUNCTURED))
        wf = float(np.mean(kj == BIT_FILLER))
        wt = 1.0 - wp - wf
        probs = wp * punct + wf * filler + wt * trans
        out.append(JointPmf(grid.copy(), probs, scale=kappa_ch, kind="channel"))
    return out, float(kappa_ch), float(lch_max)


def design_channel_quantizer(pmfs: list[JointPmf], wch: int
                             ) -> tuple[Quantizer, list[np.ndarray]]:
    """One shared symmetric quantizer from the column-averaged pmf, plus the
    per-column quantized pmfs."""
    nsym = 1 << wch
    acc = np.mean([p.probs for p in pmfs], axis=0)
    avg = JointPmf(pmfs[0].symbols, acc, pmfs[0].scale, "channel")
    q = design_quantizer(avg, nsym)
    quantized = [quantize_pmf(p, q).probs for p in pmfs]
    return q, quantized


def _llr_signed(probs: np.ndarray, conditional: bool = False) -> np.ndarray:
    """Per-symbol LLR with +/-inf preserved and 0/0 -> 0."""
    p0, p1 = probs[0].copy(), probs[1].copy()
    if conditional:
        m = probs.sum(axis=1)
        p0 = p0 / m[0] if m[0] > _EPS else np.zeros_like(p0)
        p1 = p1 / m[1] if m[1] > _EPS else np.zeros_like(p1)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.log(p0) - np.log(p1)
    out[(p0 <= _EPS) & (p1 <= _EPS)] = 0.0
    return out


def channel_reconstruction(pch_q: np.ndarray, kappa_v: float, clip: int) -> np.ndarray:
    """Signed integer reconstruction per channel symbol (posterior LLR)."""
    lv = _llr_signed(pch_q)
    vals = rnd_kappa(lv, kappa_v)
    return np.clip(np.nan_to_num(vals, posinf=clip, neginf=-clip),
                   -clip, clip).astype(np.int32)


# ---------------------------------------------------------------------------
# design state


@dataclass
class RateSlot:
    cfg: CodeConfig
    gi: GraphIndex
    align_v: Alignment
    align_c: Alignment
    pch_q: np.ndarray = None      # (J, 2, 2^wch)
    phi_ch: np.ndarray = None     # (J, 2^wch) int32
    pv: np.ndarray = None         # (nloc, 2, 2^w)
    pc: np.ndarray = None         # (nloc, 2, 2^w)


class DesignState:
    """Tracked pmfs plus resolutions/alignments for one design job.

    Holds one slot per design rate; the rate dimension extends the memory
    location index, and alignment regions pool across it by canonical key.
    """

    def __init__(self, builds: list[tuple[CodeConfig, GraphIndex]],
                 align_v: str, align_c: str, res: Resolutions,
                 cn_kind: str = "minsum", cn_aware: bool = False):
        bgs = {cfg.bg for cfg, _ in builds}
        if len(bgs) != 1:
            raise IncompatibleRates(f"rate set mixes base graphs {sorted(bgs)}")
        if cn_aware and align_c not in ("row", "matrix2", "matrix"):
            raise ValueError("CN-aware design needs row/matrix2/matrix CN alignment")
        order = sorted(range(len(builds)), key=lambda i: builds[i][0].r)
        self.slots = [RateSlot(builds[i][0], builds[i][1],
                               alignment_map(align_v, builds[i][1]),
                               alignment_map(align_c, builds[i][1]))
                      for i in order]
        self.res = res
        self.align_v_name = align_v
        self.align_c_name = align_c
        self.cn_kind = cn_kind
        self.cn_aware = cn_aware
        self.msg_syms = message_alphabet(res.w)
        self.nsym = len(self.msg_syms)
        self.half = res.w and (1 << (res.w - 1))
        self.M = res.clip
        self.overflow = False
        self.tau_ch: Quantizer | None = None
        self.kappa_ch = None
        self.lch_max = None
        self.design_ebn0: list[float] = []
        u = 1.0 / (2 * self.nsym)
        for slot in self.slots:
            slot.pv = np.full((slot.gi.nloc, 2, self.nsym), u)
            slot.pc = np.full((slot.gi.nloc, 2, self.nsym), u)
        self._regions_v = self._region_index("v")
        self._regions_c = self._region_index("c")

    @property
    def rates(self):
        return [s.cfg.r for s in self.slots]

    def _region_index(self, which: str) -> dict[int, list[tuple[int, int]]]:
        out: dict[int, list[tuple[int, int]]] = {}
        for ri, slot in enumerate(self.slots):
            am = slot.align_v if which == "v" else slot.align_c
            for n, key in enumerate(am.region_of):
                out.setdefault(int(key), []).append((ri, n))
        return out

    def set_channel(self, design_ebn0: list[float], kappa_ch: float | None = None,
                    lch_max: float | None = None) -> None:
        """Build channel pmfs per rate, design the shared channel quantizer,
        and derive per-column quantized pmfs and reconstructions."""
        if len(design_ebn0) != len(self.slots):
            raise ValueError("need one design Eb/N0 per rate")
        self.design_ebn0 = [float(x) for x in design_ebn0]
        if lch_max is None:
            lch_max = 0.0
            for slot, eb in zip(self.slots, self.design_ebn0):
                s2 = 1.0 / (2.0 * float(slot.cfg.r) * 10.0 ** (eb / 10.0))
                lch_max = max(lch_max, 6.0 * np.sqrt(2.0 / s2))
        if kappa_ch is None:
            kappa_ch = lch_max / 256.0
        per_rate_pmfs = []
        for slot, eb in zip(self.slots, self.design_ebn0):
            pmfs, _, _ = channel_pmf(slot.cfg, eb, kappa_ch, lch_max)
            per_rate_pmfs.append(pmfs)
        # shared quantizer from the rate- and column-averaged pmf
        col_avgs = [JointPmf(p[0].symbols,
                             np.mean([q.probs for q in p], axis=0),
                             p[0].scale, "channel")
                    for p in per_rate_pmfs]
        pooled = JointPmf(col_avgs[0].symbols,
                          np.mean([p.probs for p in col_avgs], axis=0),
                          col_avgs[0].scale, "channel")
        self.tau_ch = design_quantizer(pooled, 1 << self.res.wch)
        self.kappa_ch, self.lch_max = float(kappa_ch), float(lch_max)
        for slot, pmfs in zip(self.slots, per_rate_pmfs):
            slot.pch_q = np.stack([quantize_pmf(p, self.tau_ch).probs for p in pmfs])
            slot.phi_ch = np.stack([
                channel_reconstruction(slot.pch_q[j], self.res.kappa_v, self.M)
                for j in range(slot.cfg.J)])

    def set_channel_quantized(self, pch_q_per_rate: list[np.ndarray],
                              tau_ch: Quantizer | None = None) -> None:
        """Directly install quantized channel pmfs (used by tests/toy setups)."""
        for slot, pq in zip(self.slots, pch_q_per_rate):
            slot.pch_q = np.asarray(pq, dtype=np.float64)
            slot.phi_ch = np.stack([
                channel_reconstruction(slot.pch_q[j], self.res.kappa_v, self.M)
                for j in range(slot.gi.J)])
        self.tau_ch = tau_ch
        self.kappa_ch = self.kappa_ch or 1.0
        self.lch_max = self.lch_max or float(self.M)
        if not self.design_ebn0:
            self.design_ebn0 = [0.0] * len(self.slots)

    # -- region averaging -------------------------------------------------

    def avg_message_pmf(self, which: str, key: int) -> np.ndarray:
        members = (self._regions_v if which == "v" else self._regions_c)[key]
        arrs = [(self.slots[r].pv if which == "v" else self.slots[r].pc)[n]
                for r, n in members]
        return np.mean(arrs, axis=0)

    def preimage(self, which: str, key: int) -> list[tuple[int, int]]:
        return (self._regions_v if which == "v" else self._regions_c)[key]


def _sym_msg(p: np.ndarray) -> np.ndarray:
    """Symmetrize a message/dense pmf on a sign-symmetric ordered alphabet."""
    return 0.5 * (p + p[::-1, ::-1])


# ---------------------------------------------------------------------------
# reconstruction design


def design_rec_c(state: DesignState, keys) -> dict[int, np.ndarray]:
    """LLR-domain reconstructions of CN messages per region:
    phi_a(t) = rnd_kv(L(T=t|X)) for positive symbols, clipped to +/-M."""
    out = {}
    for key in sorted(keys):
        avg = _sym_msg(state.avg_message_pmf("c", key))
        lv = _llr_signed(avg, conditional=True)[state.half:]
        vals = rnd_kappa(lv, state.res.kappa_v)
        out[key] = np.clip(np.nan_to_num(vals, posinf=state.M, neginf=-state.M),
                           -state.M, state.M).astype(np.int32)
    return out


def design_rec_v_phi(state: DesignState, keys) -> dict[int, np.ndarray]:
    """Phi-domain reconstructions of VN messages per region:
    phi_a(t) = rnd_kc(phi(|L(T=t|X)|)), clipped to [0, zeta_max-1]."""
    zmax = state.res.zmax
    out = {}
    for key in sorted(keys):
        avg = _sym_msg(state.avg_message_pmf("v", key))
        lv = np.abs(_llr_signed(avg, conditional=True)[state.half:])
        with np.errstate(divide="ignore"):
            ph = phi_transform(lv)
        vals = rnd_kappa(ph, state.res.kc)
        out[key] = np.clip(np.nan_to_num(vals, posinf=zmax - 1),
                           0, zmax - 1).astype(np.int32)
    return out


# ---------------------------------------------------------------------------
# VN sum pushforward (dense integer-LLR pmfs)


def _cond_probs(joint: np.ndarray) -> np.ndarray:
    m = joint.sum(axis=1, keepdims=True)
    return np.divide(joint, m, out=np.zeros_like(joint), where=m > _EPS)


def _vn_dense_for(state: DesignState, ri: int, locs: np.ndarray,
                  rec_c: dict[int, np.ndarray]) -> dict[int, np.ndarray]:
    """p(x_n, l^v_n) on the clipped integer grid for each requested location.

    Wide accumulation of the channel term and extrinsic reconstructed CN
    terms, then a single clamp to [-M, M] (mass folding at the edges).
    """
    slot = state.slots[ri]
    gi = slot.gi
    M = state.M
    half = state.half
    out: dict[int, np.ndarray] = {}
    want = set(int(n) for n in locs)
    for j in sorted({int(gi.loc_col[n]) for n in want}):
        col = gi.col_locs(j)
        d = len(col)
        Wmax = M * (d + 1)
        width = 2 * Wmax + 1
        base = np.zeros((2, width))
        offs_ch = slot.phi_ch[j].astype(np.int64) + Wmax
        for si in range(slot.pch_q.shape[2]):
            base[:, offs_ch[si]] += slot.pch_q[j, :, si]
        terms: dict[int, tuple[np.ndarray, np.ndarray]] = {}

        def term_for(m: int) -> tuple[np.ndarray, np.ndarray]:
            if m not in terms:
                rec = rec_c[int(slot.align_c.region_of[m])]
                offs = np.where(state.msg_syms > 0,
                                rec[np.abs(state.msg_syms) - 1],
                                -rec[np.abs(state.msg_syms) - 1]).astype(np.int64)
                terms[m] = (offs, _cond_probs(slot.pc[m]))
            return terms[m]

        for n in col:
            n = int(n)
            if n not in want:
                continue
            cur = base
            for m in col:
                m = int(m)
                if m == n:
                    continue
                offs, cond = term_for(m)
                nxt = np.zeros_like(cur)
                for si in range(state.nsym):
                    o = int(offs[si])
                    if o >= 0:
                        nxt[:, o:] += cur[:, :width - o] * cond[:, si:si + 1]
                    else:
                        nxt[:, :o] += cur[:, -o:] * cond[:, si:si + 1]
                cur = nxt
            dense = np.zeros((2, 2 * M + 1))
            lo, hi = Wmax - M, Wmax + M
            dense[:, :] = cur[:, lo:hi + 1]
            tail_lo = cur[:, :lo].sum(axis=1)
            tail_hi = cur[:, hi + 1:].sum(axis=1)
            dense[:, 0] += tail_lo
            dense[:, -1] += tail_hi
            if (tail_lo + tail_hi).sum() > 1e-15:
                state.overflow = True
            out[n] = dense
    return out


# ---------------------------------------------------------------------------
# min-sum pushforward in the survival domain


def _surv_from_dense(dense: np.ndarray, M: int) -> np.ndarray:
    """(x, sign, mag>=m) survival array from a dense [-M..M] pmf; value 0
    counts as sign + with magnitude 0."""
    S = np.zeros((2, 2, M + 1))
    pos = dense[:, M:]                      # values 0..M
    S[:, 0, :] = np.cumsum(pos[:, ::-1], axis=1)[:, ::-1]
    neg = dense[:, :M + 1][:, ::-1]         # values 0..-M by magnitude
    Sn = np.cumsum(neg[:, ::-1], axis=1)[:, ::-1]
    S[:, 1, 1:] = Sn[:, 1:]
    S[:, 1, 0] = Sn[:, 1] if M >= 1 else 0.0
    return S


def _surv_from_msg(pm: np.ndarray, half: int) -> np.ndarray:
    """Survival array from a message pmf (no zero symbol)."""
    S = np.zeros((2, 2, half + 1))
    pos = pm[:, half:]                      # symbols +1..+half
    neg = pm[:, :half][:, ::-1]             # symbols -1..-half by magnitude
    S[:, 0, 1:] = np.cumsum(pos[:, ::-1], axis=1)[:, ::-1]
    S[:, 1, 1:] = np.cumsum(neg[:, ::-1], axis=1)[:, ::-1]
    S[:, :, 0] = S[:, :, 1]
    return S


def _surv_identity(M: int) -> np.ndarray:
    S = np.zeros((2, 2, M + 1))
    S[0, 0, :] = 1.0
    return S


def _surv_combine(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Running joint of (bit parity, sign product, min magnitude)."""
    out = np.zeros_like(A)
    for x1 in (0, 1):
        for s1 in (0, 1):
            a = A[x1, s1]
            if not a.any():
                continue
            out[x1 ^ 0, s1 ^ 0] += a * B[0, 0]
            out[x1 ^ 0, s1 ^ 1] += a * B[0, 1]
            out[x1 ^ 1, s1 ^ 0] += a * B[1, 0]
            out[x1 ^ 1, s1 ^ 1] += a * B[1, 1]
    return out


def _surv_extrinsic(inputs: list[np.ndarray]) -> list[np.ndarray]:
    d = len(inputs)
    ident = _surv_identity(inputs[0].shape[2] - 1)
    pre = [ident]
    for s in inputs:
        pre.append(_surv_combine(pre[-1], s))
    suf = [ident]
    for s in reversed(inputs):
        suf.append(_surv_combine(suf[-1], s))
    suf.reverse()
    return [_surv_combine(pre[k], suf[k + 1]) for k in range(d)]


def _pmf_axes_from_surv(S: np.ndarray) -> np.ndarray:
    """Per (x, s, m) probabilities from a survival array."""
    pm = S.copy()
    pm[:, :, :-1] -= S[:, :, 1:]
    return pm


def _dense_from_surv(S: np.ndarray, M: int) -> np.ndarray:
    pm = _pmf_axes_from_surv(S)
    dense = np.zeros((2, 2 * M + 1))
    dense[:, M:] += pm[:, 0, :]             # sign + at magnitudes 0..M
    dense[:, M::-1] += pm[:, 1, :]          # sign - mass; magnitude 0 -> value 0
    return dense


def _msg_from_surv(S: np.ndarray, half: int) -> np.ndarray:
    pm = _pmf_axes_from_surv(S)
    out = np.zeros((2, 2 * half))
    out[:, half:] = pm[:, 0, 1:]
    out[:, :half] = pm[:, 1, 1:][:, ::-1]
    return out


def minsum_scalar(values) -> int:
    """MS(y) = prod sgn(y_k) * min |y_k| (sign of 0 treated as 0)."""
    values = np.asarray(values)
    sgn = np.prod(np.sign(values))
    return int(sgn * np.min(np.abs(values)))


# ---------------------------------------------------------------------------
# phi-domain CN pushforward


def _phisum_row_outputs(state: DesignState, inputs: list[np.ndarray],
                        offs: list[np.ndarray], want: list[int],
                        ) -> dict[int, np.ndarray]:
    """Signed phi-tilde-domain pmfs of the computational CN outputs.

    inputs[k]: (2, nsym) joint of extrinsic message k; offs[k]: phi-domain
    reconstruction level per symbol (>=0). Output value for target k is
    sign * (zeta_max - clamp(sum of other terms)), on the signed grid
    [-zeta_max .. zeta_max].
    """
    zmax = state.res.zmax
    d = len(inputs)
    smax = max((d - 1), 1) * (zmax - 1)
    neg = state.msg_syms < 0
    out = {}
    for k in want:
        st = np.zeros((2, 2, smax + 1))
        st[0, 0, 0] = 1.0
        width = 1
        for m in range(d):
            if m == k:
                continue
            nxt = np.zeros_like(st)
            pm = inputs[m]
            om = offs[m]
            for si in range(state.nsym):
                o = int(om[si])
                blk = st[:, :, :width]
                if neg[si]:
                    blk = blk[:, ::-1, :]
                nxt[0, :, o:o + width] += blk[0] * pm[0, si]
                nxt[1, :, o:o + width] += blk[1] * pm[0, si]
                nxt[1, :, o:o + width] += blk[0] * pm[1, si]
                nxt[0, :, o:o + width] += blk[1] * pm[1, si]
            st = nxt
            width = min(width + int(om.max()), smax + 1)
        # clamp the sum, map through phi-tilde, attach sign
        zsum = st.copy()
        zsum[:, :, zmax - 1] += st[:, :, zmax:].sum(axis=2)
        dense = np.zeros((2, 2 * zmax + 1))
        vals = zmax - np.arange(zmax)        # zeta 0..zmax-1 -> value zmax..1
        dense[:, zmax + vals] += zsum[:, 0, :zmax]
        dense[:, zmax - vals] += zsum[:, 1, :zmax]
        out[k] = dense
    return out


# ---------------------------------------------------------------------------
# design operations (one schedule step each)


def _norm_U(state: DesignState, U) -> list[np.ndarray]:
    if isinstance(U, (list, tuple)) and len(U) == len(state.slots) \
            and all(isinstance(u, np.ndarray) for u in U):
        return [np.asarray(u, dtype=np.int64) for u in U]
    return [np.asarray(U, dtype=np.int64)]


def _referenced_c_regions(state: DesignState, U: list[np.ndarray]) -> set[int]:
    keys = set()
    for slot, u in zip(state.slots, U):
        for n in u:
            j = slot.gi.loc_col[n]
            for m in slot.gi.col_locs(j):
                if m != n:
                    keys.add(int(slot.align_c.region_of[m]))
    return keys


def design_vn_update(state: DesignState, U) -> StepParams:
    """Computational-domain VN update design (CN-unaware quantizers)."""
    U = _norm_U(state, U)
    rec_c = design_rec_c(state, _referenced_c_regions(state, U))

    # fresh pmfs exist for the updated locations; region averages run over
    # the preimage restricted to them (identical to the full preimage for
    # every full-region update)
    touched: set[int] = set()
    for ri, u in enumerate(U):
        touched |= {int(state.slots[ri].align_v.region_of[n]) for n in u}
    dense = [
        _vn_dense_for(state, ri, u, rec_c) if len(u) else {}
        for ri, u in enumerate(U)]

    taus: dict[int, Quantizer] = {}
    M = state.M
    grid = np.arange(-M, M + 1)
    for key in sorted(touched):
        members = [(ri, n) for ri, n in state.preimage("v", key)
                   if n in dense[ri]]
        avg = np.mean([dense[ri][n] for ri, n in members], axis=0)
        pj = JointPmf(grid, _sym_msg(avg))
        taus[key] = design_quantizer(pj, state.nsym)

    for ri, u in enumerate(U):
        slot = state.slots[ri]
        for n in u:
            n = int(n)
            q = taus[int(slot.align_v.region_of[n])]
            slot.pv[n] = quantize_pmf(JointPmf(grid, dense[ri][n]), q).probs

    return _vn_step_params(state, rec_c, taus, aware=False)


def design_vn_update_cn_aware(state: DesignState, U) -> StepParams:
    """CN-aware VN update: quantizers maximize the mutual information at the
    min-sum CN output, designed per CN alignment region and applied at the
    VN side."""
    U = _norm_U(state, U)
    M = state.M
    grid = np.arange(-M, M + 1)

    # rows touched by the update, completed per rate
    U_rows: list[np.ndarray] = []
    for ri, u in enumerate(U):
        gi = state.slots[ri].gi
        rows = np.unique(gi.loc_row[u]) if len(u) else np.array([], dtype=np.int64)
        U_rows.append(np.where(np.isin(gi.loc_row, rows))[0].astype(np.int64))

    rec_c = design_rec_c(state, _referenced_c_regions(state, U_rows))
    dense_v = [
        _vn_dense_for(state, ri, ur, rec_c) if len(ur) else {}
        for ri, ur in enumerate(U_rows)]

    # non-quantized min-sum CN outputs for all completed rows
    dense_c: list[dict[int, np.ndarray]] = [dict() for _ in state.slots]
    for ri, ur in enumerate(U_rows):
        gi = state.slots[ri].gi
        for i in np.unique(gi.loc_row[ur]) if len(ur) else []:
            locs = [int(m) for m in gi.row_locs(int(i))]
            surv = [_surv_from_dense(dense_v[ri][m], M) for m in locs]
            extr = _surv_extrinsic(surv)
            for k, m in enumerate(locs):
                dense_c[ri][m] = _dense_from_surv(extr[k], M)

    taus: dict[int, Quantizer] = {}
    keys = set()
    for ri, ur in enumerate(U_rows):
        keys |= {int(state.slots[ri].align_c.region_of[n]) for n in ur}
    for key in sorted(keys):
        members = [(ri, n) for ri, n in state.preimage("c", key)
                   if n in dense_c[ri]]
        avg = np.mean([dense_c[ri][n] for ri, n in members], axis=0)
        taus[key] = design_quantizer(JointPmf(grid, _sym_msg(avg)), state.nsym)

    for ri, u in enumerate(U):
        slot = state.slots[ri]
        for n in u:
            n = int(n)
            q = taus[int(slot.align_c.region_of[n])]
            slot.pv[n] = quantize_pmf(JointPmf(grid, dense_v[ri][n]), q).probs

    return _vn_step_params(state, rec_c, taus, aware=True)


def dde_cn_minsum(state: DesignState, U) -> StepParams:
    """Exact pushforward of the min-sum CN map (linear in the node degree)."""
    U = _norm_U(state, U)
    for ri, u in enumerate(U):
        slot = state.slots[ri]
        gi = slot.gi
        uset = set(map(int, u))
        for i in (np.unique(gi.loc_row[u]) if len(u) else []):
            locs = [int(m) for m in gi.row_locs(int(i))]
            surv = [_surv_from_msg(slot.pv[m], state.half) for m in locs]
            extr = _surv_extrinsic(surv)
            for k, m in enumerate(locs):
                if m in uset:
                    slot.pc[m] = _msg_from_surv(extr[k], state.half)
    return StepParams(kind="c_ms")


def design_cn_update_comp(state: DesignState, U) -> StepParams:
    """Computational-domain CN update: phi-domain sum with sign product,
    per-region VN reconstructions and CN quantizers (thresholds absorb the
    inverse phi transform)."""
    U = _norm_U(state, U)
    zmax = state.res.zmax

    ref_v: set[int] = set()
    for ri, u in enumerate(U):
        slot = state.slots[ri]
        for n in u:
            for m in slot.gi.row_locs(int(slot.gi.loc_row[n])):
                if m != n:
                    ref_v.add(int(slot.align_v.region_of[m]))
    rec_v = design_rec_v_phi(state, ref_v)

    touched: set[int] = set()
    for ri, u in enumerate(U):
        touched |= {int(state.slots[ri].align_c.region_of[n]) for n in u}

    dense_c: list[dict[int, np.ndarray]] = [dict() for _ in state.slots]
    for ri, u in enumerate(U):
        slot = state.slots[ri]
        gi = slot.gi
        if not len(u):
            continue
        need = set(map(int, u))
        rows = np.unique(gi.loc_row[u])
        for i in rows:
            locs = [int(m) for m in gi.row_locs(int(i))]
            inputs = [slot.pv[m] for m in locs]
            offs = []
            for m in locs:
                rec = rec_v[int(slot.align_v.region_of[m])]
                offs.append(rec[np.abs(state.msg_syms) - 1].astype(np.int64))
            want = [k for k, m in enumerate(locs) if m in need]
            outs = _phisum_row_outputs(state, inputs, offs, want)
            for k, dv in outs.items():
                dense_c[ri][locs[k]] = dv

    grid = np.arange(-zmax, zmax + 1)
    taus: dict[int, Quantizer] = {}
    for key in sorted(touched):
        members = [(ri, n) for ri, n in state.preimage("c", key)
                   if n in dense_c[ri]]
        avg = np.mean([dense_c[ri][n] for ri, n in members], axis=0)
        taus[key] = design_quantizer(JointPmf(grid, _sym_msg(avg)), state.nsym)

    for ri, u in enumerate(U):
        slot = state.slots[ri]
        for n in u:
            n = int(n)
            q = taus[int(slot.align_c.region_of[n])]
            slot.pc[n] = quantize_pmf(JointPmf(grid, dense_c[ri][n]), q).probs

    sp = StepParams(kind="c_comp")
    for key, rec in rec_v.items():
        sp.recs[key] = Reconstruction(values=rec.copy(), domain="phi")
    for key, q in taus.items():
        sp.taus[key] = _tau_cuts(q)
    return sp


def _tau_cuts(q: Quantizer) -> np.ndarray:
    """Integer cut magnitudes: the positive thresholds are cut - 1/2."""
    pos = q.positive_thresholds
    return np.round(pos + 0.5).astype(np.int32)


def _vn_step_params(state: DesignState, rec_c: dict[int, np.ndarray],
                    taus: dict[int, Quantizer], aware: bool) -> StepParams:
    sp = StepParams(kind="v", aware=aware)
    for key, rec in rec_c.items():
        sp.recs[key] = Reconstruction(values=rec.copy(), domain="llr")
    for key, q in taus.items():
        sp.taus[key] = _tau_cuts(q)
    return sp


# ---------------------------------------------------------------------------
# analysis helpers


def kl_quantization_loss(p: JointPmf, q: Quantizer) -> float:
    """MI loss I(X;V) - I(X;Q(V)), verified against the weighted KL sum."""
    loss = mutual_information(p) - mutual_information(quantize_pmf(p, q))
    bins = np.searchsorted(q.thresholds, p.values(), side="right")
    binj = np.zeros((2, len(q.levels)))
    np.add.at(binj[0], bins, p.probs[0])
    np.add.at(binj[1], bins, p.probs[1])
    klsum = 0.0
    for i in range(len(p.symbols)):
        pv = p.probs[:, i].sum()
        if pv <= _EPS:
            continue
        post = p.probs[:, i] / pv
        bj = binj[:, bins[i]]
        postb = bj / bj.sum()
        for x in (0, 1):
            if post[x] > _EPS:
                klsum += pv * post[x] * np.log2(post[x] / postb[x])
    if abs(loss - klsum) > 1e-9:
        raise AssertionError(f"MI loss {loss} != KL sum {klsum}")
    return float(loss)


def _mi_rows(state: DesignState, kind: str, U: list[np.ndarray]) -> list[tuple[int, float]]:
    """MI samples after one step: matrix-average (key -1) plus touched regions."""
    arrs = []
    which = "v" if kind == "v" else "c"
    for slot in state.slots:
        arrs.append(slot.pv if which == "v" else slot.pc)
    pooled = np.mean([a.mean(axis=0) for a in arrs], axis=0)
    rows = [(-1, mutual_information(JointPmf(state.msg_syms, pooled, kind="message")))]
    keys = set()
    for ri, u in enumerate(U):
        am = state.slots[ri].align_v if which == "v" else state.slots[ri].align_c
        keys |= {int(am.region_of[n]) for n in u}
    for key in sorted(keys):
        avg = state.avg_message_pmf(which, key)
        rows.append((key, mutual_information(
            JointPmf(state.msg_syms, avg, kind="message"))))
    return rows


# ---------------------------------------------------------------------------
# schedule-driving entry points


@dataclass
class DesignResult:
    params: DecoderParams
    mi_curve: MICurve
    overflow: bool = False
    traces: dict = field(default_factory=dict)   # step k -> per-rate (pv, pc)


def _dispatch_step(state: DesignState, kind: str, U) -> StepParams:
    if kind == "v":
        if state.cn_aware:
            return design_vn_update_cn_aware(state, U)
        return design_vn_update(state, U)
    if state.cn_kind == "comp":
        return design_cn_update_comp(state, U)
    return dde_cn_minsum(state, U)


def _assemble_params(state: DesignState, schedule: Schedule,
                     step_params: list[StepParams]) -> DecoderParams:
    return DecoderParams(
        signatures=[s.cfg.signature() for s in state.slots],
        rates=[s.cfg.r for s in state.slots],
        res=state.res,
        align_v=state.align_v_name,
        align_c=state.align_c_name,
        cn_kind=state.cn_kind,
        cn_aware=state.cn_aware,
        schedule_kind=schedule.kind,
        imax=schedule.imax,
        design_ebn0=list(state.design_ebn0),
        kappa_ch=state.kappa_ch,
        lch_max=state.lch_max,
        schedule_steps=[(s.kind, s.sel, s.check) for s in schedule.steps],
        layers=[tuple(g) for g in schedule.layers],
        layer_axis=schedule.layer_axis,
        tau_ch=state.tau_ch.thresholds.copy() if state.tau_ch else np.array([]),
        phi_ch=[s.phi_ch.copy() for s in state.slots],
        steps=step_params,
    )


def _run_design(state: DesignState, schedule: Schedule,
                trace_steps=()) -> DesignResult:
    mi = MICurve()
    step_params = []
    traces = {}
    for k, step in enumerate(schedule.steps):
        U = [schedule.resolve(step, slot.gi) for slot in state.slots]
        sp = _dispatch_step(state, step.kind, U)
        step_params.append(sp)
        iota = float(schedule.iota(k))
        for key, bits in _mi_rows(state, step.kind, U):
            mi.append(k, iota, key, bits)
        if k in trace_steps:
            traces[k] = [(slot.pv.copy(), slot.pc.copy())
                         for slot in state.slots]
    return DesignResult(_assemble_params(state, schedule, step_params), mi,
                        state.overflow, traces)


def design_decoder(cfg: CodeConfig, gi: GraphIndex, schedule: Schedule,
                   align_v: str, align_c: str, res: Resolutions,
                   design_ebn0: float, cn_kind: str = "minsum",
                   cn_aware: bool = False, kappa_ch: float | None = None,
                   lch_max: float | None = None,
                   trace_steps=()) -> DesignResult:
    """Design a fixed-schedule decoder for one code."""
    state = DesignState([(cfg, gi)], align_v, align_c, res, cn_kind, cn_aware)
    state.set_channel([design_ebn0], kappa_ch, lch_max)
    return _run_design(state, schedule, trace_steps)


def design_rate_compatible(builds: list[tuple[CodeConfig, GraphIndex]],
                           schedule_kind: str, imax: float,
                           align_v: str, align_c: str, res: Resolutions,
                           design_ebn0: list[float], cn_kind: str = "minsum",
                           cn_aware: bool = False, optimized: bool = False,
                           kappa_ch: float | None = None,
                           lch_max: float | None = None,
                           require_full_sweeps: bool = False) -> DesignResult:
    """Jointly design one parameter set for all rates in the set.

    The schedule template is built on the lowest-rate (largest) graph; higher
    rates deactivate absent locations. pmfs are tracked independently per
    rate while reconstructions and quantizers pool across the rate dimension
    inside each alignment region.
    """
    state = DesignState(builds, align_v, align_c, res, cn_kind, cn_aware)
    state.set_channel(list(design_ebn0) if len(builds) > 1 or
                      isinstance(design_ebn0, (list, tuple)) else [design_ebn0],
                      kappa_ch, lch_max)
    base_gi = state.slots[0].gi
    if optimized:
        return _run_design_optimized(state, schedule_kind, imax,
                                     require_full_sweeps)
    schedule = build_schedule(schedule_kind, base_gi, imax)
    return _run_design(state, schedule)


def design_decoder_optimized(cfg: CodeConfig, gi: GraphIndex,
                             schedule_kind: str, imax: float,
                             align_v: str, align_c: str, res: Resolutions,
                             design_ebn0: float, cn_kind: str = "minsum",
                             cn_aware: bool = False,
                             require_full_sweeps: bool = False,
                             kappa_ch: float | None = None,
                             lch_max: float | None = None) -> DesignResult:
    """Design a decoder with an optimized static layer order."""
    return design_rate_compatible(
        [(cfg, gi)], schedule_kind, imax, align_v, align_c, res,
        [design_ebn0], cn_kind, cn_aware, optimized=True,
        kappa_ch=kappa_ch, lch_max=lch_max,
        require_full_sweeps=require_full_sweeps)


def _lookahead_mi(state: DesignState, axis: str) -> list[np.ndarray]:
    """Fresh non-quantized output MI per location: VN outputs for the column
    axis, min-sum CN outputs for the row axis."""
    M = state.M
    grid = np.arange(-M, M + 1)
    out = []
    rec_c = design_rec_c(state, set(state._regions_c.keys()))
    for ri, slot in enumerate(state.slots):
        allloc = np.arange(slot.gi.nloc, dtype=np.int64)
        dv = _vn_dense_for(state, ri, allloc, rec_c)
        vals = np.zeros(slot.gi.nloc)
        if axis == "col":
            for n in range(slot.gi.nloc):
                vals[n] = mutual_information(JointPmf(grid, dv[n]))
        else:
            for i in range(slot.gi.M_b):
                locs = [int(m) for m in slot.gi.row_locs(i)]
                surv = [_surv_from_dense(dv[m], M) for m in locs]
                extr = _surv_extrinsic(surv)
                for k, m in enumerate(locs):
                    vals[m] = mutual_information(
                        JointPmf(grid, _dense_from_surv(extr[k], M)))
        out.append(vals)
    return out


def _run_design_optimized(state: DesignState, schedule_kind: str, imax: float,
                          require_full_sweeps: bool) -> DesignResult:
    """Static schedule construction choosing the layer with the highest mean
    lookahead MI gain at every step."""
    from .scheduling import ScheduleStep, init_schedule, resolve_target

    if schedule_kind not in ("row_layered", "column_layered"):
        raise ValueError("optimized schedules exist for layered kinds only")
    axis = "row" if schedule_kind == "row_layered" else "col"
    base_gi = state.slots[0].gi
    layers = (orthogonal_row_groups(base_gi) if axis == "row"
              else column_layer_groups(base_gi))
    sched = Schedule(kind=schedule_kind + "_opt", steps=[], layers=layers,
                     layer_axis=axis, imax=imax, provenance="optimized")

    mi = MICurve()
    step_params: list[StepParams] = []
    stored = [np.zeros(slot.gi.nloc) for slot in state.slots]
    mass = 0
    k = 0

    def run_step(kind: str, sel: tuple, check: bool = False):
        nonlocal mass, k
        step = ScheduleStep(kind, sel, check)
        U = [resolve_target(sel, sched, slot.gi) for slot in state.slots]
        sp = _dispatch_step(state, kind, U)
        sched.steps.append(step)
        step_params.append(sp)
        mass += len(U[0])
        iota = mass / (2.0 * base_gi.nloc)
        for key, bits in _mi_rows(state, kind, U):
            mi.append(k, iota, key, bits)
        k += 1
        return U

    for st in init_schedule(base_gi, for_column_layered=(axis == "col")):
        U = run_step(st.kind, st.sel, st.check)
        if st.kind == "c":
            for ri, u in enumerate(U):
                for n in u:
                    stored[ri][n] = mutual_information(
                        JointPmf(state.msg_syms, state.slots[ri].pc[n],
                                 kind="message"))

    layer_locs = [[np.where(np.isin(slot.gi.loc_row if axis == "row"
                                    else slot.gi.loc_col, group))[0]
                   for slot in state.slots] for group in layers]
    visited: set[int] = set()
    target = imax * 2 * base_gi.nloc
    while mass < target:
        fresh = _lookahead_mi(state, axis)
        gains = np.full(len(layers), -np.inf)
        for lid, per_rate in enumerate(layer_locs):
            tot, cnt = 0.0, 0
            for ri, locs in enumerate(per_rate):
                if len(locs):
                    tot += float((fresh[ri][locs] - stored[ri][locs]).sum())
                    cnt += len(locs)
            if cnt:
                gains[lid] = tot / cnt
        if require_full_sweeps:
            if len(visited) == len(layers):
                visited.clear()
            pool = [l for l in range(len(layers)) if l not in visited]
            lid = int(pool[int(np.argmax(gains[pool]))])
            visited.add(lid)
        else:
            lid = int(np.argmax(gains))
        first, second = ("v", "c") if axis == "row" else ("c", "v")
        run_step(first, ("layer", lid))
        run_step(second, ("layer", lid), check=True)
        for ri, locs in enumerate(layer_locs[lid]):
            stored[ri][locs] = fresh[ri][locs]
    sched.bind(base_gi)
    return DesignResult(_assemble_params(state, sched, step_params), mi,
                        state.overflow)
