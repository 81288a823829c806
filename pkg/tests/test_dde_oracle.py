"""Exhaustive-enumeration oracles for the density-evolution pushforwards.

All test pmfs are dyadic rationals with bit-marginals of exactly 1/2, so both
the engine and the brute-force oracle compute exact binary floating-point
values and results compare bit-identically.
"""

import numpy as np
import pytest

from ibldpc.code import GraphIndex
from ibldpc.dde import (DesignState, dde_cn_minsum, design_cn_update_comp,
                        design_vn_update, design_vn_update_cn_aware,
                        minsum_scalar)
from ibldpc.infoquant import JointPmf, Quantizer, message_alphabet, quantize_pmf
from ibldpc.params import Resolutions

W = 2
WCH = 2
RES = Resolutions(w=W, wch=WCH, wp=4, kappa_v=0.25)

TOY = np.array([
    [0, 0, 0, -1],
    [0, 0, -1, 0],
    [-1, 0, 0, 0],
])


def dyadic_pmf(rng, nsym, denom=256):
    """Joint (2, nsym) pmf of dyadic rationals with both bit-marginals 1/2."""
    out = np.zeros((2, nsym))
    for x in (0, 1):
        w = rng.integers(1, 16, size=nsym).astype(np.float64)
        scaled = np.floor(w / w.sum() * (denom // 2)).astype(np.int64)
        scaled[0] += denom // 2 - scaled.sum()
        out[x] = scaled / denom
    return out


def make_state(rng, cn_aware=False, cn_kind="minsum", align_c="entry"):
    gi = GraphIndex(TOY, Z=1)
    state = DesignState([(_FakeCfg(gi), gi)], "entry", align_c, RES,
                        cn_kind=cn_kind, cn_aware=cn_aware)
    pch = np.stack([dyadic_pmf(rng, 1 << WCH) for _ in range(gi.J)])
    state.set_channel_quantized([pch])
    for n in range(gi.nloc):
        state.slots[0].pv[n] = dyadic_pmf(rng, state.nsym)
        state.slots[0].pc[n] = dyadic_pmf(rng, state.nsym)
    return state, gi


class _FakeCfg:
    def __init__(self, gi):
        self.J = gi.J
        self.bg = 1
        self.r = 1

    def signature(self):
        return "toy"


def quantizer_from_cuts(cuts, w):
    pos = np.asarray(cuts, float) - 0.5
    thr = np.concatenate([-pos[::-1], [0.0], pos])
    return Quantizer(thr, message_alphabet(w))


def vn_dense_oracle(state, gi, n, rec_of):
    """Enumerate all (channel, extrinsic CN) symbol tuples for location n."""
    slot = state.slots[0]
    j = int(gi.loc_col[n])
    M = state.M
    ext = [int(m) for m in gi.col_locs(j) if m != n]
    dense = np.zeros((2, 2 * M + 1))
    syms = state.msg_syms
    nch = slot.pch_q.shape[2]

    def rec_apply(m, t_idx):
        tab = rec_of[int(slot.align_c.region_of[m])]
        t = syms[t_idx]
        return int(np.sign(t)) * int(tab[abs(t) - 1])

    for x in (0, 1):
        for tch in range(nch):
            p0 = slot.pch_q[j, x, tch]
            if p0 == 0:
                continue
            tuples = [(int(slot.phi_ch[j, tch]), p0)]
            for m in ext:
                cond = slot.pc[m][x] / 0.5
                nxt = []
                for s, p in tuples:
                    for ti in range(state.nsym):
                        if cond[ti] == 0:
                            continue
                        nxt.append((s + rec_apply(m, ti), p * cond[ti]))
                tuples = nxt
            for s, p in tuples:
                dense[x, np.clip(s, -M, M) + M] += p
    return dense


def test_vn_update_matches_enumeration():
    rng = np.random.default_rng(11)
    for trial in range(4):
        state, gi = make_state(rng)
        pv_before = state.slots[0].pv.copy()
        pc = state.slots[0].pc.copy()
        U = np.arange(gi.nloc)
        sp = design_vn_update(state, U)
        rec_of = {k: r.values for k, r in sp.recs.items()}
        grid = np.arange(-state.M, state.M + 1)
        for n in range(gi.nloc):
            dense = vn_dense_oracle(state, gi, n, rec_of)
            key = int(state.slots[0].align_v.region_of[n])
            q = quantizer_from_cuts(sp.taus[key], W)
            want = quantize_pmf(JointPmf(grid, dense), q).probs
            got = state.slots[0].pv[n]
            assert np.array_equal(want, got), (trial, n)
        assert np.array_equal(pc, state.slots[0].pc)


def test_cn_minsum_matches_enumeration():
    rng = np.random.default_rng(5)
    for trial in range(4):
        state, gi = make_state(rng)
        pv = state.slots[0].pv.copy()
        U = np.arange(gi.nloc)
        dde_cn_minsum(state, U)
        syms = state.msg_syms
        for n in range(gi.nloc):
            i = int(gi.loc_row[n])
            ext = [int(m) for m in gi.row_locs(i) if m != n]
            want = np.zeros((2, state.nsym))

            def rec(k, x, p, vals):
                if p == 0:
                    return
                if k == len(ext):
                    t = minsum_scalar(vals)
                    want[x, list(syms).index(t)] += p
                    return
                m = ext[k]
                for xt in (0, 1):
                    for ti in range(state.nsym):
                        rec(k + 1, x ^ xt, p * pv[m][xt, ti],
                            vals + [syms[ti]])
            rec(0, 0, 1.0, [])
            assert np.array_equal(want, state.slots[0].pc[n]), (trial, n)


def test_cn_comp_matches_enumeration():
    rng = np.random.default_rng(3)
    for trial in range(3):
        state, gi = make_state(rng, cn_kind="comp")
        pv = state.slots[0].pv.copy()
        U = np.arange(gi.nloc)
        sp = design_cn_update_comp(state, U)
        rec_of = {k: r.values for k, r in sp.recs.items()}
        syms = state.msg_syms
        zmax = state.res.zmax
        grid = np.arange(-zmax, zmax + 1)
        for n in range(gi.nloc):
            i = int(gi.loc_row[n])
            ext = [int(m) for m in gi.row_locs(i) if m != n]
            dense = np.zeros((2, 2 * zmax + 1))

            def rec(k, x, s, z, p):
                if p == 0:
                    return
                if k == len(ext):
                    v = s * (zmax - min(z, zmax - 1))
                    dense[x, v + zmax] += p
                    return
                m = ext[k]
                tab = rec_of[int(state.slots[0].align_v.region_of[m])]
                for xt in (0, 1):
                    for ti in range(state.nsym):
                        t = syms[ti]
                        rec(k + 1, x ^ xt, s * int(np.sign(t)),
                            z + int(tab[abs(t) - 1]), p * pv[m][xt, ti])
            rec(0, 0, 1, 0, 1.0)
            key = int(state.slots[0].align_c.region_of[n])
            q = quantizer_from_cuts(sp.taus[key], W)
            want = quantize_pmf(JointPmf(grid, dense), q).probs
            assert np.array_equal(want, state.slots[0].pc[n]), (trial, n)


def test_cn_aware_vn_matches_enumeration():
    rng = np.random.default_rng(17)
    state, gi = make_state(rng, cn_aware=True, align_c="row")
    pc = state.slots[0].pc.copy()
    U = np.arange(gi.nloc)
    sp = design_vn_update_cn_aware(state, U)
    rec_of = {k: r.values for k, r in sp.recs.items()}
    grid = np.arange(-state.M, state.M + 1)
    for n in range(gi.nloc):
        dense = vn_dense_oracle(state, gi, n, rec_of)
        key = int(state.slots[0].align_c.region_of[n])
        q = quantizer_from_cuts(sp.taus[key], W)
        want = quantize_pmf(JointPmf(grid, dense), q).probs
        assert np.array_equal(want, state.slots[0].pv[n]), n
    assert np.array_equal(pc, state.slots[0].pc)


def test_minsum_scalar():
    assert minsum_scalar([-3, 1, 2]) == -1
    assert minsum_scalar([4, 4]) == 4
    assert minsum_scalar([-2, -5]) == 2
    assert minsum_scalar([0, -7]) == 0


def test_cn_aware_quantize_before_or_after_min_commutes():
    """Quantizing the min-sum output equals taking sign/min of per-input
    quantized magnitudes (monotone maps commute with min); checked on
    zero-free alphabets."""
    rng = np.random.default_rng(2)
    q = quantizer_from_cuts([3, 5, 9], 3)
    syms = np.array([-12, -7, -4, -2, 2, 4, 7, 12])
    for _ in range(200):
        vals = rng.choice(syms, size=3)
        after = q.apply(minsum_scalar(vals))
        quant = q.apply(vals)
        before = minsum_scalar(quant)
        assert after == before
