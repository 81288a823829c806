"""Fixed-point runtime, float BP, baselines, and backend equivalence."""

import numpy as np
import pytest

import ibldpc.kernels as kernels
from ibldpc.code import GraphIndex, build_code, encode
from ibldpc.dde import design_decoder
from ibldpc.errors import ParamsMismatch
from ibldpc.params import Resolutions
from ibldpc.runtime import (bp_batch, build_plan, decode, decode_batch,
                            decode_bp_float, decode_minsum_baseline,
                            minsum_batch)
from ibldpc.scheduling import build_schedule
from ibldpc.sim import frame_rng


@pytest.fixture(scope="module")
def designed():
    cfg, gi = build_code(160, "1/4")
    sched = build_schedule("flooding", gi, 6)
    dr = design_decoder(cfg, gi, sched, "column", "row", Resolutions(w=3), 2.0)
    return cfg, gi, dr, build_plan(dr.params, cfg, gi)


def frames(cfg, gi, clip, n, ebn0, seed=0):
    rng = np.random.default_rng(seed)
    u = rng.integers(0, 2, (n, cfg.K)).astype(np.uint8)
    b = encode(u, cfg, gi)
    sigma2 = 1.0 / (2 * float(cfg.r) * 10 ** (ebn0 / 10))
    y = (1 - 2 * b.astype(float)) + rng.normal(0, np.sqrt(sigma2), b.shape)
    llr = 2 * y / sigma2
    llr[:, ~cfg.transmitted_mask] = 0.0
    llr[:, cfg.filler_mask] = clip
    return u, b, llr


def test_noiseless_allzero(designed):
    cfg, gi, dr, plan = designed
    llr = np.zeros(cfg.n_full)
    llr[cfg.transmitted_mask] = 25.0
    llr[cfg.filler_mask] = dr.params.lch_max
    r = decode(llr, plan)
    assert r.success and not r.bits.any()
    # terminated at the first possible check
    checks = [k for k, (kind, sel, c) in enumerate(dr.params.schedule_steps) if c]
    first_mass = sum(len(_resolve(plan, k)) for k in range(checks[0] + 1))
    assert r.mass == first_mass


def _resolve(plan, k):
    return plan.step_loc[plan.step_ptr[k]:plan.step_ptr[k + 1]]


def test_params_mismatch(designed):
    cfg, gi, dr, plan = designed
    other_cfg, other_gi = build_code(320, "1/4")
    with pytest.raises(ParamsMismatch):
        build_plan(dr.params, other_cfg, other_gi)


def test_backend_equivalence_designed(designed):
    cfg, gi, dr, plan = designed
    _, _, llr = frames(cfg, gi, dr.params.lch_max, 20, 2.0, seed=5)
    snap = np.array([4, 5], np.int32)
    prev = kernels.backend_name
    try:
        kernels.use("c")
        rc = decode_batch(llr, plan, snap_steps=snap)
        kernels.use("py")
        rp = decode_batch(llr, plan, snap_steps=snap)
    finally:
        kernels.use(prev)
    for a, b in zip(rc, rp):
        assert np.array_equal(a.bits, b.bits)
        assert (a.success, a.mass) == (b.success, b.mass)
        assert np.array_equal(a.snaps_v, b.snaps_v)
        assert np.array_equal(a.snaps_c, b.snaps_c)


def test_backend_equivalence_bp_and_minsum(designed):
    cfg, gi, dr, plan = designed
    _, _, llr = frames(cfg, gi, 30.0, 12, 1.5, seed=6)
    prev = kernels.backend_name
    try:
        kernels.use("c")
        a1 = bp_batch(llr, cfg, gi, 15)
        a2 = minsum_batch(llr, cfg, gi, "oms", 0.5, 4, 15, "row_layered", 0.4)
        kernels.use("py")
        b1 = bp_batch(llr, cfg, gi, 15)
        b2 = minsum_batch(llr, cfg, gi, "oms", 0.5, 4, 15, "row_layered", 0.4)
    finally:
        kernels.use(prev)
    for a, b in zip(a1 + a2, b1 + b2):
        assert np.array_equal(a.bits, b.bits) and a.mass == b.mass


def test_termination_soundness(designed):
    cfg, gi, dr, plan = designed
    _, _, llr = frames(cfg, gi, dr.params.lch_max, 60, 1.2, seed=7)
    for r in decode_batch(llr, plan):
        if r.success:
            assert gi.parity_ok(r.bits, rows=gi.core_rows)


def test_message_alphabet_bounds(designed):
    """Messages stay in the sign-magnitude alphabet even under adversarial
    max-magnitude inputs (saturation safety)."""
    cfg, gi, dr, plan = designed
    rng = np.random.default_rng(3)
    llr = rng.choice([-1e6, 1e6], size=cfg.n_full)[None, :]
    ns = len(dr.params.schedule_steps)
    snap = np.arange(ns, dtype=np.int32)
    r = decode_batch(llr, plan, early_term=False, snap_steps=snap)[0]
    half = 1 << (dr.params.res.w - 1)
    for arr in (r.snaps_v, r.snaps_c):
        assert arr.min() >= -half and arr.max() <= half
        assert not (arr == 0).any()


def test_channel_symmetry_mirroring(designed):
    """Decoding llr and -llr yields mirrored first-iteration VN messages on
    columns with channel information; zero-LLR inputs (punctured columns and
    exact-zero sums) quantize to +1 in both runs by the half-open rule."""
    cfg, gi, dr, plan = designed
    _, _, llr = frames(cfg, gi, dr.params.lch_max, 100, 2.0, seed=8)
    snap = np.array([4], np.int32)   # first body VN step
    ra = decode_batch(llr, plan, early_term=False, snap_steps=snap)
    rb = decode_batch(-llr, plan, early_term=False, snap_steps=snap)
    informed = ~np.isin(gi.loc_col, [0, 1])
    total = mismatch = 0
    for a, b in zip(ra, rb):
        av, bv = a.snaps_v[0][informed], b.snaps_v[0][informed]
        mismatch += int((av != -bv).sum())
        total += av.size
        # zero-LLR punctured columns: +1 in both runs, not mirrored
        assert (a.snaps_v[0][~informed] == 1).all()
        assert (b.snaps_v[0][~informed] == 1).all()
    assert mismatch / total < 0.02


def test_zero_llr_punctured_naive_start():
    """Without the init prefix, CNs touching punctured VNs emit the smallest
    magnitude messages in the first iteration."""
    cfg, gi = build_code(160, "1/4")
    sched = build_schedule("flooding", gi, 3, include_init=False)
    dr = design_decoder(cfg, gi, sched, "column", "row", Resolutions(w=3), 2.0)
    plan = build_plan(dr.params, cfg, gi)
    llr = np.zeros(cfg.n_full)
    llr[cfg.transmitted_mask] = 25.0
    r = decode_batch(llr[None, :], plan, early_term=False,
                     snap_steps=np.array([1], np.int32))[0]
    punct_rows = np.unique(gi.loc_row[np.isin(gi.loc_col, [0, 1])])
    tc = r.snaps_c[0]
    for n in range(gi.nloc):
        if gi.loc_row[n] in punct_rows and gi.loc_col[n] not in (0, 1):
            assert np.abs(tc[n]).max() == 1, n


def test_single_error_matches_bp_on_small_code():
    cfg, gi = build_code(120, "1/4")
    sched = build_schedule("flooding", gi, 10)
    dr = design_decoder(cfg, gi, sched, "column", "row", Resolutions(w=4), 3.0)
    plan = build_plan(dr.params, cfg, gi)
    rng = np.random.default_rng(1)
    agree = 0
    for t in range(30):
        u = rng.integers(0, 2, cfg.K).astype(np.uint8)
        b = encode(u, cfg, gi)
        llr = np.where(b == 1, -8.0, 8.0)
        llr[~cfg.transmitted_mask] = 0.0
        llr[cfg.filler_mask] = dr.params.lch_max
        flip = rng.choice(np.where(cfg.transmitted_mask)[0])
        llr[flip] = -llr[flip]
        rq = decode(llr, plan)
        rb = decode_bp_float(llr, cfg, gi, 10)
        assert rb.success and (rb.bits[:cfg.K] == u).all()
        agree += (rq.bits[:cfg.K] == rb.bits[:cfg.K]).all()
    assert agree >= 29


def test_bp_exact_marginals_on_tree():
    """On a cycle-free graph BP beliefs equal exact bitwise marginalization."""
    sm = np.full((2, 5), -1)
    sm[0, [0, 1, 2]] = 0
    sm[1, [2, 3, 4]] = 0
    gi = GraphIndex(sm, Z=1)
    rng = np.random.default_rng(0)
    for _ in range(25):
        llr = rng.normal(0, 2.0, 5)
        res = bp_batch(llr[None, :], None, gi, imax=6, early_term=False)[0]
        # exact marginals by enumeration over codewords of H
        best = np.zeros(5)
        p1 = np.zeros(5)
        ptot = 0.0
        for word in range(32):
            bits = np.array([(word >> i) & 1 for i in range(5)])
            if bits[[0, 1, 2]].sum() % 2 or bits[[2, 3, 4]].sum() % 2:
                continue
            w = np.exp(np.sum(np.where(bits == 0, llr / 2, -llr / 2)))
            ptot += w
            p1 += w * bits
        marg = p1 / ptot
        exact_bits = (marg > 0.5).astype(np.uint8)
        assert np.array_equal(res.bits, exact_bits)


def test_bp_corrects_single_flip():
    cfg, gi = build_code(100, "1/5")
    u = np.zeros(cfg.K, np.uint8)
    b = encode(u, cfg, gi)
    llr = np.where(b == 1, -9.0, 9.0)
    llr[~cfg.transmitted_mask] = 0.0
    llr[cfg.filler_mask] = 40.0
    flip = np.where(cfg.transmitted_mask)[0][7]
    llr[flip] = -llr[flip]
    r = decode_bp_float(llr, cfg, gi, 20)
    assert r.success and not r.bits[:cfg.K].any()


def test_minsum_parameter_identities():
    """NMS(1.0) and OMS(0.0) in float mode are both plain min-sum."""
    cfg, gi = build_code(160, "1/4")
    rng = np.random.default_rng(2)
    _, _, llr = frames(cfg, gi, 30.0, 10, 2.0, seed=9)
    a = minsum_batch(llr, cfg, gi, "nms", 1.0, None, 12)
    b = minsum_batch(llr, cfg, gi, "oms", 0.0, None, 12)
    for x, y in zip(a, b):
        assert np.array_equal(x.bits, y.bits)
        assert x.mass == y.mass


def test_minsum_equals_sumproduct_on_tree_magnitude_order():
    """On a tree with a single dominant observation, min-sum and plain BP
    agree on decisions."""
    sm = np.full((2, 5), -1)
    sm[0, [0, 1, 2]] = 0
    sm[1, [2, 3, 4]] = 0
    gi = GraphIndex(sm, Z=1)
    rng = np.random.default_rng(5)
    for _ in range(20):
        llr = rng.normal(0, 3.0, 5)
        llr[np.argmax(np.abs(llr))] *= 2
        a = minsum_batch(llr[None, :], None, gi, "oms", 0.0, None, 8,
                         early_term=False)[0]
        b = minsum_batch(llr[None, :], None, gi, "nms", 1.0, None, 8,
                         early_term=False)[0]
        assert np.array_equal(a.bits, b.bits)


def test_decode_result_iteration_bound(designed):
    cfg, gi, dr, plan = designed
    _, _, llr = frames(cfg, gi, dr.params.lch_max, 10, 1.0, seed=11)
    total = plan.step_ptr[-1] / (2.0 * gi.nloc)
    for r in decode_batch(llr, plan):
        assert r.iterations <= total + 1e-12
