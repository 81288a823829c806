"""Channel statistics, FER campaign mechanics, reproducibility, sweeps."""

from fractions import Fraction

import numpy as np
import pytest

from ibldpc.code import build_code, encode
from ibldpc.dde import design_decoder
from ibldpc.errors import NoConvergence
from ibldpc.params import Resolutions
from ibldpc.scheduling import build_schedule
from ibldpc.sim import (SimConfig, SimPoint, awgn_llr, enumerate_jobs,
                        es_n0_db, run_fer, search_design_snr, snr_at_fer)


@pytest.fixture(scope="module")
def toy_designed():
    cfg, gi = build_code(160, "1/4")
    sched = build_schedule("flooding", gi, 5)
    dr = design_decoder(cfg, gi, sched, "column", "row", Resolutions(w=3), 2.0)
    return cfg, gi, dr


def test_awgn_llr_signs_at_high_snr(toy_designed):
    cfg, gi, dr = toy_designed
    u = np.random.default_rng(0).integers(0, 2, cfg.K).astype(np.uint8)
    b = encode(u, cfg, gi)
    llr = awgn_llr(b, 30.0, cfg.r, seed=1, transmitted_mask=cfg.transmitted_mask,
                   filler_mask=cfg.filler_mask, clip=40.0)
    tx = cfg.transmitted_mask
    # bit 0 -> +1 -> positive LLR under the posterior convention
    assert (np.sign(llr[tx]) == 1 - 2 * b[tx].astype(int)).all()
    assert (llr[cfg.punctured_mask] == 0).all()
    assert (llr[cfg.filler_mask] == 40.0).all()


def test_awgn_llr_moments(toy_designed):
    cfg, gi, dr = toy_designed
    b = np.zeros(cfg.n_full, np.uint8)
    ebn0 = 2.0
    sigma2 = 1.0 / (2 * float(cfg.r) * 10 ** (ebn0 / 10))
    vals = []
    for f in range(300):
        llr = awgn_llr(b, ebn0, cfg.r, seed=7, frame=f,
                       transmitted_mask=cfg.transmitted_mask,
                       filler_mask=cfg.filler_mask, clip=40.0)
        vals.append(llr[cfg.transmitted_mask])
    vals = np.concatenate(vals)
    mean, se = vals.mean(), vals.std() / np.sqrt(len(vals))
    assert abs(mean - 2 / sigma2) < 3 * se


def test_esn0_conversion():
    assert abs(es_n0_db(3.0, Fraction(1, 2)) - (3.0 - 3.0102999566398116)) < 1e-9


def test_run_fer_noiseless(toy_designed):
    cfg, gi, dr = toy_designed
    sim = SimConfig(K=160, r=Fraction(1, 4), decoder="designed",
                    ebn0_grid=[30.0], params=dr.params, max_frames=200,
                    min_errors=1000, seed=0)
    p = run_fer(sim).points[0]
    assert p.fer == 0.0 and p.frames == 200
    # punctured-column bits need one extra iteration beyond the first check
    assert p.avg_iter <= 2.5


def test_run_fer_monotone_trend(toy_designed):
    cfg, gi, dr = toy_designed
    sim = SimConfig(K=160, r=Fraction(1, 4), decoder="designed",
                    ebn0_grid=[1.0, 2.5, 4.0], params=dr.params,
                    max_frames=600, min_errors=40, seed=2)
    pts = run_fer(sim).points
    fers = [p.fer + p.ci95 for p in pts]
    lowers = [p.fer - p.ci95 for p in pts]
    # allow one inversion within confidence bounds
    assert lowers[1] <= fers[0] and lowers[2] <= fers[1]
    assert pts[0].fer > pts[2].fer


def test_worker_invariance(toy_designed):
    cfg, gi, dr = toy_designed
    outs = []
    for workers in (1, 2):
        sim = SimConfig(K=160, r=Fraction(1, 4), decoder="designed",
                        ebn0_grid=[2.0], params=dr.params, max_frames=1200,
                        min_errors=30, seed=9, workers=workers)
        p = run_fer(sim).points[0]
        outs.append((p.frames, p.frame_errors, p.bit_errors, p.avg_iter))
    assert outs[0] == outs[1]


def test_ci95_matches_binomial(toy_designed):
    cfg, gi, dr = toy_designed
    sim = SimConfig(K=160, r=Fraction(1, 4), decoder="designed",
                    ebn0_grid=[1.5], params=dr.params, max_frames=400,
                    min_errors=20, seed=4)
    p = run_fer(sim).points[0]
    want = 1.96 * np.sqrt(p.fer * (1 - p.fer) / p.frames)
    assert abs(p.ci95 - want) < 1e-12


def test_error_rule_excludes_degree_one_parity():
    from ibldpc.sim import _build_ctx
    cfg, gi = build_code(160, "1/4")
    sim = SimConfig(K=160, r=Fraction(1, 4), decoder="bp", ebn0_grid=[1.0])
    mask = _build_ctx(sim)["err_mask"]
    assert mask[:cfg.K].all()
    for j in range(cfg.J):
        sl = mask[j * cfg.Z:(j + 1) * cfg.Z]
        if j < cfg.kb:
            continue
        if gi.d_v[j] == 1:
            assert not sl.any(), j     # extension parity: not counted
        else:
            assert sl.all(), j         # core parity bits: counted


def test_min_errors_validation():
    with pytest.raises(ValueError):
        SimConfig(K=160, r=Fraction(1, 4), decoder="bp", ebn0_grid=[1.0],
                  min_errors=0)
    with pytest.raises(ValueError):
        SimConfig(K=160, r=Fraction(1, 4), decoder="bp", ebn0_grid=[])


def test_snr_at_fer_interpolation():
    def pt(e, f):
        return SimPoint(e, e, 1000, int(f * 1000), 0, f, 0.0, 1.0, 0.0)
    curve = [pt(1.0, 0.4), pt(2.0, 0.04), pt(3.0, 0.004)]
    s = snr_at_fer(curve, 0.01)
    assert 2.0 < s < 3.0
    with pytest.raises(NoConvergence):
        snr_at_fer([pt(1.0, 0.5), pt(2.0, 0.2)], 0.01)


def test_search_design_snr():
    table = {round(x, 2): f for x, f in
             [(0.0, 0.5), (0.1, 0.3), (0.2, 0.1), (0.3, 0.15), (0.4, 0.4)]}

    def design_fn(x):
        return x

    def pilot_fn(_, x):
        return table.get(round(x, 2), min(table.values()) + 0.01)

    best = search_design_snr(design_fn, pilot_fn, 0.0, 0.4)
    assert abs(best - 0.2) < 0.051
    with pytest.raises(NoConvergence):
        search_design_snr(design_fn, lambda a, b: 1.0, 0.0, 0.4)


def test_enumerate_jobs_product_count():
    spec = {"alignments": ["entry-entry", "column-row", "row-row",
                           "matrix2-matrix2", "matrix-matrix"],
            "w": [2, 3, 4]}
    assert len(enumerate_jobs(spec)) == 15


def test_sweep_empty_and_failures(tmp_path):
    from ibldpc.sim import sweep
    rows, failures = sweep({"rates": [], "w": []})
    assert rows == [] and failures == []
    # a malformed job is isolated and reported
    rows, failures = sweep({"rates": ["1/4"], "w": [3], "K": 160,
                            "alignments": ["bogus-alignment"],
                            "design_ebn0": 2.0, "ebn0_grid": [2.0],
                            "max_frames": 10, "min_errors": 1})
    assert rows == [] and len(failures) == 1
