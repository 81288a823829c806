"""AWGN/BPSK channel simulation, Monte Carlo FER campaigns, design-SNR
search, and sweep orchestration.

Reproducibility: every frame draws its information bits and noise from a
counter-based Philox substream keyed by (seed, point index, frame index), so
results are invariant to the worker count. Early stopping scans completed
batches in index order, which keeps the stopping frame deterministic too.
"""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .code import CodeConfig, GraphIndex, build_code, encode
from .errors import NoConvergence
from .params import DecoderParams
from .runtime import bp_batch, build_plan, decode_batch, minsum_batch

BATCH_FRAMES = 400


def awgn_llr(codeword: np.ndarray, ebn0_db: float, r, seed: int,
             transmitted_mask: np.ndarray, filler_mask: np.ndarray,
             clip: float, frame: int = 0, point: int = 0) -> np.ndarray:
    """Channel LLRs for one codeword: BPSK over AWGN with llr = 2y/sigma^2
    (bit 0 maps to +1), punctured positions 0, filler positions at the clip
    value. Deterministic per (seed, point, frame)."""
    rng = frame_rng(seed, point, frame)
    return _channel(codeword[None, :], ebn0_db, float(r), rng,
                    transmitted_mask, filler_mask, clip)[0]


def frame_rng(seed: int, point: int, frame: int) -> np.random.Generator:
    bitgen = np.random.Philox(key=[seed & (2**64 - 1), point & (2**64 - 1)],
                              counter=[0, 0, 0, frame])
    return np.random.Generator(bitgen)


def _channel(bits: np.ndarray, ebn0_db: float, r: float,
             rng: np.random.Generator, tx_mask: np.ndarray,
             filler_mask: np.ndarray, clip: float) -> np.ndarray:
    sigma2 = 1.0 / (2.0 * r * 10.0 ** (ebn0_db / 10.0))
    y = (1.0 - 2.0 * bits.astype(np.float64)) \
        + rng.normal(0.0, np.sqrt(sigma2), bits.shape)
    llr = 2.0 * y / sigma2
    llr[..., ~tx_mask] = 0.0
    llr[..., filler_mask] = clip
    return llr


def es_n0_db(ebn0_db: float, r) -> float:
    """(Es/N0)dB = (Eb/N0)dB + 10 log10 r."""
    return float(ebn0_db + 10.0 * np.log10(float(r)))


@dataclass
class SimConfig:
    K: int
    r: Fraction
    decoder: str                  # "designed" | "bp" | "nms" | "oms"
    ebn0_grid: list
    params: DecoderParams | None = None
    imax: int = 30                # baselines only; designed imax lives in params
    baseline_param: float = 0.0   # NMS scale / OMS offset
    baseline_qbits: int | None = None
    baseline_qstep: float = 0.5
    baseline_schedule: str = "flooding"
    max_frames: int = 10_000_000
    min_errors: int = 100
    seed: int = 0
    workers: int = 1
    bg: int | None = None

    def __post_init__(self):
        self.r = self.r if isinstance(self.r, Fraction) else Fraction(self.r)
        if self.min_errors < 1:
            raise ValueError("min frame errors must be >= 1")
        if not self.ebn0_grid:
            raise ValueError("Eb/N0 grid must be non-empty")


@dataclass
class SimPoint:
    ebn0_db: float
    esn0_db: float
    frames: int
    frame_errors: int
    bit_errors: int
    fer: float
    ber: float
    avg_iter: float
    ci95: float


@dataclass
class SimResult:
    config: SimConfig
    points: list[SimPoint] = field(default_factory=list)


_CTX: dict = {}


def _build_ctx(sim: SimConfig) -> dict:
    cfg, gi = build_code(sim.K, sim.r, bg=sim.bg)
    ctx = {"sim": sim, "cfg": cfg, "gi": gi}
    if sim.decoder == "designed":
        if sim.params is None:
            raise ValueError("designed decoder needs params")
        ctx["plan"] = build_plan(sim.params, cfg, gi)
        ctx["clip"] = sim.params.lch_max
    else:
        ctx["clip"] = 40.0
    err_cols = np.zeros(cfg.n_full, dtype=bool)
    err_cols[:cfg.K] = True   # information bits
    parity_core = np.where(gi.d_v > 1)[0]
    for j in parity_core:
        if j >= cfg.kb:
            err_cols[j * cfg.Z:(j + 1) * cfg.Z] = True
    ctx["err_mask"] = err_cols
    return ctx


def _init_worker(sim: SimConfig):
    _CTX.clear()
    _CTX.update(_build_ctx(sim))


def _run_batch(args) -> tuple[int, int, int, int]:
    point_idx, ebn0, batch_idx, nframes = args
    sim: SimConfig = _CTX["sim"]
    cfg: CodeConfig = _CTX["cfg"]
    gi: GraphIndex = _CTX["gi"]
    base = batch_idx * BATCH_FRAMES
    u = np.zeros((nframes, cfg.K), dtype=np.uint8)
    llr = np.zeros((nframes, cfg.n_full))
    rngs = [frame_rng(sim.seed, point_idx, base + i) for i in range(nframes)]
    for i, rng in enumerate(rngs):
        u[i] = rng.integers(0, 2, cfg.K, dtype=np.uint8)
    bits = encode(u, cfg, gi)
    for i, rng in enumerate(rngs):
        llr[i] = _channel(bits[i][None, :], ebn0, float(cfg.r), rng,
                          cfg.transmitted_mask, cfg.filler_mask,
                          _CTX["clip"])[0]
    if sim.decoder == "designed":
        results = decode_batch(llr, _CTX["plan"])
    elif sim.decoder == "bp":
        results = bp_batch(llr, cfg, gi, sim.imax)
    else:
        results = minsum_batch(llr, cfg, gi, sim.decoder, sim.baseline_param,
                               sim.baseline_qbits, sim.imax,
                               sim.baseline_schedule, sim.baseline_qstep)
    err_mask = _CTX["err_mask"]
    ferr = berr = 0
    mass = 0
    for i, res in enumerate(results):
        wrong = res.bits != bits[i]
        ferr += bool(wrong[err_mask].any())
        berr += int(wrong[:cfg.K].sum())
        mass += res.mass
    return nframes, ferr, berr, mass


def _simulate_point(sim: SimConfig, point_idx: int, ebn0: float,
                    pool: ProcessPoolExecutor | None) -> SimPoint:
    nbatches = -(-sim.max_frames // BATCH_FRAMES)
    sizes = [min(BATCH_FRAMES, sim.max_frames - b * BATCH_FRAMES)
             for b in range(nbatches)]
    done: dict[int, tuple] = {}
    wave = max(1, sim.workers) * 2
    next_batch = 0
    frames = ferr = berr = mass = 0
    scanned = 0
    while scanned < nbatches:
        todo = list(range(next_batch, min(next_batch + wave, nbatches)))
        next_batch = todo[-1] + 1 if todo else next_batch
        jobs = [(point_idx, ebn0, b, sizes[b]) for b in todo]
        if pool is None:
            outs = [_run_batch(j) for j in jobs]
        else:
            outs = list(pool.map(_run_batch, jobs))
        for b, out in zip(todo, outs):
            done[b] = out
        while scanned in done:
            f, fe, be, ms = done.pop(scanned)
            frames += f
            ferr += fe
            berr += be
            mass += ms
            scanned += 1
            if ferr >= sim.min_errors:
                scanned = nbatches
                break
    gi = _CTX["gi"]
    fer = ferr / frames
    p = min(max(fer, 0.0), 1.0)
    ci = 1.96 * np.sqrt(p * (1 - p) / frames)
    return SimPoint(
        ebn0_db=ebn0, esn0_db=es_n0_db(ebn0, sim.r), frames=frames,
        frame_errors=ferr, bit_errors=berr, fer=fer,
        ber=berr / (frames * sim.K), avg_iter=mass / (2.0 * gi.nloc * frames),
        ci95=float(ci))


def run_fer(sim: SimConfig) -> SimResult:
    """Monte Carlo FER/BER over the Eb/N0 grid with early stopping at the
    frame-error target."""
    result = SimResult(sim)
    if sim.workers > 1:
        with ProcessPoolExecutor(max_workers=sim.workers,
                                 initializer=_init_worker,
                                 initargs=(sim,)) as pool:
            _init_worker(sim)
            for pi, ebn0 in enumerate(sim.ebn0_grid):
                result.points.append(_simulate_point(sim, pi, float(ebn0), pool))
    else:
        _init_worker(sim)
        for pi, ebn0 in enumerate(sim.ebn0_grid):
            result.points.append(_simulate_point(sim, pi, float(ebn0), None))
    return result


def search_design_snr(design_fn, pilot_fn, lo: float, hi: float,
                      coarse: float = 0.1) -> float:
    """Coarse-grid then local-refinement search for the design Eb/N0 with the
    lowest pilot FER. Ties break toward the lower SNR."""
    grid = [round(lo + k * coarse, 6) for k in
            range(int(round((hi - lo) / coarse)) + 1)]
    fers = [pilot_fn(design_fn(x), x) for x in grid]
    if all(f <= 0.0 for f in fers) or all(f >= 1.0 for f in fers):
        raise NoConvergence("pilot FER flat across the search bounds")
    best = int(np.argmin(fers))
    cands = {grid[best]: fers[best]}
    for x in (grid[best] - coarse / 2, grid[best] + coarse / 2):
        if lo <= x <= hi:
            cands[round(x, 6)] = pilot_fn(design_fn(x), x)
    xs = sorted(cands)
    fs = [cands[x] for x in xs]
    return float(xs[int(np.argmin(fs))])


def snr_at_fer(curve: list[SimPoint], target: float) -> float:
    """Interpolated Eb/N0 where the FER curve crosses the target (log-linear).

    Requires at least one point above and one at/below the target."""
    pts = sorted(curve, key=lambda p: p.ebn0_db)
    above = [p for p in pts if p.fer > target]
    below = [p for p in pts if 0 < p.fer <= target]
    zeros = [p for p in pts if p.fer == 0]
    if not above:
        raise NoConvergence("no point above the FER target")
    a = above[-1]
    if below:
        b = below[0]
        la, lb = np.log10(a.fer), np.log10(b.fer)
        t = (np.log10(target) - la) / (lb - la)
        return float(a.ebn0_db + t * (b.ebn0_db - a.ebn0_db))
    if zeros:
        return float(zeros[0].ebn0_db)
    raise NoConvergence("no point at or below the FER target")


# ---------------------------------------------------------------------------
# sweep orchestration


def config_hash(obj) -> str:
    def default(o):
        if isinstance(o, Fraction):
            return f"{o.numerator}/{o.denominator}"
        if isinstance(o, np.ndarray):
            return o.tolist()
        return str(o)
    blob = json.dumps(obj, sort_keys=True, default=default)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


SWEEP_COLUMNS = ["config", "rate", "w", "schedule", "alignment", "cn_aware",
                 "EbN0", "EsN0", "FER", "BER", "avg_iter", "frames", "ci95"]


def enumerate_jobs(spec: dict) -> list[dict]:
    """Cross product of the sweep axes; one job per decoder design."""
    jobs = []
    for r in spec.get("rates", ["1/3"]):
        for w in spec.get("w", [3]):
            for align in spec.get("alignments", ["column-row"]):
                for sched in spec.get("schedules", ["flooding"]):
                    for aware in spec.get("cn_aware", [False]):
                        jobs.append(dict(
                            K=spec.get("K", 1032), rate=r, w=int(w),
                            alignment=align, schedule=sched,
                            cn_aware=bool(aware),
                            cn_kind=spec.get("cn_kind", "minsum"),
                            design_ebn0=spec.get("design_ebn0"),
                            ebn0_grid=spec.get("ebn0_grid", []),
                            imax=spec.get("imax", 30),
                            seed=spec.get("seed", 0),
                            max_frames=spec.get("max_frames", 10_000_000),
                            min_errors=spec.get("min_errors", 100),
                            workers=spec.get("workers", 1),
                            bg=spec.get("bg")))
    return jobs


def run_sweep_job(job: dict) -> list[list]:
    """Design + simulate one sweep job; returns CSV rows."""
    from .dde import design_decoder, design_decoder_optimized
    from .params import Resolutions
    from .scheduling import build_schedule

    cfg, gi = build_code(job["K"], job["rate"], bg=job.get("bg"))
    av, ac = job["alignment"].split("-")
    res = Resolutions(w=job["w"])
    ebn0_design = job["design_ebn0"]
    if ebn0_design is None:
        raise ValueError("sweep jobs need design_ebn0")
    if job["schedule"].endswith("_opt"):
        dr = design_decoder_optimized(
            cfg, gi, job["schedule"][:-4], job["imax"], av, ac, res,
            float(ebn0_design), cn_kind=job["cn_kind"],
            cn_aware=job["cn_aware"])
    else:
        sched = build_schedule(job["schedule"], gi, job["imax"])
        dr = design_decoder(cfg, gi, sched, av, ac, res, float(ebn0_design),
                            cn_kind=job["cn_kind"], cn_aware=job["cn_aware"])
    sim = SimConfig(K=job["K"], r=Fraction(job["rate"]), decoder="designed",
                    ebn0_grid=list(job["ebn0_grid"]), params=dr.params,
                    max_frames=job["max_frames"],
                    min_errors=job["min_errors"], seed=job["seed"],
                    workers=job["workers"], bg=job.get("bg"))
    out = run_fer(sim)
    h = config_hash(job)
    rows = []
    for p in out.points:
        rows.append([h, job["rate"], job["w"], job["schedule"],
                     job["alignment"], job["cn_aware"],
                     repr(p.ebn0_db), repr(p.esn0_db), repr(p.fer),
                     repr(p.ber), repr(p.avg_iter), p.frames, repr(p.ci95)])
    return rows


def sweep(spec: dict) -> tuple[list[list], list[tuple[dict, str]]]:
    """Run all sweep jobs; per-job errors are isolated and reported."""
    rows, failures = [], []
    for job in enumerate_jobs(spec):
        try:
            rows.extend(run_sweep_job(job))
        except Exception as exc:   # noqa: BLE001 - job isolation is the point
            failures.append((job, f"{type(exc).__name__}: {exc}"))
    return rows, failures
