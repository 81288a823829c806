"""Mutual-information bookkeeping and threshold-quantizer design for binary
relevant variables.

Joint pmfs p(x, t) pair a bit x in {0,1} with a symbol from a finite ordered
alphabet. Quantizers are symmetric threshold sets on the symbol-value axis,
designed by dynamic programming over contiguous bin boundaries in the folded
magnitude domain, which is optimal for binary X.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InfiniteLLR

_EPS = 1e-300


@dataclass
class JointPmf:
    """p(x, t) over x in {0,1} and an ordered symbol alphabet.

    ``symbols`` are integer grid points; the represented value of symbol s is
    ``s * scale`` (scale=1 for message and integer-LLR alphabets).
    """

    symbols: np.ndarray
    probs: np.ndarray          # shape (2, len(symbols))
    scale: float = 1.0
    kind: str = "llr"          # "message" | "llr" | "channel"

    def __post_init__(self):
        self.symbols = np.asarray(self.symbols)
        self.probs = np.asarray(self.probs, dtype=np.float64)
        if self.probs.shape != (2, len(self.symbols)):
            raise ValueError("probs must have shape (2, len(symbols))")

    def validate(self, tol: float = 1e-12) -> None:
        if (self.probs < 0).any():
            raise ValueError("negative probability")
        if abs(self.probs.sum() - 1.0) > tol:
            raise ValueError(f"pmf mass {self.probs.sum()} != 1")
        if np.any(np.diff(self.symbols) <= 0):
            raise ValueError("symbols must be strictly increasing")
        if self.kind == "message" and np.any(self.symbols == 0):
            raise ValueError("message alphabet must not contain 0")

    def values(self) -> np.ndarray:
        return self.symbols * self.scale

    def x_marginal(self) -> np.ndarray:
        return self.probs.sum(axis=1)

    def t_marginal(self) -> np.ndarray:
        return self.probs.sum(axis=0)

    def copy(self) -> "JointPmf":
        return JointPmf(self.symbols.copy(), self.probs.copy(), self.scale, self.kind)


def uniform_message_pmf(w: int) -> JointPmf:
    """Initial exchanged-message pmf: p(x, t) = (2|T|)^-1 on the w-bit alphabet."""
    syms = message_alphabet(w)
    n = len(syms)
    return JointPmf(syms, np.full((2, n), 1.0 / (2 * n)), kind="message")


def message_alphabet(w: int) -> np.ndarray:
    """Sign-magnitude alphabet {-2^(w-1), ..., -1, 1, ..., 2^(w-1)}."""
    h = 1 << (w - 1)
    return np.concatenate([np.arange(-h, 0), np.arange(1, h + 1)]).astype(np.int64)


def symmetrize(p: JointPmf) -> JointPmf:
    """p'(x, v) = (p(x, v) + p(1-x, -v)) / 2 on the sign-symmetric alphabet."""
    syms = np.union1d(p.symbols, -p.symbols)
    pos = np.searchsorted(syms, p.symbols)
    probs = np.zeros((2, len(syms)))
    probs[:, pos] = p.probs
    neg = np.searchsorted(syms, -syms)  # index of -v for each v
    out = 0.5 * (probs + probs[::-1, :][:, neg])
    return JointPmf(syms, out, p.scale, p.kind)


def average_pmfs(pmfs: list[JointPmf]) -> JointPmf:
    """Arithmetic mean of joint pmfs (equal weights, common alphabet)."""
    first = pmfs[0]
    if all(len(q.symbols) == len(first.symbols)
           and np.array_equal(q.symbols, first.symbols) for q in pmfs[1:]):
        acc = np.mean([q.probs for q in pmfs], axis=0)
        return JointPmf(first.symbols.copy(), acc, first.scale, first.kind)
    syms = first.symbols
    for q in pmfs[1:]:
        syms = np.union1d(syms, q.symbols)
    acc = np.zeros((2, len(syms)))
    for q in pmfs:
        acc[:, np.searchsorted(syms, q.symbols)] += q.probs
    return JointPmf(syms, acc / len(pmfs), first.scale, first.kind)


def mutual_information(p: JointPmf) -> float:
    """I(X;T) in bits, with 0*log0 = 0."""
    pj = p.probs
    px = pj.sum(axis=1, keepdims=True)
    pt = pj.sum(axis=0, keepdims=True)
    mask = pj > _EPS
    denom = px * pt
    ratio = np.where(mask, pj / np.where(mask, denom, 1.0), 1.0)
    return float(np.sum(pj[mask] * np.log2(ratio[mask])))


def llr(p: JointPmf, t, conditional: bool = False) -> float:
    """LLR of symbol t: log(p(0,t)/p(1,t)), or log(p(t|0)/p(t|1)) if conditional.

    Raises InfiniteLLR when exactly one side is zero; callers clip per their
    own rounding rule.
    """
    idx = int(np.searchsorted(p.symbols, t))
    if idx >= len(p.symbols) or p.symbols[idx] != t:
        raise ValueError(f"symbol {t} not in alphabet")
    p0, p1 = p.probs[0, idx], p.probs[1, idx]
    if conditional:
        px = p.x_marginal()
        p0 = p0 / px[0] if px[0] > _EPS else 0.0
        p1 = p1 / px[1] if px[1] > _EPS else 0.0
    if p0 <= _EPS and p1 <= _EPS:
        raise ValueError(f"symbol {t} has zero probability")
    if p0 <= _EPS or p1 <= _EPS:
        raise InfiniteLLR(f"one-sided mass at symbol {t}")
    return float(np.log(p0 / p1))


def llr_values(p: JointPmf, conditional: bool = False) -> np.ndarray:
    """Vector of LLRs over the alphabet; +/-inf where one conditional is 0."""
    pj = p.probs
    if conditional:
        px = p.x_marginal()
        num = pj[0] / px[0] if px[0] > _EPS else np.zeros_like(pj[0])
        den = pj[1] / px[1] if px[1] > _EPS else np.zeros_like(pj[1])
    else:
        num, den = pj[0], pj[1]
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.log(num) - np.log(den)
    out[(num <= _EPS) & (den <= _EPS)] = 0.0
    return out


@dataclass
class Quantizer:
    """Symmetric threshold quantizer.

    ``thresholds`` is the full ordered vector (tau_1..tau_{|T|-1}); an input
    v maps to levels[k] where tau_k <= v < tau_{k+1} (tau_0 = -inf). An input
    equal to a threshold maps upward, so v=0 maps to the smallest positive
    level.
    """

    thresholds: np.ndarray
    levels: np.ndarray
    degenerate: bool = False

    def __post_init__(self):
        self.thresholds = np.asarray(self.thresholds, dtype=np.float64)
        self.levels = np.asarray(self.levels, dtype=np.int64)

    @property
    def positive_thresholds(self) -> np.ndarray:
        """The 2^(w-1)-1 threshold magnitudes above the central zero."""
        n = len(self.thresholds)
        return self.thresholds[n // 2 + 1:]

    def apply(self, v):
        k = np.searchsorted(self.thresholds, v, side="right")
        return self.levels[k]


def apply_quantizer(q: Quantizer, v):
    return q.apply(v)


def quantize_pmf(p: JointPmf, q: Quantizer) -> JointPmf:
    """Pushforward of p through q onto the quantizer's output alphabet."""
    k = np.searchsorted(q.thresholds, p.values(), side="right")
    probs = np.zeros((2, len(q.levels)))
    np.add.at(probs[0], k, p.probs[0])
    np.add.at(probs[1], k, p.probs[1])
    return JointPmf(q.levels.copy(), probs, 1.0, "message")


def _pair_score(q0, q1):
    """MI contribution of a positive bin plus its mirror, times 1 (per bin).

    For a symmetric pmf the pair contributes 2*sum_x q_x log2(2 q_x/(q0+q1)).
    Returns the per-bin value g such that the pair contributes 2*g.
    """
    s = q0 + q1
    out = np.zeros_like(s)
    m = s > _EPS
    with np.errstate(divide="ignore", invalid="ignore"):
        t0 = np.where(q0 > _EPS, q0 * np.log2(np.where(m, 2 * q0 / np.where(m, s, 1), 1)), 0.0)
        t1 = np.where(q1 > _EPS, q1 * np.log2(np.where(m, 2 * q1 / np.where(m, s, 1), 1)), 0.0)
    return np.where(m, t0 + t1, 0.0)


def _bin_score(a0, a1):
    """MI contribution of a single bin with joint (a0, a1), P(x)=1/2."""
    s = a0 + a1
    if s <= _EPS:
        return 0.0
    out = 0.0
    if a0 > _EPS:
        out += a0 * np.log2(2 * a0 / s)
    if a1 > _EPS:
        out += a1 * np.log2(2 * a1 / s)
    return out


def design_quantizer(p: JointPmf, levels: int) -> Quantizer:
    """Design a symmetric |T|=levels threshold quantizer maximizing I(X;Q(V)).

    The input pmf is symmetrized first; zero-probability symbols are dropped
    from the search domain. Ties break toward thresholds closer to zero. When
    fewer distinct positive magnitudes than bins exist, the finest quantizer
    is returned with the ``degenerate`` flag set.
    """
    if levels % 2 != 0 or levels < 2:
        raise ValueError("levels must be even and >= 2")
    ps = symmetrize(p)
    nbins = levels // 2
    half = levels // 2
    out_levels = np.concatenate([np.arange(-half, 0), np.arange(1, half + 1)])

    vals = ps.values()
    mass = ps.t_marginal()
    pos = (vals > 0) & (mass > 1e-15)
    mags = vals[pos]
    q0 = ps.probs[0, pos]
    q1 = ps.probs[1, pos]
    zsel = vals == 0
    z0 = float(ps.probs[0, zsel].sum())
    z1 = float(ps.probs[1, zsel].sum())

    G = len(mags)
    step = abs(p.scale) or 1.0

    if G < nbins:
        # finest possible: a threshold below every magnitude, the rest above top
        thr = [0.0] + [m - step / 2 for m in mags]
        top = mags[-1] if G else 0.0
        for k in range(nbins - 1 - G):
            thr.append(top + (k + 0.5) * step)
        thr = np.asarray(thr, dtype=np.float64)
        full = np.concatenate([-thr[:0:-1], thr])
        return Quantizer(full, out_levels, degenerate=True)

    # cumulative sums over magnitude cells (ascending)
    C0 = np.concatenate([[0.0], np.cumsum(q0)])
    C1 = np.concatenate([[0.0], np.cumsum(q1)])

    def seg0(i, j):
        # first positive bin covering cells i..j-1 plus the zero cell (one-sided)
        a0 = z0 + C0[j] - C0[i]
        a1 = z1 + C1[j] - C1[i]
        b0 = C1[j] - C1[i]   # mirror bin holds swapped mass
        b1 = C0[j] - C0[i]
        return _bin_score(a0, a1) + _bin_score(b0, b1)

    # dp over remaining bins: best[b][g] = max score partitioning cells g..G
    # into b pair-scored bins; choice[b][g] = smallest optimal end cell
    NEG = -np.inf
    best = np.full((nbins, G + 1), NEG)
    choice = np.zeros((nbins, G + 1), dtype=np.int64)
    best[0][G] = 0.0
    for b in range(1, nbins):
        for g in range(G - b, -1, -1):
            # bin covers cells g..e-1, e from g+1 .. G-(b-1)
            es = np.arange(g + 1, G - (b - 1) + 1)
            sc = 2.0 * _pair_score(C0[es] - C0[g], C1[es] - C1[g]) + best[b - 1][es]
            k = int(np.argmax(sc))   # argmax returns first max: smallest e
            best[b][g] = sc[k]
            choice[b][g] = es[k]

    # choose the first-bin endpoint
    g1s = np.arange(1, G - (nbins - 1) + 1)
    totals = np.array([seg0(0, e) + best[nbins - 1][e] for e in g1s])
    k = int(np.argmax(totals))
    bounds = [int(g1s[k])]
    for b in range(nbins - 1, 0, -1):
        bounds.append(int(choice[b][bounds[-1]]))
    # canonical threshold: half a grid step below the first cell of the upper
    # bin, so mass-carrying symbols never sit exactly on a threshold
    pos_thr = [mags[e] - step / 2 for e in bounds[:-1]]
    thr = np.concatenate([[-m for m in pos_thr[::-1]], [0.0], pos_thr])
    return Quantizer(thr, out_levels, degenerate=False)


@dataclass
class MICurve:
    """Mutual-information trajectory samples along a design schedule."""

    steps: list = field(default_factory=list)   # (step k, iota, region, bits)

    def append(self, k: int, iota: float, region: int, bits: float) -> None:
        self.steps.append((k, iota, region, bits))

    def iotas(self) -> np.ndarray:
        return np.array([s[1] for s in self.steps])
