"""Designed decoder parameters: per-step reconstruction tables and quantizer
thresholds, per alignment region, plus the channel quantizer."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Resolutions:
    """Bit widths and grid scalers of a design.

    w: exchanged-message bits; wch: channel-message bits; wp: internal adder
    bits (integer LLRs clip to +/-(2^(wp-1)-1)); kappa_v: LLR grid step;
    kappa_c: phi-domain grid step (default: kappa_v mapped through phi);
    zeta_max: phi-domain clip, 2^wp - 1.
    """

    w: int
    wch: int = 4
    wp: int = 7
    kappa_v: float = 0.25
    kappa_c: float | None = None
    zeta_max: int | None = None

    @property
    def clip(self) -> int:
        return (1 << (self.wp - 1)) - 1

    @property
    def zmax(self) -> int:
        return self.zeta_max if self.zeta_max is not None else (1 << self.wp) - 1

    @property
    def kc(self) -> float:
        if self.kappa_c is not None:
            return self.kappa_c
        phi_kv = -np.log(np.tanh(self.kappa_v / 2.0))
        return float(phi_kv / (self.zmax - 1))


@dataclass
class Reconstruction:
    """Magnitude-indexed integer reconstruction table.

    ``values[t-1]`` is the level for magnitude symbol t; negative symbols use
    the odd extension unless an explicit negative side is given (channel
    tables with filler bits are not sign-symmetric).
    """

    values: np.ndarray               # (half,) int32, for symbols +1..+half
    domain: str = "llr"              # "llr" or "phi"
    neg_values: np.ndarray | None = None   # for symbols -half..-1, ascending

    def apply(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t)
        out = np.where(t > 0, 0, 0)
        pos = self.values[np.clip(np.abs(t) - 1, 0, len(self.values) - 1)]
        if self.neg_values is None:
            return np.where(t > 0, pos, -pos)
        half = len(self.values)
        neg = self.neg_values[np.clip(t + half, 0, half - 1)]
        return np.where(t > 0, pos, neg)


@dataclass
class StepParams:
    """Design output of one schedule step."""

    kind: str                         # "v" | "c_comp" | "c_ms"
    aware: bool = False               # VN step quantizers keyed by alpha_c
    recs: dict = field(default_factory=dict)   # region key -> Reconstruction
    taus: dict = field(default_factory=dict)   # region key -> int cut magnitudes


@dataclass
class DecoderParams:
    """Everything the fixed-point runtime needs to execute a designed decoder."""

    signatures: list                  # per-rate code signatures
    rates: list                       # per-rate Fraction
    res: Resolutions
    align_v: str
    align_c: str
    cn_kind: str                      # "comp" | "minsum"
    cn_aware: bool
    schedule_kind: str
    imax: float
    design_ebn0: list                 # per-rate dB
    kappa_ch: float
    lch_max: float
    schedule_steps: list              # (kind, sel, check) triples
    layers: list                      # layer table (row or column groups)
    layer_axis: str
    tau_ch: np.ndarray                # channel quantizer thresholds (full, float)
    phi_ch: list                      # per rate: (J, 2^wch) int32 signed tables
    steps: list                       # list[StepParams], aligned with schedule_steps

    def rate_index(self, signature: str) -> int:
        for i, s in enumerate(self.signatures):
            if s == signature:
                return i
        return -1
