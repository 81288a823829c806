"""5G-NR LDPC code construction: base-graph selection, lifting, rate
matching, encoding, and the graph index structures used by the design and
runtime engines.

Memory locations are the non-null base-matrix entries, enumerated 0-based in
row-major order. After lifting by Z, location ``n`` holds Z messages; the
edge with check-node replica ``a`` connects variable-node replica
``(a + shift(n)) % Z``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

from . import basegraphs
from .errors import EncodingSingular, UnsupportedK, UnsupportedRate

BIT_PUNCTURED = 0
BIT_FILLER = 1
BIT_TRANSMITTED = 2


def as_rate(r) -> Fraction:
    """Coerce a rate given as Fraction, string 'a/b', int pair, or Fraction-safe value."""
    if isinstance(r, Fraction):
        return r
    if isinstance(r, str):
        return Fraction(r)
    if isinstance(r, tuple):
        return Fraction(*r)
    if isinstance(r, int):
        return Fraction(r)
    if isinstance(r, float):
        # floats are accepted only when they round-trip through a small fraction
        fr = Fraction(r).limit_denominator(4096)
        if abs(float(fr) - r) > 1e-12:
            raise ValueError(f"rate {r!r} is not a recognizable fraction; pass 'a/b'")
        return fr
    raise TypeError(f"cannot interpret {r!r} as a code rate")


def select_base_graph(K: int, r) -> int:
    """Base graph 2 iff K<=292, r<=0.25, or (r<=0.67 and K<=3824); else 1."""
    r = as_rate(r)
    if K < 1 or not (0 < r < 1):
        raise ValueError("need K >= 1 and 0 < r < 1")
    if K <= 292 or r <= Fraction(1, 4) or (r <= Fraction(67, 100) and K <= 3824):
        return 2
    return 1


@dataclass(frozen=True)
class CodeConfig:
    """Resolved parameters of one lifted, rate-matched 5G LDPC code."""

    bg: int
    K: int
    r: Fraction
    Z: int
    set_index: int
    kb: int
    N_t: int
    M_b: int
    J: int
    filler_count: int

    @property
    def n_full(self) -> int:
        return self.J * self.Z

    def signature(self) -> str:
        return f"bg{self.bg}:K{self.K}:r{self.r.numerator}/{self.r.denominator}:Z{self.Z}"

    @cached_property
    def bit_kind(self) -> np.ndarray:
        """Per code bit: BIT_PUNCTURED / BIT_FILLER / BIT_TRANSMITTED."""
        idx = np.arange(self.n_full)
        kind = np.full(self.n_full, BIT_TRANSMITTED, dtype=np.int8)
        tail_start = self.N_t + (self.kb + 2) * self.Z - self.K
        kind[(idx < 2 * self.Z) | (idx >= tail_start)] = BIT_PUNCTURED
        kind[(idx >= self.K) & (idx < self.kb * self.Z)] = BIT_FILLER
        return kind

    @cached_property
    def transmitted_mask(self) -> np.ndarray:
        return self.bit_kind == BIT_TRANSMITTED

    @cached_property
    def filler_mask(self) -> np.ndarray:
        return self.bit_kind == BIT_FILLER

    @cached_property
    def punctured_mask(self) -> np.ndarray:
        return self.bit_kind == BIT_PUNCTURED


class GraphIndex:
    """Index structures of the active (lifted) base matrix.

    Attributes are flat numpy arrays over memory locations; neighbor sets are
    CSR-style (ptr, idx) pairs sorted row-major / column-major.
    """

    def __init__(self, shift_matrix: np.ndarray, Z: int):
        sm = np.asarray(shift_matrix, dtype=np.int32)
        self.M_b, self.J = sm.shape
        self.Z = int(Z)
        rows, cols = np.nonzero(sm >= 0)
        order = np.lexsort((cols, rows))
        self.loc_row = rows[order].astype(np.int32)
        self.loc_col = cols[order].astype(np.int32)
        self.loc_shift = (sm[self.loc_row, self.loc_col] % self.Z).astype(np.int32)
        self.nloc = len(self.loc_row)

        self.row_ptr = np.zeros(self.M_b + 1, dtype=np.int32)
        np.add.at(self.row_ptr, self.loc_row + 1, 1)
        self.row_ptr = np.cumsum(self.row_ptr, dtype=np.int32)
        self.row_loc = np.argsort(self.loc_row, kind="stable").astype(np.int32)

        self.col_ptr = np.zeros(self.J + 1, dtype=np.int32)
        np.add.at(self.col_ptr, self.loc_col + 1, 1)
        self.col_ptr = np.cumsum(self.col_ptr, dtype=np.int32)
        self.col_loc = np.argsort(self.loc_col, kind="stable").astype(np.int32)

        self.d_v = np.diff(self.col_ptr).astype(np.int32)
        self.d_c = np.diff(self.row_ptr).astype(np.int32)
        self.shift_matrix = sm

    def col_locs(self, j: int) -> np.ndarray:
        return self.row_loc[0:0] if j >= self.J else \
            self.col_loc[self.col_ptr[j]:self.col_ptr[j + 1]]

    def row_locs(self, i: int) -> np.ndarray:
        return self.row_loc[self.row_ptr[i]:self.row_ptr[i + 1]]

    @cached_property
    def core_rows(self) -> np.ndarray:
        """Rows whose neighbor columns all have degree > 1."""
        bad_col = self.d_v == 1
        bad_row = np.zeros(self.M_b, dtype=bool)
        np.logical_or.at(bad_row, self.loc_row, bad_col[self.loc_col])
        return np.where(~bad_row)[0].astype(np.int32)

    def syndrome(self, bits: np.ndarray) -> np.ndarray:
        """H*b over GF(2); bits shape (..., J*Z) -> (..., M_b, Z)."""
        blocks = bits.reshape(bits.shape[:-1] + (self.J, self.Z))
        syn = np.zeros(bits.shape[:-1] + (self.M_b, self.Z), dtype=np.uint8)
        for n in range(self.nloc):
            contrib = np.roll(blocks[..., self.loc_col[n], :],
                              -int(self.loc_shift[n]), axis=-1)
            syn[..., self.loc_row[n], :] ^= contrib.astype(np.uint8)
        return syn

    def parity_ok(self, bits: np.ndarray, rows: np.ndarray | None = None) -> bool:
        syn = self.syndrome(bits)
        if rows is not None:
            syn = syn[..., rows, :]
        return not syn.any()


def core_check_set(gi: GraphIndex) -> np.ndarray:
    return gi.core_rows


def build_code(K: int, r, bg: int | None = None) -> tuple[CodeConfig, GraphIndex]:
    """Construct the active code for (K, r); ``bg`` overrides the standard
    base-graph selection (needed e.g. for rate sets pinned to one graph)."""
    r = as_rate(r)
    if bg is None:
        bg = select_base_graph(K, r)
    tpl = basegraphs.load_template(bg)
    kb = tpl.kb
    if K > kb * basegraphs.ZMAX:
        raise UnsupportedK(f"K={K} exceeds kb*Zmax={kb * basegraphs.ZMAX} on BG{bg}")
    Z = basegraphs.min_lifting_size(K, kb)
    set_index = basegraphs.lifting_set_index(Z)
    N_t = -((-K * r.denominator) // r.numerator)   # ceil(K / r)
    M_b = 2 + -((-(N_t - K)) // Z)                 # 2 + ceil((N_t-K)/Z)
    if M_b < 4:
        raise UnsupportedRate(f"rate {r} needs fewer than 4 parity rows")
    if M_b > tpl.rows:
        raise UnsupportedRate(f"rate {r} needs {M_b} rows; BG{bg} has {tpl.rows}")
    J = kb + M_b
    cfg = CodeConfig(bg=bg, K=K, r=r, Z=Z, set_index=set_index, kb=kb,
                     N_t=N_t, M_b=M_b, J=J, filler_count=kb * Z - K)
    sm = tpl.shift_matrix(set_index, Z, rows=M_b, cols=J)
    return cfg, GraphIndex(sm, Z)


def _shift_apply(v: np.ndarray, s: int) -> np.ndarray:
    """(P^s v)[a] = v[(a+s) % Z] along the last axis."""
    return np.roll(v, -s, axis=-1)


def _solve_core(eqs: list[dict[int, int]], lam: np.ndarray,
                unknowns: set[int]) -> dict[int, np.ndarray]:
    """Solve the 4-row core parity system by monomial peeling.

    ``eqs[i]`` maps parity-column index -> shift; ``lam[i]`` is the (F, Z)
    right-hand side of equation i. Works by finding an equation subset whose
    XOR isolates a single unknown with a single-monomial coefficient.
    """
    Z = lam.shape[-1]
    solved: dict[int, np.ndarray] = {}
    pending = {c: dict(eq) for c, eq in enumerate(eqs)}
    subsets = sorted(range(1, 2 ** len(eqs)), key=lambda s: (bin(s).count("1"), s))
    remaining = set(unknowns)
    while remaining:
        progress = False
        for mask in subsets:
            coeff: dict[int, set[int]] = {}
            for i in range(len(eqs)):
                if mask >> i & 1:
                    for c, s in pending[i].items():
                        coeff.setdefault(c, set()).symmetric_difference_update({s % Z})
            coeff = {c: s for c, s in coeff.items() if s}
            live = [c for c in coeff if c in remaining]
            if len(live) != 1 or len(coeff) != len(live):
                continue
            c = live[0]
            if len(coeff[c]) != 1:
                continue
            s_star = next(iter(coeff[c]))
            rhs = np.zeros_like(lam[0])
            for i in range(len(eqs)):
                if mask >> i & 1:
                    rhs ^= lam[i]
            solved[c] = np.roll(rhs, s_star, axis=-1)
            remaining.discard(c)
            for i in range(len(eqs)):
                if c in pending[i]:
                    lam[i] ^= _shift_apply(solved[c], pending[i].pop(c))
            progress = True
            break
        if not progress:
            raise EncodingSingular("core parity system has no monomial pivot")
    return solved


def encode(info: np.ndarray, cfg: CodeConfig, gi: GraphIndex) -> np.ndarray:
    """Encode information bits to full codewords (filler bits included, =0).

    ``info`` has shape (K,) or (F, K); the result has the matching leading
    shape with J*Z code bits.
    """
    info = np.asarray(info, dtype=np.uint8)
    single = info.ndim == 1
    u = info[None, :] if single else info
    if u.shape[1] != cfg.K:
        raise ValueError(f"expected {cfg.K} info bits, got {u.shape[1]}")
    F, Z, kb = u.shape[0], cfg.Z, cfg.kb
    blocks = np.zeros((F, cfg.J, Z), dtype=np.uint8)
    sysbits = np.zeros((F, kb * Z), dtype=np.uint8)
    sysbits[:, :cfg.K] = u
    blocks[:, :kb, :] = sysbits.reshape(F, kb, Z)

    sm = gi.shift_matrix
    core = range(4)
    core_par_cols = sorted({j for i in core for j in range(kb, cfg.J)
                            if sm[i, j] >= 0})
    if any(j >= kb + 4 for j in core_par_cols):
        raise EncodingSingular("core rows touch extension parity columns")

    lam = np.zeros((4, F, Z), dtype=np.uint8)
    eqs: list[dict[int, int]] = []
    for i in core:
        eq = {}
        for j in range(cfg.J):
            s = int(sm[i, j])
            if s < 0:
                continue
            if j >= kb:
                eq[j] = s
            else:
                lam[i] ^= _shift_apply(blocks[:, j, :], s)
        eqs.append(eq)
    solved = _solve_core(eqs, lam, set(core_par_cols))
    for j, v in solved.items():
        blocks[:, j, :] = v

    for i in range(4, cfg.M_b):
        acc = np.zeros((F, Z), dtype=np.uint8)
        unknown = None
        for j in range(cfg.J):
            s = int(sm[i, j])
            if s < 0:
                continue
            if j < kb + 4 or j in solved:
                acc ^= _shift_apply(blocks[:, j, :], s)
            elif unknown is None:
                unknown = (j, s)
            else:
                raise EncodingSingular(f"row {i} has multiple unsolved parities")
        if unknown is None:
            raise EncodingSingular(f"row {i} has no parity column")
        j, s = unknown
        blocks[:, j, :] = np.roll(acc, s, axis=-1)
        solved[j] = blocks[:, j, :]

    out = blocks.reshape(F, cfg.J * Z)
    return out[0] if single else out
