"""5G NR base-graph templates and lifting-size tables.

The shift coefficients are shipped as static data files (``data/bg1.txt``,
``data/bg2.txt``), one row per non-null entry: ``i j s0 ... s7`` where the
eight values are the shifts for the eight standard lifting sets.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from importlib import resources

import numpy as np

# Standard lifting sizes, one row per lifting-set index (51 sizes total).
LIFTING_SETS = (
    (2, 4, 8, 16, 32, 64, 128, 256),
    (3, 6, 12, 24, 48, 96, 192, 384),
    (5, 10, 20, 40, 80, 160, 320),
    (7, 14, 28, 56, 112, 224),
    (9, 18, 36, 72, 144, 288),
    (11, 22, 44, 88, 176, 352),
    (13, 26, 52, 104, 208),
    (15, 30, 60, 120, 240),
)

ALL_LIFTING_SIZES = tuple(sorted(z for s in LIFTING_SETS for z in s))
ZMAX = ALL_LIFTING_SIZES[-1]


@dataclass(frozen=True)
class BaseGraphTemplate:
    """Template base matrix: entry coordinates plus per-set shift values."""

    bg: int
    rows: int
    cols: int
    kb: int
    entry_row: np.ndarray   # (nentries,) int32, row-major order
    entry_col: np.ndarray   # (nentries,) int32
    shifts: np.ndarray      # (nentries, 8) int32

    @property
    def nentries(self) -> int:
        return len(self.entry_row)

    def shift_matrix(self, set_index: int, Z: int,
                     rows: int | None = None, cols: int | None = None) -> np.ndarray:
        """Dense (rows x cols) matrix of shifts mod Z; -1 marks null entries."""
        rows = self.rows if rows is None else rows
        cols = self.cols if cols is None else cols
        m = np.full((rows, cols), -1, dtype=np.int32)
        keep = (self.entry_row < rows) & (self.entry_col < cols)
        m[self.entry_row[keep], self.entry_col[keep]] = (
            self.shifts[keep, set_index] % Z)
        return m


def _parse_table(text: str) -> BaseGraphTemplate:
    header = None
    ent = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("bg="):
            header = dict(kv.split("=") for kv in line.split())
            continue
        parts = line.split()
        ent.append([int(x) for x in parts])
    if header is None:
        raise ValueError("missing header line in base-graph table")
    arr = np.asarray(ent, dtype=np.int32)
    tpl = BaseGraphTemplate(
        bg=int(header["bg"]),
        rows=int(header["rows"]),
        cols=int(header["cols"]),
        kb=int(header["kb"]),
        entry_row=arr[:, 0].copy(),
        entry_col=arr[:, 1].copy(),
        shifts=arr[:, 2:].copy(),
    )
    if tpl.shifts.shape[1] != int(header["sets"]):
        raise ValueError("set count mismatch in base-graph table")
    return tpl


@functools.lru_cache(maxsize=None)
def load_template(bg: int) -> BaseGraphTemplate:
    """Load base graph 1 or 2 from the packaged static data."""
    if bg not in (1, 2):
        raise ValueError(f"unknown base graph {bg}")
    text = resources.files("ibldpc.data").joinpath(f"bg{bg}.txt").read_text()
    tpl = _parse_table(text)
    expect = {1: (46, 68, 22, 316), 2: (42, 52, 10, 197)}[bg]
    if (tpl.rows, tpl.cols, tpl.kb, tpl.nentries) != expect:
        raise ValueError(f"base graph {bg} table has unexpected dimensions")
    return tpl


def lifting_set_index(Z: int) -> int:
    """Lifting-set index for a standard lifting size."""
    for idx, sizes in enumerate(LIFTING_SETS):
        if Z in sizes:
            return idx
    raise ValueError(f"{Z} is not a standard lifting size")


def min_lifting_size(K: int, kb: int) -> int:
    """Smallest standard Z with K <= kb * Z."""
    for z in ALL_LIFTING_SIZES:
        if kb * z >= K:
            return z
    raise ValueError(f"K={K} exceeds kb*Zmax={kb * ZMAX}")
