"""Alignment regions: partitions of the memory locations whose messages share
one reliability alphabet (one reconstruction/quantizer pair per region)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .code import GraphIndex

STRATEGIES = ("entry", "row", "column", "matrix2", "matrix")


@dataclass
class Alignment:
    """Region assignment alpha: location -> region key.

    Region keys are canonical across rate-specific graphs from one template:
    rows/columns keep their template index, entries use (i << 16) | j, and the
    matrix strategies use fixed small keys. This is what makes rate-pooled
    regions line up.
    """

    strategy: str
    region_of: np.ndarray   # (nloc,) int64 canonical region key per location

    @property
    def nregions(self) -> int:
        if self.strategy == "matrix2":
            return 2
        return len(np.unique(self.region_of))

    def regions(self) -> np.ndarray:
        return np.unique(self.region_of)

    def locs_in(self, key: int) -> np.ndarray:
        return np.where(self.region_of == key)[0]


def alignment_map(strategy: str, gi: GraphIndex) -> Alignment:
    if strategy == "entry":
        keys = (gi.loc_row.astype(np.int64) << 16) | gi.loc_col.astype(np.int64)
    elif strategy == "row":
        keys = gi.loc_row.astype(np.int64)
    elif strategy == "column":
        keys = gi.loc_col.astype(np.int64)
    elif strategy == "matrix":
        keys = np.zeros(gi.nloc, dtype=np.int64)
    elif strategy == "matrix2":
        # region 0: locations in rows without degree-one VN neighbors
        in_core = np.isin(gi.loc_row, gi.core_rows)
        keys = np.where(in_core, 0, 1).astype(np.int64)
    else:
        raise ValueError(f"unknown alignment strategy {strategy!r}; "
                         f"choose one of {STRATEGIES}")
    return Alignment(strategy, keys)
