"""Decoding schedules: flooding, row-layered (orthogonal-row merging),
column-layered (degree-1 merging), and the puncture-aware initialization
prefix used by all of them.

A schedule is an ordered tuple of VN/CN update steps over memory locations.
Steps carry symbolic target selectors so that the same schedule template can
be resolved against different rate-specific graphs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .code import GraphIndex

PUNCTURED_COLS = (0, 1)


@dataclass(frozen=True)
class ScheduleStep:
    kind: str        # "v" or "c"
    sel: tuple       # ("all",) | ("col", j) | ("rest12",) | ("layer", lid)
    check: bool = False   # runtime early-termination check after this step


@dataclass
class Schedule:
    kind: str                       # flooding | row_layered | column_layered
    steps: list[ScheduleStep]
    layers: list[tuple[int, ...]]   # row groups or column groups
    layer_axis: str                 # "row" | "col" | ""
    imax: float
    provenance: str = "standard"
    sizes: np.ndarray = field(default=None, repr=False)   # |U_k| per step
    nloc: int = 0

    def resolve(self, step: ScheduleStep, gi: GraphIndex) -> np.ndarray:
        return resolve_target(step.sel, self, gi)

    def bind(self, gi: GraphIndex) -> None:
        """Precompute per-step target sizes for iteration accounting."""
        self.nloc = gi.nloc
        self.sizes = np.array([len(self.resolve(s, gi)) for s in self.steps],
                              dtype=np.int64)

    def iota(self, k: int) -> Fraction:
        """Fractional i, exact: sum of |U_0..k| / (2 |N|)."""
        if self.sizes is None:
            raise ValueError("schedule not bound to a graph")
        return Fraction(int(self.sizes[:k + 1].sum()), 2 * self.nloc)

    def iota_array(self) -> np.ndarray:
        return np.cumsum(self.sizes) / (2.0 * self.nloc)

    def total_iota(self) -> Fraction:
        return self.iota(len(self.steps) - 1) if self.steps else Fraction(0)


def resolve_target(sel: tuple, sched: Schedule, gi: GraphIndex) -> np.ndarray:
    tag = sel[0]
    if tag == "all":
        return np.arange(gi.nloc, dtype=np.int32)
    if tag == "col":
        return gi.col_locs(sel[1]).astype(np.int32)
    if tag == "rest12":
        mask = ~np.isin(gi.loc_col, PUNCTURED_COLS)
        return np.where(mask)[0].astype(np.int32)
    if tag == "layer":
        group = sched.layers[sel[1]]
        if sched.layer_axis == "row":
            mask = np.isin(gi.loc_row, group)
        else:
            mask = np.isin(gi.loc_col, group)
        return np.where(mask)[0].astype(np.int32)
    raise ValueError(f"unknown target selector {sel!r}")


def iteration_count(schedule: Schedule, k: int) -> Fraction:
    return schedule.iota(k)


def orthogonal_row_groups(gi: GraphIndex) -> list[tuple[int, ...]]:
    """Greedy merge of consecutive rows that share no VN column."""
    groups: list[tuple[int, ...]] = []
    cur: list[int] = []
    cur_cols: set[int] = set()
    for i in range(gi.M_b):
        cols = set(gi.loc_col[gi.row_locs(i)].tolist())
        if cur and (cur_cols & cols):
            groups.append(tuple(cur))
            cur, cur_cols = [i], set(cols)
        else:
            cur.append(i)
            cur_cols |= cols
    if cur:
        groups.append(tuple(cur))
    return groups


def column_layer_groups(gi: GraphIndex) -> list[tuple[int, ...]]:
    """One layer per column of weight > 1, plus one merged degree-1 layer."""
    groups = [(j,) for j in range(gi.J) if gi.d_v[j] > 1]
    deg1 = tuple(j for j in range(gi.J) if gi.d_v[j] == 1)
    if deg1:
        groups.append(deg1)
    return groups


def init_schedule(gi: GraphIndex, for_column_layered: bool = False) -> list[ScheduleStep]:
    """Initialization prefix: column-1 VN+CN, column-2 VN+CN, and for
    column-layered schedules a VN step over all remaining locations."""
    steps = [
        ScheduleStep("v", ("col", 0)),
        ScheduleStep("c", ("col", 0)),
        ScheduleStep("v", ("col", 1)),
        ScheduleStep("c", ("col", 1)),
    ]
    if for_column_layered:
        steps.append(ScheduleStep("v", ("rest12",)))
    return steps


def build_schedule(kind: str, gi: GraphIndex, imax: float,
                   include_init: bool = True) -> Schedule:
    """Standard schedule of the given kind, terminated when iota reaches imax."""
    if kind == "flooding":
        layers: list[tuple[int, ...]] = []
        axis = ""
        body = [ScheduleStep("v", ("all",)), ScheduleStep("c", ("all",), check=True)]
        body_sizes = [gi.nloc, gi.nloc]
    elif kind == "row_layered":
        layers = orthogonal_row_groups(gi)
        axis = "row"
        body, body_sizes = [], []
        for lid, group in enumerate(layers):
            m = int(np.isin(gi.loc_row, group).sum())
            body += [ScheduleStep("v", ("layer", lid)),
                     ScheduleStep("c", ("layer", lid), check=True)]
            body_sizes += [m, m]
    elif kind == "column_layered":
        layers = column_layer_groups(gi)
        axis = "col"
        body, body_sizes = [], []
        for lid, group in enumerate(layers):
            m = int(np.isin(gi.loc_col, group).sum())
            body += [ScheduleStep("c", ("layer", lid)),
                     ScheduleStep("v", ("layer", lid), check=True)]
            body_sizes += [m, m]
    else:
        raise ValueError(f"unknown schedule kind {kind!r}")

    sched = Schedule(kind=kind, steps=[], layers=layers, layer_axis=axis,
                     imax=imax, provenance="initialization+body" if include_init
                     else "standard")
    steps: list[ScheduleStep] = []
    mass = 0
    if include_init:
        init = init_schedule(gi, for_column_layered=(kind == "column_layered"))
        for s in init:
            steps.append(s)
            mass += len(resolve_target(s.sel, sched, gi))
    target = imax * 2 * gi.nloc
    while mass < target:
        for s, m in zip(body, body_sizes):
            steps.append(s)
            mass += m
        if mass >= target and kind != "flooding":
            break
        if kind == "flooding" and mass >= target:
            break
    sched.steps = steps
    sched.bind(gi)
    return sched


def naive_priming_iterations(gi: GraphIndex) -> Fraction:
    """Update mass a naive flooding start spends before the punctured columns
    carry information, as a fraction of one iteration.

    Boolean information propagation: a VN output is informed iff its channel
    input is informed (non-punctured column) or any extrinsic CN input is; a
    CN output is informed iff all extrinsic VN inputs are.
    """
    punct = np.isin(gi.loc_col, PUNCTURED_COLS)
    v_inf = np.zeros(gi.nloc, dtype=bool)
    c_inf = np.zeros(gi.nloc, dtype=bool)
    mass = 0
    for _ in range(100):
        # VN step over all locations
        mass += gi.nloc
        new_v = np.array([
            (not punct[n]) or any(c_inf[m] for m in gi.col_locs(gi.loc_col[n])
                                  if m != n)
            for n in range(gi.nloc)])
        v_inf = new_v
        if v_inf[punct].all():
            return Fraction(mass, 2 * gi.nloc)
        # CN step over all locations
        mass += gi.nloc
        c_inf = np.array([
            all(v_inf[m] for m in gi.row_locs(gi.loc_row[n]) if m != n)
            for n in range(gi.nloc)])
    raise RuntimeError("information never reached the punctured columns")
