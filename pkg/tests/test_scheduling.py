"""Schedules: initialization prefix, layer tables, iteration accounting."""

from fractions import Fraction

import numpy as np

from ibldpc.code import build_code
from ibldpc.scheduling import (build_schedule, init_schedule, iteration_count,
                               naive_priming_iterations,
                               orthogonal_row_groups, column_layer_groups)


def test_init_schedule_sizes():
    _, gi = build_code(8448, "1/3")
    steps = init_schedule(gi)
    sched = build_schedule("flooding", gi, 1)
    sizes = [len(sched.resolve(s, gi)) for s in steps]
    assert sizes[0] == gi.d_v[0] and sizes[1] == gi.d_v[0]
    assert sizes[2] == gi.d_v[1] and sizes[3] == gi.d_v[1]


def test_init_schedule_column_layered_rest():
    _, gi = build_code(8448, "1/3")
    steps = init_schedule(gi, for_column_layered=True)
    sched = build_schedule("column_layered", gi, 1)
    rest = sched.resolve(steps[4], gi)
    assert len(rest) == gi.nloc - gi.d_v[0] - gi.d_v[1]
    assert not np.isin(gi.loc_col[rest], [0, 1]).any()


def test_bg1_layer_counts():
    _, gi = build_code(8448, "1/3")
    assert len(orthogonal_row_groups(gi)) == 32
    assert len(column_layer_groups(gi)) == 27


def test_orthogonality_brute_force():
    _, gi = build_code(8448, "1/3")
    for group in orthogonal_row_groups(gi):
        for a in group:
            for b in group:
                if a >= b:
                    continue
                ca = set(gi.loc_col[gi.row_locs(a)].tolist())
                cb = set(gi.loc_col[gi.row_locs(b)].tolist())
                assert not (ca & cb), (a, b)


def test_rows_sharing_column_split():
    import numpy as np
    from ibldpc.code import GraphIndex
    sm = np.full((2, 6), -1)
    sm[0, [0, 5]] = 0
    sm[1, [1, 5]] = 0   # shares column 5 with row 0
    gi = GraphIndex(sm, Z=1)
    assert orthogonal_row_groups(gi) == [(0,), (1,)]


def test_layer_partition():
    for kind in ("row_layered", "column_layered"):
        _, gi = build_code(1032, "1/3")
        sched = build_schedule(kind, gi, 2)
        seen = np.zeros(gi.nloc, dtype=int)
        for lid in range(len(sched.layers)):
            locs = sched.resolve(sched.steps[0].__class__("v", ("layer", lid)),
                                 gi)
            seen[locs] += 1
        assert (seen == 1).all()


def test_iteration_accounting():
    _, gi = build_code(8448, "1/3")
    sched = build_schedule("flooding", gi, 3)
    # one full flooding iteration adds exactly 1.0
    k_init = 4
    pre = iteration_count(sched, k_init - 1)
    post = iteration_count(sched, k_init + 1)
    assert post - pre == 1
    # after a VN step over N, iota grows by 0.5
    assert iteration_count(sched, k_init) - pre == Fraction(1, 2)
    # initialization prefix mass: (2 d_v(1) + 2 d_v(2)) / (2 |N|)
    want = Fraction(2 * int(gi.d_v[0]) + 2 * int(gi.d_v[1]), 2 * gi.nloc)
    assert pre == want


def test_layer_step_increment():
    _, gi = build_code(1032, "1/3")
    sched = build_schedule("row_layered", gi, 2)
    k = 4   # first body step (layer 0 VN)
    m = len(sched.resolve(sched.steps[k], gi))
    assert iteration_count(sched, k) - iteration_count(sched, k - 1) \
        == Fraction(m, 2 * gi.nloc)


def test_equal_update_mass_across_kinds():
    _, gi = build_code(1032, "1/3")
    masses = {}
    for kind in ("flooding", "row_layered", "column_layered"):
        sched = build_schedule(kind, gi, 5, include_init=False)
        masses[kind] = int(sched.sizes.sum())
    target = 2 * gi.nloc * 5
    for kind, m in masses.items():
        assert abs(m - target) <= 2 * gi.nloc, (kind, m)


def test_naive_priming_and_init_savings():
    _, gi = build_code(8448, "1/3")
    prime = naive_priming_iterations(gi)
    assert prime == Fraction(3, 2)
    sched = build_schedule("flooding", gi, 30)
    init_mass = iteration_count(sched, 3)
    saved = float(prime - init_mass)
    # the skipped useless start amounts to about 1.5 iterations
    assert 1.2 <= saved <= 1.5
