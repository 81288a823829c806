"""Alignment region maps and their counts."""

import numpy as np

from ibldpc.alignment import alignment_map
from ibldpc.code import GraphIndex, build_code


def example_matrix_6x30():
    """6 rows x 30 columns with 102 entries; rows 0-1 avoid degree-1 columns."""
    sm = np.full((6, 30), -1)
    rng = np.random.default_rng(4)
    for j in range(24):                      # 24 columns of degree 4
        rows = rng.choice(6, size=4, replace=False)
        sm[rows, j] = 0
    for k, i in enumerate((2, 3, 4, 5)):     # degree-1 columns on rows 2..5
        sm[i, 24 + k] = 0
    sm[4, 28] = 0
    sm[5, 29] = 0
    # rows 0 and 1 must not touch any degree-1 column by construction
    return sm


def test_example_matrix_region_counts():
    sm = example_matrix_6x30()
    gi = GraphIndex(sm, Z=1)
    assert gi.nloc == 102 and gi.M_b == 6 and gi.J == 30
    assert alignment_map("entry", gi).nregions == 102
    assert alignment_map("row", gi).nregions == 6
    assert alignment_map("column", gi).nregions == 30
    assert alignment_map("matrix2", gi).nregions == 2
    assert alignment_map("matrix", gi).nregions == 1


def test_matrix_single_region():
    _, gi = build_code(1032, "1/3")
    am = alignment_map("matrix", gi)
    assert (am.region_of == 0).all()


def test_matrix2_region_rule_bg1():
    cfg, gi = build_code(8448, "1/3")
    am = alignment_map("matrix2", gi)
    # oracle: column-degree scan per row
    for n in range(gi.nloc):
        i = gi.loc_row[n]
        clean = all(gi.d_v[gi.loc_col[m]] > 1 for m in gi.row_locs(i))
        assert am.region_of[n] == (0 if clean else 1)


def test_partition_property():
    _, gi = build_code(1032, "1/3")
    for strat in ("entry", "row", "column", "matrix2", "matrix"):
        am = alignment_map(strat, gi)
        total = sum(len(am.locs_in(k)) for k in am.regions())
        assert total == gi.nloc


def test_region_keys_stable_across_rates():
    """Same base-matrix coordinates map to the same region key at every rate."""
    b1 = build_code(1056, "1/3", bg=1)
    b2 = build_code(1056, "2/3", bg=1)
    for strat in ("entry", "row", "column"):
        a1 = alignment_map(strat, b1[1])
        a2 = alignment_map(strat, b2[1])
        coord1 = {(int(r), int(c)): int(k) for r, c, k in
                  zip(b1[1].loc_row, b1[1].loc_col, a1.region_of)}
        for r, c, k in zip(b2[1].loc_row, b2[1].loc_col, a2.region_of):
            assert coord1[(int(r), int(c))] == int(k)
