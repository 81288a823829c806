"""Parameter file round trips, schema guards, and file-content contracts."""

import numpy as np
import pytest

from ibldpc.code import build_code
from ibldpc.dde import design_decoder
from ibldpc.errors import SchemaMismatch
from ibldpc.paramio import (dumps_params, export_params, import_params,
                            loads_params, params_equal)
from ibldpc.params import Resolutions
from ibldpc.scheduling import build_schedule


@pytest.fixture(scope="module")
def designed_w2():
    cfg, gi = build_code(160, "1/4")
    sched = build_schedule("flooding", gi, 3)
    return design_decoder(cfg, gi, sched, "column", "row", Resolutions(w=2), 2.0)


def test_round_trip(designed_w2, tmp_path):
    path = tmp_path / "p.txt"
    export_params(designed_w2.params, str(path))
    p2 = import_params(str(path))
    assert params_equal(designed_w2.params, p2)
    assert dumps_params(p2) == path.read_text()


def test_tampered_checksum(designed_w2):
    txt = dumps_params(designed_w2.params)
    lines = txt.splitlines()
    # flip one integer somewhere in a tau record
    for i, line in enumerate(lines):
        if line.startswith("tau "):
            parts = line.split()
            parts[-1] = str(int(parts[-1]) + 1)
            lines[i] = " ".join(parts)
            break
    with pytest.raises(SchemaMismatch):
        loads_params("\n".join(lines))


def test_version_guard(designed_w2):
    txt = dumps_params(designed_w2.params)
    with pytest.raises(SchemaMismatch):
        loads_params(txt.replace("ibldpc-params v1", "ibldpc-params v9", 1))
    with pytest.raises(SchemaMismatch):
        loads_params("something else entirely\n")


def test_w2_table_shapes(designed_w2):
    """w=2 designs carry exactly 1 threshold magnitude and 2 reconstruction
    magnitudes per region per step."""
    txt = dumps_params(designed_w2.params)
    saw_tau = saw_rec = 0
    for line in txt.splitlines():
        if line.startswith("tau "):
            assert len(line.split()) == 3       # 'tau <key> <cut>'
            saw_tau += 1
        if line.startswith("rec "):
            assert len(line.split()) == 5       # 'rec <key> <domain> <v1> <v2>'
            saw_rec += 1
    assert saw_tau and saw_rec


def test_unknown_record():
    from ibldpc.paramio import FORMAT, VERSION
    import hashlib
    body = "bogus record\nend\n"
    digest = hashlib.sha256(body.encode()).hexdigest()
    with pytest.raises(SchemaMismatch):
        loads_params(f"{FORMAT} {VERSION}\nchecksum {digest}\n" + body)
