"""Versioned structured-text serialization of decoder parameters.

Layout: a header (format version, checksum, code signatures, resolutions,
alignment, schedule, channel quantizer) followed by per-step region tables of
reconstruction values and threshold cut magnitudes as integers. Floats are
written with repr() and round-trip bit-exactly; the checksum line carries a
SHA-256 over the body.
"""

from __future__ import annotations

import hashlib
from fractions import Fraction

import numpy as np

from .errors import SchemaMismatch
from .params import DecoderParams, Reconstruction, Resolutions, StepParams

FORMAT = "ibldpc-params"
VERSION = "v1"


def _sel_str(sel: tuple) -> str:
    return sel[0] if len(sel) == 1 else f"{sel[0]}:{sel[1]}"


def _sel_parse(s: str) -> tuple:
    if ":" in s:
        tag, arg = s.split(":")
        return (tag, int(arg))
    return (s,)


def _ints(a) -> str:
    return " ".join(str(int(x)) for x in np.asarray(a).ravel())


def dumps_params(p: DecoderParams) -> str:
    out = []
    out.append("rates " + " ".join(f"{r.numerator}/{r.denominator}"
                                   for r in p.rates))
    out.append("signatures " + " ".join(p.signatures))
    res = p.res
    out.append(f"resolutions w={res.w} wch={res.wch} wp={res.wp}"
               f" kappa_v={res.kappa_v!r}"
               f" kappa_c={'none' if res.kappa_c is None else repr(res.kappa_c)}"
               f" zeta_max={'none' if res.zeta_max is None else res.zeta_max}")
    out.append(f"alignment vn={p.align_v} cn={p.align_c}")
    out.append(f"cn kind={p.cn_kind} aware={int(p.cn_aware)}")
    out.append(f"schedule kind={p.schedule_kind} imax={float(p.imax)!r}"
               f" axis={p.layer_axis or 'none'}")
    out.append("design_ebn0 " + " ".join(repr(float(x)) for x in p.design_ebn0))
    out.append(f"channel kappa_ch={p.kappa_ch!r} lch_max={p.lch_max!r}")
    out.append("tau_ch " + " ".join(repr(float(x)) for x in p.tau_ch))
    out.append("layers " + ";".join(",".join(str(i) for i in g)
                                    for g in p.layers))
    for ri, tab in enumerate(p.phi_ch):
        tab = np.asarray(tab)
        for j in range(tab.shape[0]):
            out.append(f"phich {ri} {j} " + _ints(tab[j]))
    for k, ((kind, sel, check), sp) in enumerate(zip(p.schedule_steps, p.steps)):
        out.append(f"step {k} kind={kind} sel={_sel_str(sel)}"
                   f" check={int(bool(check))} spkind={sp.kind}"
                   f" aware={int(sp.aware)}")
        for key in sorted(sp.recs):
            rec = sp.recs[key]
            out.append(f"rec {key} {rec.domain} " + _ints(rec.values))
            if rec.neg_values is not None:
                out.append(f"recneg {key} " + _ints(rec.neg_values))
        for key in sorted(sp.taus):
            out.append(f"tau {key} " + _ints(sp.taus[key]))
    out.append("end")
    body = "\n".join(out) + "\n"
    digest = hashlib.sha256(body.encode()).hexdigest()
    return f"{FORMAT} {VERSION}\nchecksum {digest}\n" + body


def export_params(p: DecoderParams, path: str) -> None:
    with open(path, "w") as f:
        f.write(dumps_params(p))


def loads_params(text: str) -> DecoderParams:
    lines = text.splitlines()
    if not lines or not lines[0].startswith(FORMAT):
        raise SchemaMismatch("not an ibldpc parameter file")
    tag, ver = lines[0].split()
    if ver != VERSION:
        raise SchemaMismatch(f"unsupported version {ver}; this reader is {VERSION}")
    if not lines[1].startswith("checksum "):
        raise SchemaMismatch("missing checksum line")
    digest = lines[1].split()[1]
    body = "\n".join(lines[2:])
    if not body.endswith("\n"):
        body += "\n"
    if hashlib.sha256(body.encode()).hexdigest() != digest:
        raise SchemaMismatch("checksum mismatch (file corrupted or edited)")

    fields: dict = {"phi_ch": {}, "steps": [], "schedule_steps": []}
    cur_step: StepParams | None = None
    for line in body.splitlines():
        if not line.strip() or line == "end":
            continue
        parts = line.split()
        tag = parts[0]
        if tag == "rates":
            fields["rates"] = [Fraction(x) for x in parts[1:]]
        elif tag == "signatures":
            fields["signatures"] = parts[1:]
        elif tag == "resolutions":
            kv = dict(x.split("=") for x in parts[1:])
            fields["res"] = Resolutions(
                w=int(kv["w"]), wch=int(kv["wch"]), wp=int(kv["wp"]),
                kappa_v=float(kv["kappa_v"]),
                kappa_c=None if kv["kappa_c"] == "none" else float(kv["kappa_c"]),
                zeta_max=None if kv["zeta_max"] == "none" else int(kv["zeta_max"]))
        elif tag == "alignment":
            kv = dict(x.split("=") for x in parts[1:])
            fields["align_v"], fields["align_c"] = kv["vn"], kv["cn"]
        elif tag == "cn":
            kv = dict(x.split("=") for x in parts[1:])
            fields["cn_kind"] = kv["kind"]
            fields["cn_aware"] = bool(int(kv["aware"]))
        elif tag == "schedule":
            kv = dict(x.split("=") for x in parts[1:])
            fields["schedule_kind"] = kv["kind"]
            fields["imax"] = float(kv["imax"])
            fields["layer_axis"] = "" if kv["axis"] == "none" else kv["axis"]
        elif tag == "design_ebn0":
            fields["design_ebn0"] = [float(x) for x in parts[1:]]
        elif tag == "channel":
            kv = dict(x.split("=") for x in parts[1:])
            fields["kappa_ch"] = float(kv["kappa_ch"])
            fields["lch_max"] = float(kv["lch_max"])
        elif tag == "tau_ch":
            fields["tau_ch"] = np.array([float(x) for x in parts[1:]])
        elif tag == "layers":
            rest = line[len("layers "):].strip()
            fields["layers"] = [tuple(int(i) for i in g.split(","))
                                for g in rest.split(";")] if rest else []
        elif tag == "phich":
            ri, j = int(parts[1]), int(parts[2])
            fields["phi_ch"].setdefault(ri, {})[j] = \
                np.array([int(x) for x in parts[3:]], dtype=np.int32)
        elif tag == "step":
            kv = dict(x.split("=") for x in parts[2:])
            cur_step = StepParams(kind=kv["spkind"],
                                  aware=bool(int(kv["aware"])))
            fields["steps"].append(cur_step)
            fields["schedule_steps"].append(
                (kv["kind"], _sel_parse(kv["sel"]), bool(int(kv["check"]))))
        elif tag == "rec":
            key, domain = int(parts[1]), parts[2]
            vals = np.array([int(x) for x in parts[3:]], dtype=np.int32)
            cur_step.recs[key] = Reconstruction(values=vals, domain=domain)
        elif tag == "recneg":
            key = int(parts[1])
            cur_step.recs[key].neg_values = \
                np.array([int(x) for x in parts[2:]], dtype=np.int32)
        elif tag == "tau":
            cur_step.taus[int(parts[1])] = \
                np.array([int(x) for x in parts[2:]], dtype=np.int32)
        else:
            raise SchemaMismatch(f"unknown record {tag!r}")

    phi_ch = []
    for ri in sorted(fields["phi_ch"]):
        cols = fields["phi_ch"][ri]
        phi_ch.append(np.stack([cols[j] for j in sorted(cols)]))
    return DecoderParams(
        signatures=fields["signatures"], rates=fields["rates"],
        res=fields["res"], align_v=fields["align_v"],
        align_c=fields["align_c"], cn_kind=fields["cn_kind"],
        cn_aware=fields["cn_aware"], schedule_kind=fields["schedule_kind"],
        imax=fields["imax"], design_ebn0=fields["design_ebn0"],
        kappa_ch=fields["kappa_ch"], lch_max=fields["lch_max"],
        schedule_steps=fields["schedule_steps"], layers=fields["layers"],
        layer_axis=fields["layer_axis"], tau_ch=fields["tau_ch"],
        phi_ch=phi_ch, steps=fields["steps"])


def import_params(path: str) -> DecoderParams:
    with open(path) as f:
        return loads_params(f.read())


def params_equal(a: DecoderParams, b: DecoderParams) -> bool:
    """Deep bit-exact equality of two parameter sets."""
    if (a.signatures, a.rates, a.align_v, a.align_c, a.cn_kind, a.cn_aware,
        a.schedule_kind, a.layer_axis) != \
       (b.signatures, b.rates, b.align_v, b.align_c, b.cn_kind, b.cn_aware,
            b.schedule_kind, b.layer_axis):
        return False
    if a.res != b.res or a.imax != b.imax:
        return False
    if a.design_ebn0 != b.design_ebn0 or a.kappa_ch != b.kappa_ch \
            or a.lch_max != b.lch_max:
        return False
    if [tuple(g) for g in a.layers] != [tuple(g) for g in b.layers]:
        return False
    if [(k, tuple(s), bool(c)) for k, s, c in a.schedule_steps] != \
            [(k, tuple(s), bool(c)) for k, s, c in b.schedule_steps]:
        return False
    if not np.array_equal(a.tau_ch, b.tau_ch):
        return False
    if len(a.phi_ch) != len(b.phi_ch) or any(
            not np.array_equal(x, y) for x, y in zip(a.phi_ch, b.phi_ch)):
        return False
    if len(a.steps) != len(b.steps):
        return False
    for sa, sb in zip(a.steps, b.steps):
        if sa.kind != sb.kind or sa.aware != sb.aware:
            return False
        if sorted(sa.recs) != sorted(sb.recs) or sorted(sa.taus) != sorted(sb.taus):
            return False
        for key in sa.recs:
            ra, rb = sa.recs[key], sb.recs[key]
            if ra.domain != rb.domain or not np.array_equal(ra.values, rb.values):
                return False
            if (ra.neg_values is None) != (rb.neg_values is None):
                return False
            if ra.neg_values is not None and \
                    not np.array_equal(ra.neg_values, rb.neg_values):
                return False
        for key in sa.taus:
            if not np.array_equal(sa.taus[key], sb.taus[key]):
                return False
    return True
