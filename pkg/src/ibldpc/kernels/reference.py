"""Pure-numpy decode kernels; semantics-defining reference for the compiled
backend. Per-frame loops vectorize over the Z lifting lanes."""

from __future__ import annotations

import numpy as np


def _quant(v: np.ndarray, cuts: np.ndarray) -> np.ndarray:
    """Symmetric threshold quantizer on integers: |v| >= cut moves outward,
    v = 0 maps to +1."""
    mag = 1 + (np.abs(v)[:, None] >= cuts[None, :]).sum(axis=1)
    return np.where(v >= 0, mag, -mag).astype(np.int8)


def _rec_signed(rec_row: np.ndarray, t: np.ndarray) -> np.ndarray:
    r = rec_row[np.abs(t.astype(np.int32)) - 1]
    return np.where(t > 0, r, -r)


def _hard_decision(plan, tch, tc, cur_rec, cols) -> np.ndarray:
    """APP hard decision per column: channel term plus all reconstructed CN
    messages; positive APP decides bit 0."""
    Z = plan.Z
    bhat = np.zeros((plan.J, Z), dtype=np.uint8)
    for j in cols:
        app = plan.phi_ch[j][tch[j]].astype(np.int64)
        for m in plan.col_loc[plan.col_ptr[j]:plan.col_ptr[j + 1]]:
            app = app + _rec_signed(cur_rec[plan.rc_of[m]], tc[m])
        bhat[j] = app < 0
    return bhat


def _core_ok(plan, bhat) -> bool:
    for i in plan.core_rows:
        syn = np.zeros(plan.Z, dtype=np.uint8)
        for m in plan.row_loc[plan.row_ptr[i]:plan.row_ptr[i + 1]]:
            syn ^= bhat[plan.loc_col[m]][plan.gather_idx[m]]
        if syn.any():
            return False
    return True


def _ensure_gather(plan):
    if not hasattr(plan, "gather_idx"):
        plan.gather_idx = (np.arange(plan.Z)[None, :] +
                           plan.loc_shift[:, None].astype(np.int64)) % plan.Z
    if not hasattr(plan, "step_tau_map"):
        maps = []
        for k in range(len(plan.step_kind)):
            lo, hi = plan.step_ptr[k], plan.step_ptr[k + 1]
            maps.append({int(plan.step_loc[i]): int(plan.step_tau_idx[i])
                         for i in range(lo, hi)})
        plan.step_tau_map = maps


def _decode_one(plan, tch, early_term, snap_steps):
    Z = plan.Z
    tv = np.ones((plan.nloc, Z), dtype=np.int8)
    tc = np.ones((plan.nloc, Z), dtype=np.int8)
    cur_rec = np.zeros((plan.ncreg, plan.half), dtype=np.int32)
    mass = 0
    done = False
    snaps_v = np.zeros((len(snap_steps), plan.nloc, Z), dtype=np.int8)
    snaps_c = np.zeros_like(snaps_v)
    snap_pos = {int(s): i for i, s in enumerate(snap_steps)}

    for k in range(len(plan.step_kind)):
        lo, hi = plan.step_ptr[k], plan.step_ptr[k + 1]
        U = plan.step_loc[lo:hi]
        kind = plan.step_kind[k]
        if kind == 0:
            rec = plan.rec_flat[k]
            for rid in plan.rec_upd_ids[plan.rec_upd_ptr[k]:plan.rec_upd_ptr[k + 1]]:
                cur_rec[rid] = rec[rid]
            for i in range(lo, hi):
                n = int(plan.step_loc[i])
                j = int(plan.loc_col[n])
                s = plan.phi_ch[j][tch[j]].astype(np.int64)
                for m in plan.col_loc[plan.col_ptr[j]:plan.col_ptr[j + 1]]:
                    if m != n:
                        s = s + _rec_signed(rec[plan.rc_of[m]], tc[m])
                s = np.clip(s, -plan.M, plan.M)
                tv[n] = _quant(s, plan.tau_flat[plan.step_tau_idx[i]])
        elif kind == 2:
            uset = set(map(int, U))
            for i in np.unique(plan.loc_row[U]) if len(U) else []:
                locs = plan.row_loc[plan.row_ptr[i]:plan.row_ptr[i + 1]]
                vals = np.stack([tv[m][plan.gather_idx[m]] for m in locs])
                mags = np.abs(vals.astype(np.int32))
                sgn = np.where(vals > 0, 1, -1).astype(np.int32)
                total_sgn = sgn.prod(axis=0)
                order = np.argsort(mags, axis=0, kind="stable")
                min1 = np.take_along_axis(mags, order[:1], axis=0)[0]
                if len(locs) > 1:
                    min2 = np.take_along_axis(mags, order[1:2], axis=0)[0]
                else:
                    min1 = np.full(plan.Z, plan.half, np.int32)
                    min2 = min1
                amin = order[0]
                for mi, m in enumerate(locs):
                    if int(m) not in uset:
                        continue
                    mag = np.where(amin == mi, min2, min1)
                    out = (total_sgn * sgn[mi]) * mag
                    tc[m][plan.gather_idx[m]] = out.astype(np.int8)
        else:
            crec = plan.crec_flat[k]
            uset = {int(plan.step_loc[i]): int(plan.step_tau_idx[i])
                    for i in range(lo, hi)}
            for i in np.unique(plan.loc_row[U]) if len(U) else []:
                locs = plan.row_loc[plan.row_ptr[i]:plan.row_ptr[i + 1]]
                vals = np.stack([tv[m][plan.gather_idx[m]] for m in locs])
                sgn = np.where(vals > 0, 1, -1).astype(np.int32)
                total_sgn = sgn.prod(axis=0)
                pm = np.stack([crec[plan.rv_of[m]][np.abs(vals[mi].astype(np.int32)) - 1]
                               for mi, m in enumerate(locs)]).astype(np.int64)
                total = pm.sum(axis=0)
                for mi, m in enumerate(locs):
                    if int(m) not in uset:
                        continue
                    extr = np.minimum(total - pm[mi], plan.zmax - 1)
                    v = (total_sgn * sgn[mi]) * (plan.zmax - extr)
                    tc[m][plan.gather_idx[m]] = _quant(v, plan.tau_flat[uset[int(m)]])
        mass += hi - lo
        if k in snap_pos:
            snaps_v[snap_pos[k]] = tv
            snaps_c[snap_pos[k]] = tc
        if plan.step_check[k] and early_term and not done:
            bhat = _hard_decision(plan, tch, tc, cur_rec, plan.hd_cols)
            if _core_ok(plan, bhat):
                done = True
                break

    bhat = _hard_decision(plan, tch, tc, cur_rec, np.arange(plan.J))
    ok = _core_ok(plan, bhat)
    return bhat.reshape(-1), ok, mass, snaps_v, snaps_c


def run_designed(plan, tch, early_term, snap_steps):
    _ensure_gather(plan)
    F = tch.shape[0]
    bits = np.zeros((F, plan.J * plan.Z), dtype=np.uint8)
    ok = np.zeros(F, dtype=np.uint8)
    mass = np.zeros(F, dtype=np.int64)
    ns = len(snap_steps)
    sv = np.zeros((F, ns, plan.nloc, plan.Z), dtype=np.int8)
    sc = np.zeros_like(sv)
    for f in range(F):
        b, o, m, v, c = _decode_one(plan, tch[f], early_term, snap_steps)
        bits[f], ok[f], mass[f] = b, o, m
        if ns:
            sv[f], sc[f] = v, c
    return bits, ok, mass, sv, sc


# ---------------------------------------------------------------------------
# float BP and min-sum baselines


def _graph_gather(gi):
    return (np.arange(gi.Z)[None, :] + gi.loc_shift[:, None].astype(np.int64)) % gi.Z


def _core_ok_graph(gi, gidx, bhat):
    for i in gi.core_rows:
        syn = np.zeros(gi.Z, dtype=np.uint8)
        for m in gi.row_loc[gi.row_ptr[i]:gi.row_ptr[i + 1]]:
            syn ^= bhat[gi.loc_col[m]][gidx[m]]
        if syn.any():
            return False
    return True


def run_bp(gi, llrs, imax, early_term):
    gidx = _graph_gather(gi)
    F = llrs.shape[0]
    bits = np.zeros((F, gi.J * gi.Z), dtype=np.uint8)
    ok = np.zeros(F, dtype=np.uint8)
    mass = np.zeros(F, dtype=np.int64)
    atanh_clip = 1.0 - 1e-15
    for f in range(F):
        llr = llrs[f].reshape(gi.J, gi.Z)
        mc = np.zeros((gi.nloc, gi.Z))
        mv = np.zeros((gi.nloc, gi.Z))
        m_used = 0
        done = False
        for _ in range(imax):
            for j in range(gi.J):
                locs = gi.col_loc[gi.col_ptr[j]:gi.col_ptr[j + 1]]
                colsum = llr[j] + sum(mc[m] for m in locs)
                for m in locs:
                    mv[m] = colsum - mc[m]
            for i in range(gi.M_b):
                locs = gi.row_loc[gi.row_ptr[i]:gi.row_ptr[i + 1]]
                t = np.stack([np.tanh(mv[m][gidx[m]] / 2.0) for m in locs])
                d = len(locs)
                pre = np.ones((d + 1, gi.Z))
                suf = np.ones((d + 1, gi.Z))
                for kk in range(d):
                    pre[kk + 1] = pre[kk] * t[kk]
                for kk in range(d - 1, -1, -1):
                    suf[kk] = suf[kk + 1] * t[kk]
                for kk, m in enumerate(locs):
                    ex = np.clip(pre[kk] * suf[kk + 1], -atanh_clip, atanh_clip)
                    mc[m][gidx[m]] = 2.0 * np.arctanh(ex)
            m_used += 2 * gi.nloc
            app = _bp_app(gi, llr, mc)
            bhat = (app < 0).astype(np.uint8)
            if early_term and _core_ok_graph(gi, gidx, bhat):
                done = True
                break
        app = _bp_app(gi, llr, mc)
        bhat = (app < 0).astype(np.uint8)
        bits[f] = bhat.reshape(-1)
        ok[f] = done or _core_ok_graph(gi, gidx, bhat)
        mass[f] = m_used
    return bits, ok, mass


def _bp_app(gi, llr, mc):
    app = llr.copy()
    for n in range(gi.nloc):
        app[gi.loc_col[n]] += mc[n]
    return app


def run_minsum(gi, llrs, variant, param, qbits, qstep, imax, layered, early_term):
    from ..scheduling import orthogonal_row_groups
    gidx = _graph_gather(gi)
    F = llrs.shape[0]
    bits = np.zeros((F, gi.J * gi.Z), dtype=np.uint8)
    ok = np.zeros(F, dtype=np.uint8)
    mass = np.zeros(F, dtype=np.int64)
    qmax = (1 << (qbits - 1)) - 1 if qbits else None
    layers = orthogonal_row_groups(gi) if layered else [tuple(range(gi.M_b))]

    for f in range(F):
        llr = llrs[f].reshape(gi.J, gi.Z)
        if qbits:
            ch = np.clip(np.round(llr / qstep), -qmax, qmax)
        else:
            ch = llr
        mc = np.zeros((gi.nloc, gi.Z))
        m_used = 0
        done = False
        for _ in range(imax):
            for group in layers:
                rows = list(group)
                cols = sorted({int(gi.loc_col[m]) for i in rows
                               for m in gi.row_locs(i)})
                mv_loc = {}
                for j in cols:
                    locs = gi.col_loc[gi.col_ptr[j]:gi.col_ptr[j + 1]]
                    colsum = ch[j] + sum(mc[m] for m in locs)
                    for m in locs:
                        if gi.loc_row[m] in rows:
                            v = colsum - mc[m]
                            if qbits:
                                v = np.clip(v, -qmax, qmax)
                            mv_loc[int(m)] = v
                for i in rows:
                    locs = gi.row_loc[gi.row_ptr[i]:gi.row_ptr[i + 1]]
                    vals = np.stack([mv_loc[int(m)][gidx[m]] for m in locs])
                    mags = np.abs(vals)
                    sgn = np.where(vals >= 0, 1.0, -1.0)
                    total_sgn = sgn.prod(axis=0)
                    order = np.argsort(mags, axis=0, kind="stable")
                    min1 = np.take_along_axis(mags, order[:1], axis=0)[0]
                    min2 = np.take_along_axis(mags, order[1:2], axis=0)[0]
                    amin = order[0]
                    for mi, m in enumerate(locs):
                        mag = np.where(amin == mi, min2, min1)
                        if variant == "nms":
                            mag = param * mag
                            if qbits:
                                mag = np.floor(mag + 0.5)
                        else:
                            off = np.round(param / qstep) if qbits else param
                            mag = np.maximum(mag - off, 0.0)
                        out = total_sgn * sgn[mi] * mag
                        mc[m][gidx[m]] = out
                    m_used += 2 * len(locs)
            app = ch.copy()
            for n in range(gi.nloc):
                app[gi.loc_col[n]] += mc[n]
            bhat = (app < 0).astype(np.uint8)
            if early_term and _core_ok_graph(gi, gidx, bhat):
                done = True
                break
        app = ch.copy()
        for n in range(gi.nloc):
            app[gi.loc_col[n]] += mc[n]
        bhat = (app < 0).astype(np.uint8)
        bits[f] = bhat.reshape(-1)
        ok[f] = done or _core_ok_graph(gi, gidx, bhat)
        mass[f] = m_used
    return bits, ok, mass
