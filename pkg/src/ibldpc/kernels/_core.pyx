# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled decode kernels: designed fixed-point decoder, float sum-product,
and NMS/OMS baselines. Semantics mirror kernels/reference.py exactly."""

import numpy as np

cimport numpy as cnp
from libc.math cimport atanh, floor, tanh
from libc.string cimport memset

cnp.import_array()


cdef inline int c_abs(int v) nogil:
    return v if v >= 0 else -v


cdef inline long clampl(long v, long lo, long hi) nogil:
    if v < lo:
        return lo
    if v > hi:
        return hi
    return v


def run_designed(plan, tch_in, early_term, snap_steps_in):
    cdef int Z = plan.Z, nloc = plan.nloc, J = plan.J
    cdef int M = plan.M, zmax = plan.zmax, half = plan.half
    cdef int ncreg = plan.ncreg
    cdef int nthr = half - 1

    cdef cnp.int32_t[::1] loc_row = np.ascontiguousarray(plan.loc_row, np.int32)
    cdef cnp.int32_t[::1] loc_col = np.ascontiguousarray(plan.loc_col, np.int32)
    cdef cnp.int32_t[::1] loc_shift = np.ascontiguousarray(plan.loc_shift, np.int32)
    cdef cnp.int32_t[::1] row_ptr = np.ascontiguousarray(plan.row_ptr, np.int32)
    cdef cnp.int32_t[::1] row_loc = np.ascontiguousarray(plan.row_loc, np.int32)
    cdef cnp.int32_t[::1] col_ptr = np.ascontiguousarray(plan.col_ptr, np.int32)
    cdef cnp.int32_t[::1] col_loc = np.ascontiguousarray(plan.col_loc, np.int32)
    cdef cnp.int32_t[::1] core_rows = np.ascontiguousarray(plan.core_rows, np.int32)
    cdef cnp.int32_t[::1] hd_cols = np.ascontiguousarray(plan.hd_cols, np.int32)
    cdef cnp.int32_t[:, ::1] phi_ch = np.ascontiguousarray(plan.phi_ch, np.int32)
    cdef cnp.int32_t[::1] rc_of = np.ascontiguousarray(plan.rc_of, np.int32)
    cdef cnp.int32_t[::1] rv_of = np.ascontiguousarray(plan.rv_of, np.int32)

    cdef cnp.int32_t[::1] step_kind = np.ascontiguousarray(plan.step_kind, np.int32)
    cdef cnp.uint8_t[::1] step_check = np.ascontiguousarray(plan.step_check, np.uint8)
    cdef cnp.int64_t[::1] step_ptr = np.ascontiguousarray(plan.step_ptr, np.int64)
    cdef cnp.int32_t[::1] step_loc = np.ascontiguousarray(plan.step_loc, np.int32)
    cdef cnp.int32_t[::1] step_tau_idx = np.ascontiguousarray(plan.step_tau_idx, np.int32)
    cdef cnp.int32_t[:, ::1] tau_flat = np.ascontiguousarray(plan.tau_flat, np.int32)
    cdef cnp.int32_t[:, :, ::1] rec_flat = np.ascontiguousarray(plan.rec_flat, np.int32)
    cdef cnp.int32_t[:, :, ::1] crec_flat
    cdef bint has_crec = plan.crec_flat.size > 0
    if has_crec:
        crec_flat = np.ascontiguousarray(plan.crec_flat, np.int32)
    else:
        crec_flat = np.zeros((1, 1, 1), np.int32)
    cdef cnp.int64_t[::1] rec_upd_ptr = np.ascontiguousarray(plan.rec_upd_ptr, np.int64)
    cdef cnp.int32_t[::1] rec_upd_ids = np.ascontiguousarray(
        plan.rec_upd_ids, np.int32) if len(plan.rec_upd_ids) else np.zeros(0, np.int32)

    cdef cnp.int32_t[:, :, ::1] tch = np.ascontiguousarray(tch_in, np.int32)
    cdef int F = tch.shape[0]
    cdef int ns = step_kind.shape[0]
    cdef bint eterm = early_term

    snap_steps = np.ascontiguousarray(snap_steps_in, np.int32)
    cdef cnp.int32_t[::1] snaps = snap_steps
    cdef int nsnap = snaps.shape[0]
    cdef cnp.int32_t[::1] snap_of_step = np.full(max(ns, 1), -1, np.int32)
    cdef int si
    for si in range(nsnap):
        snap_of_step[snaps[si]] = si

    bits_out = np.zeros((F, J * Z), dtype=np.uint8)
    ok_out = np.zeros(F, dtype=np.uint8)
    mass_out = np.zeros(F, dtype=np.int64)
    sv_out = np.zeros((F, nsnap, nloc, Z), dtype=np.int8)
    sc_out = np.zeros((F, nsnap, nloc, Z), dtype=np.int8)
    cdef cnp.uint8_t[:, ::1] bits = bits_out
    cdef cnp.uint8_t[::1] okv = ok_out
    cdef cnp.int64_t[::1] massv = mass_out
    cdef cnp.int8_t[:, :, :, ::1] sv = sv_out
    cdef cnp.int8_t[:, :, :, ::1] sc = sc_out

    # per-frame workspaces
    cdef cnp.int8_t[:, ::1] tv = np.ones((nloc, Z), np.int8)
    cdef cnp.int8_t[:, ::1] tc = np.ones((nloc, Z), np.int8)
    cdef cnp.int32_t[:, ::1] cur_rec = np.zeros((ncreg, half), np.int32)
    cdef cnp.int32_t[::1] tau_of_loc = np.zeros(nloc, np.int32)
    cdef cnp.uint8_t[::1] in_u = np.zeros(nloc, np.uint8)
    cdef cnp.uint8_t[:, ::1] bhat = np.zeros((J, Z), np.uint8)
    cdef int dmax = 0
    cdef int i, d
    for i in range(row_ptr.shape[0] - 1):
        d = row_ptr[i + 1] - row_ptr[i]
        if d > dmax:
            dmax = d
    cdef cnp.int32_t[:, ::1] rvals = np.zeros((dmax, Z), np.int32)
    cdef cnp.int64_t[:, ::1] rpm = np.zeros((dmax, Z), np.int64)
    cdef cnp.int32_t[::1] min1 = np.zeros(Z, np.int32)
    cdef cnp.int32_t[::1] min2 = np.zeros(Z, np.int32)
    cdef cnp.int32_t[::1] amin = np.zeros(Z, np.int32)
    cdef cnp.int32_t[::1] sgnp = np.zeros(Z, np.int32)
    cdef cnp.int64_t[::1] tot = np.zeros(Z, np.int64)

    cdef int f, k, kind, n, j, m, z, zz, t, mag, sgn, v, mi, row, lo, hi
    cdef long s, mass, extr
    cdef int cnt, rid, p, c
    cdef bint done, okflag, rowok

    for f in range(F):
        for n in range(nloc):
            for z in range(Z):
                tv[n, z] = 1
                tc[n, z] = 1
        memset(&cur_rec[0, 0], 0, ncreg * half * sizeof(cnp.int32_t))
        mass = 0
        done = False
        okflag = False

        for k in range(ns):
            lo = <int> step_ptr[k]
            hi = <int> step_ptr[k + 1]
            kind = step_kind[k]
            if kind == 0:
                for p in range(<int> rec_upd_ptr[k], <int> rec_upd_ptr[k + 1]):
                    rid = rec_upd_ids[p]
                    for c in range(half):
                        cur_rec[rid, c] = rec_flat[k, rid, c]
                for p in range(lo, hi):
                    n = step_loc[p]
                    j = loc_col[n]
                    for z in range(Z):
                        s = phi_ch[j, tch[f, j, z]]
                        for c in range(col_ptr[j], col_ptr[j + 1]):
                            m = col_loc[c]
                            if m == n:
                                continue
                            t = tc[m, z]
                            if t > 0:
                                s += rec_flat[k, rc_of[m], t - 1]
                            else:
                                s -= rec_flat[k, rc_of[m], -t - 1]
                        s = clampl(s, -M, M)
                        mag = 1
                        for c in range(nthr):
                            if c_abs(<int> s) >= tau_flat[step_tau_idx[p], c]:
                                mag += 1
                        tv[n, z] = <cnp.int8_t> (mag if s >= 0 else -mag)
            elif kind == 2:
                memset(&in_u[0], 0, nloc)
                for p in range(lo, hi):
                    in_u[step_loc[p]] = 1
                for p in range(lo, hi):
                    n = step_loc[p]
                    if in_u[n] == 1:
                        row = loc_row[n]
                        d = row_ptr[row + 1] - row_ptr[row]
                        for mi in range(d):
                            m = row_loc[row_ptr[row] + mi]
                            in_u[m] = 2 if in_u[m] else 3
                        for z in range(Z):
                            min1[z] = half
                            min2[z] = half
                            amin[z] = -1
                            sgnp[z] = 1
                        for mi in range(d):
                            m = row_loc[row_ptr[row] + mi]
                            for z in range(Z):
                                zz = z + loc_shift[m]
                                if zz >= Z:
                                    zz -= Z
                                t = tv[m, zz]
                                rvals[mi, z] = t
                                mag = c_abs(t)
                                if t < 0:
                                    sgnp[z] = -sgnp[z]
                                if mag < min1[z]:
                                    min2[z] = min1[z]
                                    min1[z] = mag
                                    amin[z] = mi
                                elif mag < min2[z]:
                                    min2[z] = mag
                        for mi in range(d):
                            m = row_loc[row_ptr[row] + mi]
                            if in_u[m] != 2:
                                continue
                            for z in range(Z):
                                zz = z + loc_shift[m]
                                if zz >= Z:
                                    zz -= Z
                                t = rvals[mi, z]
                                mag = min2[z] if amin[z] == mi else min1[z]
                                sgn = sgnp[z] * (1 if t > 0 else -1)
                                tc[m, zz] = <cnp.int8_t> (sgn * mag)
                        for mi in range(d):
                            m = row_loc[row_ptr[row] + mi]
                            in_u[m] = 4 if in_u[m] == 2 else 0
            else:
                memset(&in_u[0], 0, nloc)
                for p in range(lo, hi):
                    in_u[step_loc[p]] = 1
                    tau_of_loc[step_loc[p]] = step_tau_idx[p]
                for p in range(lo, hi):
                    n = step_loc[p]
                    if in_u[n] == 1:
                        row = loc_row[n]
                        d = row_ptr[row + 1] - row_ptr[row]
                        for mi in range(d):
                            m = row_loc[row_ptr[row] + mi]
                            in_u[m] = 2 if in_u[m] else 3
                        for z in range(Z):
                            sgnp[z] = 1
                            tot[z] = 0
                        for mi in range(d):
                            m = row_loc[row_ptr[row] + mi]
                            for z in range(Z):
                                zz = z + loc_shift[m]
                                if zz >= Z:
                                    zz -= Z
                                t = tv[m, zz]
                                rvals[mi, z] = t
                                if t < 0:
                                    sgnp[z] = -sgnp[z]
                                rpm[mi, z] = crec_flat[k, rv_of[m], c_abs(t) - 1]
                                tot[z] += rpm[mi, z]
                        for mi in range(d):
                            m = row_loc[row_ptr[row] + mi]
                            if in_u[m] != 2:
                                continue
                            for z in range(Z):
                                zz = z + loc_shift[m]
                                if zz >= Z:
                                    zz -= Z
                                extr = tot[z] - rpm[mi, z]
                                if extr > zmax - 1:
                                    extr = zmax - 1
                                t = rvals[mi, z]
                                v = <int> (zmax - extr)
                                mag = 1
                                for c in range(nthr):
                                    if v >= tau_flat[tau_of_loc[m], c]:
                                        mag += 1
                                sgn = sgnp[z] * (1 if t > 0 else -1)
                                tc[m, zz] = <cnp.int8_t> (sgn * mag)
                        for mi in range(d):
                            m = row_loc[row_ptr[row] + mi]
                            in_u[m] = 4 if in_u[m] == 2 else 0
            mass += hi - lo
            si = snap_of_step[k] if ns else -1
            if si >= 0:
                for n in range(nloc):
                    for z in range(Z):
                        sv[f, si, n, z] = tv[n, z]
                        sc[f, si, n, z] = tc[n, z]
            if step_check[k] and eterm and not done:
                _hard_decision_c(tch, f, phi_ch, col_ptr, col_loc, rc_of,
                                 cur_rec, tc, hd_cols, bhat, Z)
                if _core_ok_c(core_rows, row_ptr, row_loc, loc_col, loc_shift,
                              bhat, Z):
                    done = True
                    okflag = True
                    break

        all_cols = np.arange(J, dtype=np.int32)
        _hard_decision_c(tch, f, phi_ch, col_ptr, col_loc, rc_of, cur_rec,
                         tc, all_cols, bhat, Z)
        if not done:
            okflag = _core_ok_c(core_rows, row_ptr, row_loc, loc_col,
                                loc_shift, bhat, Z)
        for j in range(J):
            for z in range(Z):
                bits[f, j * Z + z] = bhat[j, z]
        okv[f] = 1 if okflag else 0
        massv[f] = mass

    return bits_out, ok_out, mass_out, sv_out, sc_out


cdef void _hard_decision_c(cnp.int32_t[:, :, ::1] tch, int f,
                           cnp.int32_t[:, ::1] phi_ch,
                           cnp.int32_t[::1] col_ptr, cnp.int32_t[::1] col_loc,
                           cnp.int32_t[::1] rc_of, cnp.int32_t[:, ::1] cur_rec,
                           cnp.int8_t[:, ::1] tc, cnp.int32_t[:] cols,
                           cnp.uint8_t[:, ::1] bhat, int Z) nogil:
    cdef int ci, j, z, c, m, t
    cdef long app
    for ci in range(cols.shape[0]):
        j = cols[ci]
        for z in range(Z):
            app = phi_ch[j, tch[f, j, z]]
            for c in range(col_ptr[j], col_ptr[j + 1]):
                m = col_loc[c]
                t = tc[m, z]
                if t > 0:
                    app += cur_rec[rc_of[m], t - 1]
                else:
                    app -= cur_rec[rc_of[m], -t - 1]
            bhat[j, z] = 1 if app < 0 else 0


cdef bint _core_ok_c(cnp.int32_t[::1] core_rows, cnp.int32_t[::1] row_ptr,
                     cnp.int32_t[::1] row_loc, cnp.int32_t[::1] loc_col,
                     cnp.int32_t[::1] loc_shift, cnp.uint8_t[:, ::1] bhat,
                     int Z) nogil:
    cdef int ri, i, z, zz, c, m
    cdef int syn
    for ri in range(core_rows.shape[0]):
        i = core_rows[ri]
        for z in range(Z):
            syn = 0
            for c in range(row_ptr[i], row_ptr[i + 1]):
                m = row_loc[c]
                zz = z + loc_shift[m]
                if zz >= Z:
                    zz -= Z
                syn ^= bhat[loc_col[m], zz]
            if syn:
                return False
    return True


# ---------------------------------------------------------------------------
# float BP


def run_bp(gi, llrs_in, imax, early_term):
    cdef int Z = gi.Z, nloc = gi.nloc, J = gi.J, Mb = gi.M_b
    cdef cnp.int32_t[::1] loc_row = np.ascontiguousarray(gi.loc_row, np.int32)
    cdef cnp.int32_t[::1] loc_col = np.ascontiguousarray(gi.loc_col, np.int32)
    cdef cnp.int32_t[::1] loc_shift = np.ascontiguousarray(gi.loc_shift, np.int32)
    cdef cnp.int32_t[::1] row_ptr = np.ascontiguousarray(gi.row_ptr, np.int32)
    cdef cnp.int32_t[::1] row_loc = np.ascontiguousarray(gi.row_loc, np.int32)
    cdef cnp.int32_t[::1] col_ptr = np.ascontiguousarray(gi.col_ptr, np.int32)
    cdef cnp.int32_t[::1] col_loc = np.ascontiguousarray(gi.col_loc, np.int32)
    cdef cnp.int32_t[::1] core_rows = np.ascontiguousarray(gi.core_rows, np.int32)
    cdef cnp.float64_t[:, ::1] llrs = np.ascontiguousarray(llrs_in, np.float64)
    cdef int F = llrs.shape[0]
    cdef int it_max = imax
    cdef bint eterm = early_term

    bits_out = np.zeros((F, J * Z), dtype=np.uint8)
    ok_out = np.zeros(F, dtype=np.uint8)
    mass_out = np.zeros(F, dtype=np.int64)
    cdef cnp.uint8_t[:, ::1] bits = bits_out
    cdef cnp.uint8_t[::1] okv = ok_out
    cdef cnp.int64_t[::1] massv = mass_out

    cdef int dmax = 0
    cdef int i, d
    for i in range(Mb):
        d = row_ptr[i + 1] - row_ptr[i]
        if d > dmax:
            dmax = d

    cdef cnp.float64_t[:, ::1] mv = np.zeros((nloc, Z))
    cdef cnp.float64_t[:, ::1] mc = np.zeros((nloc, Z))
    cdef cnp.float64_t[:, ::1] tvals = np.zeros((dmax, Z))
    cdef cnp.float64_t[:, ::1] pre = np.zeros((dmax + 1, Z))
    cdef cnp.float64_t[:, ::1] suf = np.zeros((dmax + 1, Z))
    cdef cnp.float64_t[:, ::1] app = np.zeros((J, Z))
    cdef cnp.uint8_t[:, ::1] bhat = np.zeros((J, Z), np.uint8)

    cdef int f, it, j, z, c, m, mi, zz
    cdef long mass
    cdef double colsum, ex
    cdef double CLIP = 1.0 - 1e-15
    cdef bint done, okflag

    for f in range(F):
        for m in range(nloc):
            for z in range(Z):
                mv[m, z] = 0.0
                mc[m, z] = 0.0
        mass = 0
        done = False
        okflag = False
        for it in range(it_max):
            for j in range(J):
                for z in range(Z):
                    colsum = llrs[f, j * Z + z]
                    for c in range(col_ptr[j], col_ptr[j + 1]):
                        colsum += mc[col_loc[c], z]
                    for c in range(col_ptr[j], col_ptr[j + 1]):
                        m = col_loc[c]
                        mv[m, z] = colsum - mc[m, z]
            for i in range(Mb):
                d = row_ptr[i + 1] - row_ptr[i]
                for mi in range(d):
                    m = row_loc[row_ptr[i] + mi]
                    for z in range(Z):
                        zz = z + loc_shift[m]
                        if zz >= Z:
                            zz -= Z
                        tvals[mi, z] = tanh(mv[m, zz] / 2.0)
                for z in range(Z):
                    pre[0, z] = 1.0
                    suf[d, z] = 1.0
                for mi in range(d):
                    for z in range(Z):
                        pre[mi + 1, z] = pre[mi, z] * tvals[mi, z]
                for mi in range(d - 1, -1, -1):
                    for z in range(Z):
                        suf[mi, z] = suf[mi + 1, z] * tvals[mi, z]
                for mi in range(d):
                    m = row_loc[row_ptr[i] + mi]
                    for z in range(Z):
                        zz = z + loc_shift[m]
                        if zz >= Z:
                            zz -= Z
                        ex = pre[mi, z] * suf[mi + 1, z]
                        if ex > CLIP:
                            ex = CLIP
                        elif ex < -CLIP:
                            ex = -CLIP
                        mc[m, zz] = 2.0 * atanh(ex)
            mass += 2 * nloc
            _bp_app_c(llrs, f, col_ptr, col_loc, mc, app, J, Z)
            for j in range(J):
                for z in range(Z):
                    bhat[j, z] = 1 if app[j, z] < 0.0 else 0
            if eterm and _core_ok_c(core_rows, row_ptr, row_loc, loc_col,
                                    loc_shift, bhat, Z):
                done = True
                okflag = True
                break
        _bp_app_c(llrs, f, col_ptr, col_loc, mc, app, J, Z)
        for j in range(J):
            for z in range(Z):
                bhat[j, z] = 1 if app[j, z] < 0.0 else 0
        if not done:
            okflag = _core_ok_c(core_rows, row_ptr, row_loc, loc_col,
                                loc_shift, bhat, Z)
        for j in range(J):
            for z in range(Z):
                bits[f, j * Z + z] = bhat[j, z]
        okv[f] = 1 if okflag else 0
        massv[f] = mass
    return bits_out, ok_out, mass_out


cdef void _bp_app_c(cnp.float64_t[:, ::1] llrs, int f,
                    cnp.int32_t[::1] col_ptr, cnp.int32_t[::1] col_loc,
                    cnp.float64_t[:, ::1] mc, cnp.float64_t[:, ::1] app,
                    int J, int Z) nogil:
    cdef int j, z, c
    for j in range(J):
        for z in range(Z):
            app[j, z] = llrs[f, j * Z + z]
            for c in range(col_ptr[j], col_ptr[j + 1]):
                app[j, z] += mc[col_loc[c], z]


# ---------------------------------------------------------------------------
# NMS / OMS baselines


def run_minsum(gi, llrs_in, variant, param, qbits, qstep, imax, layered,
               early_term):
    from ..scheduling import orthogonal_row_groups
    cdef int Z = gi.Z, nloc = gi.nloc, J = gi.J, Mb = gi.M_b
    cdef cnp.int32_t[::1] loc_row = np.ascontiguousarray(gi.loc_row, np.int32)
    cdef cnp.int32_t[::1] loc_col = np.ascontiguousarray(gi.loc_col, np.int32)
    cdef cnp.int32_t[::1] loc_shift = np.ascontiguousarray(gi.loc_shift, np.int32)
    cdef cnp.int32_t[::1] row_ptr = np.ascontiguousarray(gi.row_ptr, np.int32)
    cdef cnp.int32_t[::1] row_loc = np.ascontiguousarray(gi.row_loc, np.int32)
    cdef cnp.int32_t[::1] col_ptr = np.ascontiguousarray(gi.col_ptr, np.int32)
    cdef cnp.int32_t[::1] col_loc = np.ascontiguousarray(gi.col_loc, np.int32)
    cdef cnp.int32_t[::1] core_rows = np.ascontiguousarray(gi.core_rows, np.int32)
    cdef cnp.float64_t[:, ::1] llrs = np.ascontiguousarray(llrs_in, np.float64)
    cdef int F = llrs.shape[0]
    cdef bint is_nms = (variant == "nms")
    cdef double prm = param
    cdef int qb = qbits
    cdef double qs = qstep
    cdef int it_max = imax
    cdef bint eterm = early_term
    cdef double qmax = (1 << (qb - 1)) - 1 if qb else 0.0

    if layered:
        groups = orthogonal_row_groups(gi)
    else:
        groups = [tuple(range(Mb))]
    grp_arr = [np.asarray(grp, np.int32) for grp in groups]

    bits_out = np.zeros((F, J * Z), dtype=np.uint8)
    ok_out = np.zeros(F, dtype=np.uint8)
    mass_out = np.zeros(F, dtype=np.int64)
    cdef cnp.uint8_t[:, ::1] bits = bits_out
    cdef cnp.uint8_t[::1] okv = ok_out
    cdef cnp.int64_t[::1] massv = mass_out

    cdef int dmax = 0
    cdef int i, d
    for i in range(Mb):
        d = row_ptr[i + 1] - row_ptr[i]
        if d > dmax:
            dmax = d

    cdef cnp.float64_t[:, ::1] ch = np.zeros((J, Z))
    cdef cnp.float64_t[:, ::1] mc = np.zeros((nloc, Z))
    cdef cnp.float64_t[:, ::1] mvals = np.zeros((dmax, Z))
    cdef cnp.float64_t[::1] min1 = np.zeros(Z)
    cdef cnp.float64_t[::1] min2 = np.zeros(Z)
    cdef cnp.int32_t[::1] amin = np.zeros(Z, np.int32)
    cdef cnp.float64_t[::1] sgnp = np.zeros(Z)
    cdef cnp.float64_t[:, ::1] app = np.zeros((J, Z))
    cdef cnp.uint8_t[:, ::1] bhat = np.zeros((J, Z), np.uint8)
    cdef cnp.float64_t[:, ::1] mv_row = np.zeros((nloc, Z))
    cdef cnp.uint8_t[::1] in_rows = np.zeros(Mb, np.uint8)

    cdef int f, it, g, j, z, c, m, mi, zz
    cdef long mass
    cdef double colsum, v, mag, off, s
    cdef bint done, okflag
    cdef cnp.int32_t[::1] rows_v

    for f in range(F):
        for j in range(J):
            for z in range(Z):
                v = llrs[f, j * Z + z]
                if qb:
                    v = floor(v / qs + 0.5)
                    if v > qmax:
                        v = qmax
                    elif v < -qmax:
                        v = -qmax
                ch[j, z] = v
        for m in range(nloc):
            for z in range(Z):
                mc[m, z] = 0.0
        mass = 0
        done = False
        okflag = False
        off = floor(prm / qs + 0.5) if qb else prm
        for it in range(it_max):
            for g in range(len(grp_arr)):
                rows_v = grp_arr[g]
                for i in range(Mb):
                    in_rows[i] = 0
                for c in range(rows_v.shape[0]):
                    in_rows[rows_v[c]] = 1
                # VN updates for the layer's locations, from scratch
                for j in range(J):
                    for z in range(Z):
                        colsum = ch[j, z]
                        for c in range(col_ptr[j], col_ptr[j + 1]):
                            colsum += mc[col_loc[c], z]
                        for c in range(col_ptr[j], col_ptr[j + 1]):
                            m = col_loc[c]
                            if in_rows[loc_row[m]]:
                                v = colsum - mc[m, z]
                                if qb:
                                    if v > qmax:
                                        v = qmax
                                    elif v < -qmax:
                                        v = -qmax
                                mv_row[m, z] = v
                for c in range(rows_v.shape[0]):
                    i = rows_v[c]
                    d = row_ptr[i + 1] - row_ptr[i]
                    for z in range(Z):
                        min1[z] = 1e300
                        min2[z] = 1e300
                        amin[z] = -1
                        sgnp[z] = 1.0
                    for mi in range(d):
                        m = row_loc[row_ptr[i] + mi]
                        for z in range(Z):
                            zz = z + loc_shift[m]
                            if zz >= Z:
                                zz -= Z
                            v = mv_row[m, zz]
                            mvals[mi, z] = v
                            if v < 0.0:
                                sgnp[z] = -sgnp[z]
                                v = -v
                            if v < min1[z]:
                                min2[z] = min1[z]
                                min1[z] = v
                                amin[z] = mi
                            elif v < min2[z]:
                                min2[z] = v
                    for mi in range(d):
                        m = row_loc[row_ptr[i] + mi]
                        for z in range(Z):
                            zz = z + loc_shift[m]
                            if zz >= Z:
                                zz -= Z
                            mag = min2[z] if amin[z] == mi else min1[z]
                            if is_nms:
                                mag = prm * mag
                                if qb:
                                    mag = floor(mag + 0.5)
                            else:
                                mag = mag - off
                                if mag < 0.0:
                                    mag = 0.0
                            s = sgnp[z] * (1.0 if mvals[mi, z] >= 0.0 else -1.0)
                            mc[m, zz] = s * mag
                    mass += 2 * d
            for j in range(J):
                for z in range(Z):
                    app[j, z] = ch[j, z]
                    for c in range(col_ptr[j], col_ptr[j + 1]):
                        app[j, z] += mc[col_loc[c], z]
                    bhat[j, z] = 1 if app[j, z] < 0.0 else 0
            if eterm and _core_ok_c(core_rows, row_ptr, row_loc, loc_col,
                                    loc_shift, bhat, Z):
                done = True
                okflag = True
                break
        for j in range(J):
            for z in range(Z):
                app[j, z] = ch[j, z]
                for c in range(col_ptr[j], col_ptr[j + 1]):
                    app[j, z] += mc[col_loc[c], z]
                bhat[j, z] = 1 if app[j, z] < 0.0 else 0
        if not done:
            okflag = _core_ok_c(core_rows, row_ptr, row_loc, loc_col,
                                loc_shift, bhat, Z)
        for j in range(J):
            for z in range(Z):
                bits[f, j * Z + z] = bhat[j, z]
        okv[f] = 1 if okflag else 0
        massv[f] = mass
    return bits_out, ok_out, mass_out
