# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled per-household kernels.

Each function covers an index range [lo, hi); with ``workers > 1`` the loop
runs under OpenMP with a static schedule (deterministic partition, disjoint
writes, so results are identical to the serial path). Only IEEE-exact float
operations are used, in the same order as the numpy reference backend, so
results are bit-identical between the two.
"""

from cython.parallel cimport prange

from libc.math cimport floor, rint
from libc.stdint cimport int32_t, int64_t, uint8_t, uint64_t

cdef uint64_t GAMMA = 0x9E3779B97F4A7C15u
cdef uint64_t MIX1 = 0xBF58476D1CE4E5B9u
cdef uint64_t MIX2 = 0x94D049BB133111EBu
cdef double U01_SCALE = 1.0 / 4503599627370496.0  # 2^-52


cdef inline uint64_t _mix(uint64_t x) nogil:
    x = x + GAMMA
    x = (x ^ (x >> 30)) * MIX1
    x = (x ^ (x >> 27)) * MIX2
    return x ^ (x >> 31)


def u01_fill(uint64_t prefix, double[::1] out, Py_ssize_t lo, Py_ssize_t hi,
             int workers=1):
    cdef Py_ssize_t i
    cdef double* o
    cdef uint64_t x
    if hi <= lo:
        return
    o = &out[0]
    if workers > 1:
        for i in prange(lo, hi, nogil=True, num_threads=workers, schedule="static"):
            o[i] = (<double> (_mix(prefix ^ (<uint64_t> i * GAMMA)) >> 12) + 0.5) * U01_SCALE
    else:
        with nogil:
            for i in range(lo, hi):
                o[i] = (<double> (_mix(prefix ^ (<uint64_t> i * GAMMA)) >> 12) + 0.5) * U01_SCALE


cdef inline void _peer_one(const int64_t* indptr, const int32_t* indices,
                           const uint8_t* flags, int32_t* out, Py_ssize_t i) nogil:
    cdef Py_ssize_t j
    cdef int32_t c = 0
    for j in range(indptr[i], indptr[i + 1]):
        c = c + flags[indices[j]]
    out[i] = c


def peer_counts_range(int64_t[::1] indptr, int32_t[::1] indices,
                      uint8_t[::1] flags, int32_t[::1] out,
                      Py_ssize_t lo, Py_ssize_t hi, int workers=1):
    cdef Py_ssize_t i
    cdef const int64_t* ip
    cdef const int32_t* ix
    cdef const uint8_t* fl
    cdef int32_t* o
    if hi <= lo:
        return
    ip = &indptr[0]
    ix = &indices[0] if len(indices) else NULL
    fl = &flags[0]
    o = &out[0]
    if workers > 1:
        for i in prange(lo, hi, nogil=True, num_threads=workers, schedule="static"):
            _peer_one(ip, ix, fl, o, i)
    else:
        with nogil:
            for i in range(lo, hi):
                _peer_one(ip, ix, fl, o, i)


cdef inline void _diff_one(const int64_t* indptr, const int32_t* indices,
                           const uint8_t* adopted, const double* z_base,
                           double peer_coeff, const double* logit_u,
                           const int64_t* deposits, const int64_t* cost_cents,
                           uint8_t* out_adopt, Py_ssize_t i) nogil:
    cdef Py_ssize_t j
    cdef int64_t cnt, deg
    cdef double share, z
    if adopted[i]:
        out_adopt[i] = 0
        return
    deg = indptr[i + 1] - indptr[i]
    cnt = 0
    for j in range(indptr[i], indptr[i + 1]):
        cnt = cnt + adopted[indices[j]]
    share = (<double> cnt) / (<double> deg) if deg > 0 else 0.0
    z = z_base[i] + peer_coeff * share
    out_adopt[i] = 1 if deposits[i] >= cost_cents[i] and z > logit_u[i] else 0


def diffusion_eval_range(int64_t[::1] indptr, int32_t[::1] indices,
                         uint8_t[::1] adopted, double[::1] z_base,
                         double peer_coeff, double[::1] logit_u,
                         int64_t[::1] deposits, int64_t[::1] cost_cents,
                         uint8_t[::1] out_adopt, Py_ssize_t lo, Py_ssize_t hi,
                         int workers=1):
    cdef Py_ssize_t i
    cdef const int64_t* ip
    cdef const int32_t* ix
    cdef const uint8_t* ad
    cdef const double* zb
    cdef const double* lu
    cdef const int64_t* dep
    cdef const int64_t* cc
    cdef uint8_t* oa
    if hi <= lo:
        return
    ip = &indptr[0]
    ix = &indices[0] if len(indices) else NULL
    ad = &adopted[0]
    zb = &z_base[0]
    lu = &logit_u[0]
    dep = &deposits[0]
    cc = &cost_cents[0]
    oa = &out_adopt[0]
    if workers > 1:
        for i in prange(lo, hi, nogil=True, num_threads=workers, schedule="static"):
            _diff_one(ip, ix, ad, zb, peer_coeff, lu, dep, cc, oa, i)
    else:
        with nogil:
            for i in range(lo, hi):
                _diff_one(ip, ix, ad, zb, peer_coeff, lu, dep, cc, oa, i)


cdef inline void _pay_one(const int64_t* budget, const double* weights,
                          const double* scale, int64_t* out_pay,
                          Py_ssize_t ns, Py_ssize_t i) nogil:
    cdef Py_ssize_t s
    cdef double b = <double> budget[i]
    for s in range(ns):
        out_pay[i * ns + s] = <int64_t> floor((b * weights[i * ns + s]) * scale[s])


def consumption_pay_range(int64_t[::1] budget, double[:, ::1] weights,
                          double[::1] scale, int64_t[:, ::1] out_pay,
                          Py_ssize_t lo, Py_ssize_t hi, int workers=1):
    cdef Py_ssize_t i
    cdef Py_ssize_t ns = weights.shape[1]
    cdef const int64_t* bg
    cdef const double* w
    cdef const double* sc
    cdef int64_t* op
    if hi <= lo:
        return
    bg = &budget[0]
    w = &weights[0, 0]
    sc = &scale[0]
    op = &out_pay[0, 0]
    if workers > 1:
        for i in prange(lo, hi, nogil=True, num_threads=workers, schedule="static"):
            _pay_one(bg, w, sc, op, ns, i)
    else:
        with nogil:
            for i in range(lo, hi):
                _pay_one(bg, w, sc, op, ns, i)


cdef inline void _budget_pay_one(const int64_t* dep_start, const int64_t* dep_now,
                                 const int64_t* wage, const double* weights,
                                 const double* scale, double ptc, double tax_rate,
                                 int64_t transfer, int64_t* out_pay,
                                 int64_t* out_debit, Py_ssize_t ns,
                                 Py_ssize_t i) nogil:
    cdef Py_ssize_t s
    cdef int64_t net_wage, budget, cap, debit, p
    cdef double b
    net_wage = wage[i] - <int64_t> rint((<double> wage[i]) * tax_rate)
    budget = <int64_t> rint(ptc * (<double> (dep_start[i] + net_wage + transfer)))
    if budget < 0:
        budget = 0
    cap = dep_now[i] if dep_now[i] > 0 else 0
    if budget > cap:
        budget = cap
    b = <double> budget
    debit = 0
    for s in range(ns):
        p = <int64_t> floor((b * weights[i * ns + s]) * scale[s])
        out_pay[i * ns + s] = p
        debit = debit + p
    out_debit[i] = debit


def consumption_budget_pay_range(int64_t[::1] dep_start, int64_t[::1] dep_now,
                                 int64_t[::1] wage, double[:, ::1] weights,
                                 double[::1] scale, double ptc, double tax_rate,
                                 int64_t transfer, int64_t[:, ::1] out_pay,
                                 int64_t[::1] out_debit,
                                 Py_ssize_t lo, Py_ssize_t hi, int workers=1):
    cdef Py_ssize_t i
    cdef Py_ssize_t ns = weights.shape[1]
    cdef const int64_t* ds
    cdef const int64_t* dn
    cdef const int64_t* wg
    cdef const double* w
    cdef const double* sc
    cdef int64_t* op
    cdef int64_t* od
    if hi <= lo:
        return
    ds = &dep_start[0]
    dn = &dep_now[0]
    wg = &wage[0]
    w = &weights[0, 0]
    sc = &scale[0]
    op = &out_pay[0, 0]
    od = &out_debit[0]
    if workers > 1:
        for i in prange(lo, hi, nogil=True, num_threads=workers, schedule="static"):
            _budget_pay_one(ds, dn, wg, w, sc, ptc, tax_rate, transfer, op, od, ns, i)
    else:
        with nogil:
            for i in range(lo, hi):
                _budget_pay_one(ds, dn, wg, w, sc, ptc, tax_rate, transfer, op, od, ns, i)


def wage_tax_range(int64_t[::1] wage, double tax_rate, int64_t[::1] deposits,
                   int64_t[::1] out_tax, Py_ssize_t lo, Py_ssize_t hi,
                   int workers=1):
    cdef Py_ssize_t i
    cdef int64_t t
    cdef const int64_t* wg
    cdef int64_t* dep
    cdef int64_t* ot
    if hi <= lo:
        return
    wg = &wage[0]
    dep = &deposits[0]
    ot = &out_tax[0]
    if workers > 1:
        for i in prange(lo, hi, nogil=True, num_threads=workers, schedule="static"):
            ot[i] = <int64_t> rint((<double> wg[i]) * tax_rate)
            dep[i] -= ot[i]
    else:
        with nogil:
            for i in range(lo, hi):
                ot[i] = <int64_t> rint((<double> wg[i]) * tax_rate)
                dep[i] -= ot[i]


def deposit_interest_range(int64_t[::1] deposits, double rate,
                           int64_t[::1] income_cur, int64_t[::1] out_interest,
                           Py_ssize_t lo, Py_ssize_t hi, int workers=1):
    cdef Py_ssize_t i
    cdef int64_t* dep
    cdef int64_t* inc
    cdef int64_t* oi
    if hi <= lo:
        return
    dep = &deposits[0]
    inc = &income_cur[0]
    oi = &out_interest[0]
    if workers > 1:
        for i in prange(lo, hi, nogil=True, num_threads=workers, schedule="static"):
            oi[i] = <int64_t> rint((<double> dep[i]) * rate) if dep[i] > 0 else 0
            dep[i] += oi[i]
            inc[i] += oi[i]
    else:
        with nogil:
            for i in range(lo, hi):
                oi[i] = <int64_t> rint((<double> dep[i]) * rate) if dep[i] > 0 else 0
                dep[i] += oi[i]
                inc[i] += oi[i]
