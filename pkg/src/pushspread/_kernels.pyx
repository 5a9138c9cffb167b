# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: clone pairing and the two push-protocol loops.

Draw order matches ``_pykernels`` exactly; see that module for the reference
semantics.
"""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint32_t, uint64_t, int64_t
from libc.stdlib cimport malloc, free
from cpython.pycapsule cimport PyCapsule_GetPointer, PyCapsule_IsValid
from numpy.random cimport bitgen_t

from .errors import SamplingError

cnp.import_array()

BACKEND = "cython"


cdef bitgen_t* _bitgen(object bg) except NULL:
    capsule = bg.capsule
    if not PyCapsule_IsValid(capsule, "BitGenerator"):
        raise ValueError("invalid bit generator")
    return <bitgen_t*> PyCapsule_GetPointer(capsule, "BitGenerator")


cdef inline uint32_t _bounded(bitgen_t* rng, uint32_t r) noexcept nogil:
    cdef uint32_t x = <uint32_t>(rng.next_uint64(rng.state) >> 32)
    cdef uint64_t m = <uint64_t>x * r
    cdef uint32_t low = <uint32_t>m
    cdef uint32_t thresh
    if low < r:
        thresh = (<uint32_t>0 - r) % r
        while low < thresh:
            x = <uint32_t>(rng.next_uint64(rng.state) >> 32)
            m = <uint64_t>x * r
            low = <uint32_t>m
    return <uint32_t>(m >> 32)


cdef void _shuffle(int64_t* a, Py_ssize_t k, bitgen_t* rng) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef int64_t tmp
    i = k - 1
    while i > 0:
        j = _bounded(rng, <uint32_t>(i + 1))
        tmp = a[i]
        a[i] = a[j]
        a[j] = tmp
        i -= 1


cdef void _pair_consecutive(int64_t* a, Py_ssize_t k, int64_t* partner) noexcept nogil:
    cdef Py_ssize_t i = 0
    while i + 1 < k:
        partner[a[i]] = a[i + 1]
        partner[a[i + 1]] = a[i]
        i += 2


cdef void _pair_into(int64_t* perm, int64_t* partner, Py_ssize_t k, bitgen_t* rng) noexcept nogil:
    cdef Py_ssize_t i
    for i in range(k):
        perm[i] = i
    _shuffle(perm, k, rng)
    _pair_consecutive(perm, k, partner)


def pair_clones(Py_ssize_t k, object bg):
    """Uniform perfect matching on ``range(k)`` as a partner array."""
    if k % 2:
        raise ValueError("clone count must be even")
    cdef bitgen_t* rng = _bitgen(bg)
    partner = np.empty(k, dtype=np.int64)
    perm = np.empty(k, dtype=np.int64)
    cdef int64_t[::1] pv = partner
    cdef int64_t[::1] qv = perm
    with bg.lock:
        if k:
            _pair_into(&qv[0], &pv[0], k, rng)
    return partner


cdef bint _simple(const int64_t* partner, Py_ssize_t n, Py_ssize_t d) noexcept nogil:
    cdef Py_ssize_t v, i, j
    cdef int64_t a
    for v in range(n):
        for i in range(d):
            a = partner[v * d + i] // d
            if a == v:
                return False
            for j in range(i):
                if partner[v * d + j] // d == a:
                    return False
    return True


def is_simple_partner(const int64_t[::1] partner, Py_ssize_t n, Py_ssize_t d):
    if n * d == 0:
        return True
    return bool(_simple(&partner[0], n, d))


cdef Py_ssize_t _static_core(const int64_t* ends, Py_ssize_t n, Py_ssize_t d, Py_ssize_t start,
                             bitgen_t* rng, int64_t* ir, int64_t* order,
                             Py_ssize_t max_rounds, bint* done) noexcept nogil:
    cdef Py_ssize_t i, j, m, count, t
    cdef int64_t v, w, x, boundary
    for i in range(n):
        ir[i] = -1
    ir[start] = 0
    order[0] = start
    count = 1
    boundary = 0
    for j in range(d):
        if ends[start * d + j] != start:
            boundary += 1
    t = 0
    while count < n and boundary > 0 and t < max_rounds:
        t += 1
        m = count
        for i in range(m):
            v = order[i]
            w = ends[v * d + _bounded(rng, <uint32_t>d)]
            if ir[w] < 0:
                ir[w] = t
                order[count] = w
                count += 1
                for j in range(d):
                    x = ends[w * d + j]
                    if x == w:
                        continue
                    if ir[x] >= 0:
                        boundary -= 1
                    else:
                        boundary += 1
    done[0] = count == n
    return t


def static_run(const int64_t[:, ::1] ends, Py_ssize_t start, object bg, Py_ssize_t max_rounds):
    """Push protocol on a fixed graph. Returns (inform_round, rounds_run)."""
    cdef Py_ssize_t n = ends.shape[0], d = ends.shape[1], t
    cdef bint done
    cdef bitgen_t* rng = _bitgen(bg)
    ir = np.empty(n, dtype=np.int64)
    order = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] irv = ir
    cdef int64_t[::1] ov = order
    with bg.lock:
        t = _static_core(&ends[0, 0], n, d, start, rng, &irv[0], &ov[0], max_rounds, &done)
    return ir, t


def batch_static_T(const int64_t[:, ::1] ends, Py_ssize_t start, Py_ssize_t runs, object bg,
                   Py_ssize_t max_rounds):
    cdef Py_ssize_t n = ends.shape[0], d = ends.shape[1], r, t
    cdef bint done
    cdef bitgen_t* rng = _bitgen(bg)
    out = np.empty(runs, dtype=np.int64)
    ir = np.empty(n, dtype=np.int64)
    order = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] outv = out
    cdef int64_t[::1] irv = ir
    cdef int64_t[::1] ov = order
    with bg.lock:
        for r in range(runs):
            t = _static_core(&ends[0, 0], n, d, start, rng, &irv[0], &ov[0], max_rounds, &done)
            outv[r] = t if done else -1
    return out


def batch_sampled_static_T(Py_ssize_t n, Py_ssize_t d, Py_ssize_t runs, object bg,
                           bint multigraph, Py_ssize_t max_attempts, Py_ssize_t max_rounds):
    cdef Py_ssize_t k = n * d, r, a, i, t, attempts = 0
    cdef bint ok, done
    cdef bitgen_t* rng = _bitgen(bg)
    out = np.empty(runs, dtype=np.int64)
    partner = np.empty(k, dtype=np.int64)
    perm = np.empty(k, dtype=np.int64)
    ends = np.empty(k, dtype=np.int64)
    ir = np.empty(n, dtype=np.int64)
    order = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] outv = out
    cdef int64_t[::1] pv = partner
    cdef int64_t[::1] qv = perm
    cdef int64_t[::1] ev = ends
    cdef int64_t[::1] irv = ir
    cdef int64_t[::1] ov = order
    with bg.lock:
        for r in range(runs):
            ok = False
            for a in range(max_attempts):
                attempts += 1
                _pair_into(&qv[0], &pv[0], k, rng)
                if multigraph or _simple(&pv[0], n, d):
                    ok = True
                    break
            if not ok:
                raise SamplingError("no simple configuration within max_attempts", attempts)
            for i in range(k):
                ev[i] = pv[i] // d
            t = _static_core(&ev[0], n, d, 0, rng, &irv[0], &ov[0], max_rounds, &done)
            outv[r] = t if done else -1
    return out, attempts


cdef class _Exposure:
    """Working state for one deferred-exposure run; buffers are reused across runs."""
    cdef Py_ssize_t n, d, k, size
    cdef int64_t[::1] partner, pool, pos, ir, free, stamp, hits, selected, new, H
    cdef object rows

    def __init__(self, Py_ssize_t n, Py_ssize_t d):
        self.n = n
        self.d = d
        self.k = n * d
        self.partner = np.empty(self.k, dtype=np.int64)
        self.pool = np.empty(self.k, dtype=np.int64)
        self.pos = np.empty(self.k, dtype=np.int64)
        self.stamp = np.empty(self.k, dtype=np.int64)
        self.ir = np.empty(n, dtype=np.int64)
        self.free = np.empty(n, dtype=np.int64)
        self.hits = np.zeros(n, dtype=np.int64)
        self.selected = np.empty(n, dtype=np.int64)
        self.new = np.empty(n, dtype=np.int64)
        self.H = np.empty(d + 1, dtype=np.int64)

    cdef inline void _remove(self, int64_t c) noexcept nogil:
        cdef int64_t p, last
        self.size -= 1
        p = self.pos[c]
        last = self.pool[self.size]
        self.pool[p] = last
        self.pos[last] = p

    cdef Py_ssize_t run(self, bitgen_t* rng, bint complete_matching, Py_ssize_t max_rounds,
                        bint record, bint* done):
        cdef Py_ssize_t n = self.n, d = self.d, k = self.k
        cdef Py_ssize_t i, v, na, nn, count, t, h
        cdef int64_t c, c2, w, P, e_aa, e_self, e_au
        for i in range(k):
            self.partner[i] = -1
            self.pool[i] = i
            self.pos[i] = i
            self.stamp[i] = -1
        for i in range(n):
            self.ir[i] = -1
            self.free[i] = d
        self.size = k
        if record:
            self.rows = {"P": [d], "A": [], "eAA": [], "eself": [], "eAU": [], "H": []}
        self.ir[0] = 0
        count = 1
        P = d
        t = 0
        while count < n and P > 0 and t < max_rounds:
            t += 1
            na = 0
            for v in range(n):
                if self.ir[v] >= 0:
                    c = v * d + _bounded(rng, <uint32_t>d)
                    if self.partner[c] < 0:
                        self.selected[na] = c
                        na += 1
                        self.stamp[c] = t
            e_aa = 0
            e_self = 0
            e_au = 0
            nn = 0
            for i in range(na):
                c = self.selected[i]
                if self.partner[c] >= 0:
                    continue
                self._remove(c)
                c2 = self.pool[_bounded(rng, <uint32_t>self.size)]
                self._remove(c2)
                self.partner[c] = c2
                self.partner[c2] = c
                self.free[c // d] -= 1
                w = c2 // d
                self.free[w] -= 1
                if self.ir[w] >= 0 and self.ir[w] < t:
                    if self.stamp[c2] == t:
                        e_aa += 1
                    else:
                        e_self += 1
                else:
                    e_au += 1
                    self.hits[w] += 1
                    if self.ir[w] < 0:
                        self.ir[w] = t
                        self.new[nn] = w
                        nn += 1
            for h in range(d + 1):
                self.H[h] = 0
            for i in range(nn):
                w = self.new[i]
                self.H[self.hits[w]] += 1
                self.hits[w] = 0
            count += nn
            P = 0
            for v in range(n):
                if self.ir[v] >= 0:
                    P += self.free[v]
            if record:
                self.rows["P"].append(P)
                self.rows["A"].append(na)
                self.rows["eAA"].append(e_aa)
                self.rows["eself"].append(e_self)
                self.rows["eAU"].append(e_au)
                self.rows["H"].append([self.H[h] for h in range(d + 1)])
        if complete_matching and self.size:
            _shuffle(&self.pool[0], self.size, rng)
            _pair_consecutive(&self.pool[0], self.size, &self.partner[0])
        done[0] = count == n
        return t


def incremental_run(Py_ssize_t n, Py_ssize_t d, object bg, bint complete_matching, Py_ssize_t max_rounds):
    """Push protocol co-sampled with the configuration model by deferred exposure."""
    cdef bitgen_t* rng = _bitgen(bg)
    cdef _Exposure ex = _Exposure(n, d)
    cdef bint done
    cdef Py_ssize_t t
    with bg.lock:
        t = ex.run(rng, complete_matching, max_rounds, True, &done)
    rows = ex.rows
    return {
        "partner": np.asarray(ex.partner).copy(),
        "inform_round": np.asarray(ex.ir).copy(),
        "rounds": t,
        "P": np.asarray(rows["P"], dtype=np.int64),
        "A": np.asarray(rows["A"], dtype=np.int64),
        "e_AA": np.asarray(rows["eAA"], dtype=np.int64),
        "e_self": np.asarray(rows["eself"], dtype=np.int64),
        "e_AU": np.asarray(rows["eAU"], dtype=np.int64),
        "H": np.asarray(rows["H"], dtype=np.int64).reshape(-1, d + 1),
    }


def batch_incremental_T(Py_ssize_t n, Py_ssize_t d, Py_ssize_t runs, object bg,
                        bint require_simple, Py_ssize_t max_attempts, Py_ssize_t max_rounds):
    cdef bitgen_t* rng = _bitgen(bg)
    cdef _Exposure ex = _Exposure(n, d)
    cdef Py_ssize_t r, a, t, attempts = 0
    cdef bint ok, done
    out = np.empty(runs, dtype=np.int64)
    cdef int64_t[::1] outv = out
    with bg.lock:
        for r in range(runs):
            ok = False
            for a in range(max_attempts):
                attempts += 1
                t = ex.run(rng, require_simple, max_rounds, False, &done)
                if not require_simple or _simple(&ex.partner[0], n, d):
                    ok = True
                    break
            if not ok:
                raise SamplingError("no simple configuration within max_attempts", attempts)
            outv[r] = t if done else -1
    return out, attempts
