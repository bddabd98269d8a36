# cython: language_level=3
"""Compiled hot loops. ``_kernels_py`` is the reference implementation;
both must produce bit-identical RNG and AR(1) output."""

import numpy as np
cimport numpy as cnp
from libc.math cimport cos, log, sin, sqrt
from libc.stdint cimport uint64_t

cnp.import_array()

cdef double TWO_PI = 6.283185307179586
cdef double INV_2_53 = 1.0 / 9007199254740992.0


cdef inline uint64_t rotl(uint64_t x, int k) nogil:
    return (x << k) | (x >> (64 - k))


cdef inline uint64_t next_u64(uint64_t* s) nogil:
    cdef uint64_t result = rotl(s[1] * 5, 7) * 9
    cdef uint64_t t = s[1] << 17
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = rotl(s[3], 45)
    return result


cdef inline double next_double(uint64_t* s) nogil:
    return <double>(next_u64(s) >> 11) * INV_2_53


def fill_u64(cnp.uint64_t[::1] state, cnp.uint64_t[::1] out):
    cdef uint64_t s[4]
    cdef Py_ssize_t i
    for i in range(4):
        s[i] = state[i]
    for i in range(out.shape[0]):
        out[i] = next_u64(s)
    for i in range(4):
        state[i] = s[i]


def fill_uniform(cnp.uint64_t[::1] state, double[::1] out):
    cdef uint64_t s[4]
    cdef Py_ssize_t i
    for i in range(4):
        s[i] = state[i]
    for i in range(out.shape[0]):
        out[i] = next_double(s)
    for i in range(4):
        state[i] = s[i]


def fill_normal(cnp.uint64_t[::1] state, double[::1] out):
    cdef uint64_t s[4]
    cdef Py_ssize_t i = 0, n = out.shape[0]
    cdef double u1, u2, r
    for i in range(4):
        s[i] = state[i]
    i = 0
    while i < n:
        u1 = 1.0 - next_double(s)
        u2 = next_double(s)
        r = sqrt(-2.0 * log(u1))
        out[i] = r * cos(TWO_PI * u2)
        if i + 1 < n:
            out[i + 1] = r * sin(TWO_PI * u2)
        i += 2
    for i in range(4):
        state[i] = s[i]


def ar1_filter(const double[::1] innov, double phi, double x0):
    cdef Py_ssize_t n = innov.shape[0], t
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    if n == 0:
        return out
    o[0] = x0
    for t in range(1, n):
        o[t] = phi * o[t - 1] + innov[t]
    return out


def bartlett_lrv(const double[::1] e, Py_ssize_t lags):
    cdef Py_ssize_t n = e.shape[0], k, t
    cdef double gamma, total = 0.0
    if n == 0:
        return 0.0
    for t in range(n):
        total += e[t] * e[t]
    total /= n
    for k in range(1, lags + 1):
        if k >= n:
            break
        gamma = 0.0
        for t in range(k, n):
            gamma += e[t] * e[t - k]
        total += 2.0 * (1.0 - k / (lags + 1.0)) * (gamma / n)
    return total
