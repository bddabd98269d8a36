"""Pure-Python kernels, used when the compiled extension is unavailable.

The RNG is xoshiro256** (Blackman & Vigna, 2018) seeded through SplitMix64.
Uniform doubles take the top 53 bits of each output; normals use the basic
Box-Muller transform on consecutive uniform pairs, so ``n`` normals always
consume ``2 * ceil(n / 2)`` uniforms.
"""

import math

import numpy as np

MASK64 = (1 << 64) - 1
TWO_PI = 6.283185307179586
INV_2_53 = 1.0 / 9007199254740992.0


def _rotl(x, k):
    return ((x << k) | (x >> (64 - k))) & MASK64


def _step(s0, s1, s2, s3):
    result = (_rotl((s1 * 5) & MASK64, 7) * 9) & MASK64
    t = (s1 << 17) & MASK64
    s2 ^= s0
    s3 ^= s1
    s1 ^= s2
    s0 ^= s3
    s2 ^= t
    s3 = _rotl(s3, 45)
    return result, s0, s1, s2, s3


def _load(state):
    return tuple(int(v) for v in state)


def _store(state, s):
    state[:] = np.array(s, dtype=np.uint64)


def fill_u64(state, out):
    s0, s1, s2, s3 = _load(state)
    for i in range(out.shape[0]):
        r, s0, s1, s2, s3 = _step(s0, s1, s2, s3)
        out[i] = r
    _store(state, (s0, s1, s2, s3))


def fill_uniform(state, out):
    s0, s1, s2, s3 = _load(state)
    for i in range(out.shape[0]):
        r, s0, s1, s2, s3 = _step(s0, s1, s2, s3)
        out[i] = (r >> 11) * INV_2_53
    _store(state, (s0, s1, s2, s3))


def fill_normal(state, out):
    s0, s1, s2, s3 = _load(state)
    n = out.shape[0]
    vals = [0.0] * n
    i = 0
    while i < n:
        r, s0, s1, s2, s3 = _step(s0, s1, s2, s3)
        u1 = 1.0 - (r >> 11) * INV_2_53
        r, s0, s1, s2, s3 = _step(s0, s1, s2, s3)
        u2 = (r >> 11) * INV_2_53
        rad = math.sqrt(-2.0 * math.log(u1))
        vals[i] = rad * math.cos(TWO_PI * u2)
        if i + 1 < n:
            vals[i + 1] = rad * math.sin(TWO_PI * u2)
        i += 2
    out[:] = vals
    _store(state, (s0, s1, s2, s3))


def ar1_filter(innov, phi, x0):
    innov = np.asarray(innov, dtype=np.float64)
    n = innov.shape[0]
    out = [0.0] * n
    if n == 0:
        return np.empty(0)
    prev = float(x0)
    out[0] = prev
    for t, e in enumerate(innov.tolist()[1:], start=1):
        prev = phi * prev + e
        out[t] = prev
    return np.array(out, dtype=np.float64)


def bartlett_lrv(e, lags):
    e = np.asarray(e, dtype=np.float64)
    n = e.shape[0]
    if n == 0:
        return 0.0
    total = float(e @ e) / n
    for k in range(1, min(lags, n - 1) + 1):
        total += 2.0 * (1.0 - k / (lags + 1.0)) * (float(e[k:] @ e[:-k]) / n)
    return total
