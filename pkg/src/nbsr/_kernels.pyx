# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled scoring and update loops over the hashed weight table."""

from libc.stdint cimport uint64_t


cdef inline uint64_t _mix(uint64_t f, uint64_t t) noexcept nogil:
    cdef uint64_t z = (f * 0x9E3779B97F4A7C15ULL) ^ t
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


def bucket(uint64_t f, uint64_t t, uint64_t mask):
    return _mix(f, t) & mask


def score(const double[::1] weights, const uint64_t[::1] feats,
          const uint64_t[::1] trans, uint64_t mask, double[::1] out):
    cdef Py_ssize_t i, j
    cdef double s
    with nogil:
        for j in range(trans.shape[0]):
            s = 0.0
            for i in range(feats.shape[0]):
                s += weights[_mix(feats[i], trans[j]) & mask]
            out[j] = s


def update(double[::1] weights, double[::1] totals, const uint64_t[::1] feats,
           uint64_t good, uint64_t bad, uint64_t mask, double step):
    cdef Py_ssize_t i
    cdef uint64_t b
    with nogil:
        for i in range(feats.shape[0]):
            b = _mix(feats[i], good) & mask
            weights[b] += 1.0
            totals[b] += step
            b = _mix(feats[i], bad) & mask
            weights[b] -= 1.0
            totals[b] -= step
