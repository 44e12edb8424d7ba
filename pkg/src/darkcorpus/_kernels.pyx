# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: MinHash hashing and the masking candidate scan.

Must agree bit-for-bit with ``darkcorpus._pykernels``.
"""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t
from cpython.unicode cimport Py_UNICODE_ISSPACE

cnp.import_array()

cdef uint64_t FNV_OFFSET = 0xcbf29ce484222325ULL
cdef uint64_t FNV_PRIME = 0x100000001b3ULL
cdef uint64_t MIX_MUL = 0xd6e8feb86659fd93ULL
cdef uint64_t MAX64 = 0xffffffffffffffffULL

BACKEND = "cython"


cdef inline uint64_t _fnv1a(const unsigned char* p, Py_ssize_t start, Py_ssize_t end) noexcept nogil:
    cdef uint64_t h = FNV_OFFSET
    cdef Py_ssize_t i
    for i in range(start, end):
        h = (h ^ p[i]) * FNV_PRIME
    return h


def hash_strings(list items):
    """FNV-1a 64 of each bytes object."""
    cdef Py_ssize_t k, n = len(items)
    cdef bytes s
    cdef const unsigned char* p
    out = np.empty(n, dtype=np.uint64)
    cdef uint64_t[::1] o = out
    for k in range(n):
        s = items[k]
        p = s
        o[k] = _fnv1a(p, 0, len(s))
    return out


def shingle_hashes(bytes buf, Py_ssize_t n):
    """Hashes of every n-word window of a single-space-separated buffer."""
    cdef const unsigned char* p = buf
    cdef Py_ssize_t L = len(buf)
    cdef Py_ssize_t i, w, nwords
    if L == 0:
        return np.full(1, FNV_OFFSET, dtype=np.uint64)
    nwords = 1
    for i in range(L):
        if p[i] == 32:
            nwords += 1
    if nwords < n:
        return np.full(1, _fnv1a(p, 0, L), dtype=np.uint64)
    starts_arr = np.empty(nwords + 1, dtype=np.intp)
    cdef Py_ssize_t[::1] starts = starts_arr
    starts[0] = 0
    w = 1
    for i in range(L):
        if p[i] == 32:
            starts[w] = i + 1
            w += 1
    # sentinel: one past the end plus the virtual separator
    starts[nwords] = L + 1
    cdef Py_ssize_t count = nwords - n + 1
    out = np.empty(count, dtype=np.uint64)
    cdef uint64_t[::1] o = out
    with nogil:
        for w in range(count):
            o[w] = _fnv1a(p, starts[w], starts[w + n] - 1)
    return out


def minhash(const uint64_t[::1] hashes, const uint64_t[::1] a, const uint64_t[::1] b):
    """Per-permutation minimum of mix(a_i * x + b_i) over all hashes x."""
    cdef Py_ssize_t m = a.shape[0]
    cdef Py_ssize_t n = hashes.shape[0]
    cdef Py_ssize_t i, j
    cdef uint64_t x, v
    out = np.empty(m, dtype=np.uint64)
    cdef uint64_t[::1] sig = out
    with nogil:
        for i in range(m):
            sig[i] = MAX64
        for j in range(n):
            x = hashes[j]
            for i in range(m):
                v = a[i] * x + b[i]
                v = (v ^ (v >> 32)) * MIX_MUL
                v = v ^ (v >> 32)
                if v < sig[i]:
                    sig[i] = v
    return out


def text_signature(bytes buf, Py_ssize_t n, const uint64_t[::1] a, const uint64_t[::1] b):
    return minhash(shingle_hashes(buf, n), a, b)


def candidate_spans(str text, Py_ssize_t min_len):
    """(start, end) of every whitespace-delimited token that could hold an
    identifier: one containing '@', ':', digit-dot-digit or "www." (any
    case), or at least ``min_len`` chars long."""
    cdef Py_ssize_t i, n = len(text), start = -1, wrun = 0
    cdef Py_UCS4 c, p1 = 0, p2 = 0
    cdef bint hit = False
    out = []
    for i in range(n + 1):
        if i < n:
            c = text[i]
        else:
            c = 32
        if Py_UNICODE_ISSPACE(c):
            if start >= 0:
                if hit or i - start >= min_len:
                    out.append((start, i))
                start = -1
            continue
        if start < 0:
            start = i
            hit = False
            wrun = 0
            p1 = 0
            p2 = 0
        if not hit:
            if c == 64 or c == 58:
                hit = True
            elif c == 46:
                if wrun >= 3:
                    hit = True
            elif 48 <= c <= 57 and p1 == 46 and 48 <= p2 <= 57:
                hit = True
            if c == 119 or c == 87:
                wrun += 1
            else:
                wrun = 0
            p2 = p1
            p1 = c
    return out
