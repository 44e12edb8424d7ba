"""Pure-Python/numpy versions of the compiled kernels (fallback for ``_kernels``)."""

import functools
import re

import numpy as np

BACKEND = "numpy"

FNV_OFFSET = np.uint64(0xCBF29CE484222325)
FNV_PRIME = np.uint64(0x100000001B3)
MIX_MUL = np.uint64(0xD6E8FEB86659FD93)
_S32 = np.uint64(32)


def _fnv1a_py(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for byte in data:
        h = ((h ^ byte) * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return h


def hash_strings(items):
    return np.array([_fnv1a_py(s) for s in items], dtype=np.uint64)


def _fnv_ranges(arr: np.ndarray, starts: np.ndarray, ends: np.ndarray) -> np.ndarray:
    """Vectorised FNV-1a over byte ranges [starts[k], ends[k])."""
    lengths = ends - starts
    h = np.full(len(starts), FNV_OFFSET, dtype=np.uint64)
    if len(starts) == 0:
        return h
    last = len(arr) - 1
    for t in range(int(lengths.max())):
        active = lengths > t
        idx = np.minimum(starts + t, last)
        byte = arr[idx].astype(np.uint64)
        h = np.where(active, (h ^ byte) * FNV_PRIME, h)
    return h


def shingle_hashes(buf: bytes, n: int) -> np.ndarray:
    if not buf:
        return np.full(1, FNV_OFFSET, dtype=np.uint64)
    arr = np.frombuffer(buf, dtype=np.uint8)
    spaces = np.flatnonzero(arr == 32)
    nwords = len(spaces) + 1
    if nwords < n:
        return np.array([_fnv1a_py(buf)], dtype=np.uint64)
    starts = np.concatenate(([0], spaces + 1)).astype(np.intp)
    ends = np.concatenate((spaces, [len(arr)])).astype(np.intp)
    count = nwords - n + 1
    return _fnv_ranges(arr, starts[:count], ends[n - 1:])


_CHUNK = 4096


def minhash(hashes, a, b) -> np.ndarray:
    hashes = np.asarray(hashes, dtype=np.uint64)
    a = np.asarray(a, dtype=np.uint64)[None, :]
    b = np.asarray(b, dtype=np.uint64)[None, :]
    sig = np.full(a.shape[1], np.iinfo(np.uint64).max, dtype=np.uint64)
    for lo in range(0, len(hashes), _CHUNK):
        v = a * hashes[lo:lo + _CHUNK, None] + b
        v = (v ^ (v >> _S32)) * MIX_MUL
        v ^= v >> _S32
        np.minimum(sig, v.min(axis=0), out=sig)
    return sig


def text_signature(buf: bytes, n: int, a, b) -> np.ndarray:
    return minhash(shingle_hashes(buf, n), a, b)



@functools.lru_cache(maxsize=8)
def _candidate_re(min_len: int) -> re.Pattern:
    return re.compile(rf"(?<!\S)(?:\S{{{min_len},}}|\S*?(?:[@:]|[0-9]\.[0-9]|[wW]{{3}}\.)\S*)")


def candidate_spans(text: str, min_len: int) -> list[tuple[int, int]]:
    return [m.span() for m in _candidate_re(min_len).finditer(text)]
