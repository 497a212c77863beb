# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled fraction-free pivoting kernel.

Same contract as ``_kernels_py``.  Rows whose entries all fit in 31 bits are
updated in C with 64-bit arithmetic (products then stay below 2^62); any
row with larger entries falls back to Python integers.
"""

from libc.stdlib cimport malloc, free
from libc.stdint cimport int64_t
from math import gcd

cdef int64_t LIMIT = 2147483647


cdef inline int64_t _gcd(int64_t a, int64_t b) noexcept nogil:
    if a < 0:
        a = -a
    if b < 0:
        b = -b
    while b:
        a, b = b, a % b
    return a


cdef bint _load(list row, int64_t* out, Py_ssize_t n):
    cdef Py_ssize_t j
    cdef object v
    for j in range(n):
        v = row[j]
        if not (-LIMIT < v < LIMIT):
            return False
        out[j] = v
    return True


def normalize(row, d=0):
    g = gcd(*row, d)
    if g > 1:
        row = [a // g for a in row]
        d //= g
    return row, d


def pivot(list tab, list dens, Py_ssize_t r, Py_ssize_t c):
    cdef list prow = tab[r]
    if prow[c] <= 0:
        raise ValueError("pivot entry must be positive")
    prow, _ = normalize(prow)
    tab[r] = prow
    cdef Py_ssize_t n = len(prow), k, j, nnz = 0
    cdef int64_t* pc = <int64_t*> malloc(n * sizeof(int64_t))
    cdef int64_t* buf = <int64_t*> malloc(n * sizeof(int64_t))
    cdef Py_ssize_t* nzi = <Py_ssize_t*> malloc(n * sizeof(Py_ssize_t))
    cdef bint small_p
    cdef int64_t p, f, g, dd
    cdef list row, new
    cdef object pobj = prow[c], fobj, dobj
    try:
        small_p = _load(prow, pc, n)
        for j in range(n):
            if prow[j]:
                nzi[nnz] = j
                nnz += 1
        for k in range(len(tab)):
            if k == r:
                continue
            row = tab[k]
            fobj = row[c]
            if not fobj:
                continue
            dobj = dens[k]
            if small_p and -LIMIT < dobj < LIMIT and _load(row, buf, n):
                p = pc[c]
                f = buf[c]
                for j in range(n):
                    buf[j] = buf[j] * p
                for j in range(nnz):
                    buf[nzi[j]] -= f * pc[nzi[j]]
                dd = (<int64_t> dobj) * p
                g = _gcd(dd, 0)
                for j in range(n):
                    if g == 1:
                        break
                    g = _gcd(g, buf[j])
                if g > 1:
                    for j in range(n):
                        buf[j] //= g
                    dd //= g
                tab[k] = [buf[j] for j in range(n)]
                dens[k] = dd
            else:
                new = [a * pobj for a in row]
                for j in range(nnz):
                    new[nzi[j]] -= fobj * prow[nzi[j]]
                dobj = dobj * pobj
                g2 = gcd(*new, dobj)
                if g2 > 1:
                    new = [a // g2 for a in new]
                    dobj //= g2
                tab[k] = new
                dens[k] = dobj
    finally:
        free(pc)
        free(buf)
        free(nzi)
