# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled LCS kernel.

The longest-common-subsequence table is the only quadratic inner loop in
the package (ROUGE-L runs it once per scored pair, and verbose answers
reach hundreds of tokens), so it is the one piece worth compiling. The
pure-Python twin lives in ``_kernels_py`` and must match this result for
all inputs.
"""

from libc.stdlib cimport free, malloc


def lcs_length_ids(const int[::1] a, const int[::1] b) -> int:
    """Length of the longest common subsequence of two id sequences."""
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t m = b.shape[0]
    if n == 0 or m == 0:
        return 0

    cdef const int[::1] longer = a if n >= m else b
    cdef const int[::1] shorter = b if n >= m else a
    cdef Py_ssize_t nl = longer.shape[0]
    cdef Py_ssize_t ns = shorter.shape[0]

    cdef int *prev = <int *> malloc((ns + 1) * sizeof(int))
    cdef int *curr = <int *> malloc((ns + 1) * sizeof(int))
    if prev == NULL or curr == NULL:
        free(prev)
        free(curr)
        raise MemoryError()

    cdef Py_ssize_t i, j
    cdef int x, up, left, result
    cdef int *tmp
    try:
        for j in range(ns + 1):
            prev[j] = 0
            curr[j] = 0
        for i in range(nl):
            x = longer[i]
            for j in range(ns):
                if x == shorter[j]:
                    curr[j + 1] = prev[j] + 1
                else:
                    up = prev[j + 1]
                    left = curr[j]
                    curr[j + 1] = up if up >= left else left
            tmp = prev
            prev = curr
            curr = tmp
        result = prev[ns]
    finally:
        free(prev)
        free(curr)
    return result
