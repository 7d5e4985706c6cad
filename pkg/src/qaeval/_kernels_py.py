"""Pure-Python twin of the compiled kernels.

Selected by :mod:`qaeval.kernels` when the extension module is missing or
explicitly disabled. Must stay result-identical to ``_kernels.pyx``.
"""


def lcs_length_ids(a, b) -> int:
    """Length of the longest common subsequence of two id sequences.

    Classic O(len(a) * len(b)) dynamic program kept to two rows, iterating
    the longer sequence on the outside so the rows stay short.
    """
    n, m = len(a), len(b)
    if n == 0 or m == 0:
        return 0
    if m > n:
        a, b = b, a
        n, m = m, n
    prev = [0] * (m + 1)
    curr = [0] * (m + 1)
    for i in range(n):
        x = a[i]
        for j in range(m):
            if x == b[j]:
                curr[j + 1] = prev[j] + 1
            else:
                up = prev[j + 1]
                left = curr[j]
                curr[j + 1] = up if up >= left else left
        prev, curr = curr, prev
    return prev[m]
