"""Kernel selection: compiled extension when available, pure Python otherwise.

``QAEVAL_PURE_PYTHON=1`` forces the fallback; ``BACKEND`` reports which
implementation is active. ``benchmarks/bench_kernels.py`` compares the two.
"""

import os
from array import array


def _select_backend():
    if os.environ.get("QAEVAL_PURE_PYTHON", "") not in ("", "0"):
        from qaeval import _kernels_py

        return _kernels_py.lcs_length_ids, "python"
    try:
        from qaeval import _kernels  # type: ignore[attr-defined]

        return _kernels.lcs_length_ids, "compiled"
    except ImportError:
        from qaeval import _kernels_py

        return _kernels_py.lcs_length_ids, "python"


_lcs_length_ids, BACKEND = _select_backend()


def _intern(a, b):
    """Map two token sequences onto dense int ids sharing one vocabulary."""
    ids: dict = {}
    xa = array("i", (ids.setdefault(t, len(ids)) for t in a))
    xb = array("i", (ids.setdefault(t, len(ids)) for t in b))
    return xa, xb


def lcs_length(a, b) -> int:
    """Length of the longest common subsequence of two token sequences.

    Tokens may be any hashable values; they are interned to ints before
    the kernel runs.
    """
    xa, xb = _intern(a, b)
    return _lcs_length_ids(xa, xb)
