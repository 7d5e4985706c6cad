"""Compare the compiled LCS kernel against the pure-Python fallback.

Run:
    python benchmarks/bench_kernels.py [--lengths 50,200,800] [--repeat 5]

The two backends must agree exactly; this script asserts that on every
measured input before timing it.
"""

from __future__ import annotations

import argparse
import random
import time

from qaeval import _kernels_py
from qaeval.kernels import BACKEND, _intern
from qaeval.scorers.text import rouge_l, tokenize

try:
    from qaeval import _kernels as _compiled
except ImportError:
    _compiled = None


def synth_tokens(rng: random.Random, n: int) -> list:
    vocab = [f"w{i}" for i in range(max(8, n // 4))]
    return [rng.choice(vocab) for _ in range(n)]


def time_call(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--lengths", default="50,200,800,2000")
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    print(f"active backend at import: {BACKEND}")
    if _compiled is None:
        print("compiled kernel unavailable; timing pure Python only")

    rng = random.Random(args.seed)
    header = f"{'n':>6}  {'pure (ms)':>12}  {'compiled (ms)':>14}  {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for n in [int(x) for x in args.lengths.split(",")]:
        a = synth_tokens(rng, n)
        b = synth_tokens(rng, n)
        ia, ib = _intern(a, b)
        pure_ms = time_call(lambda: _kernels_py.lcs_length_ids(ia, ib), args.repeat) * 1e3
        if _compiled is not None:
            assert _compiled.lcs_length_ids(ia, ib) == _kernels_py.lcs_length_ids(ia, ib)
            comp_ms = time_call(lambda: _compiled.lcs_length_ids(ia, ib), args.repeat) * 1e3
            print(f"{n:>6}  {pure_ms:>12.3f}  {comp_ms:>14.3f}  {pure_ms / comp_ms:>7.1f}x")
        else:
            print(f"{n:>6}  {pure_ms:>12.3f}  {'-':>14}  {'-':>8}")

    # End-to-end: one verbose-answer metric call through the public path.
    candidate = " ".join(synth_tokens(rng, 400))
    reference = " ".join(synth_tokens(rng, 120))
    start = time.perf_counter()
    score = rouge_l(candidate, reference)
    elapsed_ms = (time.perf_counter() - start) * 1e3
    print(f"\nrouge_l on {len(tokenize(candidate))}x{len(tokenize(reference))} tokens "
          f"({BACKEND}): {score:.4f} in {elapsed_ms:.3f} ms")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
