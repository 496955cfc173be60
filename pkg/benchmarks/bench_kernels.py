"""Side-by-side timing of the python and compiled kernel backends.

Run from the repository root after building the extension in place:

    python3 setup.py build_ext --inplace
    python3 benchmarks/bench_kernels.py [n_symbols]

Each kernel runs on identical inputs through both backends; outputs are
checked equal before a timing is reported, so a drifting backend fails
loudly instead of producing a meaningless number.
"""

import sys
import time

import numpy as np

from bidbg import _kernels_py as pyk
from bidbg.kernels import backend_module

try:
    compiled = backend_module("compiled")
except ImportError:
    sys.exit("compiled backend not built; run: python3 setup.py build_ext --inplace")


def timed(fn, *args, repeat=3):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return out, best


def same(a, b):
    if isinstance(a, tuple):
        return all(same(x, y) for x, y in zip(a, b))
    if isinstance(a, np.ndarray):
        return np.array_equal(a, b)
    return a == b


def main():
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 2_000_000
    k = 15
    rng = np.random.default_rng(7)
    codes = rng.integers(0, 4, size=n).astype(np.uint8)
    seq = np.frombuffer(b"ACGT", dtype=np.uint8)[codes].tobytes()

    rows = []

    def bench(name, fn_args_py, fn_args_c):
        got_p, t_p = timed(*fn_args_py)
        got_c, t_c = timed(*fn_args_c)
        if not same(got_p, got_c):
            sys.exit("backend outputs differ for %s" % name)
        rows.append((name, t_p, t_c, t_p / t_c))
        return got_p

    bench("encode_codes", (pyk.encode_codes, seq), (compiled.encode_codes, seq))
    words = bench("pack_words", (pyk.pack_words, codes, k),
                  (compiled.pack_words, codes, k))
    bench("revcomp_words", (pyk.revcomp_words, words, k),
          (compiled.revcomp_words, words, k))
    u, v, ori = bench("edge_records", (pyk.edge_records_for_codes, codes, k),
                      (compiled.edge_records_for_codes, codes, k))
    perm = bench("radix_sort_records", (pyk.radix_sort_records, u, v, ori, k),
                 (compiled.radix_sort_records, u, v, ori, k))[0]
    mult = np.ones(len(u), dtype=np.uint32)
    bench("dedup_sorted", (pyk.dedup_sorted_records, u[perm], v[perm], ori[perm], mult),
          (compiled.dedup_sorted_records, u[perm], v[perm], ori[perm], mult))

    print("n_symbols=%d k=%d" % (n, k))
    print("%-20s %10s %10s %8s" % ("kernel", "python_s", "compiled_s", "speedup"))
    for name, tp, tc, sp in rows:
        print("%-20s %10.4f %10.4f %7.1fx" % (name, tp, tc, sp))


if __name__ == "__main__":
    main()
