"""Benchmark the compiled band kernels against the numpy fallback.

Run from the repository root:

    python3 benchmarks/bench_bandops.py

Both backends are imported directly so one process can time the two
side by side; `backends` itself picks the compiled one at import unless
BANDCLT_PURE_PYTHON is set.
"""

from __future__ import annotations

import time

import numpy as np

from bandclt import _bandops_py
from bandclt.matgen import BandSpec, EntryLaw, Topology, sample
from bandclt.profiles import PeriodizedProfile, VarianceProfile

try:
    from bandclt import _bandops
except ImportError:
    _bandops = None


def _make(n: int, b: int):
    profile = PeriodizedProfile(base=VarianceProfile.uniform(), nu=0.0)
    spec = BandSpec(n=n, b_n=b, nu=0.0, topology=Topology.PERIODIC_ZERO,
                    profile=profile)
    return sample(spec, EntryLaw(), seed=1, replicate_index=0)


def _time(fn, repeats: int) -> float:
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench(n: int, b: int, repeats: int = 5) -> None:
    m = _make(n, b)
    v = np.linspace(0, 1, n) + 0.5j
    cases = [
        ("band_mul", lambda ops: ops.band_mul(m.bands, b, m.bands, b, True)),
        ("band_diag_inner",
         lambda ops: ops.band_diag_inner(m.bands, b, m.bands, b, True)),
        ("band_matvec", lambda ops: ops.band_matvec(m.bands, b, v, True)),
    ]
    print(f"n={n} b_n={b}")
    for name, call in cases:
        t_py = _time(lambda: call(_bandops_py), repeats)
        if _bandops is None:
            print(f"  {name:<16} python {t_py*1e3:8.2f} ms   (no compiled build)")
            continue
        t_cy = _time(lambda: call(_bandops), repeats)
        print(f"  {name:<16} python {t_py*1e3:8.2f} ms   "
              f"cython {t_cy*1e3:8.2f} ms   speedup {t_py/t_cy:5.1f}x")


if __name__ == "__main__":
    for n, b in [(1000, 7), (1000, 50), (1000, 499), (4000, 12)]:
        bench(n, b)
