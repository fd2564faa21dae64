#!/usr/bin/env python3
"""Benchmark: compiled Cython kernels against the pure-numpy fallback.

Times the three hot kernels on solver-realistic workloads plus one short
end-to-end stiff run per backend, and prints a speedup table. Build the
extension first for a meaningful comparison:

    python setup.py build_ext --inplace
    python benchmarks/bench_kernels.py
"""

import pathlib
import sys
import time

import numpy as np

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from msdarcy.kernels import available_backends  # noqa: E402


def _workload(n, cells, seed=0):
    rng = np.random.default_rng(seed)
    r_pad = np.ascontiguousarray(rng.uniform(0.8, 1.2, (n, cells + 4)))
    m_pad = np.ascontiguousarray(rng.uniform(-0.1, 0.1, (n, cells + 4)))
    k = np.ones(n)
    gamma = np.full(n, 2.0)
    mob = np.linspace(1.0, 2.0, n)
    lam = np.full((n, n), 0.5)
    np.fill_diagonal(lam, 0.0)
    zero = np.zeros((n, n))
    return r_pad, m_pad, k, gamma, mob, lam, zero


def _time(fn, repeats=200):
    fn()  # warm up
    t0 = time.perf_counter()
    for _ in range(repeats):
        fn()
    return (time.perf_counter() - t0) / repeats


def bench_kernels(n=2, cells=1024):
    r_pad, m_pad, k, gamma, mob, lam, zero = _workload(n, cells)
    r = np.ascontiguousarray(r_pad[:, 2:-2])
    m = np.ascontiguousarray(m_pad[:, 2:-2])
    rp = np.ascontiguousarray(r_pad[:, 1:-1])
    rows = []
    for name, impl in available_backends().items():
        rows.append(
            (
                name,
                _time(lambda: impl.hyperbolic_update(r_pad, m_pad, k, gamma, 0.01, True)),
                _time(lambda: impl.source_update(r, m, mob, lam, zero, zero, 0.5)),
                _time(lambda: impl.parabolic_update(rp, mob, k, gamma, lam, zero, zero, 0.01)),
            )
        )
    return rows


def bench_end_to_end():
    from msdarcy import kernels as kmod
    from msdarcy.harness import well_prepared_init
    from msdarcy.hyperbolic import HyperbolicConfig, run
    from msdarcy.presets import two_species_scenario

    sc = two_species_scenario(n_cells=512, t_end=0.1)
    rows = []
    saved = {}
    names = ("max_signal_speed", "hyperbolic_update", "source_update", "parabolic_update")
    for fn in names:
        saved[fn] = getattr(kmod, fn)
    try:
        for name, impl in available_backends().items():
            for fn in names:
                setattr(kmod, fn, getattr(impl, fn))
            snap0, _ = well_prepared_init(sc, 0.1)
            cfg = HyperbolicConfig(
                epsilon=0.1, cfl=0.2, t_end=0.1, spatial_order=2, output_times=(0.1,)
            )
            t0 = time.perf_counter()
            run(sc.model, snap0, sc.grid, cfg)
            rows.append((name, time.perf_counter() - t0))
    finally:
        for fn, val in saved.items():
            setattr(kmod, fn, val)
    return rows


def main():
    backends = available_backends()
    print(f"backends available: {', '.join(backends)}")
    if "compiled" not in backends:
        print("note: compiled extension not built; run `python setup.py build_ext --inplace`")

    print("\nper-call kernel timings (n=2, 1024 cells):")
    header = f"{'backend':<10s} {'hyperbolic':>12s} {'source':>12s} {'parabolic':>12s}"
    print(header)
    rows = bench_kernels()
    base = {name: (h, s, p) for name, h, s, p in rows}
    for name, h, s, p in rows:
        print(f"{name:<10s} {h * 1e6:>10.1f}us {s * 1e6:>10.1f}us {p * 1e6:>10.1f}us")
    if "python" in base and "compiled" in base:
        speedups = [base["python"][i] / base["compiled"][i] for i in range(3)]
        print(
            f"{'speedup':<10s} {speedups[0]:>11.1f}x {speedups[1]:>11.1f}x {speedups[2]:>11.1f}x"
        )

    print("\nend-to-end stiff run (n=2, 512 cells, eps=0.1, T=0.1):")
    for name, seconds in bench_end_to_end():
        print(f"{name:<10s} {seconds:>10.3f}s")


if __name__ == "__main__":
    main()
