"""Benchmark the numba kernels against the pure-numpy fallback.

Runs the two hot kernels on representative workloads:

* bit-packed GF(2) rank of a surface boundary matrix in sublevel entry
  order (the inner loop of the threshold scan), and
* lower-link classification of every vertex (the inner loop of the PL
  critical-point census),

plus one end-to-end taut check.  Run under both backends:

    python benchmarks/bench_kernels.py
    LIE_TAUT_KERNELS=numpy python benchmarks/bench_kernels.py
"""

import time

import numpy as np

from lietaut import _kernels
from lietaut.fields import build_field
from lietaut.homology import kuiper_scan
from lietaut.morse import pl_critical_points, value_order
from lietaut.quadric import random_contact_element
from lietaut.surfaces import catalog_surface
from lietaut.verdicts import sample_rng, taut_check


def timeit(label, fn, repeat=3):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    print(f"  {label:<46} {best * 1e3:9.2f} ms")
    return best


def main():
    print(f"kernel backend: {_kernels.KERNEL_BACKEND}")

    surface = catalog_surface("clifford_torus", 48)
    complex_ = surface.complex()
    rng = np.random.default_rng(0)
    values = rng.normal(size=complex_.num_vertices)

    boundary = complex_.boundary_packed(2)
    nrows = len(complex_.simplices[1])
    # warm up jit compilation before timing
    _kernels.gf2_rank(boundary, nrows)
    timeit(
        f"gf2 rank, boundary {boundary.shape[0]} cols x {nrows} rows",
        lambda: _kernels.gf2_rank(boundary, nrows),
    )

    cps = np.arange(boundary.shape[0] + 1, dtype=np.int64)
    timeit(
        "gf2 rank with per-column checkpoints",
        lambda: _kernels.gf2_rank_checkpoints(boundary, nrows, cps),
    )

    pos = value_order(values)
    _kernels.classify_links(pos, surface.link_off, surface.link_vs)
    timeit(
        f"lower-link classification, {complex_.num_vertices} vertices",
        lambda: _kernels.classify_links(pos, surface.link_off, surface.link_vs),
    )

    def scan():
        kuiper_scan(complex_, values)

    timeit("sublevel injectivity scan (all thresholds)", scan, repeat=1)

    contact = random_contact_element(sample_rng(3, 0), 3)
    field = build_field(surface, "pencil_radius", contact=contact, min_base_angle=1e-6)

    def census():
        for _ in range(100):
            pl_critical_points(field)

    timeit("100 x PL critical census", census, repeat=1)

    def check():
        taut_check(surface, 50, seed=7)

    timeit("taut check, 50 samples, resolution 48", check, repeat=1)


if __name__ == "__main__":
    main()
