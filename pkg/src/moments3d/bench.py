"""Timing and memory harness for the moment engines and the raw kernels.

All numbers are machine-dependent.  Timing is split into two phases per
family: ``basis`` (building the polynomial tables alone) and ``total`` (a full
moment computation with caches cleared, which includes the basis phase).

Memory is the tracemalloc peak of Python/numpy allocations made during one
full computation, divided by ``n**3``.  Allocations made inside numba-compiled
code bypass tracemalloc, so with the numba backend the figure counts only the
numpy side.  Compare families within one run, not across machines.
"""

from __future__ import annotations

import statistics
import time
import tracemalloc
from dataclasses import dataclass

import numpy as np

from . import _accel, kernels
from .basis import (
    HahnParams,
    _hyper_row,
    hahn_recurrence_coefficients,
    hahn_recurrence_table,
    hahn_seed_rows,
    hahn_table,
    legendre_table,
    zernike_radial,
)
from .moments import _CHUNK, FAMILIES, _ball_points, _field, compute_moments, spherical_indices


@dataclass(frozen=True)
class PhaseTiming:
    median_ns_per_voxel: float
    iqr_ns_per_voxel: float
    min_ns_per_voxel: float


@dataclass(frozen=True)
class FamilyBench:
    family: str
    n: int
    repeats: int
    basis: PhaseTiming
    total: PhaseTiming
    peak_bytes_per_voxel: float


def _summary(samples_ns: list[float], voxels: int) -> PhaseTiming:
    per = np.asarray(samples_ns) / voxels
    q1, q3 = np.quantile(per, [0.25, 0.75])
    return PhaseTiming(float(np.median(per)), float(q3 - q1), float(per.min()))


def _clear_caches():
    hahn_table.cache_clear()
    _hyper_row.cache_clear()


def _basis_phase(family: str, f: np.ndarray, max_order: int, params: HahnParams):
    n = f.shape[0]
    if family == "geometric":
        c = np.arange(1, n + 1, dtype=np.float64)
        return np.vstack([c**p for p in range(max_order + 1)])
    if family == "legendre":
        return legendre_table(max_order, (2.0 * np.arange(n) - n + 1.0) / n)
    if family == "hahn":
        return hahn_recurrence_table(params, max_order).values
    _, rho, ct, phi, _ = _ball_points(f)
    for start in range(0, rho.size, _CHUNK):
        kernels.harmonic_table(ct[start:start + _CHUNK], phi[start:start + _CHUNK], max_order)
    if family == "zernike":
        pairs = sorted({(s, l) for s, l, _ in spherical_indices(max_order)})
        return [zernike_radial(s, l, rho) for s, l in pairs]
    return [rho**s for s in range(max_order + 1)]


def _time(fn, repeats: int) -> list[float]:
    out = []
    for _ in range(repeats):
        _clear_caches()
        t0 = time.perf_counter_ns()
        fn()
        out.append(float(time.perf_counter_ns() - t0))
    return out


def peak_bytes(fn) -> int:
    """tracemalloc peak over one call, relative to the allocation level at entry."""
    _clear_caches()
    tracemalloc.start()
    try:
        tracemalloc.reset_peak()
        base, _ = tracemalloc.get_traced_memory()
        fn()
        _, peak = tracemalloc.get_traced_memory()
    finally:
        tracemalloc.stop()
    return max(peak - base, 0)


def bench_family(family: str, grid, repeats: int = 50, max_order: int = 8, params: HahnParams | None = None) -> FamilyBench:
    f, n, _, _ = _field(grid)
    params = params if params is not None else HahnParams(0.0, 0.0, n)
    # warm-up compiles numba kernels and fills import-time caches
    compute_moments(family, f, max_order, params)
    voxels = n**3
    basis = _time(lambda: _basis_phase(family, f, max_order, params), repeats)
    total = _time(lambda: compute_moments(family, f, max_order, params), repeats)
    mem = peak_bytes(lambda: compute_moments(family, f, max_order, params))
    return FamilyBench(family, n, repeats, _summary(basis, voxels), _summary(total, voxels), mem / voxels)


def bench_families(grid, repeats: int = 50, families=FAMILIES, max_order: int = 8,
                   params: HahnParams | None = None) -> list[FamilyBench]:
    return [bench_family(fam, grid, repeats, max_order, params) for fam in families]


def format_report(results: list[FamilyBench]) -> str:
    lines = [
        f"# machine-dependent timings; backend={_accel.backend_name()}",
        "family,n,repeats,basis_median_ns_per_voxel,basis_iqr,total_median_ns_per_voxel,total_iqr,peak_bytes_per_voxel",
    ]
    for r in results:
        lines.append(
            f"{r.family},{r.n},{r.repeats},{r.basis.median_ns_per_voxel:.4g},{r.basis.iqr_ns_per_voxel:.3g},"
            f"{r.total.median_ns_per_voxel:.4g},{r.total.iqr_ns_per_voxel:.3g},{r.peak_bytes_per_voxel:.4g}"
        )
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# numpy vs numba kernels


def _kernel_cases(n: int, max_order: int, rng: np.random.Generator):
    f = (rng.random((n, n, n)) < 0.3).astype(np.float64)
    basis = rng.standard_normal((max_order + 1, n))
    pts = n * n
    ct = rng.uniform(-1, 1, pts)
    phi = rng.uniform(-np.pi, np.pi, pts)
    hahn = HahnParams(0.0, 0.0, n)
    b, e = hahn_recurrence_coefficients(hahn, min(max_order, n - 1))
    b_e = (b, e, hahn_seed_rows(hahn))

    def hahn_case(fn):
        b, e, (r0, r1) = b_e
        vals = np.zeros((len(b), n))
        vals[0], vals[1] = r0, r1
        fn(vals, b, e)
        return vals

    cases = {
        "hahn_recurrence": (
            lambda: hahn_case(kernels.hahn_recurrence_numpy),
            lambda: hahn_case(kernels.hahn_recurrence_numba),
        ),
        "separable_contract": (
            lambda: kernels.separable_contract_numpy(f, basis, basis, basis),
            lambda: kernels.separable_contract_numba(f, basis, basis, basis),
        ),
        "harmonic_table": (
            lambda: kernels.harmonic_table_numpy(ct, phi, max_order),
            lambda: kernels.harmonic_table_numba(ct, phi, max_order),
        ),
    }
    return cases


def bench_kernels(n: int = 32, repeats: int = 20, max_order: int = 8, seed: int = 0) -> list[dict]:
    """Time each kernel under both backends and report the largest disagreement."""
    if not _accel.HAVE_NUMBA:
        raise RuntimeError("numba is not installed; nothing to compare against")
    rng = np.random.default_rng(seed)
    rows = []
    for name, (np_fn, nb_fn) in _kernel_cases(n, max_order, rng).items():
        a, b = np_fn(), nb_fn()  # warm-up and agreement check
        scale = max(float(np.max(np.abs(a))), 1e-300)
        diff = float(np.max(np.abs(a - b))) / scale
        t_np = _time(np_fn, repeats)
        t_nb = _time(nb_fn, repeats)
        rows.append(
            {
                "kernel": name,
                "numpy_median_us": statistics.median(t_np) / 1e3,
                "numba_median_us": statistics.median(t_nb) / 1e3,
                "speedup": statistics.median(t_np) / statistics.median(t_nb),
                "max_rel_diff": diff,
            }
        )
    return rows


def format_kernel_report(rows: list[dict]) -> str:
    lines = ["# machine-dependent timings", "kernel,numpy_median_us,numba_median_us,speedup,max_rel_diff"]
    for r in rows:
        lines.append(
            f"{r['kernel']},{r['numpy_median_us']:.4g},{r['numba_median_us']:.4g},{r['speedup']:.3g},{r['max_rel_diff']:.2e}"
        )
    return "\n".join(lines) + "\n"
