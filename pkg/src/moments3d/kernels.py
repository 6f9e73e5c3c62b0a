"""Hot inner loops, each with a numba and a pure-numpy implementation.

The public names ``harmonic_table`` and ``hahn_recurrence`` dispatch to the
numba variants unless ``MOMENTS3D_DISABLE_NUMBA`` is set or numba is missing.
``separable_contract`` always uses the BLAS-backed numpy variant, which is
faster than the compiled loop at realistic grid sizes.  Both variants are
importable under ``*_numpy`` / ``*_numba`` for testing and benchmarking.
"""

from __future__ import annotations

import math

import numpy as np

from ._accel import USE_NUMBA, njit

# ---------------------------------------------------------------------------
# separable triple contraction  T[p,q,r] = sum f[x,y,z] bx[p,x] by[q,y] bz[r,z]


def separable_contract_numpy(f: np.ndarray, bx: np.ndarray, by: np.ndarray, bz: np.ndarray) -> np.ndarray:
    t = np.tensordot(bx, f, axes=(1, 0))  # p, y, z
    t = np.tensordot(t, by, axes=(1, 1))  # p, z, q
    t = np.tensordot(t, bz, axes=(1, 1))  # p, q, r
    return t


@njit
def separable_contract_numba(f, bx, by, bz):
    nx, ny, nz = f.shape
    P, Q, R = bx.shape[0], by.shape[0], bz.shape[0]
    # x pass over flat (y, z) slabs: the n^3 stage, kept as contiguous axpy loops
    flat = np.ascontiguousarray(f).reshape(nx, ny * nz)
    t1 = np.zeros((P, ny * nz))
    for x in range(nx):
        row = flat[x]
        for p in range(P):
            w = bx[p, x]
            if w == 0.0:
                continue
            acc = t1[p]
            for j in range(ny * nz):
                acc[j] += w * row[j]
    t1 = t1.reshape(P, ny, nz)
    t2 = np.zeros((P, Q, nz))
    for p in range(P):
        for y in range(ny):
            for q in range(Q):
                w = by[q, y]
                for z in range(nz):
                    t2[p, q, z] += w * t1[p, y, z]
    out = np.zeros((P, Q, R))
    for p in range(P):
        for q in range(Q):
            for z in range(nz):
                v = t2[p, q, z]
                for r in range(R):
                    out[p, q, r] += bz[r, z] * v
    return out


# ---------------------------------------------------------------------------
# spherical harmonics Y[l, m, point] for 0 <= m <= l <= lmax


def _ylm_norms(lmax: int) -> np.ndarray:
    norms = np.zeros((lmax + 1, lmax + 1))
    for l in range(lmax + 1):
        for m in range(l + 1):
            norms[l, m] = math.sqrt(
                (2 * l + 1) / (4 * math.pi) * math.exp(math.lgamma(l - m + 1) - math.lgamma(l + m + 1))
            )
    return norms


def harmonic_table_numpy(cos_theta: np.ndarray, phi: np.ndarray, lmax: int) -> np.ndarray:
    c = np.asarray(cos_theta, dtype=np.float64)
    npts = c.shape[0]
    s = np.sqrt(np.clip((1.0 - c) * (1.0 + c), 0.0, None))
    plm = np.zeros((lmax + 1, lmax + 1, npts))
    pmm = np.ones(npts)
    for m in range(lmax + 1):
        if m > 0:
            pmm = -pmm * (2 * m - 1) * s
        plm[m, m] = pmm
        if m + 1 <= lmax:
            plm[m + 1, m] = c * (2 * m + 1) * pmm
        for l in range(m + 2, lmax + 1):
            plm[l, m] = (c * (2 * l - 1) * plm[l - 1, m] - (l + m - 1) * plm[l - 2, m]) / (l - m)
    phase = np.exp(1j * np.arange(lmax + 1)[:, None] * np.asarray(phi, dtype=np.float64)[None, :])
    out = plm * _ylm_norms(lmax)[:, :, None] * phase[None, :, :]
    return out


@njit
def _harmonic_table_numba(c, phi, norms, lmax):
    # points innermost so every write is contiguous
    npts = c.shape[0]
    out = np.zeros((lmax + 1, lmax + 1, npts), dtype=np.complex128)
    s = np.empty(npts)
    pmm = np.ones(npts)
    prev = np.empty(npts)
    cur = np.empty(npts)
    ph_re = np.empty(npts)
    ph_im = np.empty(npts)
    for i in range(npts):
        s[i] = math.sqrt(max((1.0 - c[i]) * (1.0 + c[i]), 0.0))
    for m in range(lmax + 1):
        for i in range(npts):
            if m > 0:
                pmm[i] = -pmm[i] * (2 * m - 1) * s[i]
            ph_re[i] = math.cos(m * phi[i])
            ph_im[i] = math.sin(m * phi[i])
            prev[i] = pmm[i]
            cur[i] = c[i] * (2 * m + 1) * pmm[i]
            w = norms[m, m] * pmm[i]
            out[m, m, i] = complex(w * ph_re[i], w * ph_im[i])
        if m + 1 <= lmax:
            for i in range(npts):
                w = norms[m + 1, m] * cur[i]
                out[m + 1, m, i] = complex(w * ph_re[i], w * ph_im[i])
        for l in range(m + 2, lmax + 1):
            for i in range(npts):
                nxt = (c[i] * (2 * l - 1) * cur[i] - (l + m - 1) * prev[i]) / (l - m)
                prev[i] = cur[i]
                cur[i] = nxt
                w = norms[l, m] * nxt
                out[l, m, i] = complex(w * ph_re[i], w * ph_im[i])
    return out


def harmonic_table_numba(cos_theta: np.ndarray, phi: np.ndarray, lmax: int) -> np.ndarray:
    c = np.ascontiguousarray(cos_theta, dtype=np.float64)
    p = np.ascontiguousarray(phi, dtype=np.float64)
    return _harmonic_table_numba(c, p, _ylm_norms(lmax), lmax)


# ---------------------------------------------------------------------------
# orthonormal Hahn three-term recurrence, filled in place from rows 0 and 1


def hahn_recurrence_numpy(values: np.ndarray, b: np.ndarray, e: np.ndarray) -> None:
    a = np.arange(values.shape[1], dtype=np.float64)
    for s in range(1, values.shape[0] - 1):
        values[s + 1] = ((a - b[s]) * values[s] - e[s] * values[s - 1]) / e[s + 1]


@njit
def hahn_recurrence_numba(values, b, e):
    S, N = values.shape
    for s in range(1, S - 1):
        for a in range(N):
            values[s + 1, a] = ((a - b[s]) * values[s, a] - e[s] * values[s - 1, a]) / e[s + 1]


# BLAS-backed tensordot beats the numba loop for n >= 32, so the contraction
# stays on numpy under both backends; the numba variant is kept for benchmarks.
separable_contract = separable_contract_numpy
if USE_NUMBA:
    harmonic_table = harmonic_table_numba
    hahn_recurrence = hahn_recurrence_numba
else:
    harmonic_table = harmonic_table_numpy
    hahn_recurrence = hahn_recurrence_numpy
