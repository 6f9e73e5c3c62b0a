"""3D moment engines: geometric, complex, Legendre, Zernike and Hahn."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import kernels
from .basis import HahnParams, hahn_table, legendre_table, zernike_radial
from .voxel import VoxelGrid

FAMILIES = ("geometric", "complex", "legendre", "zernike", "hahn")
CUBE_FAMILIES = ("geometric", "legendre", "hahn")
SPHERICAL_FAMILIES = ("complex", "zernike")
COMPLEX_FAMILIES = SPHERICAL_FAMILIES
FEATURE_ORDER = 8
FEATURE_COUNT = 165


class MomentError(ValueError):
    pass


@lru_cache(maxsize=None)
def cube_indices(max_order: int) -> tuple[tuple[int, int, int], ...]:
    """``(p, q, r)`` with ``p+q+r <= max_order``: by total order, then lexicographic."""
    out = []
    for s in range(max_order + 1):
        for p in range(s + 1):
            for q in range(s - p + 1):
                out.append((p, q, s - p - q))
    return tuple(out)


@lru_cache(maxsize=None)
def spherical_indices(max_order: int) -> tuple[tuple[int, int, int], ...]:
    """``(s, l, m)``: ``l <= s`` with ``l == s (mod 2)``, ``|m| <= l``; ``m`` ascending."""
    out = []
    for s in range(max_order + 1):
        for l in range(s % 2, s + 1, 2):
            for m in range(-l, l + 1):
                out.append((s, l, m))
    return tuple(out)


def family_indices(family: str, max_order: int) -> tuple[tuple[int, int, int], ...]:
    if family in CUBE_FAMILIES:
        return cube_indices(max_order)
    if family in SPHERICAL_FAMILIES:
        return spherical_indices(max_order)
    raise MomentError(f"unknown moment family {family!r}")


@dataclass(frozen=True, eq=False)
class MomentSet:
    """Moments of one family in canonical index order.

    ``values`` is float64 for the real families and complex128 for
    ``complex`` / ``zernike``.
    """

    family: str
    max_order: int
    indices: tuple[tuple[int, int, int], ...]
    values: np.ndarray
    grid_n: int
    translate: tuple[float, float, float] = (0.0, 0.0, 0.0)
    scale: float = 1.0
    params: HahnParams | None = None
    diagnostics: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.indices)

    def __getitem__(self, index):
        try:
            pos = self._lookup[tuple(index)]
        except KeyError:
            raise KeyError(f"{self.family} moment {index} not computed") from None
        return self.values[pos]

    @property
    def _lookup(self) -> dict:
        cache = self.__dict__.get("_lookup_cache")
        if cache is None:
            cache = {idx: i for i, idx in enumerate(self.indices)}
            object.__setattr__(self, "_lookup_cache", cache)
        return cache

    @property
    def is_complex(self) -> bool:
        return self.family in COMPLEX_FAMILIES

    def items(self):
        return zip(self.indices, self.values)


def _field(grid) -> tuple[np.ndarray, int, tuple, float]:
    if isinstance(grid, VoxelGrid):
        return grid.values, grid.n, grid.translate, grid.scale
    f = np.ascontiguousarray(grid, dtype=np.float64)
    if f.ndim != 3 or len(set(f.shape)) != 1:
        raise MomentError(f"moment engines need a cubic field, got shape {f.shape}")
    return f, f.shape[0], (0.0, 0.0, 0.0), 1.0


def centred_coordinates(n: int) -> np.ndarray:
    """Voxel centres mapped into (-1, 1): ``(2i - n + 1) / n``."""
    return (2.0 * np.arange(n) - n + 1.0) / n


def _pack_cube(family, full, max_order, n, translate, scale, params=None, diagnostics=None):
    idx = cube_indices(max_order)
    vals = np.array([full[p, q, r] for p, q, r in idx], dtype=np.float64)
    return MomentSet(family, max_order, idx, vals, n, translate, scale, params, diagnostics or {})


def monomial_integral(s: int, a):
    """Exact integral of ``t**s`` over the unit cell centred at ``a``."""
    a = np.asarray(a, dtype=np.float64)
    out = ((a + 0.5) ** (s + 1) - (a - 0.5) ** (s + 1)) / (s + 1)
    return out if out.ndim else float(out)


def geometric_moments(grid, max_order: int, variant: str = "zero_order") -> MomentSet:
    """Geometric moments over 1-based voxel coordinates.

    ``zero_order`` weighs voxel ``(i, j, k)`` by ``i^p j^q k^r``; ``precise``
    integrates each monomial exactly over the voxel cell.
    """
    if max_order < 0:
        raise MomentError("max_order must be >= 0")
    f, n, translate, scale = _field(grid)
    coords = np.arange(1, n + 1, dtype=np.float64)
    if variant == "zero_order":
        basis = np.vstack([coords**p for p in range(max_order + 1)])
    elif variant == "precise":
        basis = np.vstack([monomial_integral(p, coords) for p in range(max_order + 1)])
    else:
        raise MomentError(f"unknown geometric variant {variant!r}")
    full = kernels.separable_contract(f, basis, basis, basis)
    return _pack_cube("geometric", full, max_order, n, translate, scale, diagnostics={"variant": variant})


def legendre_moments_3d(grid, max_order: int) -> MomentSet:
    """Legendre moments by midpoint quadrature on voxel centres scaled into (-1, 1)."""
    if max_order < 0:
        raise MomentError("max_order must be >= 0")
    f, n, translate, scale = _field(grid)
    basis = legendre_table(max_order, centred_coordinates(n))
    full = kernels.separable_contract(f, basis, basis, basis) * (2.0 / n) ** 3
    norm = (2.0 * np.arange(max_order + 1) + 1.0) / 2.0
    full *= norm[:, None, None] * norm[None, :, None] * norm[None, None, :]
    return _pack_cube("legendre", full, max_order, n, translate, scale)


def hahn_moments_3d(grid, max_order: int, params: HahnParams | None = None, complete: bool = False) -> MomentSet:
    """Hahn moments ``H_pqr`` over 0-based voxel indices.

    With ``complete=True`` every ``(p, q, r)`` with each index ``<= max_order``
    is returned (lexicographic order) instead of the triangular set.
    """
    f, n, translate, scale = _field(grid)
    params = params if params is not None else HahnParams(0.0, 0.0, n)
    if params.n != n:
        raise MomentError(f"Hahn parameters are for n={params.n} but the grid has n={n}")
    if not 0 <= max_order <= n - 1:
        raise MomentError(f"Hahn max_order must lie in 0..{n - 1}")
    table = hahn_table(params, max_order)
    basis = np.ascontiguousarray(table.values)
    full = kernels.separable_contract(f, basis, basis, basis)
    diag = {"hahn_fallback_rows": list(table.diagnostics["fallback_rows"])}
    if not complete:
        return _pack_cube("hahn", full, max_order, n, translate, scale, params, diag)
    r = range(max_order + 1)
    idx = tuple((p, q, s) for p in r for q in r for s in r)
    return MomentSet("hahn", max_order, idx, full.ravel().copy(), n, translate, scale, params, diag)


def reconstruct_hahn(moments: MomentSet, allow_partial: bool = False) -> np.ndarray:
    """Inverse Hahn transform ``f(x,y,z) = sum H_pqr h~_p(x) h~_q(y) h~_r(z)``.

    Needs every ``(p, q, r)`` with ``p, q, r <= n-1`` unless ``allow_partial``,
    in which case missing coefficients count as zero and the result is the
    least-squares projection onto the available basis.
    """
    if moments.family != "hahn":
        raise MomentError("reconstruction needs Hahn moments")
    n = moments.grid_n
    params = moments.params or HahnParams(0.0, 0.0, n)
    top = max(max(i) for i in moments.indices)
    coeffs = np.zeros((top + 1,) * 3)
    for (p, q, r), v in moments.items():
        coeffs[p, q, r] = v
    if not allow_partial and (top != n - 1 or len(set(moments.indices)) != n**3):
        raise MomentError(f"incomplete coefficient set: have {len(moments)}, need {n**3}")
    basis_t = np.ascontiguousarray(hahn_table(params, top).values.T)
    return kernels.separable_contract(coeffs, basis_t, basis_t, basis_t)


# ---------------------------------------------------------------------------
# spherical families


def _ball_points(f: np.ndarray):
    """Occupied voxel centres inside the inscribed unit ball, in spherical form."""
    n = f.shape[0]
    c = centred_coordinates(n)
    x, y, z = np.meshgrid(c, c, c, indexing="ij")
    r2 = x * x + y * y + z * z
    inside = r2 <= 1.0
    sel = inside & (f != 0)
    w = f[sel]
    px, py, pz = x[sel], y[sel], z[sel]
    rho = np.sqrt(px * px + py * py + pz * pz)
    with np.errstate(invalid="ignore", divide="ignore"):
        cos_theta = np.where(rho > 0, pz / np.where(rho > 0, rho, 1.0), 1.0)
    phi = np.arctan2(py, px)
    total = float(f.sum())
    outside = float(f[~inside].sum())
    lost = outside / total if total > 0 else 0.0
    return w, rho, cos_theta, phi, lost


_CHUNK = 8192  # points per harmonic-table block; keeps the table cache-sized


def _harmonic_sums(radial_fn, nrows, w, rho, ct, phi, L):
    """``sum_i R[k, i] Y[l, m, i]`` and the same with ``conj(Y)``, block by block.

    ``radial_fn(rho_block, w_block)`` returns the real ``(nrows, block)``
    radial weights; results are ``(nrows, (L+1)**2)`` with column
    ``l*(L+1) + m``.  As ``R`` is real the conjugate sum is just ``conj``.
    """
    re = np.zeros((nrows, (L + 1) ** 2))
    im = np.zeros_like(re)
    for start in range(0, rho.size, _CHUNK):
        sl = slice(start, start + _CHUNK)
        ylm = kernels.harmonic_table(ct[sl], phi[sl], L).reshape((L + 1) ** 2, -1)
        radial = radial_fn(rho[sl], w[sl])
        re += radial @ np.ascontiguousarray(ylm.real).T
        im += radial @ np.ascontiguousarray(ylm.imag).T
    return re + 1j * im, re - 1j * im


def _spherical_values(idx, row_of, plain, conj, L, use_conj):
    pos, neg = (conj, plain) if use_conj else (plain, conj)
    vals = np.empty(len(idx), dtype=np.complex128)
    for i, (s, l, m) in enumerate(idx):
        r = row_of(s, l)
        if m >= 0:
            vals[i] = pos[r, l * (L + 1) + m]
        else:
            vals[i] = (-1) ** m * neg[r, l * (L + 1) - m]
    return vals


def complex_moments_3d(grid, max_order: int) -> MomentSet:
    """Complex moments ``c_sl^m = sum rho^s Y_l^m f dV`` over the inscribed unit ball."""
    if max_order < 0:
        raise MomentError("max_order must be >= 0")
    f, n, translate, scale = _field(grid)
    w, rho, ct, phi, lost = _ball_points(f)
    dv = (2.0 / n) ** 3
    idx = spherical_indices(max_order)
    L = max_order

    def radial(r, wb):
        return np.vstack([r**s for s in range(L + 1)]) * (wb * dv)

    plain, conj = _harmonic_sums(radial, L + 1, w, rho, ct, phi, L)
    vals = _spherical_values(idx, lambda s, l: s, plain, conj, L, use_conj=False)
    return MomentSet("complex", max_order, idx, vals, n, translate, scale, diagnostics={"mass_outside_ball": lost})


def zernike_moments_3d(grid, max_order: int) -> MomentSet:
    """Zernike moments ``(3/4pi) sum conj(Z_nl^m) f dV`` over the inscribed unit ball."""
    if max_order < 0:
        raise MomentError("max_order must be >= 0")
    f, n, translate, scale = _field(grid)
    w, rho, ct, phi, lost = _ball_points(f)
    dv = (2.0 / n) ** 3
    idx = spherical_indices(max_order)
    L = max_order
    pairs = sorted({(nn, l) for nn, l, _ in idx})
    row = {pair: i for i, pair in enumerate(pairs)}

    def radial(r, wb):
        return np.vstack([zernike_radial(nn, l, r) for nn, l in pairs]) * (wb * dv * 3.0 / (4.0 * math.pi))

    plain, conj = _harmonic_sums(radial, len(pairs), w, rho, ct, phi, L)
    vals = _spherical_values(idx, lambda s, l: row[s, l], plain, conj, L, use_conj=True)
    return MomentSet("zernike", max_order, idx, vals, n, translate, scale, diagnostics={"mass_outside_ball": lost})


def compute_moments(family: str, grid, max_order: int = FEATURE_ORDER, hahn_params: HahnParams | None = None,
                    geometric_variant: str = "zero_order") -> MomentSet:
    if family == "geometric":
        return geometric_moments(grid, max_order, geometric_variant)
    if family == "legendre":
        return legendre_moments_3d(grid, max_order)
    if family == "complex":
        return complex_moments_3d(grid, max_order)
    if family == "zernike":
        return zernike_moments_3d(grid, max_order)
    if family == "hahn":
        return hahn_moments_3d(grid, max_order, hahn_params)
    raise MomentError(f"unknown moment family {family!r}")


# ---------------------------------------------------------------------------
# feature vectors


def feature_names(family: str, max_order: int = FEATURE_ORDER) -> list[str]:
    return [f"{family}_{a}_{b}_{c}" for a, b, c in family_indices(family, max_order)]


@dataclass(frozen=True, eq=False)
class FeatureVector:
    family: str
    names: tuple[str, ...]
    values: np.ndarray

    def __len__(self):
        return len(self.names)

    @property
    def is_complex(self) -> bool:
        return self.family in COMPLEX_FAMILIES


def feature_vector(moments: MomentSet, order: int = FEATURE_ORDER) -> FeatureVector:
    """The canonical feature vector (165 entries at order 8)."""
    if moments.max_order != order:
        raise MomentError(f"feature vectors are defined at order {order}, got {moments.max_order}")
    if moments.indices != family_indices(moments.family, order):
        raise MomentError("moment set is not in canonical triangular form")
    return FeatureVector(moments.family, tuple(feature_names(moments.family, order)), moments.values.copy())
