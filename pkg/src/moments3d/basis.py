"""Polynomial bases: Legendre, spherical harmonics, 3D Zernike and discrete Hahn.

Hahn polynomials
----------------
The hypergeometric sum is evaluated exactly in rational arithmetic, written
as the standard terminating 3F2

    h_s(a) = (N+nu-1)_s (N-1)_s
             * sum_k (-s)_k (-a)_k (s+1-2N-mu-nu)_k / ((1-N-nu)_k (1-N)_k k!)

which is the rising-Pochhammer form of the textbook series with the sign
``(-1)**k`` absorbed into the last three symbols.  The weight is

    rho(a) = 1 / (a! Gamma(a+mu+1) Gamma(N+nu-a) Gamma(N-a))

and the square norm is taken as ``sum_a h_s(a)**2 rho(a)``, which makes the
normalized polynomials orthonormal by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import kernels

SQRT_4PI = math.sqrt(4.0 * math.pi)


class HahnDomainError(ValueError):
    """Raised where a Hahn weight hits a Gamma pole."""


# ---------------------------------------------------------------------------
# small helpers


def pochhammer_log(alpha: float, k: int) -> tuple[float, int]:
    """Rising factorial ``alpha (alpha+1) ... (alpha+k-1)`` as ``(log|.|, sign)``.

    A zero factor gives ``(-inf, 0)``; ``k == 0`` gives ``(0.0, 1)``.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    logmag = 0.0
    sign = 1
    for j in range(k):
        factor = alpha + j
        if factor == 0:
            return -math.inf, 0
        if factor < 0:
            sign = -sign
        logmag += math.log(abs(factor))
    return logmag, sign


def _log_binom(n: float, k: float) -> float:
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def _logsumexp(values: np.ndarray) -> float:
    values = np.asarray(values, dtype=np.float64)
    finite = values[np.isfinite(values)]
    if finite.size == 0:
        return -math.inf
    top = finite.max()
    return float(top + math.log(np.exp(finite - top).sum()))


# ---------------------------------------------------------------------------
# Legendre family


def legendre(s: int, a):
    """Legendre polynomial ``L_s(a)`` by the Bonnet recurrence."""
    a = np.asarray(a, dtype=np.float64)
    prev = np.ones_like(a)
    if s == 0:
        return prev if prev.ndim else float(prev)
    cur = a.copy()
    for k in range(1, s):
        prev, cur = cur, ((2 * k + 1) * a * cur - k * prev) / (k + 1)
    return cur if cur.ndim else float(cur)


def legendre_table(max_order: int, a) -> np.ndarray:
    """Rows ``L_0(a) .. L_max_order(a)`` stacked into a ``(max_order+1, len(a))`` array."""
    a = np.asarray(a, dtype=np.float64)
    out = np.empty((max_order + 1,) + a.shape)
    out[0] = 1.0
    if max_order >= 1:
        out[1] = a
    for k in range(1, max_order):
        out[k + 1] = ((2 * k + 1) * a * out[k] - k * out[k - 1]) / (k + 1)
    return out


def legendre_explicit(s: int, a):
    """``L_s(a)`` from the closed-form power sum (reference for small ``s``)."""
    a = np.asarray(a, dtype=np.float64)
    total = np.zeros_like(a)
    for k in range(s // 2 + 1):
        coeff = (-1) ** k * math.factorial(2 * s - 2 * k) / (
            2**s * math.factorial(k) * math.factorial(s - k) * math.factorial(s - 2 * k)
        )
        total = total + coeff * a ** (s - 2 * k)
    return total if total.ndim else float(total)


def assoc_legendre(l: int, m: int, a):
    """Associated Legendre function ``P_l^m(a)`` with the Condon-Shortley phase."""
    if not 0 <= m <= l:
        raise ValueError("need 0 <= m <= l")
    a = np.asarray(a, dtype=np.float64)
    somx2 = np.sqrt(np.clip((1.0 - a) * (1.0 + a), 0.0, None))
    pmm = np.ones_like(a)
    fact = 1.0
    for _ in range(m):
        pmm = -pmm * fact * somx2
        fact += 2.0
    if l == m:
        return pmm if pmm.ndim else float(pmm)
    pmmp1 = a * (2 * m + 1) * pmm
    for ll in range(m + 2, l + 1):
        pmm, pmmp1 = pmmp1, (a * (2 * ll - 1) * pmmp1 - (ll + m - 1) * pmm) / (ll - m)
    return pmmp1 if pmmp1.ndim else float(pmmp1)


def _ylm_norm(l: int, m: int) -> float:
    return math.sqrt((2 * l + 1) / (4 * math.pi) * math.exp(math.lgamma(l - m + 1) - math.lgamma(l + m + 1)))


def spherical_harmonic(l: int, m: int, theta, phi):
    """Orthonormal ``Y_l^m(theta, phi)`` with azimuthal factor ``exp(i m phi)``.

    Negative orders use ``Y_l^{-m} = (-1)^m conj(Y_l^m)``.
    """
    if abs(m) > l:
        raise ValueError("need |m| <= l")
    theta = np.asarray(theta, dtype=np.float64)
    phi = np.asarray(phi, dtype=np.float64)
    mm = abs(m)
    y = _ylm_norm(l, mm) * assoc_legendre(l, mm, np.cos(theta)) * np.exp(1j * mm * phi)
    if m < 0:
        y = (-1) ** mm * np.conj(y)
    return y if np.ndim(y) else complex(y)


# ---------------------------------------------------------------------------
# 3D Zernike


def zernike_radial_coeff(k: int, l: int, v: int) -> float:
    """Coefficient ``q_kl^v`` of ``|X|^(2v)`` in the Cartesian Zernike expansion."""
    if min(k, l, v) < 0 or v > k:
        raise ValueError("need k, l, v >= 0 and v <= k")
    logmag = (
        -2 * k * math.log(2.0)
        + 0.5 * math.log((2 * l + 4 * k + 3) / 3.0)
        + _log_binom(2 * k, k)
        + _log_binom(k, v)
        + _log_binom(2 * (k + l + v) + 1, 2 * k)
        - _log_binom(k + l + v, k)
    )
    sign = -1.0 if (k + v) % 2 else 1.0
    return sign * math.exp(logmag)


@lru_cache(maxsize=None)
def _zernike_q(n: int, l: int) -> tuple[float, ...]:
    if l > n or (n - l) % 2:
        raise ValueError(f"invalid Zernike indices n={n}, l={l}: need l <= n and n-l even")
    k = (n - l) // 2
    return tuple(zernike_radial_coeff(k, l, v) for v in range(k + 1))


def zernike_radial(n: int, l: int, rho):
    """Radial part ``R_nl(rho)`` such that ``Z_nl^m = R_nl * Y_l^m`` with orthonormal ``Y``.

    Includes the ``sqrt(4 pi)`` that the Cartesian form carries through its
    harmonic polynomials, so both forms agree pointwise.
    """
    rho = np.asarray(rho, dtype=np.float64)
    q = _zernike_q(n, l)
    r2 = rho * rho
    acc = np.zeros_like(rho)
    for coeff in reversed(q):
        acc = acc * r2 + coeff
    out = SQRT_4PI * acc * rho**l
    return out if out.ndim else float(out)


def _harmonic_norm(l: int, m: int) -> float:
    return math.sqrt((2 * l + 1) * math.factorial(l + m) * math.factorial(l - m)) / math.factorial(l)


def harmonic_polynomial(l: int, m: int, point) -> complex:
    """Homogeneous harmonic polynomial ``e_l^m(x, y, z) = sqrt(4 pi) r^l Y_l^m``.

    Evaluated directly in Cartesian coordinates, never through angles.
    """
    if abs(m) > l:
        raise ValueError("need |m| <= l")
    x, y, z = (float(c) for c in point)
    mm = abs(m)
    w = complex(-x, -y) / 2.0
    rxy = -(x * x + y * y) / 4.0
    total = 0.0
    for mu in range((l - mm) // 2 + 1):
        total += math.comb(l, mu) * math.comb(l - mu, mm + mu) * rxy**mu * z ** (l - mm - 2 * mu)
    e = _harmonic_norm(l, mm) * w**mm * total
    if m < 0:
        e = (-1) ** mm * e.conjugate()
    return complex(e)


def zernike_poly(n: int, l: int, m: int, point) -> complex:
    """3D Zernike polynomial from its Cartesian expansion ``sum_v q |X|^2v e_l^m(X)``."""
    if l > n or (n - l) % 2:
        raise ValueError(f"n - l must be even and non-negative (n={n}, l={l})")
    if abs(m) > l:
        raise ValueError("need |m| <= l")
    x, y, z = (float(c) for c in point)
    r2 = x * x + y * y + z * z
    radial = 0.0
    for v, coeff in enumerate(_zernike_q(n, l)):
        radial += coeff * r2**v
    return radial * harmonic_polynomial(l, m, (x, y, z))


def zernike_poly_spherical(n: int, l: int, m: int, point) -> complex:
    """Same polynomial as :func:`zernike_poly`, through ``R_nl(rho) Y_l^m(theta, phi)``."""
    x, y, z = (float(c) for c in point)
    rho = math.sqrt(x * x + y * y + z * z)
    theta = math.acos(z / rho) if rho > 0 else 0.0
    phi = math.atan2(y, x)
    return zernike_radial(n, l, rho) * spherical_harmonic(l, m, theta, phi)


# ---------------------------------------------------------------------------
# discrete Hahn


@dataclass(frozen=True)
class HahnParams:
    mu: float = 0.0
    nu: float = 0.0
    n: int = 64

    def __post_init__(self):
        if not self.mu > -1 or not self.nu > -1:
            raise ValueError("Hahn parameters need mu > -1 and nu > -1")
        if int(self.n) != self.n or self.n < 2:
            raise ValueError("Hahn lattice size needs n >= 2")
        object.__setattr__(self, "mu", float(self.mu))
        object.__setattr__(self, "nu", float(self.nu))
        object.__setattr__(self, "n", int(self.n))


def _check_sa(s: int, a: int | None, params: HahnParams):
    if not 0 <= s <= params.n - 1:
        raise ValueError(f"order {s} outside 0..{params.n - 1}")
    if a is not None and not 0 <= a <= params.n - 1:
        raise ValueError(f"argument {a} outside 0..{params.n - 1}")


def hahn_weight_log(s: int, a: int, params: HahnParams, *, printed: bool = False) -> float:
    """``log rho(a)`` for the Hahn weight.

    The weight used for orthogonality does not depend on ``s``.  With
    ``printed=True`` the order-dependent variant with ``Gamma(N-s-a)`` in place
    of ``Gamma(N-a)`` is returned instead; it has poles for ``a > N-s-1``
    (raised as :class:`HahnDomainError`) and is kept only for comparison.
    """
    _check_sa(s, a, params)
    N, mu, nu = params.n, params.mu, params.nu
    last = N - s - a if printed else N - a
    if last <= 0:
        raise HahnDomainError(f"Gamma pole at s={s}, a={a}, N={N}")
    return -(math.lgamma(a + 1) + math.lgamma(a + mu + 1) + math.lgamma(N + nu - a) + math.lgamma(last))


def hahn_weight_log_recursive(params: HahnParams) -> np.ndarray:
    """All ``log rho(a)`` built from ``rho(0)`` by the ratio recurrence in ``a``."""
    N, mu, nu = params.n, params.mu, params.nu
    out = np.empty(N)
    out[0] = -(math.lgamma(mu + 1) + math.lgamma(N + nu) + math.lgamma(N))
    for a in range(1, N):
        out[a] = out[a - 1] + math.log((N - a) * (N + nu - a) / (a * (a + mu)))
    return out


def hahn_weight_log_vector(params: HahnParams) -> np.ndarray:
    return np.array([hahn_weight_log(0, a, params) for a in range(params.n)])


@lru_cache(maxsize=256)
def _hyper_row(s: int, mu: Fraction, nu: Fraction, N: int) -> tuple[Fraction, ...]:
    """Exact values of the terminating 3F2 for order ``s`` at every ``a``."""
    c = s + 1 - 2 * N - mu - nu
    # ratio of consecutive terms without the (-a)_k factor
    ratios = [Fraction(k - s) * (c + k) / ((1 - N - nu + k) * (1 - N + k) * (k + 1)) for k in range(s)]
    row = []
    for a in range(N):
        term = Fraction(1)
        total = Fraction(1)
        for k in range(min(s, a)):
            term *= ratios[k] * (k - a)
            total += term
        row.append(total)
    return tuple(row)


def _hyper(s: int, params: HahnParams) -> tuple[Fraction, ...]:
    return _hyper_row(s, Fraction(params.mu), Fraction(params.nu), params.n)


def _frac_log_abs(x: Fraction) -> float:
    if x == 0:
        return -math.inf
    return math.log(abs(x.numerator)) - math.log(x.denominator)


def _prefactor_log(s: int, params: HahnParams) -> float:
    N, nu = params.n, params.nu
    p1, _ = pochhammer_log(N + nu - 1, s)
    p2, _ = pochhammer_log(N - 1, s)
    return p1 + p2


def hahn_direct_log(s: int, a: int, params: HahnParams) -> tuple[float, int]:
    """``h_s(a)`` as ``(log|h|, sign)`` from the exact hypergeometric sum."""
    _check_sa(s, a, params)
    q = _hyper(s, params)[a]
    sign = (q > 0) - (q < 0)
    return _prefactor_log(s, params) + _frac_log_abs(q), sign


def hahn_direct(s: int, a: int, params: HahnParams) -> float:
    """Unnormalized Hahn polynomial ``h_s(a)``; may overflow to ``inf`` for large ``N``."""
    logmag, sign = hahn_direct_log(s, a, params)
    if sign == 0:
        return 0.0
    try:
        return sign * math.exp(logmag)
    except OverflowError:
        return sign * math.inf


def _weighted_row_log(s: int, params: HahnParams) -> tuple[np.ndarray, np.ndarray]:
    """``log|Q_s(a)| + log rho(a)/2`` and signs, for the prefactor-free 3F2 ``Q_s``."""
    q = _hyper(s, params)
    logw = hahn_weight_log_vector(params)
    mags = np.array([_frac_log_abs(x) for x in q]) + 0.5 * logw
    signs = np.array([(x > 0) - (x < 0) for x in q], dtype=np.float64)
    return mags, signs


def hahn_norm_sq_log(s: int, params: HahnParams) -> float:
    """``log d_s^2`` with ``d_s^2 = sum_a h_s(a)^2 rho(a)`` (brute force, exact terms)."""
    _check_sa(s, None, params)
    mags, _ = _weighted_row_log(s, params)
    return 2.0 * _prefactor_log(s, params) + _logsumexp(2.0 * mags)


def hahn_norm_sq_exact(s: int, params: HahnParams) -> Fraction:
    """``d_s^2`` as an exact rational; needs integer ``mu`` and ``nu``."""
    _check_sa(s, None, params)
    if not (params.mu.is_integer() and params.nu.is_integer()):
        raise ValueError("exact square norm needs integer mu and nu")
    N, mu, nu = params.n, int(params.mu), int(params.nu)
    pre = math.prod(range(N + nu - 1, N + nu - 1 + s)) * math.prod(range(N - 1, N - 1 + s))
    total = Fraction(0)
    for a, q in enumerate(_hyper(s, params)):
        rho = Fraction(1, math.factorial(a) * math.factorial(a + mu) * math.factorial(N + nu - a - 1)
                       * math.factorial(N - a - 1))
        total += (pre * q) ** 2 * rho
    return total


def hahn_norm_sq_log_closed_form(s: int, params: HahnParams) -> float:
    """Closed-form square-norm expression as commonly printed; diagnostic only.

    Returns ``nan`` when a Gamma argument hits a pole.
    """
    N, mu, nu = params.n, params.mu, params.nu
    args_num = [2 * N + mu + nu - s]
    args_den = [2 * N + mu + nu - 2 * s - 1, N + mu + nu - s, s + 1, N + mu - s, N + nu - s, N - s]
    try:
        return sum(math.lgamma(x) for x in args_num) - sum(math.lgamma(x) for x in args_den)
    except ValueError:
        return math.nan


def hahn_normalized_row(s: int, params: HahnParams) -> np.ndarray:
    """``h~_s(a)`` for every ``a`` through the direct path."""
    _check_sa(s, None, params)
    mags, signs = _weighted_row_log(s, params)
    half_norm = 0.5 * _logsumexp(2.0 * mags)
    return signs * np.exp(mags - half_norm)


def hahn_normalized(s: int, a: int, params: HahnParams) -> float:
    """Normalized Hahn polynomial ``h~_s(a) = h_s(a) sqrt(rho(a) / d_s^2)``."""
    _check_sa(s, a, params)
    return float(hahn_normalized_row(s, params)[a])


def norm_consistency_report(params: HahnParams, max_order: int) -> list[dict]:
    """Brute-force vs closed-form square norms, one dict per order."""
    rows = []
    for s in range(max_order + 1):
        brute = hahn_norm_sq_log(s, params)
        closed = hahn_norm_sq_log_closed_form(s, params)
        rows.append({"s": s, "log_brute": brute, "log_closed_form": closed, "log_ratio": brute - closed})
    return rows


# -- recurrences


def hahn_recurrence_coefficients(params: HahnParams, max_order: int) -> tuple[np.ndarray, np.ndarray]:
    """Diagonal ``b_s`` and off-diagonal ``e_s`` of the orthonormal three-term recurrence

        a h~_s(a) = e_{s+1} h~_{s+1}(a) + b_s h~_s(a) + e_s h~_{s-1}(a)

    derived from the textbook Hahn recurrence with alpha = -N-nu, beta = -N-mu.
    ``e[0]`` is unused.  Non-finite entries mean the recurrence is unusable.
    """
    N, mu, nu = params.n, params.mu, params.nu
    alpha, beta, M = -N - nu, -N - mu, N - 1

    def big_a(k):
        return (k + alpha + beta + 1) * (k + alpha + 1) * (M - k) / (
            (2 * k + alpha + beta + 1) * (2 * k + alpha + beta + 2)
        )

    def big_c(k):
        if k == 0:
            return 0.0
        return k * (k + alpha + beta + M + 1) * (k + beta) / ((2 * k + alpha + beta) * (2 * k + alpha + beta + 1))

    b = np.full(max_order + 1, np.nan)
    e = np.full(max_order + 1, np.nan)
    e[0] = 0.0
    with np.errstate(all="ignore"):
        for k in range(max_order + 1):
            try:
                ak, ck = big_a(k), big_c(k)
            except ZeroDivisionError:
                continue
            b[k] = ak + ck
            if k + 1 <= max_order:
                try:
                    prod = ak * big_c(k + 1)
                except ZeroDivisionError:
                    continue
                if prod > 0:
                    e[k + 1] = -math.copysign(math.sqrt(prod), ak)
    return b, e


def printed_recurrence_row(s: int, params: HahnParams, prev1: np.ndarray, prev2: np.ndarray) -> np.ndarray:
    """One step of the recurrence with coefficients exactly as commonly printed.

    Its middle coefficient divides by ``mu**2 - nu**2``; at ``mu == nu`` the
    result is non-finite.  Used only to report whether it agrees with the
    direct path.
    """
    N, mu, nu = params.n, params.mu, params.nu
    a = np.arange(N, dtype=np.float64)
    dlog = [hahn_norm_sq_log(k, params) for k in (s - 2, s - 1, s)]
    with np.errstate(all="ignore"):
        big_a = -s * (2 * N + mu + nu - s) / ((2 * N + mu + nu - 2 * s - 1) * (2 * N + mu + nu - 2 * s))
        denom = 4 * (mu * mu - nu * nu) * (2 * N + mu + nu)
        big_b = a - (2 * (N - 1) + nu - mu) / denom if denom != 0 else np.full(N, np.nan)
        big_c = (
            (N - s + 1) * (N - s + mu + 1) / (2 * N + mu + nu - 2 * s + 2)
            * (N - s + nu + 1) * (N - s + mu + nu + 1) / (2 * N + mu + nu - 2 * s + 1)
        )
        return (
            big_b * math.exp(0.5 * (dlog[1] - dlog[2])) * prev1
            + big_c * math.exp(0.5 * (dlog[0] - dlog[2])) * prev2
        ) / big_a


@dataclass(frozen=True, eq=False)
class HahnBasisTable:
    """Normalized Hahn values ``values[s, a]`` for ``s <= max_order``.

    ``weight_log[a]`` is the (order independent) log weight and
    ``norm_sq_log[s]`` the log square norm of the unnormalized polynomial.
    ``diagnostics`` records which path produced each row.
    """

    params: HahnParams
    max_order: int
    values: np.ndarray
    weight_log: np.ndarray
    norm_sq_log: np.ndarray
    diagnostics: dict = field(default_factory=dict)

    def gram_error(self) -> float:
        g = self.values @ self.values.T
        return float(np.abs(g - np.eye(self.max_order + 1)).max())


def _row_rel_error(candidate: np.ndarray, reference: np.ndarray) -> float:
    scale = np.abs(reference).max()
    if not np.all(np.isfinite(candidate)):
        return math.inf
    return float(np.abs(candidate - reference).max() / scale) if scale > 0 else float(np.abs(candidate).max())


def hahn_seed_rows(params: HahnParams) -> tuple[np.ndarray, np.ndarray]:
    """Orders 0 and 1 from their closed forms (weight and square norm only)."""
    N, mu, nu = params.n, params.mu, params.nu
    logw = hahn_weight_log_vector(params)
    a = np.arange(N, dtype=np.float64)
    d0 = hahn_norm_sq_log(0, params)
    h0 = np.exp(0.5 * (logw - d0))
    if N < 2:
        return h0, np.zeros(N)
    d1 = hahn_norm_sq_log(1, params)
    h1 = ((N + nu - 1) * (N - 1) - (2 * N + mu + nu - 2) * a) * np.exp(0.5 * (logw - d1))
    return h0, h1


def hahn_recurrence_table(
    params: HahnParams,
    max_order: int,
    method: str = "recurrence",
    validate: bool = True,
    rtol: float = 1e-9,
) -> HahnBasisTable:
    """Build the normalized Hahn table.

    ``method``:
      * ``"recurrence"`` - orthonormal three-term recurrence (fast path);
      * ``"printed"`` - the recurrence with the printed coefficient set;
      * ``"direct"`` - exact hypergeometric sum for every row.

    With ``validate`` every recurrence row is compared against the direct
    path (relative to the row's largest magnitude); rows off by more than
    ``rtol`` are replaced by the direct values and listed under
    ``diagnostics["fallback_rows"]``.  ``validate=False`` with a recurrence
    method trusts the recurrence.
    """
    N = params.n
    if not 0 <= max_order <= N - 1:
        raise ValueError(f"max_order must lie in 0..{N - 1}")
    if method not in ("recurrence", "printed", "direct"):
        raise ValueError(f"unknown method {method!r}")
    weight_log = hahn_weight_log_vector(params)
    norm_sq_log = np.array([hahn_norm_sq_log(s, params) for s in range(max_order + 1)])
    diag: dict = {"method": method, "fallback_rows": [], "max_rel_error": 0.0}

    if method == "direct":
        values = np.array([hahn_normalized_row(s, params) for s in range(max_order + 1)])
        return HahnBasisTable(params, max_order, values, weight_log, norm_sq_log, diag)

    h0, h1 = hahn_seed_rows(params)
    values = np.empty((max_order + 1, N))
    values[0] = h0
    if max_order >= 1:
        values[1] = h1
    if method == "recurrence":
        b, e = hahn_recurrence_coefficients(params, max_order)
        if max_order >= 2 and not (np.all(np.isfinite(b[1:max_order])) and np.all(np.isfinite(e[1:]))):
            diag["recurrence_unusable"] = True
            validate = True
            values[2:] = np.nan
        elif max_order >= 2:
            kernels.hahn_recurrence(values, b, e)
    else:
        with np.errstate(all="ignore"):
            for s in range(2, max_order + 1):
                values[s] = printed_recurrence_row(s, params, values[s - 1], values[s - 2])

    if validate:
        worst = 0.0
        for s in range(max_order + 1):
            ref = hahn_normalized_row(s, params)
            err = _row_rel_error(values[s], ref)
            worst = max(worst, err)
            if err > rtol:
                diag["fallback_rows"].append(s)
                values[s] = ref
        diag["max_rel_error"] = worst
    return HahnBasisTable(params, max_order, values, weight_log, norm_sq_log, diag)


@lru_cache(maxsize=32)
def hahn_table(params: HahnParams, max_order: int) -> HahnBasisTable:
    """Cached, validated recurrence table; the one the moment engine shares."""
    return hahn_recurrence_table(params, max_order)
