"""Acceptance criteria 1-15.

Each check returns ``(passed, detail)``; the pytest wrappers assert on it and
record one PASS/FAIL line, printed in the terminal summary.  Running this file
directly prints the same lines without pytest.
"""

import logging
import math
import struct
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from test_moments import naive_complex, naive_geometric, naive_hahn, naive_legendre, naive_zernike  # noqa: E402
from test_stats import ORACLE, SIX_LABELS, SIX_ROWS  # noqa: E402

from moments3d import kernels  # noqa: E402
from moments3d.basis import (  # noqa: E402
    HahnParams,
    _hyper_row,
    hahn_norm_sq_exact,
    hahn_norm_sq_log,
    hahn_recurrence_table,
    hahn_table,
    legendre_table,
    norm_consistency_report,
    spherical_harmonic,
    zernike_poly,
    zernike_poly_spherical,
    zernike_radial,
)
from moments3d.cli import main  # noqa: E402
from moments3d.encoding import deinterleave, float_bits, imaginary_lane_mask, interleave, table1_search  # noqa: E402
from moments3d.moments import (  # noqa: E402
    FAMILIES,
    centred_coordinates,
    complex_moments_3d,
    compute_moments,
    feature_vector,
    geometric_moments,
    hahn_moments_3d,
    legendre_moments_3d,
    monomial_integral,
    reconstruct_hahn,
    spherical_indices,
    zernike_moments_3d,
)
from moments3d.stats import LabeledDataset, class_dispersion, mad, nmad, qcd  # noqa: E402
from moments3d.voxel import VoxelGrid, read_binvox, write_binvox  # noqa: E402

log = logging.getLogger("acceptance")
SAMPLES = Path(__file__).resolve().parents[1] / "src" / "moments3d" / "data" / "samples"
RESULTS: list[str] = []


def _rel_ok(got, ref, rtol):
    floor = rtol * np.abs(ref).max()
    return bool(np.all(np.abs(got - ref) <= np.maximum(rtol * np.abs(ref), floor)))


def ac01_feature_count():
    rng = np.random.default_rng(1)
    g = (rng.random((16, 16, 16)) < 0.4).astype(float)
    counts = {fam: len(feature_vector(compute_moments(fam, g, 8))) for fam in FAMILIES}
    spherical = sum(2 * l + 1 for s in range(9) for l in range(s % 2, s + 1, 2))
    ok = set(counts.values()) == {165} and spherical == 165 == len(spherical_indices(8))
    return ok, f"counts={counts} spherical_enumeration={spherical}"


def ac02_hahn_orthonormality():
    hahn_table.cache_clear()
    _hyper_row.cache_clear()
    t0 = time.perf_counter()
    worst = 0.0
    for n in (8, 16, 32, 64):
        for mu, nu in ((0, 0), (5, 5), (2, 10)):
            worst = max(worst, hahn_recurrence_table(HahnParams(mu, nu, n), min(n - 1, 20)).gram_error())
    elapsed = time.perf_counter() - t0
    return worst < 1e-8 and elapsed < 10, f"max |G-I|={worst:.2e} in {elapsed:.2f}s"


def ac03_norm_consistency():
    p = HahnParams(0, 0, 4)
    exact = hahn_norm_sq_exact(0, p)
    brute = math.exp(hahn_norm_sq_log(0, p))
    mismatches = 0
    for n in (4, 8, 16):
        for row in norm_consistency_report(HahnParams(0, 0, n), min(5, n - 1)):
            mismatches += not math.isclose(row["log_ratio"], 0.0, abs_tol=1e-9)
            log.info("n=%d s=%d log(brute/printed)=%.6g", n, row["s"], row["log_ratio"])
    ok = exact == Fraction(5, 9) and math.isclose(brute, 5 / 9, rel_tol=1e-14)
    return ok, f"d0^2={exact} (float path {brute!r}); printed closed form disagrees on {mismatches} rows (logged)"


def ac04_recurrence_direct():
    worst, fallbacks = 0.0, {}
    for mu, nu in ((0, 0), (5, 5), (2, 10), (0.5, 7.0)):
        p = HahnParams(mu, nu, 16)
        fast = hahn_recurrence_table(p, 10, validate=False).values
        ref = hahn_recurrence_table(p, 10, method="direct").values
        for s in range(11):
            worst = max(worst, np.abs(fast[s] - ref[s]).max() / np.abs(ref[s]).max())
    for mu in (0.0, 3.0):
        table = hahn_recurrence_table(HahnParams(mu, mu, 16), 10, method="printed")
        fallbacks[mu] = len(table.diagnostics["fallback_rows"])
        worst_gram = table.gram_error()
        if worst_gram > 1e-12:
            return False, f"printed-path fallback not orthonormal at mu=nu={mu}"
    return worst <= 1e-9, f"max row-relative error={worst:.2e}; mu=nu fallback rows={fallbacks}"


def ac05_reconstruction():
    rng = np.random.default_rng(5)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        f = (rng.random((8, 8, 8)) < 0.5).astype(float)
        worst = max(worst, np.abs(reconstruct_hahn(hahn_moments_3d(f, 7, complete=True)) - f).max())
    elapsed = time.perf_counter() - t0
    return worst < 1e-6 and elapsed < 30, f"max abs error={worst:.2e} over 100 grids in {elapsed:.2f}s"


def ac06_naive_oracles():
    rng = np.random.default_rng(6)
    f = rng.random((6, 6, 6)) * (rng.random((6, 6, 6)) < 0.6)
    p = HahnParams(0, 0, 6)
    checks = {
        "geometric": _rel_ok(geometric_moments(f, 6).values, naive_geometric(f, 6), 1e-10),
        "legendre": _rel_ok(legendre_moments_3d(f, 5).values, naive_legendre(f, 5), 1e-10),
        "hahn": _rel_ok(hahn_moments_3d(f, 5, p).values, naive_hahn(f, 5, p), 1e-10),
        "complex": _rel_ok(complex_moments_3d(f, 6).values, naive_complex(f, 6), 1e-10),
        "zernike": _rel_ok(zernike_moments_3d(f, 6).values, naive_zernike(f, 6), 1e-10),
    }
    return all(checks.values()), str(checks)


def ac07_geometric_closed_forms():
    u_ok = all(monomial_integral(0, a) == 1 and monomial_integral(1, a) == a for a in range(-3, 4))
    u2 = Fraction(monomial_integral(2, 2)).limit_denominator(1000)
    f = np.zeros((5, 5, 5))
    f[1, 2, 3] = 1
    single = geometric_moments(f, 2)[1, 1, 0] == 6 and geometric_moments(f, 2, "precise")[1, 1, 0] == 6
    return u_ok and u2 == Fraction(49, 12) and single, f"U_2(2)={u2}, single-voxel m_110 exact={single}"


def ac08_legendre_quadrature():
    x, w = np.polynomial.legendre.leggauss(16)
    t = legendre_table(10, x)
    err = np.abs((t * w) @ t.T - np.diag(2.0 / (2 * np.arange(11) + 1))).max()
    return err < 1e-10, f"max error={err:.2e}"


def ac09_spherical_harmonics():
    ct, wt = np.polynomial.legendre.leggauss(12)
    ph = np.linspace(0, 2 * math.pi, 24, endpoint=False)
    C, P = np.meshgrid(ct, ph, indexing="ij")
    W = np.outer(wt, np.full(ph.size, 2 * math.pi / ph.size)).ravel()
    theta = np.arccos(C.ravel())
    Y = np.array([spherical_harmonic(l, m, theta, P.ravel()) for l in range(5) for m in range(-l, l + 1)])
    ortho = np.abs((Y * W) @ np.conj(Y).T - np.eye(len(Y))).max()
    rng = np.random.default_rng(9)
    th, phi = rng.uniform(0, math.pi, 200), rng.uniform(-math.pi, math.pi, 200)
    conj = max(
        np.abs(spherical_harmonic(l, -m, th, phi) - (-1) ** m * np.conj(spherical_harmonic(l, m, th, phi))).max()
        for l in range(5) for m in range(1, l + 1)
    )
    return ortho < 1e-6 and conj <= 1e-12, f"orthonormality error={ortho:.2e}, conjugation error={conj:.1e}"


def ac10_zernike():
    n = 96
    c = centred_coordinates(n)
    x, y, z = np.meshgrid(c, c, c, indexing="ij")
    r2 = x * x + y * y + z * z
    inside = r2 <= 1.0
    rho = np.sqrt(r2[inside])
    ct = np.where(rho > 0, z[inside] / np.where(rho > 0, rho, 1), 1.0)
    ylm = kernels.harmonic_table(ct, np.arctan2(y[inside], x[inside]), 6)
    rows = []
    for nn, l, m in spherical_indices(6):
        y_lm = ylm[l, m] if m >= 0 else (-1) ** m * np.conj(ylm[l, -m])
        rows.append(zernike_radial(nn, l, rho) * y_lm)
    Z = np.array(rows)
    ortho = np.abs(3 / (4 * math.pi) * (Z @ np.conj(Z).T) * (2.0 / n) ** 3 - np.eye(len(rows))).max()
    rng = np.random.default_rng(10)
    pts = rng.uniform(-1, 1, size=(400, 3))
    pts = pts[np.einsum("ij,ij->i", pts, pts) <= 1][:100]
    cross = max(
        abs(zernike_poly(a, b, m, p) - zernike_poly_spherical(a, b, m, p)) / max(1.0, abs(zernike_poly(a, b, m, p)))
        for p in pts for a, b, m in spherical_indices(8)
    )
    return ortho < 2e-2 and cross < 1e-9, f"96^3 orthogonality error={ortho:.2e}, cross-form error={cross:.1e}"


def ac11_conjugate_symmetry():
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(5):
        f = (rng.random((14, 14, 14)) < 0.5).astype(float)
        for engine in (complex_moments_3d, zernike_moments_3d):
            m = engine(f, 8)
            for (s, l, mm), v in m.items():
                if mm > 0:
                    worst = max(worst, abs(m[s, l, -mm] - (-1) ** mm * np.conj(v)))
    return worst <= 1e-12, f"max deviation={worst:.1e}"


def ac12_bit_interleave():
    rng = np.random.default_rng(12)
    raw = rng.integers(0, 2**63, size=(101_000, 2), dtype=np.uint64) * 2 + rng.integers(0, 2, size=(101_000, 2), dtype=np.uint64)
    values = raw.view(np.float64)
    values = values[np.isfinite(values).all(axis=1)][:100_000]
    mask = imaginary_lane_mask()
    bad = purity = 0
    for re, im in values.tolist():
        word = interleave(complex(re, im))
        back = deinterleave(word)
        bad += (float_bits(back.real), float_bits(back.imag)) != (float_bits(re), float_bits(im))
        purity += interleave(re) & mask != 0
    report = table1_search()
    best = report[0]
    for row in best["rows"]:
        log.info("table1 %s %s: %s, %d digits agree", best["layout"], row["family"],
                 "match" if row["exact"] else "no match", row["matching_digits"])
    detail = (f"{len(values)} round trips, {bad} mismatches, {purity} lane leaks; "
              f"reference table: layout {best['layout']} matches {best['exact_rows']}/5 rows")
    return bad == 0 and purity == 0 and len(values) == 100_000, detail


def ac13_dispersion():
    hand = mad([1, 2, 3, 4, 5]) == 1 and qcd([1, 2, 3, 4, 5]) == pytest.approx(1 / 3, abs=1e-16) and nmad(1, 2) == 50
    report = class_dispersion(LabeledDataset(SIX_ROWS, SIX_LABELS))
    want = ORACLE["pooled"]
    oracle_ok = all(
        f.intra_qcd == pytest.approx(a, rel=1e-12, abs=1e-15) and f.inter_qcd == pytest.approx(b, rel=1e-12, abs=1e-15)
        and f.degenerate == d
        for f, (a, b), d in zip(report.features, want["qcd"], want["degenerate"])
    ) and report.intra_class_variance_ratio == pytest.approx(want["ratio"])
    X = np.array(SIX_ROWS, dtype=float)
    base = [(f.intra_qcd, f.inter_qcd) for f in report.features]
    perm = [3, 0, 5, 1, 4, 2]
    permuted = class_dispersion(LabeledDataset(X[perm], [SIX_LABELS[i] for i in perm]))
    scaled = class_dispersion(LabeledDataset(X * 4.0, SIX_LABELS))
    inv = [(f.intra_qcd, f.inter_qcd) for f in permuted.features] == base == [
        (f.intra_qcd, f.inter_qcd) for f in scaled.features
    ]
    return hand and oracle_ok and inv, f"hand={hand} oracle={oracle_ok} invariance={inv}"


def ac14_pipeline_determinism(tmp_dir: Path):
    inputs = sorted(str(p) for p in SAMPLES.glob("*.xyz"))
    args = ["featurize", *inputs, "--labels", str(SAMPLES / "labels.csv")]
    rc1 = main([*args, "--out", str(tmp_dir / "run1")])
    rc2 = main([*args, "--out", str(tmp_dir / "run2"), "--jobs", "2"])
    same = all((tmp_dir / f"run1.{e}").read_bytes() == (tmp_dir / f"run2.{e}").read_bytes() for e in ("csv", "arff"))
    return rc1 == rc2 == 0 and same and len(inputs) == 5, f"exit codes {rc1},{rc2}; byte-identical={same}"


def ac15_binvox_round_trip():
    rng = np.random.default_rng(15)
    failures = 0
    for _ in range(100):
        n = int(rng.integers(2, 17))
        g = VoxelGrid((rng.random((n, n, n)) < rng.random()).astype(float), tuple(rng.normal(size=3)),
                      float(rng.uniform(0.5, 40)))
        failures += read_binvox(write_binvox(g)) != g
    return failures == 0, f"{failures} failures in 100 grids"


CRITERIA = [
    ("AC01", "feature count 165", ac01_feature_count),
    ("AC02", "Hahn orthonormality", ac02_hahn_orthonormality),
    ("AC03", "norm-consistency diagnostic", ac03_norm_consistency),
    ("AC04", "recurrence/direct agreement", ac04_recurrence_direct),
    ("AC05", "Hahn reconstruction round trip", ac05_reconstruction),
    ("AC06", "naive-oracle equivalence", ac06_naive_oracles),
    ("AC07", "geometric closed forms", ac07_geometric_closed_forms),
    ("AC08", "Legendre quadrature orthogonality", ac08_legendre_quadrature),
    ("AC09", "spherical-harmonic orthonormality", ac09_spherical_harmonics),
    ("AC10", "Zernike orthogonality", ac10_zernike),
    ("AC11", "complex conjugate symmetry", ac11_conjugate_symmetry),
    ("AC12", "bit-interleave bijectivity", ac12_bit_interleave),
    ("AC13", "dispersion statistics", ac13_dispersion),
    ("AC14", "pipeline determinism", ac14_pipeline_determinism),
    ("AC15", "binvox round trip", ac15_binvox_round_trip),
]


def _run(code, title, fn, *args):
    try:
        ok, detail = fn(*args)
    except Exception as exc:  # report, then let pytest fail
        ok, detail = False, f"raised {type(exc).__name__}: {exc}"
    line = f"{code} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
    RESULTS.append(line)
    print(line)
    return ok, detail


@pytest.mark.parametrize("code, title, fn", CRITERIA, ids=[c[0] for c in CRITERIA])
def test_criterion(code, title, fn, tmp_path):
    args = (tmp_path,) if fn is ac14_pipeline_determinism else ()
    ok, detail = _run(code, title, fn, *args)
    assert ok, detail


if __name__ == "__main__":
    import tempfile

    logging.basicConfig(level=logging.WARNING)
    passed = 0
    with tempfile.TemporaryDirectory() as tmp:
        for code, title, fn in CRITERIA:
            args = (Path(tmp),) if fn is ac14_pipeline_determinism else ()
            passed += _run(code, title, fn, *args)[0]
    print(f"{passed}/{len(CRITERIA)} criteria passed")
    sys.exit(0 if passed == len(CRITERIA) else 1)
