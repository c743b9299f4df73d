"""Acceptance gate: one test per criterion, each reporting a PASS/FAIL line.

Criteria 5-8 use the default estimator settings. The supplementary tests at
the bottom repeat the bias-sensitive runs with digamma marginal terms.
"""

import math
import time

import mpmath
import numpy as np
import pytest

from mimix import (
    DistanceOracle,
    EstimatorConfig,
    estimate_ksg,
    estimate_mixed,
    get_estimator,
    neighbor_profiles,
    validate_dataset,
)
from mimix.estimators import add_noise, gaussian_noise, NoiseConfig, plugin_mi
from mimix.eval import auroc, mse_sweep, rank_features, roc_curve
from mimix.specfun import digamma
from mimix.synthgen import (
    GeneratorSpec,
    child_seed,
    exp1_mi_monte_carlo,
    exp1_mi_quadrature,
    gen_featsel,
)

from conftest import dyadic_dataset, random_mixed_dataset
from reference import mixed_from_profiles, plugin_from_values, profiles as ref_profiles

pytestmark = pytest.mark.slow


def verdict(report, number, ok, detail):
    line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    report(line)
    print(line)
    return ok


def test_c01_brute_force_equivalence(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(101)
    mismatches, worst = 0, 0.0
    for _ in range(50):
        ds = random_mixed_dataset(rng, n=int(rng.integers(10, 301)), max_dim=3)
        k = int(rng.integers(1, 6))
        got = neighbor_profiles(DistanceOracle(ds), k)
        ref = ref_profiles(ds.x.tolist(), ds.y.tolist(), k)
        rho, kt, nx, ny = (np.array(c) for c in zip(*ref))
        same = (np.array_equal(got.rho, rho) and np.array_equal(got.k_tilde, kt)
                and np.array_equal(got.n_x, nx) and np.array_equal(got.n_y, ny))
        mismatches += not same
        est = estimate_mixed(ds, EstimatorConfig(k=k)).value
        worst = max(worst, abs(est - mixed_from_profiles(ref, ds.n)))
    elapsed = time.perf_counter() - t0
    ok = mismatches == 0 and worst <= 1e-12 and elapsed < 30
    assert verdict(report, 1, ok, f"profile mismatches={mismatches}/50, max |estimate - reference|={worst:.2e}, "
                                  f"{elapsed:.1f}s")


def test_c02_degeneracy_equalities(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(102)
    unequal = 0
    for _ in range(20):
        n = int(rng.integers(50, 400))
        ds = validate_dataset(rng.normal(size=(n, int(rng.integers(1, 4)))), rng.normal(size=(n, int(rng.integers(1, 4)))))
        o = DistanceOracle(ds, method="brute")
        d = np.array([o.distance_row(i)[i + 1:] for i in range(n)], dtype=object)
        flat = np.concatenate(d)
        assert np.unique(flat).shape[0] == flat.shape[0]  # distinct distances
        unequal += estimate_mixed(ds).value != estimate_ksg(ds).value
    violations, worst_ratio = 0, 0.0
    for _ in range(20):
        k = int(rng.integers(1, 6))
        n_atoms = int(rng.integers(2, 12))
        atoms = rng.integers(-3, 4, size=(n_atoms, 3)).astype(float)
        atoms = np.unique(atoms, axis=0)
        mult = rng.integers(k + 1, k + 40, size=atoms.shape[0])
        table = np.repeat(atoms, mult, axis=0)[rng.permutation(int(mult.sum()))]
        dx = int(rng.integers(1, 3))
        ds = validate_dataset(table[:, :dx], table[:, dx:])
        cfg = EstimatorConfig(k=k)
        prof = neighbor_profiles(DistanceOracle(ds), k)
        plug = plugin_mi(ds.x, ds.y)
        assert plug == pytest.approx(plugin_from_values(ds.x.tolist(), ds.y.tolist()), abs=1e-12)
        bound = 2.0 / ds.n * math.fsum((1.0 / prof.k_tilde).tolist())
        gap = abs(estimate_mixed(ds, cfg).value - plug)
        violations += gap > bound
        worst_ratio = max(worst_ratio, gap / bound)
    elapsed = time.perf_counter() - t0
    ok = unequal == 0 and violations == 0 and elapsed < 30
    assert verdict(report, 2, ok, f"continuous mixed!=ksg: {unequal}/20, discrete bound violations: {violations}/20 "
                                  f"(max gap/bound {worst_ratio:.2f}), {elapsed:.1f}s")


def test_c03_digamma(report):
    t0 = time.perf_counter()
    n = np.arange(1, 10_001, dtype=float)
    psi = digamma(n)
    psi_next = digamma(n + 1)
    rec = np.abs(psi_next - psi - 1 / n)
    gap_excess = np.abs(psi - np.log(n)) - 1 / n
    mp = np.array([float(mpmath.digamma(int(v))) for v in n[::97]])
    oracle = np.abs(psi[::97] - mp).max()
    elapsed = time.perf_counter() - t0
    ok = rec.max() <= 1e-10 and gap_excess.max() <= 1e-10 and oracle <= 1e-10 and elapsed < 5
    assert verdict(report, 3, ok, f"max recurrence residual={rec.max():.1e}, max(|psi-log|-1/n)={gap_excess.max():.2e}, "
                                  f"max |psi-mpmath|={oracle:.1e}, {elapsed:.2f}s")


def _invariance_failures(rng, fn):
    perm_bad = shift_bad = 0
    for _ in range(20):
        ds = dyadic_dataset(rng)
        perm = rng.permutation(ds.n)
        shift_x = rng.integers(-5, 6, size=ds.x_dim).astype(float)
        shift_y = rng.integers(-5, 6, size=ds.y_dim).astype(float)
        base = fn(ds, None)
        perm_bad += fn(ds.take(perm), perm) != base
        shifted = validate_dataset(ds.x + shift_x, ds.y + shift_y)
        shift_bad += fn(shifted, None) != base
    return perm_bad, shift_bad


def test_c04_invariances(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(104)
    mixed, ksg = get_estimator("mixed"), get_estimator("ksg")
    fixed, adaptive = get_estimator("fixed_partition"), get_estimator("adaptive_partition")

    def one_d(est):
        def fn(ds, perm):
            return est(validate_dataset(ds.x[:, 0], ds.y[:, 0])).value
        return fn

    def noisy(ds, perm):
        # the noise realization follows its sample; grid values keep shifts exact
        e = gaussian_noise((ds.n, ds.x_dim + ds.y_dim), NoiseConfig(0.1, 7))
        e = np.round(e * 2.0**30) / 2.0**30
        if perm is not None:
            e = e[perm]
        return estimate_ksg(add_noise(ds, e)).value

    checks = {
        "mixed": lambda ds, perm: mixed(ds).value,
        "ksg": lambda ds, perm: ksg(ds).value,
        "noisy_ksg": noisy,
        "fixed_partition": lambda ds, perm: fixed(ds).value,
        "adaptive_partition": one_d(adaptive),
    }
    failures = {name: _invariance_failures(rng, fn) for name, fn in checks.items()}
    elapsed = time.perf_counter() - t0
    ok = all(p == 0 and s == 0 for p, s in failures.values()) and elapsed < 30
    detail = ", ".join(f"{k} perm/shift fails={p}/{s}" for k, (p, s) in failures.items())
    assert verdict(report, 4, ok, f"{detail}, {elapsed:.1f}s")


def test_c05_experiment_2(report):
    t0 = time.perf_counter()
    res = mse_sweep(get_estimator("mixed"), GeneratorSpec("exp2", {"m": 5}), [500, 1000, 2000, 4000],
                    trials=100, master_seed=5)
    elapsed = time.perf_counter() - t0
    mean_err = float(res.estimates[-1].mean() - res.ground_truth)
    mse = res.mse_per_size[-1]
    inversions = sum(1 for a, b in zip(res.mse_per_size, res.mse_per_size[1:]) if b > a)
    ok = abs(mean_err) <= 0.03 and mse <= 0.01 and inversions <= 1 and elapsed < 300
    mses = ", ".join(f"{v:.4f}" for v in res.mse_per_size)
    assert verdict(report, 5, ok, f"exp2 N=4000 mean-truth={mean_err:+.4f} (<=0.03), MSE={mse:.4f} (<=0.01), "
                                  f"MSE by N=[{mses}] inversions={inversions}, {elapsed:.0f}s")


def test_c06_experiment_4(report):
    t0 = time.perf_counter()
    errs = {}
    for p, target in ((0.0, 0.3012), (0.15, 0.25602)):
        res = mse_sweep(get_estimator("mixed"), GeneratorSpec("exp4", {"p": p}), [4000], trials=100, master_seed=6)
        errs[p] = float(res.estimates[0].mean()) - target
    elapsed = time.perf_counter() - t0
    ok = all(abs(e) <= 0.03 for e in errs.values()) and elapsed < 300
    assert verdict(report, 6, ok, f"exp4 mean-target p=0: {errs[0.0]:+.4f}, p=0.15: {errs[0.15]:+.4f} (<=0.03), "
                                  f"{elapsed:.0f}s")


def test_c07_experiment_1(report):
    t0 = time.perf_counter()
    quad = exp1_mi_quadrature()
    mc = exp1_mi_monte_carlo()
    spec = GeneratorSpec("exp1")
    mixed = mse_sweep(get_estimator("mixed"), spec, [4000], trials=100, master_seed=7)
    ksg = mse_sweep(get_estimator("ksg"), spec, [4000], trials=100, master_seed=7)
    elapsed = time.perf_counter() - t0
    agree = abs(quad.value - mc.value)
    m_mse, k_mse = mixed.mse_per_size[0], ksg.mse_per_size[0]
    ok = agree <= 1e-3 and m_mse <= 0.02 and m_mse < k_mse and elapsed < 300
    assert verdict(report, 7, ok, f"exp1 truth quad={quad.value:.5f} mc={mc.value:.5f} (|diff|={agree:.1e}), "
                                  f"mixed MSE={m_mse:.4f} (<=0.02), ksg MSE={k_mse:.4f}, {elapsed:.0f}s")


def test_c08_experiment_3(report):
    t0 = time.perf_counter()
    spec = GeneratorSpec("exp3", {"m": 5, "dims": 2})
    mixed = mse_sweep(get_estimator("mixed"), spec, [4000], trials=50, master_seed=8)
    fixed = mse_sweep(get_estimator("fixed_partition"), spec, [4000], trials=50, master_seed=8)
    elapsed = time.perf_counter() - t0
    err = float(mixed.estimates[0].mean() - mixed.ground_truth)
    ok = abs(err) <= 0.1 and fixed.mse_per_size[0] > mixed.mse_per_size[0] and elapsed < 600
    assert verdict(report, 8, ok, f"exp3 target={mixed.ground_truth:.5f} mean-target={err:+.4f} (<=0.1), "
                                  f"MSE mixed={mixed.mse_per_size[0]:.4f} fixed={fixed.mse_per_size[0]:.4f}, "
                                  f"{elapsed:.0f}s")


def test_c09_feature_selection(report):
    t0 = time.perf_counter()
    mixed, fixed = get_estimator("mixed"), get_estimator("fixed_partition")
    a_mixed, a_fixed = [], []
    for s in range(10):
        data = gen_featsel(5000, seed=child_seed(9, s))
        for est, out in ((mixed, a_mixed), (fixed, a_fixed)):
            ranking = rank_features(data.features, data.target, est, seed=s)
            out.append(auroc(roc_curve(ranking.scores, data.relevant)))
    elapsed = time.perf_counter() - t0
    m, f = float(np.mean(a_mixed)), float(np.mean(a_fixed))
    ok = m >= 0.9 and m >= f and elapsed < 600
    assert verdict(report, 9, ok, f"featsel mean AUROC mixed={m:.3f} (>=0.9) fixed={f:.3f}, {elapsed:.0f}s")


def test_c10_null_calibration(report):
    t0 = time.perf_counter()
    vals = []
    for s in range(50):
        r = np.random.default_rng(child_seed(10, s))
        vals.append(estimate_mixed(validate_dataset(r.uniform(size=4000), r.uniform(size=4000))).value)
    rng = np.random.default_rng(1010)
    labels = np.arange(10_000) % 2 == 0
    a = auroc(roc_curve(rng.uniform(size=10_000), labels))
    elapsed = time.perf_counter() - t0
    mean = float(np.mean(vals))
    ok = abs(mean) <= 0.05 and abs(a - 0.5) <= 0.02 and elapsed < 120
    assert verdict(report, 10, ok, f"null mean estimate={mean:+.4f} (<=0.05), random-score AUROC={a:.4f}, "
                                   f"{elapsed:.1f}s")


# supplementary: digamma marginal terms on the bias-sensitive runs


def test_supplementary_digamma_marginals(report):
    est = get_estimator("mixed", marginal_term="digamma")
    e2 = mse_sweep(est, GeneratorSpec("exp2"), [4000], trials=100, master_seed=5)
    e4 = {p: mse_sweep(est, GeneratorSpec("exp4", {"p": p}), [4000], trials=100, master_seed=6) for p in (0.0, 0.15)}
    e3 = mse_sweep(est, GeneratorSpec("exp3", {"m": 5, "dims": 2}), [4000], trials=50, master_seed=8)
    exp2_err = float(e2.estimates[0].mean() - e2.ground_truth)
    exp3_err = float(e3.estimates[0].mean() - e3.ground_truth)
    exp4_err = {p: float(r.estimates[0].mean()) - t for (p, r), t in zip(e4.items(), (0.3012, 0.25602))}
    line = (f"supplementary (digamma marginals): exp2 mean-truth={exp2_err:+.4f} MSE={e2.mse_per_size[0]:.5f}; "
            f"exp4 mean-target p=0: {exp4_err[0.0]:+.4f}, p=0.15: {exp4_err[0.15]:+.4f}; "
            f"exp3 mean-target={exp3_err:+.4f}")
    report(line)
    print(line)
    assert abs(exp2_err) <= 0.03 and e2.mse_per_size[0] <= 0.01
    assert all(abs(e) <= 0.03 for e in exp4_err.values())
    assert abs(exp3_err) <= 0.1
