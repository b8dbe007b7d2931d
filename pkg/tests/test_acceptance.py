"""Acceptance suite: one test per criterion, at full stated scale.

Each test prints a single PASS/FAIL line with its headline statistic and
elapsed time.  Seeds and derived thresholds are frozen in
acceptance_configs.py, fixed by the pre-registered calibration run
(docs/calibration.md).  Runs use the compiled walker; the pure-Python
fallback is correct but would blow the runtime budgets.
"""

import time

import numpy as np

import acceptance_configs as ac
from jumpest.estimator import detect_jumps
from jumpest.harness import emit, run_experiment


def _report(num, ok, elapsed, budget, detail):
    status = "PASS" if ok else "FAIL"
    print(f"ACCEPTANCE {num:02d} {status} ({elapsed:.1f}s / budget {budget:.0f}s): {detail}")


class Timer:
    def __enter__(self):
        self.t0 = time.monotonic()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.monotonic() - self.t0


def test_criterion_01_exact_lamn_identity():
    budget = 10.0
    with Timer() as t:
        s = run_experiment(ac.lamn_exact_cfg())
        worst = s.aggregates["max_abs_residual_n1000"]
        ok = worst <= 1e-10 and s.aggregates["excluded_multijump_count_n1000"] <= 20
    _report(1, ok, t.elapsed, budget, f"max |residual| = {worst:.3e} over 1000 paths x h in {{+-1, +-2}}")
    assert ok
    assert t.elapsed < budget


def test_criterion_02_information_splitting():
    budget = 5.0
    with Timer() as t:
        s = run_experiment(ac.info_identity_cfg())
        worst = s.aggregates["max_rel_error"]
        ok = worst <= 1e-12 and s.aggregates["contexts"] == 100_000
    _report(2, ok, t.elapsed, budget, f"max rel error of 1/I = 1/I_aug- + 1/I_aug+ is {worst:.3e}")
    assert ok
    assert t.elapsed < budget


def test_criterion_03_detection_consistency():
    budget = 120.0
    with Timer() as t:
        s = run_experiment(ac.consistency_cfg())
        rates = [s.aggregates[f"detection_rate_n{n}"] for n in (100, 1000, 10_000)]
        ok = rates[-1] >= ac.CONSISTENCY_MIN_RATE_N10000 and rates[0] < rates[1] < rates[2]
    _report(3, ok, t.elapsed, budget,
            f"alignment rates {[round(r, 4) for r in rates]} over n in {{1e2, 1e3, 1e4}}, R=2000")
    assert ok
    assert t.elapsed < budget


def test_criterion_04_clt_mixed_normal():
    budget = 300.0
    with Timer() as t:
        passes = []
        for seed in ac.CLT_SEEDS:
            s = run_experiment(ac.clt_cfg(seed))
            passes.append(s.aggregates["ks_distance_n4000"] < s.aggregates["ks_critical_1pct_n4000"])
        ok = sum(passes) >= 4
    _report(4, ok, t.elapsed, budget,
            f"KS vs N(0,1) passed on {sum(passes)}/5 preregistered seeds (n=4000, R=5000)")
    assert ok
    assert t.elapsed < budget


def test_criterion_05_sqrt_n_rate():
    budget = 180.0
    with Timer() as t:
        s = run_experiment(ac.rate_cfg())
        ratio = s.aggregates["rmse_raw_n1000"] / s.aggregates["rmse_raw_n4000"]
        ok = abs(ratio - 2.0) <= 2.0 * ac.RATE_RATIO_TOL
    _report(5, ok, t.elapsed, budget, f"RMSE(n=1000)/RMSE(n=4000) = {ratio:.4f} (target 2 +- 15%)")
    assert ok
    assert t.elapsed < budget


def test_criterion_06_efficiency_bound():
    budget = 600.0
    with Timer() as t:
        details = []
        ok = True
        for label, cfg in (("const", ac.efficiency_const_cfg()), ("bsine", ac.efficiency_bsine_cfg())):
            s = run_experiment(cfg)
            ratios = [s.aggregates[f"variance_ratio_n10000_d{d}"] for d in range(10)]
            controls = [s.aggregates[f"control15_ratio_n10000_d{d}"] for d in range(10)]
            worst = max(abs(r - 1.0) for r in ratios)
            rejected = sum(1 for c in controls if not 0.9 <= c <= 1.1)
            ok = ok and worst <= ac.EFFICIENCY_RATIO_TOL and rejected == 10
            details.append(f"{label}: max|ratio-1|={worst:.4f}, control rejected {rejected}/10")
    _report(6, ok, t.elapsed, budget, "; ".join(details))
    assert ok
    assert t.elapsed < budget


def test_criterion_07_fractional_part_law():
    budget = 120.0
    with Timer() as t:
        s = run_experiment(ac.frac_uniform_cfg())
        ks_ok = s.aggregates["ks_distance_n10000"] < s.aggregates["ks_critical_1pct_n10000"]
        devs = [abs(s.aggregates[f"var_wb_n10000_d{d}"] / ((d + 0.5) / 10) - 1.0) for d in range(10)]
        ok = ks_ok and max(devs) <= ac.FRAC_STRATUM_TOL
    _report(7, ok, t.elapsed, budget,
            f"frac KS = {s.aggregates['ks_distance_n10000']:.5f} "
            f"(crit {s.aggregates['ks_critical_1pct_n10000']:.5f}), "
            f"worst stratum-variance rel dev = {max(devs):.4f}")
    assert ok
    assert t.elapsed < budget


def test_criterion_08_lamn_statistics_limit():
    budget = 300.0
    with Timer() as t:
        ks_run = run_experiment(ac.lamn_stats_ks_cfg())
        ks_ok = ks_run.aggregates["ks_distance_n10000"] < ks_run.aggregates["ks_critical_1pct_n10000"]
        sweep = run_experiment(ac.lamn_stats_sweep_cfg())
        medians = [sweep.aggregates[f"median_rel_i_err_n{n}"] for n in (1000, 4000, 16_000)]
        ok = ks_ok and medians[0] > medians[1] > medians[2] and medians[2] <= ac.LAMN_MEDIAN_BOUND_N16000
    _report(8, ok, t.elapsed, budget,
            f"pooled N_n KS = {ks_run.aggregates['ks_distance_n10000']:.5f} "
            f"(crit {ks_run.aggregates['ks_critical_1pct_n10000']:.5f}), "
            f"median rel I err {[format(v, '.2e') for v in medians]}")
    assert ok
    assert t.elapsed < budget


def test_criterion_09_detector_matches_brute_force():
    budget = 1.0
    with Timer() as t:
        rng = np.random.default_rng(4109)
        ok = True
        for _ in range(1000):
            n = int(rng.integers(1, 51))
            inc = rng.normal(scale=rng.uniform(0.05, 1.0), size=n)
            u_n = rng.uniform(0.01, 1.0)
            obs = np.concatenate([[0.0], np.cumsum(inc)])
            det = detect_jumps(obs, u_n)
            brute = [i for i in range(n) if abs(obs[i + 1] - obs[i]) >= u_n]
            ok = ok and det.detected_indices.tolist() == brute
    _report(9, ok, t.elapsed, budget, "1000 random instances, exact index agreement")
    assert ok
    assert t.elapsed < budget


def test_criterion_10_byte_identical_across_workers(tmp_path):
    budget = 120.0
    with Timer() as t:
        blobs = []
        for threads in (1, 4, 8):
            out = tmp_path / f"threads{threads}"
            emit(run_experiment(ac.determinism_cfg(threads)), str(out))
            blobs.append(((out / "replicates.csv").read_bytes(), (out / "summary.json").read_bytes()))
        ok = blobs[0] == blobs[1] == blobs[2]
    _report(10, ok, t.elapsed, budget, "replicates.csv and summary.json byte-identical for 1/4/8 workers")
    assert ok
    assert t.elapsed < budget


