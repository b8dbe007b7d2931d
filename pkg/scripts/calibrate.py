#!/usr/bin/env python3
"""Pre-registered calibration run.

Runs every acceptance-scale experiment on the three calibration master seeds
(plus the five preregistered CLT seeds) and prints the statistics the
acceptance thresholds are frozen from.  The output of this script is recorded
in docs/calibration.md; thresholds in tests/acceptance_configs.py must only be
changed together with a rerun of this script.

Usage: python scripts/calibrate.py [--quick]
"""

import argparse
import os
import sys
import time
from dataclasses import replace

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "tests"))

import acceptance_configs as ac  # noqa: E402
from jumpest.harness import run_experiment  # noqa: E402


def show(label, agg, keys):
    picked = {k: (format(v, ".5g") if isinstance(v, float) else v) for k, v in agg.items() if any(p in k for p in keys)}
    print(f"  {label}: {picked}")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--quick", action="store_true", help="scale replicates down 10x (smoke run)")
    args = ap.parse_args()

    def scaled(cfg):
        if args.quick:
            return replace(cfg, replicates=max(50, cfg.replicates // 10))
        return cfg

    t_start = time.time()

    print("== criterion 1: exact expansion residual (b0 = 0) ==")
    for seed in ac.CALIBRATION_SEEDS:
        s = run_experiment(scaled(ac.lamn_exact_cfg(seed=seed)))
        show(f"seed {seed}", s.aggregates, ["max_abs_residual", "excluded"])

    print("== criterion 1 companion: drift residual scaling (b0 = 0.5) ==")
    for seed in ac.CALIBRATION_SEEDS[:1]:
        s = run_experiment(scaled(ac.lamn_exact_drift_cfg(seed=seed)))
        show(f"seed {seed}", s.aggregates, ["mean_abs_residual"])

    print("== criterion 2: information splitting ==")
    for seed in ac.CALIBRATION_SEEDS:
        s = run_experiment(scaled(ac.info_identity_cfg(seed=seed)))
        show(f"seed {seed}", s.aggregates, ["max_rel_error"])

    print("== criterion 3: consistency sweep ==")
    for seed in ac.CALIBRATION_SEEDS:
        s = run_experiment(scaled(ac.consistency_cfg(seed=seed)))
        show(f"seed {seed}", s.aggregates, ["detection_rate", "multijump"])

    print("== criterion 4: CLT KS on preregistered seeds ==")
    for seed in ac.CLT_SEEDS:
        s = run_experiment(scaled(ac.clt_cfg(seed)))
        show(f"seed {seed}", s.aggregates, ["ks_", "empirical_variance", "pooled"])

    print("== criterion 5: sqrt(n) rate ==")
    for seed in ac.CALIBRATION_SEEDS:
        s = run_experiment(scaled(ac.rate_cfg(seed=seed)))
        r = s.aggregates["rmse_raw_n1000"] / s.aggregates["rmse_raw_n4000"]
        print(f"  seed {seed}: rmse ratio = {r:.4f}")

    print("== criterion 6: efficiency (constant + bounded-sine) ==")
    for seed in ac.CALIBRATION_SEEDS:
        for label, cfg in (("const", ac.efficiency_const_cfg(seed=seed)),
                           ("bsine", ac.efficiency_bsine_cfg(seed=seed))):
            s = run_experiment(scaled(cfg))
            ratios = [s.aggregates[f"variance_ratio_n10000_d{d}"] for d in range(10)]
            controls = [s.aggregates[f"control15_ratio_n10000_d{d}"] for d in range(10)]
            print(f"  seed {seed} {label}: max|ratio-1| = {max(abs(r - 1) for r in ratios):.4f}, "
                  f"controls outside band = {sum(1 for c in controls if not 0.9 <= c <= 1.1)}/10, "
                  f"excluded = {s.aggregates['excluded_unaligned_count_n10000']}"
                  f"+{s.aggregates['excluded_multijump_count_n10000']}")

    print("== criterion 7: fractional parts ==")
    for seed in ac.CALIBRATION_SEEDS:
        s = run_experiment(scaled(ac.frac_uniform_cfg(seed=seed)))
        worst = max(abs(s.aggregates[f"var_wb_n10000_d{d}"] / ((d + 0.5) / 10) - 1) for d in range(10))
        print(f"  seed {seed}: ks = {s.aggregates['ks_distance_n10000']:.5f} "
              f"(crit {s.aggregates['ks_critical_1pct_n10000']:.5f}), "
              f"worst stratum rel dev = {worst:.4f}, "
              f"total var = {s.aggregates['total_increment_variance_n10000']:.4f}")

    print("== criterion 8: lamn statistics ==")
    for seed in ac.CALIBRATION_SEEDS:
        s = run_experiment(scaled(ac.lamn_stats_ks_cfg(seed=seed)))
        show(f"seed {seed} ks-run", s.aggregates, ["ks_"])
        s = run_experiment(scaled(ac.lamn_stats_sweep_cfg(seed=seed)))
        show(f"seed {seed} sweep", s.aggregates, ["median_rel_i_err"])

    print(f"total calibration time: {time.time() - t_start:.0f}s")


if __name__ == "__main__":
    main()
