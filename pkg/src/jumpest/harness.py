"""Monte Carlo experiment harness.

Each experiment simulates replicates (one counter-based RNG stream per
replicate), reduces them to one row per replicate-jump, and computes named
aggregate statistics from the merged rows.  Summaries are pure functions of
the ExperimentConfig: replicates may run across worker processes, but rows are
merged in replicate order before any aggregation, so results are byte-stable
for any worker count.

Experiments
-----------
consistency    alignment rate of the threshold detector (K_hat = K and exact cells)
clt            pooled standardized errors of the jump estimator vs N(0,1)
efficiency     per-frac-decile variance of scaled errors vs the optimal bound
lamn_stats     pooled N_n vs N(0,1) and relative error of I_n vs its limit
lamn_exact     exact quadratic-expansion residuals in the Gaussian closed form
frac_uniform   fractional parts vs U(0,1), Brownian fragment variances
info_identity  1/I = 1/I_aug_minus + 1/I_aug_plus on random contexts
"""

from __future__ import annotations

import csv
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import ndtr

import jumpest
from jumpest import model as mdl
from jumpest.estimator import detect_jumps, estimation_error, threshold
from jumpest.lamn import MultiJumpCellError, gaussian_model_loglik_ratio, lamn_expansion_residual, lamn_statistics
from jumpest.limit_law import JumpContext, augmented_informations, context_from_path, parametric_information
from jumpest.simulate import replicate_rng, simulate_replicate

__all__ = [
    "EXPERIMENTS",
    "ExperimentConfig",
    "ExperimentSummary",
    "KS_CRITICAL_1PCT_COEF",
    "ks_statistic",
    "run_experiment",
    "run_consistency_experiment",
    "run_clt_experiment",
    "run_efficiency_experiment",
    "run_lamn_stats_experiment",
    "run_lamn_exact_experiment",
    "run_frac_uniform_experiment",
    "run_info_identity_experiment",
    "emit",
]

EXPERIMENTS = (
    "consistency",
    "clt",
    "efficiency",
    "lamn_stats",
    "lamn_exact",
    "frac_uniform",
    "info_identity",
)

# Asymptotic 1% quantile of the Kolmogorov distribution.
KS_CRITICAL_1PCT_COEF = 1.628

H_GRID = (-2.0, -1.0, 1.0, 2.0)


@dataclass
class ExperimentConfig:
    model: mdl.ModelSpec
    experiment: str
    n_values: list
    replicates: int
    varpi: float = 0.3
    alpha: float = 1.0
    substeps: int = 20
    master_seed: int = 0
    threads: int = 1

    def validate(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}; expected one of {EXPERIMENTS}")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if not self.n_values or list(self.n_values) != sorted(set(int(n) for n in self.n_values)):
            raise ValueError("n_values must be a nonempty strictly ascending list")
        if not 0.0 < self.varpi < 0.5:
            raise ValueError(f"varpi must lie in (0, 1/2), got {self.varpi}")
        if self.alpha <= 0.0:
            raise ValueError("alpha must be positive")
        if self.substeps < 1:
            raise ValueError("substeps must be >= 1")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")

    def to_dict(self) -> dict:
        # every result-determining field; `threads` only schedules work and is
        # omitted so outputs stay byte-identical across worker counts
        return {
            "model": mdl.model_to_dict(self.model),
            "experiment": self.experiment,
            "n_values": [int(n) for n in self.n_values],
            "replicates": int(self.replicates),
            "varpi": self.varpi,
            "alpha": self.alpha,
            "substeps": int(self.substeps),
            "master_seed": int(self.master_seed),
        }


@dataclass
class ExperimentSummary:
    experiment: str
    columns: list
    per_replicate: list            # row tuples matching `columns`
    aggregates: dict
    config: ExperimentConfig


# ---------------------------------------------------------------------------
# Kolmogorov-Smirnov distance
# ---------------------------------------------------------------------------

def ks_statistic(sample, cdf: Callable) -> tuple:
    """(sup-norm distance between the empirical CDF and `cdf`, asymptotic 1% critical value).

    The critical value is 1.628/sqrt(m); sample sizes in the acceptance runs
    are >= 5e3, where the asymptotic approximation is adequate.
    """
    x = np.sort(np.asarray(sample, dtype=float))
    m = x.size
    if m == 0:
        raise ValueError("ks_statistic needs a nonempty sample")
    try:
        f = np.asarray(cdf(x), dtype=float)
        if f.shape != x.shape:
            raise TypeError
    except (TypeError, ValueError):
        f = np.array([float(cdf(v)) for v in x])
    i = np.arange(1, m + 1)
    d = max(float(np.max(i / m - f)), float(np.max(f - (i - 1) / m)))
    return d, KS_CRITICAL_1PCT_COEF / math.sqrt(m)


def _std_normal_cdf(x):
    return ndtr(x)


def _uniform_cdf(x):
    return np.clip(x, 0.0, 1.0)


# ---------------------------------------------------------------------------
# Per-replicate workers (module level so process pools can pickle the tasks)
# ---------------------------------------------------------------------------

_NAN = float("nan")


def _detection_rows(experiment, model, n, substeps, seed, varpi, alpha, r):
    path = simulate_replicate(model, n, substeps, seed, r)
    det = detect_jumps(path.obs, threshold(n, varpi, alpha), varpi, alpha)
    err = estimation_error(det, path)
    mj = int(path.has_multijump_cell)
    if experiment == "consistency":
        return [(r, n, path.k, det.k_hat, int(err.aligned), mj)]
    if not err.aligned or mj:
        return [(r, n, -1, path.k, _NAN, _NAN, _NAN, _NAN, _NAN, _NAN, 0, mj)]
    rows = []
    for k in range(path.k):
        ctx = context_from_path(model, path, k)
        inv_info = ctx.u * ctx.a_pre ** 2 + (1.0 - ctx.u) * ctx.a_post ** 2
        e = float(err.scaled_errors[k])
        rows.append((r, n, k, path.k, ctx.u, ctx.a_pre, ctx.a_post, inv_info,
                     e, e / math.sqrt(inv_info), 1, 0))
    return rows


def _lamn_stats_rows(model, n, substeps, seed, r):
    path = simulate_replicate(model, n, substeps, seed, r)
    try:
        stats = lamn_statistics(path, model, path.marks, n)
    except MultiJumpCellError:
        return [(r, n, -1, _NAN, _NAN, _NAN, _NAN, _NAN, _NAN, 1)]
    rows = []
    for k, s in enumerate(stats.per_jump):
        li = float(stats.limit_i[k])
        rel = abs(s.i_n - li) / li
        rows.append((r, n, k, float(path.frac[k]), s.d_n, s.i_n, s.n_n, li, rel, 0))
    return rows


def _lamn_exact_rows(model, n, substeps, seed, r):
    path = simulate_replicate(model, n, substeps, seed, r)
    sigma = model.diffusion.sigma
    b0 = model.drift.b0
    if path.has_multijump_cell:
        return [(r, n, _NAN, path.k, _NAN, _NAN, 1)]
    stats = lamn_statistics(path, model, path.marks, n) if path.k else None
    rows = []
    for h in H_GRID:
        hv = np.full(path.k, h)
        z = gaussian_model_loglik_ratio(path, path.marks, hv, n, sigma, b0, model=model)
        res = lamn_expansion_residual(z, stats, hv) if path.k else z
        rows.append((r, n, h, path.k, z, res, 0))
    return rows


def _frac_uniform_rows(model, n, substeps, seed, r):
    path = simulate_replicate(model, n, substeps, seed, r)
    root_n = math.sqrt(n)
    return [
        (r, n, k, float(path.frac[k]), root_n * float(path.w_before[k]), root_n * float(path.w_after[k]))
        for k in range(path.k)
    ]


# contexts drawn per replicate stream; keeps stream-derivation cost amortized
INFO_CONTEXTS_PER_REPLICATE = 100


def _info_identity_rows(seed, r):
    rng = replicate_rng(seed, r)
    rows = []
    for j in range(INFO_CONTEXTS_PER_REPLICATE):
        u = rng.random()
        while not 0.0 < u < 1.0:
            u = rng.random()
        a_pre = 0.5 + 1.5 * rng.random()
        a_post = 0.5 + 1.5 * rng.random()
        sign = -1.0 if rng.random() < 0.5 else 1.0
        c_dot = sign * (0.5 + 1.5 * rng.random())
        c_prime = -0.5 + rng.random()
        ctx = JumpContext(a_pre=a_pre, a_post=a_post, c_dot=c_dot, c_prime=c_prime, u=u)
        i_para = parametric_information(ctx)
        i_minus, i_plus = augmented_informations(ctx)
        rel = abs(1.0 / i_para - (1.0 / i_minus + 1.0 / i_plus)) / (1.0 / i_para)
        rows.append((r * INFO_CONTEXTS_PER_REPLICATE + j, u, a_pre, a_post, c_dot, c_prime,
                     i_para, i_minus, i_plus, rel))
    return rows


def _replicate_task(task):
    experiment, model, n, substeps, seed, varpi, alpha, r = task
    if experiment in ("consistency", "clt", "efficiency"):
        return _detection_rows(experiment, model, n, substeps, seed, varpi, alpha, r)
    if experiment == "lamn_stats":
        return _lamn_stats_rows(model, n, substeps, seed, r)
    if experiment == "lamn_exact":
        return _lamn_exact_rows(model, n, substeps, seed, r)
    if experiment == "frac_uniform":
        return _frac_uniform_rows(model, n, substeps, seed, r)
    if experiment == "info_identity":
        return _info_identity_rows(seed, r)
    raise ValueError(f"unknown experiment {experiment!r}")


_COLUMNS = {
    "consistency": ["replicate", "n", "k_true", "k_hat", "aligned", "multijump"],
    "clt": ["replicate", "n", "k", "k_true", "frac", "a_pre", "a_post", "inv_info",
            "err_scaled", "err_std", "aligned", "multijump"],
    "efficiency": ["replicate", "n", "k", "k_true", "frac", "a_pre", "a_post", "inv_info",
                   "err_scaled", "err_std", "aligned", "multijump"],
    "lamn_stats": ["replicate", "n", "k", "frac", "d_n", "i_n", "n_n", "limit_i",
                   "rel_err", "multijump"],
    "lamn_exact": ["replicate", "n", "h", "k_true", "z_n", "residual", "multijump"],
    "frac_uniform": ["replicate", "n", "k", "frac", "wb_scaled", "wa_scaled"],
    "info_identity": ["replicate", "u", "a_pre", "a_post", "c_dot", "c_prime",
                      "i_para", "i_aug_minus", "i_aug_plus", "rel_err"],
}


# ---------------------------------------------------------------------------
# Execution and aggregation
# ---------------------------------------------------------------------------

def _run_rows(cfg: ExperimentConfig) -> list:
    rows = []
    n_values = [0] if cfg.experiment == "info_identity" else [int(n) for n in cfg.n_values]
    for n in n_values:
        t0 = time.monotonic()
        tasks = [
            (cfg.experiment, cfg.model, n, cfg.substeps, cfg.master_seed, cfg.varpi, cfg.alpha, r)
            for r in range(cfg.replicates)
        ]
        if cfg.threads <= 1:
            chunks = map(_replicate_task, tasks)
            for chunk in chunks:
                rows.extend(chunk)
        else:
            chunksize = max(1, cfg.replicates // (cfg.threads * 8))
            with ProcessPoolExecutor(max_workers=cfg.threads) as ex:
                for chunk in ex.map(_replicate_task, tasks, chunksize=chunksize):
                    rows.extend(chunk)
        print(
            f"[jumpest] {cfg.experiment}: n={n} replicates={cfg.replicates} "
            f"({time.monotonic() - t0:.1f}s)",
            file=sys.stderr,
        )
    return rows


def _col(rows, columns, name):
    j = columns.index(name)
    return np.array([row[j] for row in rows], dtype=float)


def _decile(frac: float) -> int:
    return min(int(frac * 10.0), 9)


def _aggregate(cfg: ExperimentConfig, columns, rows) -> dict:
    exp = cfg.experiment
    agg = {}
    if exp == "info_identity":
        rel = _col(rows, columns, "rel_err")
        agg["max_rel_error"] = float(np.max(rel))
        agg["mean_rel_error"] = float(np.mean(rel))
        agg["contexts"] = int(rel.size)
        return agg

    jn = columns.index("n")
    for n in cfg.n_values:
        n = int(n)
        sub = [row for row in rows if row[jn] == n]
        tag = f"n{n}"
        if exp == "consistency":
            aligned = _col(sub, columns, "aligned")
            agg[f"detection_rate_{tag}"] = float(np.mean(aligned))
            agg[f"multijump_count_{tag}"] = int(np.sum(_col(sub, columns, "multijump")))
            agg[f"replicates_{tag}"] = len(sub)
        elif exp in ("clt", "efficiency"):
            jk = columns.index("k")
            good = [row for row in sub if row[jk] >= 0]
            markers = [row for row in sub if row[jk] < 0]
            agg[f"excluded_unaligned_count_{tag}"] = sum(1 for row in markers if row[columns.index("multijump")] == 0)
            agg[f"excluded_multijump_count_{tag}"] = sum(1 for row in markers if row[columns.index("multijump")] == 1)
            agg[f"pooled_jumps_{tag}"] = len(good)
            if not good:
                continue
            err_std = _col(good, columns, "err_std")
            err_scaled = _col(good, columns, "err_scaled")
            if exp == "clt":
                d, crit = ks_statistic(err_std, _std_normal_cdf)
                agg[f"ks_distance_{tag}"] = d
                agg[f"ks_critical_1pct_{tag}"] = crit
                agg[f"empirical_variance_{tag}"] = float(np.var(err_std, ddof=1))
                agg[f"rmse_raw_{tag}"] = float(np.sqrt(np.mean(err_scaled ** 2) / n))
            else:
                fr = _col(good, columns, "frac")
                inv_info = _col(good, columns, "inv_info")
                a_post = _col(good, columns, "a_post")
                deciles = np.minimum((fr * 10.0).astype(int), 9)
                for d10 in range(10):
                    mask = deciles == d10
                    cnt = int(np.sum(mask))
                    agg[f"stratum_count_{tag}_d{d10}"] = cnt
                    if cnt < 2:
                        continue
                    v = float(np.var(err_scaled[mask], ddof=1))
                    ratio = v / float(np.mean(inv_info[mask]))
                    agg[f"variance_ratio_{tag}_d{d10}"] = ratio
                    agg[f"control15_ratio_{tag}_d{d10}"] = ratio / 1.5
                    agg[f"apost_ratio_{tag}_d{d10}"] = v / float(np.mean(a_post[mask] ** 2))
        elif exp == "lamn_stats":
            jk = columns.index("k")
            good = [row for row in sub if row[jk] >= 0]
            agg[f"excluded_multijump_count_{tag}"] = sum(1 for row in sub if row[columns.index("multijump")] == 1)
            agg[f"pooled_jumps_{tag}"] = len(good)
            if not good:
                continue
            nn = _col(good, columns, "n_n")
            d, crit = ks_statistic(nn, _std_normal_cdf)
            agg[f"ks_distance_{tag}"] = d
            agg[f"ks_critical_1pct_{tag}"] = crit
            agg[f"median_rel_i_err_{tag}"] = float(np.median(_col(good, columns, "rel_err")))
        elif exp == "lamn_exact":
            good = [row for row in sub if row[columns.index("multijump")] == 0]
            agg[f"excluded_multijump_count_{tag}"] = sum(1 for row in sub if row[columns.index("multijump")] == 1)
            if not good:
                continue
            res = _col(good, columns, "residual")
            agg[f"max_abs_residual_{tag}"] = float(np.max(np.abs(res)))
            agg[f"mean_abs_residual_{tag}"] = float(np.mean(np.abs(res)))
        elif exp == "frac_uniform":
            fr = _col(sub, columns, "frac")
            if fr.size == 0:
                continue
            d, crit = ks_statistic(fr, _uniform_cdf)
            agg[f"ks_distance_{tag}"] = d
            agg[f"ks_critical_1pct_{tag}"] = crit
            wb = _col(sub, columns, "wb_scaled")
            wa = _col(sub, columns, "wa_scaled")
            agg[f"total_increment_variance_{tag}"] = float(np.var(wb + wa, ddof=1))
            deciles = np.minimum((fr * 10.0).astype(int), 9)
            for d10 in range(10):
                mask = deciles == d10
                if int(np.sum(mask)) < 2:
                    continue
                agg[f"var_wb_{tag}_d{d10}"] = float(np.var(wb[mask], ddof=1))
                agg[f"stratum_midpoint_{tag}_d{d10}"] = (d10 + 0.5) / 10.0
    return agg


def run_experiment(cfg: ExperimentConfig) -> ExperimentSummary:
    """Run one experiment; the result depends only on cfg (not on thread count)."""
    cfg.validate()
    if cfg.experiment != "info_identity":
        mdl.require_valid(cfg.model)
    if cfg.experiment == "lamn_exact":
        if not (cfg.model.has_constant_coefficients and isinstance(cfg.model.jump, mdl.AdditiveJump)):
            raise ValueError("lamn_exact needs the constant-coefficient additive family")
    rows = _run_rows(cfg)
    columns = list(_COLUMNS[cfg.experiment])
    aggregates = _aggregate(cfg, columns, rows)
    return ExperimentSummary(
        experiment=cfg.experiment,
        columns=columns,
        per_replicate=rows,
        aggregates=aggregates,
        config=cfg,
    )


def _named_runner(kind: str):
    def run(cfg: ExperimentConfig) -> ExperimentSummary:
        if cfg.experiment != kind:
            raise ValueError(f"config is for {cfg.experiment!r}, expected {kind!r}")
        return run_experiment(cfg)

    run.__name__ = f"run_{kind}_experiment"
    return run


run_consistency_experiment = _named_runner("consistency")
run_clt_experiment = _named_runner("clt")
run_efficiency_experiment = _named_runner("efficiency")
run_lamn_stats_experiment = _named_runner("lamn_stats")
run_lamn_exact_experiment = _named_runner("lamn_exact")
run_frac_uniform_experiment = _named_runner("frac_uniform")
run_info_identity_experiment = _named_runner("info_identity")


# ---------------------------------------------------------------------------
# Emission
# ---------------------------------------------------------------------------

def _format_cell(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def emit(summary: ExperimentSummary, out_dir: str) -> tuple:
    """Write replicates.csv (one row per replicate-jump) and summary.json into out_dir.

    Byte-stable for identical inputs: fixed column order, 17-significant-digit
    floats, sorted JSON keys.
    """
    try:
        os.makedirs(out_dir, exist_ok=True)
        csv_path = os.path.join(out_dir, "replicates.csv")
        with open(csv_path, "w", encoding="utf-8", newline="") as f:
            w = csv.writer(f)
            w.writerow(summary.columns)
            for row in summary.per_replicate:
                w.writerow([_format_cell(v) for v in row])
        json_path = os.path.join(out_dir, "summary.json")
        doc = {
            "experiment": summary.experiment,
            "artifact_version": jumpest.__version__,
            "config": summary.config.to_dict(),
            "aggregates": summary.aggregates,
        }
        with open(json_path, "w", encoding="utf-8") as f:
            json.dump(doc, f, indent=2, sort_keys=True)
            f.write("\n")
    except OSError as e:
        raise OSError(f"cannot write experiment output under {out_dir!r}: {e}") from e
    return csv_path, json_path
