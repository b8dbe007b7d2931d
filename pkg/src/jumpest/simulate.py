"""Trajectory simulation with exact jump-time insertion.

Paths are generated by an Euler walk on the refinement of the observation grid
{i/n} by the jump times {T_k}; each refined segment is further split into
``substeps`` equal micro-steps.  For constant drift and diffusion the Gaussian
increments are exact transitions, so sub-stepping is bypassed (one step per
segment, zero discretization bias).  At each T_k the jump c(X_{T_k-}, L_k) is
applied atomically; the pre/post-jump states, the jump sizes, and the Brownian
fragments W_{T_k} - W_{i_k/n} and W_{(i_k+1)/n} - W_{T_k} are recorded for the
verification harness.

Randomness contract: every replicate owns a counter-based Philox stream derived
from (master_seed, replicate_index), so results do not depend on how many
replicates run concurrently or in what order.  Within a replicate, draws happen
in a fixed order: jump count/times first, then marks, then the path normals.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from jumpest import model as mdl
from jumpest._kernel import BACKEND, euler_walk

__all__ = [
    "PathRecord",
    "replicate_rng",
    "sample_jump_times",
    "sample_marks",
    "fractional_parts",
    "simulate_path",
    "simulate_replicate",
    "dump_path_csv",
    "BACKEND",
]


# ---------------------------------------------------------------------------
# RNG streams
# ---------------------------------------------------------------------------

def replicate_rng(master_seed: int, replicate_index: int) -> np.random.Generator:
    """Independent counter-based stream for one replicate.

    Philox keyed through SeedSequence(master_seed, spawn_key=(replicate_index,)):
    replicate r's stream is the same whether replicates run serially,
    threaded, or across processes.
    """
    ss = np.random.SeedSequence(master_seed, spawn_key=(replicate_index,))
    return np.random.Generator(np.random.Philox(ss))


# ---------------------------------------------------------------------------
# Jump times and marks
# ---------------------------------------------------------------------------

def _sorted_uniform_times(rng: np.random.Generator, k: int) -> np.ndarray:
    """k strictly increasing times in (0,1) (order statistics of iid uniforms)."""
    if k == 0:
        return np.empty(0)
    while True:
        t = np.sort(rng.random(k))
        if t[0] > 0.0 and (k == 1 or np.all(np.diff(t) > 0.0)):
            return t


def sample_jump_times(rng: np.random.Generator, law) -> np.ndarray:
    """Sorted jump times in (0,1); count is fixed (FixedK) or Poisson (PoissonRate)."""
    if isinstance(law, mdl.FixedK):
        return _sorted_uniform_times(rng, law.k)
    if isinstance(law, mdl.PoissonRate):
        k = int(rng.poisson(law.rate))
        return _sorted_uniform_times(rng, k)
    raise TypeError(f"unknown jump-time law {law!r}")


def sample_marks(rng: np.random.Generator, law, k: int) -> np.ndarray:
    """k iid marks; support never contains 0 for admissible laws."""
    if k < 0:
        raise ValueError("mark count must be nonnegative")
    if isinstance(law, mdl.UniformInterval):
        return law.lo + (law.hi - law.lo) * rng.random(k)
    if isinstance(law, mdl.GaussianShifted):
        y = law.mu + law.sd * rng.standard_normal(k)
        sign = np.where(y < 0.0, -1.0, 1.0)
        return np.where(np.abs(y) < law.floor, sign * law.floor, y)
    raise TypeError(f"unknown mark law {law!r}")


# ---------------------------------------------------------------------------
# Grid-cell bookkeeping
# ---------------------------------------------------------------------------

def _cell_index(t: float, n: int) -> int:
    """Cell i with i/n <= t < (i+1)/n, floor-based with a one-ulp containment guard."""
    i = int(math.floor(n * t))
    if i > n - 1:
        i = n - 1
    if t < i / n:
        i -= 1
    elif t >= (i + 1) / n:
        i += 1
    return i


def fractional_parts(T, n: int):
    """Per jump time: the grid cell i_k = floor(n*T_k) and the fractional part n*T_k - i_k."""
    T = np.asarray(T, dtype=float)
    idx = np.empty(T.shape, dtype=np.int64)
    frac = np.empty(T.shape)
    for k, t in enumerate(T):
        i = _cell_index(float(t), n)
        f = n * float(t) - i
        if f < 0.0:
            f = 0.0
        elif f >= 1.0:
            f = math.nextafter(1.0, 0.0)
        idx[k] = i
        frac[k] = f
    return idx, frac


# ---------------------------------------------------------------------------
# Path record
# ---------------------------------------------------------------------------

@dataclass
class PathRecord:
    """One simulated trajectory plus the latent per-jump quantities."""

    n: int
    obs: np.ndarray          # X_{i/n}, i = 0..n
    jump_times: np.ndarray   # T_k, strictly increasing in (0,1)
    marks: np.ndarray        # L_k
    grid_index: np.ndarray   # i_k = floor(n*T_k)
    frac: np.ndarray         # n*T_k - i_k in [0,1)
    x_pre: np.ndarray        # X_{T_k-}
    x_post: np.ndarray       # X_{T_k}
    jumps: np.ndarray        # c(X_{T_k-}, L_k) = X_{T_k} - X_{T_k-}
    w_before: np.ndarray     # W_{T_k} - W_{i_k/n}
    w_after: np.ndarray      # W_{(i_k+1)/n} - W_{T_k}
    master_seed: Optional[int] = None
    replicate_index: Optional[int] = None

    @property
    def k(self) -> int:
        return len(self.jump_times)

    @property
    def has_multijump_cell(self) -> bool:
        """True when two jumps share an observation cell (excluded from per-jump statistics)."""
        return self.k >= 2 and bool(np.any(np.diff(self.grid_index) == 0))


# ---------------------------------------------------------------------------
# Simulation
# ---------------------------------------------------------------------------

def _family_codes(model: mdl.ModelSpec):
    d = model.drift
    if isinstance(d, mdl.ConstantDrift):
        dc, d0, d1 = 0, d.b0, 0.0
    else:
        dc, d0, d1 = 1, d.b0, d.b1
    a = model.diffusion
    if isinstance(a, mdl.ConstantDiffusion):
        ac, a0, a1 = 0, a.sigma, 0.0
    else:
        ac, a0, a1 = 1, a.sigma0, a.sigma1
    j = model.jump
    if isinstance(j, mdl.AdditiveJump):
        jc, je = 0, 0.0
    else:
        jc, je = 1, j.eps
    return dc, d0, d1, ac, a0, a1, jc, je


@lru_cache(maxsize=8)
def _base_grid(n: int) -> np.ndarray:
    g = np.arange(n + 1) / n
    g.setflags(write=False)
    return g


@lru_cache(maxsize=8)
def _interior_fractions(m: int) -> np.ndarray:
    g = np.arange(1, m) / m
    g.setflags(write=False)
    return g


def _micro_grid(n: int, T: np.ndarray, m: int):
    """Micro-step times over the refinement of {i/n} by {T_k}, m pieces per segment.

    Returns (dt, obs_at, jump_at, base_pos, jump_pos) where base_pos /
    jump_pos locate the observation / jump boundaries in units of segment
    index (micro step index = boundary_index * m - 1).
    """
    base = _base_grid(n)
    if T.size:
        bounds = np.unique(np.concatenate([base, T]))
    else:
        bounds = base
    nseg = bounds.size - 1
    if m == 1:
        times = bounds
    else:
        fr = _interior_fractions(m)
        seg_s = bounds[:-1]
        times = np.empty(nseg * m + 1)
        body = times[:-1].reshape(nseg, m)
        body[:, 0] = seg_s
        body[:, 1:] = seg_s[:, None] + np.outer(bounds[1:] - seg_s, fr)
        times[-1] = bounds[-1]
    dt = np.diff(times)
    steps = nseg * m
    obs_at = np.full(steps, -1, dtype=np.int64)
    base_pos = np.searchsorted(bounds, base)
    obs_at[base_pos[1:] * m - 1] = np.arange(1, n + 1)
    jump_at = np.full(steps, -1, dtype=np.int64)
    jump_pos = np.searchsorted(bounds, T)
    if T.size:
        jump_at[jump_pos * m - 1] = np.arange(T.size)
    return dt, obs_at, jump_at, base_pos, jump_pos


def _seq_sum(values: np.ndarray, lo: int, hi: int) -> float:
    """Left-to-right sum of values[lo:hi] (the same order both walkers consume them)."""
    s = 0.0
    for v in values[lo:hi].tolist():
        s += v
    return s


def simulate_path(model: mdl.ModelSpec, T, marks, rng: np.random.Generator, n: int,
                  substeps: int = 20, master_seed: Optional[int] = None,
                  replicate_index: Optional[int] = None) -> PathRecord:
    """Euler path on [0,1] with the given jump times and marks.

    ``substeps`` micro-steps per refined segment control the Euler bias for
    state-dependent coefficients; constant-coefficient models take one exact
    Gaussian step per segment instead.  Multiple jumps in one observation cell
    are simulated faithfully (both applied); downstream per-jump statistics
    exclude such paths.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if substeps < 1:
        raise ValueError("substeps must be >= 1")
    T = np.asarray(T, dtype=float)
    marks = np.asarray(marks, dtype=float)
    if T.size != marks.size:
        raise ValueError("jump times and marks must have equal length")
    if T.size:
        if np.any(np.diff(T) <= 0.0):
            raise ValueError("jump times must be strictly increasing")
        if T[0] <= 0.0 or T[-1] >= 1.0:
            raise ValueError("jump times must lie in the open interval (0,1)")

    m = 1 if model.has_constant_coefficients else substeps
    dt, obs_at, jump_at, base_pos, jump_pos = _micro_grid(n, T, m)
    z = rng.standard_normal(dt.size)

    k = T.size
    obs = np.empty(n + 1)
    obs[0] = model.x0
    x_pre = np.empty(k)
    x_post = np.empty(k)
    jumps = np.empty(k)
    dc, d0, d1, ac, a0, a1, jc, je = _family_codes(model)
    euler_walk(dt, z, obs_at, jump_at, model.x0,
               dc, d0, d1, ac, a0, a1, jc, je,
               marks, obs, x_pre, x_post, jumps)

    grid_index, frac = fractional_parts(T, n)
    w_before = np.empty(k)
    w_after = np.empty(k)
    if k:
        w_inc = np.sqrt(dt) * z
        for kk in range(k):
            cs = int(base_pos[grid_index[kk]]) * m
            ce = int(base_pos[grid_index[kk] + 1]) * m
            jb = int(jump_pos[kk]) * m
            w_before[kk] = _seq_sum(w_inc, cs, jb)
            w_after[kk] = _seq_sum(w_inc, jb, ce)

    if not np.all(np.isfinite(obs)):
        raise FloatingPointError("simulation produced non-finite observations")

    return PathRecord(
        n=n, obs=obs, jump_times=T, marks=marks, grid_index=grid_index, frac=frac,
        x_pre=x_pre, x_post=x_post, jumps=jumps, w_before=w_before, w_after=w_after,
        master_seed=master_seed, replicate_index=replicate_index,
    )


def simulate_replicate(model: mdl.ModelSpec, n: int, substeps: int,
                       master_seed: int, replicate_index: int) -> PathRecord:
    """Draw jump times, marks, and a path from the replicate's own stream."""
    rng = replicate_rng(master_seed, replicate_index)
    T = sample_jump_times(rng, model.jump_time_law)
    marks = sample_marks(rng, model.mark_law, T.size)
    return simulate_path(model, T, marks, rng, n, substeps,
                         master_seed=master_seed, replicate_index=replicate_index)


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------

def dump_path_csv(path: PathRecord, csv_path: str) -> str:
    """Write the observations as CSV (i, t, X) plus a .jumps.json sidecar; returns the sidecar path."""
    with open(csv_path, "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f)
        w.writerow(["i", "t", "X"])
        n = path.n
        for i in range(n + 1):
            w.writerow([i, format(i / n, ".17g"), format(path.obs[i], ".17g")])
    sidecar = csv_path[:-4] + ".jumps.json" if csv_path.endswith(".csv") else csv_path + ".jumps.json"
    meta = {
        "n": path.n,
        "master_seed": path.master_seed,
        "replicate_index": path.replicate_index,
        "jump_times": path.jump_times.tolist(),
        "marks": path.marks.tolist(),
        "grid_index": path.grid_index.tolist(),
        "frac": path.frac.tolist(),
        "x_pre": path.x_pre.tolist(),
        "x_post": path.x_post.tolist(),
        "jumps": path.jumps.tolist(),
        "w_before": path.w_before.tolist(),
        "w_after": path.w_after.tolist(),
    }
    with open(sidecar, "w", encoding="utf-8") as f:
        json.dump(meta, f, indent=2, sort_keys=True)
        f.write("\n")
    return sidecar
