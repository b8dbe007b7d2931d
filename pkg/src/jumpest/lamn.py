"""Local asymptotic mixed normality (LAMN) statistics of the mark experiment.

With the jump times observed, the log-likelihood ratio between mark vectors
lam and lam + h/sqrt(n) expands as

    Z_n = sum_k h_k * sqrt(I_n_k) * N_n_k - 1/2 * sum_k h_k^2 * I_n_k + o(1),

with per-jump statistics computed from the observation cell [i_k/n, (i_k+1)/n]
hosting jump k:

    D_k  = a^2(i_k/n, X_{i_k/n}) * (1+c'(X_{i_k/n},lam_k))^2 * (T_k - i_k/n)
         + a^2(i_k/n, X_{i_k/n} + c(X_{i_k/n},lam_k)) * ((i_k+1)/n - T_k)
    I_n_k = c_dot(X_{i_k/n}, lam_k)^2 / (n * D_k)
    N_n_k = sqrt(n) * (X_{(i_k+1)/n} - X_{i_k/n} - c(X_{i_k/n}, lam_k)) / sqrt(n * D_k)

(I_n, N_n) converge jointly to (I(lam), N) with N standard normal and I(lam)
the parametric information evaluated at the latent pre-jump state and the
fractional cell position.

For the constant-coefficient additive family the cell transition is exactly
Gaussian, so Z_n has a closed form and the expansion is exact (zero drift) or
has an explicit O(n^{-1/2}) residual (nonzero drift).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from jumpest import model as mdl
from jumpest.limit_law import JumpContext, parametric_information

__all__ = [
    "JumpCellStats",
    "LamnStats",
    "MultiJumpCellError",
    "lamn_statistics",
    "gaussian_model_loglik_ratio",
    "lamn_expansion_residual",
]


class MultiJumpCellError(ValueError):
    """A jump's observation cell hosts another jump; per-jump statistics are undefined."""


@dataclass
class JumpCellStats:
    d_n: float
    i_n: float
    n_n: float


@dataclass
class LamnStats:
    per_jump: list          # JumpCellStats, one per jump
    limit_i: np.ndarray     # information limit at u = realized fractional part

    @property
    def i_n(self) -> np.ndarray:
        return np.array([s.i_n for s in self.per_jump])

    @property
    def n_n(self) -> np.ndarray:
        return np.array([s.n_n for s in self.per_jump])


def _check_single_jump_cells(path) -> None:
    if path.has_multijump_cell:
        raise MultiJumpCellError("two jump times share an observation cell")


def lamn_statistics(path, model: mdl.ModelSpec, lam, n: int) -> LamnStats:
    """Per-jump (D, I_n, N_n) from a simulated path, plus the information limit.

    `lam` is the mark vector the path was simulated under.  The limit is
    evaluated at the realized fractional part, which couples it pathwise to
    I_n rather than only in distribution.
    """
    lam = np.asarray(lam, dtype=float)
    if lam.size != path.k:
        raise ValueError("lam must have one entry per jump")
    _check_single_jump_cells(path)

    per_jump = []
    limit_i = np.empty(path.k)
    for k in range(path.k):
        ik = int(path.grid_index[k])
        t_cell = ik / n
        x_cell = float(path.obs[ik])
        lam_k = float(lam[k])
        a_cell = mdl.eval_diffusion(model, t_cell, x_cell)
        c_val = mdl.eval_jump(model, x_cell, lam_k)
        c_dx = mdl.eval_jump_dx(model, x_cell, lam_k)
        c_dt = mdl.eval_jump_dtheta(model, x_cell, lam_k)
        a_cell_post = mdl.eval_diffusion(model, t_cell, x_cell + c_val)
        t_k = float(path.jump_times[k])
        d = (a_cell ** 2 * (1.0 + c_dx) ** 2 * (t_k - t_cell)
             + a_cell_post ** 2 * ((ik + 1) / n - t_k))
        nd = n * d
        i_n = c_dt ** 2 / nd
        n_n = np.sqrt(n) * (float(path.obs[ik + 1]) - x_cell - c_val) / np.sqrt(nd)
        per_jump.append(JumpCellStats(d_n=d, i_n=i_n, n_n=float(n_n)))

        ctx = JumpContext(
            a_pre=mdl.eval_diffusion(model, t_k, float(path.x_pre[k])),
            a_post=mdl.eval_diffusion(model, t_k, float(path.x_pre[k]) + mdl.eval_jump(model, float(path.x_pre[k]), lam_k)),
            c_dot=mdl.eval_jump_dtheta(model, float(path.x_pre[k]), lam_k),
            c_prime=mdl.eval_jump_dx(model, float(path.x_pre[k]), lam_k),
            u=float(path.frac[k]),
        )
        limit_i[k] = parametric_information(ctx)

    return LamnStats(per_jump=per_jump, limit_i=limit_i)


def _require_closed_form(model: mdl.ModelSpec) -> None:
    if not (model.has_constant_coefficients and isinstance(model.jump, mdl.AdditiveJump)):
        raise ValueError(
            "exact log-likelihood ratios are only available for the "
            "constant-coefficient additive family"
        )


def gaussian_model_loglik_ratio(path, lam, h, n: int, sigma: float, b0: float,
                                model: mdl.ModelSpec = None) -> float:
    """Exact log-likelihood ratio Z_n(lam, lam + h/sqrt(n)) for the Gaussian closed form.

    In the constant-coefficient additive model each jump-cell increment is
    exactly N(b0/n + lam_k, sigma^2/n) given the jump times, and cells without
    jumps cancel between the two likelihoods, leaving

        Z_n = sum_k [ h_k * sqrt(n) * (dX_k - b0/n - lam_k) / sigma^2 - h_k^2 / (2 sigma^2) ].

    Pass `model` to assert the path actually comes from that family.
    """
    if model is not None:
        _require_closed_form(model)
    lam = np.asarray(lam, dtype=float)
    h = np.asarray(h, dtype=float)
    if lam.size != path.k or h.size != path.k:
        raise ValueError("lam and h must have one entry per jump")
    _check_single_jump_cells(path)
    sig2 = sigma * sigma
    z = 0.0
    root_n = np.sqrt(n)
    for k in range(path.k):
        ik = int(path.grid_index[k])
        dx = float(path.obs[ik + 1]) - float(path.obs[ik])
        z += float(h[k]) * root_n * (dx - b0 / n - float(lam[k])) / sig2
        z -= float(h[k]) ** 2 / (2.0 * sig2)
    return float(z)


def lamn_expansion_residual(z_n: float, stats: LamnStats, h) -> float:
    """z_n minus its quadratic expansion sum_k h_k sqrt(I_n_k) N_n_k - 1/2 sum_k h_k^2 I_n_k."""
    h = np.asarray(h, dtype=float)
    if h.size != len(stats.per_jump):
        raise ValueError("h must have one entry per jump")
    expansion = 0.0
    for hk, s in zip(h, stats.per_jump):
        expansion += float(hk) * np.sqrt(s.i_n) * s.n_n - 0.5 * float(hk) ** 2 * s.i_n
    return float(z_n - expansion)
