"""Asymptotic objects of the sqrt(n) jump-estimation theory.

Per jump, the scaled estimation error converges to the mixed normal

    Z = sqrt(u) * a_pre * N-  +  sqrt(1-u) * a_post * N+,

where u is the uniform fractional position of the jump inside its observation
cell and a_pre/a_post are the diffusion coefficients just before/after the
jump.  Its conditional variance u*a_pre^2 + (1-u)*a_post^2 is the inverse of
the optimal per-jump information.  The parametric experiment (marks treated as
unknown parameters) has information

    I(lam) = c_dot^2 / [a_pre^2*(1+c')^2*u + a_post^2*(1-u)],

and augmenting the observations with the state just before (resp. after) the
jump yields informations whose inverses add up to 1/I(lam):

    I_aug_minus = c_dot^2 / [a_post^2*(1-u)],
    I_aug_plus  = c_dot^2 / [a_pre^2*(1+c')^2*u].
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from jumpest import model as mdl

__all__ = [
    "JumpContext",
    "context_from_path",
    "sample_limit_error",
    "optimal_information",
    "parametric_information",
    "augmented_informations",
    "functional_limit_variance",
]


@dataclass(frozen=True)
class JumpContext:
    """Latent quantities of one jump that parameterize its limit law.

    u is the (realized or limiting) fractional position of the jump in its
    cell; leaving it None makes the sampler draw a fresh uniform.
    """

    a_pre: float
    a_post: float
    c_dot: float = 1.0
    c_prime: float = 0.0
    u: Optional[float] = None

    def __post_init__(self) -> None:
        if self.u is not None and not 0.0 <= self.u <= 1.0:
            raise ValueError(f"u must lie in [0, 1], got {self.u}")
        if self.a_pre < 0.0 or self.a_post < 0.0:
            raise ValueError("a_pre and a_post must be nonnegative")
        if self.c_dot == 0.0:
            raise ValueError("c_dot must be nonzero")


def context_from_path(model: mdl.ModelSpec, path, k: int) -> JumpContext:
    """JumpContext of jump k built from a simulated path's latent quantities."""
    t = float(path.jump_times[k])
    x_pre = float(path.x_pre[k])
    theta = float(path.marks[k])
    return JumpContext(
        a_pre=mdl.eval_diffusion(model, t, x_pre),
        a_post=mdl.eval_diffusion(model, t, float(path.x_post[k])),
        c_dot=mdl.eval_jump_dtheta(model, x_pre, theta),
        c_prime=mdl.eval_jump_dx(model, x_pre, theta),
        u=float(path.frac[k]),
    )


def _mixture_variance(ctx: JumpContext, u: float) -> float:
    return u * ctx.a_pre ** 2 + (1.0 - u) * ctx.a_post ** 2


def sample_limit_error(rng: np.random.Generator, ctx: JumpContext) -> float:
    """One draw of sqrt(u)*a_pre*N- + sqrt(1-u)*a_post*N+.

    Conditions on ctx.u when it is set; otherwise u is drawn uniform first,
    then the two independent standard normals.
    """
    u = float(rng.random()) if ctx.u is None else ctx.u
    n_minus = rng.standard_normal()
    n_plus = rng.standard_normal()
    return math.sqrt(u) * ctx.a_pre * n_minus + math.sqrt(1.0 - u) * ctx.a_post * n_plus


def _require_u(ctx: JumpContext) -> float:
    if ctx.u is None:
        raise ValueError("this operation needs a realized u in the context")
    return ctx.u


def optimal_information(ctx: JumpContext) -> float:
    """Per-jump optimal information [u*a_pre^2 + (1-u)*a_post^2]^{-1}."""
    u = _require_u(ctx)
    denom = _mixture_variance(ctx, u)
    if denom == 0.0:
        raise ZeroDivisionError("degenerate context: u*a_pre^2 + (1-u)*a_post^2 = 0")
    return 1.0 / denom


def parametric_information(ctx: JumpContext) -> float:
    """Per-jump information for estimating the mark: c_dot^2 / [a_pre^2*(1+c')^2*u + a_post^2*(1-u)]."""
    u = _require_u(ctx)
    denom = ctx.a_pre ** 2 * (1.0 + ctx.c_prime) ** 2 * u + ctx.a_post ** 2 * (1.0 - u)
    if denom == 0.0:
        raise ZeroDivisionError("degenerate context: parametric information denominator is 0")
    return ctx.c_dot ** 2 / denom


def augmented_informations(ctx: JumpContext) -> tuple:
    """(I_aug_minus, I_aug_plus): informations when the pre- (resp. post-) jump state is also observed.

    Requires u strictly inside (0,1); at the endpoints one of the two is
    infinite.  Their inverses sum to 1/parametric_information(ctx).
    """
    u = _require_u(ctx)
    if not 0.0 < u < 1.0:
        raise ValueError(f"augmented informations need u in (0,1), got {u}")
    denom_minus = ctx.a_post ** 2 * (1.0 - u)
    denom_plus = ctx.a_pre ** 2 * (1.0 + ctx.c_prime) ** 2 * u
    if denom_minus == 0.0 or denom_plus == 0.0:
        raise ZeroDivisionError("degenerate context: an augmented information denominator is 0")
    c2 = ctx.c_dot ** 2
    return c2 / denom_minus, c2 / denom_plus


def functional_limit_variance(contexts, gradient) -> float:
    """Efficient asymptotic variance of a smooth functional of the jumps.

    For gradient g evaluated at the jump vector, the efficient limit is the
    scalar mixed normal with variance sum_k g_k^2 * [u_k*a_pre_k^2 + (1-u_k)*a_post_k^2].
    """
    gradient = np.asarray(gradient, dtype=float)
    if len(contexts) != gradient.size:
        raise ValueError("contexts and gradient must have equal length")
    total = 0.0
    for ctx, g in zip(contexts, gradient):
        total += float(g) ** 2 * _mixture_variance(ctx, _require_u(ctx))
    return total
