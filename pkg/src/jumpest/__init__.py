"""jumpest: jump-diffusion simulation, threshold jump estimation, and
Monte Carlo verification of the sqrt(n) asymptotic theory for the estimated
jump sizes (mixed-normal limit, optimal-variance bound, LAMN expansion)."""

__version__ = "0.1.0"

from jumpest.model import (  # noqa: F401
    ModelSpec,
    ValidationReport,
    eval_diffusion,
    eval_drift,
    eval_jump,
    eval_jump_dtheta,
    eval_jump_dx,
    load_model,
    model_from_dict,
    model_to_dict,
    save_model,
    validate_model,
)
