"""TV-Stokes denoising with iterative regularization."""

from .grid_ops import divergence, grad_perp, gradient, normalized_perp
from .iterreg import (
    OuterConfig,
    SolveReport,
    StopRule,
    osher_iterate,
    richardson_both,
    richardson_step1,
    richardson_step2,
)
from .metrics_noise import add_gaussian_noise, noise_level, psnr
from .poisson_projection import PoissonSolver
from .rof_chambolle import InnerSolveConfig, rof_denoise, rof_vector_projected
from .tvstokes import TvsParams, match_surface, tv_stokes_denoise

__version__ = "0.1.0"
