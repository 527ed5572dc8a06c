"""Two-step TV-Stokes denoising.

Step 1 smooths the tangent field ``grad_perp(f)`` under the divergence-free
projection. Step 2 reconstructs an image whose gradient follows the normals
of the smoothed field; the orientation term is folded into the data by
completing the square, so step 2 is a plain ROF solve on a shifted image.
"""

from dataclasses import dataclass, field

import numpy as np

from .grid_ops import (
    as_scalar,
    default_eps,
    divergence,
    grad_perp,
    gradient,
    inner,
    l2_norm,
    linf_norm,
    normalized_perp,
    tv_energy,
)
from .poisson_projection import PoissonSolver
from .rof_chambolle import InnerSolveConfig, rof_denoise, rof_vector_projected

__all__ = [
    "TvsParams",
    "unit_normal",
    "smooth_tangent_field",
    "matching_data",
    "match_surface",
    "orientation_energy",
    "tv_stokes_denoise",
    "eta_from_beta",
]


@dataclass(frozen=True)
class TvsParams:
    """Parameters of the two-step model.

    ``eta1``/``eta2`` left as ``None`` are derived from ``beta1``/``beta2``
    with the residual rule ``eta = beta / (max|r| / 2)`` applied to
    ``grad_perp(f)`` and ``f`` respectively.
    """

    eta1: float | None = None
    eta2: float | None = None
    alpha: float = 0.9
    eps: float | None = None
    beta1: float = 8.0
    beta2: float = 2.5
    inner: InnerSolveConfig = field(default_factory=InnerSolveConfig)

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        for name in ("eta1", "eta2", "eps"):
            val = getattr(self, name)
            if val is not None and not val > 0:
                raise ValueError(f"{name} must be positive")


def eta_from_beta(r, beta):
    """``beta / gamma`` with ``gamma = max|r| / 2``; ``None`` for a zero residual."""
    gamma = linf_norm(r) / 2.0
    if gamma == 0.0:
        return None
    return beta / gamma


def unit_normal(tau, eps=None):
    """Unit normal carried by a tangent field.

    Rotates ``tau`` back by -90 degrees, undoing the rotation in
    :func:`grad_perp`, so ``unit_normal(grad_perp(f))`` points along the
    (averaged) gradient of ``f``. Magnitude is at most 1.
    """
    tau = np.asarray(tau, dtype=np.float64)
    if eps is None:
        eps = default_eps(tau)
    return -normalized_perp(tau, eps)


def smooth_tangent_field(f, eta1, solver=None, cfg=None):
    """Step 1: smoothed tangent field of ``f``."""
    f = as_scalar(f, "f")
    solver = solver or PoissonSolver.for_field(f)
    tau, _ = rof_vector_projected(grad_perp(f), eta1, solver, cfg)
    return tau


def matching_data(f, tau, alpha, eta2, eps=None):
    """Shifted data ``f - (alpha/eta2) div(n)`` of the completed-square form."""
    f = as_scalar(f, "f")
    if alpha == 0:
        return f
    return f - (alpha / eta2) * divergence(unit_normal(tau, eps))


def match_surface(f, tau, alpha, eta2, eps=None, cfg=None):
    """Step 2: minimise ``TV(u) - alpha <grad u, n> + eta2/2 ||u - f||^2``."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    u, _ = rof_denoise(matching_data(f, tau, alpha, eta2, eps), eta2, cfg)
    return u


def orientation_energy(u, f, normal, alpha, eta2):
    """The un-completed step-2 objective, for checking solutions."""
    return (
        tv_energy(u)
        - alpha * inner(gradient(u), normal)
        + 0.5 * eta2 * l2_norm(np.asarray(u) - np.asarray(f)) ** 2
    )


def tv_stokes_denoise(f, params=None, solver=None):
    """Run both steps. Returns ``(u, tau)``."""
    params = params or TvsParams()
    f = as_scalar(f, "f")
    solver = solver or PoissonSolver.for_field(f)
    tau0 = grad_perp(f)
    eta1 = params.eta1 or eta_from_beta(tau0, params.beta1)
    eta2 = params.eta2 or eta_from_beta(f, params.beta2)
    if eta2 is None:  # f is identically zero
        return f.copy(), np.zeros_like(tau0)
    if eta1 is None:  # f is constant
        tau = np.zeros_like(tau0)
    else:
        tau, _ = rof_vector_projected(tau0, eta1, solver, params.inner)
    u = match_surface(f, tau, params.alpha, eta2, params.eps, params.inner)
    return u, tau
