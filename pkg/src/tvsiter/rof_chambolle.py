"""ROF solves by Chambolle's semi-implicit dual fixed point.

Scalar problem::

    min_u  TV(u) + eta/2 ||u - f||^2

with ``u = f - div(p)/eta`` and the dual update

    p <- (p + step * grad(div p - eta f)) / (1 + step * |grad(div p - eta f)|)

started from ``p = 0``. The vector variant minimises ``TV(P tau) + eta/2
||tau - tau0||^2`` where ``P`` is the divergence-free projection; the
objective separates along ``P`` so the curl-free part of ``tau0`` is carried
through unchanged and only the projected part is smoothed.
"""

from dataclasses import dataclass

import numpy as np

from .grid_ops import (
    as_scalar,
    as_vector,
    divergence,
    gradient,
    l2_norm,
    magnitude,
    mat_divergence,
    tv_energy,
    tv_energy_vec,
    vec_gradient,
)

__all__ = [
    "InnerSolveConfig",
    "InnerSolveStats",
    "rof_denoise",
    "rof_vector_projected",
    "rof_energy",
    "projected_energy",
]


@dataclass(frozen=True)
class InnerSolveConfig:
    step: float = 0.25
    max_iters: int = 2000
    rel_tol: float = 1e-5

    def __post_init__(self):
        if not 0.0 < self.step <= 0.25:
            raise ValueError(f"step must lie in (0, 0.25], got {self.step}")
        if int(self.max_iters) < 1:
            raise ValueError("max_iters must be a positive integer")
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")


@dataclass(frozen=True)
class InnerSolveStats:
    iterations_used: int
    final_dual_change: float
    primal_energy: float
    # largest per-pixel dual norm seen over all iterations
    max_dual_norm: float = 0.0


def _check_eta(eta):
    eta = float(eta)
    if not np.isfinite(eta) or eta <= 0:
        raise ValueError(f"fidelity eta must be a positive finite number, got {eta}")
    return eta


def rof_energy(u, f, eta):
    """``TV(u) + eta/2 ||u - f||^2``."""
    return tv_energy(u) + 0.5 * eta * l2_norm(np.asarray(u) - np.asarray(f)) ** 2


def projected_energy(tau, tau0, eta, solver):
    """``TV(P tau) + eta/2 ||tau - tau0||^2``."""
    return tv_energy_vec(solver.project(tau)) + 0.5 * eta * l2_norm(
        np.asarray(tau) - np.asarray(tau0)
    ) ** 2


def _dual_fixed_point(p, residual_grad, cfg):
    """Run the Chambolle iteration in place on ``p``.

    ``residual_grad(p)`` returns the gradient of the dual residual. Returns
    ``(iterations, last_change, max_norm)``.
    """
    step = cfg.step
    change = np.inf
    max_norm = 0.0
    it = 0
    for it in range(1, int(cfg.max_iters) + 1):
        g = residual_grad(p)
        p_new = (p + step * g) / (1.0 + step * magnitude(g))
        change = float(np.max(np.abs(p_new - p)))
        p[...] = p_new
        max_norm = max(max_norm, float(np.max(magnitude(p))))
        if change < cfg.rel_tol:
            break
    return it, change, max_norm


def rof_denoise(f, eta, cfg=None):
    """Solve the scalar ROF problem. Returns ``(u, stats)``."""
    cfg = cfg or InnerSolveConfig()
    f = as_scalar(f, "f")
    eta = _check_eta(eta)
    ef = eta * f
    p = np.zeros((2,) + f.shape)
    it, change, max_norm = _dual_fixed_point(
        p, lambda q: gradient(divergence(q) - ef), cfg
    )
    u = f - divergence(p) / eta
    stats = InnerSolveStats(it, change, rof_energy(u, f, eta), max_norm)
    return u, stats


def rof_vector_projected(tau0, eta, solver, cfg=None):
    """Minimise ``TV(P tau) + eta/2 ||tau - tau0||^2``. Returns ``(tau, stats)``.

    The dual variable is a 2x2 matrix field bounded by 1 in Frobenius norm.
    """
    cfg = cfg or InnerSolveConfig()
    tau0 = as_vector(tau0, "tau0")
    eta = _check_eta(eta)
    proj = solver.project
    ew0 = eta * proj(tau0)
    p = np.zeros((2, 2) + tau0.shape[1:])
    it, change, max_norm = _dual_fixed_point(
        p, lambda q: vec_gradient(proj(mat_divergence(q)) - ew0), cfg
    )
    tau = tau0 - proj(mat_divergence(p)) / eta
    stats = InnerSolveStats(it, change, projected_energy(tau, tau0, eta, solver), max_norm)
    return tau, stats
