"""Neumann Poisson pseudoinverse and the divergence-free projection.

The 5-point Neumann Laplacian ``divergence(gradient(.))`` from
:mod:`tvsiter.grid_ops` is diagonalised exactly by the orthonormal DCT-II,
with eigenvalues ``(2cos(pi k/H) - 2) + (2cos(pi l/W) - 2)``. The constant
mode has eigenvalue 0 and is dropped (Moore-Penrose).
"""

import numpy as np
from scipy.fft import dctn, idctn

from .grid_ops import divergence, gradient

__all__ = ["PoissonSolver", "solve_neumann_poisson", "project_div_free"]


class PoissonSolver:
    """Spectral pseudoinverse of the Neumann Laplacian on an ``H x W`` grid."""

    __slots__ = ("_shape", "_inv_eig")

    def __init__(self, height, width):
        height, width = int(height), int(width)
        if height < 2 or width < 2:
            raise ValueError("grid must be at least 2x2")
        ev_r = 2.0 * np.cos(np.pi * np.arange(height) / height) - 2.0
        ev_c = 2.0 * np.cos(np.pi * np.arange(width) / width) - 2.0
        eig = ev_r[:, None] + ev_c[None, :]
        eig[0, 0] = 1.0
        inv = 1.0 / eig
        inv[0, 0] = 0.0
        inv.setflags(write=False)
        self._shape = (height, width)
        self._inv_eig = inv

    @classmethod
    def for_field(cls, a):
        a = np.asarray(a)
        return cls(*a.shape[-2:])

    @property
    def shape(self):
        return self._shape

    def _check(self, shape, what):
        if tuple(shape[-2:]) != self._shape:
            raise ValueError(
                f"{what} has grid shape {tuple(shape[-2:])}, solver expects {self._shape}"
            )

    def solve(self, rhs):
        """Zero-mean ``lam`` with ``laplacian(lam) = rhs - mean(rhs)``."""
        rhs = np.asarray(rhs, dtype=np.float64)
        if rhs.ndim != 2:
            raise ValueError("rhs must be a scalar field")
        self._check(rhs.shape, "rhs")
        coef = dctn(rhs, type=2, norm="ortho")
        coef *= self._inv_eig
        return idctn(coef, type=2, norm="ortho")

    def project(self, v):
        """Orthogonal projection onto discretely divergence-free fields."""
        v = np.asarray(v, dtype=np.float64)
        if v.ndim != 3 or v.shape[0] != 2:
            raise ValueError("v must be a vector field of shape (2, H, W)")
        self._check(v.shape, "v")
        return v - gradient(self.solve(divergence(v)))


def solve_neumann_poisson(solver, rhs):
    return solver.solve(rhs)


def project_div_free(solver, v):
    return solver.project(v)
