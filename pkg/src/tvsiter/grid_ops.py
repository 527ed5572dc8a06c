"""Finite-difference operators on the pixel grid.

Fields are plain numpy arrays:

* scalar field: shape ``(H, W)``
* vector field: shape ``(2, H, W)``; component 0 differentiates along rows
  (axis 0), component 1 along columns (axis 1)
* matrix field: shape ``(2, 2, H, W)``; row ``r`` is the gradient of vector
  component ``r``

The gradient uses forward differences with a zero difference on the last
row/column (Neumann). The divergence is its exact negative adjoint, so
``<gradient(u), v> == -<u, divergence(v)>`` up to rounding. Grid spacing is 1
and all sums are unweighted.
"""

import numpy as np

__all__ = [
    "as_scalar",
    "as_vector",
    "gradient",
    "divergence",
    "laplacian",
    "vec_gradient",
    "mat_divergence",
    "perp",
    "grad_perp",
    "normalized_perp",
    "default_eps",
    "magnitude",
    "tv_energy",
    "tv_energy_vec",
    "l2_norm",
    "linf_norm",
    "inner",
]


def _check_finite(a, what):
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{what} contains non-finite values")


def as_scalar(u, name="field"):
    """Validate and return ``u`` as a float64 ``(H, W)`` array."""
    a = np.asarray(u, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError(f"{name} must be 2-D (H, W), got shape {a.shape}")
    if a.shape[0] < 2 or a.shape[1] < 2:
        raise ValueError(f"{name} must be at least 2x2, got {a.shape}")
    _check_finite(a, name)
    return a


def as_vector(v, name="field"):
    """Validate and return ``v`` as a float64 ``(2, H, W)`` array."""
    a = np.asarray(v, dtype=np.float64)
    if a.ndim != 3 or a.shape[0] != 2:
        raise ValueError(f"{name} must have shape (2, H, W), got {a.shape}")
    if a.shape[1] < 2 or a.shape[2] < 2:
        raise ValueError(f"{name} must be at least 2x2, got {a.shape[1:]}")
    _check_finite(a, name)
    return a


def _fwd(u, axis):
    # forward difference, zero in the last slice along `axis`
    d = np.zeros_like(u)
    n = u.shape[axis]
    hi = [slice(None)] * u.ndim
    lo = [slice(None)] * u.ndim
    hi[axis] = slice(1, n)
    lo[axis] = slice(0, n - 1)
    d[tuple(lo)] = u[tuple(hi)] - u[tuple(lo)]
    return d


def _bwd_adj(p, axis):
    # negative adjoint of _fwd: p[0], p[i] - p[i-1], -p[n-2]
    d = np.empty_like(p)
    n = p.shape[axis]

    def sl(a, b):
        s = [slice(None)] * p.ndim
        s[axis] = slice(a, b)
        return tuple(s)

    d[sl(0, 1)] = p[sl(0, 1)]
    d[sl(1, n - 1)] = p[sl(1, n - 1)] - p[sl(0, n - 2)]
    d[sl(n - 1, n)] = -p[sl(n - 2, n - 1)]
    return d


def gradient(u):
    """Forward-difference gradient of a scalar field, shape ``(2, H, W)``."""
    u = np.asarray(u, dtype=np.float64)
    return np.stack([_fwd(u, 0), _fwd(u, 1)])


def divergence(v):
    """Backward-difference divergence, the negative adjoint of :func:`gradient`."""
    v = np.asarray(v, dtype=np.float64)
    return _bwd_adj(v[0], 0) + _bwd_adj(v[1], 1)


def laplacian(u):
    """Neumann 5-point Laplacian, ``divergence(gradient(u))``."""
    return divergence(gradient(u))


def vec_gradient(v):
    """Componentwise gradient of a vector field, shape ``(2, 2, H, W)``."""
    v = np.asarray(v, dtype=np.float64)
    return np.stack([gradient(v[0]), gradient(v[1])])


def mat_divergence(p):
    """Row-wise divergence of a matrix field; negative adjoint of :func:`vec_gradient`."""
    p = np.asarray(p, dtype=np.float64)
    return np.stack([divergence(p[0]), divergence(p[1])])


def perp(v):
    """Rotate every vector by +90 degrees: ``(c1, c2) -> (-c2, c1)``."""
    v = np.asarray(v, dtype=np.float64)
    return np.stack([-v[1], v[0]])


def _avg4(d, rows, cols):
    # mean of d over the 2x2 index stencil rows x cols, indices clamped to
    # the valid range of d; rows/cols are (offset_a, offset_b, lo, hi)
    H, W = d.shape
    i = np.arange(H)
    j = np.arange(W)
    ra = np.clip(i + rows[0], rows[2], rows[3])[:, None]
    rb = np.clip(i + rows[1], rows[2], rows[3])[:, None]
    ca = np.clip(j + cols[0], cols[2], cols[3])[None, :]
    cb = np.clip(j + cols[1], cols[2], cols[3])[None, :]
    return 0.25 * (d[ra, ca] + d[ra, cb] + d[rb, ca] + d[rb, cb])


def grad_perp(u):
    """Rotated gradient ``(-d2 u, d1 u)`` placed on the staggered edges.

    Component 0 is the column difference averaged onto the row-difference
    edge (i + 1/2, j); component 1 is the row difference averaged onto the
    column-difference edge (i, j + 1/2). This is the curl of the corner
    averages of ``u``, so ``divergence(grad_perp(u))`` vanishes exactly at
    interior pixels. Last row of component 1 and last column of component 0
    are zero, like :func:`gradient`. Differences outside the grid are taken
    from the nearest valid difference, so linear ramps are reproduced exactly.
    """
    u = np.asarray(u, dtype=np.float64)
    H, W = u.shape
    d1 = _fwd(u, 0)  # valid rows 0..H-2
    d2 = _fwd(u, 1)  # valid cols 0..W-2
    c0 = -_avg4(d2, (0, 1, 0, H - 1), (-1, 0, 0, W - 2))
    c1 = _avg4(d1, (-1, 0, 0, H - 2), (0, 1, 0, W - 1))
    c0[:, W - 1] = 0.0
    c1[H - 1, :] = 0.0
    return np.stack([c0, c1])


def magnitude(v):
    """Per-pixel Euclidean norm of a vector field (Frobenius for matrix fields)."""
    v = np.asarray(v, dtype=np.float64)
    lead = v.ndim - 2
    return np.sqrt(np.sum(v * v, axis=tuple(range(lead))))


def default_eps(v):
    return 1e-8 * (1.0 + linf_norm(v))


def normalized_perp(v, eps=None):
    """``perp(v) / max(|v|, eps)`` per pixel; output magnitude is at most 1."""
    v = np.asarray(v, dtype=np.float64)
    if eps is None:
        eps = default_eps(v)
    if not eps > 0:
        raise ValueError("eps must be positive")
    return perp(v) / np.maximum(magnitude(v), eps)


def tv_energy(u):
    """Isotropic total variation: sum of per-pixel gradient magnitudes."""
    return float(np.sum(magnitude(gradient(u))))


def tv_energy_vec(v):
    """Vector total variation: sum of per-pixel Frobenius norms of the Jacobian."""
    return float(np.sum(magnitude(vec_gradient(v))))


def l2_norm(a):
    a = np.asarray(a, dtype=np.float64)
    return float(np.sqrt(np.sum(a * a)))


def linf_norm(a):
    """Max absolute entry. Vector fields use the per-pixel magnitude."""
    a = np.asarray(a, dtype=np.float64)
    if a.ndim == 2:
        return float(np.max(np.abs(a)))
    return float(np.max(magnitude(a)))


def inner(a, b):
    return float(np.sum(np.asarray(a, dtype=np.float64) * np.asarray(b, dtype=np.float64)))
