"""Synthetic clean/noisy image pairs for tests and demos."""

import numpy as np

from .metrics_noise import add_gaussian_noise

__all__ = ["ramp_disk", "noisy_pair"]


def ramp_disk(height=64, width=None):
    """Diagonal intensity ramp (50 to 170) plus a disk raised by 60."""
    width = width or height
    i = np.arange(height)[:, None] / (height - 1)
    j = np.arange(width)[None, :] / (width - 1)
    img = 50.0 + 60.0 * i + 60.0 * j
    ci, cj, rad = 0.45 * height, 0.55 * width, 0.28 * min(height, width)
    ii = np.arange(height)[:, None]
    jj = np.arange(width)[None, :]
    disk = (ii - ci) ** 2 + (jj - cj) ** 2 <= rad**2
    return img + 60.0 * disk


def noisy_pair(height=64, sigma=10.0, seed=2024, clip=False):
    """``(clean, noisy)`` with the ramp-disk image and seeded Gaussian noise."""
    g = ramp_disk(height)
    return g, add_gaussian_noise(g, sigma, seed, clip=clip)
