"""Image quality metrics and reproducible Gaussian noise.

The noise generator is counter based so fixtures are identical on every
platform: the n-th 64-bit word is the n-th output of SplitMix64 seeded with
``seed``, i.e. the SplitMix64 finaliser applied to
``seed + (n + 1) * 0x9E3779B97F4A7C15 (mod 2**64)``. Words become uniforms in
``(0, 1]`` as ``((w >> 11) + 1) * 2**-53``. Pixel ``i`` (row-major) uses
words ``2i`` and ``2i + 1`` in a Box-Muller transform, keeping only the
cosine branch: ``z = sqrt(-2 ln u1) * cos(2 pi u2)``.
"""

from dataclasses import dataclass

import numpy as np

from .grid_ops import as_scalar

__all__ = [
    "MetricConfig",
    "psnr",
    "noise_level",
    "splitmix64",
    "standard_normal",
    "add_gaussian_noise",
]

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


@dataclass(frozen=True)
class MetricConfig:
    peak: float = 255.0

    def __post_init__(self):
        if not self.peak > 0:
            raise ValueError("peak must be positive")


def _pair(u, g):
    u = as_scalar(u, "u")
    g = as_scalar(g, "g")
    if u.shape != g.shape:
        raise ValueError(f"shape mismatch: {u.shape} vs {g.shape}")
    return u, g


def psnr(u, g, cfg=None):
    """Peak signal-to-noise ratio in dB; ``inf`` when ``u == g``."""
    cfg = cfg or MetricConfig()
    u, g = _pair(u, g)
    mse = float(np.mean((u - g) ** 2))
    if mse == 0.0:
        return float("inf")
    return 10.0 * np.log10(cfg.peak**2 / mse)


def noise_level(u, g):
    """Root-mean-square difference."""
    u, g = _pair(u, g)
    return float(np.sqrt(np.mean((u - g) ** 2)))


def splitmix64(seed, count):
    """First ``count`` outputs of SplitMix64 seeded with ``seed``, as uint64."""
    n = np.arange(1, count + 1, dtype=np.uint64)
    z = np.uint64(int(seed) % 2**64) + n * _GOLDEN
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def standard_normal(shape, seed):
    """Standard normal samples from the counter-based generator above."""
    size = int(np.prod(shape))
    w = splitmix64(seed, 2 * size)
    uni = ((w >> np.uint64(11)).astype(np.float64) + 1.0) * 2.0**-53
    u1, u2 = uni[0::2], uni[1::2]
    z = np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)
    return z.reshape(shape)


def add_gaussian_noise(g, sigma, seed, clip=True, peak=255.0):
    """``g + sigma * Z``, optionally clamped to ``[0, peak]``."""
    g = as_scalar(g, "g")
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    out = g + sigma * standard_normal(g.shape, seed)
    if clip:
        out = np.clip(out, 0.0, peak)
    return out
