"""Random Fourier features for the Gaussian kernel.

``φ(x) = √(1/D) [sin(w_1·x) … sin(w_D·x), cos(w_1·x) … cos(w_D·x)]`` so that
``φ(x)·φ(y) = (1/D) Σ cos(w_i·(x − y))``, an unbiased estimate of
``exp(−‖x − y‖² / 2σ²)`` when ``w_i ∼ N(0, σ⁻² I)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import DimensionMismatch


@dataclass(frozen=True)
class RandomFeatureMap:
    D: int
    d: int
    sigma2: float
    seed: int
    weights: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.D < 1 or self.d < 1:
            raise ValueError("D and d must be positive")
        if self.sigma2 <= 0:
            raise ValueError("sigma2 must be positive")
        rng = np.random.default_rng(self.seed)
        w = rng.standard_normal((self.D, self.d)) / np.sqrt(self.sigma2)
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)


def _vector(x, d: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] != d:
        raise DimensionMismatch(f"expected a vector of dimension {d}, got shape {x.shape}")
    return x


def phi(fmap: RandomFeatureMap, x) -> np.ndarray:
    proj = fmap.weights @ _vector(x, fmap.d)
    return np.concatenate([np.sin(proj), np.cos(proj)]) / np.sqrt(fmap.D)


def kernel_estimate(fmap: RandomFeatureMap, x, y) -> float:
    return float(phi(fmap, x) @ phi(fmap, y))


def kernel_exact(x, y, sigma2: float) -> float:
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise DimensionMismatch(f"shapes {x.shape} and {y.shape} differ")
    diff = x - y
    return float(np.exp(-(diff @ diff) / (2.0 * sigma2)))


def sample_pairs(d: int, count: int, seed: int) -> np.ndarray:
    """``count`` pairs with coordinates from ``N(0, 1/d)``, so ``‖x‖ ≈ 1``."""
    rng = np.random.default_rng(seed)
    return rng.standard_normal((count, 2, d)) / np.sqrt(d)


class EstimatorReport(NamedTuple):
    mean_error: float
    max_error: float
    max_norm_deviation: float


def estimator_errors(fmap: RandomFeatureMap, pairs) -> EstimatorReport:
    errors, norms = [], []
    for x, y in pairs:
        errors.append(abs(kernel_estimate(fmap, x, y) - kernel_exact(x, y, fmap.sigma2)))
        norms.append(abs(float(phi(fmap, x) @ phi(fmap, x)) - 1.0))
    return EstimatorReport(float(np.mean(errors)), float(np.max(errors)), float(np.max(norms)))


def check(d: int, D: int, sigma: float, pairs: int, seed: int) -> EstimatorReport:
    """Estimator error over ``pairs`` random pairs; the map uses ``seed`` and the pairs ``seed + 1``."""
    fmap = RandomFeatureMap(D, d, sigma * sigma, seed)
    return estimator_errors(fmap, sample_pairs(d, pairs, seed + 1))
