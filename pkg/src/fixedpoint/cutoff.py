"""Smooth cutoffs eta_N and the window partition psi_nu built from them."""

import math
from dataclasses import dataclass

import numpy as np


def smoothstep(s: np.ndarray) -> np.ndarray:
    """Quintic 6s^5 - 15s^4 + 10s^3 on [0, 1], clamped outside; C^2 with exact plateaus."""
    s = np.clip(s, 0.0, 1.0)
    return s * s * s * (s * (6.0 * s - 15.0) + 10.0)


def eta(t: np.ndarray) -> np.ndarray:
    """eta(t) = 0 for t <= 0, 1 for t >= pi."""
    return smoothstep(np.asarray(t, dtype=float) / math.pi)


@dataclass(frozen=True)
class CutoffFamily:
    """Cutoff eta_N(t) = eta(t - pi N) used by the fixed-point map."""
    N: int

    def __post_init__(self):
        if self.N < 0:
            raise ValueError(f"Cutoff index N must be nonnegative, got {self.N}.")

    @property
    def start(self) -> float:
        return math.pi * self.N

    def __call__(self, t: np.ndarray) -> np.ndarray:
        return shifted(self.N, t)


def shifted(n: int, t: np.ndarray) -> np.ndarray:
    return eta(np.asarray(t, dtype=float) - math.pi * n)


def psi(nu: int, t: np.ndarray) -> np.ndarray:
    """psi_nu = eta_nu - eta_{nu+1}, supported in I_nu = [pi nu, pi (nu + 2)]."""
    return shifted(nu, t) - shifted(nu + 1, t)


def psi_ext(nu: int, t: np.ndarray) -> np.ndarray:
    """eta_{nu-1} - eta_{nu+2}: equal to 1 on I_nu and supported in I^e_nu."""
    return shifted(nu - 1, t) - shifted(nu + 2, t)
