"""
Finitely supported, doubly indexed complex sequences.

A ComplexSequence stores the amplitudes alpha_k, A_k, B_k or R_k of the comb
as a contiguous block starting at index `offset`. Most numerical code works
on dense arrays indexed by k + K for a truncation radius K; `dense()` and
`from_dense()` move between the two forms.
"""

from dataclasses import dataclass, field
from typing import Iterator, Tuple

import numpy as np


@dataclass(frozen=True)
class ComplexSequence:
    """A finitely supported sequence {c_k} with c_k stored from `offset` on."""
    offset: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.complex128).reshape(-1)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "offset", int(self.offset))

    @classmethod
    def zeros(cls, K: int) -> "ComplexSequence":
        return cls(offset=-K, values=np.zeros(2 * K + 1, dtype=np.complex128))

    @classmethod
    def delta(cls, k: int, amplitude: complex = 1.0) -> "ComplexSequence":
        return cls(offset=k, values=np.array([amplitude], dtype=np.complex128))

    @classmethod
    def constant(cls, K: int, amplitude: complex) -> "ComplexSequence":
        return cls(offset=-K, values=np.full(2 * K + 1, amplitude, dtype=np.complex128))

    @classmethod
    def from_dense(cls, dense: np.ndarray) -> "ComplexSequence":
        """Wraps an array of length 2K+1 indexed by k + K."""
        dense = np.asarray(dense)
        if dense.ndim != 1 or dense.size % 2 != 1:
            raise ValueError(f"Dense mode arrays must have odd length 2K+1, got shape {dense.shape}.")
        K = dense.size // 2
        return cls(offset=-K, values=dense)

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.offset, self.offset + self.values.size)

    def __len__(self) -> int:
        return self.values.size

    def __getitem__(self, k: int) -> complex:
        i = k - self.offset
        if 0 <= i < self.values.size:
            return complex(self.values[i])
        return 0j

    def items(self) -> Iterator[Tuple[int, complex]]:
        for k, c in zip(self.indices, self.values):
            yield int(k), complex(c)

    def support(self) -> Tuple[int, int]:
        """Smallest and largest index carrying a nonzero value, (0, 0) if none."""
        nonzero = np.flatnonzero(self.values)
        if nonzero.size == 0:
            return (0, 0)
        return (self.offset + int(nonzero[0]), self.offset + int(nonzero[-1]))

    def radius(self) -> int:
        """Smallest K such that the support lies in [-K, K]."""
        lo, hi = self.support()
        return max(abs(lo), abs(hi))

    def fits(self, K: int) -> bool:
        return self.radius() <= K

    def dense(self, K: int) -> np.ndarray:
        """Returns a fresh array of length 2K+1 with entry k + K equal to c_k."""
        if not self.fits(K):
            raise ValueError(f"Sequence support {self.support()} exceeds the truncation [-{K}, {K}].")
        out = np.zeros(2 * K + 1, dtype=np.complex128)
        lo = max(self.offset, -K)
        hi = min(self.offset + self.values.size - 1, K)
        if lo <= hi:
            out[lo + K:hi + K + 1] = self.values[lo - self.offset:hi - self.offset + 1]
        return out

    def mass(self) -> float:
        """l^2 mass sum |c_k|^2."""
        return float(np.sum(np.abs(self.values) ** 2))

    def lp_norm(self, p: float) -> float:
        if np.isinf(p):
            return float(np.max(np.abs(self.values), initial=0.0))
        return float(np.sum(np.abs(self.values) ** p) ** (1.0 / p))

    def scaled(self, factor: complex) -> "ComplexSequence":
        return ComplexSequence(self.offset, factor * self.values)

    def __add__(self, other: "ComplexSequence") -> "ComplexSequence":
        K = max(self.radius(), other.radius())
        return ComplexSequence.from_dense(self.dense(K) + other.dense(K))

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.values)))


def grid_size_for(K: int, minimum: int = 1) -> int:
    """Smallest power of two strictly larger than 4K, and at least `minimum`."""
    n = 1
    while n <= 4 * K or n < minimum:
        n *= 2
    return n


def trig_synthesis(dense: np.ndarray, n: int) -> np.ndarray:
    """
    Samples sum_k c_k e^{ikx} at x_j = 2 pi j / n from dense rows indexed by k + K.

    Works on the last axis, so a (n_times, 2K+1) block gives (n_times, n) samples.
    Requires n > 2K so that no two retained modes share a grid frequency.
    """
    dense = np.asarray(dense, dtype=np.complex128)
    K = dense.shape[-1] // 2
    if n <= 2 * K:
        raise ValueError(f"Grid of {n} points cannot resolve modes |k| <= {K}.")
    coeffs = np.zeros(dense.shape[:-1] + (n,), dtype=np.complex128)
    coeffs[..., np.arange(-K, K + 1) % n] = dense
    return n * np.fft.ifft(coeffs, axis=-1)


def trig_analysis(samples: np.ndarray, K: int) -> np.ndarray:
    """Inverse of trig_synthesis: modes |k| <= K of grid samples on the last axis."""
    samples = np.asarray(samples, dtype=np.complex128)
    n = samples.shape[-1]
    coeffs = np.fft.fft(samples, axis=-1) / n
    return coeffs[..., np.arange(-K, K + 1) % n]
