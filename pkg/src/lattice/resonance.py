"""
Nonresonant interaction sets of the comb mode system.

For a mode k, the triples (j1, j2, j3) with k = j1 - j2 + j3 and
m = k^2 - j1^2 + j2^2 - j3^2 != 0 are in bijection with the pairs (m, z),
m != 0 and 2z | m, through

    z = k - j1,   w = j1 - j2 = m / (2z),   j3 = k - j1 + j2 = k - w,

and m = 2 z w. Note the momentum condition k = j1 - j2 + j3: it is the only
sign choice for which the factorization m = 2(k - j1)(j1 - j2) holds.

A ResonanceTable materializes these triples for a truncation |k| <= K once,
together with Lambda = |a_k|^2 - |a_j1|^2 + |a_j2|^2 - |a_j3|^2, and stores them
as flat integer arrays grouped by k and sorted by (m, z). Every right-hand
side evaluation walks the same arrays in the same order.
"""

import math
import operator
from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Tuple

import numpy as np

from . import config
from .sequences import ComplexSequence


class ResonanceError(ValueError):
    """Invalid index data for the resonance bijection."""
    code = "resonance"


class ZeroFrequencyError(ResonanceError):
    code = "zero_frequency"


class InvalidIndexPairError(ResonanceError):
    code = "invalid_pair"


class MomentumMismatchError(ResonanceError):
    code = "momentum_mismatch"


class ResonantTripleError(ResonanceError):
    code = "resonant"


class ResonanceEntry(NamedTuple):
    """One nonresonant interaction (m, z) <-> (j1, j2, j3) of a mode k."""
    m: int
    z: int
    j1: int
    j2: int
    j3: int
    lam: float


def _as_int(value, name: str) -> int:
    try:
        return operator.index(value)
    except TypeError:
        raise ResonanceError(f"{name} must be an integer, got {value!r}.") from None


def _positive_divisors(n: int) -> List[int]:
    small, large = [], []
    for d in range(1, math.isqrt(n) + 1):
        if n % d == 0:
            small.append(d)
            if d != n // d:
                large.append(n // d)
    return small + large[::-1]


def divisor_set(m: int) -> List[int]:
    """
    All integers z with 2z | m, sorted ascending.

    Args:
        m: A nonzero integer phase frequency.

    Returns:
        The set r(m); empty exactly when m is odd.
    """
    m = _as_int(m, "m")
    if m == 0:
        raise ZeroFrequencyError("m = 0 is a resonant frequency and has no divisor set.")
    if m % 2:
        return []
    positive = _positive_divisors(abs(m) // 2)
    return [-d for d in reversed(positive)] + positive


def divisor_count(m: int) -> int:
    """r_m = |divisor_set(m)| = 2 d(|m|/2) for even m, 0 for odd m."""
    m = _as_int(m, "m")
    if m == 0:
        raise ZeroFrequencyError("m = 0 is a resonant frequency and has no divisor count.")
    if m % 2:
        return 0
    return 2 * len(_positive_divisors(abs(m) // 2))


def divisor_count_table(n_max: int) -> np.ndarray:
    """Sieve of d(n) for 0 <= n <= n_max (d(0) is left at 0)."""
    d = np.zeros(n_max + 1, dtype=np.int64)
    for i in range(1, n_max + 1):
        d[i::i] += 1
    return d


def index_to_triple(k: int, m: int, z: int) -> Tuple[int, int, int]:
    """Maps (m, z) with 2z | m to the triple (j1, j2, j3) of mode k."""
    k, m, z = _as_int(k, "k"), _as_int(m, "m"), _as_int(z, "z")
    if m == 0 or z == 0 or m % (2 * z) != 0:
        raise InvalidIndexPairError(f"(m={m}, z={z}) is not a valid pair: need m != 0 and 2z | m.")
    j1 = k - z
    j2 = j1 - m // (2 * z)
    j3 = k - j1 + j2
    return j1, j2, j3


def triple_to_index(k: int, j1: int, j2: int, j3: int) -> Tuple[int, int]:
    """Maps a nonresonant triple of mode k to its pair (m, z)."""
    k, j1, j2, j3 = (_as_int(v, name) for v, name in ((k, "k"), (j1, "j1"), (j2, "j2"), (j3, "j3")))
    if k != j1 - j2 + j3:
        raise MomentumMismatchError(f"Triple ({j1}, {j2}, {j3}) does not satisfy k = j1 - j2 + j3 for k = {k}.")
    m = k * k - j1 * j1 + j2 * j2 - j3 * j3
    if m == 0:
        raise ResonantTripleError(f"Triple ({j1}, {j2}, {j3}) is resonant for k = {k} (m = 0).")
    return m, k - j1


@dataclass(frozen=True)
class ResonanceTable:
    """
    Interaction table for the truncation |k| <= K.

    Entry arrays are flat and grouped by mode: the entries of mode k occupy
    positions starts[k + K] : starts[k + K + 1]. Positions (k_pos, j1_pos, ...)
    index dense mode arrays of length 2K + 1.
    """
    K: int
    wrap: bool
    alpha_abs2: np.ndarray = field(repr=False)
    m: np.ndarray = field(repr=False)
    z: np.ndarray = field(repr=False)
    j1: np.ndarray = field(repr=False)
    j2: np.ndarray = field(repr=False)
    j3: np.ndarray = field(repr=False)
    lam: np.ndarray = field(repr=False)
    k_pos: np.ndarray = field(repr=False)
    starts: np.ndarray = field(repr=False)
    m_unique: np.ndarray = field(repr=False)
    m_inverse: np.ndarray = field(repr=False)
    lam_unique: np.ndarray = field(repr=False)
    lam_inverse: np.ndarray = field(repr=False)

    @property
    def n_modes(self) -> int:
        return 2 * self.K + 1

    @property
    def size(self) -> int:
        return int(self.m.size)

    @property
    def modes(self) -> range:
        return range(-self.K, self.K + 1)

    @property
    def has_lambda(self) -> bool:
        return bool(np.any(self.lam != 0.0))

    @property
    def max_frequency(self) -> int:
        return int(np.max(np.abs(self.m), initial=0))

    def count(self, k: int) -> int:
        i = k + self.K
        return int(self.starts[i + 1] - self.starts[i])

    def entries(self, k: int) -> List[ResonanceEntry]:
        i = k + self.K
        sl = slice(self.starts[i], self.starts[i + 1])
        return [
            ResonanceEntry(int(m), int(z), int(a), int(b), int(c), float(lam))
            for m, z, a, b, c, lam in zip(self.m[sl], self.z[sl], self.j1[sl], self.j2[sl], self.j3[sl], self.lam[sl])
        ]

    def m_counts(self, k: int = 0) -> Dict[int, int]:
        """Number of entries of mode k carrying each phase frequency m."""
        i = k + self.K
        values, counts = np.unique(self.m[self.starts[i]:self.starts[i + 1]], return_counts=True)
        return {int(v): int(c) for v, c in zip(values, counts)}

    @property
    def j1_pos(self) -> np.ndarray:
        return self.j1 + self.K

    @property
    def j2_pos(self) -> np.ndarray:
        return self.j2 + self.K

    @property
    def j3_pos(self) -> np.ndarray:
        return self.j3 + self.K

    def to_json_dict(self) -> dict:
        return {
            "K": self.K,
            "entries": {
                str(k): [[e.m, e.z, e.j1, e.j2, e.j3, e.lam] for e in self.entries(k)]
                for k in self.modes
            },
        }


def _mode_entries(k: int, K: int, wrap: bool) -> Tuple[np.ndarray, ...]:
    """(m, z, j1, j2, j3) arrays for mode k, sorted by (m, z)."""
    n = 2 * K + 1
    if wrap:
        zs = np.arange(-K, K + 1)
        ws = np.arange(-K, K + 1)
    else:
        zs = np.arange(k - K, k + K + 1)
        ws = np.arange(-2 * K, 2 * K + 1)
    Z, W = np.meshgrid(zs, ws, indexing="ij")
    Z, W = Z.ravel(), W.ravel()
    keep = (Z != 0) & (W != 0)
    Z, W = Z[keep], W[keep]
    j1 = k - Z
    j2 = j1 - W
    j3 = k - W
    if wrap:
        j1 = (j1 + K) % n - K
        j2 = (j2 + K) % n - K
        j3 = (j3 + K) % n - K
    else:
        inside = (np.abs(j1) <= K) & (np.abs(j2) <= K) & (np.abs(j3) <= K)
        Z, W, j1, j2, j3 = Z[inside], W[inside], j1[inside], j2[inside], j3[inside]
    m = 2 * Z * W
    order = np.lexsort((Z, m))
    return m[order], Z[order], j1[order], j2[order], j3[order]


def build_table(K: int, alpha: ComplexSequence, wrap: bool = False) -> ResonanceTable:
    """
    Enumerates every nonresonant triple of every mode |k| <= K.

    Args:
        K: Truncation radius.
        alpha: The comb amplitudes; must be supported in [-K, K].
        wrap: Use the cyclic lattice Z_{2K+1} (indices reduced modulo 2K+1)
            instead of hard truncation. Every mode then sees the same set of
            (m, z) pairs, which keeps the table translation invariant.

    Returns:
        An immutable ResonanceTable.
    """
    K = _as_int(K, "K")
    if K < 0:
        raise ValueError(f"Truncation radius must be nonnegative, got K = {K}.")
    if K > config.MAX_TRUNCATION:
        raise ValueError(f"K = {K} exceeds MAX_TRUNCATION = {config.MAX_TRUNCATION}.")
    if not alpha.fits(K):
        raise ValueError(f"alpha support {alpha.support()} exceeds the truncation [-{K}, {K}].")

    a2 = np.abs(alpha.dense(K)) ** 2
    chunks = [_mode_entries(k, K, wrap) for k in range(-K, K + 1)]
    counts = np.array([c[0].size for c in chunks], dtype=np.int64)
    starts = np.zeros(2 * K + 2, dtype=np.int64)
    starts[1:] = np.cumsum(counts)

    def _cat(i: int) -> np.ndarray:
        if not chunks or starts[-1] == 0:
            return np.zeros(0, dtype=np.int64)
        return np.concatenate([c[i] for c in chunks]).astype(np.int64)

    m, z, j1, j2, j3 = (_cat(i) for i in range(5))
    k_pos = np.repeat(np.arange(2 * K + 1, dtype=np.int64), counts)
    lam = a2[k_pos] - a2[j1 + K] + a2[j2 + K] - a2[j3 + K]
    m_unique, m_inverse = np.unique(m, return_inverse=True)
    lam_unique, lam_inverse = np.unique(lam, return_inverse=True)

    arrays = (a2, m, z, j1, j2, j3, lam, k_pos, starts, m_unique, m_inverse, lam_unique, lam_inverse)
    for arr in arrays:
        arr.setflags(write=False)
    return ResonanceTable(K, bool(wrap), *arrays)


@dataclass(frozen=True)
class DivisorStats:
    """Empirical growth of r_m over even 0 < m <= M_max."""
    M_max: int
    max_count: int
    argmax: int
    mean_count: float
    max_over_log: float


def divisor_stats(M_max: int) -> DivisorStats:
    M_max = _as_int(M_max, "M_max")
    if M_max < 2:
        raise ValueError(f"divisor_stats needs M_max >= 2, got {M_max}.")
    d = divisor_count_table(M_max // 2)
    r = 2 * d[1:]
    ms = 2 * np.arange(1, r.size + 1)
    i = int(np.argmax(r))
    return DivisorStats(
        M_max=M_max,
        max_count=int(r[i]),
        argmax=int(ms[i]),
        mean_count=float(np.mean(r)),
        max_over_log=float(r[i] / math.log(ms[i])),
    )
