"""
Right-hand sides of the truncated comb mode systems.

Three equivalent descriptions of the same flow are kept:

    A        the raw mode amplitudes, singular self-interaction at t = 0
    A_tilde  A after removing the phase e^{i|a_k|^2 log t / (8 pi)}
    B        A_tilde under the time inversion B_k(t) = A_tilde_k(1 / (4t)),
             which moves the boundary condition to t -> infinity

All three are evaluated against one immutable ResonanceTable. The triple sum
uses one complex exponential per distinct phase frequency m and per distinct
Lambda, and accumulates into modes with np.bincount so the summation order is
fixed by the table layout.
"""

import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from src.lattice.resonance import ResonanceTable
from src.lattice.sequences import ComplexSequence

from . import config


class NonPositiveTimeError(ValueError):
    code = "non_positive_time"


@dataclass
class SolverConfig:
    """Integration settings for one run of a mode system."""
    K: int
    t_span: Tuple[float, float] = (1.0, config.DEFAULT_T_MAX)
    rtol: float = config.DEFAULT_RTOL
    atol: float = config.DEFAULT_ATOL
    max_step: float = config.DEFAULT_MAX_STEP
    samples: int = config.DEFAULT_SAMPLES
    method: str = config.INTEGRATOR_METHOD
    tail_mode: str = config.DEFAULT_TAIL_MODE
    energy_theta: float = config.ENERGY_THETA
    energy_c: Optional[float] = None
    t_eval: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        t0, t1 = (float(v) for v in self.t_span)
        self.t_span = (t0, t1)
        if self.K < 0:
            raise ValueError(f"Truncation radius must be nonnegative, got K = {self.K}.")
        if not (self.rtol > 0 and self.atol > 0):
            raise ValueError(f"Tolerances must be positive, got rtol = {self.rtol}, atol = {self.atol}.")
        if not t0 < t1:
            raise ValueError(f"t_span must satisfy t0 < t1, got {self.t_span}.")
        if not self.max_step > 0:
            raise ValueError(f"max_step must be positive, got {self.max_step}.")
        if self.samples < 2 and self.t_eval is None:
            raise ValueError(f"Need at least two output samples, got {self.samples}.")
        if self.tail_mode not in config.TAIL_MODES:
            raise ValueError(f"Unknown tail mode '{self.tail_mode}', expected one of {config.TAIL_MODES}.")
        if self.t_eval is not None:
            t_eval = np.asarray(self.t_eval, dtype=float)
            if t_eval.ndim != 1 or t_eval.size == 0 or np.any(np.diff(t_eval) <= 0):
                raise ValueError("t_eval must be a nonempty strictly increasing array.")
            if t_eval[0] < t0 or t_eval[-1] > t1:
                raise ValueError(f"t_eval must lie inside t_span {self.t_span}.")
            self.t_eval = t_eval

    def sample_times(self) -> np.ndarray:
        if self.t_eval is not None:
            return self.t_eval
        return np.linspace(self.t_span[0], self.t_span[1], self.samples)


@dataclass
class Trajectory:
    """Mode states sampled at strictly increasing times."""
    times: np.ndarray
    values: np.ndarray = field(repr=False)
    variable_tag: str
    alpha_abs2: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=np.complex128)
        self.alpha_abs2 = np.asarray(self.alpha_abs2, dtype=float)
        if self.variable_tag not in config.SYSTEM_TAGS:
            raise ValueError(f"Unknown variable tag '{self.variable_tag}', expected one of {config.SYSTEM_TAGS}.")
        if self.values.ndim != 2 or self.values.shape[0] != self.times.size:
            raise ValueError(f"values must have shape (n_times, n_modes), got {self.values.shape} for {self.times.size} times.")
        if self.values.shape[1] % 2 != 1 or self.values.shape[1] != self.alpha_abs2.size:
            raise ValueError("Trajectory modes and alpha must share one odd length 2K + 1.")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("Trajectory times must be strictly increasing.")

    @property
    def K(self) -> int:
        return self.values.shape[1] // 2

    @property
    def modes(self) -> np.ndarray:
        return np.arange(-self.K, self.K + 1)

    @property
    def states(self) -> List[ComplexSequence]:
        return [ComplexSequence.from_dense(row) for row in self.values]

    @property
    def mass_reference(self) -> float:
        return float(np.sum(self.alpha_abs2))

    def state(self, i: int) -> ComplexSequence:
        return ComplexSequence.from_dense(self.values[i])

    def __len__(self) -> int:
        return self.times.size


def _check_time(t: float) -> float:
    if not t > 0:
        raise NonPositiveTimeError(f"The mode systems are singular at t <= 0, got t = {t}.")
    return float(t)


class ModeSystem:
    """
    Dense right-hand sides for one (K, alpha) table.

    Dense arrays are indexed by k + K. All methods are pure; the instance only
    caches views into the table.
    """

    def __init__(self, table: ResonanceTable):
        self.table = table
        self.n = table.n_modes
        self.alpha_abs2 = table.alpha_abs2
        self._k = table.k_pos
        self._j1 = table.j1_pos
        self._j2 = table.j2_pos
        self._j3 = table.j3_pos

    def _triple_sum(self, y: np.ndarray, phase: np.ndarray) -> np.ndarray:
        if self._k.size == 0:
            return np.zeros(self.n, dtype=np.complex128)
        terms = phase * y[self._j1] * np.conj(y[self._j2]) * y[self._j3]
        return (np.bincount(self._k, weights=terms.real, minlength=self.n)
                + 1j * np.bincount(self._k, weights=terms.imag, minlength=self.n))

    def _phases(self, m_phase: float, lam_phase: float) -> np.ndarray:
        """exp(-i m m_phase) * exp(i Lambda lam_phase) per table entry."""
        table = self.table
        phase = np.exp(-1j * table.m_unique * m_phase)[table.m_inverse]
        if lam_phase != 0.0 and table.has_lambda:
            phase = phase * np.exp(1j * table.lam_unique * lam_phase)[table.lam_inverse]
        return phase

    def rhs_B(self, t: float, y: np.ndarray) -> np.ndarray:
        """dB/dt = (i / 8 pi t) [sum e^{-imt} e^{i Lambda log(4t) / 8 pi} B B* B - (|B_k|^2 - |a_k|^2) B_k]."""
        c = config.COUPLING / t
        s = self._triple_sum(y, self._phases(t, config.COUPLING * math.log(4.0 * t)))
        return 1j * c * (s - (np.abs(y) ** 2 - self.alpha_abs2) * y)

    def rhs_A_tilde(self, t: float, y: np.ndarray) -> np.ndarray:
        c = config.COUPLING / t
        s = self._triple_sum(y, self._phases(0.25 / t, -config.COUPLING * math.log(t)))
        return -1j * c * (s - (np.abs(y) ** 2 - self.alpha_abs2) * y)

    def rhs_A(self, t: float, y: np.ndarray) -> np.ndarray:
        c = config.COUPLING / t
        s = self._triple_sum(y, self._phases(0.25 / t, 0.0))
        return -1j * c * (s - np.abs(y) ** 2 * y)

    def rhs(self, system_tag: str):
        try:
            return {"A": self.rhs_A, "A_tilde": self.rhs_A_tilde, "B": self.rhs_B}[system_tag]
        except KeyError:
            raise ValueError(f"Unknown system '{system_tag}', expected one of {config.SYSTEM_TAGS}.") from None


def _dense_state(state: ComplexSequence, table: ResonanceTable) -> np.ndarray:
    return state.dense(table.K)


def rhs_B(t: float, B: ComplexSequence, table: ResonanceTable) -> ComplexSequence:
    t = _check_time(t)
    return ComplexSequence.from_dense(ModeSystem(table).rhs_B(t, _dense_state(B, table)))


def rhs_A_tilde(t: float, A_tilde: ComplexSequence, table: ResonanceTable) -> ComplexSequence:
    t = _check_time(t)
    return ComplexSequence.from_dense(ModeSystem(table).rhs_A_tilde(t, _dense_state(A_tilde, table)))


def rhs_A(t: float, A: ComplexSequence, table: ResonanceTable) -> ComplexSequence:
    """Ungauged system; kept as an oracle for the gauge."""
    t = _check_time(t)
    return ComplexSequence.from_dense(ModeSystem(table).rhs_A(t, _dense_state(A, table)))


def _gauge_phase(t: float, alpha: ComplexSequence, K: int) -> np.ndarray:
    return np.exp(1j * config.COUPLING * np.abs(alpha.dense(K)) ** 2 * math.log(t))


def gauge_apply(t: float, A_tilde: ComplexSequence, alpha: ComplexSequence) -> ComplexSequence:
    """A_k = e^{i |a_k|^2 log t / (8 pi)} A_tilde_k."""
    t = _check_time(t)
    K = max(A_tilde.radius(), alpha.radius())
    return ComplexSequence.from_dense(_gauge_phase(t, alpha, K) * A_tilde.dense(K))


def gauge_remove(t: float, A: ComplexSequence, alpha: ComplexSequence) -> ComplexSequence:
    t = _check_time(t)
    K = max(A.radius(), alpha.radius())
    return ComplexSequence.from_dense(np.conj(_gauge_phase(t, alpha, K)) * A.dense(K))


def gauge_trajectory(traj: Trajectory, inverse: bool = False) -> Trajectory:
    """Applies (A_tilde -> A) or removes (A -> A_tilde) the gauge at every sample."""
    expected = "A" if inverse else "A_tilde"
    if traj.variable_tag != expected:
        raise ValueError(f"Expected a trajectory of {expected}, got {traj.variable_tag}.")
    phase = np.exp(1j * config.COUPLING * np.outer(np.log(traj.times), traj.alpha_abs2))
    values = traj.values * (np.conj(phase) if inverse else phase)
    return Trajectory(traj.times, values, "A_tilde" if inverse else "A", traj.alpha_abs2)


def time_inversion(traj: Trajectory) -> Trajectory:
    """
    Maps a B trajectory to A_tilde via A_tilde(s) = B(1 / (4s)), and back.

    The map is an involution on sample points, so no interpolation is needed:
    the samples are re-labelled and reversed to keep times increasing.
    """
    if traj.variable_tag not in ("B", "A_tilde"):
        raise ValueError(f"time_inversion maps B <-> A_tilde trajectories, got {traj.variable_tag}.")
    if np.any(traj.times <= 0):
        raise NonPositiveTimeError("time_inversion needs strictly positive sample times.")
    tag = "A_tilde" if traj.variable_tag == "B" else "B"
    return Trajectory(0.25 / traj.times[::-1], traj.values[::-1].copy(), tag, traj.alpha_abs2)
