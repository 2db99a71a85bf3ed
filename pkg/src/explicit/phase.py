"""
Closed-form solution of the mode system for constant data.

When a_k = a for every k, the B-system decouples into one scalar equation

    B' = i |a|^2 g(t) B,   g(t) = (1 / 8 pi t) sum_{m != 0} c_m e^{-imt},

with c_m = r_m on the full lattice, so B(t) = a exp(-i |a|^2 Phi(t)) with
Phi(t) = int_t^inf g. Phi is evaluated by pairing +m with -m and
integrating by parts once:

    Phi(t) = (1 / 8 pi) sum_{m > 0} c_m [ -2 sin(mt) / (mt)
                                          + 2 int_t^inf sin(m tau) / (m tau^2) dtau ].

The first series is the boundary series; the second is the remainder, which
converges absolutely and is computed by QAWO quadrature on [t, T_max].
"""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.special import sici

from src.lattice.resonance import build_table, divisor_count_table
from src.lattice.sequences import ComplexSequence

from . import config

SI_PI = float(sici(math.pi)[0])


class PhaseConvergenceError(RuntimeError):
    """Certified remainder error exceeds the requested tolerance."""
    code = "tail_bound"


@dataclass
class PhaseQuadratureConfig:
    """
    Truncation of the phase integral.

    Args:
        M_max: Largest frequency kept in the divisor sum.
        T_max: Upper limit of the remainder quadrature; None means
            T_MAX_FACTOR * t at each evaluation time.
        quad_tol: Bound on the certified remainder error.
        counts: Optional {m: c_m} replacing r_m (must satisfy c_m = c_{-m});
            it is then the complete frequency set and M_max is ignored.
    """
    M_max: int = config.DEFAULT_M_MAX
    T_max: Optional[float] = None
    quad_tol: float = config.DEFAULT_QUAD_TOL
    counts: Optional[Mapping[int, int]] = field(default=None, repr=False)

    def __post_init__(self):
        if self.counts is None and self.M_max < 2:
            raise ValueError(f"M_max must be at least 2, got {self.M_max}.")
        if not self.quad_tol > 0:
            raise ValueError(f"quad_tol must be positive, got {self.quad_tol}.")
        if self.T_max is not None and not self.T_max > 0:
            raise ValueError(f"T_max must be positive, got {self.T_max}.")
        if self.counts is not None:
            for m, c in self.counts.items():
                if m == 0:
                    raise ValueError("Frequency counts may not include m = 0.")
                if self.counts.get(-m, 0) != c:
                    raise ValueError(f"Frequency counts must be symmetric in m, got c_{m} = {c}, c_{-m} = {self.counts.get(-m, 0)}.")

    def frequencies(self) -> Tuple[np.ndarray, np.ndarray]:
        """Positive frequencies m and their weights c_m, ascending in m."""
        if self.counts is not None:
            pairs = sorted((int(m), float(c)) for m, c in self.counts.items() if m > 0 and c != 0)
            ms = np.array([m for m, _ in pairs], dtype=float)
            cs = np.array([c for _, c in pairs], dtype=float)
            return ms, cs
        N = self.M_max // 2
        d = divisor_count_table(N)
        ms = 2.0 * np.arange(1, N + 1)
        return ms, 2.0 * d[1:].astype(float)

    def upper_limit(self, t: float) -> float:
        T = self.T_max if self.T_max is not None else config.T_MAX_FACTOR * t
        if not T > t:
            raise ValueError(f"T_max = {T} must exceed the evaluation time t = {t}.")
        return T

    def frequency_tail(self, t: float) -> float:
        """Bound on the remainder carried by the frequencies beyond M_max."""
        if self.counts is not None:
            return 0.0
        N = self.M_max // 2
        return (math.log(N) + 2.0) / (2.0 * math.pi * N * t * t)


@dataclass
class PhaseResult:
    t: float
    value: float
    boundary: float
    remainder: float
    imag_residual: float
    tail_bound: float
    quad_error: float


def _boundary_series(t: float, ms: np.ndarray, cs: np.ndarray) -> Tuple[float, float]:
    # conj pairs the -m half of the sum with the +m half
    z = np.sum(cs * np.exp(-1j * ms * t) / (1j * ms * t)) / (8.0 * math.pi)
    total = z + np.conj(z)
    return float(total.real), float(total.imag)


def phase_integral(t: float, cfg: Optional[PhaseQuadratureConfig] = None) -> PhaseResult:
    """
    Phi(t) = int_t^inf (1 / 8 pi tau) sum_{m != 0} c_m e^{-im tau} dtau.

    Returns:
        PhaseResult with the value, its two parts, the imaginary residual of
        the paired sum and a certified bound on the remainder truncation.

    Raises:
        PhaseConvergenceError: If the remainder error bound exceeds quad_tol.
    """
    if not t > 0:
        raise ValueError(f"The phase integral is defined for t > 0, got t = {t}.")
    cfg = cfg or PhaseQuadratureConfig()
    ms, cs = cfg.frequencies()
    T = cfg.upper_limit(t)

    boundary, imag_residual = _boundary_series(t, ms, cs)
    remainder = 0.0
    quad_error = 0.0
    for m, c in zip(ms, cs):
        value, abserr = quad(lambda tau: 1.0 / tau ** 2, t, T, weight="sin", wvar=m,
                             epsabs=config.QUAD_EPSABS_FRACTION * cfg.quad_tol, epsrel=config.QUAD_EPSREL,
                             limit=config.QUAD_LIMIT)
        remainder += c * 2.0 * value / m
        quad_error += c * 2.0 * abserr / m
    remainder /= 8.0 * math.pi
    quad_error /= 8.0 * math.pi

    horizon_tail = float(np.sum(cs * 4.0 / (8.0 * math.pi * ms ** 2 * T ** 2)))
    if horizon_tail + quad_error > cfg.quad_tol:
        raise PhaseConvergenceError(
            f"Remainder error bound {horizon_tail + quad_error:.3e} at t = {t} exceeds quad_tol = {cfg.quad_tol:.3e}; "
            f"raise T_max or loosen the tolerance."
        )
    return PhaseResult(
        t=float(t),
        value=boundary + remainder,
        boundary=boundary,
        remainder=remainder,
        imag_residual=imag_residual,
        tail_bound=horizon_tail + quad_error + cfg.frequency_tail(t),
        quad_error=quad_error,
    )


def phase_integral_closed_form(t: float, cfg: Optional[PhaseQuadratureConfig] = None) -> float:
    """Same truncation as phase_integral, via int_t^inf cos(m tau) / tau dtau = -Ci(mt)."""
    if not t > 0:
        raise ValueError(f"The phase integral is defined for t > 0, got t = {t}.")
    cfg = cfg or PhaseQuadratureConfig()
    ms, cs = cfg.frequencies()
    _, ci = sici(ms * t)
    return float(np.sum(-2.0 * cs * ci) / (8.0 * math.pi))


def explicit_B(alpha_const: complex, t: float, cfg: Optional[PhaseQuadratureConfig] = None) -> complex:
    """B(t) = a e^{-i |a|^2 Phi(t)}."""
    alpha_const = complex(alpha_const)
    if alpha_const == 0:
        if not t > 0:
            raise ValueError(f"explicit_B is defined for t > 0, got t = {t}.")
        return 0j
    phi = phase_integral(t, cfg).value
    return alpha_const * complex(np.exp(-1j * abs(alpha_const) ** 2 * phi))


def phase_sweep(times: Sequence[float], cfg: Optional[PhaseQuadratureConfig] = None) -> List[PhaseResult]:
    return [phase_integral(float(t), cfg) for t in times]


@dataclass
class PhaseDecayFit:
    slope: float
    constant: float
    envelope: float

    @property
    def within_envelope(self) -> bool:
        return self.constant <= self.envelope

    @property
    def within_slope_band(self) -> bool:
        lo, hi = config.DECAY_SLOPE_BAND
        return bool(lo <= self.slope <= hi)


def phase_decay_fit(results: Sequence[PhaseResult], cfg: Optional[PhaseQuadratureConfig] = None) -> PhaseDecayFit:
    """
    Log-log slope of |Phi| and the constant C = max t |Phi(t)|.

    The envelope bounds t |Phi| for the divisor weights: the boundary series
    is at most Si(pi) H_{M_max / 2} / (4 pi) times 1/t, and the remainder is
    added as computed plus its certified error.
    """
    cfg = cfg or PhaseQuadratureConfig()
    ts = np.array([r.t for r in results])
    values = np.array([abs(r.value) for r in results])
    slope = float(np.polyfit(np.log(ts), np.log(values), 1)[0]) if len(results) >= 2 else float("nan")
    if cfg.counts is None:
        N = cfg.M_max // 2
        harmonic = float(np.sum(1.0 / np.arange(1, N + 1)))
        boundary_bound = SI_PI * harmonic / (4.0 * math.pi)
    else:
        ms, cs = cfg.frequencies()
        boundary_bound = float(np.sum(2.0 * cs / ms)) / (8.0 * math.pi)
    remainder_bound = max(r.t * (abs(r.remainder) + r.tail_bound) for r in results)
    return PhaseDecayFit(slope=slope, constant=float(np.max(ts * values)), envelope=boundary_bound + remainder_bound)


@dataclass
class ScalarOdeReport:
    sup_relative_error: float
    times: np.ndarray = field(repr=False)
    ode: np.ndarray = field(repr=False)
    explicit: np.ndarray = field(repr=False)


def scalar_ode_check(alpha_const: complex, t_span: Tuple[float, float],
                     cfg: Optional[PhaseQuadratureConfig] = None,
                     rtol: float = config.ODE_RTOL, atol: float = config.ODE_ATOL,
                     samples: int = config.ODE_SAMPLES) -> ScalarOdeReport:
    """
    Integrates B' = i |a|^2 g(t) B backward from t_span[1], started at
    explicit_B(t_span[1]), and compares with explicit_B on t_span.

    Both sides use the same frequency truncation, so the discrepancy measures
    integrator and quadrature error only.
    """
    cfg = cfg or PhaseQuadratureConfig()
    t0, t1 = (float(v) for v in t_span)
    if not 0 < t0 < t1:
        raise ValueError(f"t_span must satisfy 0 < t0 < t1, got {t_span}.")
    if cfg.T_max is not None and t1 >= cfg.T_max:
        raise ValueError(f"t_span {t_span} must lie below T_max = {cfg.T_max}.")
    alpha_const = complex(alpha_const)
    times = np.linspace(t0, t1, samples)
    if alpha_const == 0:
        zeros = np.zeros(samples, dtype=np.complex128)
        return ScalarOdeReport(0.0, times, zeros, zeros.copy())

    ms, cs = cfg.frequencies()
    a2 = abs(alpha_const) ** 2

    def rhs(t, y):
        g = np.sum(2.0 * cs * np.cos(ms * t)) / (8.0 * math.pi * t)
        return 1j * a2 * g * y

    start = explicit_B(alpha_const, t1, cfg)
    sol = solve_ivp(rhs, (t1, t0), np.array([start]), method="RK45", rtol=rtol, atol=atol, dense_output=True)
    if sol.status != 0:
        from src.dynamics.integrate import IntegrationError
        raise IntegrationError(f"Scalar phase ODE stopped at t = {sol.t[-1]}: {sol.message}", float(sol.t[-1]))
    ode = sol.sol(times)[0]
    ode[-1] = start
    exact = np.array([explicit_B(alpha_const, t, cfg) for t in times])
    err = float(np.max(np.abs(ode - exact)) / abs(alpha_const))
    return ScalarOdeReport(err, times, ode, exact)


@dataclass
class LatticeCheckReport:
    K: int
    wrap: bool
    sup_error: np.ndarray = field(repr=False)

    @property
    def max_error(self) -> float:
        return float(np.max(self.sup_error))

    def central_error(self, radius: int) -> float:
        return float(np.max(self.sup_error[self.K - radius:self.K + radius + 1]))


def lattice_check(alpha_const: complex, K: int, t_span: Tuple[float, float], wrap: bool = True,
                  cfg: Optional[PhaseQuadratureConfig] = None, rtol: float = config.ODE_RTOL,
                  atol: float = config.ODE_ATOL, samples: int = 46) -> LatticeCheckReport:
    """
    Runs the full lattice dynamics with constant data and measures the
    per-mode sup distance to explicit_B over t_span.

    With wrap=True the phase integral uses the table's own frequency counts,
    for which the lattice solution is exactly the scalar one. With hard
    truncation it uses r_m up to cfg.M_max and only the central modes are
    expected to agree.
    """
    from src.dynamics.integrate import integrate
    from src.dynamics.system import SolverConfig

    alpha = ComplexSequence.constant(K, alpha_const)
    table = build_table(K, alpha, wrap=wrap)
    if wrap:
        base = cfg or PhaseQuadratureConfig()
        cfg = PhaseQuadratureConfig(M_max=base.M_max, T_max=base.T_max, quad_tol=base.quad_tol, counts=table.m_counts(0))
    else:
        cfg = cfg or PhaseQuadratureConfig()

    t0, t1 = (float(v) for v in t_span)
    start = ComplexSequence.constant(K, explicit_B(alpha_const, t1, cfg))
    solver_config = SolverConfig(K=K, t_span=(t0, t1), rtol=rtol, atol=atol, samples=samples)
    traj = integrate("B", start, table, solver_config)
    exact = np.array([explicit_B(alpha_const, t, cfg) for t in traj.times])
    sup_error = np.max(np.abs(traj.values - exact[:, None]), axis=0)
    return LatticeCheckReport(K=K, wrap=wrap, sup_error=sup_error)
