"""
Time integration of the mode systems with scipy's embedded Runge-Kutta 5(4).

The B-system carries its boundary condition at large time, so it is started
at t_span[1] from alpha (optionally corrected by the integration-by-parts
tail) and integrated backward. A and A_tilde are integrated forward from
t_span[0]. Every trajectory is returned with ascending times.
"""

import numpy as np
from scipy.integrate import solve_ivp

from src.lattice.resonance import ResonanceTable
from src.lattice.sequences import ComplexSequence

from . import config
from .system import ModeSystem, NonPositiveTimeError, SolverConfig, Trajectory


class IntegrationError(RuntimeError):
    """The adaptive step size collapsed before reaching the end of the span."""
    code = "step_underflow"

    def __init__(self, message: str, t: float):
        super().__init__(message)
        self.t = t


def boundary_state(alpha: ComplexSequence, table: ResonanceTable, t_max: float,
                   tail_mode: str = config.DEFAULT_TAIL_MODE) -> ComplexSequence:
    """
    Approximation of B(t_max) for the condition B(t) -> alpha as t -> infinity.

    "coarse" returns alpha itself; "refined" adds the leading
    integration-by-parts term of the perturbation R = B - alpha at t_max.
    """
    if tail_mode == "coarse":
        return alpha
    if tail_mode == "refined":
        from src.fixedpoint.mapping import tail_estimate
        return alpha + tail_estimate(alpha, table, t_max)
    raise ValueError(f"Unknown tail mode '{tail_mode}', expected one of {config.TAIL_MODES}.")


def integrate(system_tag: str, state0: ComplexSequence, table: ResonanceTable,
              solver_config: SolverConfig) -> Trajectory:
    """
    Integrates one of the mode systems over solver_config.t_span.

    Args:
        system_tag: "A", "A_tilde" or "B".
        state0: Initial state. For "B" this is the state at t_span[1]
            (integration runs backward); otherwise the state at t_span[0].
        table: Interaction table for the truncation.
        solver_config: Tolerances, span and output samples.

    Returns:
        A Trajectory sampled at solver_config.sample_times().

    Raises:
        IntegrationError: If the step size underflows; `t` holds the time
            reached.
    """
    if system_tag not in config.SYSTEM_TAGS:
        raise ValueError(f"Unknown system '{system_tag}', expected one of {config.SYSTEM_TAGS}.")
    t0, t1 = solver_config.t_span
    if t0 <= 0:
        raise NonPositiveTimeError(
            f"System {system_tag} has a singular 1/t potential at t = 0; t0 must be positive, got {t0}."
        )
    if solver_config.K != table.K:
        raise ValueError(f"Solver truncation K = {solver_config.K} does not match table K = {table.K}.")
    if not state0.fits(table.K):
        raise ValueError(f"Initial state support {state0.support()} exceeds the truncation [-{table.K}, {table.K}].")

    system = ModeSystem(table)
    fun = system.rhs(system_tag)
    times = solver_config.sample_times()
    span = (t1, t0) if system_tag == "B" else (t0, t1)

    sol = solve_ivp(
        fun,
        span,
        state0.dense(table.K),
        method=solver_config.method,
        rtol=solver_config.rtol,
        atol=solver_config.atol,
        max_step=solver_config.max_step,
        dense_output=True,
    )
    if sol.status != 0:
        t_fail = float(sol.t[-1])
        raise IntegrationError(f"Integration of system {system_tag} stopped at t = {t_fail}: {sol.message}", t_fail)

    values = sol.sol(times).T
    # exact start value at the boundary sample
    if system_tag == "B" and times[-1] == t1:
        values[-1] = state0.dense(table.K)
    elif system_tag != "B" and times[0] == t0:
        values[0] = state0.dense(table.K)
    return Trajectory(times, values, system_tag, table.alpha_abs2)


def integrate_from_alpha(alpha: ComplexSequence, table: ResonanceTable,
                         solver_config: SolverConfig) -> Trajectory:
    """B-system trajectory with the large-time condition imposed at t_span[1]."""
    start = boundary_state(alpha, table, solver_config.t_span[1], solver_config.tail_mode)
    return integrate("B", start, table, solver_config)
