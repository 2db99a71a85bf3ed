"""
The fixed-point map for the perturbation R = B - alpha and its Picard iteration.

Writing B = alpha + R, the condition B(t) -> alpha as t -> infinity turns the
B-system into the integral equation R = T(R) with

    T(R)_k(t) = -(i eta_N(t) / 8 pi) int_t^inf (eta_N(tau) / tau) [S_k(tau) - D_k(tau)] dtau,

    S_k = sum_{(m,z)} e^{-im tau} e^{i Lambda log(4 tau) / 8 pi} B_j1 conj(B_j2) B_j3,
    D_k = (|B_k|^2 - |alpha_k|^2) B_k.

The sign of the -i / 8 pi prefactor follows the B-system B' = (i / 8 pi t)(S - D):
on the plateau of eta_N, d/dt T(R) is exactly that velocity at B = alpha + R.

The integral is computed on [t, T_max] by composite quadrature and closed at
T_max with the first integration-by-parts term of the oscillatory sum.
Splitting the products by their degree in R gives T = T0 + T1 + T2 with T0
independent of R and T1 linear in R.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from tqdm import tqdm

from src.lattice.resonance import ResonanceTable, build_table
from src.lattice.sequences import ComplexSequence
from src.norms.windows import max_window, sample_windows, xsp_norm

from . import config
from .cutoff import CutoffFamily
from .mesh import GridFunctionSequence, QuadratureConfig, build_mesh

COUPLING = 1.0 / (8.0 * math.pi)


class QuadratureNonconvergenceError(RuntimeError):
    """Tail estimate beyond T_max above tolerance for some modes."""
    code = "tail_bound"

    def __init__(self, message: str, modes: List[int], bounds: np.ndarray):
        super().__init__(message)
        self.modes = modes
        self.bounds = bounds


class PicardDivergenceError(RuntimeError):
    code = "divergence"

    def __init__(self, message: str, ratios: List[float]):
        super().__init__(message)
        self.ratios = ratios


def _log_phase(t: np.ndarray) -> np.ndarray:
    return COUPLING * np.log(4.0 * t)


def zero_iterate(table: ResonanceTable, N: int = 0, quad: Optional[QuadratureConfig] = None) -> GridFunctionSequence:
    """R = 0 on the mesh for (table, N, quad)."""
    quad = quad or QuadratureConfig()
    mesh = build_mesh(CutoffFamily(N).start, quad, table.max_frequency)
    return GridFunctionSequence.zeros(mesh, table.K)


@dataclass
class TComponents:
    """T0 + T1 + T2 on a common mesh, with the per-mode tail bound at T_max."""
    T0: GridFunctionSequence
    T1: GridFunctionSequence
    T2: GridFunctionSequence
    tail_bound: np.ndarray = field(repr=False)

    @property
    def total(self) -> GridFunctionSequence:
        return GridFunctionSequence(self.T0.mesh, self.T0.values + self.T1.values + self.T2.values)

    def __getitem__(self, tag: str) -> GridFunctionSequence:
        try:
            return {"T0": self.T0, "T1": self.T1, "T2": self.T2}[tag]
        except KeyError:
            raise KeyError(f"Unknown component '{tag}', expected T0, T1 or T2.") from None


def _products(a1, a2, a3, r1, r2, r3) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """B1 conj(B2) B3 split by degree in R, with B = a + r."""
    c2, s2 = np.conj(a2), np.conj(r2)
    f0 = a1 * c2 * a3
    f1 = r1 * c2 * a3 + a1 * s2 * a3 + a1 * c2 * r3
    f2 = r1 * s2 * a3 + r1 * c2 * r3 + a1 * s2 * r3 + r1 * s2 * r3
    return f0, f1, f2


def _mode_sums(table: ResonanceTable, k_index: int, times: np.ndarray, a: np.ndarray,
               r: np.ndarray) -> np.ndarray:
    """S0, S1, S2 of one mode at `times`; shape (3, len(times))."""
    out = np.zeros((3, times.size), dtype=np.complex128)
    lo, hi = int(table.starts[k_index]), int(table.starts[k_index + 1])
    ell = _log_phase(times)
    for start in range(lo, hi, config.ENTRY_CHUNK):
        sl = slice(start, min(start + config.ENTRY_CHUNK, hi))
        m = table.m[sl][:, None]
        lam = table.lam[sl][:, None]
        phase = np.exp(-1j * m * times[None, :])
        if table.has_lambda:
            phase = phase * np.exp(1j * lam * ell[None, :])
        j1, j2, j3 = table.j1_pos[sl], table.j2_pos[sl], table.j3_pos[sl]
        f0, f1, f2 = _products(a[j1][:, None], a[j2][:, None], a[j3][:, None], r[j1], r[j2], r[j3])
        out[0] += np.sum(phase * f0, axis=0)
        out[1] += np.sum(phase * f1, axis=0)
        out[2] += np.sum(phase * f2, axis=0)
    return out


def _diagonal_terms(a: np.ndarray, r: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """D1 (linear in R) and D2 (the rest) of (|B|^2 - |a|^2) B."""
    cross = 2.0 * np.real(np.conj(a) * r)
    D1 = cross * a
    D2 = cross * r + np.abs(r) ** 2 * (a + r)
    return D1, D2


def _boundary_terms(table: ResonanceTable, a: np.ndarray, r_end: np.ndarray, T: float):
    """
    First integration-by-parts term of int_T^inf S_c / tau for c = 0, 1, 2,
    and a per-mode bound on what it leaves out.
    """
    n = table.n_modes
    tails = np.zeros((3, n), dtype=np.complex128)
    bounds = np.zeros(n)
    if table.size == 0:
        return tails, bounds
    m = table.m.astype(float)
    phase = np.exp(-1j * m * T) * np.exp(1j * table.lam * _log_phase(np.array(T)))
    products = _products(a[table.j1_pos], a[table.j2_pos], a[table.j3_pos],
                         r_end[table.j1_pos], r_end[table.j2_pos], r_end[table.j3_pos])
    for c, f in enumerate(products):
        term = phase * f / (1j * m * T)
        tails[c] = (np.bincount(table.k_pos, weights=term.real, minlength=n)
                    + 1j * np.bincount(table.k_pos, weights=term.imag, minlength=n))
    size = np.abs(sum(products)) * (1.0 + np.abs(table.lam) * COUPLING) / (m * m * T * T)
    bounds = np.bincount(table.k_pos, weights=size, minlength=n)
    D1, D2 = _diagonal_terms(a, r_end)
    return tails, COUPLING * (bounds + np.abs(D1 + D2))


def apply_T_components(R: GridFunctionSequence, alpha: ComplexSequence, table: ResonanceTable, N: int = 0,
                       quad: Optional[QuadratureConfig] = None, threads: int = 1,
                       check_tail: bool = True) -> TComponents:
    """
    Evaluates T0, T1 and T2 on the mesh of R.

    Args:
        R: Current perturbation on a mesh starting at pi N.
        alpha: Comb amplitudes (must match the table).
        table: Interaction table.
        N: Cutoff index.
        quad: QuadratureConfig; only tail_tol is read here.
        threads: Worker threads for the per-mode sums.
        check_tail: Raise when the tail bound exceeds quad.tail_tol.

    Raises:
        QuadratureNonconvergenceError: If check_tail is set and some mode's
            tail bound at T_max is above quad.tail_tol.
    """
    quad = quad or QuadratureConfig()
    cutoff = CutoffFamily(N)
    mesh = R.mesh
    if not math.isclose(mesh.start, cutoff.start, abs_tol=1e-12):
        raise ValueError(f"R lives on a mesh starting at {mesh.start}, expected pi N = {cutoff.start}.")
    if R.K != table.K:
        raise ValueError(f"R has truncation K = {R.K}, table has K = {table.K}.")
    K = table.K
    a = alpha.dense(K)
    if not np.allclose(np.abs(a) ** 2, table.alpha_abs2, rtol=1e-12, atol=0.0):
        raise ValueError("alpha does not match the amplitudes the table was built from.")

    tau = mesh.times
    r = R.values

    def one(k_index: int) -> np.ndarray:
        return _mode_sums(table, k_index, tau, a, r)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            sums = np.stack(list(pool.map(one, range(table.n_modes))), axis=1)
    else:
        sums = np.stack([one(i) for i in range(table.n_modes)], axis=1)

    D1, D2 = _diagonal_terms(a[:, None], r)
    weight = cutoff(tau) / tau
    integrands = (sums[0] * weight, (sums[1] - D1) * weight, (sums[2] - D2) * weight)

    T = mesh.end
    r_end = R.sample([T])[:, 0]
    tails, bounds = _boundary_terms(table, a, r_end, T)
    if check_tail and np.any(bounds > quad.tail_tol):
        bad = [int(k) for k in np.flatnonzero(bounds > quad.tail_tol) - K]
        raise QuadratureNonconvergenceError(
            f"Tail bound at T_max = {T} exceeds {quad.tail_tol:.1e} for modes {bad} "
            f"(max {bounds.max():.3e}); raise T_max.", bad, bounds,
        )

    prefactor = -1j * COUPLING * cutoff(tau)
    parts = []
    for c in range(3):
        integral = mesh.integrate_to_end(integrands[c]) + tails[c][:, None]
        parts.append(GridFunctionSequence(mesh, prefactor * integral))
    return TComponents(*parts, tail_bound=bounds)


def apply_T(R: GridFunctionSequence, alpha: ComplexSequence, table: ResonanceTable, N: int = 0,
            quad: Optional[QuadratureConfig] = None, threads: int = 1) -> GridFunctionSequence:
    return apply_T_components(R, alpha, table, N, quad, threads).total


def tail_estimate(alpha: ComplexSequence, table: ResonanceTable, T_max: float) -> ComplexSequence:
    """
    Leading behaviour of R = B - alpha at large T_max:

        R_k(T) ~ -(i / 8 pi) sum e^{-imT} e^{i Lambda log(4T) / 8 pi} a_j1 conj(a_j2) a_j3 / (imT).
    """
    if not T_max > 0:
        raise ValueError(f"T_max must be positive, got {T_max}.")
    a = alpha.dense(table.K)
    tails, _ = _boundary_terms(table, a, np.zeros_like(a), float(T_max))
    return ComplexSequence.from_dense(-1j * COUPLING * tails[0])


def x_norm(G: GridFunctionSequence, s: float = config.DEFAULT_S, p: float = config.DEFAULT_P,
           threads: int = 1, nu_start: int = 0) -> float:
    """X^s_p surrogate norm over the windows nu_start.. that fit below T_max."""
    nu_max = max_window(G.mesh.end)
    if nu_max < nu_start:
        raise ValueError(f"T_max = {G.mesh.end} is too short for norm window {nu_start}.")
    windows = sample_windows(G.sample, nu_max, nu_start=nu_start)
    return xsp_norm(windows, s, p, threads=threads, nu_start=nu_start)


@dataclass
class PicardResult:
    solution: GridFunctionSequence
    ratios: List[float]
    gaps: List[float]
    converged: bool
    tail_bound: np.ndarray = field(repr=False)

    @property
    def iterations(self) -> int:
        return len(self.gaps)

    def __iter__(self):
        yield self.solution
        yield self.ratios


def picard_solve(alpha: ComplexSequence, table: ResonanceTable, N: int = 0, tol: float = config.DEFAULT_TOL,
                 max_iter: int = config.DEFAULT_MAX_ITER, quad: Optional[QuadratureConfig] = None,
                 s: float = config.DEFAULT_S, p: float = config.DEFAULT_P, threads: int = 1,
                 progress: bool = False) -> PicardResult:
    """
    Iterates R <- T(R) from R = 0.

    Stops when ||R^{n+1} - R^n||_X < tol or after max_iter steps; the ratios
    of successive gaps measure the contraction.

    Raises:
        PicardDivergenceError: After DIVERGENCE_PATIENCE consecutive ratios >= 1.
    """
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}.")
    quad = quad or QuadratureConfig()
    R = zero_iterate(table, N, quad)
    gaps: List[float] = []
    ratios: List[float] = []
    streak = 0
    converged = False
    tail_bound = np.zeros(table.n_modes)

    bar = tqdm(range(max_iter), desc="Picard", disable=not progress)
    for _ in bar:
        components = apply_T_components(R, alpha, table, N, quad, threads)
        tail_bound = components.tail_bound
        nxt = components.total
        gap = x_norm(nxt - R, s, p, threads)
        R = nxt
        if gaps and gaps[-1] > 0:
            ratio = gap / gaps[-1]
            ratios.append(ratio)
            streak = streak + 1 if ratio >= 1.0 else 0
        gaps.append(gap)
        bar.set_postfix(gap=f"{gap:.2e}")
        if gap < tol:
            converged = True
            break
        if streak >= config.DIVERGENCE_PATIENCE:
            raise PicardDivergenceError(
                f"Picard iteration diverges: {streak} consecutive contraction ratios >= 1 "
                f"(last {ratios[-config.DIVERGENCE_PATIENCE:]}).", ratios,
            )
    bar.close()
    return PicardResult(R, ratios, gaps, converged, tail_bound)


def residual(R: GridFunctionSequence, alpha: ComplexSequence, table: ResonanceTable, N: int = 0,
             quad: Optional[QuadratureConfig] = None, s: float = config.DEFAULT_S,
             p: float = config.DEFAULT_P, threads: int = 1, nu_start: int = 0) -> float:
    """||R - T(R)||_X, optionally over the windows from nu_start on."""
    return x_norm(R - apply_T(R, alpha, table, N, quad, threads), s, p, threads, nu_start)


def residual_of_samples(times: np.ndarray, values: np.ndarray, alpha: ComplexSequence, table: ResonanceTable,
                        N: int = 0, quad: Optional[QuadratureConfig] = None, s: float = config.DEFAULT_S,
                        p: float = config.DEFAULT_P) -> float:
    """
    Residual of a perturbation known at increasing sample times, such as
    B - alpha from an ODE trajectory.

    The samples carry no cutoff, so the norm is taken over the windows
    nu >= N + 2, on which eta_N is identically 1.
    """
    from scipy.interpolate import CubicSpline

    R = zero_iterate(table, N, quad)
    tau = R.times
    if tau[0] < times[0] or tau[-1] > times[-1]:
        raise ValueError(f"Samples cover [{times[0]}, {times[-1]}], the mesh needs [{tau[0]}, {tau[-1]}].")
    spline = CubicSpline(times, values, axis=1)
    return residual(GridFunctionSequence(R.mesh, spline(tau)), alpha, table, N, quad, s, p, nu_start=N + 2)


@dataclass
class ThresholdResult:
    lower: float
    upper: float
    history: List[Tuple[float, bool]]

    @property
    def estimate(self) -> float:
        return 0.5 * (self.lower + self.upper)


def contraction_threshold(alpha: ComplexSequence, K: int, N: int = 0, quad: Optional[QuadratureConfig] = None,
                          lam_hi: float = 1.0, bisections: int = config.THRESHOLD_BISECTIONS,
                          tol: float = config.DEFAULT_TOL, max_iter: int = config.DEFAULT_MAX_ITER,
                          s: float = config.DEFAULT_S, p: float = config.DEFAULT_P,
                          wrap: bool = False, progress: bool = False) -> ThresholdResult:
    """
    Bisects over the scale lambda of the data lambda * alpha for the point
    where Picard iteration stops converging.

    lam_hi is doubled until iteration fails there (at most eight times).
    """
    quad = quad or QuadratureConfig()
    history: List[Tuple[float, bool]] = []

    def converges(lam: float) -> bool:
        scaled = alpha.scaled(lam)
        table = build_table(K, scaled, wrap=wrap)
        try:
            ok = picard_solve(scaled, table, N, tol, max_iter, quad, s, p).converged
        except (PicardDivergenceError, QuadratureNonconvergenceError):
            ok = False
        history.append((lam, ok))
        return ok

    lo, hi = 0.0, float(lam_hi)
    for _ in range(8):
        if not converges(hi):
            break
        lo, hi = hi, 2.0 * hi
    else:
        return ThresholdResult(hi, math.inf, history)

    for _ in tqdm(range(bisections), desc="Threshold", disable=not progress):
        mid = 0.5 * (lo + hi)
        if converges(mid):
            lo = mid
        else:
            hi = mid
    return ThresholdResult(lo, hi, history)
