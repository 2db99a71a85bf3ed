"""
Windowed Fourier-Lebesgue norms on the time windows

    I_nu   = [pi nu, pi (nu + 2)],
    I^e_nu = [pi (nu - 1), pi (nu + 3)].

A function on I^e_nu is analyzed as a 4 pi periodic function, so its
frequencies are the half integers k = h / 2. The H^s_p norm on I_nu is an
infimum over extensions to I^e_nu; here it is estimated from above by the
smallest H~^{s,p} norm over a fixed family of extensions, each multiplied by
the cutoff psi^e_nu.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from src.fixedpoint.cutoff import psi_ext

from . import config


@dataclass(frozen=True)
class WindowSpec:
    """Window nu with a uniform periodic grid of n samples on I^e_nu."""
    nu: int
    n: int = config.WINDOW_SAMPLES

    def __post_init__(self):
        if self.n < config.MIN_WINDOW_SAMPLES or self.n & (self.n - 1):
            raise ValueError(
                f"Window grids must be a power of two >= {config.MIN_WINDOW_SAMPLES}, got {self.n}."
            )

    @property
    def inner(self) -> tuple:
        return (math.pi * self.nu, math.pi * (self.nu + 2))

    @property
    def extended(self) -> tuple:
        return (math.pi * (self.nu - 1), math.pi * (self.nu + 3))

    @property
    def times(self) -> np.ndarray:
        """Grid on I^e_nu, right endpoint excluded (4 pi periodic)."""
        return self.extended[0] + 4.0 * math.pi * np.arange(self.n) / self.n

    @property
    def inner_slice(self) -> slice:
        """Grid indices lying in I_nu, both endpoints included."""
        return slice(self.n // 4, 3 * self.n // 4 + 1)

    @property
    def inner_times(self) -> np.ndarray:
        return self.times[self.inner_slice]

    @property
    def cutoff(self) -> np.ndarray:
        return psi_ext(self.nu, self.times)


@dataclass
class HalfIntegerSpectrum:
    """Coefficients f_k at half-integer frequencies k, in FFT order."""
    coefficients: np.ndarray = field(repr=False)
    frequencies: np.ndarray = field(repr=False)

    def coefficient(self, k: float) -> complex:
        idx = np.flatnonzero(np.isclose(self.frequencies, k))
        return complex(self.coefficients[idx[0]]) if idx.size else 0j


def window_spectrum(samples: np.ndarray, window: WindowSpec) -> HalfIntegerSpectrum:
    """
    f_k = (1/n) sum_j f(t_j) e^{-i k t_j}, k in Z/2, phases relative to absolute time.

    Works on the last axis of `samples`.
    """
    samples = np.asarray(samples, dtype=np.complex128)
    n = samples.shape[-1]
    if n != window.n:
        raise ValueError(f"Expected {window.n} samples on I^e_{window.nu}, got {n}.")
    h = np.fft.fftfreq(n, d=1.0 / n)
    shift = np.exp(-0.5j * h * window.extended[0])
    return HalfIntegerSpectrum(np.fft.fft(samples, axis=-1) / n * shift, 0.5 * h)


def _weights(frequencies: np.ndarray, s: float, homogeneous: bool) -> np.ndarray:
    if homogeneous:
        return np.abs(frequencies) ** s
    return (1.0 + frequencies ** 2) ** (0.5 * s)


def _check_sp(s: float, p: float):
    if s < 0:
        raise ValueError(f"Smoothness s must be nonnegative, got {s}.")
    if not 1 < p < math.inf:
        raise ValueError(f"Exponent p must lie in (1, inf), got {p}.")


def tilde_hsp_norm(spec: HalfIntegerSpectrum, s: float, p: float, homogeneous: bool = False) -> np.ndarray:
    """
    (sum_k <k>^{sp} |f_k|^p)^{1/p} with <k> = (1 + k^2)^{1/2}.

    With homogeneous=True the weight is |k|^s, which gives the seminorm.
    Reduces over the last axis.
    """
    _check_sp(s, p)
    terms = (_weights(spec.frequencies, s, homogeneous) * np.abs(spec.coefficients)) ** p
    return np.sum(terms, axis=-1) ** (1.0 / p)


def extend(inner: np.ndarray, window: WindowSpec, how: str) -> np.ndarray:
    """Fills I^e_nu from samples on I_nu by even reflection, edge values or zeros."""
    inner = np.asarray(inner, dtype=np.complex128)
    n = window.n
    lo, hi = n // 4, 3 * n // 4
    out = np.zeros(inner.shape[:-1] + (n,), dtype=np.complex128)
    out[..., lo:hi + 1] = inner
    left = np.arange(lo)
    right = np.arange(hi + 1, n)
    if how == "reflect":
        out[..., left] = out[..., 2 * lo - left]
        out[..., right] = out[..., 2 * hi - right]
    elif how == "edge":
        out[..., left] = out[..., lo:lo + 1]
        out[..., right] = out[..., hi:hi + 1]
    elif how != "zero":
        raise ValueError(f"Unknown extension '{how}', expected one of {config.EXTENSIONS}.")
    return out


def hsp_norm_estimate(f: np.ndarray, s: float, p: float, nu: int, n: int = config.WINDOW_SAMPLES,
                      natural: Optional[np.ndarray] = None, homogeneous: bool = False) -> np.ndarray:
    """
    Upper bound for the H^s_p norm of f on I_nu.

    Args:
        f: Samples on the inner grid of WindowSpec(nu, n), last axis.
        s, p: Norm parameters.
        nu: Window index.
        n: Grid size on I^e_nu.
        natural: Optional samples of an actual extension of f on the full
            I^e_nu grid (for instance the function itself when known there).
        homogeneous: Use the |k|^s weight.

    Returns:
        The minimum of the H~^{s,p} norms of psi^e_nu * g over the
        extensions g tried. Every candidate agrees with f on I_nu, so the
        minimum bounds the infimum from above.
    """
    window = WindowSpec(nu, n)
    cutoff = window.cutoff
    candidates = [extend(f, window, how) for how in config.EXTENSIONS]
    if natural is not None:
        candidates.append(np.asarray(natural, dtype=np.complex128))
    norms = [tilde_hsp_norm(window_spectrum(cutoff * g, window), s, p, homogeneous) for g in candidates]
    return np.min(np.stack(norms), axis=0)


def window_norms(window_samples: np.ndarray, s: float, p: float, homogeneous: bool = False,
                 threads: int = config.DEFAULT_THREADS, nu_start: int = 0) -> np.ndarray:
    """
    Per-window, per-mode norm estimates.

    Args:
        window_samples: Shape (n_windows, n_modes, n); row i holds the
            natural samples on I^e_nu for nu = nu_start + i.

    Returns:
        Array of shape (n_windows, n_modes).
    """
    window_samples = np.asarray(window_samples, dtype=np.complex128)
    n = window_samples.shape[-1]
    inner = WindowSpec(0, n).inner_slice

    def one(i: int) -> np.ndarray:
        rows = window_samples[i]
        return hsp_norm_estimate(rows[..., inner], s, p, nu_start + i, n, natural=rows, homogeneous=homogeneous)

    indices = range(window_samples.shape[0])
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return np.array(list(pool.map(one, indices)))
    return np.array([one(i) for i in indices])


def xsp_norm(window_samples: np.ndarray, s: float, p: float, nu_max: Optional[int] = None,
             homogeneous: bool = False, threads: int = config.DEFAULT_THREADS, nu_start: int = 0) -> float:
    """
    sup_{nu_start <= nu <= nu_max} (nu + 1) (sum_k ||R_k||_{H^s_p(I_nu)}^p)^{1/p}

    Row i of window_samples belongs to window nu_start + i.
    """
    window_samples = np.asarray(window_samples)
    if nu_max is not None:
        window_samples = window_samples[:max(nu_max - nu_start + 1, 0)]
    if window_samples.shape[0] == 0:
        return 0.0
    per_mode = window_norms(window_samples, s, p, homogeneous, threads, nu_start)
    nu = nu_start + np.arange(per_mode.shape[0])
    totals = (nu + 1) * np.sum(per_mode ** p, axis=-1) ** (1.0 / p)
    return float(np.max(totals))


def max_window(T_max: float) -> int:
    """Largest nu with I^e_nu inside (-inf, T_max]."""
    return int(math.floor(T_max / math.pi)) - 3


def sample_windows(sampler, nu_max: int, n: int = config.WINDOW_SAMPLES, nu_start: int = 0) -> np.ndarray:
    """
    Collects sampler(times) on I^e_nu for nu = nu_start..nu_max.

    `sampler` maps an array of times to an array (n_modes, len(times)).
    """
    if nu_max < nu_start:
        raise ValueError(f"nu_max = {nu_max} is below the first window {nu_start}.")
    return np.stack([sampler(WindowSpec(nu, n).times) for nu in range(nu_start, nu_max + 1)])


@dataclass
class DecayProfile:
    component: str
    nus: np.ndarray
    norms: np.ndarray
    scaled: np.ndarray
    slope: float

    @property
    def band(self) -> float:
        """max / min of the (nu + 1)-scaled norms."""
        return float(np.max(self.scaled) / np.min(self.scaled)) if np.min(self.scaled) > 0 else math.inf

    def rows(self) -> List[Dict[str, float]]:
        return [{"nu": int(nu), "norm": float(v), "scaled": float(w)}
                for nu, v, w in zip(self.nus, self.norms, self.scaled)]


def decay_profile(component_tag: str, alpha, R, s: float, p: float, nu_range: Sequence[int],
                  table=None, N: int = 0, quad=None, seminorm: bool = False,
                  n: int = config.WINDOW_SAMPLES, threads: int = config.DEFAULT_THREADS) -> DecayProfile:
    """
    (nu + 1) ||T_c(R)||_{l^p(H^s_p(I_nu))} over nu_range for c in {T0, T1, T2}.

    Args:
        component_tag: "T0", "T1" or "T2".
        alpha: ComplexSequence of comb amplitudes.
        R: GridFunctionSequence, or None for R = 0 on a fresh mesh.
        table: ResonanceTable; built from alpha when omitted.
        N, quad: Cutoff index and QuadratureConfig of the map.
        seminorm: Use the homogeneous weight |k|^s.

    Returns:
        DecayProfile whose slope is the log-log fit of the scaled values
        against nu + 1.
    """
    from src.fixedpoint.mapping import apply_T_components, zero_iterate
    from src.lattice.resonance import build_table

    if component_tag not in ("T0", "T1", "T2"):
        raise ValueError(f"Unknown component '{component_tag}', expected T0, T1 or T2.")
    if table is None:
        table = build_table(alpha.radius(), alpha)
    if R is None:
        R = zero_iterate(table, N, quad)
    components = apply_T_components(R, alpha, table, N, quad, threads=threads)
    component = components[component_tag]

    nus = np.asarray(list(nu_range), dtype=int)
    if nus.size == 0:
        raise ValueError("nu_range is empty.")
    if nus.max() > max_window(component.mesh.end):
        raise ValueError(f"nu = {nus.max()} needs samples beyond T_max = {component.mesh.end}.")
    samples = np.stack([component.sample(WindowSpec(int(nu), n).times) for nu in nus])
    inner = WindowSpec(0, n).inner_slice
    norms = np.empty(nus.size)
    for i, nu in enumerate(nus):
        per_mode = hsp_norm_estimate(samples[i][..., inner], s, p, int(nu), n, natural=samples[i], homogeneous=seminorm)
        norms[i] = np.sum(per_mode ** p) ** (1.0 / p)
    scaled = (nus + 1) * norms
    if nus.size >= 2 and np.all(scaled > 0):
        slope = float(np.polyfit(np.log(nus + 1.0), np.log(scaled), 1)[0])
    else:
        slope = float("nan")
    return DecayProfile(component_tag, nus, norms, scaled, slope)


@dataclass
class SampledNorms:
    """Window norms of a function known only at sample times."""
    nus: np.ndarray
    per_mode: np.ndarray = field(repr=False)
    modes: np.ndarray = field(repr=False)
    p: float

    @property
    def totals(self) -> np.ndarray:
        """(nu + 1) (sum_k ||f_k||^p)^{1/p} per window."""
        return (self.nus + 1) * np.sum(self.per_mode ** self.p, axis=-1) ** (1.0 / self.p)

    @property
    def xsp(self) -> float:
        return float(np.max(self.totals))

    @property
    def slope(self) -> float:
        totals = self.totals
        if self.nus.size < 2 or np.any(totals <= 0):
            return float("nan")
        return float(np.polyfit(np.log(self.nus + 1.0), np.log(totals), 1)[0])

    def mode_slopes(self) -> Dict[int, float]:
        """Log-log slope of (nu + 1) ||f_k||_{H^s_p(I_nu)} for every mode that never vanishes."""
        slopes = {}
        if self.nus.size < 2:
            return slopes
        x = np.log(self.nus + 1.0)
        for j, k in enumerate(self.modes):
            scaled = (self.nus + 1) * self.per_mode[:, j]
            if np.all(scaled > 0):
                slopes[int(k)] = float(np.polyfit(x, np.log(scaled), 1)[0])
        return slopes

    def rows(self):
        for i, nu in enumerate(self.nus):
            for j, k in enumerate(self.modes):
                yield int(nu), int(k), float(self.per_mode[i, j])


def sampled_norms(times: np.ndarray, values: np.ndarray, s: float, p: float, nu_max: Optional[int] = None,
                  nu_start: Optional[int] = None, n: int = config.WINDOW_SAMPLES, homogeneous: bool = False,
                  threads: int = config.DEFAULT_THREADS) -> SampledNorms:
    """
    Window norms of per-mode samples (values has shape (2K + 1, len(times))).

    The samples are interpolated with a cubic spline onto each window grid.
    By default every window whose I^e_nu lies inside [times[0], times[-1]]
    is used.
    """
    from scipy.interpolate import CubicSpline

    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=np.complex128)
    if values.ndim != 2 or values.shape[1] != times.size or values.shape[0] % 2 != 1:
        raise ValueError(f"values must have shape (2K + 1, {times.size}), got {values.shape}.")
    first = max(int(math.ceil(times[0] / math.pi - 1e-12)) + 1, 0)
    last = max_window(float(times[-1]))
    nu_start = first if nu_start is None else nu_start
    nu_max = last if nu_max is None else nu_max
    if nu_start < first or nu_max > last:
        raise ValueError(
            f"Samples on [{times[0]}, {times[-1]}] cover the windows {first}..{last}, "
            f"asked for {nu_start}..{nu_max}."
        )
    spline = CubicSpline(times, values, axis=1)
    windows = sample_windows(spline, nu_max, n, nu_start)
    per_mode = window_norms(windows, s, p, homogeneous, threads, nu_start)
    K = values.shape[0] // 2
    return SampledNorms(np.arange(nu_start, nu_max + 1), per_mode, np.arange(-K, K + 1), p)
