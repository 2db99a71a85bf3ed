"""
Composite Gauss-Legendre meshes on [pi N, T_max] and functions sampled on them.

Panels are short enough to resolve e^{-imt} for the largest frequency the
iteration can produce, so oscillatory integrals are computed by plain
composite quadrature. Cumulative integrals to the right end use a per-panel
spectral integration matrix.
"""

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np
from numpy.polynomial import legendre

from src.lattice.sequences import ComplexSequence

from . import config


@dataclass
class QuadratureConfig:
    """Mesh and truncation settings for the fixed-point map."""
    T_max: float = config.DEFAULT_T_MAX
    nodes_per_panel: int = config.NODES_PER_PANEL
    max_panel: float = config.MAX_PANEL
    first_window_refinement: int = config.FIRST_WINDOW_REFINEMENT
    tail_tol: float = config.DEFAULT_TAIL_TOL
    max_nodes: int = config.MAX_NODES

    def __post_init__(self):
        if not self.T_max > 0:
            raise ValueError(f"T_max must be positive, got {self.T_max}.")
        if self.nodes_per_panel < 2:
            raise ValueError(f"Need at least two nodes per panel, got {self.nodes_per_panel}.")
        if not self.max_panel > 0:
            raise ValueError(f"max_panel must be positive, got {self.max_panel}.")
        if self.first_window_refinement < 1:
            raise ValueError("first_window_refinement must be at least 1.")
        if not self.tail_tol > 0:
            raise ValueError(f"tail_tol must be positive, got {self.tail_tol}.")


def _segment(a: float, b: float, h: float) -> np.ndarray:
    n = max(1, int(math.ceil((b - a) / h - 1e-12)))
    return np.linspace(a, b, n + 1)


@dataclass(frozen=True)
class PanelMesh:
    """Panels [edges[i], edges[i+1]] with n Gauss-Legendre nodes each."""
    edges: np.ndarray = field(repr=False)
    n: int

    @property
    def start(self) -> float:
        return float(self.edges[0])

    @property
    def end(self) -> float:
        return float(self.edges[-1])

    @property
    def n_panels(self) -> int:
        return self.edges.size - 1

    @property
    def size(self) -> int:
        return self.n_panels * self.n

    @cached_property
    def _reference(self):
        x, w = legendre.leggauss(self.n)
        vander = legendre.legvander(x, self.n - 1)
        vander_inv = np.linalg.inv(vander)
        antiderivative = legendre.legint(np.eye(self.n), lbnd=-1, axis=0)
        integration = legendre.legvander(x, self.n) @ antiderivative @ vander_inv
        return x, w, vander_inv, integration

    @cached_property
    def half_lengths(self) -> np.ndarray:
        return 0.5 * np.diff(self.edges)

    @cached_property
    def nodes(self) -> np.ndarray:
        """Node times, shape (n_panels, n); flattened order is ascending."""
        x = self._reference[0]
        mid = 0.5 * (self.edges[:-1] + self.edges[1:])
        return mid[:, None] + self.half_lengths[:, None] * x[None, :]

    @property
    def times(self) -> np.ndarray:
        return self.nodes.reshape(-1)

    def _panels(self, f: np.ndarray) -> np.ndarray:
        return np.asarray(f).reshape(f.shape[:-1] + (self.n_panels, self.n))

    def integrate(self, f: np.ndarray) -> np.ndarray:
        """int_start^end f over the last axis."""
        w = self._reference[1]
        return np.sum(self._panels(f) @ w * self.half_lengths, axis=-1)

    def integrate_to_end(self, f: np.ndarray) -> np.ndarray:
        """int_{t_i}^{end} f at every node t_i, over the last axis."""
        _, w, _, integration = self._reference
        F = self._panels(f)
        h = self.half_lengths
        left = np.einsum("ij,...pj->...pi", integration, F) * h[:, None]
        totals = (F @ w) * h
        suffix = np.cumsum(totals[..., ::-1], axis=-1)[..., ::-1] - totals
        out = totals[..., None] - left + suffix[..., None]
        return out.reshape(f.shape)

    def interpolate(self, f: np.ndarray, t: np.ndarray, outside: complex = 0.0) -> np.ndarray:
        """Evaluates the panel interpolants of f at times t; `outside` beyond the mesh."""
        t = np.asarray(t, dtype=float)
        vander_inv = self._reference[2]
        F = self._panels(f)
        coeffs = np.einsum("ij,...pj->...pi", vander_inv, F)
        panel = np.clip(np.searchsorted(self.edges, t, side="right") - 1, 0, self.n_panels - 1)
        a, b = self.edges[panel], self.edges[panel + 1]
        x = (2.0 * t - a - b) / (b - a)
        rows = legendre.legvander(x, self.n - 1)
        values = np.einsum("tj,...tj->...t", rows, coeffs[..., panel, :])
        inside = (t >= self.start) & (t <= self.end)
        return np.where(inside, values, outside)


def build_mesh(t_start: float, quad: QuadratureConfig, max_frequency: int) -> PanelMesh:
    """
    Graded mesh on [t_start, quad.T_max].

    Panel length is min(pi / omega, max_panel) with
    omega = OSCILLATION_FACTOR * max_frequency; the first window after
    t_start uses panels first_window_refinement times shorter.
    """
    if not quad.T_max > t_start:
        raise ValueError(f"T_max = {quad.T_max} must exceed the cutoff start {t_start}.")
    omega = config.OSCILLATION_FACTOR * max_frequency
    h = min(math.pi / omega, quad.max_panel) if omega > 0 else quad.max_panel
    split = min(t_start + math.pi, quad.T_max)
    edges = _segment(t_start, split, h / quad.first_window_refinement)
    if split < quad.T_max:
        edges = np.concatenate([edges, _segment(split, quad.T_max, h)[1:]])
    mesh = PanelMesh(edges=edges, n=quad.nodes_per_panel)
    if mesh.size > quad.max_nodes:
        raise ValueError(
            f"Mesh on [{t_start}, {quad.T_max}] needs {mesh.size} nodes (limit {quad.max_nodes}); "
            f"lower T_max or the truncation K."
        )
    return mesh


@dataclass
class GridFunctionSequence:
    """Per-mode samples R_k on a shared PanelMesh; zero before the mesh start."""
    mesh: PanelMesh
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.complex128)
        if self.values.ndim != 2 or self.values.shape[1] != self.mesh.size or self.values.shape[0] % 2 != 1:
            raise ValueError(f"values must have shape (2K + 1, {self.mesh.size}), got {self.values.shape}.")

    @classmethod
    def zeros(cls, mesh: PanelMesh, K: int) -> "GridFunctionSequence":
        return cls(mesh, np.zeros((2 * K + 1, mesh.size), dtype=np.complex128))

    @property
    def K(self) -> int:
        return self.values.shape[0] // 2

    @property
    def times(self) -> np.ndarray:
        return self.mesh.times

    def __sub__(self, other: "GridFunctionSequence") -> "GridFunctionSequence":
        return GridFunctionSequence(self.mesh, self.values - other.values)

    def __add__(self, other: "GridFunctionSequence") -> "GridFunctionSequence":
        return GridFunctionSequence(self.mesh, self.values + other.values)

    def sample(self, t: np.ndarray) -> np.ndarray:
        """Values at arbitrary times, shape (2K + 1, len(t)); zero before the mesh start."""
        t = np.asarray(t, dtype=float)
        if np.any(t > self.mesh.end + 1e-12):
            raise ValueError(f"Cannot sample beyond T_max = {self.mesh.end}.")
        return self.mesh.interpolate(self.values, t)

    def at_end(self) -> ComplexSequence:
        return ComplexSequence.from_dense(self.sample([self.mesh.end])[:, 0])

    def max_abs(self, t_from: Optional[float] = None) -> float:
        mask = slice(None) if t_from is None else self.times >= t_from
        return float(np.max(np.abs(self.values[:, mask]), initial=0.0))
