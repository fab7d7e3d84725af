"""Reference integrators that share no discretisation with the spectral solver.

``GraphDiffusion`` evolves the m = 0 polyharmonic flow as a graph y(x) on a
uniform x-grid with second-order finite differences and forward Euler.  The
vertical lines are mirrors, so ghost points reflect evenly.  ``rk4_reference``
integrates the intrinsic right-hand side with classical RK4 and tiny steps.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.spatial import cKDTree

from . import flow
from .exceptions import InvalidArgument
from .geometry import IntrinsicState, PlanarCurve, reconstruct
from .spectral import CosineField

GHOSTS = 3


class GraphDiffusion:
    """Curve diffusion y_t = F sqrt(1 + y_x^2), F = -k_ss, for a graph between x = 0 and x = d0."""

    def __init__(self, x: np.ndarray, y: np.ndarray):
        self.x = np.asarray(x, dtype=float)
        self.y = np.array(y, dtype=float)
        self.h = self.x[1] - self.x[0]
        if not np.allclose(np.diff(self.x), self.h):
            raise InvalidArgument("grid must be uniform")
        self.t = 0.0

    @classmethod
    def from_state(cls, state: IntrinsicState, J: int = 32, samples: int = 8193):
        curve, _ = reconstruct(state, samples)
        if np.any(np.diff(curve.x) <= 0):
            raise InvalidArgument("state is not a graph over x")
        x = np.linspace(0.0, state.d0, J + 1)
        y = CubicSpline(curve.x, curve.y)(x)
        return cls(x, y)

    def _padded(self, y):
        g = GHOSTS
        return np.concatenate((y[g:0:-1], y, y[-2:-g - 2:-1]))

    def rate(self, y=None) -> np.ndarray:
        y = self.y if y is None else y
        h, g = self.h, GHOSTS
        Y = self._padded(y)
        yx = (Y[2:] - Y[:-2]) / (2 * h)
        yxx = (Y[2:] - 2 * Y[1:-1] + Y[:-2]) / h**2
        w = np.sqrt(1 + yx**2)
        k = yxx / w**3
        # k_s = k_x / w at half points, then k_ss at nodes; index 0 of kss is Y[2]
        ks_half = (k[1:] - k[:-1]) / h / (0.5 * (w[1:] + w[:-1]))
        kss = (ks_half[1:] - ks_half[:-1]) / h / w[1:-1]
        return (-kss * w[1:-1])[g - 2: g - 2 + y.size]

    def stable_dt(self) -> float:
        return self.h**4 / 32

    def run(self, t_end: float, dt: float | None = None) -> None:
        dt = dt or self.stable_dt()
        n = max(1, math.ceil((t_end - self.t) / dt - 1e-12))
        dt = (t_end - self.t) / n
        for _ in range(n):
            self.y = self.y + dt * self.rate()
        self.t = t_end

    def curve(self) -> PlanarCurve:
        return PlanarCurve(np.column_stack([self.x, self.y]))


def _to_polyline(p: np.ndarray, poly: np.ndarray, neighbours: int = 4) -> np.ndarray:
    """Distance from each point of p to the polyline through poly's vertices."""
    _, idx = cKDTree(poly).query(p, k=neighbours)
    best = np.full(len(p), np.inf)
    for col in range(neighbours):
        i = idx[:, col]
        for j0, j1 in ((i - 1, i), (i, i + 1)):
            ok = (j0 >= 0) & (j1 < len(poly))
            a = poly[np.clip(j0, 0, len(poly) - 1)]
            b = poly[np.clip(j1, 0, len(poly) - 1)]
            ab = b - a
            den = np.maximum(np.einsum("ij,ij->i", ab, ab), 1e-300)
            u = np.clip(np.einsum("ij,ij->i", p - a, ab) / den, 0, 1)
            d = np.linalg.norm(p - (a + u[:, None] * ab), axis=1)
            best = np.where(ok, np.minimum(best, d), best)
    return best


def hausdorff(a: np.ndarray, b: np.ndarray) -> float:
    """Symmetric Hausdorff distance between two polylines given by their vertices."""
    return float(max(_to_polyline(a, b).max(), _to_polyline(b, a).max()))


def graph_vs_state(oracle: GraphDiffusion, state: IntrinsicState, samples: int = 16385) -> float:
    """Hausdorff distance between the oracle graph (spline-densified) and the reconstructed state."""
    spectral_pts = reconstruct(state, samples)[0].points
    xs = np.linspace(oracle.x[0], oracle.x[-1], samples)
    graph_pts = np.column_stack([xs, CubicSpline(oracle.x, oracle.y, bc_type="clamped")(xs)])
    return hausdorff(graph_pts, spectral_pts)


def rk4_reference(state: IntrinsicState, config, t: float, substeps: int = 1000) -> IntrinsicState:
    """Classical RK4 on (k, L, anchor_y) over time t with the given number of substeps."""
    h = t / substeps
    a = np.array(state.k.coeffs)
    L, y = state.L, state.anchor_y

    def f(a, L):
        dk, dL, dy, _ = flow._rhs(a, L, config)
        return dk, dL, dy

    for _ in range(substeps):
        k1 = f(a, L)
        k2 = f(a + 0.5 * h * k1[0], L + 0.5 * h * k1[1])
        k3 = f(a + 0.5 * h * k2[0], L + 0.5 * h * k2[1])
        k4 = f(a + h * k3[0], L + h * k3[1])
        a = a + h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        L = L + h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        y = y + h / 6 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
    return state.replace(k=CosineField(a), L=float(L), anchor_y=float(y), t=state.t + t)
