"""Intrinsic (length, curvature) curve states and their planar realisation.

The left boundary line sits at ``x = 0`` and the curve leaves it
horizontally (tangent angle 0).  The unit normal is the tangent rotated by
+90 degrees, so curvature is the arclength derivative of the tangent angle.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np
import scipy.fft
from scipy.integrate import trapezoid
from scipy.interpolate import CubicSpline, make_interp_spline

from . import spectral
from .exceptions import (
    IncompatibleBoundaryData,
    InvalidArgument,
    NotWindingZero,
)
from .spectral import CosineField

WINDING_TOL = 0.05
RESIDUAL_TOL = 0.05


@dataclass(frozen=True, eq=False)
class PlanarCurve:
    """Ordered (x, y) samples from the left line to the right line."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float, copy=True)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise InvalidArgument("points must have shape (n, 2)")
        if pts.shape[0] < 9:
            raise InvalidArgument("a curve needs at least 9 points")
        if not np.all(np.isfinite(pts)):
            raise InvalidArgument("points must be finite")
        if np.any(np.hypot(*np.diff(pts, axis=0).T) == 0):
            raise InvalidArgument("consecutive points must be distinct")
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    @property
    def x(self):
        return self.points[:, 0]

    @property
    def y(self):
        return self.points[:, 1]

    def polyline_length(self) -> float:
        return float(np.sum(np.hypot(*np.diff(self.points, axis=0).T)))


@dataclass(frozen=True, eq=False)
class IntrinsicState:
    """Curve state: length, curvature over normalized arclength, anchor, time."""

    L: float
    k: CosineField
    anchor_y: float = 0.0
    d0: float = 1.0
    t: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.L) and self.L > 0):
            raise InvalidArgument(f"length must be positive, got {self.L}")
        if not (np.isfinite(self.d0) and self.d0 > 0):
            raise InvalidArgument(f"line separation must be positive, got {self.d0}")
        if not isinstance(self.k, CosineField):
            raise InvalidArgument("curvature must be a CosineField")

    @property
    def N(self) -> int:
        return self.k.N

    def replace(self, **changes) -> "IntrinsicState":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class IngestionReport:
    winding_defect: float
    sine_residual: float
    field_norm: float
    truncation_residual: float


def winding_number(state: IntrinsicState) -> float:
    return spectral.integrate(state.k, state.L) / (2 * np.pi)


def _fine_size(N: int) -> int:
    return max(8 * N, 256)


def tangent_angle(state: IntrinsicState, sigma) -> np.ndarray:
    """theta(sigma) = int_0^s k ds', with theta(0) = 0."""
    sigma = np.asarray(sigma, dtype=float)
    a = state.k.coeffs
    osc = spectral.evaluate(spectral.antiderivative_sine(state.k, state.L), sigma)
    return state.L * a[0] * sigma + osc


def _series_eval(coeffs, sigma, kind, chunk=2048):
    n = np.arange(coeffs.size)
    out = np.empty(sigma.size)
    for i in range(0, sigma.size, chunk):
        ph = np.pi * np.outer(sigma[i:i + chunk], n)
        out[i:i + chunk] = (np.cos(ph) if kind == "cos" else np.sin(ph)) @ coeffs
    return out


def _position_integrals(theta_fine: np.ndarray, L: float, sigma_out: np.ndarray):
    """int_0^sigma L cos(theta), int_0^sigma L sin(theta) from fine-grid samples.

    cos(theta) is expanded in cosines; sin(theta), minus the linear ramp that
    carries its end value, in sines.  Both antiderivatives are exact series.
    """
    P = theta_fine.size - 1
    n = np.arange(1, P)
    c = scipy.fft.dct(np.cos(theta_fine), type=1) / P
    c[0] *= 0.5
    xs = c[0] * sigma_out + _series_eval(np.concatenate(([0.0], c[1:P] / (n * np.pi))),
                                         sigma_out, "sin")
    g = np.sin(theta_fine)
    ramp = g[-1]
    h = g - ramp * np.linspace(0.0, 1.0, P + 1)
    d = np.concatenate(([0.0], scipy.fft.dst(h[1:-1], type=1) / P / (n * np.pi)))
    # int_0^sigma sin(n pi s) ds = (1 - cos(n pi sigma)) / (n pi)
    ys = 0.5 * ramp * sigma_out**2 + d.sum() - _series_eval(d, sigma_out, "cos")
    return L * xs, L * ys


def reconstruct(state: IntrinsicState, M: int):
    """Planar curve at M uniform arclength samples and the tangent angle there."""
    if M < 9:
        raise InvalidArgument("need at least 9 output samples")
    sigma = np.linspace(0.0, 1.0, M)
    P = _fine_size(state.N)
    theta_fine = tangent_angle(state, spectral.grid(P))
    x, y = _position_integrals(theta_fine, state.L, sigma)
    theta = tangent_angle(state, sigma)
    pts = np.column_stack([x, state.anchor_y + y])
    return PlanarCurve(pts), theta


def closure_defects(state: IntrinsicState):
    """(|int cos(theta) ds - d0|, |theta(L) - 2 pi omega|)."""
    P = _fine_size(state.N)
    theta_fine = tangent_angle(state, spectral.grid(P))
    x_end, _ = _position_integrals(theta_fine, state.L, np.array([1.0]))
    theta_end = float(tangent_angle(state, np.array([1.0]))[0])
    return (abs(float(x_end[0]) - state.d0),
            abs(theta_end - 2 * np.pi * winding_number(state)))


def cosine_state(amplitude: float, L: float, N: int, mode: int = 1,
                 anchor_y: float = 0.0) -> IntrinsicState:
    """State with k = amplitude * cos(mode pi sigma); d0 closes the curve exactly."""
    spectral._check_resolution(N)
    return state_from_coeffs(CosineField.mode(N, mode, amplitude).coeffs, L, anchor_y)


def state_from_coeffs(coeffs, L: float, anchor_y: float = 0.0) -> IntrinsicState:
    """State with the given curvature coefficients and the matching d0."""
    k = CosineField(coeffs)
    probe = IntrinsicState(L=L, k=k, anchor_y=anchor_y, d0=L)
    P = _fine_size(k.N)
    x_end, _ = _position_integrals(tangent_angle(probe, spectral.grid(P)), L, np.array([1.0]))
    return probe.replace(d0=float(x_end[0]))


# -- ingestion of point data --------------------------------------------------

_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)


def _speed(spline, u):
    d = spline(u, 1)
    return np.hypot(d[..., 0], d[..., 1])


def _cumulative_length(spline, u):
    """Arclength at each breakpoint in u by 8-point Gauss-Legendre per interval."""
    lo, hi = u[:-1], u[1:]
    half = 0.5 * (hi - lo)
    nodes = 0.5 * (hi + lo)[:, None] + half[:, None] * _GL_X[None, :]
    seg = half * (_speed(spline, nodes) @ _GL_W)
    return np.concatenate(([0.0], np.cumsum(seg)))


def _length_between(spline, lo, hi):
    half = 0.5 * (hi - lo)
    nodes = 0.5 * (hi + lo)[:, None] + half[:, None] * _GL_X[None, :]
    return half * (_speed(spline, nodes) @ _GL_W)


def from_points(curve: PlanarCurve, N: int):
    """Ingest a point-sampled curve into an :class:`IntrinsicState`.

    The curve is interpolated by a quintic spline in chord length, resampled
    at uniform arclength, and its curvature projected onto N cosine modes.
    The report carries the winding defect and the tangent-angle residual
    that the cosine representation cannot express (non-orthogonal contact
    with the boundary lines shows up here).
    """
    spectral._check_resolution(N)
    pts = np.array(curve.points)
    d0 = pts[-1, 0] - pts[0, 0]
    if not d0 > 0:
        raise InvalidArgument("the curve must run from the left line to the right line")
    anchor_y = pts[0, 1]
    pts = pts - np.array([pts[0, 0], 0.0])

    chord = np.concatenate(([0.0], np.cumsum(np.hypot(*np.diff(pts, axis=0).T))))
    u_knots = chord / chord[-1]
    spline = make_interp_spline(u_knots, pts, k=5)

    refine = 8
    u_fine = np.interp(np.linspace(0, u_knots.size - 1, (u_knots.size - 1) * refine + 1),
                       np.arange(u_knots.size), u_knots)
    s_fine = _cumulative_length(spline, u_fine)
    L = float(s_fine[-1])

    P = 4 * N
    s_target = spectral.grid(P) * L
    u = CubicSpline(s_fine, u_fine)(s_target)
    u[0], u[-1] = 0.0, 1.0
    idx = np.clip(np.searchsorted(u_fine, u, side="right") - 1, 0, u_fine.size - 2)
    for _ in range(3):
        s_u = s_fine[idx] + _length_between(spline, u_fine[idx], u)
        u = u - (s_u - s_target) / _speed(spline, u)
        u = np.clip(u, 0.0, 1.0)
        idx = np.clip(np.searchsorted(u_fine, u, side="right") - 1, 0, u_fine.size - 2)

    d1 = spline(u, 1)
    d2 = spline(u, 2)
    speed = np.hypot(d1[:, 0], d1[:, 1])
    kappa = (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]) / speed**3
    theta_data = np.unwrap(np.arctan2(d1[:, 1], d1[:, 0]))

    full = spectral.transform(kappa)
    k = CosineField(full.coeffs[:N])
    state = IntrinsicState(L=L, k=k, anchor_y=float(anchor_y), d0=float(d0))

    sigma = spectral.grid(P)
    theta_model = tangent_angle(state, sigma)
    residual = float(np.sqrt(trapezoid((theta_data - theta_model) ** 2, sigma)))
    norm = float(np.sqrt(trapezoid(theta_data**2, sigma)))
    tail = full.coeffs[N:]
    truncation = float(np.sqrt(0.5 * np.sum(tail**2)))
    winding_defect = abs(winding_number(state))
    report = IngestionReport(winding_defect=winding_defect, sine_residual=residual,
                             field_norm=norm, truncation_residual=truncation)
    if winding_defect > WINDING_TOL:
        raise NotWindingZero(f"winding defect {winding_defect:.3g} exceeds {WINDING_TOL}")
    if residual > RESIDUAL_TOL * norm + 1e-10:
        raise IncompatibleBoundaryData(
            f"tangent-angle residual {residual:.3g} exceeds {RESIDUAL_TOL} x field norm {norm:.3g}")
    return state, report
