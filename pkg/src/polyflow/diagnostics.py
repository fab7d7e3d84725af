"""Monitored quantities, identity defects and decay-rate fitting."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields

import numpy as np

from . import spectral
from .exceptions import InvalidArgument, InvalidSeries
from .geometry import IntrinsicState, closure_defects, reconstruct, winding_number
from .spectral import CosineField, SineField

MEAN_ZERO = "mean-zero"
DIRICHLET = "dirichlet"


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    L: float
    omega: float
    l2_k: float
    energy: float
    l2_ksm1: float
    sup_k: float
    x_defect: float
    theta_defect: float
    sine_residual: float
    dLdt_defect: float
    dEdt_defect: float
    dissipation: float
    # int k F ds (= -dL/dt) and int F_grad F ds (= -dE/dt) at this state
    length_rate: float
    energy_rate: float

    @classmethod
    def columns(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def as_row(self) -> list[float]:
        return [getattr(self, c) for c in self.columns()]

    def as_dict(self) -> dict:
        return asdict(self)


def derivative_l2(state: IntrinsicState, order: int) -> float:
    """int (d^order k / ds^order)^2 ds."""
    f = state.k if order == 0 else spectral.deriv(state.k, order, state.L)
    return spectral.l2_inner(f, f, state.L)


def derivative_norms(state: IntrinsicState, max_order: int) -> list[float]:
    return [derivative_l2(state, j) for j in range(max_order + 1)]


def sup_norm(field, oversample: int = 8) -> float:
    return float(np.max(np.abs(spectral.values(field, oversample * field.N))))


def record(state: IntrinsicState, config, prev: DiagnosticsRecord | None = None) -> DiagnosticsRecord:
    """Diagnostics of one state; rate defects use the previous record when given.

    The defects compare the record-to-record difference quotient of L (and
    of E) with the trapezoidal average of the predicted rates at both ends.
    """
    from .flow import DISSIPATION_CONSTANT, POLYHARMONIC, gradient_speed, speed_with_residual

    m = config.m
    L = state.L
    F, residual = speed_with_residual(state, config)
    Fg = F if config.kind != POLYHARMONIC else gradient_speed(state, m)
    x_defect, theta_defect = closure_defects(state)
    energy = 0.5 * derivative_l2(state, m)
    l2_ksm1 = derivative_l2(state, m + 1)
    length_rate = spectral.l2_inner(state.k, F, L)
    energy_rate = spectral.l2_inner(Fg, F, L)
    dL_def = dE_def = 0.0
    if prev is not None and state.t > prev.t:
        h = state.t - prev.t
        if config.kind == POLYHARMONIC:
            predicted = 0.5 * (l2_ksm1 + prev.l2_ksm1)
        else:
            predicted = 0.5 * (length_rate + prev.length_rate)
        dL_def = abs((L - prev.L) / h + predicted)
        dE_def = abs((energy - prev.energy) / h
                     + DISSIPATION_CONSTANT * 0.5 * (energy_rate + prev.energy_rate))
    return DiagnosticsRecord(
        t=float(state.t), L=float(L), omega=winding_number(state),
        l2_k=derivative_l2(state, 0), energy=energy, l2_ksm1=l2_ksm1,
        sup_k=sup_norm(state.k), x_defect=x_defect, theta_defect=theta_defect,
        sine_residual=residual, dLdt_defect=dL_def, dEdt_defect=dE_def,
        dissipation=spectral.l2_inner(F, F, L), length_rate=length_rate,
        energy_rate=energy_rate,
    )


def scale_invariant_norm(state: IntrinsicState, ell: int, p) -> float:
    """sum_{i<=ell} L^{i+1-1/p} ||d_s^i k||_p for p in {2, inf}."""
    if ell < 0:
        raise InvalidArgument("ell must be >= 0")
    L = state.L
    total = 0.0
    for i in range(ell + 1):
        f = state.k if i == 0 else spectral.deriv(state.k, i, L)
        if p == 2:
            total += L ** (i + 0.5) * math.sqrt(max(spectral.l2_inner(f, f, L), 0.0))
        elif p in (math.inf, "inf"):
            total += L ** (i + 1) * sup_norm(f)
        else:
            raise InvalidArgument(f"p must be 2 or inf, got {p}")
    return total


@dataclass(frozen=True)
class InequalityCheck:
    lhs: float
    rhs: float
    holds: bool

    @property
    def ratio(self) -> float:
        return self.lhs / self.rhs if self.rhs > 0 else (0.0 if self.lhs == 0 else math.inf)


def psw_check(f, L: float, variant: str):
    """Both Poincare-Sobolev-Wirtinger inequalities for one field.

    ``mean-zero`` takes a CosineField and zeroes its mean; ``dirichlet``
    needs a SineField.  Returns (L2 inequality, sup inequality).
    """
    if variant == MEAN_ZERO:
        if not isinstance(f, CosineField):
            raise InvalidArgument("the mean-zero variant needs a CosineField")
        c = np.array(f.coeffs)
        c[0] = 0.0
        f = CosineField(c)
        sup_const = 2 * L / math.pi
    elif variant == DIRICHLET:
        if not isinstance(f, SineField):
            raise InvalidArgument("the Dirichlet variant needs a SineField")
        sup_const = L / math.pi
    else:
        raise InvalidArgument(f"unknown variant {variant!r}")
    fs = spectral.deriv(f, 1, L)
    grad = spectral.l2_inner(fs, fs, L)
    l2_lhs = spectral.l2_inner(f, f, L)
    l2_rhs = L**2 / math.pi**2 * grad
    sup_lhs = sup_norm(f, 16) ** 2
    sup_rhs = sup_const * grad
    return (InequalityCheck(l2_lhs, l2_rhs, l2_lhs <= l2_rhs * (1 + 1e-10)),
            InequalityCheck(sup_lhs, sup_rhs, sup_lhs <= sup_rhs * (1 + 1e-10)))


def fit_decay_rate(series, tail_fraction: float = 0.5):
    """Least-squares exponential rate over the trailing part of a (t, value) series.

    Returns (rate, r2) where rate = -slope of log(value) against t.
    """
    data = np.asarray(series, dtype=float)
    if data.ndim != 2 or data.shape[1] != 2:
        raise InvalidSeries("series must be a sequence of (t, value) pairs")
    n_tail = int(math.ceil(tail_fraction * len(data)))
    tail = data[len(data) - n_tail:]
    if len(tail) < 10:
        raise InvalidSeries(f"need at least 10 tail points, got {len(tail)}")
    t, v = tail[:, 0], tail[:, 1]
    if np.any(~np.isfinite(v)) or np.any(v <= 0):
        raise InvalidSeries("tail values must be positive and finite")
    logv = np.log(v)
    slope, intercept = np.polyfit(t, logv, 1)
    resid = logv - (slope * t + intercept)
    ss_tot = float(np.sum((logv - logv.mean()) ** 2))
    ss_res = float(np.sum(resid**2))
    if ss_tot <= 1e-28 * max(1.0, float(np.sum(logv**2))):
        r2 = 1.0
    else:
        r2 = 1.0 - ss_res / ss_tot
    return -float(slope), r2


def max_speed(state: IntrinsicState, config) -> float:
    """max over the curve of |d gamma/dt| at fixed sigma (normal plus tangential part)."""
    from .flow import speed

    F = speed(state, config)
    kF = spectral.product([state.k, F])
    psi = spectral.antiderivative_sine(kF, state.L)
    Fv = spectral.values(F, 8 * state.N)
    pv = spectral.values(psi, 8 * state.N)
    return float(np.max(np.hypot(Fv, pv)))


@dataclass(frozen=True)
class DisplacementCheck:
    max_displacement: float
    bound: float
    rate: float
    constant: float
    within: bool


def displacement_bound_check(trajectory, config, samples: int = 257) -> DisplacementCheck:
    """Compare the largest displacement from t=0 with c/delta (1 - exp(-delta t)).

    delta is fitted to the run's own speed series and c is the smallest
    constant with speed(t) <= c exp(-delta t) at every snapshot.
    """
    states = trajectory.states
    if len(states) < 2:
        raise InvalidArgument("need at least two snapshots")
    base, _ = reconstruct(states[0], samples)
    disp = max(float(np.max(np.linalg.norm(reconstruct(s, samples)[0].points - base.points,
                                           axis=1))) for s in states[1:])
    t = np.array([s.t for s in states])
    v = np.array([max_speed(s, config) for s in states])
    if not np.any(v > 0):
        return DisplacementCheck(disp, 0.0, 0.0, 0.0, disp <= 0.0)
    rate = 0.0
    if len(states) >= 20 and np.all(v > 0):
        rate = max(fit_decay_rate(np.column_stack([t, v]), 0.5)[0], 0.0)
    c = float(np.max(v * np.exp(rate * (t - t[0]))))
    span = t[-1] - t[0]
    bound = c * span if rate == 0 else c / rate * (1 - math.exp(-rate * span))
    return DisplacementCheck(disp, bound, rate, c, disp <= bound * 1.1)
