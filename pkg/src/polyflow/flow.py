"""Normal speeds, the intrinsic evolution system and semi-implicit stepping.

The evolution is carried in intrinsic form.  With normal speed F (normal =
tangent rotated by +90 degrees) and a tangential velocity psi that keeps
sigma = s/L material,

    dk/dt|_sigma = F_ss + k^2 F + psi k_s,
    dL/dt        = -int k F ds,
    psi(s)       = int_0^s k F ds' - (s/L) int_0^L k F ds,

and the left endpoint slides vertically with velocity F(0).  The stiff
linear part ``-(n pi/L)^(2m+4) a_n`` is diagonal in the cosine basis and is
integrated exactly; all remaining terms are explicit.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from . import spectral
from .exceptions import InvalidArgument, InvalidPerturbation, ParityViolation, StepFailure
from .geometry import IntrinsicState
from .spectral import COSINE, SINE, CosineField

POLYHARMONIC = "polyharmonic"
GRADIENT = "gradient"
KINDS = (POLYHARMONIC, GRADIENT)
SCHEMES = ("etdrk2", "etd1", "imex_euler")

# Vertical velocity of the left endpoint is ANCHOR_SIGN * F(0); the sign was
# fixed against the point-based reference integrator (see tests/test_oracle.py).
ANCHOR_SIGN = 1.0
# dE/dt = -DISSIPATION_CONSTANT * int F^2 ds for E = 1/2 int k_{s^m}^2 ds;
# confirmed by first_variation_check.
DISSIPATION_CONSTANT = 1.0

PARITY_TOL = 1e-8
BLOWUP_FACTOR = 1e6
MAX_HALVINGS = 20
M_MAX = 6

REACHED_T_END = "ReachedTEnd"
BLOWUP_DETECTED = "BlowupDetected"
STEP_FAILURE = "StepFailure"


@dataclass(frozen=True)
class FlowConfig:
    kind: str = POLYHARMONIC
    m: int = 0
    N: int = 64
    dt: float = 1e-4
    t_end: float = 1.0
    adapt: bool = False
    target_tol: float = 1e-6
    checkpoint_every: int = 100
    scheme: str = "etdrk2"
    # drops every nonlinear term and freezes L; used by tests and the convergence study
    linear_only: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidArgument(f"unknown flow kind {self.kind!r}")
        if int(self.m) != self.m or not 0 <= self.m <= M_MAX:
            raise InvalidArgument(f"m must be an integer in [0, {M_MAX}]")
        spectral._check_resolution(self.N)
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise InvalidArgument("dt must be positive")
        if self.checkpoint_every < 1:
            raise InvalidArgument("checkpoint_every must be >= 1")
        if self.scheme not in SCHEMES:
            raise InvalidArgument(f"unknown scheme {self.scheme!r}")
        if self.target_tol <= 0:
            raise InvalidArgument("target_tol must be positive")

    def replace(self, **changes) -> "FlowConfig":
        return dataclasses.replace(self, **changes)

    @property
    def order(self) -> int:
        """Spatial order of the flow, 2m + 4."""
        return 2 * self.m + 4


@dataclass
class Trajectory:
    states: list = field(default_factory=list)
    records: list = field(default_factory=list)
    termination: str = REACHED_T_END

    def __len__(self):
        return len(self.states)

    @property
    def final(self) -> IntrinsicState:
        return self.states[-1]


# -- pseudospectral kernels -----------------------------------------------------

@lru_cache(maxsize=None)
def _wavenumbers(N: int) -> np.ndarray:
    k = np.arange(N) * np.pi
    k.flags.writeable = False
    return k


def _deriv_coeffs(a: np.ndarray, order: int, L: float):
    """Wavenumber-indexed coefficients and parity of d^order/ds^order of a cosine series."""
    q = _wavenumbers(a.size) / L
    if order == 0:
        return a, COSINE
    c = a * q**order
    if order % 2 == 0:
        return (-1) ** (order // 2) * c, COSINE
    c = (-1) ** ((order + 1) // 2) * c
    c[0] = 0.0
    return c, SINE


class _Grid:
    """Periodic padded grid shared by all products of one right-hand side."""

    def __init__(self, N: int):
        self.N = N
        self.M = spectral.padded_size(N, 3)

    def values(self, coeffs, parity):
        return spectral.periodic_values(coeffs, parity, self.M)

    def project(self, samples, parity=COSINE):
        return spectral.project(samples, self.M, self.N, parity)


def _speed_coeffs(a: np.ndarray, L: float, kind: str, m: int, grid: _Grid | None = None,
                  linear_only: bool = False):
    """Cosine coefficients of the normal speed and the parity residual."""
    q = _wavenumbers(a.size) / L
    F = q ** (2 * m + 2) * a
    if kind == POLYHARMONIC or linear_only or not np.any(a):
        return F, 0.0
    grid = grid or _Grid(a.size)
    d = [grid.values(*_deriv_coeffs(a, j, L)) for j in range(2 * m + 1)]
    k = d[0]
    nl = -0.5 * k * d[m] ** 2
    for j in range(1, m + 1):
        nl -= (-1) ** j * k * d[m + j] * d[m - j]
    proj, residual = grid.project(nl, COSINE)
    return F + proj, residual


def _check_parity(residual: float) -> None:
    if residual > PARITY_TOL:
        raise ParityViolation(f"odd-symmetric residual {residual:.3g} exceeds {PARITY_TOL}")


def speed(state: IntrinsicState, config: FlowConfig) -> CosineField:
    """Normal speed F of the configured flow as a cosine field."""
    F, residual = _speed_coeffs(np.array(state.k.coeffs), state.L, config.kind, config.m,
                                linear_only=config.linear_only)
    _check_parity(residual)
    return CosineField(F)


def speed_with_residual(state: IntrinsicState, config: FlowConfig):
    F, residual = _speed_coeffs(np.array(state.k.coeffs), state.L, config.kind, config.m,
                                linear_only=config.linear_only)
    return CosineField(F), residual


def gradient_speed(state: IntrinsicState, m: int) -> CosineField:
    """Negative L2 gradient of 1/2 int k_{s^m}^2 ds, whatever the flow kind."""
    F, residual = _speed_coeffs(np.array(state.k.coeffs), state.L, GRADIENT, m)
    _check_parity(residual)
    return CosineField(F)


def _rhs(a: np.ndarray, L: float, cfg: FlowConfig):
    """(dk/dt coefficients, dL/dt, d anchor_y/dt, parity residual)."""
    q = _wavenumbers(a.size) / L
    if cfg.linear_only:
        F = q ** (2 * cfg.m + 2) * a
        return -q**2 * F, 0.0, ANCHOR_SIGN * float(F.sum()), 0.0
    if not np.any(a):
        return np.zeros_like(a), 0.0, 0.0, 0.0
    grid = _Grid(a.size)
    F, res_F = _speed_coeffs(a, L, cfg.kind, cfg.m, grid)
    k = grid.values(a, COSINE)
    Fg = grid.values(F, COSINE)
    kF, res_kF = grid.project(k * Fg, COSINE)
    dL = -L * kF[0]
    n = _wavenumbers(a.size)
    psi = np.zeros_like(a)
    psi[1:] = L * kF[1:] / n[1:]
    ks = grid.values(*_deriv_coeffs(a, 1, L))
    nl, res_nl = grid.project(k * k * Fg + grid.values(psi, SINE) * ks, COSINE)
    dk = -q**2 * F + nl
    return dk, float(dL), ANCHOR_SIGN * float(F.sum()), max(res_F, res_kF, res_nl)


def rhs(state: IntrinsicState, config: FlowConfig):
    """(dk/dt at fixed sigma, dL/dt, d anchor_y/dt) for the configured flow."""
    dk, dL, dy, residual = _rhs(np.array(state.k.coeffs), state.L, config)
    _check_parity(residual)
    return CosineField(dk), dL, dy


# -- time stepping ----------------------------------------------------------------

def _phi1(z: np.ndarray) -> np.ndarray:
    safe = np.where(z == 0, 1.0, z)
    return np.where(z == 0, 1.0, np.expm1(safe) / safe)


_PHI2_TAYLOR = [1.0 / math.factorial(j + 2) for j in range(12)][::-1]


def _phi2(z: np.ndarray) -> np.ndarray:
    small = np.abs(z) < 0.1
    acc = np.zeros_like(z)
    for c in _PHI2_TAYLOR:
        acc = acc * z + c
    safe = np.where(small, 1.0, z)
    return np.where(small, acc, (np.expm1(safe) - safe) / safe**2)


def linear_symbol(N: int, L: float, m: int) -> np.ndarray:
    return -(_wavenumbers(N) / L) ** (2 * m + 4)


@lru_cache(maxsize=64)
def _etd_coeffs(N: int, L: float, m: int, h: float):
    lam = linear_symbol(N, L, m)
    z = h * lam
    with np.errstate(over="ignore", invalid="ignore"):
        out = (lam, z, np.exp(z), _phi1(z), _phi2(z))
    for arr in out:
        arr.flags.writeable = False
    return out


def _advance(a, L, y, h, cfg):
    lam, z, E, p1, p2 = _etd_coeffs(a.size, L, cfg.m, h)
    dk0, dL0, dy0, _ = _rhs(a, L, cfg)
    N0 = dk0 - lam * a
    if cfg.scheme == "imex_euler":
        return (a + h * N0) / (1 - z), L + h * dL0, y + h * dy0
    a1 = E * a + h * p1 * N0
    L1 = L + h * dL0
    y1 = y + h * dy0
    if cfg.scheme == "etd1":
        return a1, L1, y1
    if not (np.all(np.isfinite(a1)) and L1 > 0):
        return a1, L1, y1
    dk1, dL1, dy1, _ = _rhs(a1, L1, cfg)
    N1 = dk1 - lam * a1
    a2 = a1 + h * p2 * (N1 - N0)
    return a2, L + 0.5 * h * (dL0 + dL1), y + 0.5 * h * (dy0 + dy1)


def _finite(a, L, y) -> bool:
    return bool(np.all(np.isfinite(a)) and math.isfinite(L) and L > 0 and math.isfinite(y))


def step(state: IntrinsicState, config: FlowConfig, dt: float | None = None) -> IntrinsicState:
    """One semi-implicit step of size ``dt`` (default ``config.dt``)."""
    h = config.dt if dt is None else dt
    with np.errstate(over="ignore", invalid="ignore"):
        a, L, y = _advance(np.array(state.k.coeffs), state.L, state.anchor_y, h, config)
    if not _finite(a, L, y):
        raise StepFailure(f"non-finite state after step at t={state.t}")
    return state.replace(k=CosineField(a), L=float(L), anchor_y=float(y), t=state.t + h)


def _l2_k(state: IntrinsicState) -> float:
    return spectral.l2_inner(state.k, state.k, state.L)


def _step_defect(full: IntrinsicState, halves: IntrinsicState) -> float:
    diff = np.linalg.norm(full.k.coeffs - halves.k.coeffs)
    scale = max(np.linalg.norm(halves.k.coeffs), 1e-300)
    return float(max(diff / scale, abs(full.L - halves.L) / halves.L))


def evolve(state: IntrinsicState, config: FlowConfig,
           sink: Optional[Callable] = None, start_step: int = 0) -> Trajectory:
    """Step from ``state.t`` to ``config.t_end``, recording every checkpoint interval.

    ``sink(state, record, step_index)`` is called for every record.  The run
    stops early with ``BlowupDetected`` once int k^2 ds exceeds 1e6 times its
    initial value, and with ``StepFailure`` after 20 consecutive step halvings.
    """
    from .diagnostics import record as make_record

    if state.N != config.N:
        raise InvalidArgument(f"state has {state.N} modes, config expects {config.N}")
    traj = Trajectory()

    def emit(s, prev, idx):
        rec = make_record(s, config, prev)
        traj.states.append(s)
        traj.records.append(rec)
        if sink is not None:
            sink(s, rec, idx)
        return rec

    prev = emit(state, None, start_step)
    l2_initial = _l2_k(state)
    h = config.dt
    idx = start_step
    current = state
    # fixed steps sit on the grid t_origin + idx * dt, so a resumed run repeats
    # the arithmetic of an uninterrupted one exactly
    t_origin = state.t - start_step * config.dt
    on_grid = not config.adapt
    while current.t < config.t_end:
        remaining = config.t_end - current.t
        grid_next = t_origin + (idx + 1) * config.dt
        if on_grid and grid_next <= config.t_end + 1e-9 * config.dt:
            h_eff = config.dt
        else:
            h_eff = remaining if h >= remaining * (1 - 1e-9) else h
        halvings = 0
        while True:
            try:
                trial = step(current, config, h_eff)
                if config.adapt:
                    half = step(step(current, config, 0.5 * h_eff), config, 0.5 * h_eff)
                    defect = _step_defect(trial, half)
                    if defect > config.target_tol:
                        raise StepFailure(f"step defect {defect:.3g}")
                    trial = half
                    if defect < config.target_tol / 100:
                        h = min(2 * h, config.dt)
                break
            except StepFailure:
                halvings += 1
                if halvings > MAX_HALVINGS:
                    traj.termination = STEP_FAILURE
                    if traj.states[-1] is not current:
                        emit(current, prev, idx)
                    return traj
                h_eff *= 0.5
                h = min(h, h_eff)
                on_grid = False
        if on_grid and h_eff == config.dt and grid_next <= config.t_end + 1e-9 * config.dt:
            trial = trial.replace(t=grid_next)
        elif h_eff == remaining:
            trial = trial.replace(t=config.t_end)
        current = trial
        idx += 1
        blown = l2_initial > 0 and _l2_k(current) > BLOWUP_FACTOR * l2_initial
        if idx % config.checkpoint_every == 0 or current.t >= config.t_end or blown:
            prev = emit(current, prev, idx)
        if blown:
            traj.termination = BLOWUP_DETECTED
            return traj
    return traj


# -- first variation ------------------------------------------------------------

def _parametric_energy(state: IntrinsicState, phi: CosineField, eps: float, m: int) -> float:
    """1/2 int k_{s^m}^2 ds of the curve gamma + eps * phi * nu.

    The perturbed curve is kept in the sigma parametrisation and its
    curvature derivatives are taken with d/ds = |gamma_sigma|^-1 d/dsigma on
    a fine grid, spectrally; the energy is parametrisation invariant.
    """
    N = state.N
    P = 8 * N
    L = state.L
    pad = lambda c: np.concatenate((c, np.zeros(P - c.size)))
    a = pad(np.array(state.k.coeffs))

    def on_grid(coeffs, parity):
        return spectral.values(spectral.make_field(coeffs, parity), P)

    kk = on_grid(a, COSINE)
    ks = on_grid(*_deriv_coeffs(a, 1, L))
    c = pad(np.array(phi.coeffs))
    qs = _wavenumbers(P)
    ph = on_grid(c, COSINE)
    ph_s = on_grid(-qs * c, SINE)
    ph_ss = on_grid(-qs**2 * c, COSINE)
    # frame components of gamma_sigma and gamma_sigma_sigma in (T, nu)
    alpha = L * (1 - eps * kk * ph)
    beta = eps * ph_s
    alpha_s = -L * eps * (L * ks * ph + kk * ph_s)
    beta_s = eps * ph_ss
    g = np.hypot(alpha, beta)
    if not (np.all(np.isfinite(g)) and g.min() > 1e-8 * L):
        raise InvalidPerturbation("perturbed curve is not regular")
    cross = alpha * (alpha * L * kk + beta_s) - beta * (alpha_s - beta * L * kk)
    kt = cross / g**3
    if not np.all(np.isfinite(kt)):
        raise InvalidPerturbation("perturbed curvature is not finite")
    field_ = spectral.transform(kt)
    for _ in range(m):
        # one arclength derivative: (1/g) d/dsigma, spectrally on the fine grid
        full = field_.full()
        if field_.parity == COSINE:
            d = spectral.make_field(-qs[: full.size] * full, SINE)
        else:
            d = spectral.make_field(qs[: full.size] * full, COSINE)
        vals = spectral.values(d) / g
        field_ = spectral.transform(vals) if d.parity == COSINE else spectral.sine_transform(vals)
    f = spectral.values(field_)
    integrand = spectral.transform(f**2 * g)
    return float(0.5 * integrand.coeffs[0])


def energy(state: IntrinsicState, m: int) -> float:
    """E = 1/2 int k_{s^m}^2 ds."""
    if m == 0:
        f = state.k
    else:
        f = spectral.deriv(state.k, m, state.L)
    return 0.5 * spectral.l2_inner(f, f, state.L)


def first_variation_check(state: IntrinsicState, config: FlowConfig, testfield: CosineField,
                          eps: float, c: float = DISSIPATION_CONSTANT) -> float:
    """Defect of (E[gamma + eps phi nu] - E[gamma]) / eps against -c <F, phi>.

    F is the gradient-flow speed for the configured m, whichever flow kind
    the config names.
    """
    if testfield.N != state.N:
        raise InvalidArgument("test field resolution differs from the state")
    e0 = _parametric_energy(state, testfield, 0.0, config.m)
    e1 = _parametric_energy(state, testfield, eps, config.m)
    F = gradient_speed(state, config.m)
    return abs((e1 - e0) / eps + c * spectral.l2_inner(F, testfield, state.L))


def variation_constant(state: IntrinsicState, m: int, testfield: CosineField,
                       eps: float = 1e-4) -> float:
    """Central-difference estimate of c in dE/deps = -c <F, phi>."""
    ep = _parametric_energy(state, testfield, eps, m)
    em = _parametric_energy(state, testfield, -eps, m)
    F = gradient_speed(state, m)
    return -(ep - em) / (2 * eps) / spectral.l2_inner(F, testfield, state.L)
