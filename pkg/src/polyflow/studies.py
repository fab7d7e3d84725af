"""Run orchestration behind the command line: simulation, checks, studies, sweeps."""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import spectral
from .config import RunConfig
from .diagnostics import DiagnosticsRecord, fit_decay_rate, psw_check
from .exceptions import ConfigError, InvalidSeries, PolyflowError
from .flow import REACHED_T_END, FlowConfig, evolve, first_variation_check, variation_constant
from .geometry import IntrinsicState, cosine_state, from_points, reconstruct, state_from_coeffs
from .io import CsvWriter, read_checkpoint, read_points, read_table, truncate_series, write_checkpoint, write_table
from .parity import check_paper_claims, cross_check
from .spectral import CosineField, SineField

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_BLOWUP = 2

SERIES_COLUMNS = ["step"] + DiagnosticsRecord.columns()
SNAPSHOT_COLUMNS = ["s", "sigma", "x", "y", "theta", "k"]


@dataclass
class Report:
    ok: bool
    lines: list = field(default_factory=list)

    def add(self, line: str) -> None:
        self.lines.append(line)

    @property
    def text(self) -> str:
        return "\n".join(self.lines) + "\n"


# -- simulate ------------------------------------------------------------------------

def initial_state(cfg: RunConfig) -> IntrinsicState:
    if cfg.profile == "file":
        state, _ = from_points(read_points(cfg.path), cfg.N)
        return state
    if cfg.mode < 1 or cfg.mode >= cfg.N:
        raise ConfigError("initial.mode must lie in [1, N)")
    return cosine_state(cfg.amplitude, cfg.length, cfg.N, cfg.mode, cfg.anchor_y)


def write_snapshot(path: str, state: IntrinsicState, samples: int) -> None:
    curve, theta = reconstruct(state, samples)
    sigma = np.linspace(0.0, 1.0, samples)
    k = spectral.evaluate(state.k, sigma)
    write_table(path, SNAPSHOT_COLUMNS,
                np.column_stack([sigma * state.L, sigma, curve.x, curve.y, theta, k]))


def _fit_line(records, attr):
    series = [(r.t, getattr(r, attr)) for r in records]
    try:
        rate, r2 = fit_decay_rate(series, 0.5)
    except InvalidSeries:
        return "n/a"
    return f"rate {rate:.6e} r2 {r2:.9f}"


def summarise(cfg: RunConfig, records, termination: str, steps: int) -> str:
    last = records[-1]
    lines = [f"termination {termination}",
             f"steps {steps}",
             f"t_final {last.t:.16e}",
             f"L_final {last.L:.16e}",
             f"linearized_rate {2 * (math.pi / last.L) ** (2 * cfg.m + 4):.6e}"]
    for attr in ("l2_k", "energy", "l2_ksm1"):
        lines.append(f"decay_{attr} {_fit_line(records, attr)}")
    omega0 = records[0].omega
    lines.append(f"winding_drift {max(abs(r.omega - omega0) for r in records):.3e}")
    for attr in ("x_defect", "theta_defect", "sine_residual"):
        lines.append(f"final_{attr} {getattr(last, attr):.3e}")
    rel_l = [r.dLdt_defect / abs(r.length_rate) for r in records[1:] if r.length_rate != 0]
    rel_e = [r.dEdt_defect / r.dissipation for r in records[1:] if r.dissipation > 0]
    lines.append(f"max_rel_dLdt_defect {max(rel_l) if rel_l else 0.0:.3e}")
    lines.append(f"max_rel_dEdt_defect {max(rel_e) if rel_e else 0.0:.3e}")
    return "\n".join(lines) + "\n"


def run_simulate(cfg: RunConfig, resume: str | None = None) -> tuple[int, str]:
    """Run one trajectory into ``cfg.out_dir``; returns (exit code, summary text)."""
    cfg.validate()
    fc = cfg.flow_config()
    if resume:
        state, kind, m = read_checkpoint(resume)
        if (kind, m, state.N) != (cfg.kind, cfg.m, cfg.N):
            raise ConfigError(f"checkpoint is for {kind} m={m} N={state.N}, config says "
                              f"{cfg.kind} m={cfg.m} N={cfg.N}")
        start = int(round(state.t / cfg.dt))
    else:
        state, start = initial_state(cfg), 0
    os.makedirs(cfg.out_dir, exist_ok=True)
    series_path = os.path.join(cfg.out_dir, "series.csv")
    append = bool(resume) and os.path.exists(series_path)
    if append:
        truncate_series(series_path, start)

    writer = CsvWriter(series_path, SERIES_COLUMNS, append=append)

    def sink(s, rec, idx):
        if not (resume and idx == start):
            writer.row([idx] + rec.as_row())
        if idx % cfg.snapshot_every == 0:
            n = idx // cfg.snapshot_every
            write_snapshot(os.path.join(cfg.out_dir, f"snapshot_{n:04d}.csv"), s,
                           cfg.snapshot_samples)
            write_checkpoint(os.path.join(cfg.out_dir, f"checkpoint_{n:04d}.txt"), s, cfg.kind, cfg.m)

    try:
        traj = evolve(state, fc, sink=sink, start_step=start)
    finally:
        writer.close()
    final = traj.final
    write_checkpoint(os.path.join(cfg.out_dir, "checkpoint_final.txt"), final, cfg.kind, cfg.m)
    write_snapshot(os.path.join(cfg.out_dir, "snapshot_final.csv"), final, cfg.snapshot_samples)

    _, rows = read_table(series_path)
    records = [DiagnosticsRecord(*r[1:]) for r in rows]
    steps = rows[-1][0] if rows else start
    summary = summarise(cfg, records, traj.termination, steps)
    with open(os.path.join(cfg.out_dir, "summary.txt"), "w") as fh:
        fh.write(summary)
    return (EXIT_OK if traj.termination == REACHED_T_END else EXIT_BLOWUP), summary


# -- checks --------------------------------------------------------------------------

def parity_report(trials: int = 100, seed: int = 0) -> Report:
    results = check_paper_claims(raise_on_failure=False)
    rep = Report(ok=all(r.passed for r in results))
    for r in results:
        rep.add(f"{'PASS' if r.passed else 'FAIL'} {r.name} n={r.n}")
    bad = cross_check(5, 8, trials, seed)
    rep.add(f"{'PASS' if not bad else 'FAIL'} symbolic/numeric agreement "
            f"(<=5 factors, n<=8, {trials} trials): {len(bad)} disagreements")
    for b in bad:
        rep.add(f"  disagreement: ({b[0]}) n={b[1]} symbolic={b[2]} numeric={b[3]}")
    rep.ok = rep.ok and not bad
    return rep


def random_cosine(rng, N: int = 16, decay: float = 1.0) -> CosineField:
    n = np.arange(N)
    return CosineField(rng.standard_normal(N) / (1 + n) ** decay)


def random_sine(rng, N: int = 16, decay: float = 1.0) -> SineField:
    n = np.arange(1, N)
    return SineField(rng.standard_normal(N - 1) / (1 + n) ** decay)


def psw_report(trials: int = 1000, seed: int = 0) -> Report:
    rng = np.random.default_rng(seed)
    rep = Report(ok=True)
    worst = {}
    for variant, make in (("mean-zero", random_cosine), ("dirichlet", random_sine)):
        fails = 0
        ratios = [0.0, 0.0]
        for _ in range(trials):
            L = float(rng.uniform(0.2, 10.0))
            f = make(rng, int(rng.choice([8, 16, 32])), float(rng.uniform(0.0, 3.0)))
            checks = psw_check(f, L, variant)
            fails += sum(not c.holds for c in checks)
            ratios = [max(r, c.ratio) for r, c in zip(ratios, checks)]
        worst[variant] = ratios
        rep.ok &= fails == 0
        rep.add(f"{'PASS' if fails == 0 else 'FAIL'} {variant}: {trials} fields, {fails} violations, "
                f"max ratios L2 {ratios[0]:.12f} sup {ratios[1]:.12f}")
    for variant, f in (("mean-zero", CosineField.mode(16, 1)),
                       ("dirichlet", SineField(np.eye(15)[0]))):
        ratio = psw_check(f, 3.0, variant)[0].ratio
        sharp = abs(ratio - 1) <= 1e-10
        rep.ok &= sharp
        rep.add(f"{'PASS' if sharp else 'FAIL'} {variant} eigenfunction L2 ratio {ratio:.15f}")
    return rep


def random_small_state(rng, N: int = 32, amplitude: float = 0.3) -> IntrinsicState:
    a = np.zeros(N)
    n = np.arange(1, 7)
    a[1:7] = amplitude * rng.standard_normal(6) / n**2
    return state_from_coeffs(a, float(rng.uniform(1.5, 3.0)))


EPSILONS = (1e-3, 1e-4, 1e-5)


def richardson_slope(eps, defects) -> float:
    return float(np.polyfit(np.log(eps), np.log(defects), 1)[0])


def variation_report(m: int = 1, n_states: int = 5, seed: int = 0, N: int = 32) -> Report:
    rng = np.random.default_rng(seed)
    cfg = FlowConfig(kind="gradient", m=m, N=N)
    rep = Report(ok=True)
    for i in range(n_states):
        state = random_small_state(rng, N)
        for mode in (1, 2):
            phi = CosineField.mode(N, mode)
            defects = [first_variation_check(state, cfg, phi, e) for e in EPSILONS]
            slope = richardson_slope(EPSILONS, defects)
            c = variation_constant(state, m, phi)
            ok = abs(slope - 1) <= 0.2
            rep.ok &= ok
            rep.add(f"{'PASS' if ok else 'FAIL'} state {i} phi=cos({mode} pi sigma) m={m}: "
                    f"defects {' '.join(f'{d:.3e}' for d in defects)} slope {slope:.4f} c {c:.8f}")
    return rep


# -- convergence study ----------------------------------------------------------------

CONV_BETA = 0.5
CONV_L = 2.0


def analytic_curvature(sigma, beta: float = CONV_BETA):
    """Zero-mean analytic test field; its cosine coefficients decay like exp(-beta n)."""
    return 1.0 / (np.cosh(beta) - np.cos(np.pi * sigma)) - 1.0 / np.sinh(beta)


def _exact_coeffs(n_modes: int, beta: float = CONV_BETA) -> np.ndarray:
    # 1/(cosh b - cos x) = (1/sinh b)(1 + 2 sum e^{-bn} cos nx)
    n = np.arange(n_modes)
    a = 2 * np.exp(-beta * n) / np.sinh(beta)
    a[0] = 0.0
    return a


def linear_exact(sigma, t: float, m: int, L: float = CONV_L, n_modes: int = 2048):
    a = _exact_coeffs(n_modes) * np.exp(-(np.arange(n_modes) * np.pi / L) ** (2 * m + 4) * t)
    return np.cos(np.pi * np.outer(sigma, np.arange(n_modes))) @ a


def _linear_run(N: int, m: int, dt: float, t_end: float, scheme: str) -> IntrinsicState:
    k0 = spectral.transform(analytic_curvature(spectral.grid(N)))
    state = IntrinsicState(L=CONV_L, k=k0, d0=1.0)
    cfg = FlowConfig(m=m, N=N, dt=dt, t_end=t_end, scheme=scheme, linear_only=True,
                     checkpoint_every=10**9)
    return evolve(state, cfg).final


def observed_orders(errors) -> list[float]:
    return [math.log2(e0 / e1) if e1 > 0 and e0 > 0 else math.inf
            for e0, e1 in zip(errors, errors[1:])]


def convergence_report(m: int = 0) -> Report:
    """Spatial and temporal error study on the linear problem (nonlinear terms off, L frozen).

    The N-study uses the exact integrating-factor step so the only error is
    spectral; the dt-study uses first-order IMEX Euler at fixed N.  A final
    block reports ETDRK2 on the full nonlinear problem against a fine-step
    reference for information.
    """
    rep = Report(ok=True)
    scale = (CONV_L / math.pi) ** (2 * m + 4)
    sig = np.linspace(0.0, 1.0, 1001)

    t_space = 1e-6 * scale
    rep.add(f"spatial study (etd1, t = {t_space:.3e})")
    n_errors = {}
    for N in (8, 16, 32, 64, 128):
        final = _linear_run(N, m, t_space / 4, t_space, "etd1")
        err = float(np.max(np.abs(spectral.evaluate(final.k, sig) - linear_exact(sig, t_space, m))))
        n_errors[N] = err
        rep.add(f"  N={N:4d} error {err:.3e}")
    ok = n_errors[64] < 1e-10
    rep.ok &= ok
    rep.add(f"{'PASS' if ok else 'FAIL'} spectral accuracy: error {n_errors[64]:.3e} at N=64 (< 1e-10)")

    t_time = 0.5 * scale
    N = 16
    exact = linear_exact(sig, t_time, m)
    # the N=16 truncation error is a floor for the time study, remove it exactly
    floor = spectral.evaluate(_linear_run(N, m, t_time, t_time, "etd1").k, sig) - exact
    rep.add(f"temporal study (imex_euler, N={N}, t = {t_time:.3e})")
    errors = []
    dts = [t_time / 2**j for j in range(3, 9)]
    for dt in dts:
        final = _linear_run(N, m, dt, t_time, "imex_euler")
        errors.append(float(np.max(np.abs(spectral.evaluate(final.k, sig) - exact - floor))))
        rep.add(f"  dt={dt:.3e} error {errors[-1]:.3e}")
    orders = observed_orders(errors)
    rep.add("  observed orders " + " ".join(f"{p:.3f}" for p in orders))
    ok = min(orders) >= 1.0
    rep.ok &= ok
    rep.add(f"{'PASS' if ok else 'FAIL'} temporal order: {orders[-1]:.3f} (>= 1)")

    rep.add("nonlinear ETDRK2 against a fine-step reference (information only)")
    state = cosine_state(0.5, CONV_L, 32)
    T = 0.1 * scale
    cfg = FlowConfig(kind="gradient", m=m, N=32, dt=T / 2048, t_end=T, checkpoint_every=10**9)
    ref = evolve(state, cfg).final
    nl_errors = []
    for j in range(3, 7):
        out = evolve(state, cfg.replace(dt=T / 2**j)).final
        nl_errors.append(float(np.max(np.abs(out.k.coeffs - ref.k.coeffs))))
        rep.add(f"  dt=T/{2**j:<4d} error {nl_errors[-1]:.3e}")
    rep.add("  observed orders " + " ".join(f"{p:.3f}" for p in observed_orders(nl_errors)))
    return rep


# -- sweep ---------------------------------------------------------------------------

def _sweep_one(args):
    cfg, amplitude = args
    out = os.path.join(cfg.out_dir, f"amp_{amplitude:.6g}")
    try:
        code, _ = run_simulate(cfg.replace(amplitude=amplitude, out_dir=out))
    except (PolyflowError, ValueError) as exc:
        return amplitude, "invalid", math.nan, str(exc)
    _, rows = read_table(os.path.join(out, "series.csv"))
    l2 = [r[SERIES_COLUMNS.index("l2_k")] for r in rows]
    if code == EXIT_BLOWUP:
        verdict = "blown-up"
    elif l2[0] == 0 or l2[-1] < 0.5 * l2[0]:
        verdict = "converged"
    else:
        verdict = "undetermined"
    ratio = l2[-1] / l2[0] if l2[0] > 0 else 0.0
    return amplitude, verdict, ratio, ""


def run_sweep(cfg: RunConfig) -> Report:
    """Amplitude grid: which initial amplitudes flatten out and which blow up."""
    cfg.validate()
    os.makedirs(cfg.out_dir, exist_ok=True)
    jobs = [(cfg, a) for a in cfg.sweep_amplitudes]
    if cfg.sweep_workers > 1:
        with ProcessPoolExecutor(cfg.sweep_workers) as pool:
            results = list(pool.map(_sweep_one, jobs))
    else:
        results = [_sweep_one(j) for j in jobs]
    rep = Report(ok=True)
    with CsvWriter(os.path.join(cfg.out_dir, "sweep.csv"),
                   ["amplitude", "verdict", "l2_k_ratio"]) as w:
        for amp, verdict, ratio, msg in results:
            w.row([amp, verdict, ratio])
            rep.add(f"amplitude {amp:.6g}: {verdict} (final/initial l2_k {ratio:.3e}) {msg}".rstrip())
    return rep
