"""Time integration of the nonlocal Fokker-Planck equation

    d_t psi = beta^{-1} Lap psi + F(psi),
    F(psi) = div(grad V psi) - d_1(phi_psi psi),

with an exact-diffusion Lie splitting (``imex``) or a Picard iteration on the
Duhamel formula (``picard``), plus the 1-D supersolution co-stepper.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.fft as sfft

from .biasing import DEFAULT_FLOOR, BiasState, conditional_force, evolve_denominator, marginal
from .errors import InconsistentBias, NoContraction, NonFinite, SolverError
from .grid import TWO_PI, Grid, check_field, integrate
from .potential import PotentialSpec, eval_fields, sup_norms
from .semigroup import heat_multiplier, lp_norm, sobolev_norm

log = logging.getLogger(__name__)

MONITOR_SIGMA = 1.5


@dataclass(frozen=True)
class StepControl:
    dt: float
    scheme: str = "imex"
    picard_tol: float = 1e-10
    picard_max_iter: int = 50
    conservative_form: bool = True
    domain_floor: float = DEFAULT_FLOOR
    decoupled_denominator: bool = False
    dt_min: float = 1e-10

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if self.scheme not in ("imex", "picard"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if not self.picard_tol > 0:
            raise ValueError("picard_tol must be > 0")
        if self.picard_max_iter < 1:
            raise ValueError("picard_max_iter must be >= 1")


@dataclass
class SolverState:
    grid: Grid
    potential: PotentialSpec
    beta: float
    t: float
    psi: np.ndarray
    bias: BiasState
    marginal0: np.ndarray
    # decoupled denominator, advanced by the exact 1-D heat flow step by step
    tilde: np.ndarray
    super: np.ndarray | None = None
    iterations: int = 0
    picard_diffs: list[float] = field(default_factory=list)


# -- right-hand side -----------------------------------------------------------

def _expand_x1(grid: Grid, f1d: np.ndarray) -> np.ndarray:
    return f1d.reshape((-1,) + (1,) * (grid.n - 1))


def _check_bias(grid: Grid, psi: np.ndarray, pot: PotentialSpec, bias: BiasState) -> None:
    if bias.phi.shape != (grid.sizes[0],):
        raise InconsistentBias(f"phi has shape {bias.phi.shape}, expected ({grid.sizes[0]},)")
    if bias.numerator is not None:
        h_rest = float(np.prod(grid.spacing[1:]))
        num = h_rest * (eval_fields(pot, grid).d1V * psi).sum(axis=tuple(range(1, grid.n)))
        scale = max(1.0, float(np.max(np.abs(num))))
        if np.max(np.abs(num - bias.numerator)) > 1e-10 * scale:
            raise InconsistentBias("bias was not computed from this density")


def rhs_hat(grid: Grid, psi: np.ndarray, pot: PotentialSpec, bias: BiasState) -> np.ndarray:
    """Conservative F in real-FFT coefficients; the k = 0 entry is exactly 0."""
    f = eval_fields(pot, grid)
    phi = _expand_x1(grid, bias.phi)
    out = grid._derivative_multiplier(0, 1) * grid.rfft((f.d1V - phi) * psi)
    for i in range(1, grid.n):
        out = out + grid._derivative_multiplier(i, 1) * grid.rfft(f.grad[i] * psi)
    return out


def rhs_F(grid: Grid, psi: np.ndarray, pot: PotentialSpec, bias: BiasState,
          conservative: bool = True) -> np.ndarray:
    """F(psi) = grad V . grad psi + Lap V psi - d_1(phi psi).

    The conservative form takes spectral divergences of nodal fluxes, so its
    integral vanishes to rounding. The expanded form is evaluated nodally.
    """
    psi = check_field(grid, psi)
    _check_bias(grid, psi, pot, bias)
    if conservative:
        return grid.irfft(rhs_hat(grid, psi, pot, bias))
    f = eval_fields(pot, grid)
    psi_hat = grid.rfft(psi)
    adv = sum(f.grad[i] * grid.irfft(grid._derivative_multiplier(i, 1) * psi_hat) for i in range(grid.n))
    bias_flux = grid.irfft(grid._derivative_multiplier(0, 1) * grid.rfft(_expand_x1(grid, bias.phi) * psi))
    return adv + f.lap * psi - bias_flux


def _rhs_hat_ctl(grid, psi, pot, bias, ctl: StepControl) -> np.ndarray:
    if ctl.conservative_form:
        return rhs_hat(grid, psi, pot, bias)
    return grid.rfft(rhs_F(grid, psi, pot, bias, conservative=False))


# -- state construction ----------------------------------------------------------

def compute_bias(grid, psi, pot, ctl: StepControl, tilde: np.ndarray | None) -> BiasState:
    den = tilde if ctl.decoupled_denominator else None
    return conditional_force(grid, psi, pot, floor=ctl.domain_floor, denominator=den)


def supersolution_initial(grid: Grid, psi0: np.ndarray, pot: PotentialSpec, beta: float) -> np.ndarray:
    """Slice-wise sup of psi0 exp(beta V / 2)."""
    V = eval_fields(pot, grid).V
    return np.max(psi0 * np.exp(beta * V / 2.0), axis=tuple(range(1, grid.n)))


def make_state(grid: Grid, pot: PotentialSpec, beta: float, psi0: np.ndarray, ctl: StepControl,
               supersolution: bool = False, t0: float = 0.0) -> SolverState:
    psi0 = np.array(check_field(grid, psi0), dtype=float)
    m0 = marginal(grid, psi0)
    bias = compute_bias(grid, psi0, pot, ctl, m0)
    sup = supersolution_initial(grid, psi0, pot, beta) if supersolution else None
    return SolverState(grid=grid, potential=pot, beta=float(beta), t=t0, psi=psi0, bias=bias,
                       marginal0=m0, tilde=m0.copy(), super=sup)


# -- steppers ----------------------------------------------------------------------

def _ensure_finite(arr: np.ndarray, what: str, t: float) -> None:
    if not np.all(np.isfinite(arr)):
        raise NonFinite(f"non-finite values in {what} at t = {t:.6g}", t=t)


def step_imex(s: SolverState, ctl: StepControl) -> SolverState:
    """psi^{n+1} = heat(psi^n + dt F(psi^n), dt)."""
    g, dt = s.grid, ctl.dt
    t_new = s.t + dt
    with np.errstate(over="ignore", invalid="ignore"):
        new_hat = heat_multiplier(g, dt, s.beta) * (g.rfft(s.psi) + dt * _rhs_hat_ctl(g, s.psi, s.potential, s.bias, ctl))
        psi = g.irfft(new_hat)
    _ensure_finite(psi, "psi", t_new)
    tilde = evolve_denominator(s.tilde, dt, s.beta)
    try:
        bias = compute_bias(g, psi, s.potential, ctl, tilde)
    except SolverError as exc:
        exc.t = t_new
        raise
    return replace(s, t=t_new, psi=psi, bias=bias, tilde=tilde, iterations=1, picard_diffs=[])


class _NotContracting(Exception):
    pass


def _picard_window(s: SolverState, h: float, ctl: StepControl) -> SolverState:
    g = s.grid
    t_new = s.t + h
    base_hat = heat_multiplier(g, h, s.beta) * g.rfft(s.psi)
    half = heat_multiplier(g, h / 2.0, s.beta)
    tilde = evolve_denominator(s.tilde, h, s.beta)
    iterate = g.irfft(base_hat)
    diffs: list[float] = []
    for _ in range(ctl.picard_max_iter):
        try:
            bias = compute_bias(g, iterate, s.potential, ctl, tilde)
        except SolverError as exc:
            exc.t = t_new
            raise
        new = g.irfft(base_hat + h * half * _rhs_hat_ctl(g, iterate, s.potential, bias, ctl))
        if not np.all(np.isfinite(new)):
            raise _NotContracting
        d = float(np.max(np.abs(new - iterate)))
        diffs.append(d)
        iterate = new
        if d < ctl.picard_tol:
            break
        if len(diffs) > 1 and d >= diffs[-2]:
            raise _NotContracting
    else:
        raise _NotContracting
    bias = compute_bias(g, iterate, s.potential, ctl, tilde)
    return replace(s, t=t_new, psi=iterate, bias=bias, tilde=tilde, iterations=len(diffs), picard_diffs=diffs)


def _picard_adaptive(s: SolverState, h: float, ctl: StepControl) -> SolverState:
    try:
        return _picard_window(s, h, ctl)
    except _NotContracting:
        if h / 2.0 < ctl.dt_min:
            raise NoContraction(f"Picard iteration does not contract for dt >= {ctl.dt_min}", t=s.t) from None
        log.debug("Picard window %.3g at t=%.6g not contracting; halving", h, s.t)
        mid = _picard_adaptive(s, h / 2.0, ctl)
        end = _picard_adaptive(mid, h / 2.0, ctl)
        end.iterations += mid.iterations
        return end


def step_picard(s: SolverState, ctl: StepControl) -> SolverState:
    """Fixed-point iteration on the Duhamel formula over [t, t + dt].

    psi^{(m+1)} = heat(psi^n, dt) + dt heat(F(psi^{(m)}), dt/2), started from
    heat(psi^n, dt). The window is halved recursively when the iterates stop
    contracting.
    """
    out = _picard_adaptive(s, ctl.dt, ctl)
    _ensure_finite(out.psi, "psi", out.t)
    return out


def step_supersolution(s: SolverState, ctl: StepControl, delta: float) -> np.ndarray:
    """One IMEX step of d_t M = beta^{-1} d_11 M - delta M - d_1(phi M).

    phi is the bias of the current density.
    """
    if s.super is None:
        raise ValueError("state carries no supersolution")
    M, dt = s.super, ctl.dt
    N = M.shape[0]
    k = np.arange(N // 2 + 1, dtype=float)
    k[-1] = 0.0  # Nyquist of the odd derivative
    heat = np.exp(-dt / s.beta * (TWO_PI * np.arange(N // 2 + 1)) ** 2)
    # overflow is reported as NonFinite below
    with np.errstate(over="ignore", invalid="ignore"):
        flux_hat = sfft.rfft(s.bias.phi * M) * (TWO_PI * 1j * k)
        rhs_hat_1d = -delta * sfft.rfft(M) - flux_hat
        out = sfft.irfft(heat * (sfft.rfft(M) + dt * rhs_hat_1d), n=N)
    _ensure_finite(out, "supersolution", s.t + dt)
    return out


def advance(s: SolverState, ctl: StepControl, delta: float | None = None) -> SolverState:
    """Full step: density with the selected scheme, supersolution alongside."""
    new_super = step_supersolution(s, ctl, delta) if s.super is not None else None
    stepper = step_imex if ctl.scheme == "imex" else step_picard
    out = stepper(s, ctl)
    out.super = new_super
    return out


# -- initial data --------------------------------------------------------------

def normalize_initial(grid: Grid, values: np.ndarray) -> np.ndarray:
    """Clip to >= 0 and rescale to unit mass."""
    values = np.clip(np.asarray(values, dtype=float), 0.0, None)
    mass = integrate(grid, values)
    if not mass > 0:
        raise ValueError("initial density has zero mass")
    return values / mass


def initial_uniform(grid: Grid) -> np.ndarray:
    return np.ones(grid.shape)


def initial_cosine_perturbed(grid: Grid, a: float = 0.5) -> np.ndarray:
    """1 + a cos(2 pi x1) cos(2 pi x2), amplitude clipped to keep the field > 0."""
    if abs(a) >= 1.0:
        log.warning("cosine-perturbed amplitude %g clipped to 0.99", a)
        a = math.copysign(0.99, a)
    x = grid.coords
    return normalize_initial(grid, 1.0 + a * np.cos(TWO_PI * x[0]) * np.cos(TWO_PI * x[1]))


def initial_marginal_cosine(grid: Grid, a: float = 0.5) -> np.ndarray:
    """1 + a cos(2 pi x1), clipped at 0; a = 1 gives a marginal vanishing at x1 = 1/2."""
    x = grid.coords
    return normalize_initial(grid, np.broadcast_to(1.0 + a * np.cos(TWO_PI * x[0]), grid.shape))


def initial_gibbs(grid: Grid, pot: PotentialSpec, beta: float) -> np.ndarray:
    return normalize_initial(grid, np.exp(-beta * eval_fields(pot, grid).V))


# -- monitoring -----------------------------------------------------------------

SERIES_COLUMNS = (
    "t", "mass", "min_psi", "linf_psi", "h_sigma_norm", "l4_norm", "f_l2_norm",
    "propol_C", "super_violation", "marginal_heat_err", "formulation_err",
)


def propol_constant(grid: Grid, psi: np.ndarray, pot: PotentialSpec) -> float:
    """C(t) of the polynomial bound on F, from grid quantities."""
    norms = sup_norms(pot, grid)
    psibar = marginal(grid, psi)
    N = grid.sizes[0]
    dlog = sfft.irfft(_d1_multiplier_1d(N) * sfft.rfft(psibar), n=N) / psibar
    return (norms.c2 + norms.d1V * float(np.max(np.abs(psi))) / float(np.min(psibar))
            + norms.d1V * float(np.max(np.abs(dlog))))


def _d1_multiplier_1d(N: int) -> np.ndarray:
    k = np.arange(N // 2 + 1, dtype=float)
    k[-1] = 0.0
    return TWO_PI * 1j * k


def super_violation(grid: Grid, psi: np.ndarray, pot: PotentialSpec, beta: float, M: np.ndarray) -> float:
    V = eval_fields(pot, grid).V
    excess = psi * np.exp(beta * V / 2.0) - _expand_x1(grid, M)
    return float(max(0.0, np.max(excess)))


def record(s: SolverState, ctl: StepControl) -> dict[str, float]:
    """Scalar diagnostics of the current state."""
    g, psi = s.grid, s.psi
    F = rhs_F(g, psi, s.potential, s.bias, conservative=ctl.conservative_form)
    psibar = marginal(g, psi)
    exact_marginal = evolve_denominator(s.marginal0, s.t, s.beta)
    rec = {
        "t": float(s.t),
        "mass": integrate(g, psi),
        "min_psi": float(np.min(psi)),
        "linf_psi": float(np.max(np.abs(psi))),
        "h_sigma_norm": sobolev_norm(g, psi, MONITOR_SIGMA),
        "l4_norm": lp_norm(g, psi, 4),
        "f_l2_norm": lp_norm(g, F, 2),
        "propol_C": propol_constant(g, psi, s.potential),
        "super_violation": (super_violation(g, psi, s.potential, s.beta, s.super)
                            if s.super is not None else 0.0),
        "marginal_heat_err": float(np.max(np.abs(psibar - exact_marginal))),
        "formulation_err": float(np.max(np.abs(s.tilde - psibar))),
        # not written to series.csv
        "phi_linf": float(np.max(np.abs(s.bias.phi))),
        "d1V_linf": sup_norms(s.potential, g).d1V,
        "min_marginal": float(np.min(psibar)),
        "iterations": float(s.iterations),
    }
    return rec


# -- orchestration --------------------------------------------------------------

def build_initial(cfg, grid: Grid) -> np.ndarray:
    kind, a = cfg.initial.kind, cfg.initial.a
    if kind == "uniform":
        return initial_uniform(grid)
    if kind == "cosine-perturbed":
        return initial_cosine_perturbed(grid, 0.5 if a is None else a)
    if kind == "gibbs-like":
        return initial_gibbs(grid, cfg.potential, cfg.beta)
    if kind == "marginal-cosine":
        return initial_marginal_cosine(grid, 0.5 if a is None else a)
    raise ValueError(f"unknown initial kind {kind!r}")


def control_from_config(cfg, dt: float | None = None) -> StepControl:
    return StepControl(
        dt=cfg.dt if dt is None else dt, scheme=cfg.scheme, picard_tol=cfg.picard_tol,
        picard_max_iter=cfg.picard_max_iter, conservative_form=cfg.conservative_form,
        domain_floor=cfg.domain_floor, decoupled_denominator=cfg.decoupled_denominator,
    )


def step_count(t_final: float, dt: float) -> int:
    n = t_final / dt
    return max(0, int(round(n)) if abs(n - round(n)) < 1e-9 * max(1.0, n) else math.ceil(n))


def run(cfg, psi0: np.ndarray | None = None, dt: float | None = None):
    """Integrate from t = 0 to ``cfg.t_final`` and return the recorded history.

    Solver errors do not propagate: they end the run and are stored in
    ``history.error`` as ``(name, message, t)``.
    """
    from .diagnostics import RunHistory
    from .grid import make_grid
    from .potential import compute_delta

    grid = make_grid(cfg.dim, cfg.grid)
    ctl = control_from_config(cfg, dt)
    hist = RunHistory(dt=ctl.dt, supersolution_enabled=cfg.supersolution)
    psi0 = normalize_initial(grid, build_initial(cfg, grid) if psi0 is None else psi0)
    delta = compute_delta(cfg.potential, grid, cfg.beta, rtol=1e-6) if cfg.supersolution else None
    hist.meta["delta"] = delta
    try:
        s = make_state(grid, cfg.potential, cfg.beta, psi0, ctl, supersolution=cfg.supersolution)
    except SolverError as exc:
        hist.error = (type(exc).__name__, str(exc), 0.0)
        return hist
    nsteps = step_count(cfg.t_final, ctl.dt)
    hist.append(record(s, ctl))
    if cfg.snapshot_every:
        hist.snapshots.append((0, s.t, s.psi.copy()))
    for step in range(1, nsteps + 1):
        h = min(ctl.dt, cfg.t_final - s.t) if step == nsteps else ctl.dt
        step_ctl = ctl if h == ctl.dt or h <= 0 else replace(ctl, dt=h)
        try:
            s = advance(s, step_ctl, delta)
        except SolverError as exc:
            t_fail = exc.t if exc.t is not None else s.t
            hist.error = (type(exc).__name__, str(exc), float(t_fail))
            log.warning("run aborted at t=%.6g: %s", t_fail, exc)
            break
        if step % cfg.series_every == 0 or step == nsteps:
            hist.append(record(s, ctl))
        if cfg.snapshot_every and (step % cfg.snapshot_every == 0):
            hist.snapshots.append((step, s.t, s.psi.copy()))
    hist.meta["final_state"] = s
    return hist
