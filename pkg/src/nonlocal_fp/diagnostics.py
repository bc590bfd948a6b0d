"""Recorded time series and the property checks evaluated on them."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .errors import DegenerateMarginal, EmptyHistory, RunTooShort, SupersolutionNotEnabled

# order window for refinement-based checks
ORDER_WINDOW = (0.8, 2.2)
EXACT_TOL = 1e-12


@dataclass
class RunHistory:
    dt: float
    times: list[float] = field(default_factory=list)
    records: list[dict[str, float]] = field(default_factory=list)
    snapshots: list[tuple[int, float, np.ndarray]] = field(default_factory=list)
    supersolution_enabled: bool = False
    error: tuple[str, str, float] | None = None
    meta: dict[str, Any] = field(default_factory=dict)

    def append(self, rec: dict[str, float]) -> None:
        t = rec["t"]
        if self.times and not t > self.times[-1]:
            raise ValueError(f"time {t} does not increase past {self.times[-1]}")
        self.times.append(t)
        self.records.append(rec)

    def column(self, name: str) -> np.ndarray:
        return np.array([r[name] for r in self.records], dtype=float)

    def __len__(self) -> int:
        return len(self.records)

    @property
    def final_time(self) -> float:
        return self.times[-1] if self.times else 0.0


@dataclass
class PropertyReport:
    name: str
    status: str  # pass | fail | converging
    measured: float
    threshold: float
    t_worst: float = float("nan")
    details: str = ""

    @property
    def ok(self) -> bool:
        return self.status in ("pass", "converging")

    def csv_row(self) -> str:
        return f"{self.name},{self.status},{self.measured!r},{self.threshold!r},{self.t_worst!r}"


REPORT_HEADER = "name,status,measured,threshold,t_worst"


def _require(h: RunHistory) -> None:
    if not len(h):
        raise EmptyHistory("history has no records")


def _max_check(name: str, h: RunHistory, values: np.ndarray, threshold: float, details: str = "") -> PropertyReport:
    i = int(np.argmax(values))
    measured = float(values[i])
    status = "pass" if measured <= threshold else "fail"
    return PropertyReport(name, status, measured, threshold, h.times[i], details)


def check_mass(h: RunHistory, threshold: float = 1e-12) -> PropertyReport:
    _require(h)
    return _max_check("mass", h, np.abs(h.column("mass") - 1.0), threshold)


def check_positivity(h: RunHistory, threshold: float = -1e-8) -> PropertyReport:
    """Passes when min psi stays above ``threshold`` (a small negative undershoot)."""
    _require(h)
    m = h.column("min_psi")
    i = int(np.argmin(m))
    measured = float(m[i])
    # reported as a violation amount so that measured <= threshold means pass
    violation = -measured
    status = "pass" if violation <= -threshold else "fail"
    return PropertyReport("positivity", status, violation, -threshold, h.times[i],
                          f"min psi = {measured:.3e}")


def check_phi_bound(h: RunHistory, threshold: float = 1e-10) -> PropertyReport:
    _require(h)
    return _max_check("phi_bound", h, h.column("phi_linf") - h.column("d1V_linf"), threshold)


def check_F_bound(h: RunHistory, sigma_norm_col: str = "h_sigma_norm", rel: float = 1e-9,
                  floor: float = 1e-12) -> PropertyReport:
    """||F||_2 <= C(t) ||psi||_{H^sigma} (1 + rel) at every recorded time."""
    _require(h)
    if np.min(h.column("min_marginal")) < floor:
        raise DegenerateMarginal("min marginal below the domain floor")
    lhs = h.column("f_l2_norm")
    rhs = h.column("propol_C") * h.column(sigma_norm_col) * (1.0 + rel)
    return _max_check("F_bound", h, lhs - rhs, 0.0, "measured = max(||F|| - C ||psi||)")


def check_orbit_bounded(h: RunHistory, factor: float = 1.05) -> PropertyReport:
    """Norm over the second half of the run stays within ``factor`` of the first half."""
    _require(h)
    T = h.final_time
    if T < 1.0:
        raise RunTooShort(f"final time {T} < 1")
    t = np.asarray(h.times)
    norm = h.column("h_sigma_norm")
    pos = t[t > 0]
    t0 = pos[0] if pos.size else 0.0
    early = norm[(t >= t0) & (t <= T / 2)]
    late_mask = t >= T / 2
    late = norm[late_mask]
    ratio = float(late.max() / early.max())
    i = int(np.argmax(np.where(late_mask, norm, -np.inf)))
    status = "pass" if ratio <= factor else "fail"
    return PropertyReport("orbit_bounded", status, ratio, factor, h.times[i],
                          f"max late {late.max():.6g} / max early {early.max():.6g}")


def empirical_orders(errors: Sequence[float], ratio: float = 2.0) -> list[float]:
    """log_ratio(E(dt)/E(dt/ratio)) for successive refinement levels."""
    out = []
    for a, b in zip(errors[:-1], errors[1:]):
        if a > 0 and b > 0:
            out.append(math.log(a / b) / math.log(ratio))
        else:
            out.append(math.inf if b == 0 and a > 0 else math.nan)
    return out


def _as_list(h) -> list[RunHistory]:
    hs = [h] if isinstance(h, RunHistory) else list(h)
    if not hs:
        raise EmptyHistory("no histories given")
    for x in hs:
        _require(x)
    return sorted(hs, key=lambda x: -x.dt)


def _refinement_check(name: str, hs: list[RunHistory], column: str, window, exact_tol: float) -> PropertyReport:
    errors = []
    t_worst = []
    for x in hs:
        v = x.column(column)
        i = int(np.argmax(v))
        errors.append(float(v[i]))
        t_worst.append(x.times[i])
    dts = [x.dt for x in hs]
    detail = "; ".join(f"dt={d:.3g}: E={e:.3e}" for d, e in zip(dts, errors))
    if max(errors) <= exact_tol:
        # identity reproduced to rounding at every level, no order to measure
        return PropertyReport(name, "pass", max(errors), exact_tol, t_worst[int(np.argmax(errors))],
                              "exact at every level; " + detail)
    if len(hs) < 2:
        return PropertyReport(name, "fail", errors[0], exact_tol, t_worst[0], detail)
    ratios = [a / b for a, b in zip(dts[:-1], dts[1:])]
    orders = [empirical_orders([a, b], r)[0] for a, b, r in zip(errors[:-1], errors[1:], ratios)]
    lo, hi = window
    worst = min(orders)
    ok = all(lo <= o <= hi for o in orders)
    detail += "; orders " + ", ".join(f"{o:.3f}" for o in orders)
    return PropertyReport(name, "converging" if ok else "fail", worst, lo, t_worst[-1], detail)


def check_marginal_heat(h, refinement=None) -> PropertyReport:
    """Marginal of the solution vs the exact 1-D heat flow of the initial marginal.

    ``h`` is one history or several runs at different dt. A single history
    must match to ``EXACT_TOL``; several histories pass if they all do, and
    otherwise must converge with an order inside ``ORDER_WINDOW``.
    """
    return _refinement_check("marginal_heat", _as_list(h), "marginal_heat_err", ORDER_WINDOW, EXACT_TOL)


def check_formulation_equivalence(h, refinement=None) -> PropertyReport:
    return _refinement_check("formulation_equivalence", _as_list(h), "formulation_err", ORDER_WINDOW, EXACT_TOL)


def check_supersolution(h, refinement=None, min_order: float = 0.8) -> PropertyReport:
    """Positive part of psi exp(beta V/2) - M, decreasing under refinement."""
    hs = _as_list(h)
    for x in hs:
        if not x.supersolution_enabled:
            raise SupersolutionNotEnabled("run was made without the supersolution co-stepper")
    for x in hs:
        if x.records[0]["super_violation"] != 0.0:
            v0 = x.records[0]["super_violation"]
            return PropertyReport("supersolution", "fail", v0, 0.0, x.times[0], "nonzero violation at t = 0")
    return _refinement_check("supersolution", hs, "super_violation", (min_order, math.inf), EXACT_TOL)


CHECKS = {
    "mass": check_mass,
    "positivity": check_positivity,
    "marginal_heat": check_marginal_heat,
    "phi_bound": check_phi_bound,
    "supersolution": check_supersolution,
    "F_bound": check_F_bound,
    "orbit_bounded": check_orbit_bounded,
    "formulation_equivalence": check_formulation_equivalence,
}

REFINEMENT_CHECKS = {"marginal_heat", "supersolution", "formulation_equivalence"}
