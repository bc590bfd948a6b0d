"""Line-oriented ``key = value`` run configuration."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, fields

from .errors import ConstraintViolation, MissingRequired, TypeMismatch, UnknownKey
from .potential import PotentialSpec, parse_potential

log = logging.getLogger(__name__)

INITIAL_KINDS = ("uniform", "cosine-perturbed", "gibbs-like", "marginal-cosine")
CHECK_NAMES = ("mass", "positivity", "marginal_heat", "phi_bound", "supersolution",
               "F_bound", "orbit_bounded", "formulation_equivalence")


@dataclass(frozen=True)
class InitialSpec:
    kind: str = "uniform"
    a: float | None = None

    def render(self) -> str:
        return self.kind if self.a is None else f"{self.kind} a={self.a!r}"


@dataclass(frozen=True)
class RunConfig:
    dim: int
    grid: tuple[int, ...]
    beta: float
    potential: PotentialSpec
    dt: float
    t_final: float
    initial: InitialSpec = InitialSpec()
    scheme: str = "imex"
    picard_tol: float = 1e-10
    picard_max_iter: int = 50
    conservative_form: bool = True
    domain_floor: float = 1e-12
    supersolution: bool = True
    decoupled_denominator: bool = False
    series_every: int = 1
    snapshot_every: int = 0
    output_dir: str = "out"
    checks: tuple[str, ...] = field(default=())


REQUIRED = ("dim", "grid", "beta", "potential", "dt", "t_final")


def _parse_bool(v: str) -> bool:
    low = v.lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ValueError(v)


def _parse_initial(v: str) -> InitialSpec:
    parts = v.split()
    kind = parts[0]
    if kind not in INITIAL_KINDS:
        raise ValueError(f"unknown initial kind {kind!r}")
    a = None
    for p in parts[1:]:
        k, _, val = p.partition("=")
        if k != "a":
            raise ValueError(f"unknown initial parameter {k!r}")
        a = float(val)
    return InitialSpec(kind, a)


def _parse_checks(v: str) -> tuple[str, ...]:
    names = tuple(x for x in v.replace(",", " ").split() if x)
    for n in names:
        if n not in CHECK_NAMES:
            raise ValueError(f"unknown check {n!r}")
    return names


_PARSERS = {
    "dim": int,
    "grid": lambda v: tuple(int(x) for x in v.split()),
    "beta": float,
    "potential": parse_potential,
    "dt": float,
    "t_final": float,
    "initial": _parse_initial,
    "scheme": str,
    "picard_tol": float,
    "picard_max_iter": int,
    "conservative_form": _parse_bool,
    "domain_floor": float,
    "supersolution": _parse_bool,
    "decoupled_denominator": _parse_bool,
    "series_every": int,
    "snapshot_every": int,
    "output_dir": str,
    "checks": _parse_checks,
}


def _validate(values: dict, lines: dict) -> None:
    def bad(key, msg):
        raise ConstraintViolation(f"{key}: {msg}", lines.get(key))

    if values["dim"] < 2:
        bad("dim", "the nonlocal force needs dim >= 2")
    if len(values["grid"]) != values["dim"]:
        bad("grid", f"expected {values['dim']} sizes")
    for s in values["grid"]:
        if s % 2 or s < 8:
            bad("grid", f"size {s} must be even and >= 8")
    if not values["beta"] > 0:
        bad("beta", "must be > 0")
    if not values["dt"] > 0:
        bad("dt", "must be > 0")
    if not values["t_final"] >= 0:
        bad("t_final", "must be >= 0")
    if values.get("scheme", "imex") not in ("imex", "picard"):
        bad("scheme", "must be imex or picard")
    if values.get("picard_tol", 1.0) <= 0:
        bad("picard_tol", "must be > 0")
    if values.get("picard_max_iter", 1) < 1:
        bad("picard_max_iter", "must be >= 1")
    if values.get("domain_floor", 0.0) < 0:
        bad("domain_floor", "must be >= 0")
    if values.get("series_every", 1) < 1:
        bad("series_every", "must be >= 1")
    if values.get("snapshot_every", 0) < 0:
        bad("snapshot_every", "must be >= 0")


def parse_config(text: str) -> RunConfig:
    """Parse and validate a run configuration.

    Every failure raises a :class:`ConfigError` subclass carrying the line number.
    """
    values: dict = {}
    lines: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if not sep or not key:
            raise TypeMismatch(f"expected 'key = value', got {raw.strip()!r}", lineno)
        if key not in _PARSERS:
            raise UnknownKey(f"unknown key {key!r}", lineno)
        try:
            values[key] = _PARSERS[key](val)
        except (ValueError, TypeError, IndexError) as exc:
            raise TypeMismatch(f"{key}: cannot parse {val!r} ({exc})", lineno) from None
        lines[key] = lineno
    for key in REQUIRED:
        if key not in values:
            raise MissingRequired(f"missing required key {key!r}")
    _validate(values, lines)
    log.debug("monitoring uses H^1.5 and L^4 norms; p > n of the existence theory is not enforced")
    return RunConfig(**values)


def render_config(cfg: RunConfig) -> str:
    """Canonical text form; ``parse_config(render_config(c)) == c``."""
    out = []
    for f in fields(cfg):
        v = getattr(cfg, f.name)
        if f.name == "grid":
            s = " ".join(str(x) for x in v)
        elif f.name == "potential":
            s = v.render()
        elif f.name == "initial":
            s = v.render()
        elif f.name == "checks":
            if not v:
                continue
            s = " ".join(v)
        elif isinstance(v, bool):
            s = "true" if v else "false"
        elif isinstance(v, float):
            s = repr(v)
        else:
            s = str(v)
        out.append(f"{f.name} = {s}")
    return "\n".join(out) + "\n"
