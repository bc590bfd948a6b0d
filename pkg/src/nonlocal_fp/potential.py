"""Trigonometric-series potentials on the torus.

Every potential is a finite sum of terms ``amp * prod_i g_i(2 pi m_i x_i)``
with ``g_i`` either ``cos`` or ``sin``. That keeps V smooth and periodic and
gives closed-form derivatives.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import optimize

from .errors import NonPositiveBeta
from .grid import TWO_PI, Grid

# A factor is (kind, m) with kind in {"c", "s"}; axes beyond the listed factors
# contribute a constant 1.
Factor = tuple[str, int]
Term = tuple[float, tuple[Factor, ...]]


@dataclass(frozen=True)
class PotentialSpec:
    kind: str
    params: tuple[tuple[str, float], ...] = ()
    terms: tuple[Term, ...] = ()

    def param(self, name: str, default: float | None = None) -> float:
        for k, v in self.params:
            if k == name:
                return v
        if default is None:
            raise KeyError(name)
        return default

    @property
    def depends_on_x1_only(self) -> bool:
        return all(all(m == 0 and kind == "c" for kind, m in factors[1:]) for _, factors in self.terms)

    def render(self) -> str:
        """Inverse of the config grammar ``name k=v k=v``."""
        if self.kind == "custom-series":
            parts = [
                f"t{i + 1}={amp!r}:" + ",".join(f"{kind}{m}" for kind, m in factors)
                for i, (amp, factors) in enumerate(self.terms)
            ]
        else:
            parts = [f"{k}={v!r}" for k, v in self.params]
        return " ".join([self.kind, *parts])


def zero() -> PotentialSpec:
    return PotentialSpec("zero")


def cosine1d(a: float = 1.0) -> PotentialSpec:
    """V = a cos(2 pi x1)."""
    return PotentialSpec("cosine1d", (("a", float(a)),), ((float(a), (("c", 1),)),))


def coupled(a: float = 1.0, c: float = 0.5) -> PotentialSpec:
    """V = a cos(2 pi x1) + c cos(2 pi x1) cos(2 pi x2)."""
    terms = ((float(a), (("c", 1),)), (float(c), (("c", 1), ("c", 1))))
    return PotentialSpec("coupled", (("a", float(a)), ("c", float(c))), terms)


def custom_series(terms) -> PotentialSpec:
    """Arbitrary finite series, ``terms = [(amp, [("c", 1), ("s", 2)]), ...]``."""
    norm = []
    for amp, factors in terms:
        fs = []
        for kind, m in factors:
            if kind not in ("c", "s"):
                raise ValueError(f"factor kind must be 'c' or 's', got {kind!r}")
            fs.append((kind, int(m)))
        norm.append((float(amp), tuple(fs)))
    return PotentialSpec("custom-series", (), tuple(norm))


BUILTINS = {"zero": zero, "cosine1d": cosine1d, "coupled": coupled}


@dataclass(frozen=True)
class PotentialFields:
    """V and the derivative fields the solver needs, evaluated at grid nodes."""

    V: np.ndarray
    d1V: np.ndarray
    d11V: np.ndarray
    grad: tuple[np.ndarray, ...]
    lap: np.ndarray


def _factor_values(kind: str, m: int, x: np.ndarray, deriv: int) -> np.ndarray:
    """d^deriv/dx^deriv of cos/sin(2 pi m x)."""
    w = TWO_PI * m
    u = w * x
    # derivative cycle: cos -> -sin -> -cos -> sin ; sin -> cos -> -sin -> -cos
    phase = {"c": 0, "s": 3}[kind]
    cycle = (np.cos, lambda v: -np.sin(v), lambda v: -np.cos(v), np.sin)
    return (w**deriv) * cycle[(phase + deriv) % 4](u)


def _eval_term(factors, coords, derivs) -> np.ndarray:
    out = 1.0
    for axis, x in enumerate(coords):
        kind, m = factors[axis] if axis < len(factors) else ("c", 0)
        d = derivs[axis]
        if m == 0:
            # constant factor
            if kind == "s" or d > 0:
                return np.zeros(())
            continue
        out = out * _factor_values(kind, m, x, d)
    return np.asarray(out)


def _evaluate(spec: PotentialSpec, coords, shape) -> PotentialFields:
    n = len(coords)

    def field(derivs):
        acc = np.zeros(shape)
        for amp, factors in spec.terms:
            if any(f != ("c", 0) for f in factors[n:]):
                raise ValueError("potential term uses more axes than the grid has")
            acc = acc + amp * _eval_term(factors, coords, derivs)
        return acc

    zero_d = [0] * n
    V = field(zero_d)
    grad = []
    second = []
    for i in range(n):
        d = list(zero_d)
        d[i] = 1
        grad.append(field(d))
        d[i] = 2
        second.append(field(d))
    return PotentialFields(V=V, d1V=grad[0], d11V=second[0], grad=tuple(grad), lap=sum(second))


@lru_cache(maxsize=64)
def eval_fields(spec: PotentialSpec, grid: Grid) -> PotentialFields:
    """Closed-form V, dV/dx1, d2V/dx1^2, grad V and Laplacian V at the nodes.

    Cached per (spec, grid); the returned arrays are read-only.
    """
    fields = _evaluate(spec, grid.coords, grid.shape)
    for arr in (fields.V, fields.d1V, fields.d11V, fields.lap, *fields.grad):
        arr.setflags(write=False)
    return fields


@dataclass(frozen=True)
class SupNorms:
    d1V: float
    gradV: float
    lapV: float
    d11V: float

    @property
    def c2(self) -> float:
        """Stand-in for the C^2 norm: sum of the four derivative sup-norms."""
        return self.gradV + self.lapV + self.d1V + self.d11V


def sup_norms(spec: PotentialSpec, grid: Grid) -> SupNorms:
    f = eval_fields(spec, grid)
    grad_mag = np.sqrt(sum(g**2 for g in f.grad))
    return SupNorms(
        d1V=float(np.max(np.abs(f.d1V))),
        gradV=float(np.max(grad_mag)),
        lapV=float(np.max(np.abs(f.lap))),
        d11V=float(np.max(np.abs(f.d11V))),
    )


def _slab_fields(spec: PotentialSpec, grid: Grid, chunk_rows: int | None = None):
    """Yield ``(row offset, fields)`` over slabs along axis 0 to bound memory."""
    N0 = grid.sizes[0]
    rest = grid.sizes[1:]
    rows = chunk_rows or max(1, min(N0, (1 << 22) // max(1, int(np.prod(rest, dtype=np.int64)))))
    other = [grid.axis_nodes(i).reshape([-1 if j == i else 1 for j in range(grid.n)]) for i in range(1, grid.n)]
    x0_all = grid.axis_nodes(0)
    for start in range(0, N0, rows):
        x0 = x0_all[start:start + rows].reshape([-1] + [1] * (grid.n - 1))
        yield start, _evaluate(spec, (x0, *other), (len(x0),) + rest)


def _delta_integrand(f: PotentialFields, beta: float, d1_sup: float) -> np.ndarray:
    grad_sq = sum(g**2 for g in f.grad)
    return f.lap / 2.0 - beta / 4.0 * grad_sq + beta * np.abs(f.d1V) / 2.0 * d1_sup


def _top_nodes(spec, grid, score, k):
    """The ``k`` grid nodes with the largest ``score(fields)``, as coordinates."""
    vals, pts = [], []
    for start, f in _slab_fields(spec, grid):
        v = np.broadcast_to(score(f), (f.V.shape[0],) + grid.sizes[1:]).ravel()
        idx = np.argpartition(v, -min(k, v.size))[-k:]
        for i in idx:
            loc = np.unravel_index(i, (f.V.shape[0],) + grid.sizes[1:])
            vals.append(float(v[i]))
            pts.append([(loc[0] + start) / grid.sizes[0]] + [loc[j] / grid.sizes[j] for j in range(1, grid.n)])
    order = np.argsort(vals)[::-1][:k]
    return [vals[i] for i in order], [np.array(pts[i]) for i in order]


def _polish_max(spec, n, score, start_vals, starts, xatol):
    """Local Nelder-Mead refinement of grid maxima of ``score`` on the torus."""
    def neg(z):
        f = _evaluate(spec, tuple(np.array([zi % 1.0]) for zi in z), (1,))
        return -float(score(f)[0])

    best = max(start_vals)
    for z0 in starts:
        res = optimize.minimize(neg, z0, method="Nelder-Mead",
                                options={"xatol": xatol, "fatol": 1e-15, "maxiter": 400 * n})
        best = max(best, -float(res.fun))
    return best


def compute_delta(spec: PotentialSpec, grid: Grid, beta: float, rtol: float | None = None,
                  candidates: int = 8) -> float:
    """Growth constant of the supersolution equation.

    ``delta = -max_x [lap V/2 - beta/4 |grad V|^2 + beta |d1 V|/2 * ||d1 V||_inf]``.

    With ``rtol=None`` both maxima are taken over the nodes of ``grid``.
    Otherwise the best ``candidates`` nodes seed a local continuous
    maximisation, which removes the grid bias.
    """
    if not beta > 0:
        raise NonPositiveBeta(f"beta must be > 0, got {beta}")
    if spec.kind == "zero" or not spec.terms:
        return 0.0
    d1_abs = lambda f: np.abs(f.d1V)
    vals, pts = _top_nodes(spec, grid, d1_abs, candidates)
    d1_sup = vals[0]
    if rtol is not None:
        d1_sup = _polish_max(spec, grid.n, d1_abs, vals, pts, xatol=rtol * 1e-3)
    integrand = lambda f: _delta_integrand(f, beta, d1_sup)
    vals, pts = _top_nodes(spec, grid, integrand, candidates)
    if rtol is None:
        return -vals[0]
    return -_polish_max(spec, grid.n, integrand, vals, pts, xatol=rtol * 1e-3)


def parse_potential(text: str) -> PotentialSpec:
    """Parse ``name k=v k=v``; custom series use ``t1=amp:c1,s2``."""
    parts = text.split()
    if not parts:
        raise ValueError("empty potential specification")
    name, args = parts[0], parts[1:]
    kv = {}
    for a in args:
        if "=" not in a:
            raise ValueError(f"expected key=value, got {a!r}")
        k, v = a.split("=", 1)
        kv[k] = v
    if name == "custom-series":
        terms = []
        for k in sorted(kv, key=lambda s: (len(s), s)):
            amp, _, facs = kv[k].partition(":")
            factors = []
            for f in facs.split(","):
                f = f.strip()
                if not f:
                    continue
                factors.append((f[0], int(f[1:])))
            terms.append((float(amp), factors))
        return custom_series(terms)
    if name not in BUILTINS:
        raise ValueError(f"unknown potential {name!r}")
    try:
        floats = {k: float(v) for k, v in kv.items()}
    except ValueError as exc:
        raise ValueError(f"non-numeric potential parameter in {text!r}") from exc
    try:
        return BUILTINS[name](**floats)
    except TypeError as exc:
        raise ValueError(f"bad parameters for {name}: {sorted(floats)}") from exc

