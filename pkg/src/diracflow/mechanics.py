"""Fiber derivative, Tulczyjew differential, Legendre transform and
implicit-system residuals on phase-space coordinates.

The cotangent-side conventions are pinned by one property: the
coordinate tuple returned by :func:`tulczyjew_beta` must equal the
gradient of the Legendre transform at the matching momentum, i.e.
(-dL/dq, v) at the base point (q, dL/dv).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .dirac import DiracStructure, membership_residual, point_frame
from .errors import SolveDivergenceError
from .fields import Chart, DiffBackend, DEFAULT_BACKEND, ScalarField

__all__ = [
    "Lagrangian",
    "CotangentCovector",
    "LegendreResult",
    "fiber_derivative",
    "tulczyjew_beta",
    "legendre_transform",
    "ils_residual",
    "reconstruct_velocities",
    "path_derivative",
]


@dataclass(frozen=True)
class Lagrangian:
    """A (possibly degenerate) Lagrangian on velocity coordinates (q, v).

    ``func`` takes the position and velocity blocks separately and
    returns a scalar; it must be evaluable under both differentiation
    backends.  ``convexity_hint`` is ``strict`` when the velocity
    Hessian is positive definite everywhere it will be used.
    """

    chart_q: Chart
    func: Callable[[np.ndarray, np.ndarray], float]
    convexity_hint: str = "strict"
    name: str = ""

    def __post_init__(self):
        if self.convexity_hint not in ("strict", "degenerate"):
            raise ValueError(f"unknown convexity hint {self.convexity_hint!r}")

    @property
    def dim(self) -> int:
        return self.chart_q.dim

    def value(self, q, v) -> float:
        return float(self.func(np.asarray(q, dtype=float),
                               np.asarray(v, dtype=float)))

    def as_scalar_field(self) -> ScalarField:
        n = self.dim
        chart = Chart(dim=2 * n,
                      coordinate_names=tuple(f"q_{c}" for c in self.chart_q.coordinate_names)
                      + tuple(f"v_{c}" for c in self.chart_q.coordinate_names))
        return ScalarField(chart, lambda x: self.func(x[:n], x[n:]),
                           name=self.name or "L")


def _grad_blocks(L: Lagrangian, q, v,
                 backend: DiffBackend) -> tuple[np.ndarray, np.ndarray]:
    """(dL/dq, dL/dv) at (q, v) in one backend pass."""
    n = L.dim
    x = np.concatenate([np.asarray(q, dtype=float), np.asarray(v, dtype=float)])
    grad = backend.derivatives(lambda y: L.func(y[:n], y[n:]), x)
    return grad[:n], grad[n:]


def fiber_derivative(L: Lagrangian, q, v,
                     backend: DiffBackend | None = None) -> np.ndarray:
    """Momentum p = dL/dv(q, v)."""
    backend = backend or DEFAULT_BACKEND
    return _grad_blocks(L, q, v, backend)[1]


@dataclass(frozen=True)
class CotangentCovector:
    """A covector over phase space: base point (q, p) and components (a_q, a_p)."""

    base: np.ndarray
    a_q: np.ndarray
    a_p: np.ndarray

    def components(self) -> np.ndarray:
        return np.concatenate([self.a_q, self.a_p])


def tulczyjew_beta(L: Lagrangian, q, v,
                   backend: DiffBackend | None = None) -> CotangentCovector:
    """Tulczyjew differential of L at (q, v).

    Coordinates: base point (q, dL/dv) with components (-dL/dq, v); for a
    strictly convex L this is the gradient of the Legendre transform at
    the matching momentum.
    """
    backend = backend or DEFAULT_BACKEND
    q = np.asarray(q, dtype=float)
    v = np.asarray(v, dtype=float)
    dq, dv = _grad_blocks(L, q, v, backend)
    return CotangentCovector(
        base=np.concatenate([q, dv]),
        a_q=-dq,
        a_p=v.copy(),
    )


@dataclass
class LegendreResult:
    H_value: float
    v: np.ndarray
    converged: bool
    iterations: int
    residual: float


def legendre_transform(L: Lagrangian, q, p,
                       backend: DiffBackend | None = None,
                       newton_tol: float = 1e-10,
                       max_iter: int = 50,
                       v0=None) -> LegendreResult:
    """Invert the fiber derivative by Newton and evaluate <p, v> - L.

    Requires a strictly convex Lagrangian; non-convergence (degenerate L
    or p outside the momentum image) is reported, not raised.
    """
    backend = backend or DEFAULT_BACKEND
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    n = L.dim
    v = np.array(p if v0 is None else v0, dtype=float)

    def residual(vv):
        return fiber_derivative(L, q, vv, backend) - p

    res = residual(v)
    it = 0
    while float(np.linalg.norm(res)) > newton_tol and it < max_iter:
        # velocity Hessian by differencing the fiber derivative
        jac = np.empty((n, n))
        for j in range(n):
            h = backend.fd_step * max(1.0, abs(v[j]))
            vp = v.copy()
            vm = v.copy()
            vp[j] += h
            vm[j] -= h
            jac[:, j] = (fiber_derivative(L, q, vp, backend)
                         - fiber_derivative(L, q, vm, backend)) / (2.0 * h)
        try:
            step = np.linalg.solve(jac, res)
        except np.linalg.LinAlgError:
            return LegendreResult(float("nan"), v, False, it,
                                  float(np.linalg.norm(res)))
        v = v - step
        if not np.all(np.isfinite(v)):
            return LegendreResult(float("nan"), v, False, it, float("inf"))
        res = residual(v)
        it += 1
    norm = float(np.linalg.norm(res))
    converged = norm <= newton_tol
    H = float(p @ v) - L.value(q, v) if converged else float("nan")
    return LegendreResult(H, v, converged, it, norm)


def path_derivative(times: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Second-order time derivative of sampled values (central inside,
    one-sided three-point stencils at the ends; spacing may vary)."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    m = times.size
    if m < 3:
        raise ValueError("need at least 3 samples for second-order differencing")
    out = np.empty_like(values)
    for k in range(m):
        if k == 0:
            i0, i1, i2 = 0, 1, 2
            t = times[0]
        elif k == m - 1:
            i0, i1, i2 = m - 3, m - 2, m - 1
            t = times[-1]
        else:
            i0, i1, i2 = k - 1, k, k + 1
            t = times[k]
        t0, t1, t2 = times[i0], times[i1], times[i2]
        # Lagrange-basis derivative weights at t
        w0 = (2.0 * t - t1 - t2) / ((t0 - t1) * (t0 - t2))
        w1 = (2.0 * t - t0 - t2) / ((t1 - t0) * (t1 - t2))
        w2 = (2.0 * t - t0 - t1) / ((t2 - t0) * (t2 - t1))
        out[k] = w0 * values[i0] + w1 * values[i1] + w2 * values[i2]
    return out


def _lagrange_derivative_weights(ts: np.ndarray, t: float) -> np.ndarray:
    """Weights w_a with sum_a w_a f(ts_a) = f'(t) for the interpolating polynomial."""
    m = ts.size
    weights = np.zeros(m)
    for a in range(m):
        total = 0.0
        for b in range(m):
            if b == a:
                continue
            prod = 1.0 / (ts[a] - ts[b])
            for c in range(m):
                if c not in (a, b):
                    prod *= (t - ts[c]) / (ts[a] - ts[c])
            total += prod
        weights[a] = total
    return weights


def reconstruct_velocities(times: np.ndarray, nodes: np.ndarray,
                           window: int = 5) -> np.ndarray:
    """Velocities of a sampled position path via local polynomial windows.

    A uniform window order keeps the reconstruction error smooth along
    the path, so differencing the reconstructed momenta afterwards does
    not amplify stencil-switch jumps near the ends.
    """
    times = np.asarray(times, dtype=float)
    nodes = np.asarray(nodes, dtype=float)
    m = times.size
    window = min(window, m)
    out = np.empty_like(nodes)
    half = window // 2
    for k in range(m):
        lo = min(max(0, k - half), m - window)
        idx = range(lo, lo + window)
        w = _lagrange_derivative_weights(times[list(idx)], times[k])
        out[k] = w @ nodes[list(idx)]
    return out


def ils_residual(Dlift: DiracStructure, L: Lagrangian,
                 qs: Sequence, vs: Sequence, times: Sequence,
                 backend: DiffBackend | None = None) -> np.ndarray:
    """Membership residuals of (d/dt (q, p), beta(dL)) along a sampled path.

    ``Dlift`` is the gauged cotangent lift governing the system; momenta
    are reconstructed through the fiber derivative and the phase-space
    velocity by second-order differencing, so exact solutions sampled at
    step h give O(h^2) residuals.
    """
    backend = backend or DEFAULT_BACKEND
    qs = np.asarray(qs, dtype=float)
    vs = np.asarray(vs, dtype=float)
    times = np.asarray(times, dtype=float)
    if qs.shape[0] < 3:
        raise ValueError("ils_residual needs at least 3 samples")
    ps = np.stack([fiber_derivative(L, q, v, backend) for q, v in zip(qs, vs)])
    states = np.hstack([qs, ps])
    rates = path_derivative(times, states)
    residuals = np.empty(qs.shape[0])
    for k in range(qs.shape[0]):
        beta = tulczyjew_beta(L, qs[k], vs[k], backend)
        frame = point_frame(Dlift, states[k])
        residuals[k] = membership_residual(frame, rates[k], beta.components())
    return residuals
