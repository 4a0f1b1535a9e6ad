"""Structure-aware time stepping and the discrete variational solver.

Four layers:

* initial-value stepping of Hamiltonian directions read off a Dirac
  structure (explicit RK4 or implicit midpoint);
* one-step discrete Euler-Lagrange solves with optional magnetic
  one-form and holonomic constraint (left-endpoint quadrature verbatim,
  midpoint variant flagged in outputs);
* a boundary-value Newton/KKT solver extremizing the discrete action
  over interior nodes;
* stationarity diagnostics evaluating the discrete action gradient on
  any sampled path.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .dirac import (
    CourantSection,
    DiracStructure,
    courant_pairing,
    hamiltonian_solve,
    membership_residual,
    point_frame,
)
from .errors import (
    AttainabilityError,
    LeafMismatchError,
    SolveDivergenceError,
)
from .fields import (
    ChartMap,
    DiffBackend,
    DEFAULT_BACKEND,
    OneFormField,
    ScalarField,
    gradient,
    jacobian,
)
from .mechanics import Lagrangian, _grad_blocks

__all__ = [
    "IntegratorConfig",
    "Trajectory",
    "DiscretePath",
    "IlsFunctional",
    "Theorem1Functional",
    "integrate_dirac_hamiltonian",
    "magnetic_el_step",
    "constrained_el_step",
    "velocity_start",
    "discrete_trajectory",
    "dvp_solve",
    "stationarity_residual",
]

QUADRATURES = ("left", "midpoint")


@dataclass(frozen=True)
class IntegratorConfig:
    """Step sizes, method switches and solver tolerances.

    ``h`` may be a scalar or a per-step sequence.  ``quadrature`` selects
    the discrete action rule: the left-endpoint rule is the default, the
    midpoint variant is second order for magnetic terms.
    """

    h: float | Sequence[float] = 1e-3
    method: str = "explicit_rk4"
    quadrature: str = "left"
    newton_tol: float = 1e-10
    newton_max_iter: int = 60
    membership_tol: float = 1e-6
    rank_tol: float = 1e-9

    def __post_init__(self):
        if self.method not in ("explicit_rk4", "implicit_midpoint"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.quadrature not in QUADRATURES:
            raise ValueError(f"unknown quadrature {self.quadrature!r}")
        if np.isscalar(self.h):
            if self.h <= 0:
                raise ValueError("step must be positive")
        if self.newton_tol <= 0:
            raise ValueError("newton_tol must be positive")


@dataclass
class Trajectory:
    """Time-stamped states with per-node diagnostics."""

    times: np.ndarray
    states: np.ndarray
    energy_values: np.ndarray
    casimir_values: np.ndarray
    membership_residuals: np.ndarray
    kernel_dims: np.ndarray
    method: str


def _newton(residual: Callable[[np.ndarray], np.ndarray], z0: np.ndarray,
            tol: float, max_iter: int, fd_step: float = None,
            what: str = "newton") -> np.ndarray:
    """Damped Newton with a central-difference Jacobian."""
    fd = fd_step or float(np.finfo(float).eps) ** (1.0 / 3.0)
    z = np.asarray(z0, dtype=float).copy()
    r = residual(z)
    norm = float(np.max(np.abs(r)))
    for _ in range(max_iter):
        if norm <= tol:
            return z
        m = z.size
        jac = np.empty((m, m))
        for j in range(m):
            hj = fd * max(1.0, abs(z[j]))
            zp = z.copy()
            zm = z.copy()
            zp[j] += hj
            zm[j] -= hj
            jac[:, j] = (residual(zp) - residual(zm)) / (2.0 * hj)
        try:
            step = np.linalg.solve(jac, r)
        except np.linalg.LinAlgError as exc:
            raise SolveDivergenceError(f"{what}: singular Jacobian") from exc
        scale = 1.0
        for _ in range(30):
            z_new = z - scale * step
            r_new = residual(z_new)
            norm_new = float(np.max(np.abs(r_new)))
            if norm_new < norm or norm_new <= tol:
                break
            scale *= 0.5
        else:
            raise SolveDivergenceError(f"{what}: line search stalled at {norm:.3e}")
        z, r, norm = z_new, r_new, norm_new
    if norm <= tol:
        return z
    raise SolveDivergenceError(f"{what}: no convergence, residual {norm:.3e}")


# ---------------------------------------------------------------------------
# initial-value Dirac-Hamiltonian stepping
# ---------------------------------------------------------------------------

def _hamiltonian_velocity(D: DiracStructure, H: ScalarField, cfg: IntegratorConfig):
    def vel(x):
        frame = point_frame(D, x)
        dH = gradient(H, x, D.backend)
        sol = hamiltonian_solve(frame, dH, cfg.membership_tol, cfg.rank_tol)
        if sol.residual > cfg.membership_tol:
            raise AttainabilityError(x, sol.residual, cfg.membership_tol)
        return sol, frame, dH
    return vel


def _steps_from_config(cfg: IntegratorConfig, T: float) -> np.ndarray:
    if np.isscalar(cfg.h):
        n = max(1, int(round(abs(T) / float(cfg.h))))
        return np.full(n, T / n)   # signed: T < 0 steps backwards
    steps = np.asarray(cfg.h, dtype=float)
    if np.any(steps == 0):
        raise ValueError("steps must be nonzero")
    return steps


def integrate_dirac_hamiltonian(D: DiracStructure, H: ScalarField, x0, T: float,
                                cfg: IntegratorConfig,
                                casimirs: Sequence[ScalarField] = ()) -> Trajectory:
    """March the Hamiltonian direction field of (D, H) from ``x0``.

    Aborts with :class:`AttainabilityError` when the covector dH stops
    being attainable along the way (the dynamics is undefined there, so
    no projection is attempted).
    """
    x = D.chart.require(x0)
    steps = _steps_from_config(cfg, T)
    n_nodes = steps.size + 1
    vel = _hamiltonian_velocity(D, H, cfg)

    times = np.concatenate([[0.0], np.cumsum(steps)])
    states = np.empty((n_nodes, D.dim))
    energies = np.empty(n_nodes)
    cas = np.empty((n_nodes, len(casimirs)))
    mres = np.empty(n_nodes)
    kdims = np.empty(n_nodes, dtype=int)

    def record(idx, x):
        sol, frame, dH = vel(x)
        states[idx] = x
        energies[idx] = H.value(x)
        for c, C in enumerate(casimirs):
            cas[idx, c] = C.value(x)
        mres[idx] = membership_residual(frame, sol.v, dH)
        kdims[idx] = sol.kernel_dim
        return sol

    sol = record(0, x)
    for k, h in enumerate(steps):
        if cfg.method == "explicit_rk4":
            k1 = sol.v
            k2 = vel(x + 0.5 * h * k1)[0].v
            k3 = vel(x + 0.5 * h * k2)[0].v
            k4 = vel(x + h * k3)[0].v
            x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        else:
            x_prev = x

            def res(y):
                return y - x_prev - h * vel(0.5 * (x_prev + y))[0].v

            x = _newton(res, x + h * sol.v, cfg.newton_tol,
                        cfg.newton_max_iter, what="implicit_midpoint")
        x = D.chart.require(x)
        sol = record(k + 1, x)
    return Trajectory(times, states, energies, cas, mres, kdims, cfg.method)


# ---------------------------------------------------------------------------
# discrete Euler-Lagrange machinery
# ---------------------------------------------------------------------------

def _theta_terms(theta: OneFormField | None, point, v, backend: DiffBackend):
    """(theta(point), J_theta(point)^T v) or zeros when no magnetic term."""
    if theta is None:
        z = np.zeros_like(v)
        return z, z
    th = theta.value(point)
    J = jacobian(theta, point, backend)
    return th, J.T @ v


def _d1_phi(L: Lagrangian, theta: OneFormField | None, a, b, h: float,
            quadrature: str, backend: DiffBackend) -> np.ndarray:
    """Derivative of the one-step discrete action in its first node."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    v = (b - a) / h
    if quadrature == "left":
        lq, lv = _grad_blocks(L, a, v, backend)
        th, jv = _theta_terms(theta, a, v, backend)
        return h * lq - lv + h * jv - th
    mid = 0.5 * (a + b)
    lq, lv = _grad_blocks(L, mid, v, backend)
    th, jv = _theta_terms(theta, mid, v, backend)
    return 0.5 * h * (lq + jv) - lv - th


def _d2_phi(L: Lagrangian, theta: OneFormField | None, a, b, h: float,
            quadrature: str, backend: DiffBackend) -> np.ndarray:
    """Derivative of the one-step discrete action in its second node."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    v = (b - a) / h
    if quadrature == "left":
        _, lv = _grad_blocks(L, a, v, backend)
        th, _ = _theta_terms(theta, a, v, backend)
        return lv + th
    mid = 0.5 * (a + b)
    lq, lv = _grad_blocks(L, mid, v, backend)
    th, jv = _theta_terms(theta, mid, v, backend)
    return 0.5 * h * (lq + jv) + lv + th


def _constraint_jacobian(constraint: ChartMap, q,
                         backend: DiffBackend) -> np.ndarray:
    d = backend.derivatives(constraint.func, np.asarray(q, dtype=float))
    return d if d.ndim == 2 else d[np.newaxis, :]


def _constraint_value(constraint: ChartMap, q) -> np.ndarray:
    return np.atleast_1d(constraint(q))


def _el_step(L: Lagrangian, theta: OneFormField | None,
             constraint: ChartMap | None, q_prev, q_cur,
             h_prev: float, h_cur: float, cfg: IntegratorConfig,
             g_ref=None, backend: DiffBackend | None = None):
    """Shared Newton core for the discrete Euler-Lagrange step.

    Without a constraint this is the plain magnetic step; with one, the
    unknowns gain the node multiplier and the system gains the level-set
    equation g(q_next) = g_ref.
    """
    backend = backend or DEFAULT_BACKEND
    q_prev = np.asarray(q_prev, dtype=float)
    q_cur = np.asarray(q_cur, dtype=float)
    n = q_cur.size
    d2 = _d2_phi(L, theta, q_prev, q_cur, h_prev, cfg.quadrature, backend)
    guess = 2.0 * q_cur - q_prev

    if constraint is None:
        def res(z):
            return d2 + _d1_phi(L, theta, q_cur, z, h_cur, cfg.quadrature, backend)

        q_next = _newton(res, guess, cfg.newton_tol, cfg.newton_max_iter,
                         backend.fd_step, what="discrete_el")
        return q_next, None

    g_ref = np.atleast_1d(np.asarray(
        _constraint_value(constraint, q_prev) if g_ref is None else g_ref,
        dtype=float))
    dg = _constraint_jacobian(constraint, q_cur, backend)
    k = dg.shape[0]

    def res(z):
        q_next, lam = z[:n], z[n:]
        top = (d2 + _d1_phi(L, theta, q_cur, q_next, h_cur, cfg.quadrature, backend)
               + dg.T @ lam)
        bottom = _constraint_value(constraint, q_next) - g_ref
        return np.concatenate([top, bottom])

    z = _newton(res, np.concatenate([guess, np.zeros(k)]),
                cfg.newton_tol, cfg.newton_max_iter, backend.fd_step,
                what="constrained_el")
    return z[:n], z[n:]


def magnetic_el_step(L: Lagrangian, theta: OneFormField | None, q_prev, q_cur,
                     h_prev: float, h_cur: float, cfg: IntegratorConfig,
                     backend: DiffBackend | None = None) -> np.ndarray:
    """Solve the discrete Euler-Lagrange equation for the next node."""
    q_next, _ = _el_step(L, theta, None, q_prev, q_cur, h_prev, h_cur, cfg,
                         backend=backend)
    return q_next


def constrained_el_step(L: Lagrangian, constraint: ChartMap | None, q_prev, q_cur,
                        h_prev: float, h_cur: float, cfg: IntegratorConfig,
                        g_ref=None, backend: DiffBackend | None = None
                        ) -> tuple[np.ndarray, np.ndarray | None]:
    """Discrete Euler-Lagrange step with a holonomic level-set constraint.

    Returns (q_next, multiplier); with ``constraint=None`` this runs the
    identical Newton system as :func:`magnetic_el_step` with zero
    magnetic term.
    """
    return _el_step(L, None, constraint, q_prev, q_cur, h_prev, h_cur, cfg,
                    g_ref=g_ref, backend=backend)


def velocity_start(L: Lagrangian, q0, v0, h: float, cfg: IntegratorConfig,
                   theta: OneFormField | None = None,
                   constraint: ChartMap | None = None, g_ref=None,
                   backend: DiffBackend | None = None) -> np.ndarray:
    """Second node matching a continuous initial velocity.

    Solves the discrete Legendre condition p0 + D1(action step)(q0, q1) = 0
    (plus the constraint when present) so that discrete trajectories
    shadow the continuum solution at the quadrature's full order.
    """
    backend = backend or DEFAULT_BACKEND
    q0 = np.asarray(q0, dtype=float)
    v0 = np.asarray(v0, dtype=float)
    n = q0.size
    _, lv = _grad_blocks(L, q0, v0, backend)
    p0 = lv + (theta.value(q0) if theta is not None else 0.0)
    guess = q0 + h * v0

    if constraint is None:
        def res(z):
            return p0 + _d1_phi(L, theta, q0, z, h, cfg.quadrature, backend)

        return _newton(res, guess, cfg.newton_tol, cfg.newton_max_iter,
                       backend.fd_step, what="velocity_start")

    g_ref = np.atleast_1d(np.asarray(
        _constraint_value(constraint, q0) if g_ref is None else g_ref, dtype=float))
    dg = _constraint_jacobian(constraint, q0, backend)
    k = dg.shape[0]

    def res(z):
        q1, lam = z[:n], z[n:]
        top = p0 + _d1_phi(L, theta, q0, q1, h, cfg.quadrature, backend) + dg.T @ lam
        bottom = _constraint_value(constraint, q1) - g_ref
        return np.concatenate([top, bottom])

    z = _newton(res, np.concatenate([guess, np.zeros(k)]),
                cfg.newton_tol, cfg.newton_max_iter, backend.fd_step,
                what="velocity_start")
    return z[:n]


# ---------------------------------------------------------------------------
# discrete paths and action functionals
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IlsFunctional:
    """Discrete action sum_n h_n [L(q_n, v_n) + theta_(q_n)(v_n)]."""

    lagrangian: Lagrangian
    theta: OneFormField | None = None
    constraint: ChartMap | None = None
    quadrature: str = "left"
    backend: DiffBackend = DEFAULT_BACKEND

    def node_gradient(self, times: np.ndarray, nodes: np.ndarray,
                      k: int) -> np.ndarray:
        h_prev = times[k] - times[k - 1]
        h_cur = times[k + 1] - times[k]
        return (_d2_phi(self.lagrangian, self.theta, nodes[k - 1], nodes[k],
                        h_prev, self.quadrature, self.backend)
                + _d1_phi(self.lagrangian, self.theta, nodes[k], nodes[k + 1],
                          h_cur, self.quadrature, self.backend))


@dataclass(frozen=True)
class Theorem1Functional:
    """Discrete action sum_n h_n [theta(zeta_n) + H(gamma_n)] over a Dirac frame.

    ``tau`` represents the horizontal 1-cochain through the pairing;
    zeta_n is the minimum-norm frame solve of the discrete velocity, so
    the summand reduces to an effective one-form contracted with node
    differences.
    """

    dirac: DiracStructure
    tau: CourantSection
    hamiltonian: ScalarField
    quadrature: str = "left"
    rho_tol: float = 1e-6

    def effective_oneform(self, x) -> np.ndarray:
        frame = point_frame(self.dirac, x)
        theta = np.array([courant_pairing(self.tau, s, x)
                          for s in self.dirac.sections])
        return np.linalg.pinv(frame.vector_block).T @ theta

    def _oneform_jacobian(self, x) -> np.ndarray:
        # the effective one-form goes through a pseudo-inverse, so its
        # derivative is always taken by central differences
        n = x.size
        fd = float(np.finfo(float).eps) ** (1.0 / 3.0)
        J = np.empty((n, n))
        for j in range(n):
            hj = fd * max(1.0, abs(x[j]))
            xp = x.copy()
            xm = x.copy()
            xp[j] += hj
            xm[j] -= hj
            J[:, j] = (self.effective_oneform(xp) - self.effective_oneform(xm)) / (2.0 * hj)
        return J

    def check_solvability(self, times: np.ndarray, nodes: np.ndarray) -> None:
        for k in range(nodes.shape[0] - 1):
            h = times[k + 1] - times[k]
            u = (nodes[k + 1] - nodes[k]) / h
            base = nodes[k] if self.quadrature == "left" else 0.5 * (nodes[k] + nodes[k + 1])
            A = point_frame(self.dirac, base).vector_block
            sol, *_ = np.linalg.lstsq(A, u, rcond=None)
            r = float(np.linalg.norm(A @ sol - u)) / (1.0 + float(np.linalg.norm(u)))
            if r > self.rho_tol:
                raise LeafMismatchError(
                    f"discrete velocity at segment {k} is not in the anchor image "
                    f"(residual {r:.3e}); the endpoints may lie on different leaves")

    def node_gradient(self, times: np.ndarray, nodes: np.ndarray,
                      k: int) -> np.ndarray:
        backend = self.dirac.backend
        h_prev = times[k] - times[k - 1]
        h_cur = times[k + 1] - times[k]
        if self.quadrature == "left":
            w_prev = self.effective_oneform(nodes[k - 1])
            w_cur = self.effective_oneform(nodes[k])
            Jw = self._oneform_jacobian(nodes[k])
            dH = gradient(self.hamiltonian, nodes[k], backend)
            return Jw.T @ (nodes[k + 1] - nodes[k]) - w_cur + w_prev + h_cur * dH
        m_prev = 0.5 * (nodes[k - 1] + nodes[k])
        m_cur = 0.5 * (nodes[k] + nodes[k + 1])
        w_prev = self.effective_oneform(m_prev)
        w_cur = self.effective_oneform(m_cur)
        grad = 0.5 * self._oneform_jacobian(m_cur).T @ (nodes[k + 1] - nodes[k])
        grad += -w_cur + 0.5 * h_cur * gradient(self.hamiltonian, m_cur, backend)
        grad += 0.5 * self._oneform_jacobian(m_prev).T @ (nodes[k] - nodes[k - 1])
        grad += w_prev + 0.5 * h_prev * gradient(self.hamiltonian, m_prev, backend)
        return grad


@dataclass
class DiscretePath:
    """Node sequence with its action functional and optional multipliers."""

    times: np.ndarray
    nodes: np.ndarray
    functional: IlsFunctional | Theorem1Functional
    multipliers: np.ndarray | None = None

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.nodes = np.asarray(self.nodes, dtype=float)
        if self.times.size != self.nodes.shape[0]:
            raise ValueError("times and nodes disagree in length")
        if self.times.size < 3:
            raise ValueError("a discrete path needs at least 3 nodes")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")


def discrete_trajectory(L: Lagrangian, q0, v0, n_steps: int,
                        cfg: IntegratorConfig,
                        theta: OneFormField | None = None,
                        constraint: ChartMap | None = None,
                        backend: DiffBackend | None = None,
                        t0: float = 0.0) -> DiscretePath:
    """Iterate the discrete Euler-Lagrange step from (q0, v0)."""
    backend = backend or DEFAULT_BACKEND
    if np.isscalar(cfg.h):
        steps = np.full(n_steps, float(cfg.h))
    else:
        steps = np.asarray(cfg.h, dtype=float)[:n_steps]
    q0 = np.asarray(q0, dtype=float)
    g_ref = _constraint_value(constraint, q0) if constraint is not None else None
    q1 = velocity_start(L, q0, v0, steps[0], cfg, theta, constraint, g_ref,
                        backend)
    nodes = [q0, q1]
    lams = []
    for k in range(1, n_steps):
        q_next, lam = _el_step(L, theta, constraint, nodes[-2], nodes[-1],
                               steps[k - 1], steps[k], cfg, g_ref, backend)
        nodes.append(q_next)
        if lam is not None:
            lams.append(lam)
    times = t0 + np.concatenate([[0.0], np.cumsum(steps)])
    return DiscretePath(
        times=times,
        nodes=np.stack(nodes),
        functional=IlsFunctional(L, theta, constraint, cfg.quadrature, backend),
        multipliers=np.stack(lams) if lams else None,
    )


# ---------------------------------------------------------------------------
# boundary-value solver
# ---------------------------------------------------------------------------

def _interior_gradient_blocks(path: DiscretePath,
                              nodes: np.ndarray) -> np.ndarray:
    f = path.functional
    return np.stack([f.node_gradient(path.times, nodes, k)
                     for k in range(1, nodes.shape[0] - 1)])


def dvp_solve(path: DiscretePath, cfg: IntegratorConfig) -> DiscretePath:
    """Extremize the discrete action over interior nodes, endpoints fixed.

    Full-space Newton with dense solves; the Jacobian is assembled by
    differencing the analytic node gradients, touching only the three
    gradient blocks a node perturbation reaches.  Falls back to
    coarse-to-fine continuation when Newton stalls from the straight
    initial guess.
    """
    try:
        return _dvp_newton(path, cfg)
    except SolveDivergenceError:
        n_nodes = path.nodes.shape[0]
        if n_nodes < 9:
            raise
        coarse_idx = np.unique(np.round(
            np.linspace(0, n_nodes - 1, (n_nodes - 1) // 2 + 1)).astype(int))
        coarse = DiscretePath(
            times=path.times[coarse_idx],
            nodes=path.nodes[coarse_idx],
            functional=path.functional,
        )
        solved = dvp_solve(coarse, cfg)
        fine_nodes = np.empty_like(path.nodes)
        for c in range(path.nodes.shape[1]):
            fine_nodes[:, c] = np.interp(path.times, solved.times,
                                         solved.nodes[:, c])
        fine_nodes[0] = path.nodes[0]
        fine_nodes[-1] = path.nodes[-1]
        retry = replace_path_nodes(path, fine_nodes)
        return _dvp_newton(retry, cfg)


def replace_path_nodes(path: DiscretePath, nodes: np.ndarray) -> DiscretePath:
    return DiscretePath(times=path.times.copy(), nodes=np.asarray(nodes, dtype=float),
                        functional=path.functional, multipliers=path.multipliers)


def _dvp_newton(path: DiscretePath, cfg: IntegratorConfig) -> DiscretePath:
    f = path.functional
    nodes = path.nodes.copy()
    n_nodes, dim = nodes.shape
    interior = n_nodes - 2
    if interior < 1:
        raise ValueError("dvp_solve needs at least one interior node")

    constraint = getattr(f, "constraint", None)
    backend = getattr(f, "backend", DEFAULT_BACKEND)
    if isinstance(f, Theorem1Functional):
        f.check_solvability(path.times, nodes)

    if constraint is not None:
        g_ref = _constraint_value(constraint, nodes[0])
        n_con = g_ref.size
    else:
        g_ref = None
        n_con = 0

    lams = np.zeros((interior, n_con))
    if path.multipliers is not None and path.multipliers.shape == lams.shape:
        lams = path.multipliers.copy()

    def grad_block(k, nodes_now, lams_now):
        g = f.node_gradient(path.times, nodes_now, k)
        if constraint is not None:
            dg = _constraint_jacobian(constraint, nodes_now[k], backend)
            g = g + dg.T @ lams_now[k - 1]
        return g

    def full_residual(nodes_now, lams_now):
        top = np.concatenate([grad_block(k, nodes_now, lams_now)
                              for k in range(1, n_nodes - 1)])
        if constraint is None:
            return top
        bottom = np.concatenate([
            _constraint_value(constraint, nodes_now[k]) - g_ref
            for k in range(1, n_nodes - 1)])
        return np.concatenate([top, bottom])

    n_unknown = interior * (dim + n_con)
    fd = float(np.finfo(float).eps) ** (1.0 / 3.0)

    def assemble_jacobian(nodes_now, lams_now):
        jac = np.zeros((n_unknown, n_unknown))
        for k in range(1, n_nodes - 1):
            for c in range(dim):
                col = (k - 1) * dim + c
                hj = fd * max(1.0, abs(nodes_now[k, c]))
                np_p = nodes_now.copy()
                np_m = nodes_now.copy()
                np_p[k, c] += hj
                np_m[k, c] -= hj
                for kk in (k - 1, k, k + 1):
                    if 1 <= kk <= n_nodes - 2:
                        row = (kk - 1) * dim
                        diff = (grad_block(kk, np_p, lams_now)
                                - grad_block(kk, np_m, lams_now)) / (2.0 * hj)
                        jac[row:row + dim, col] = diff
                if constraint is not None:
                    row = interior * dim + (k - 1) * n_con
                    diff = (_constraint_value(constraint, np_p[k])
                            - _constraint_value(constraint, np_m[k])) / (2.0 * hj)
                    jac[row:row + n_con, col] = diff
        if constraint is not None:
            for k in range(1, n_nodes - 1):
                dg = _constraint_jacobian(constraint, nodes_now[k], backend)
                row = (k - 1) * dim
                col = interior * dim + (k - 1) * n_con
                jac[row:row + dim, col:col + n_con] = dg.T
        return jac

    r = full_residual(nodes, lams)
    norm = float(np.max(np.abs(r)))
    for _ in range(cfg.newton_max_iter):
        if norm <= cfg.newton_tol:
            break
        jac = assemble_jacobian(nodes, lams)
        try:
            step = np.linalg.solve(jac, r)
        except np.linalg.LinAlgError as exc:
            raise SolveDivergenceError("dvp: singular KKT matrix") from exc
        scale = 1.0
        for _ in range(25):
            nodes_new = nodes.copy()
            delta = step[: interior * dim].reshape(interior, dim)
            nodes_new[1:-1] = nodes[1:-1] - scale * delta
            lams_new = lams - scale * step[interior * dim:].reshape(interior, n_con) \
                if n_con else lams
            r_new = full_residual(nodes_new, lams_new)
            norm_new = float(np.max(np.abs(r_new)))
            if norm_new < norm or norm_new <= cfg.newton_tol:
                break
            scale *= 0.5
        else:
            raise SolveDivergenceError(f"dvp: line search stalled at {norm:.3e}")
        nodes, lams, r, norm = nodes_new, lams_new, r_new, norm_new
    else:
        if norm > cfg.newton_tol:
            raise SolveDivergenceError(f"dvp: no convergence, residual {norm:.3e}")
    return DiscretePath(times=path.times.copy(), nodes=nodes,
                        functional=f,
                        multipliers=lams if n_con else None)


def stationarity_residual(path: DiscretePath) -> float:
    """Max infinity-norm of the discrete action gradient over interior nodes.

    For constrained functionals the gradient is reduced by the stored
    multipliers, or by per-node least-squares multipliers when none are
    stored; exact discrete solutions give a residual at the Newton
    tolerance, non-solutions give O(1)."""
    f = path.functional
    constraint = getattr(f, "constraint", None)
    backend = getattr(f, "backend", DEFAULT_BACKEND)
    if isinstance(f, Theorem1Functional):
        f.check_solvability(path.times, path.nodes)
    worst = 0.0
    for k in range(1, path.nodes.shape[0] - 1):
        g = f.node_gradient(path.times, path.nodes, k)
        if constraint is not None:
            dg = _constraint_jacobian(constraint, path.nodes[k], backend)
            if path.multipliers is not None and path.multipliers.shape[0] == path.nodes.shape[0] - 2:
                g = g + dg.T @ path.multipliers[k - 1]
            else:
                lam, *_ = np.linalg.lstsq(dg.T, -g, rcond=None)
                g = g + dg.T @ lam
        worst = max(worst, float(np.max(np.abs(g))))
    return worst
