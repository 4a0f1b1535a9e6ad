"""Builtin example systems with known invariants and recommended settings.

Each scenario bundles a verified structure, its dynamics data (a
Hamiltonian or a Lagrangian with optional magnetic one-form or holonomic
constraint), initial data, declared invariants and the tolerances the
acceptance checks run at.  Structures are validated at 100 quasi-random
samples when the catalog entry is first built.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .dirac import (
    CourantSection,
    DiracStructure,
    cotangent_lift,
    foliation_sum,
    graph_of_form,
    graph_of_poisson,
    section,
    verify_structure,
    zero_section,
)
from .errors import StructureError
from .fields import (
    Chart,
    ChartMap,
    DiffBackend,
    OneFormField,
    ScalarField,
    SkewMatrixField,
    VectorField,
)
from .integrators import IntegratorConfig
from .mechanics import Lagrangian
from .sampling import sample_box

__all__ = ["Scenario", "builtin", "builtin_names", "casimirs"]

DUAL = DiffBackend(mode="dual")

BUILTIN_NAMES = (
    "canonical_oscillator",
    "x2_poisson",
    "mixed_r4",
    "lie_poisson_so3",
    "magnetic_larmor",
    "holonomic_pendulum",
    "regular_foliation",
    "almost_dirac_rolling",
)


@dataclass(frozen=True)
class Scenario:
    """A fully specified runnable system."""

    name: str
    description: str
    chart: Chart
    structure: DiracStructure
    dynamics: str | None                      # "hamiltonian" | "lagrangian" | None
    hamiltonian: ScalarField | None = None
    lagrangian: Lagrangian | None = None
    theta: OneFormField | None = None         # magnetic one-form on the base
    constraint: ChartMap | None = None
    x0: np.ndarray | None = None              # state for Hamiltonian runs
    q0: np.ndarray | None = None              # position/velocity for DEL runs
    v0: np.ndarray | None = None
    T: float = 1.0
    cfg: IntegratorConfig = field(default_factory=IntegratorConfig)
    casimirs: tuple[ScalarField, ...] = ()
    energy: Callable[[np.ndarray, np.ndarray], float] | None = None
    analytic: Callable[[float], np.ndarray] | None = None
    pi: SkewMatrixField | None = None
    poisson_primitive: VectorField | None = None
    primitive_tau: CourantSection | None = None   # d_D theta_tau = omega_D
    theta_tau: CourantSection | None = None       # variational-dynamics scaling
    singular_box: tuple[tuple[float, ...], tuple[float, ...]] | None = None
    expected_involutivity_failure: bool = False
    membership_tol: float = 1e-6

    def samples(self, count: int = 100, seed: int = 0) -> list[np.ndarray]:
        lower, upper = self.chart.sample_box
        return sample_box(lower, upper, count, seed)

    def structure_samples(self, count: int = 100, seed: int = 0) -> list[np.ndarray]:
        """Samples on the structure's own chart (the phase chart for lifts)."""
        lower, upper = self.structure.chart.sample_box
        return sample_box(lower, upper, count, seed)

    def singular_samples(self, count: int = 50, seed: int = 0) -> list[np.ndarray]:
        if self.singular_box is None:
            return []
        lower, upper = self.singular_box
        return sample_box(lower, upper, count, seed)


def builtin_names() -> tuple[str, ...]:
    return BUILTIN_NAMES


def casimirs(scenario: Scenario) -> tuple[ScalarField, ...]:
    """Declared invariants annihilated by the anchor image (possibly none)."""
    return scenario.casimirs


def _box(chart_dim: int, half_width: float) -> tuple[tuple[float, ...], tuple[float, ...]]:
    return (tuple(-half_width for _ in range(chart_dim)),
            tuple(half_width for _ in range(chart_dim)))


def _bounded_chart(dim: int, names: tuple[str, ...], half_width: float,
                   bound: float = 1e3) -> Chart:
    return Chart(dim=dim, coordinate_names=names,
                 domain_check=lambda x: bool(np.all(np.abs(x) < bound)),
                 sample_box=_box(dim, half_width))


def _canonical_oscillator() -> Scenario:
    chart = _bounded_chart(2, ("x", "y"), 2.0)
    W = np.array([[0.0, 1.0], [-1.0, 0.0]])
    omega = SkewMatrixField(chart, lambda x: W, SkewMatrixField.COVARIANT,
                            name="dx^dy")
    D = graph_of_form(omega, backend=DUAL)
    H = ScalarField(chart, lambda x: 0.5 * (x[0] ** 2 + x[1] ** 2), name="H")
    # flow from (1, 0): (cos t, -sin t), period 2*pi
    return Scenario(
        name="canonical_oscillator",
        description="graph of the area form on the plane; harmonic oscillator",
        chart=chart,
        structure=D,
        dynamics="hamiltonian",
        hamiltonian=H,
        x0=np.array([1.0, 0.0]),
        T=2.0 * np.pi,
        cfg=IntegratorConfig(h=1e-3, method="explicit_rk4", quadrature="midpoint"),
        analytic=lambda t: np.array([np.cos(t), -np.sin(t)]),
        primitive_tau=section(chart, lambda x: np.zeros(2),
                              lambda x: np.array([0.0 * x[0], 2.0 * x[0]]),
                              name="tau_primitive"),
        theta_tau=section(chart, lambda x: np.zeros(2),
                          lambda x: np.array([0.0 * x[0], 1.0 * x[0]]),
                          name="tau_dynamics"),
    )


def _x2_poisson() -> Scenario:
    chart = _bounded_chart(2, ("x", "y"), 2.0)
    pi = SkewMatrixField(
        chart,
        lambda x: np.array([[0.0 * x[0], x[0] ** 2], [-x[0] ** 2, 0.0 * x[0]]]),
        SkewMatrixField.CONTRAVARIANT, name="x^2 dx^dy bivector")
    D = graph_of_poisson(pi, backend=DUAL)
    H = ScalarField(chart, lambda x: x[1] * 1.0, name="H=y")
    E = VectorField(chart, lambda x: np.array([x[0], 0.0 * x[0]]), name="x dx")
    return Scenario(
        name="x2_poisson",
        description="quadratically vanishing plane bivector with scaling primitive",
        chart=chart,
        structure=D,
        dynamics="hamiltonian",
        hamiltonian=H,
        x0=np.array([1.0, 0.0]),
        T=0.5,
        cfg=IntegratorConfig(h=1e-3),
        analytic=lambda t: np.array([1.0 / (1.0 - t), 0.0]),
        pi=pi,
        poisson_primitive=E,
        primitive_tau=section(chart, lambda x: np.array([2.0 * x[0], 0.0 * x[0]]),
                              lambda x: np.zeros(2), name="tau_primitive"),
        theta_tau=section(chart, lambda x: np.array([x[0], 0.0 * x[0]]),
                          lambda x: np.zeros(2), name="tau_dynamics"),
    )


def _mixed_r4() -> Scenario:
    chart = _bounded_chart(4, ("x", "y", "z", "w"), 1.5)

    def bivector(x):
        z = 0.0 * x[0]
        r = x[0] ** 2 + x[1] ** 2
        one = 1.0 + z
        return np.array([
            [z, r, z, z],
            [-r, z, z, z],
            [z, z, z, one],
            [z, z, -one, z],
        ])

    pi = SkewMatrixField(chart, bivector, SkewMatrixField.CONTRAVARIANT,
                         name="(x^2+y^2) dx^dy + dz^dw bivector")
    D = graph_of_poisson(pi, backend=DUAL)
    H = ScalarField(chart, lambda x: 0.5 * (x[2] ** 2 + x[3] ** 2), name="H")
    # L_E pi = pi on the singular leaf {x = y = 0} for E = -w d/dw
    E = VectorField(chart,
                    lambda x: np.array([0.0 * x[0], 0.0 * x[0], 0.0 * x[0], -x[3]]),
                    name="-w dw")
    return Scenario(
        name="mixed_r4",
        description="rank-jumping four-dimensional bivector with a singular plane",
        chart=chart,
        structure=D,
        dynamics="hamiltonian",
        hamiltonian=H,
        x0=np.array([0.0, 0.0, 1.0, 0.0]),
        T=1.0,
        cfg=IntegratorConfig(h=1e-2),
        pi=pi,
        poisson_primitive=E,
        primitive_tau=section(
            chart,
            lambda x: np.array([0.0 * x[0], 0.0 * x[0], 0.0 * x[0], -2.0 * x[3]]),
            lambda x: np.zeros(4), name="tau_primitive"),
        singular_box=((0.0, 0.0, -1.5, -1.5), (0.0, 0.0, 1.5, 1.5)),
    )


def _lie_poisson_so3() -> Scenario:
    chart = _bounded_chart(3, ("m1", "m2", "m3"), 1.5)

    def bivector(m):
        z = 0.0 * m[0]
        return np.array([
            [z, -m[2], m[1]],
            [m[2], z, -m[0]],
            [-m[1], m[0], z],
        ])

    pi = SkewMatrixField(chart, bivector, SkewMatrixField.CONTRAVARIANT,
                         name="angular-momentum bivector")
    D = graph_of_poisson(pi, backend=DUAL)
    inertia = np.array([1.0, 2.0, 3.0])
    H = ScalarField(
        chart,
        lambda m: 0.5 * (m[0] ** 2 / inertia[0] + m[1] ** 2 / inertia[1]
                         + m[2] ** 2 / inertia[2]),
        name="rigid-body energy")
    C = ScalarField(chart, lambda m: m[0] ** 2 + m[1] ** 2 + m[2] ** 2,
                    name="|m|^2")
    # tumbling start near the middle axis: the Casimir drift of the
    # explicit integrator shows its clean fourth-order scaling here
    return Scenario(
        name="lie_poisson_so3",
        description="free rigid body on angular-momentum space",
        chart=chart,
        structure=D,
        dynamics="hamiltonian",
        hamiltonian=H,
        x0=np.array([0.05, 1.0, 0.08]),
        T=50.0,
        cfg=IntegratorConfig(h=0.05),
        casimirs=(C,),
        pi=pi,
    )


def _magnetic_larmor() -> Scenario:
    chart = _bounded_chart(2, ("x", "y"), 2.0)
    B = 1.0
    theta = OneFormField(chart, lambda q: np.array([-0.5 * B * q[1], 0.5 * B * q[0]]),
                         name="magnetic potential")
    # the implicit-system membership convention makes the lifted structure
    # of the graph of -d(theta) reproduce the Lorentz force of +theta
    W = np.array([[0.0, -B], [B, 0.0]])
    base = graph_of_form(
        SkewMatrixField(chart, lambda x: W, SkewMatrixField.COVARIANT,
                        name="-d theta"),
        backend=DUAL)
    D = cotangent_lift(base, with_gauge=True)
    L = Lagrangian(chart, lambda q, v: 0.5 * (v[0] ** 2 + v[1] ** 2),
                   convexity_hint="strict", name="free particle")
    return Scenario(
        name="magnetic_larmor",
        description="charged particle in a uniform transverse field",
        chart=chart,
        structure=D,
        dynamics="lagrangian",
        lagrangian=L,
        theta=theta,
        q0=np.array([1.0, 0.0]),
        v0=np.array([0.0, -B]),
        T=2.0 * np.pi / B,
        cfg=IntegratorConfig(h=1e-3, quadrature="midpoint", newton_tol=1e-11,
                             membership_tol=1e-4),
        energy=lambda q, v: 0.5 * float(v @ v),
        analytic=lambda t: np.array([np.cos(B * t), -np.sin(B * t)]),
    )


def _holonomic_pendulum() -> Scenario:
    # the rotation frame and the constraint differential both vanish at the
    # origin, so the chart excludes it; the motion stays near (0, -1)
    chart = Chart(
        dim=2, coordinate_names=("q1", "q2"),
        domain_check=lambda q: bool(0.05 < np.hypot(q[0], q[1]) < 1e3),
        sample_box=((-1.0, -1.1), (1.0, -0.2)))
    g_grav = 9.81
    L = Lagrangian(chart, lambda q, v: 0.5 * (v[0] ** 2 + v[1] ** 2) - g_grav * q[1],
                   convexity_hint="strict", name="pendulum")
    level = Chart(1, ("level",))
    constraint = ChartMap(chart, level,
                          lambda q: np.array([0.5 * (q[0] ** 2 + q[1] ** 2 - 1.0)]),
                          name="unit-circle constraint")
    fields = [VectorField(chart, lambda q: np.array([-q[1], q[0]]), name="rotation")]
    base = foliation_sum(fields, g=constraint,
                         cofields=[OneFormField(chart, lambda q: np.array([q[0], q[1]]),
                                                name="radial covector")],
                         backend=DUAL)
    D = cotangent_lift(base, with_gauge=True)
    phi0 = 0.05
    return Scenario(
        name="holonomic_pendulum",
        description="planar pendulum kept on the unit circle by a multiplier",
        chart=chart,
        structure=D,
        dynamics="lagrangian",
        lagrangian=L,
        constraint=constraint,
        q0=np.array([np.sin(phi0), -np.cos(phi0)]),
        v0=np.zeros(2),
        T=6.0,
        cfg=IntegratorConfig(h=1e-3, newton_tol=1e-11, membership_tol=1e-4),
        energy=lambda q, v: 0.5 * float(v @ v) + g_grav * q[1],
        analytic=lambda t, phi0=phi0, g=g_grav: np.array(
            [np.sin(phi0 * np.cos(np.sqrt(g) * t)),
             -np.cos(phi0 * np.cos(np.sqrt(g) * t))]),
    )


def _regular_foliation() -> Scenario:
    chart = _bounded_chart(3, ("x", "y", "z"), 1.0)
    level = Chart(1, ("level",))
    g = ChartMap(chart, level, lambda x: np.array([x[2]]), name="height")
    fields = [
        VectorField(chart, lambda x: np.array([1.0 + 0.0 * x[0], 0.0 * x[0], 0.0 * x[0]])),
        VectorField(chart, lambda x: np.array([0.0 * x[0], 1.0 + 0.0 * x[0], 0.0 * x[0]])),
    ]
    D = foliation_sum(
        fields, g=g,
        cofields=[OneFormField(chart,
                               lambda x: np.array([0.0 * x[0], 0.0 * x[0], 1.0 + 0.0 * x[0]]),
                               name="dz")],
        backend=DUAL)
    H = ScalarField(chart, lambda x: 0.5 * x[2] ** 2, name="H")
    C = ScalarField(chart, lambda x: x[2] * 1.0, name="z")
    return Scenario(
        name="regular_foliation",
        description="horizontal-plane foliation; the canonical 2-cochain vanishes",
        chart=chart,
        structure=D,
        dynamics="hamiltonian",
        hamiltonian=H,
        x0=np.array([0.0, 0.0, 0.5]),
        T=1.0,
        cfg=IntegratorConfig(h=1e-2),
        casimirs=(C,),
        primitive_tau=zero_section(chart),
        theta_tau=zero_section(chart),
    )


def _almost_dirac_rolling() -> Scenario:
    chart = _bounded_chart(3, ("x", "y", "z"), 1.0)
    fields = [
        VectorField(chart, lambda x: np.array([1.0 + 0.0 * x[0], 0.0 * x[0], 0.0 * x[0]])),
        VectorField(chart, lambda x: np.array([0.0 * x[0], 1.0 + 0.0 * x[0], x[0]])),
    ]
    cofields = [
        OneFormField(chart, lambda x: np.array([0.0 * x[0], -x[0], 1.0 + 0.0 * x[0]])),
    ]
    D = foliation_sum(fields, cofields=cofields, almost_dirac=True, backend=DUAL)
    return Scenario(
        name="almost_dirac_rolling",
        description="non-involutive contact-type distribution; isotropic but "
                    "not closed under the bracket",
        chart=chart,
        structure=D,
        dynamics=None,
        expected_involutivity_failure=True,
    )


_FACTORIES = {
    "canonical_oscillator": _canonical_oscillator,
    "x2_poisson": _x2_poisson,
    "mixed_r4": _mixed_r4,
    "lie_poisson_so3": _lie_poisson_so3,
    "magnetic_larmor": _magnetic_larmor,
    "holonomic_pendulum": _holonomic_pendulum,
    "regular_foliation": _regular_foliation,
    "almost_dirac_rolling": _almost_dirac_rolling,
}


@functools.lru_cache(maxsize=None)
def builtin(name: str) -> Scenario:
    """Catalog lookup; the structure is verified at 100 samples on first build."""
    if name not in _FACTORIES:
        raise KeyError(f"unknown scenario {name!r}; choose from {BUILTIN_NAMES}")
    scenario = _FACTORIES[name]()
    report = verify_structure(scenario.structure, scenario.structure_samples(100, seed=0))
    if not (report.rank_ok and report.isotropy_ok):
        raise StructureError(
            f"scenario {name}: frame checks failed "
            f"(isotropy {report.isotropy_max:.3e}, rank_ok {report.rank_ok})")
    if not scenario.structure.almost_dirac and not report.involutivity_ok:
        raise StructureError(
            f"scenario {name}: involutivity residual {report.involutivity_max:.3e}")
    if scenario.expected_involutivity_failure and report.involutivity_ok:
        raise StructureError(
            f"scenario {name}: expected an involutivity defect, found none")
    return scenario
