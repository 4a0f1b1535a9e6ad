"""Dirac structures on coordinate charts and variational integration of
their dynamics: Courant-bracket calculus, pointwise structure checks,
horizontal-cochain verification, Hamiltonian and discrete Euler-Lagrange
stepping, and a discrete variational boundary solver."""

__version__ = "0.1.0"

from .errors import (
    AttainabilityError,
    BackendError,
    ChartMismatchError,
    DiracflowError,
    DomainError,
    LeafMismatchError,
    SolveDivergenceError,
    StructureError,
)
from .fields import (
    Chart,
    ChartMap,
    DiffBackend,
    Dual,
    OneFormField,
    ScalarField,
    SkewMatrixField,
    VectorField,
    exterior_d_oneform,
    gradient,
    jacobian,
    lie_bracket,
    lie_derivative_bivector,
    lie_derivative_oneform,
    poisson_jacobi_residual,
    two_form_closedness_residual,
)
from .algebroid import (
    AlgebroidForm,
    FrameAlgebroid,
    anchor_kernel,
    horizontality_report,
    leaf_restrict,
    lichnerowicz_d,
    lichnerowicz_d_value,
)
from .dirac import (
    CONVENTIONS,
    CourantSection,
    DiracStructure,
    PointFrame,
    build_dirac,
    canonical_two_form,
    check_poisson_primitive,
    check_primitive,
    cotangent_lift,
    courant_bracket,
    courant_pairing,
    dirac_algebroid,
    foliation_sum,
    gauge_transform,
    graph_of_form,
    graph_of_poisson,
    hamiltonian_solve,
    membership_residual,
    omega_D_form,
    omega_D_matrix,
    point_frame,
    section,
    verify_structure,
    zero_section,
)
from .mechanics import (
    CotangentCovector,
    Lagrangian,
    fiber_derivative,
    ils_residual,
    legendre_transform,
    tulczyjew_beta,
)
from .integrators import (
    DiscretePath,
    IlsFunctional,
    IntegratorConfig,
    Theorem1Functional,
    Trajectory,
    constrained_el_step,
    discrete_trajectory,
    dvp_solve,
    integrate_dirac_hamiltonian,
    magnetic_el_step,
    stationarity_residual,
    velocity_start,
)
from .scenarios import Scenario, builtin, builtin_names, casimirs
