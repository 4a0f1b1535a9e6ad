"""Courant calculus on TM + T*M and frame-presented Dirac structures.

Conventions (pinned by the unit tests, see README):

* pairing  <(v,a),(w,b)> = a(w) + b(v), no 1/2 factor;
* Courant bracket in its skew form;
* interior product iota_v w = w(v, .), so the covector of a graph frame
  column is the matrix row;
* omega_D((v,a),(w,b)) = a(w) - b(v); on the graph of a 2-form w this
  evaluates to 2w in the coordinate frame;
* canonical phase-space 2-form dq^i ^ dp_i with block matrix
  [[0, I], [-I, 0]] acting on (dq, dp).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .algebroid import AlgebroidForm, FrameAlgebroid, horizontality_report
from .errors import BackendError, ChartMismatchError, StructureError
from .fields import (
    Chart,
    Dual,
    ChartMap,
    DiffBackend,
    DEFAULT_BACKEND,
    OneFormField,
    ScalarField,
    SkewMatrixField,
    VectorField,
    gradient,
    lie_bracket,
    lie_derivative_bivector,
    lie_derivative_oneform,
    poisson_jacobi_residual,
    two_form_closedness_residual,
)
from .sampling import validation_samples

__all__ = [
    "CourantSection",
    "DiracStructure",
    "PointFrame",
    "courant_pairing",
    "courant_bracket",
    "build_dirac",
    "graph_of_form",
    "graph_of_poisson",
    "foliation_sum",
    "gauge_transform",
    "cotangent_lift",
    "phase_chart",
    "canonical_two_form",
    "point_frame",
    "verify_structure",
    "membership_residual",
    "omega_D_matrix",
    "omega_D_form",
    "dirac_algebroid",
    "check_primitive",
    "check_poisson_primitive",
    "hamiltonian_solve",
]

ISOTROPY_TOL = 1e-8
INVOLUTIVITY_TOL = 1e-6
CONSTRUCTION_TOL = 1e-6
RANK_TOL = 1e-9

# single source of truth for every sign-sensitive choice; pinned by tests
CONVENTIONS = {
    "pairing": "<(v,a),(w,b)> = a(w) + b(v), no 1/2 factor",
    "bracket": "skew Courant bracket ([X,Y], L_X b - L_Y a - 1/2 d(b(X) - a(Y)))",
    "interior_product": "iota_v omega = omega(v, .), covector row = v^i omega_ij",
    "omega_D": "omega_D((v,a),(w,b)) = a(w) - b(v); equals twice the base form "
               "on graph frames",
    "canonical_two_form": "dq^i ^ dp_i with block matrix [[0, I], [-I, 0]]",
    "tulczyjew_differential": "(-dL/dq, v) based at (q, dL/dv)",
    "variational_one_form": "the dynamics-reproducing 1-cochain satisfies "
                            "d_D theta = omega_D / 2; the primitive checked by "
                            "check_primitive satisfies d_D theta = omega_D",
    "angular_momentum_bivector": "pi(m) = [[0,-m3,m2],[m3,0,-m1],[-m2,m1,0]] so "
                                 "Hamiltonian directions are m x grad(H)",
}


@dataclass(frozen=True)
class CourantSection:
    """A section (X, alpha) of TM + T*M over one chart."""

    X: VectorField
    alpha: OneFormField

    def __post_init__(self):
        if self.X.chart is not self.alpha.chart:
            raise ChartMismatchError("section parts live on different charts")

    @property
    def chart(self) -> Chart:
        return self.X.chart

    def value(self, x) -> tuple[np.ndarray, np.ndarray]:
        return self.X.value(x), self.alpha.value(x)


def section(chart: Chart, vfunc: Callable, afunc: Callable,
            name: str = "") -> CourantSection:
    return CourantSection(VectorField(chart, vfunc, name=name),
                          OneFormField(chart, afunc, name=name))


def zero_section(chart: Chart) -> CourantSection:
    z = np.zeros(chart.dim)
    return section(chart, lambda x: z, lambda x: z, name="0")


def courant_pairing(s1: CourantSection, s2: CourantSection, x) -> float:
    """<(v,a),(w,b)> = a(w) + b(v)."""
    if s1.chart is not s2.chart:
        raise ChartMismatchError("pairing needs a shared chart")
    v1, a1 = s1.value(x)
    v2, a2 = s2.value(x)
    return float(a1 @ v2 + a2 @ v1)


def courant_bracket(s1: CourantSection, s2: CourantSection, x,
                    backend: DiffBackend | None = None
                    ) -> tuple[np.ndarray, np.ndarray]:
    """Skew Courant bracket value ([X,Y], L_X b - L_Y a - 1/2 d(b(X) - a(Y)))."""
    if s1.chart is not s2.chart:
        raise ChartMismatchError("bracket needs a shared chart")
    backend = backend or DEFAULT_BACKEND
    chart = s1.chart
    vec = lie_bracket(s1.X, s2.X, x, backend)
    lxb = lie_derivative_oneform(s1.X, s2.alpha, x, backend)
    lya = lie_derivative_oneform(s2.X, s1.alpha, x, backend)

    def pair_scalar(p):
        return (np.dot(np.asarray(s2.alpha.func(p)), np.asarray(s1.X.func(p)))
                - np.dot(np.asarray(s1.alpha.func(p)), np.asarray(s2.X.func(p))))

    d_pair = gradient(ScalarField(chart, pair_scalar), x, backend)
    return vec, lxb - lya - 0.5 * d_pair


@dataclass(frozen=True)
class PointFrame:
    """Pointwise frame of a Dirac structure: a 2m x m matrix spanning D_x.

    The top block holds vector parts, the bottom block covector parts.
    """

    x: np.ndarray
    B: np.ndarray

    @property
    def dim(self) -> int:
        return self.B.shape[0] // 2

    @property
    def vector_block(self) -> np.ndarray:
        return self.B[: self.dim]

    @property
    def covector_block(self) -> np.ndarray:
        return self.B[self.dim:]


@dataclass(frozen=True)
class DiracStructure:
    """A rank-n frame of Courant sections over an n-dim chart, plus its recipe.

    ``kind`` records the constructor (graph_form, graph_poisson, foliation,
    gauge, cotangent_lift, custom) and ``data`` keeps the defining data so
    that frame-bracket coefficients can be evaluated in closed form where
    one exists.
    """

    chart: Chart
    sections: tuple[CourantSection, ...]
    kind: str
    data: dict = field(default_factory=dict)
    almost_dirac: bool = False
    backend: DiffBackend = DEFAULT_BACKEND

    def __post_init__(self):
        if len(self.sections) != self.chart.dim:
            raise StructureError(
                f"need {self.chart.dim} frame sections, got {len(self.sections)}")

    @property
    def dim(self) -> int:
        return self.chart.dim

    def frame_bracket_coefficients(self, i: int, j: int, x) -> np.ndarray:
        """Coefficients of [e_i, e_j](x) in the frame."""
        x = np.asarray(x, dtype=float)
        n = self.dim
        if i == j:
            return np.zeros(n)
        if self.kind == "graph_form":
            return np.zeros(n)
        if self.kind == "graph_poisson":
            pi: SkewMatrixField = self.data["pi"]
            dP = self.backend.derivatives(pi.func, x)
            return -dP[i, j, :]
        if self.kind == "gauge":
            return self.data["base"].frame_bracket_coefficients(i, j, x)
        if self.kind == "cotangent_lift":
            base: DiracStructure = self.data["base"]
            nb = base.dim
            out = np.zeros(n)
            if i < nb and j < nb:
                out[:nb] = base.frame_bracket_coefficients(i, j, x[:nb])
            return out
        # foliation / custom: project the numerical bracket onto the frame
        frame = point_frame(self, x)
        vec, cov = courant_bracket(self.sections[i], self.sections[j], x,
                                   self.backend)
        coeffs, *_ = np.linalg.lstsq(frame.B, np.concatenate([vec, cov]),
                                     rcond=None)
        return coeffs


def point_frame(D: DiracStructure, x) -> PointFrame:
    """Evaluate the frame at ``x`` and verify it has full column rank."""
    x = D.chart.require(x)
    n = D.dim
    B = np.empty((2 * n, n))
    for col, s in enumerate(D.sections):
        v, a = s.value(x)
        B[:n, col] = v
        B[n:, col] = a
    s = np.linalg.svd(B, compute_uv=False)
    if s[-1] <= RANK_TOL * s[0]:
        raise StructureError(f"frame is rank-deficient at {list(x)}")
    return PointFrame(x=x, B=B)


def membership_residual(F: PointFrame, w, beta) -> float:
    """Pairing-based membership test: 0 iff (w, beta) lies in span(B).

    residual = |B^T P [w; beta]| / (1 + |[w; beta]|) with the pairing
    matrix P = [[0, I], [I, 0]]; exactness for members follows from
    maximal isotropy.
    """
    w = np.asarray(w, dtype=float)
    beta = np.asarray(beta, dtype=float)
    paired = np.concatenate([beta, w])      # P [w; beta]
    num = float(np.linalg.norm(F.B.T @ paired))
    den = 1.0 + float(np.linalg.norm(np.concatenate([w, beta])))
    return num / den


def omega_D_matrix(F: PointFrame) -> np.ndarray:
    """Skew matrix M_ij = alpha_i(v_j) - alpha_j(v_i) over frame indices."""
    C = F.covector_block.T @ F.vector_block
    return C - C.T


def omega_D_form(D: DiracStructure) -> AlgebroidForm:
    """The canonical 2-cochain as an algebroid form over the frame.

    The coefficient map works from the raw section callables so it stays
    differentiable under both backends; at float points it agrees with
    :func:`omega_D_matrix` of the point frame.
    """
    n = D.dim

    def coeff(x):
        vals = [(np.asarray(s.X.func(x)), np.asarray(s.alpha.func(x)))
                for s in D.sections]
        is_obj = any(v.dtype == object or a.dtype == object for v, a in vals)
        out = np.zeros((n, n), dtype=object if is_obj else float)
        for i in range(n):
            for j in range(i + 1, n):
                val = (np.dot(vals[i][1], vals[j][0])
                       - np.dot(vals[j][1], vals[i][0]))
                out[i, j] = val
                out[j, i] = -1.0 * val
        return out

    return AlgebroidForm(degree=2, coeff=coeff)


def dirac_algebroid(D: DiracStructure) -> FrameAlgebroid:
    """The Lie algebroid of an involutive Dirac structure (anchor = vector parts)."""

    def anchor(x):
        return point_frame(D, x).vector_block

    return FrameAlgebroid(
        chart=D.chart,
        rank=D.dim,
        anchor=anchor,
        frame_bracket=D.frame_bracket_coefficients,
        sections=D.sections,
        backend=D.backend,
    )


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------

def graph_of_form(omega: SkewMatrixField, samples: Sequence | None = None,
                  tol: float = CONSTRUCTION_TOL, almost_dirac: bool = False,
                  backend: DiffBackend | None = None) -> DiracStructure:
    """Graph of a closed 2-form: frame columns (d_i, row_i of the matrix)."""
    if omega.variance != SkewMatrixField.COVARIANT:
        raise StructureError("graph_of_form needs a covariant skew field")
    backend = backend or DEFAULT_BACKEND
    chart = omega.chart
    pts = validation_samples(chart, samples)
    if not almost_dirac:
        worst = max(two_form_closedness_residual(omega, x, backend) for x in pts)
        if worst > tol:
            raise StructureError(
                f"2-form is not closed: residual {worst:.3e} > {tol:.3e}")
    n = chart.dim
    eye = np.eye(n)
    sections = tuple(
        section(chart,
                lambda x, i=i: eye[i],
                lambda x, i=i: np.asarray(omega.func(x))[i, :],
                name=f"graph_form[{i}]")
        for i in range(n)
    )
    return DiracStructure(chart, sections, "graph_form", {"omega": omega},
                          almost_dirac, backend)


def graph_of_poisson(pi: SkewMatrixField, samples: Sequence | None = None,
                     tol: float = CONSTRUCTION_TOL, almost_dirac: bool = False,
                     backend: DiffBackend | None = None) -> DiracStructure:
    """Graph of a Poisson bivector: frame columns (column_i of the matrix, dx_i)."""
    if pi.variance != SkewMatrixField.CONTRAVARIANT:
        raise StructureError("graph_of_poisson needs a contravariant skew field")
    backend = backend or DEFAULT_BACKEND
    chart = pi.chart
    pts = validation_samples(chart, samples)
    if not almost_dirac:
        worst = max(poisson_jacobi_residual(pi, x, backend) for x in pts)
        if worst > tol:
            raise StructureError(
                f"bivector fails the Jacobi identity: residual {worst:.3e} > {tol:.3e}")
    n = chart.dim
    eye = np.eye(n)
    sections = tuple(
        section(chart,
                lambda x, i=i: np.asarray(pi.func(x))[:, i],
                lambda x, i=i: eye[i],
                name=f"graph_poisson[{i}]")
        for i in range(n)
    )
    return DiracStructure(chart, sections, "graph_poisson", {"pi": pi},
                          almost_dirac, backend)


def foliation_sum(fields: Sequence[VectorField],
                  g: ChartMap | None = None,
                  cofields: Sequence[OneFormField] | None = None,
                  samples: Sequence | None = None,
                  tol: float = CONSTRUCTION_TOL, almost_dirac: bool = False,
                  backend: DiffBackend | None = None) -> DiracStructure:
    """Sum of a distribution F and its annihilator.

    F is spanned by ``fields``; the annihilator is spanned either by the
    differentials of a submersion ``g`` (whose level sets are the leaves)
    or by explicitly supplied ``cofields``.  The latter route admits
    non-involutive distributions when ``almost_dirac`` is set.
    """
    if not fields:
        raise StructureError("foliation_sum needs at least one spanning field")
    backend = backend or DEFAULT_BACKEND
    chart = fields[0].chart
    n = chart.dim
    k = len(fields)
    if g is None and cofields is None:
        raise StructureError("foliation_sum needs a submersion g or explicit cofields")
    if cofields is None:
        # differentials of g are only first-order data, so the structure's
        # own bracket computations stay on central differences
        fd = DEFAULT_BACKEND if backend.mode == "central" else DiffBackend()
        backend = fd

        def dg_row(x, j):
            d = fd.derivatives(g.func, np.asarray(x, dtype=float))
            return d[j] if d.ndim == 2 else d

        cofields = [
            OneFormField(chart, lambda x, j=j: dg_row(x, j),
                         name=f"d{g.name or 'g'}[{j}]")
            for j in range(g.target.dim)
        ]
    if k + len(cofields) != n:
        raise StructureError(
            f"{k} fields and {len(cofields)} cofields do not frame a dim-{n} chart")

    pts = validation_samples(chart, samples)
    for x in pts:
        mat = np.stack([f.value(x) for f in fields], axis=1)
        if np.linalg.matrix_rank(mat, tol=1e-10 * max(1.0, float(np.max(np.abs(mat))))) < k:
            raise StructureError(f"spanning fields are dependent at {list(x)}")
        for beta in cofields:
            pairing = beta.value(x) @ mat
            if np.max(np.abs(pairing)) > tol:
                raise StructureError(
                    f"cofield does not annihilate the distribution at {list(x)}")

    zero = np.zeros(n)
    sections = tuple(
        [section(chart, f.func, lambda x: zero, name=f"F[{a}]")
         for a, f in enumerate(fields)]
        + [section(chart, lambda x: zero, beta.func, name=f"F_ann[{j}]")
           for j, beta in enumerate(cofields)]
    )
    D = DiracStructure(chart, sections, "foliation",
                       {"fields": tuple(fields), "cofields": tuple(cofields), "g": g},
                       almost_dirac, backend)
    if not almost_dirac:
        report = verify_structure(D, pts)
        if report.involutivity_max > tol:
            raise StructureError(
                "distribution is not involutive "
                f"(residual {report.involutivity_max:.3e}); pass almost_dirac=True "
                "to keep it as an almost-Dirac structure")
    return D


def build_dirac(spec: dict, samples: Sequence | None = None,
                tol: float = CONSTRUCTION_TOL, almost_dirac: bool = False,
                backend: DiffBackend | None = None) -> DiracStructure:
    """Dispatch on a one-key constructor spec: form / poisson / foliation."""
    keys = set(spec) & {"form", "poisson", "foliation"}
    if len(keys) != 1:
        raise StructureError(f"spec must contain exactly one of form/poisson/foliation, got {sorted(spec)}")
    kind = keys.pop()
    if kind == "form":
        return graph_of_form(spec["form"], samples, tol, almost_dirac, backend)
    if kind == "poisson":
        return graph_of_poisson(spec["poisson"], samples, tol, almost_dirac, backend)
    fol = spec["foliation"]
    return foliation_sum(fol["fields"], fol.get("g"), fol.get("cofields"),
                         samples, tol, almost_dirac, backend)


def gauge_transform(D: DiracStructure, omega: SkewMatrixField,
                    samples: Sequence | None = None,
                    tol: float = CONSTRUCTION_TOL) -> DiracStructure:
    """Shift covector parts by iota_v omega for a closed 2-form omega."""
    if omega.chart is not D.chart:
        raise ChartMismatchError("gauge form must live on the structure's chart")
    if omega.variance != SkewMatrixField.COVARIANT:
        raise StructureError("gauge form must be covariant")
    pts = validation_samples(D.chart, samples)
    worst = max(two_form_closedness_residual(omega, x, D.backend) for x in pts)
    if worst > tol:
        raise StructureError(
            f"gauge form is not closed: residual {worst:.3e} > {tol:.3e}")

    def gauged(s: CourantSection) -> CourantSection:
        def afunc(x, s=s):
            v = np.asarray(s.X.func(x))
            w = np.asarray(omega.func(x))
            # iota_v omega = omega(v, .) = v^i w_ij
            return np.asarray(s.alpha.func(x)) + np.dot(v, w)
        return CourantSection(s.X, OneFormField(D.chart, afunc,
                                                name=f"{s.alpha.name}+gauge"))

    sections = tuple(gauged(s) for s in D.sections)
    return DiracStructure(D.chart, sections, "gauge",
                          {"base": D, "omega": omega}, D.almost_dirac, D.backend)


def phase_chart(base: Chart) -> Chart:
    """The (q, p) chart over a base chart, with a default momentum box."""
    names = tuple(f"q_{c}" for c in base.coordinate_names) + \
        tuple(f"p_{c}" for c in base.coordinate_names)
    if base.sample_box is not None:
        lo, hi = base.sample_box
        box = (tuple(lo) + tuple(-1.0 for _ in lo),
               tuple(hi) + tuple(1.0 for _ in hi))
    else:
        box = None
    if base.domain_check is None:
        check = None
    else:
        def check(x, base=base):
            return base.domain_check(np.asarray(x)[: base.dim])
    return Chart(dim=2 * base.dim, coordinate_names=names,
                 domain_check=check, sample_box=box)


def canonical_two_form(chart: Chart) -> SkewMatrixField:
    """dq^i ^ dp_i on a phase chart: block matrix [[0, I], [-I, 0]]."""
    if chart.dim % 2:
        raise StructureError("canonical form needs an even-dimensional chart")
    n = chart.dim // 2
    m = np.zeros((2 * n, 2 * n))
    m[:n, n:] = np.eye(n)
    m[n:, :n] = -np.eye(n)
    return SkewMatrixField(chart, lambda x: m, SkewMatrixField.COVARIANT,
                           name="Omega")


def cotangent_lift(D: DiracStructure, with_gauge: bool,
                   chart: Chart | None = None) -> DiracStructure:
    """Pull back along the cotangent projection, optionally gauged by dq^i ^ dp_i.

    The lifted frame holds, for each base column (X_i, a_i), the section
    ((X_i, 0), (a_i, 0)) plus one vertical section ((0, d/dp_j), 0) per
    base coordinate; the gauge then adds iota_(vector) Omega.
    """
    nb = D.dim
    chart = chart or phase_chart(D.chart)
    if chart.dim != 2 * nb:
        raise StructureError("lift chart must have twice the base dimension")
    zero_b = np.zeros(nb)
    eye = np.eye(nb)

    def lifted(s: CourantSection, idx: int) -> CourantSection:
        return section(
            chart,
            lambda x, s=s: np.concatenate([np.asarray(s.X.func(x[:nb])), zero_b]),
            lambda x, s=s: np.concatenate([np.asarray(s.alpha.func(x[:nb])), zero_b]),
            name=f"lift[{idx}]")

    def vertical(j: int) -> CourantSection:
        return section(
            chart,
            lambda x, j=j: np.concatenate([zero_b, eye[j]]),
            lambda x: np.zeros(2 * nb),
            name=f"vertical[{j}]")

    sections = tuple(lifted(s, i) for i, s in enumerate(D.sections)) + \
        tuple(vertical(j) for j in range(nb))
    lift = DiracStructure(chart, sections, "cotangent_lift",
                          {"base": D, "with_gauge": with_gauge},
                          D.almost_dirac, D.backend)
    if not with_gauge:
        return lift
    if chart.sample_box is not None:
        lo, hi = chart.sample_box
        center = 0.5 * (np.asarray(lo, dtype=float) + np.asarray(hi, dtype=float))
    else:
        center = np.zeros(chart.dim)
    gauged = gauge_transform(lift, canonical_two_form(chart), samples=[center])
    return replace(gauged, kind="cotangent_lift",
                   data={"base": D, "with_gauge": True})


# ---------------------------------------------------------------------------
# verification and solves
# ---------------------------------------------------------------------------

@dataclass
class StructureReport:
    isotropy_max: float
    involutivity_max: float
    rank_ok: bool
    isotropy_ok: bool
    involutivity_ok: bool
    samples_used: int

    @property
    def passed(self) -> bool:
        return self.rank_ok and self.isotropy_ok and self.involutivity_ok


def verify_structure(D: DiracStructure, samples: Sequence,
                     iso_tol: float = ISOTROPY_TOL,
                     inv_tol: float = INVOLUTIVITY_TOL) -> StructureReport:
    """Isotropy and involutivity residuals of the frame at the samples.

    Involutivity is measured through the tensor <[e_i, e_j], e_k> over all
    frame triples, which is tensorial on isotropic subbundles.
    """
    samples = list(samples)
    if not samples:
        raise ValueError("verify_structure needs at least one sample")
    n = D.dim
    iso_max = 0.0
    inv_max = 0.0
    rank_ok = True
    for x in samples:
        x = np.asarray(x, dtype=float)
        try:
            frame = point_frame(D, x)
        except StructureError:
            rank_ok = False
            continue
        scale = float(np.linalg.norm(frame.B)) ** 2
        pairing = frame.covector_block.T @ frame.vector_block
        iso = float(np.max(np.abs(pairing + pairing.T))) / max(scale, 1e-300)
        iso_max = max(iso_max, iso)
        for i in range(n):
            for j in range(i + 1, n):
                vec, cov = courant_bracket(D.sections[i], D.sections[j], x,
                                           D.backend)
                for k in range(n):
                    vk, ak = D.sections[k].value(x)
                    t = float(cov @ vk + ak @ vec)
                    inv_max = max(inv_max, abs(t))
    return StructureReport(
        isotropy_max=iso_max,
        involutivity_max=inv_max,
        rank_ok=rank_ok,
        isotropy_ok=iso_max <= iso_tol,
        involutivity_ok=inv_max <= inv_tol,
        samples_used=len(samples),
    )


@dataclass
class PrimitiveReport:
    horizontal: bool
    d_theta_equals_omega: bool
    max_horizontality_residual: float
    max_d_residual: float


def check_primitive(D: DiracStructure, tau: CourantSection, samples: Sequence,
                    tol: float = 1e-6) -> PrimitiveReport:
    """Check that the 1-cochain theta(s) = <tau, s> is a horizontal primitive.

    theta is horizontal when its contraction with the anchor kernel
    vanishes, and a primitive when d_D theta reproduces the canonical
    2-cochain matrix at every sample.
    """
    if tau.chart is not D.chart:
        raise ChartMismatchError("tau must live on the structure's chart")
    samples = [np.asarray(x, dtype=float) for x in samples]
    A = dirac_algebroid(D)

    def theta_coeff(x):
        # raw funcs keep the coefficients differentiable under both backends
        tv = np.asarray(tau.X.func(x))
        ta = np.asarray(tau.alpha.func(x))
        vals = [np.dot(ta, np.asarray(s.X.func(x)))
                + np.dot(np.asarray(s.alpha.func(x)), tv)
                for s in D.sections]
        if any(isinstance(v, Dual) for v in vals):
            out = np.empty(len(vals), dtype=object)
            out[:] = vals
            return out
        return np.array(vals, dtype=float)

    theta = AlgebroidForm(degree=1, coeff=theta_coeff)
    from .algebroid import lichnerowicz_d

    report = horizontality_report(A, theta, samples, tol)
    d_res = 0.0
    for x in samples:
        d_theta = lichnerowicz_d(A, theta, x)
        target = omega_D_matrix(point_frame(D, x))
        d_res = max(d_res, float(np.max(np.abs(d_theta - target))))
    return PrimitiveReport(
        horizontal=report.eta_horizontal and report.d_eta_horizontal,
        d_theta_equals_omega=d_res <= tol,
        max_horizontality_residual=max(report.max_eta_contraction,
                                       report.max_d_eta_contraction),
        max_d_residual=d_res,
    )


@dataclass
class PoissonPrimitiveReport:
    lie_condition: bool
    tangency: bool
    max_lie_residual: float
    max_tangency_residual: float


def check_poisson_primitive(pi: SkewMatrixField, E: VectorField,
                            samples: Sequence, tol: float = 1e-6,
                            backend: DiffBackend | None = None
                            ) -> PoissonPrimitiveReport:
    """Check L_E pi = pi and that E lies in the image of the bivector."""
    backend = backend or DEFAULT_BACKEND
    lie_res = 0.0
    tan_res = 0.0
    for x in samples:
        x = np.asarray(x, dtype=float)
        lie = lie_derivative_bivector(E, pi, x, backend)
        lie_res = max(lie_res, float(np.max(np.abs(lie - pi.value(x)))))
        P = pi.value(x)
        Ev = E.value(x)
        sol, *_ = np.linalg.lstsq(P, Ev, rcond=None)
        r = float(np.linalg.norm(P @ sol - Ev)) / (1.0 + float(np.linalg.norm(Ev)))
        tan_res = max(tan_res, r)
    return PoissonPrimitiveReport(
        lie_condition=lie_res <= tol,
        tangency=tan_res <= tol,
        max_lie_residual=lie_res,
        max_tangency_residual=tan_res,
    )


@dataclass
class HamiltonianSolveResult:
    v: np.ndarray
    kernel_dim: int
    residual: float
    coefficients: np.ndarray


def hamiltonian_solve(F: PointFrame, dH, tol: float = 1e-8,
                      rank_tol: float = RANK_TOL) -> HamiltonianSolveResult:
    """Least-squares solve of (covector block) c = dH with minimum-norm c.

    Returns the candidate Hamiltonian direction v = (vector block) c, the
    normalized solve residual and the nullity of the covector block; a
    residual above ``tol`` means no Hamiltonian direction exists at x.
    The caller decides whether that is fatal.
    """
    dH = np.asarray(dH, dtype=float)
    Ba = F.covector_block
    Bv = F.vector_block
    u, s, vt = np.linalg.svd(Ba)
    cutoff = rank_tol * (s[0] if s.size and s[0] > 0.0 else 1.0)
    rank = int(np.sum(s > cutoff))
    s_inv = np.zeros_like(s)
    s_inv[:rank] = 1.0 / s[:rank]
    c = vt.T[:, : s.size] @ (s_inv * (u.T[: s.size] @ dH))
    residual = float(np.linalg.norm(Ba @ c - dH)) / (1.0 + float(np.linalg.norm(dH)))
    return HamiltonianSolveResult(
        v=Bv @ c,
        kernel_dim=Ba.shape[1] - rank,
        residual=residual,
        coefficients=c,
    )
