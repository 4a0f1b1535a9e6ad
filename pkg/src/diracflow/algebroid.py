"""Frame-presented Lie algebroids over a single chart.

An algebroid is given by an anchor matrix field and the bracket
coefficients of a global frame.  The differential, horizontality checks
and leaf restriction all operate pointwise; nothing is certified beyond
the sampled points.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import BackendError, LeafMismatchError
from .fields import Chart, ChartMap, DiffBackend, DEFAULT_BACKEND, lie_bracket

__all__ = [
    "FrameAlgebroid",
    "AlgebroidForm",
    "HorizontalityReport",
    "anchor_kernel",
    "lichnerowicz_d",
    "lichnerowicz_d_value",
    "horizontality_report",
    "leaf_restrict",
    "anchor_compatibility_residual",
]

ANCHOR_RANK_TOL = 1e-9


@dataclass(frozen=True)
class FrameAlgebroid:
    """Algebroid presented by a rank-r frame over one chart.

    ``anchor(x)`` returns the n x r matrix whose columns are the anchored
    frame fields; ``frame_bracket(i, j, x)`` returns the coefficient
    vector of [e_i, e_j](x) in the frame.  ``sections`` optionally keeps
    the generating sections for bracket recomputation.
    """

    chart: Chart
    rank: int
    anchor: Callable[[np.ndarray], np.ndarray]
    frame_bracket: Callable[[int, int, np.ndarray], np.ndarray]
    sections: tuple | None = None
    backend: DiffBackend = DEFAULT_BACKEND

    def anchor_at(self, x) -> np.ndarray:
        rho = np.asarray(self.anchor(np.asarray(x, dtype=float)), dtype=float)
        if rho.shape != (self.chart.dim, self.rank):
            raise BackendError(f"anchor returned shape {rho.shape}")
        return rho


@dataclass(frozen=True)
class AlgebroidForm:
    """Degree-k form: a map from points to antisymmetric k-arrays over frame indices."""

    degree: int
    coeff: Callable[[np.ndarray], np.ndarray]

    def value(self, x) -> np.ndarray:
        v = np.asarray(self.coeff(np.asarray(x, dtype=float)), dtype=float)
        if v.ndim != self.degree:
            raise BackendError(
                f"degree-{self.degree} form returned array of ndim {v.ndim}")
        return v


def tangent_algebroid(chart: Chart, backend: DiffBackend = DEFAULT_BACKEND) -> FrameAlgebroid:
    """The tangent bundle in its coordinate frame: identity anchor, zero brackets."""
    n = chart.dim
    eye = np.eye(n)
    zero = np.zeros(n)
    return FrameAlgebroid(
        chart=chart,
        rank=n,
        anchor=lambda x: eye,
        frame_bracket=lambda i, j, x: zero,
        backend=backend,
    )


def anchor_kernel(A: FrameAlgebroid, x, tol: float = ANCHOR_RANK_TOL) -> np.ndarray:
    """Orthonormal basis of ker(rho_x) as columns of an r x k matrix.

    Singular values <= tol * sigma_max count as zero; the basis is empty
    when the anchor is injective at ``x``.
    """
    rho = A.anchor_at(x)
    u, s, vt = np.linalg.svd(rho)
    if s.size == 0 or s[0] == 0.0:
        return np.eye(A.rank)
    nullity = int(np.sum(s <= tol * s[0])) + (A.rank - s.size)
    if nullity == 0:
        return np.zeros((A.rank, 0))
    return vt[-nullity:].T


def _write_antisymmetric(out: np.ndarray, idx: tuple[int, ...], value: float) -> None:
    for perm in itertools.permutations(range(len(idx))):
        sign = _perm_sign(perm)
        out[tuple(idx[p] for p in perm)] = sign * value


def _perm_sign(perm: Sequence[int]) -> float:
    sign = 1.0
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j = i
        length = 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def lichnerowicz_d(A: FrameAlgebroid, eta: AlgebroidForm, x) -> np.ndarray:
    """Degree-(k+1) coefficient array of d_A eta at ``x``.

    Uses the alternating-sum formula: anchored derivatives of the
    coefficient functions plus bracket insertions.  For k = 0 the result
    is the anchored gradient xi -> rho(xi)(f).
    """
    k = eta.degree
    r = A.rank
    if k >= r:
        raise ValueError(f"cannot raise degree {k} on a rank-{r} algebroid")
    x = A.chart.require(x)
    rho = A.anchor_at(x)
    dcoef = A.backend.derivatives(eta.coeff, x)   # shape (r,)*k + (n,)
    eta_val = eta.value(x) if k > 0 else None

    out = np.zeros((r,) * (k + 1))
    for idx in itertools.combinations(range(r), k + 1):
        total = 0.0
        for a, ia in enumerate(idx):
            rest = idx[:a] + idx[a + 1:]
            grad = dcoef[rest]                     # (n,) derivative of eta_rest
            total += (-1.0) ** a * float(grad @ rho[:, ia])
        if k > 0:
            for a in range(k + 1):
                for b in range(a + 1, k + 1):
                    coeffs = np.asarray(
                        A.frame_bracket(idx[a], idx[b], x), dtype=float)
                    rest = tuple(idx[c] for c in range(k + 1) if c not in (a, b))
                    # eta(bracket, rest) = sum_m c^m eta[m, rest]
                    contraction = float(coeffs @ eta_val[(slice(None),) + rest])
                    total += (-1.0) ** (a + b) * contraction
        _write_antisymmetric(out, idx, total)
    return out


def lichnerowicz_d_value(A: FrameAlgebroid, eta: AlgebroidForm, x) -> np.ndarray:
    """d_A eta at ``x``; identically zero above the top exterior degree."""
    if eta.degree >= A.rank:
        return np.zeros((A.rank,) * (eta.degree + 1))
    return lichnerowicz_d(A, eta, x)


def _kernel_contraction(value: np.ndarray, kernel: np.ndarray) -> float:
    """Largest |iota_v value| over kernel basis columns v (first-slot contraction)."""
    worst = 0.0
    for col in range(kernel.shape[1]):
        v = kernel[:, col]
        if value.ndim == 0:
            continue
        contracted = np.tensordot(v, value, axes=(0, 0))
        worst = max(worst, float(np.max(np.abs(contracted))) if contracted.ndim
                    else abs(float(contracted)))
    return worst


@dataclass
class HorizontalityReport:
    eta_horizontal: bool
    d_eta_horizontal: bool
    max_eta_contraction: float
    max_d_eta_contraction: float
    worst_point: np.ndarray | None
    tol: float


def horizontality_report(A: FrameAlgebroid, eta: AlgebroidForm,
                         samples: Sequence, tol: float = 1e-8,
                         rank_tol: float = ANCHOR_RANK_TOL) -> HorizontalityReport:
    """Contract eta and d_A eta with the anchor kernel at every sample."""
    samples = list(samples)
    if not samples:
        raise ValueError("horizontality_report needs at least one sample")
    worst_eta = 0.0
    worst_d = 0.0
    worst_point = None
    for x in samples:
        x = np.asarray(x, dtype=float)
        kernel = anchor_kernel(A, x, rank_tol)
        if kernel.shape[1] == 0:
            continue
        c_eta = _kernel_contraction(eta.value(x), kernel)
        c_d = _kernel_contraction(lichnerowicz_d_value(A, eta, x), kernel)
        if max(c_eta, c_d) > max(worst_eta, worst_d):
            worst_point = x
        worst_eta = max(worst_eta, c_eta)
        worst_d = max(worst_d, c_d)
    return HorizontalityReport(
        eta_horizontal=worst_eta <= tol,
        d_eta_horizontal=worst_d <= tol,
        max_eta_contraction=worst_eta,
        max_d_eta_contraction=worst_d,
        worst_point=worst_point,
        tol=tol,
    )


def leaf_restrict(A: FrameAlgebroid, eta: AlgebroidForm, psi: ChartMap,
                  x_hat, tol: float = 1e-8) -> np.ndarray:
    """Value of the induced leaf form at psi(x_hat), as a d-dim antisymmetric array.

    For each leaf coordinate direction u the frame element xi_u solves
    rho(psi(x_hat)) xi_u = psi_* u in least squares; horizontality of eta
    makes the contraction independent of the solution choice.
    """
    x_hat = psi.source.require(x_hat)
    x = psi(x_hat)
    tangent = psi.jacobian(x_hat, A.backend)       # (n, d)
    rho = A.anchor_at(x)
    xi, *_ = np.linalg.lstsq(rho, tangent, rcond=None)
    residual = rho @ xi - tangent
    for col in range(tangent.shape[1]):
        r = float(np.linalg.norm(residual[:, col]))
        if r > tol * (1.0 + float(np.linalg.norm(tangent[:, col]))):
            raise LeafMismatchError(
                f"tangent direction {col} at {list(x_hat)} is not in the anchor "
                f"image (residual {r:.3e})")
    value = eta.value(x)
    if eta.degree == 0:
        return value
    out = value
    for _ in range(eta.degree):
        out = np.tensordot(out, xi, axes=(0, 0))
    return out


def anchor_compatibility_residual(A: FrameAlgebroid, samples: Sequence,
                                  anchored_fields: Sequence | None = None) -> float:
    """Max norm of rho([e_i,e_j]) - [rho(e_i), rho(e_j)] over samples.

    ``anchored_fields`` may supply the anchored frame as VectorFields;
    otherwise they are built from anchor columns.
    """
    from .fields import VectorField

    if anchored_fields is None:
        anchored_fields = [
            VectorField(A.chart, lambda x, i=i: np.asarray(A.anchor(x))[:, i])
            for i in range(A.rank)
        ]
    worst = 0.0
    for x in samples:
        x = np.asarray(x, dtype=float)
        rho = A.anchor_at(x)
        for i in range(A.rank):
            for j in range(i + 1, A.rank):
                lhs = rho @ np.asarray(A.frame_bracket(i, j, x), dtype=float)
                rhs = lie_bracket(anchored_fields[i], anchored_fields[j], x, A.backend)
                worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst
