"""Coordinate charts, smooth field values and the differentiation backend.

All geometry downstream is built from black-box coordinate functions on a
single chart.  Derivatives (Jacobians, Lie brackets, Lie derivatives,
exterior derivatives) are supplied by a :class:`DiffBackend`, either by
central finite differences or by forward-mode dual numbers.  Field
callables written with plain arithmetic and ``np.dot`` / ``np.sin`` style
operations work under both modes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import BackendError, ChartMismatchError, DomainError

__all__ = [
    "Chart",
    "ChartMap",
    "DiffBackend",
    "Dual",
    "ScalarField",
    "VectorField",
    "OneFormField",
    "SkewMatrixField",
    "jacobian",
    "gradient",
    "lie_bracket",
    "lie_derivative_oneform",
    "exterior_d_oneform",
    "lie_derivative_bivector",
    "two_form_closedness_residual",
    "poisson_jacobi_residual",
]

_CBRT_EPS = float(np.finfo(float).eps) ** (1.0 / 3.0)


class Dual:
    """Scalar carrying a value and a vector of partial derivatives.

    Supports the arithmetic and elementary functions needed by polynomial
    and trigonometric field definitions.  numpy ufuncs applied to object
    arrays of duals dispatch to the correspondingly named methods.
    """

    __slots__ = ("val", "eps")

    def __init__(self, val: float, eps: np.ndarray):
        self.val = float(val)
        self.eps = np.asarray(eps, dtype=float)

    # -- arithmetic ---------------------------------------------------
    def __add__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val + other.val, self.eps + other.eps)
        return Dual(self.val + other, self.eps)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val - other.val, self.eps - other.eps)
        return Dual(self.val - other, self.eps)

    def __rsub__(self, other):
        return Dual(other - self.val, -self.eps)

    def __mul__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val * other.val,
                        self.val * other.eps + other.val * self.eps)
        return Dual(self.val * other, self.eps * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Dual):
            v = self.val / other.val
            return Dual(v, (self.eps - v * other.eps) / other.val)
        return Dual(self.val / other, self.eps / other)

    def __rtruediv__(self, other):
        v = other / self.val
        return Dual(v, -v * self.eps / self.val)

    def __pow__(self, k):
        if isinstance(k, Dual):
            raise BackendError("dual exponents are not supported")
        return Dual(self.val ** k, k * self.val ** (k - 1) * self.eps)

    def __neg__(self):
        return Dual(-self.val, -self.eps)

    def __pos__(self):
        return self

    def __abs__(self):
        s = 1.0 if self.val >= 0.0 else -1.0
        return Dual(abs(self.val), s * self.eps)

    # -- comparisons act on the value part ----------------------------
    def __lt__(self, other):
        return self.val < _value(other)

    def __le__(self, other):
        return self.val <= _value(other)

    def __gt__(self, other):
        return self.val > _value(other)

    def __ge__(self, other):
        return self.val >= _value(other)

    # no __float__: coercing a dual to float would silently drop the
    # derivative part inside np.asarray(..., dtype=float)

    def __repr__(self):
        return f"Dual({self.val}, {self.eps})"

    # -- elementary functions (numpy ufunc hooks) ----------------------
    def sin(self):
        return Dual(math.sin(self.val), math.cos(self.val) * self.eps)

    def cos(self):
        return Dual(math.cos(self.val), -math.sin(self.val) * self.eps)

    def tan(self):
        t = math.tan(self.val)
        return Dual(t, (1.0 + t * t) * self.eps)

    def exp(self):
        e = math.exp(self.val)
        return Dual(e, e * self.eps)

    def log(self):
        return Dual(math.log(self.val), self.eps / self.val)

    def sqrt(self):
        r = math.sqrt(self.val)
        return Dual(r, 0.5 / r * self.eps)


def _value(x) -> float:
    return x.val if isinstance(x, Dual) else float(x)


def _parts(x, n: int) -> tuple[float, np.ndarray]:
    if isinstance(x, Dual):
        return x.val, x.eps
    return float(x), np.zeros(n)


@dataclass(frozen=True)
class Chart:
    """An open coordinate patch of dimension ``dim``.

    ``domain_check`` is an optional predicate that rejects points outside
    the open set; ``sample_box`` (pair of lower/upper corners) is used by
    constructors and scenarios to draw validation samples.
    """

    dim: int
    coordinate_names: tuple[str, ...] = ()
    domain_check: Callable[[np.ndarray], bool] | None = None
    sample_box: tuple[tuple[float, ...], tuple[float, ...]] | None = None

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("chart dimension must be >= 1")
        if not self.coordinate_names:
            names = tuple(f"x{i + 1}" for i in range(self.dim))
            object.__setattr__(self, "coordinate_names", names)
        if len(self.coordinate_names) != self.dim:
            raise ValueError("coordinate_names length must equal dim")

    def contains(self, x) -> bool:
        if self.domain_check is None:
            return True
        return bool(self.domain_check(np.asarray(x)))

    def require(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise DomainError(x, f"point has shape {x.shape}, chart dim is {self.dim}")
        if not self.contains(x):
            raise DomainError(x)
        return x


@dataclass(frozen=True)
class DiffBackend:
    """Differentiation configuration: ``central`` differences or ``dual`` numbers.

    In central mode the per-coordinate step is ``fd_step * max(1, |x_j|)``.
    Dual mode gives derivatives exact to rounding for composition-closed
    fields (plain arithmetic plus sin/cos/tan/exp/log/sqrt).
    """

    mode: str = "central"
    fd_step: float = _CBRT_EPS

    def __post_init__(self):
        if self.mode not in ("central", "dual"):
            raise ValueError(f"unknown backend mode {self.mode!r}")
        if self.fd_step <= 0.0:
            raise ValueError("fd_step must be positive")

    def derivatives(self, func: Callable, x: np.ndarray) -> np.ndarray:
        """Array of partials of ``func`` at ``x``, shaped ``func(x).shape + (n,)``."""
        x = np.asarray(x, dtype=float)
        n = x.shape[0]
        if self.mode == "central":
            return self._central(func, x, n)
        return self._dual(func, x, n)

    def _central(self, func, x, n):
        cols = []
        for j in range(n):
            h = self.fd_step * max(1.0, abs(x[j]))
            xp = x.copy()
            xm = x.copy()
            xp[j] += h
            xm[j] -= h
            fp = np.asarray(func(xp), dtype=float)
            fm = np.asarray(func(xm), dtype=float)
            cols.append((fp - fm) / (2.0 * h))
        out = np.stack(cols, axis=-1)
        if not np.all(np.isfinite(out)):
            raise BackendError(f"non-finite derivative at {list(x)}")
        return out

    def _dual(self, func, x, n):
        seeds = np.empty(n, dtype=object)
        eye = np.eye(n)
        for j in range(n):
            seeds[j] = Dual(x[j], eye[j])
        raw = np.asarray(func(seeds), dtype=object)
        out = np.empty(raw.shape + (n,), dtype=float)
        for idx in np.ndindex(raw.shape):
            _, eps = _parts(raw[idx], n)
            out[idx] = eps
        if not np.all(np.isfinite(out)):
            raise BackendError(f"non-finite derivative at {list(x)}")
        return out


DEFAULT_BACKEND = DiffBackend()
DUAL_BACKEND = DiffBackend(mode="dual")


def _backend(backend: DiffBackend | None) -> DiffBackend:
    return DEFAULT_BACKEND if backend is None else backend


class _Field:
    """Shared plumbing for chart-attached evaluable fields."""

    def __init__(self, chart: Chart, func: Callable, name: str = ""):
        self.chart = chart
        self.func = func
        self.name = name

    def __call__(self, x):
        return self.func(x)

    def __repr__(self):
        label = self.name or "<anonymous>"
        return f"{type(self).__name__}({label}, dim={self.chart.dim})"


class ScalarField(_Field):
    """Real-valued function on a chart."""

    def value(self, x) -> float:
        v = float(self.func(np.asarray(x, dtype=float)))
        if not math.isfinite(v):
            raise BackendError(f"non-finite value of {self!r} at {list(x)}")
        return v


class VectorField(_Field):
    """Vector field, components in the coordinate frame."""

    def value(self, x) -> np.ndarray:
        v = np.asarray(self.func(np.asarray(x, dtype=float)), dtype=float)
        if v.shape != (self.chart.dim,):
            raise BackendError(f"{self!r} returned shape {v.shape}")
        return v


class OneFormField(_Field):
    """Covector field, components against the coordinate frame."""

    def value(self, x) -> np.ndarray:
        v = np.asarray(self.func(np.asarray(x, dtype=float)), dtype=float)
        if v.shape != (self.chart.dim,):
            raise BackendError(f"{self!r} returned shape {v.shape}")
        return v


class SkewMatrixField(_Field):
    """Skew-matrix valued field: 2-forms (covariant) or bivectors (contravariant).

    The variance tag prevents mixing the two roles; values are checked to
    be antisymmetric to machine precision.
    """

    COVARIANT = "covariant"
    CONTRAVARIANT = "contravariant"

    def __init__(self, chart: Chart, func: Callable, variance: str, name: str = ""):
        if variance not in (self.COVARIANT, self.CONTRAVARIANT):
            raise ValueError(f"unknown variance {variance!r}")
        super().__init__(chart, func, name)
        self.variance = variance

    def value(self, x) -> np.ndarray:
        n = self.chart.dim
        m = np.asarray(self.func(np.asarray(x, dtype=float)), dtype=float)
        if m.shape != (n, n):
            raise BackendError(f"{self!r} returned shape {m.shape}")
        skew = np.max(np.abs(m + m.T))
        scale = 1.0 + np.max(np.abs(m))
        if skew > 1e-12 * scale:
            raise BackendError(f"{self!r} is not skew at {list(x)} (defect {skew:.2e})")
        return m


def constant_skew(chart: Chart, matrix, variance: str, name: str = "") -> SkewMatrixField:
    m = np.asarray(matrix, dtype=float)
    return SkewMatrixField(chart, lambda x, _m=m: _m, variance, name=name)


@dataclass(frozen=True)
class ChartMap:
    """Smooth map between charts, e.g. a leaf immersion or a submersion."""

    source: Chart
    target: Chart
    func: Callable
    name: str = ""

    def __call__(self, x):
        return np.asarray(self.func(np.asarray(x, dtype=float)), dtype=float)

    def jacobian(self, x, backend: DiffBackend | None = None) -> np.ndarray:
        """Tangent map as a ``target.dim x source.dim`` matrix."""
        x = self.source.require(x)
        return _backend(backend).derivatives(self.func, x)


def _require_same_chart(*fields) -> Chart:
    chart = fields[0].chart
    for f in fields[1:]:
        if f.chart is not chart:
            raise ChartMismatchError(f"{f!r} does not live on {chart!r}")
    return chart


def jacobian(f, x, backend: DiffBackend | None = None) -> np.ndarray:
    """Derivative matrix of a field at ``x``: rows are output components.

    For a :class:`ScalarField` the result is the 1 x n gradient row (the
    differential df).
    """
    x = f.chart.require(x)
    out = _backend(backend).derivatives(f.func, x)
    if out.ndim == 1:
        return out[np.newaxis, :]
    return out


def gradient(f: ScalarField, x, backend: DiffBackend | None = None) -> np.ndarray:
    """Gradient of a scalar field as a flat covector array."""
    return jacobian(f, x, backend)[0]


def lie_bracket(X: VectorField, Y: VectorField, x,
                backend: DiffBackend | None = None) -> np.ndarray:
    """[X, Y](x) = (DY) X - (DX) Y."""
    _require_same_chart(X, Y)
    x = X.chart.require(x)
    b = _backend(backend)
    dX = b.derivatives(X.func, x)
    dY = b.derivatives(Y.func, x)
    return dY @ X.value(x) - dX @ Y.value(x)


def lie_derivative_oneform(X: VectorField, alpha: OneFormField, x,
                           backend: DiffBackend | None = None) -> np.ndarray:
    """(L_X alpha)_i = X^j d_j alpha_i + alpha_j d_i X^j."""
    _require_same_chart(X, alpha)
    x = X.chart.require(x)
    b = _backend(backend)
    dA = b.derivatives(alpha.func, x)   # dA[i, j] = d_j alpha_i
    dX = b.derivatives(X.func, x)       # dX[i, j] = d_j X^i
    return dA @ X.value(x) + dX.T @ alpha.value(x)


def exterior_d_oneform(alpha: OneFormField, x,
                       backend: DiffBackend | None = None) -> np.ndarray:
    """(d alpha)_ij = d_i alpha_j - d_j alpha_i; the output is skew."""
    x = alpha.chart.require(x)
    dA = _backend(backend).derivatives(alpha.func, x)
    return dA.T - dA


def lie_derivative_bivector(E: VectorField, pi: SkewMatrixField, x,
                            backend: DiffBackend | None = None) -> np.ndarray:
    """(L_E pi)^ij = E^k d_k pi^ij - pi^kj d_k E^i - pi^ik d_k E^j."""
    _require_same_chart(E, pi)
    if pi.variance != SkewMatrixField.CONTRAVARIANT:
        raise ChartMismatchError("lie_derivative_bivector needs a contravariant field")
    x = E.chart.require(x)
    b = _backend(backend)
    dP = b.derivatives(pi.func, x)      # dP[i, j, k] = d_k pi^ij
    dE = b.derivatives(E.func, x)       # dE[i, k] = d_k E^i
    P = pi.value(x)
    Ev = E.value(x)
    out = dP @ Ev
    out -= dE @ P                       # (dE @ P)_ij = d_k E^i pi^kj
    out -= (dE @ P.T).T                 # pi^ik d_k E^j
    return out


def two_form_closedness_residual(omega: SkewMatrixField, x,
                                 backend: DiffBackend | None = None) -> float:
    """Max cyclic-sum residual |d_i w_jk + d_j w_ki + d_k w_ij| at ``x``."""
    if omega.variance != SkewMatrixField.COVARIANT:
        raise ChartMismatchError("closedness applies to covariant skew fields")
    x = omega.chart.require(x)
    dW = _backend(backend).derivatives(omega.func, x)   # dW[j, k, i] = d_i w_jk
    n = omega.chart.dim
    worst = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                r = dW[j, k, i] + dW[k, i, j] + dW[i, j, k]
                worst = max(worst, abs(r))
    return worst


def poisson_jacobi_residual(pi: SkewMatrixField, x,
                            backend: DiffBackend | None = None) -> float:
    """Max Schouten residual |sum_l pi^li d_l pi^jk + cyclic| at ``x``."""
    if pi.variance != SkewMatrixField.CONTRAVARIANT:
        raise ChartMismatchError("the Jacobi check applies to contravariant skew fields")
    x = pi.chart.require(x)
    b = _backend(backend)
    dP = b.derivatives(pi.func, x)      # dP[j, k, l] = d_l pi^jk
    P = pi.value(x)
    n = pi.chart.dim
    worst = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                r = (P[:, i] @ dP[j, k, :]
                     + P[:, j] @ dP[k, i, :]
                     + P[:, k] @ dP[i, j, :])
                worst = max(worst, abs(r))
    return worst
