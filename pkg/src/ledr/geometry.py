"""Affine connections on a coordinate chart, and their curvature.

A connection is represented by its Christoffel symbols supplied as a
callable ``gamma(x) -> (n, n, n)`` array ``G[i, j, k]``, symmetric in
``(j, k)``.  Optional closed-form partial derivatives come as
``gamma_partials(x) -> (n, n, n, n)`` indexed ``D[l, i, j, k]`` meaning
the derivative of ``G[i, j, k]`` along coordinate ``l``; without them,
central finite differences are used.

Curvature components follow the fixed convention

    R[i, j, l, m] = D[l, i, m, j] - D[m, i, l, j]
                    + G[i, l, p] G[p, m, j] - G[i, m, p] G[p, l, j]

which is antisymmetric in (l, m).  The Jacobi operator contracts
``(T, xi, T)`` into positions ``(j, l, m)``; with this pairing a space of
constant curvature ``K`` satisfies ``jacobi_apply(R, T, xi) = K xi`` for
unit ``T`` and ``xi`` perpendicular to ``T`` (positive sign, no flip
needed; verified against the round-sphere preset).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import (
    BasePointMismatchError,
    DegeneratePlaneError,
    DimensionMismatchError,
    NonFiniteError,
)


def _readonly(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


def as_coords(x) -> np.ndarray:
    """Coerce a ChartPoint or array-like to a 1-D float array."""
    if isinstance(x, ChartPoint):
        return x.coords
    return np.asarray(x, dtype=float)


@dataclass(frozen=True)
class ChartPoint:
    """A point of the chart, stored as read-only coordinates."""

    coords: np.ndarray

    def __post_init__(self):
        coords = _readonly(self.coords)
        if coords.ndim != 1 or coords.size < 1:
            raise DimensionMismatchError(
                f"chart point must be a nonempty vector, got shape {coords.shape}"
            )
        if not np.isfinite(coords).all():
            raise NonFiniteError(f"chart point has non-finite coordinates: {coords}")
        object.__setattr__(self, "coords", coords)

    @property
    def dim(self) -> int:
        return self.coords.size


@dataclass(frozen=True)
class TangentVector:
    """A vector attached to a base chart point."""

    base: ChartPoint
    components: np.ndarray

    def __post_init__(self):
        comps = _readonly(self.components)
        if comps.shape != (self.base.dim,):
            raise DimensionMismatchError(
                f"components shape {comps.shape} does not match base dimension {self.base.dim}"
            )
        if not np.isfinite(comps).all():
            raise NonFiniteError(f"tangent vector has non-finite components: {comps}")
        object.__setattr__(self, "components", comps)

    @property
    def dim(self) -> int:
        return self.base.dim


@dataclass(frozen=True)
class ConnectionField:
    """Christoffel-symbol field on an n-dimensional chart.

    ``gamma`` must be a pure, deterministic function of the coordinates.
    ``domain``, when given, marks the valid band of the chart; integrators
    refuse to step outside it.
    """

    dim: int
    gamma: Callable[[np.ndarray], np.ndarray]
    gamma_partials: Optional[Callable[[np.ndarray], np.ndarray]] = None
    tag: str = "connection"
    domain: Optional[Callable[[np.ndarray], bool]] = field(default=None, repr=False)

    def christoffels(self, x) -> np.ndarray:
        coords = as_coords(x)
        if coords.shape != (self.dim,):
            raise DimensionMismatchError(
                f"point of dimension {coords.size} passed to {self.dim}-dimensional connection"
            )
        g = np.asarray(self.gamma(coords), dtype=float)
        if g.shape != (self.dim,) * 3:
            raise DimensionMismatchError(
                f"christoffel evaluator returned shape {g.shape}, expected {(self.dim,) * 3}"
            )
        if not np.isfinite(g).all():
            raise NonFiniteError(f"non-finite christoffel symbols at {coords}")
        return g

    def christoffel_partials(self, x) -> np.ndarray:
        """Partials D[l, i, j, k]; closed form when shipped, else central differences."""
        coords = as_coords(x)
        if self.gamma_partials is not None:
            d = np.asarray(self.gamma_partials(coords), dtype=float)
            if d.shape != (self.dim,) * 4:
                raise DimensionMismatchError(
                    f"partials evaluator returned shape {d.shape}, expected {(self.dim,) * 4}"
                )
            return d
        delta = max(1e-5, 1e-5 * np.max(np.abs(coords)))
        d = np.empty((self.dim,) * 4)
        for l in range(self.dim):
            step = np.zeros(self.dim)
            step[l] = delta
            d[l] = (self.christoffels(coords + step) - self.christoffels(coords - step)) / (2 * delta)
        return d

    def in_domain(self, x) -> bool:
        coords = as_coords(x)
        if not np.isfinite(coords).all():
            return False
        if self.domain is None:
            return True
        return bool(self.domain(coords))


@dataclass(frozen=True)
class CurvatureValue:
    """Full curvature tensor R[i, j, l, m] at a base point."""

    base: ChartPoint
    components: np.ndarray

    def __post_init__(self):
        comps = _readonly(self.components)
        n = self.base.dim
        if comps.shape != (n, n, n, n):
            raise DimensionMismatchError(
                f"curvature components shape {comps.shape}, expected {(n, n, n, n)}"
            )
        object.__setattr__(self, "components", comps)


@dataclass(frozen=True)
class MetricField:
    """Symmetric positive-definite metric evaluator, used only where norms
    or sectional curvature are requested; connection-only workflows never
    touch it."""

    dim: int
    g: Callable[[np.ndarray], np.ndarray]
    tag: str = "metric"

    def matrix(self, x) -> np.ndarray:
        coords = as_coords(x)
        if coords.shape != (self.dim,):
            raise DimensionMismatchError(
                f"point of dimension {coords.size} passed to {self.dim}-dimensional metric"
            )
        m = np.asarray(self.g(coords), dtype=float)
        if m.shape != (self.dim, self.dim):
            raise DimensionMismatchError(
                f"metric evaluator returned shape {m.shape}, expected {(self.dim, self.dim)}"
            )
        if not np.isfinite(m).all():
            raise NonFiniteError(f"non-finite metric at {coords}")
        return m

    def norm(self, v: TangentVector) -> float:
        m = self.matrix(v.base.coords)
        return float(np.sqrt(v.components @ m @ v.components))


def curvature_components(conn: ConnectionField, x) -> np.ndarray:
    """Raw-array curvature tensor R[i, j, l, m] at coordinates ``x``."""
    coords = as_coords(x)
    g = conn.christoffels(coords)
    d = conn.christoffel_partials(coords)
    return (
        np.einsum("limj->ijlm", d)
        - np.einsum("milj->ijlm", d)
        + np.einsum("ilp,pmj->ijlm", g, g)
        - np.einsum("imp,plj->ijlm", g, g)
    )


def curvature_at(conn: ConnectionField, x: ChartPoint) -> CurvatureValue:
    """Evaluate the full curvature tensor of ``conn`` at ``x``."""
    point = x if isinstance(x, ChartPoint) else ChartPoint(as_coords(x))
    if point.dim != conn.dim:
        raise DimensionMismatchError(
            f"point of dimension {point.dim} passed to {conn.dim}-dimensional connection"
        )
    return CurvatureValue(point, curvature_components(conn, point.coords))


def jacobi_apply(Rv: CurvatureValue, T: TangentVector, xi: TangentVector) -> TangentVector:
    """Contract the curvature tensor with (T, xi, T): R[i,j,l,m] T^j xi^l T^m."""
    for v in (T, xi):
        if not np.array_equal(v.base.coords, Rv.base.coords):
            raise BasePointMismatchError(
                "curvature tensor and tangent vectors must share a base point"
            )
    out = np.einsum("ijlm,j,l,m->i", Rv.components, T.components, xi.components, T.components)
    return TangentVector(Rv.base, out)


def sectional_curvature(
    g: MetricField, Rv: CurvatureValue, u: TangentVector, v: TangentVector
) -> float:
    """Curvature of the plane spanned by u and v.

    Computed as <R(u,v,u), v> / (|u|^2 |v|^2 - <u,v>^2) with the metric
    inner product; raises for a degenerate plane instead of returning a
    huge value.
    """
    for w in (u, v):
        if not np.array_equal(w.base.coords, Rv.base.coords):
            raise BasePointMismatchError("metric, curvature and vectors must share a base point")
    m = g.matrix(Rv.base.coords)
    uu = float(u.components @ m @ u.components)
    vv = float(v.components @ m @ v.components)
    uv = float(u.components @ m @ v.components)
    denom = uu * vv - uv * uv
    if denom < 1e-12 * uu * vv or denom <= 0.0:
        raise DegeneratePlaneError(
            f"vectors span a degenerate plane (gram determinant {denom:.3e})"
        )
    contraction = jacobi_apply(Rv, u, v)
    return float(contraction.components @ m @ v.components) / denom


def connection_mismatch(true_conn: ConnectionField, model_conn: ConnectionField, x) -> np.ndarray:
    """Componentwise difference of the two Christoffel fields at ``x``."""
    if true_conn.dim != model_conn.dim:
        raise DimensionMismatchError(
            f"connections of dimension {true_conn.dim} and {model_conn.dim} cannot be compared"
        )
    coords = as_coords(x)
    return true_conn.christoffels(coords) - model_conn.christoffels(coords)


def forcing_term(delta_gamma: np.ndarray, T: TangentVector) -> TangentVector:
    """Quadratic forcing -dGamma[i,j,k] T^j T^k sourced by connection mismatch."""
    dg = np.asarray(delta_gamma, dtype=float)
    n = T.dim
    if dg.shape != (n, n, n):
        raise DimensionMismatchError(
            f"mismatch array shape {dg.shape} does not fit dimension {n}"
        )
    out = -np.einsum("ijk,j,k->i", dg, T.components, T.components)
    return TangentVector(T.base, out)
