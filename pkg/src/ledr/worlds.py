"""Preset geometries with exact reference solutions.

Three families ship here:

* ``flat(n)``: Euclidean space of any dimension, zero Christoffels.
* ``sphere(r)``: the round 2-sphere of radius r in intrinsic colatitude /
  longitude coordinates ``(theta, phi)``, valid for theta in
  [0.1, pi - 0.1] to stay clear of the pole singularities.
* ``constant_k(K)``: a 2-D space form of constant sectional curvature K
  (either sign) in geodesic coordinates adapted to a reference geodesic:
  the first coordinate s runs along the reference geodesic (the line
  y = 0), the second coordinate y is transverse arc length.  The metric is
  diag(c(y)^2, 1) with c = cos(sqrt(K) y), 1, or cosh(sqrt(-K) y).  All
  Christoffels vanish on y = 0, so a flat "model" straight line down the
  reference geodesic is simultaneously a true geodesic, and transverse
  deviations obey the constant-curvature oscillator exactly in
  coordinates.  This chart is what the sphere-against-plane comparison
  runs in: set K = 1/r^2 and the line y = 0 is the image of a great
  circle.

Analytic oracles (exact geodesics and log maps) are built from the
standard sphere / hyperboloid embeddings and exist for every preset.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import (
    AntipodalPointError,
    DimensionMismatchError,
    InvalidParameterError,
    NoOracleError,
)
from .geometry import ChartPoint, ConnectionField, MetricField, TangentVector, as_coords

SPHERE_BAND = 0.1  # colatitude margin kept away from each pole


@dataclass(frozen=True)
class AnalyticOracle:
    """Closed-form solutions attached to a preset.

    ``geodesic(x0, v0, t)`` returns exact chart coordinates; ``log_map``
    inverts it where defined.  ``ledr_closed_form`` is only populated for
    worlds whose transverse deviation has a closed form.
    """

    geodesic: Callable[[np.ndarray, np.ndarray, float], np.ndarray]
    log_map: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    ledr_closed_form: Optional[Callable[..., np.ndarray]] = None


@dataclass(frozen=True)
class WorldPreset:
    name: str
    kind: str
    dim: int
    connection: ConnectionField
    metric: MetricField
    analytic: Optional[AnalyticOracle] = None
    params: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# flat space

def _flat_gamma(n):
    zero = np.zeros((n, n, n))

    def gamma(x):
        return zero

    return gamma


def _flat_partials(n):
    zero = np.zeros((n, n, n, n))

    def partials(x):
        return zero

    return partials


def flat_world(n: int = 2) -> WorldPreset:
    if n < 1:
        raise InvalidParameterError(f"flat world needs dimension >= 1, got {n}")
    n = int(n)
    eye = np.eye(n)
    conn = ConnectionField(n, _flat_gamma(n), _flat_partials(n), tag=f"flat({n})")
    metric = MetricField(n, lambda x: eye, tag=f"euclidean({n})")
    oracle = AnalyticOracle(
        geodesic=lambda x0, v0, t: np.asarray(x0, float) + t * np.asarray(v0, float),
        log_map=lambda base, target: np.asarray(target, float) - np.asarray(base, float),
    )
    return WorldPreset(f"flat({n})", "flat", n, conn, metric, oracle, params={"n": n})


# ---------------------------------------------------------------------------
# round sphere in (theta, phi)

def _sphere_embed(r, x):
    theta, phi = x
    st, ct = math.sin(theta), math.cos(theta)
    return r * np.array([st * math.cos(phi), st * math.sin(phi), ct])


def _sphere_chart(r, p):
    theta = math.acos(min(1.0, max(-1.0, p[2] / r)))
    phi = math.atan2(p[1], p[0])
    return np.array([theta, phi])


def _sphere_basis(r, x):
    """Coordinate basis vectors d_theta, d_phi of the embedding at x."""
    theta, phi = x
    st, ct = math.sin(theta), math.cos(theta)
    e_theta = r * np.array([ct * math.cos(phi), ct * math.sin(phi), -st])
    e_phi = r * np.array([-st * math.sin(phi), st * math.cos(phi), 0.0])
    return e_theta, e_phi


def _sphere_gamma(x):
    theta = x[0]
    g = np.zeros((2, 2, 2))
    g[0, 1, 1] = -math.sin(theta) * math.cos(theta)
    cot = math.cos(theta) / math.sin(theta)
    g[1, 0, 1] = cot
    g[1, 1, 0] = cot
    return g


def _sphere_partials(x):
    theta = x[0]
    d = np.zeros((2, 2, 2, 2))
    d[0, 0, 1, 1] = -math.cos(2 * theta)
    csc2 = 1.0 / math.sin(theta) ** 2
    d[0, 1, 0, 1] = -csc2
    d[0, 1, 1, 0] = -csc2
    return d


def sphere_world(r: float) -> WorldPreset:
    if not r > 0:
        raise InvalidParameterError(f"sphere radius must be positive, got {r}")
    r = float(r)

    def metric(x):
        return np.diag([r * r, r * r * math.sin(x[0]) ** 2])

    def domain(x):
        return SPHERE_BAND <= x[0] <= math.pi - SPHERE_BAND

    def geodesic(x0, v0, t):
        x0 = np.asarray(x0, float)
        v0 = np.asarray(v0, float)
        p = _sphere_embed(r, x0)
        e_theta, e_phi = _sphere_basis(r, x0)
        v = v0[0] * e_theta + v0[1] * e_phi
        sigma = np.linalg.norm(v)
        if sigma == 0.0:
            return x0.copy()
        ang = sigma * t / r
        point = math.cos(ang) * p + (r / sigma) * math.sin(ang) * v
        return _sphere_chart(r, point)

    def log_map(base, target):
        base = np.asarray(base, float)
        target = np.asarray(target, float)
        p = _sphere_embed(r, base)
        q = _sphere_embed(r, target)
        cos_ang = min(1.0, max(-1.0, float(p @ q) / (r * r)))
        ang = math.acos(cos_ang)
        if ang < 1e-15:
            return np.zeros(2)
        if ang > math.pi - 1e-6:
            raise AntipodalPointError(
                "log map undefined: target lies at or beyond the cut locus"
            )
        u = q - cos_ang * p
        u *= (r * ang) / np.linalg.norm(u)
        e_theta, e_phi = _sphere_basis(r, base)
        return np.array([
            float(u @ e_theta) / float(e_theta @ e_theta),
            float(u @ e_phi) / float(e_phi @ e_phi),
        ])

    conn = ConnectionField(
        2, _sphere_gamma, _sphere_partials, tag=f"sphere(r={r})", domain=domain
    )
    oracle = AnalyticOracle(geodesic=geodesic, log_map=log_map)
    return WorldPreset(
        f"sphere(r={r})", "sphere", 2, conn, MetricField(2, metric, tag=f"sphere(r={r})"), oracle,
        params={"r": r},
    )


# ---------------------------------------------------------------------------
# constant-curvature space forms in geodesic (s, y) coordinates

def _spaceform_profile(K):
    """Return c(y) and helpers for metric diag(c^2, 1) of curvature K."""
    if K > 0:
        a = math.sqrt(K)

        def gamma(x):
            y = x[1]
            g = np.zeros((2, 2, 2))
            g[0, 0, 1] = g[0, 1, 0] = -a * math.tan(a * y)
            g[1, 0, 0] = a * math.sin(a * y) * math.cos(a * y)
            return g

        def partials(x):
            y = x[1]
            d = np.zeros((2, 2, 2, 2))
            sec2 = 1.0 / math.cos(a * y) ** 2
            d[1, 0, 0, 1] = d[1, 0, 1, 0] = -a * a * sec2
            d[1, 1, 0, 0] = a * a * math.cos(2 * a * y)
            return d

        def c(y):
            return math.cos(a * y)

        def domain(x):
            return abs(a * x[1]) <= math.pi / 2 - SPHERE_BAND

        return gamma, partials, c, domain

    if K < 0:
        b = math.sqrt(-K)

        def gamma(x):
            y = x[1]
            g = np.zeros((2, 2, 2))
            g[0, 0, 1] = g[0, 1, 0] = b * math.tanh(b * y)
            g[1, 0, 0] = -b * math.sinh(b * y) * math.cosh(b * y)
            return g

        def partials(x):
            y = x[1]
            d = np.zeros((2, 2, 2, 2))
            sech2 = 1.0 / math.cosh(b * y) ** 2
            d[1, 0, 0, 1] = d[1, 0, 1, 0] = b * b * sech2
            d[1, 1, 0, 0] = -b * b * math.cosh(2 * b * y)
            return d

        def c(y):
            return math.cosh(b * y)

        return gamma, partials, c, None

    return _flat_gamma(2), _flat_partials(2), (lambda y: 1.0), None


def _spaceform_geodesic(K):
    """Exact geodesics via the sphere / hyperboloid embedding of radius 1/sqrt|K|."""
    if K == 0:
        return lambda x0, v0, t: np.asarray(x0, float) + t * np.asarray(v0, float)
    R = 1.0 / math.sqrt(abs(K))

    if K > 0:
        def embed(x):
            s, y = x
            cy = math.cos(y / R)
            return R * np.array([cy * math.cos(s / R), cy * math.sin(s / R), math.sin(y / R)])

        def basis(x):
            s, y = x
            cy, sy = math.cos(x[1] / R), math.sin(x[1] / R)
            e_s = np.array([-cy * math.sin(s / R), cy * math.cos(s / R), 0.0])
            e_y = np.array([-sy * math.cos(s / R), -sy * math.sin(s / R), cy])
            return e_s, e_y

        def chart(p):
            return np.array([R * math.atan2(p[1], p[0]), R * math.asin(min(1.0, max(-1.0, p[2] / R)))])

        def geodesic(x0, v0, t):
            x0 = np.asarray(x0, float)
            v0 = np.asarray(v0, float)
            p = embed(x0)
            e_s, e_y = basis(x0)
            v = v0[0] * e_s + v0[1] * e_y
            sigma = np.linalg.norm(v)
            if sigma == 0.0:
                return x0.copy()
            ang = sigma * t / R
            return chart(math.cos(ang) * p + (R / sigma) * math.sin(ang) * v)

        return geodesic

    # K < 0: hyperboloid -T^2 + X^2 + Y^2 = -R^2 with Minkowski product
    def mink(a, b):
        return -a[0] * b[0] + a[1] * b[1] + a[2] * b[2]

    def embed(x):
        s, y = x
        cy = math.cosh(y / R)
        return R * np.array([cy * math.cosh(s / R), cy * math.sinh(s / R), math.sinh(y / R)])

    def basis(x):
        s, y = x
        cy, sy = math.cosh(y / R), math.sinh(y / R)
        e_s = np.array([cy * math.sinh(s / R), cy * math.cosh(s / R), 0.0])
        e_y = np.array([sy * math.cosh(s / R), sy * math.sinh(s / R), cy])
        return e_s, e_y

    def chart(p):
        return np.array([R * math.atanh(p[1] / p[0]), R * math.asinh(p[2] / R)])

    def geodesic(x0, v0, t):
        x0 = np.asarray(x0, float)
        v0 = np.asarray(v0, float)
        p = embed(x0)
        e_s, e_y = basis(x0)
        v = v0[0] * e_s + v0[1] * e_y
        sigma2 = mink(v, v)
        if sigma2 <= 0.0:
            return x0.copy()
        sigma = math.sqrt(sigma2)
        ang = sigma * t / R
        return chart(math.cosh(ang) * p + (R / sigma) * math.sinh(ang) * v)

    return geodesic


def constant_curvature_world(K: float) -> WorldPreset:
    K = float(K)
    if K == 0.0:
        base = flat_world(2)
        return WorldPreset(
            f"constant_k({K})", "constant_k", 2, base.connection, base.metric, base.analytic,
            params={"k": K},
        )

    gamma, partials, c, domain = _spaceform_profile(K)

    def metric(x):
        return np.diag([c(x[1]) ** 2, 1.0])

    conn = ConnectionField(2, gamma, partials, tag=f"constant_k(K={K})", domain=domain)
    oracle = AnalyticOracle(geodesic=_spaceform_geodesic(K))
    return WorldPreset(
        f"constant_k({K})", "constant_k", 2, conn,
        MetricField(2, metric, tag=f"constant_k(K={K})"), oracle, params={"k": K},
    )


def make_world(kind: str, **params) -> WorldPreset:
    """Build a preset from a descriptor: flat(n), sphere(r), constant_k(k)."""
    if kind == "flat":
        return flat_world(int(params.get("n", 2)))
    if kind == "sphere":
        if "r" not in params:
            raise InvalidParameterError("sphere preset needs a radius r")
        return sphere_world(params["r"])
    if kind == "constant_k":
        if "k" not in params:
            raise InvalidParameterError("constant_k preset needs a curvature k")
        return constant_curvature_world(params["k"])
    raise InvalidParameterError(f"unknown world kind {kind!r}")


# ---------------------------------------------------------------------------
# reference solutions for the sphere-against-plane comparison

def analytic_geodesic(world: WorldPreset, x0: ChartPoint, v0: TangentVector, t: float) -> ChartPoint:
    """Exact geodesic position at parameter t; arc length when |v0|_g = 1."""
    if world.analytic is None or world.analytic.geodesic is None:
        raise NoOracleError(f"world {world.name} ships no analytic geodesic")
    coords = as_coords(x0)
    comps = v0.components if isinstance(v0, TangentVector) else np.asarray(v0, float)
    if coords.size != world.dim or comps.size != world.dim:
        raise DimensionMismatchError("initial data does not match world dimension")
    return ChartPoint(world.analytic.geodesic(coords, comps, float(t)))


def sphere_log(world: WorldPreset, base: ChartPoint, target: ChartPoint) -> TangentVector:
    """Inverse of the great-circle exponential at ``base``.

    The result has metric norm equal to the geodesic distance; undefined
    (raises) for antipodal pairs.
    """
    if world.kind != "sphere" or world.analytic is None or world.analytic.log_map is None:
        raise NoOracleError(f"world {world.name} ships no log map")
    base_pt = base if isinstance(base, ChartPoint) else ChartPoint(as_coords(base))
    comps = world.analytic.log_map(as_coords(base), as_coords(target))
    return TangentVector(base_pt, comps)


def sphere_plane_ledr_oracle(r: float, A, B, t):
    """Closed-form deviation A sin(t/r) + B cos(t/r) of the sphere-against-plane run.

    The oscillation frequency sqrt(K) = 1/r is the curvature signature the
    resonance analysis recovers from data.
    """
    if not r > 0:
        raise InvalidParameterError(f"radius must be positive, got {r}")
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    w = 1.0 / float(r)
    t = np.asarray(t, dtype=float)
    if t.ndim == 0:
        return A * math.sin(w * float(t)) + B * math.cos(w * float(t))
    return np.outer(np.sin(w * t), A) + np.outer(np.cos(w * t), B)
