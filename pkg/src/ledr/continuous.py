"""Continuous-time latent error dynamics along a model trajectory.

The deviation field xi between the true flow and the model flow obeys a
second-order equation whose covariant form is

    D^2 xi / dt^2 + R_true(T, xi) T = F,    F^i = -dG[i,j,k] T^j T^k,

with D/dt the true-connection derivative along the model trajectory and
dG the Christoffel mismatch true - model.  The coordinate expansion used
everywhere in this module is single-sourced here: writing G for the true
Christoffels at the model point, eta = xi' + G(T, xi) and

    D^2 xi/dt^2 = xi'' + dGamma(T, T, xi) + G(T', xi) + 2 G(T, xi')
                  + G(T, G(T, xi)),

where T' = -G_model(T, T) because the model trajectory is a geodesic of
the model connection.  Moving everything except xi'' to the right gives
the acceleration integrated below.  Terms of second order in xi (and in
xi times the mismatch) are dropped; their size is what the
difference-versus-integration consistency tests measure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    ChartExitError,
    DimensionMismatchError,
    GridMismatchError,
    NonFiniteError,
)
from .geodesic import Trajectory
from .geometry import ConnectionField, _readonly, as_coords, curvature_components


@dataclass(frozen=True)
class LedrState:
    xi: np.ndarray
    xi_dot: np.ndarray
    t: float


@dataclass(frozen=True)
class LedrSolution:
    """Deviation samples on a uniform time grid.

    ``source`` records how the samples were produced: direct integration
    of the deviation equation, pointwise trajectory difference, or a
    closed form.
    """

    h: float
    t: np.ndarray
    xi: np.ndarray       # (N, n)
    xi_dot: np.ndarray   # (N, n)
    source: str

    def __post_init__(self):
        t = _readonly(self.t)
        if t.size >= 2:
            gaps = np.diff(t)
            if not (gaps > 0).all() or not np.allclose(gaps, self.h, rtol=1e-9, atol=1e-12):
                raise GridMismatchError("time stamps must increase uniformly by h")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "xi", _readonly(np.atleast_2d(self.xi)))
        object.__setattr__(self, "xi_dot", _readonly(np.atleast_2d(self.xi_dot)))

    def __len__(self) -> int:
        return self.t.size

    def state(self, k: int) -> LedrState:
        return LedrState(self.xi[k], self.xi_dot[k], float(self.t[k]))

    @property
    def states(self):
        return [self.state(k) for k in range(len(self))]


def _covariant_correction(g_true, dg_true, T, T_dot, xi, xi_dot):
    # dGamma(T,T,xi) + G(T',xi) + 2 G(T,xi') + G(T, G(T,xi))
    c = np.einsum("lijk,l,j,k->i", dg_true, T, T, xi)
    c += np.einsum("ijk,j,k->i", g_true, T_dot, xi)
    c += 2.0 * np.einsum("ijk,j,k->i", g_true, T, xi_dot)
    inner = np.einsum("klm,l,m->k", g_true, T, xi)
    c += np.einsum("ijk,j,k->i", g_true, T, inner)
    return c


def _prepare(true_conn, model_conn, x, T, xi, xi_dot):
    coords = as_coords(x)
    T = np.asarray(T.components if hasattr(T, "components") else T, dtype=float)
    xi = np.asarray(xi, dtype=float)
    xi_dot = np.asarray(xi_dot, dtype=float)
    n = true_conn.dim
    if model_conn.dim != n:
        raise DimensionMismatchError("true and model connections differ in dimension")
    for name, arr in (("x", coords), ("T", T), ("xi", xi), ("xi_dot", xi_dot)):
        if arr.shape != (n,):
            raise DimensionMismatchError(f"{name} has shape {arr.shape}, expected ({n},)")
    if not true_conn.in_domain(coords):
        raise ChartExitError(f"state {coords} lies outside the chart band")
    return coords, T, xi, xi_dot


def _rhs_terms(true_conn, model_conn, coords, T, xi, xi_dot):
    g_t = true_conn.christoffels(coords)
    g_m = model_conn.christoffels(coords)
    dg_t = true_conn.christoffel_partials(coords)
    T_dot = -(g_m @ T) @ T
    correction = _covariant_correction(g_t, dg_t, T, T_dot, xi, xi_dot)
    forcing = -np.einsum("ijk,j,k->i", g_t - g_m, T, T)
    return forcing, correction


def ledr_rhs(true_conn, model_conn, x, T, xi, xi_dot) -> np.ndarray:
    """Coordinate acceleration xi'' of the deviation equation."""
    coords, T, xi, xi_dot = _prepare(true_conn, model_conn, x, T, xi, xi_dot)
    forcing, correction = _rhs_terms(true_conn, model_conn, coords, T, xi, xi_dot)
    r_t = curvature_components(true_conn, coords)
    jacobi = np.einsum("ijlm,j,l,m->i", r_t, T, xi, T)
    return forcing - jacobi - correction


def general_deviation_rhs(true_conn, model_conn, x, T, xi, xi_dot) -> np.ndarray:
    """Same acceleration computed through the curvature-mismatch split.

    The true curvature action is regrouped as model curvature plus the
    difference of the two tensors; the result must agree with ledr_rhs to
    rounding, which the test suite checks at random states.
    """
    coords, T, xi, xi_dot = _prepare(true_conn, model_conn, x, T, xi, xi_dot)
    forcing, correction = _rhs_terms(true_conn, model_conn, coords, T, xi, xi_dot)
    r_t = curvature_components(true_conn, coords)
    r_m = curvature_components(model_conn, coords)
    delta_r = r_t - r_m
    jacobi_m = np.einsum("ijlm,j,l,m->i", r_m, T, xi, T)
    jacobi_delta = np.einsum("ijlm,j,l,m->i", delta_r, T, xi, T)
    return forcing - jacobi_m - jacobi_delta - correction


class _CubicInterpolant:
    """Cubic Lagrange interpolation through four neighboring grid samples.

    Exact at the nodes; fourth-order accurate between them, which keeps
    the RK4 integration of the deviation equation at full order.
    """

    def __init__(self, values: np.ndarray, h: float):
        self.values = values
        self.h = h
        self.n = values.shape[0]

    def __call__(self, t: float) -> np.ndarray:
        u = t / self.h
        j = int(math.floor(u))
        base = min(max(j - 1, 0), self.n - 4) if self.n >= 4 else 0
        if self.n < 4:
            # short grids degrade to linear interpolation
            j = min(max(j, 0), self.n - 2)
            w = u - j
            return (1 - w) * self.values[j] + w * self.values[j + 1]
        s = u - base
        out = np.zeros(self.values.shape[1])
        for m in range(4):
            w = 1.0
            for q in range(4):
                if q != m:
                    w *= (s - q) / (m - q)
            out += w * self.values[base + m]
        return out


def integrate_ledr(
    true_conn: ConnectionField,
    model_conn: ConnectionField,
    model_traj: Trajectory,
    xi0,
    xi_dot0,
) -> LedrSolution:
    """RK4 integration of the deviation equation along a model trajectory.

    The trajectory is sampled with the same step h as the output grid;
    interior RK4 stages interpolate the model state cubically.
    """
    if len(model_traj) < 2:
        raise GridMismatchError("model trajectory must hold at least two samples")
    n = model_traj.dim
    xi = np.asarray(xi0, dtype=float).copy()
    xi_dot = np.asarray(xi_dot0, dtype=float).copy()
    if xi.shape != (n,) or xi_dot.shape != (n,):
        raise DimensionMismatchError("initial deviation does not match trajectory dimension")

    h = model_traj.h
    pos = _CubicInterpolant(model_traj.points, h)
    vel = _CubicInterpolant(model_traj.velocities, h)

    def rhs(t, y0, y1):
        x = pos(t)
        T = vel(t)
        coords, T, y0, y1 = _prepare(true_conn, model_conn, x, T, y0, y1)
        forcing, correction = _rhs_terms(true_conn, model_conn, coords, T, y0, y1)
        r_t = curvature_components(true_conn, coords)
        jacobi = np.einsum("ijlm,j,l,m->i", r_t, T, y0, T)
        return forcing - jacobi - correction

    count = len(model_traj)
    xis = np.empty((count, n))
    xi_dots = np.empty((count, n))
    xis[0], xi_dots[0] = xi, xi_dot

    for k in range(count - 1):
        t = k * h
        k1x = xi_dot
        k1v = rhs(t, xi, xi_dot)
        k2x = xi_dot + 0.5 * h * k1v
        k2v = rhs(t + 0.5 * h, xi + 0.5 * h * k1x, k2x)
        k3x = xi_dot + 0.5 * h * k2v
        k3v = rhs(t + 0.5 * h, xi + 0.5 * h * k2x, k3x)
        k4x = xi_dot + h * k3v
        k4v = rhs(t + h, xi + h * k3x, k4x)
        xi = xi + (h / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
        xi_dot = xi_dot + (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        if not (np.isfinite(xi).all() and np.isfinite(xi_dot).all()):
            raise NonFiniteError(f"deviation state became non-finite at step {k + 1}")
        xis[k + 1], xi_dots[k + 1] = xi, xi_dot

    return LedrSolution(h, model_traj.times, xis, xi_dots, source="ode_integrated")


def ledr_from_trajectories(true_traj: Trajectory, model_traj: Trajectory) -> LedrSolution:
    """Pointwise coordinate difference of two runs on a shared chart and grid."""
    if true_traj.h != model_traj.h:
        raise GridMismatchError(
            f"step sizes differ: {true_traj.h} vs {model_traj.h}"
        )
    if len(true_traj) != len(model_traj) or true_traj.dim != model_traj.dim:
        raise GridMismatchError("trajectories differ in length or dimension")
    return LedrSolution(
        true_traj.h,
        true_traj.times,
        true_traj.points - model_traj.points,
        true_traj.velocities - model_traj.velocities,
        source="trajectory_difference",
    )


def scalar_jacobi_closed_form(K: float, A, B, t):
    """Constant-curvature deviation with coefficient vectors A and B.

    K > 0 gives A sin(sqrt(K) t) + B cos(sqrt(K) t).  The K = 0 branch
    (B + A t) and the K < 0 branch (A sinh + B cosh) are standard
    extensions kept alongside because the divergence regimes need an
    exact reference too.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    t = np.asarray(t, dtype=float)
    scalar = t.ndim == 0

    if K > 0:
        w = math.sqrt(K)
        s, c = np.sin(w * t), np.cos(w * t)
    elif K < 0:
        w = math.sqrt(-K)
        s, c = np.sinh(w * t), np.cosh(w * t)
    else:
        s, c = t, np.ones_like(t)

    if scalar:
        return A * float(s) + B * float(c)
    return np.outer(s, A) + np.outer(c, B)
