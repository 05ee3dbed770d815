"""Sampled latent error dynamics: recurrence, stability, estimation.

The deviation samples xi_k on a uniform grid t_k = k h obey the
second-order recurrence

    xi_{k+1} = 2 xi_k - xi_{k-1} - h^2 R_k(T_k, xi_k) T_k + h^2 F_k

with the curvature tensor and mismatch forcing evaluated at the model
sample.  For constant scalar curvature K this collapses to
xi_{k+1} = (2 - lambda) xi_k - xi_{k-1} with lambda = h^2 K, whose
characteristic roots mu satisfy mu^2 - (2 - lambda) mu + 1 = 0.  Unit
modulus (bounded oscillation) holds exactly for 0 < lambda < 4; lambda
outside that window grows geometrically.  The per-step curvature
estimator inverts the recurrence, so it is exact on recurrence-generated
data and second-order accurate on samples of the continuous flow.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .errors import (
    BoundaryIndexError,
    DimensionMismatchError,
    DivergenceError,
    GridMismatchError,
    InvalidParameterError,
    OutOfWindowError,
)
from .geodesic import Trajectory
from .geometry import ConnectionField, _readonly, as_coords, curvature_components

OVERFLOW_GUARD = 1e100

REGIME_OSCILLATORY = "oscillatory"
REGIME_DEGENERATE = "degenerate_boundary"
REGIME_DIVERGENT_POSITIVE = "divergent_positive"
REGIME_DIVERGENT_NEGATIVE = "divergent_negative"
REGIME_FLAT_DRIFT = "flat_drift"

BOUNDARY_TOL = 1e-12


@dataclass(frozen=True)
class DiscreteLedrSeries:
    """Sampled deviation vectors with their grid step.

    ``origin`` says where the samples came from: the recurrence itself,
    measured data, or a trajectory difference.
    """

    h: float
    xi: np.ndarray  # (N, n)
    origin: str

    def __post_init__(self):
        xi = np.atleast_2d(np.asarray(self.xi, dtype=float))
        if xi.ndim != 2:
            raise DimensionMismatchError(f"series must be 2-D, got shape {xi.shape}")
        if not self.h > 0:
            raise InvalidParameterError(f"step size must be positive, got {self.h}")
        object.__setattr__(self, "xi", _readonly(xi))

    def __len__(self) -> int:
        return self.xi.shape[0]

    @property
    def dim(self) -> int:
        return self.xi.shape[1]

    @property
    def times(self) -> np.ndarray:
        return np.arange(len(self)) * self.h

    @property
    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.xi, axis=1)


@dataclass(frozen=True)
class StabilityReport:
    """Characteristic roots and regime for one (K, h) pair."""

    lam: float
    roots: tuple
    regime: str
    omega_d: Optional[float]

    @property
    def max_root_modulus(self) -> float:
        return max(abs(self.roots[0]), abs(self.roots[1]))


@dataclass(frozen=True)
class CurvatureEstimate:
    """Per-step curvature estimates; invalid entries are NaN with a False flag."""

    k_values: np.ndarray
    valid: np.ndarray
    h: float

    def valid_values(self) -> np.ndarray:
        return self.k_values[self.valid]


@dataclass(frozen=True)
class MismatchProbeReport:
    """Qualitative check that persistent curvature mismatch forbids decay.

    ``c_hat`` is an empirical best-fit constant for the accumulated
    mismatch bound and is reported for inspection only; the pass/fail
    content lives in ``non_decay``, which is None when there is no
    mismatch to probe.
    """

    mismatch_integral: np.ndarray
    norms: np.ndarray
    c_hat: Optional[float]
    non_decay: Optional[bool]
    window: int
    first_window_amplitude: float
    decay_ratio: float

    def to_dict(self) -> dict:
        return {
            "c_hat": self.c_hat,
            "non_decay": self.non_decay,
            "window": self.window,
            "first_window_amplitude": self.first_window_amplitude,
            "decay_ratio": self.decay_ratio,
            "total_mismatch_integral": float(self.mismatch_integral[-1]),
        }


def discrete_first_diff(series: DiscreteLedrSeries, k: int) -> np.ndarray:
    """(xi_{k+1} - xi_{k-1}) / 2h."""
    if not 1 <= k <= len(series) - 2:
        raise BoundaryIndexError(f"need 1 <= k <= {len(series) - 2}, got {k}")
    return (series.xi[k + 1] - series.xi[k - 1]) / (2.0 * series.h)


def discrete_second_diff(series: DiscreteLedrSeries, k: int) -> np.ndarray:
    """(xi_{k+1} - 2 xi_k + xi_{k-1}) / h^2."""
    if not 1 <= k <= len(series) - 2:
        raise BoundaryIndexError(f"need 1 <= k <= {len(series) - 2}, got {k}")
    return (series.xi[k + 1] - 2.0 * series.xi[k] + series.xi[k - 1]) / series.h**2


def recurrence_step(
    xi_k,
    xi_km1,
    h: float,
    true_conn: ConnectionField,
    model_conn: ConnectionField,
    x_mk,
    T_mk,
) -> np.ndarray:
    """One step of the full deviation recurrence at a model sample."""
    xi_k = np.asarray(xi_k, dtype=float)
    xi_km1 = np.asarray(xi_km1, dtype=float)
    coords = as_coords(x_mk)
    T = np.asarray(T_mk.components if hasattr(T_mk, "components") else T_mk, dtype=float)
    n = true_conn.dim
    for name, arr in (("xi_k", xi_k), ("xi_km1", xi_km1), ("x_mk", coords), ("T_mk", T)):
        if arr.shape != (n,):
            raise DimensionMismatchError(f"{name} has shape {arr.shape}, expected ({n},)")
    r_t = curvature_components(true_conn, coords)
    jacobi = np.einsum("ijlm,j,l,m->i", r_t, T, xi_k, T)
    dg = true_conn.christoffels(coords) - model_conn.christoffels(coords)
    forcing = -np.einsum("ijk,j,k->i", dg, T, T)
    return 2.0 * xi_k - xi_km1 - h * h * jacobi + h * h * forcing


CurvatureSource = Union[float, Callable[[int, np.ndarray], np.ndarray]]


def run_recurrence(
    xi0,
    xi1,
    steps: int,
    h: float,
    curvature_source: CurvatureSource,
) -> DiscreteLedrSeries:
    """Iterate the flat-model recurrence from the seed pair (xi0, xi1).

    ``curvature_source`` is a constant K, or a callable (k, xi_k) -> the
    curvature action vector at step k (built e.g. by
    jacobi_action_on_trajectory).  Produces steps + 2 samples.  A norm
    above the overflow guard aborts with a divergence report carrying the
    partial series.
    """
    if steps < 1:
        raise InvalidParameterError(f"step count must be >= 1, got {steps}")
    if not h > 0:
        raise InvalidParameterError(f"step size must be positive, got {h}")
    xi0 = np.atleast_1d(np.asarray(xi0, dtype=float))
    xi1 = np.atleast_1d(np.asarray(xi1, dtype=float))
    if xi0.shape != xi1.shape:
        raise DimensionMismatchError("seed samples differ in shape")

    constant = not callable(curvature_source)
    h2 = h * h
    out = np.empty((steps + 2, xi0.size))
    out[0], out[1] = xi0, xi1
    for k in range(1, steps + 1):
        xi_k = out[k]
        if constant:
            action = curvature_source * xi_k
        else:
            action = curvature_source(k, xi_k)
        nxt = 2.0 * xi_k - out[k - 1] - h2 * action
        if np.linalg.norm(nxt) > OVERFLOW_GUARD:
            raise DivergenceError(
                f"recurrence exceeded overflow guard at step {k + 1}",
                step=k + 1,
                partial=DiscreteLedrSeries(h, out[: k + 1], origin="recurrence"),
            )
        out[k + 1] = nxt
    return DiscreteLedrSeries(h, out, origin="recurrence")


def jacobi_action_on_trajectory(
    true_conn: ConnectionField, traj: Trajectory
) -> Callable[[int, np.ndarray], np.ndarray]:
    """Bind the per-step curvature action R_k(T_k, .) T_k to a model trajectory.

    Velocities are the central differences of the sampled points; the
    first and last samples reuse their stored velocities.
    """
    cache: dict = {}

    def action(k: int, xi: np.ndarray) -> np.ndarray:
        if k not in cache:
            x = traj.points[k]
            if 1 <= k <= len(traj) - 2:
                T = (traj.points[k + 1] - traj.points[k - 1]) / (2.0 * traj.h)
            else:
                T = traj.velocities[k]
            cache[k] = (curvature_components(true_conn, x), T)
        r, T = cache[k]
        return np.einsum("ijlm,j,l,m->i", r, T, xi, T)

    return action


def characteristic_roots(lam: float) -> tuple:
    """Roots of mu^2 - (2 - lambda) mu + 1 = 0, complex for 0 < lambda < 4."""
    half = 1.0 - lam / 2.0
    disc = cmath.sqrt(complex(lam * lam / 4.0 - lam))
    return (half + disc, half - disc)


def classify_stability(K: float, h: float) -> StabilityReport:
    """Regime of the constant-curvature recurrence for the pair (K, h).

    lambda = h^2 K.  Strictly inside (0, 4) the roots stay on the unit
    circle (bounded oscillation, with a well-defined frequency); lambda
    above or at rounding distance of the boundary is degenerate or
    divergent; negative curvature always diverges; K = 0 drifts linearly.
    """
    if not h > 0:
        raise InvalidParameterError(f"step size must be positive, got {h}")
    lam = h * h * K
    roots = characteristic_roots(lam)
    omega_d = None
    if lam == 0.0:
        regime = REGIME_FLAT_DRIFT
    elif abs(lam - 4.0) <= BOUNDARY_TOL:
        regime = REGIME_DEGENERATE
    elif lam < 0.0:
        regime = REGIME_DIVERGENT_NEGATIVE
    elif lam > 4.0:
        regime = REGIME_DIVERGENT_POSITIVE
    else:
        regime = REGIME_OSCILLATORY
        omega_d = discrete_frequency(K, h)
    return StabilityReport(lam, roots, regime, omega_d)


def discrete_frequency(K: float, h: float) -> float:
    """Oscillation frequency arccos(1 - h^2 K / 2) / h, in rad per unit time.

    Converges to sqrt(K) as h -> 0; the per-step phase is omega_d * h.
    Only defined inside the window 0 < h^2 K < 4.
    """
    lam = h * h * K
    if not 0.0 < lam < 4.0:
        raise OutOfWindowError(
            f"h^2 K = {lam} is outside the oscillatory window (0, 4)"
        )
    return math.acos(1.0 - lam / 2.0) / h


VALIDITY_TOL = 1e-6


def estimate_curvature(series: DiscreteLedrSeries) -> CurvatureEstimate:
    """Per-step curvature from the second difference of the deviation.

    Scalar data uses (2 xi_k - xi_{k+1} - xi_{k-1}) / (h^2 xi_k); vector
    data replaces the componentwise ratio by its least-squares projection
    onto xi_k, which reduces to the same formula in one dimension.  Steps
    where |xi_k| falls below VALIDITY_TOL times the series maximum are
    flagged invalid, as are the two boundary samples.
    """
    if len(series) < 3:
        raise InvalidParameterError(
            f"series of length {len(series)} is too short for second differences"
        )
    xi = series.xi
    norms = series.norms
    floor = VALIDITY_TOL * float(norms.max())
    n = len(series)
    k_values = np.full(n, np.nan)
    valid = np.zeros(n, dtype=bool)
    h2 = series.h**2
    for k in range(1, n - 1):
        if norms[k] < floor or norms[k] == 0.0:
            continue
        num = float((2.0 * xi[k] - xi[k + 1] - xi[k - 1]) @ xi[k])
        k_values[k] = num / (h2 * norms[k] ** 2)
        valid[k] = True
    return CurvatureEstimate(k_values, valid, series.h)


def estimate_summary(estimate: CurvatureEstimate) -> dict:
    """Median and interquartile range of the valid per-step estimates."""
    vals = estimate.valid_values()
    if vals.size == 0:
        return {"median": None, "iqr": None, "n_valid": 0}
    q1, med, q3 = np.percentile(vals, [25.0, 50.0, 75.0])
    return {"median": float(med), "iqr": float(q3 - q1), "n_valid": int(vals.size)}


def mismatch_lower_bound_probe(
    series: DiscreteLedrSeries,
    k_true: Sequence[float],
    k_model: Sequence[float],
    window: Optional[int] = None,
    decay_ratio: float = 0.1,
) -> MismatchProbeReport:
    """Probe the accumulated-mismatch obstruction on a deviation series.

    Reports the running integral h * sum |K_true - K_model|, an empirical
    best-fit constant for the bound, and a non-decay verdict: the sup of
    |xi| over every window of length ``window`` (default: one discrete
    period of the median mismatch) must stay above ``decay_ratio`` times
    the first-window amplitude.  No verdict is made when the declared
    mismatch is identically zero.
    """
    k_true = np.asarray(k_true, dtype=float)
    k_model = np.asarray(k_model, dtype=float)
    if k_true.shape != (len(series),) or k_model.shape != (len(series),):
        raise GridMismatchError("per-step curvature arrays must match the series length")

    delta = np.abs(k_true - k_model)
    integral = series.h * np.concatenate([[0.0], np.cumsum(delta[:-1])])
    norms = series.norms

    if window is None:
        k_ref = float(np.median(delta))
        lam = series.h**2 * k_ref
        if 0.0 < lam < 4.0:
            window = max(2, int(round(2.0 * math.pi / (discrete_frequency(k_ref, series.h) * series.h))))
        else:
            window = max(2, len(series) // 10)
    window = int(window)

    if float(delta.max()) == 0.0:
        return MismatchProbeReport(integral, norms, None, None, window, 0.0, decay_ratio)

    # best-fit constant over the tail, with an h^2 allowance for the
    # truncation term of the bound
    eps_hat = series.h**2 * float(norms.max())
    tail = slice(len(series) // 2, None)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = (norms[tail] + eps_hat) / integral[tail]
    ratios = ratios[np.isfinite(ratios)]
    c_hat = float(ratios.min()) if ratios.size else None

    first_amp = float(norms[: min(window, len(series))].max())
    non_decay = True
    for start in range(window, len(series) - window + 1, window):
        if float(norms[start : start + window].max()) < decay_ratio * first_amp:
            non_decay = False
            break
    return MismatchProbeReport(integral, norms, c_hat, non_decay, window, first_amp, decay_ratio)
