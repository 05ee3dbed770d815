import numpy as np
import pytest

from ledr import (
    ChartPoint,
    TangentVector,
    analytic_geodesic,
    constant_curvature_world,
    curvature_at,
    flat_world,
    integrate_geodesic,
    make_world,
    sectional_curvature,
    sphere_log,
    sphere_plane_ledr_oracle,
    sphere_world,
)
from ledr.errors import (
    AntipodalPointError,
    InvalidParameterError,
    NoOracleError,
)


def sectional_at(world, x, u, v):
    pt = ChartPoint(np.asarray(x, float))
    R = curvature_at(world.connection, pt)
    return sectional_curvature(
        world.metric, R, TangentVector(pt, np.asarray(u, float)), TangentVector(pt, np.asarray(v, float))
    )


class TestMakeWorld:
    def test_flat_has_zero_christoffels_and_curvature(self):
        world = make_world("flat", n=2)
        assert np.all(world.connection.christoffels(np.array([0.3, -2.0])) == 0.0)
        assert sectional_at(world, [0.3, -2.0], [1, 0], [0, 1]) == 0.0

    def test_sphere_unit_curvature(self, rng):
        world = make_world("sphere", r=1.0)
        for _ in range(10):
            x = [rng.uniform(0.2, np.pi - 0.2), rng.uniform(-np.pi, np.pi)]
            assert sectional_at(world, x, [1, 0], [0, 1]) == pytest.approx(1.0, abs=1e-9)

    def test_constant_k_negative_everywhere(self, rng):
        world = make_world("constant_k", k=-1.0)
        for _ in range(50):
            x = rng.uniform(-1.5, 1.5, size=2)
            u = rng.normal(size=2)
            v = rng.normal(size=2)
            assert sectional_at(world, x, u, v) == pytest.approx(-1.0, abs=1e-9)

    def test_constant_k_positive_everywhere(self, rng):
        world = make_world("constant_k", k=2.0)
        for _ in range(50):
            x = np.array([rng.uniform(-2, 2), rng.uniform(-0.6, 0.6)])
            u = rng.normal(size=2)
            v = rng.normal(size=2)
            assert sectional_at(world, x, u, v) == pytest.approx(2.0, abs=1e-9)

    def test_invalid_parameters(self):
        with pytest.raises(InvalidParameterError):
            make_world("sphere", r=0.0)
        with pytest.raises(InvalidParameterError):
            make_world("sphere", r=-1.0)
        with pytest.raises(InvalidParameterError):
            make_world("flat", n=0)
        with pytest.raises(InvalidParameterError):
            make_world("torus")


class TestMetrics:
    def test_symmetric_positive_definite_at_sampled_points(self, rng):
        worlds = [
            flat_world(3),
            sphere_world(1.4),
            constant_curvature_world(0.6),
            constant_curvature_world(-0.9),
        ]
        for world in worlds:
            for _ in range(20):
                if world.kind == "sphere":
                    x = np.array([rng.uniform(0.2, np.pi - 0.2), rng.uniform(-np.pi, np.pi)])
                else:
                    x = rng.uniform(-0.8, 0.8, size=world.dim)
                m = world.metric.matrix(x)
                assert np.array_equal(m, m.T)
                assert np.linalg.eigvalsh(m).min() > 0


class TestAnalyticGeodesic:
    def test_flat_straight_line(self):
        world = flat_world(2)
        x0 = ChartPoint(np.array([0.0, 0.0]))
        v0 = TangentVector(x0, np.array([1.0, 0.0]))
        out = analytic_geodesic(world, x0, v0, 2.0)
        np.testing.assert_array_equal(out.coords, [2.0, 0.0])

    def test_quarter_great_circle_embeds_correctly(self):
        world = sphere_world(1.0)
        x0 = ChartPoint(np.array([np.pi / 2, 0.0]))
        v0 = TangentVector(x0, np.array([0.0, 1.0]))  # unit speed along equator
        out = analytic_geodesic(world, x0, v0, np.pi / 2)
        theta, phi = out.coords
        embedded = np.array([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)])
        np.testing.assert_allclose(embedded, [0.0, 1.0, 0.0], atol=1e-12)

    def test_full_great_circle_period(self):
        world = sphere_world(2.0)
        x0 = ChartPoint(np.array([np.pi / 2, 0.3]))
        v0 = TangentVector(x0, np.array([0.35, 0.2]))
        speed = world.metric.norm(v0)
        period = 2 * np.pi * 2.0 / speed
        out = analytic_geodesic(world, x0, v0, period)
        np.testing.assert_allclose(out.coords, x0.coords, atol=1e-9)

    def test_initial_conditions_by_finite_differences(self, rng):
        for world in (sphere_world(1.5), constant_curvature_world(-0.7), constant_curvature_world(0.8)):
            x0 = ChartPoint(np.array([0.9, 0.2]) if world.kind == "sphere" else np.array([0.1, 0.2]))
            v0 = TangentVector(x0, np.array([0.4, -0.3]))
            at0 = analytic_geodesic(world, x0, v0, 0.0)
            np.testing.assert_allclose(at0.coords, x0.coords, atol=1e-12)
            eps = 1e-6
            fwd = analytic_geodesic(world, x0, v0, eps).coords
            bwd = analytic_geodesic(world, x0, v0, -eps).coords
            np.testing.assert_allclose((fwd - bwd) / (2 * eps), v0.components, atol=1e-8)

    def test_missing_oracle(self, poly_conn):
        from ledr.worlds import WorldPreset

        world = WorldPreset("user", "user", 2, poly_conn, flat_world(2).metric, None)
        x0 = ChartPoint(np.zeros(2))
        with pytest.raises(NoOracleError):
            analytic_geodesic(world, x0, TangentVector(x0, np.ones(2)), 1.0)

    def test_integrator_agreement_over_long_horizon(self):
        from conftest import chart_gap

        # numerical geodesics match the closed forms to better than 1e-6
        # per unit time over t in [0, 10]
        cases = [
            (sphere_world(1.0), np.array([np.pi / 2, 0.0]), np.array([0.12, 1.0])),
            (constant_curvature_world(0.5), np.zeros(2), np.array([1.0, 0.1])),
            (constant_curvature_world(-0.5), np.zeros(2), np.array([1.0, 0.1])),
            (flat_world(2), np.zeros(2), np.array([0.7, -0.2])),
        ]
        h = 1e-3
        steps = 10_000
        for world, x0, v0 in cases:
            traj = integrate_geodesic(world.connection, x0, v0, h, steps)
            for frac in (0.25, 0.5, 1.0):
                k = int(steps * frac)
                exact = world.analytic.geodesic(x0, v0, k * h)
                err = chart_gap(world, traj.points[k], exact)
                assert err <= 1e-6 * (k * h), f"{world.name}: err {err} at t={k * h}"


class TestSphereLog:
    def test_same_point_gives_zero(self):
        world = sphere_world(1.0)
        base = ChartPoint(np.array([1.0, 0.5]))
        out = sphere_log(world, base, base)
        assert np.all(out.components == 0.0)

    def test_quarter_circle_along_equator(self):
        world = sphere_world(1.0)
        base = ChartPoint(np.array([np.pi / 2, 0.0]))
        target = ChartPoint(np.array([np.pi / 2, np.pi / 2]))
        out = sphere_log(world, base, target)
        assert world.metric.norm(out) == pytest.approx(np.pi / 2, abs=1e-12)
        np.testing.assert_allclose(out.components, [0.0, np.pi / 2], atol=1e-12)

    def test_antipodal_raises(self):
        world = sphere_world(1.0)
        base = ChartPoint(np.array([np.pi / 2, 0.0]))
        target = ChartPoint(np.array([np.pi / 2, np.pi]))
        with pytest.raises(AntipodalPointError):
            sphere_log(world, base, target)

    def test_log_exp_inversion_random_pairs(self, rng):
        world = sphere_world(1.0)
        for _ in range(20):
            base = ChartPoint(np.array([rng.uniform(0.4, np.pi - 0.4), rng.uniform(-2, 2)]))
            target = ChartPoint(np.array([rng.uniform(0.4, np.pi - 0.4), rng.uniform(-2, 2)]))
            v = sphere_log(world, base, target)
            d = world.metric.norm(v)
            if d < 1e-12:
                continue
            unit = TangentVector(base, v.components / d)
            back = analytic_geodesic(world, base, unit, d)
            np.testing.assert_allclose(back.coords, target.coords, atol=1e-9)


class TestClosedFormOracle:
    def test_time_zero_returns_cosine_coefficient(self):
        B = np.array([0.3, -0.4])
        out = sphere_plane_ledr_oracle(2.0, A=np.array([1.0, 1.0]), B=B, t=0.0)
        np.testing.assert_array_equal(out, B)

    def test_unit_radius_quarter_period(self):
        out = sphere_plane_ledr_oracle(1.0, A=np.array([1.0, 0.0]), B=np.zeros(2), t=np.pi / 2)
        np.testing.assert_allclose(out, [1.0, 0.0], atol=1e-15)

    def test_radius_two_at_pi(self):
        out = sphere_plane_ledr_oracle(2.0, A=np.array([1.0, 0.0]), B=np.zeros(2), t=np.pi)
        np.testing.assert_allclose(out, [1.0, 0.0], atol=1e-15)

    def test_invalid_radius(self):
        with pytest.raises(InvalidParameterError):
            sphere_plane_ledr_oracle(0.0, np.zeros(2), np.zeros(2), 1.0)

    def test_oracle_satisfies_oscillator_equation(self):
        # second differences of the closed form satisfy xi'' + K xi = 0
        r = 1.3
        K = 1.0 / r**2
        A = np.array([0.5, -0.2])
        B = np.array([0.1, 0.4])
        delta = 1e-4
        for t in (0.3, 1.7, 4.0):
            f0 = sphere_plane_ledr_oracle(r, A, B, t)
            fp = sphere_plane_ledr_oracle(r, A, B, t + delta)
            fm = sphere_plane_ledr_oracle(r, A, B, t - delta)
            second = (fp - 2 * f0 + fm) / delta**2
            assert np.abs(second + K * f0).max() <= 1e-6
