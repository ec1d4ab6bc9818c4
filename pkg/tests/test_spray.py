"""Geodesic sprays of 1-homogeneous metrics and their reparametrizations."""

import numpy as np
import pytest

import routhlab as rl


def sample_metric():
    L = rl.MagneticLagrangian(
        2,
        lambda xs: [
            [1.0 + 0.2 * xs[1] * xs[1], 0.0],
            [0.0, 1.0 + 0.2 * xs[0] * xs[0]],
        ],
        beta=np.array([0.15, -0.1]),
        potential=lambda xs: 0.25 * (xs[0] * xs[0] + xs[1] * xs[1]),
    )
    return rl.jacobi_finsler(L, 2.0)


def test_half_square_jet_consistency(rng):
    F = sample_metric()
    for _ in range(20):
        x = rng.uniform(-0.5, 0.5, 2)
        y = rng.uniform(-1.0, 1.0, 2)
        if y @ y < 0.05:
            continue
        j = F.eval(x, y)
        E = rl.half_square_jet(F, x, y)
        assert E.value == pytest.approx(0.5 * j.value ** 2, rel=1e-13)
        np.testing.assert_allclose(E.d_y, j.value * j.d_y, atol=1e-12)
        np.testing.assert_allclose(
            E.d_yy, np.outer(j.d_y, j.d_y) + j.value * j.d_yy, atol=1e-12
        )


def test_spray_acceleration_is_two_homogeneous(rng):
    F = sample_metric()
    accel = rl.canonical_spray(F)
    worst = 0.0
    for _ in range(1000):
        x = rng.uniform(-0.5, 0.5, 2)
        y = rng.uniform(-1.0, 1.0, 2)
        if y @ y < 0.05:
            continue
        lam = rng.uniform(0.3, 3.0)
        a1 = accel(x, lam * y)
        a2 = lam * lam * accel(x, y)
        scale = 1.0 + float(np.max(np.abs(a2)))
        worst = max(worst, float(np.max(np.abs(a1 - a2))) / scale)
    assert worst <= 1e-8, f"spray 2-homogeneity violated by {worst:.3e}"


def test_geodesics_conserve_the_metric_value(rng):
    F = sample_metric()
    for _ in range(5):
        x0 = rng.uniform(-0.3, 0.3, 2)
        y0 = rng.uniform(-1.0, 1.0, 2)
        if y0 @ y0 < 0.1:
            y0 = np.array([1.0, 0.2])
        traj = rl.integrate_geodesic(F, x0, y0, 1.0, tol=1e-11)
        drift = np.max(np.abs(traj.energy_log - traj.energy_log[0]))
        assert drift < 1e-8, f"metric value drifted by {drift:.3e}"


def test_unit_speed_flag_normalizes_the_start():
    F = sample_metric()
    traj = rl.integrate_geodesic(
        F, np.zeros(2), np.array([3.0, 1.0]), 0.8, unit_speed=True
    )
    assert traj.energy_log[0] == pytest.approx(1.0, rel=1e-12)
    assert traj.meta["kind"] == "geodesic"


def test_geodesic_rejects_degenerate_start():
    F = sample_metric()
    # zero velocity sits outside the slit tangent bundle
    with pytest.raises(rl.DomainError):
        rl.integrate_geodesic(F, np.zeros(2), np.zeros(2), 1.0)
    # non-positive metric value at the start is a precondition failure
    weak = rl.randers_closed_form(
        rl.MagneticLagrangian(2, np.eye(2), beta=np.array([1.2, 0.0])), 0.3
    )
    assert weak.value(np.zeros(2), np.array([-1.0, 0.0])) < 0.0
    with pytest.raises(rl.PreconditionError):
        rl.integrate_geodesic(weak, np.zeros(2), np.array([-1.0, 0.0]), 1.0)


def test_flat_disk_diameter_is_a_euclidean_line():
    # without rotation the hyperbolic geodesic through the center is a
    # diameter, hitting the boundary orthogonally
    R = rl.poincare_randers(0.0)
    traj = rl.integrate_geodesic(
        R, np.array([-0.6, 0.0]), np.array([1.0, 0.0]), 1.5, unit_speed=True
    )
    assert np.max(np.abs(traj.positions[:, 1])) < 1e-10
    fit = rl.circle_fit(traj.positions)
    assert fit.is_line
    assert rl.boundary_angle(fit) == pytest.approx(90.0, abs=0.1)


def test_flat_disk_offset_geodesic_is_an_orthogonal_circle():
    R = rl.poincare_randers(0.0)
    traj = rl.integrate_geodesic(
        R, np.array([0.5, 0.0]), np.array([0.0, 1.0]), 2.2, unit_speed=True
    )
    fit = rl.circle_fit(traj.positions)
    assert not fit.is_line
    assert fit.rms < 1e-6 * fit.radius
    assert rl.boundary_angle(fit) == pytest.approx(90.0, abs=0.1)


def test_projective_shift_reproduces_the_lagrangian_clock(rng):
    # shifting the spray by the energy-level factor turns arc-length
    # geodesics into solutions synchronized with the original EL time
    L = rl.MechanicalLagrangian(
        2, np.eye(2), potential=lambda xs: 0.5 * (xs[0] ** 2 + 4.0 * xs[1] ** 2)
    )
    e = 3.0
    Fe = rl.jacobi_finsler(L, e)
    x0 = np.array([0.4, -0.2])
    v0 = rl.rescale_to_energy(L, x0, np.array([0.7, 0.9]), e)
    t_end = 1.2
    el = rl.integrate_el(L, x0, v0, t_end, tol=1e-11)
    geo = rl.integrate_geodesic(
        Fe, x0, v0, t_end, tol=1e-11, level=Fe.level_jet
    )
    gap = np.max(np.abs(el.positions - geo.positions))
    assert gap < 1e-9, f"pointwise mismatch {gap:.3e}"
    assert geo.meta["level_conserving"]


def test_unshifted_geodesic_traces_the_same_set_at_its_own_pace():
    L = rl.MechanicalLagrangian(
        2, np.eye(2), potential=lambda xs: 0.5 * (xs[0] ** 2 + 4.0 * xs[1] ** 2)
    )
    e = 3.0
    Fe = rl.jacobi_finsler(L, e)
    x0 = np.array([0.4, -0.2])
    v0 = rl.rescale_to_energy(L, x0, np.array([0.7, 0.9]), e)
    el = rl.integrate_el(L, x0, v0, 0.7, tol=1e-11)
    # metric length of the EL trace
    length = np.trapezoid(
        [Fe.value(x, v) for x, v in zip(el.positions, el.velocities)], el.times
    )
    arc = rl.integrate_geodesic(Fe, x0, v0, float(length), unit_speed=True, tol=1e-11)
    el_pts = el.dense.sample(np.linspace(0.0, el.times[-1], 4001))[:, :2]
    arc_pts = arc.dense.sample(np.linspace(0.0, arc.times[-1], 4001))[:, :2]
    gap = rl.point_set_distance(el_pts, arc_pts)
    assert gap < 1e-6


def test_singular_fundamental_tensor_is_reported():
    # a linear function is 1-homogeneous but its half-square has a rank-1
    # velocity Hessian, so the spray solve must fail loudly
    thin = rl.parse_lagrangian("v1 - v2", dim=2)
    accel = rl.canonical_spray(thin)
    with pytest.raises(rl.SingularHessian):
        accel(np.zeros(2), np.array([2.0, 1.0]))
