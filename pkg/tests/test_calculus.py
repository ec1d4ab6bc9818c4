"""Jet evaluation versus finite differences, plus homogeneity identities."""

import numpy as np
import pytest

import routhlab as rl
from routhlab import FD_STEP, StencilDomainError, chain_jet, fd_jet, jet

SHARP_H = float(np.finfo(float).eps) ** 0.25


def _models(rng):
    conformal = rl.MagneticLagrangian(
        2,
        lambda xs: [
            [1.0 + 0.3 * (xs[0] * xs[0] + xs[1] * xs[1]), 0.1 * xs[0]],
            [0.1 * xs[0], 1.2],
        ],
        beta=lambda xs: [0.2 * xs[1], -0.1 * xs[0]],
        potential=lambda xs: 0.4 * xs[0] * xs[0] + 0.1 * xs[1],
    )
    quartic = rl.PowerQuadraticLagrangian(2, np.diag([1.0, 1.5]), degree=4)
    disk = rl.poincare_disk_lagrangian()
    parsed = rl.parse_lagrangian(
        "0.5*(v1^2 + v2^2)*(1 + 0.2*sin(x1)) - 0.3*x2^2 + 0.1*v1*v2"
    )
    return [conformal, quartic, disk, parsed]


def _sample_state(model, rng):
    for _ in range(100):
        x = rng.uniform(-0.5, 0.5, model.dim)
        y = rng.uniform(-1.0, 1.0, model.dim)
        if np.dot(y, y) < 0.05:
            continue
        if model.in_domain(x, y):
            return x, y
    raise AssertionError("could not sample an in-domain state")


def test_jet_matches_finite_differences(rng):
    # cross-check the forward-mode jet against a central-difference stencil
    # at a step tuned for second derivatives
    worst = 0.0
    for model in _models(rng):
        for _ in range(25):
            x, y = _sample_state(model, rng)
            a = jet(model, x, y)
            b = fd_jet(model, x, y, h=SHARP_H)
            scale = 1.0 + abs(a.value)
            for name in ("d_x", "d_y", "d_yy", "d_xy"):
                gap = np.max(np.abs(getattr(a, name) - getattr(b, name))) / scale
                worst = max(worst, gap)
    assert worst <= 1e-6, f"jet vs finite differences disagree by {worst:.3e}"


def test_finite_differences_exact_on_quadratics(rng):
    # a quadratic Lagrangian has an exact central-difference jet even
    # at a large step, which pins down stencil coefficients
    L = rl.MechanicalLagrangian(
        2, np.array([[2.0, 0.3], [0.3, 1.0]]), potential=lambda xs: 0.7 * xs[0] * xs[1]
    )
    x = np.array([0.4, -0.2])
    y = np.array([1.1, 0.5])
    a = jet(L, x, y)
    b = fd_jet(L, x, y, h=0.25)
    for name in ("value", "d_x", "d_y", "d_yy", "d_xy"):
        np.testing.assert_allclose(
            getattr(a, name), getattr(b, name), atol=5e-12, err_msg=name
        )


def test_default_step_is_cube_root_of_eps():
    assert np.isclose(FD_STEP, np.finfo(float).eps ** (1 / 3))


def test_stencil_domain_error_near_boundary():
    disk = rl.poincare_disk_lagrangian()
    x = np.array([1.0 - 1e-10, 0.0])  # inside, but every x-stencil leaves
    y = np.array([0.0, 1.0])
    with pytest.raises(StencilDomainError):
        fd_jet(disk, x, y, h=1e-4)


def test_chain_jet_reproduces_direct_composition(rng):
    # phi(L) = L^3 computed two ways
    L = rl.MechanicalLagrangian(2, np.eye(2), potential=lambda xs: -xs[0] * xs[1])
    x, y = rng.uniform(0.2, 0.8, 2), rng.uniform(0.5, 1.0, 2)
    j = jet(L, x, y)
    v = j.value
    cubed = chain_jet(j, v ** 3, 3 * v ** 2, 6 * v)
    cube_model = rl.parse_lagrangian(
        "(0.5*(v1^2+v2^2) + x1*x2)^3", dim=2
    )
    direct = jet(cube_model, x, y)
    np.testing.assert_allclose(cubed.value, direct.value, rtol=1e-12)
    np.testing.assert_allclose(cubed.d_y, direct.d_y, atol=1e-11)
    np.testing.assert_allclose(cubed.d_yy, direct.d_yy, atol=1e-10)
    np.testing.assert_allclose(cubed.d_xy, direct.d_xy, atol=1e-10)


def test_euler_identity_for_homogeneous_values(rng):
    """y.d_y == degree * value for fiberwise homogeneous models."""
    quartic = rl.PowerQuadraticLagrangian(2, np.diag([1.0, 1.5]), degree=4)
    worst = 0.0
    for _ in range(1000):
        x = rng.uniform(-1.0, 1.0, 2)
        y = rng.uniform(-1.0, 1.0, 2)
        if np.dot(y, y) < 1e-4:
            continue
        j = quartic.eval(x, y)
        scale = 1.0 + abs(j.value)
        worst = max(worst, abs(float(y @ j.d_y) - 4.0 * j.value) / scale)
    assert worst <= 1e-10


def test_jet_validates_shapes_and_finiteness():
    L = rl.MechanicalLagrangian(2, np.eye(2))
    with pytest.raises(ValueError):
        jet(L, np.zeros(3), np.ones(2))
    with pytest.raises(ValueError):
        jet(L, np.array([np.nan, 0.0]), np.ones(2))


def test_fiber_jet_agrees_with_full_jet(rng):
    for model in _models(rng):
        x, y = _sample_state(model, rng)
        full = model.eval(x, y)
        val, d_y, d_yy = model.fiber_jet(x, y)
        assert np.isclose(val, full.value, rtol=1e-13, atol=1e-13)
        np.testing.assert_allclose(d_y, full.d_y, atol=1e-12)
        np.testing.assert_allclose(d_yy, full.d_yy, atol=1e-12)
