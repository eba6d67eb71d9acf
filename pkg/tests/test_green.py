"""Tests for the axisymmetric free-space Green function."""

import math

import numpy as np
import pytest
from scipy import integrate

from eddy_lsm.exceptions import SingularPointError
from eddy_lsm.models.geometry import Point2
from eddy_lsm.solvers.green import (
    far_field,
    green_closed_form,
    green_eval,
    green_gradient,
    green_quadrature,
    green_values,
    legendre_q_half,
    legendre_q_half_derivative,
    near_axis,
)

SOURCE = Point2(r=8.165e-3, z=0.0)

PAIRS = [
    (Point2(r=9e-3, z=1e-3), SOURCE),
    (Point2(r=12e-3, z=-4e-3), SOURCE),
    (Point2(r=1e-3, z=2e-3), SOURCE),
    (Point2(r=8.2e-3, z=0.05e-3), SOURCE),
    (Point2(r=0.03, z=0.05), SOURCE),
]


def q_half_integral(t: float, u_max: float = 60.0) -> float:
    """Q_{1/2}(t) from the Laplace-type integral representation.

    The integrand decays like exp(-1.5 u), so the tail beyond ``u_max`` is far
    below double precision and cosh never overflows.
    """
    root = math.sqrt(t * t - 1.0)
    value, _ = integrate.quad(
        lambda u: (t + root * math.cosh(u)) ** -1.5, 0.0, u_max, epsabs=0.0, epsrel=1e-13, limit=200
    )
    return value


class TestLegendre:
    @pytest.mark.parametrize("tm1", [1e-4, 0.1, 0.5, 1.0, 3.0, 50.0])
    def test_matches_integral_representation(self, tm1):
        assert legendre_q_half(np.array([tm1]))[0] == pytest.approx(q_half_integral(1.0 + tm1), rel=1e-9)

    def test_continuous_across_branches(self):
        below, above = legendre_q_half(np.array([1.0 - 1e-10, 1.0 + 1e-10]))
        assert below == pytest.approx(above, rel=1e-8)
        d_below, d_above = legendre_q_half_derivative(np.array([1.0 - 1e-10, 1.0 + 1e-10]))
        assert d_below == pytest.approx(d_above, rel=1e-7)

    def test_large_argument(self):
        t = 1e6
        expected = math.pi / (4.0 * math.sqrt(2.0)) * t**-1.5
        assert legendre_q_half(np.array([t - 1.0]))[0] == pytest.approx(expected, rel=1e-6)

    @pytest.mark.parametrize("tm1", [0.05, 0.7, 1.5, 4.0])
    def test_derivative_finite_difference(self, tm1):
        step = 1e-6 * tm1
        values = legendre_q_half(np.array([tm1 - step, tm1 + step]))
        numeric = (values[1] - values[0]) / (2.0 * step)
        assert legendre_q_half_derivative(np.array([tm1]))[0] == pytest.approx(numeric, rel=1e-6)


class TestGreenFunction:
    @pytest.mark.parametrize("x,x0", PAIRS)
    def test_two_routes_agree(self, x, x0):
        closed = green_closed_form(x, x0)
        quadrature = green_quadrature(x, x0)
        assert closed > 0.0
        assert closed == pytest.approx(quadrature, rel=1e-9)

    def test_two_routes_agree_on_random_pairs(self, rng):
        r = rng.uniform(5e-4, 0.03, size=(1000, 2))
        z = rng.uniform(-0.03, 0.03, size=(1000, 2))
        checked = 0
        for (r1, r0), (z1, z0) in zip(r, z):
            if math.hypot(r1 - r0, z1 - z0) < 5e-4:
                continue
            x, x0 = Point2(r=r1, z=z1), Point2(r=r0, z=z0)
            assert green_closed_form(x, x0) == pytest.approx(green_quadrature(x, x0), rel=1e-9)
            checked += 1
        assert checked > 950

    @pytest.mark.parametrize("x,x0", PAIRS)
    def test_reciprocity(self, x, x0):
        assert x.r * green_closed_form(x, x0) == pytest.approx(x0.r * green_closed_form(x0, x), rel=1e-12)

    def test_near_axis_asymptotics(self):
        x = Point2(r=1e-6, z=3e-3)
        assert green_closed_form(x, SOURCE) == pytest.approx(near_axis(x, SOURCE), rel=1e-4)

    def test_far_field_asymptotics(self):
        x = Point2(r=0.6, z=0.8)
        assert green_closed_form(x, SOURCE) == pytest.approx(far_field(x, SOURCE), rel=1e-3)

    @pytest.mark.parametrize("x,x0", PAIRS[:4])
    def test_gradient_finite_difference(self, x, x0):
        step = 1e-6 * x.distance_to(x0)
        d_r = (
            green_closed_form(Point2(r=x.r + step, z=x.z), x0) - green_closed_form(Point2(r=x.r - step, z=x.z), x0)
        ) / (2.0 * step)
        d_z = (
            green_closed_form(Point2(r=x.r, z=x.z + step), x0) - green_closed_form(Point2(r=x.r, z=x.z - step), x0)
        ) / (2.0 * step)
        grad_r, grad_z = green_gradient(x, x0)
        assert grad_r == pytest.approx(d_r, rel=1e-5)
        assert grad_z == pytest.approx(d_z, rel=1e-5, abs=1e-9 * abs(grad_r))

    def test_eval_bundles_value_and_gradient(self):
        x = PAIRS[0][0]
        result = green_eval(x, SOURCE)
        assert result.value == pytest.approx(green_closed_form(x, SOURCE), rel=1e-14)
        assert (result.grad_r, result.grad_z) == pytest.approx(green_gradient(x, SOURCE))

    def test_vectorized_values(self):
        r = np.array([0.0, 9e-3, 12e-3])
        z = np.array([0.0, 1e-3, -4e-3])
        value, grad_r, grad_z = green_values(r, z, SOURCE.r, SOURCE.z)
        assert value[0] == 0.0 and grad_r[0] == 0.0 and grad_z[0] == 0.0
        assert value[1] == pytest.approx(green_closed_form(Point2(r=9e-3, z=1e-3), SOURCE), rel=1e-14)
        assert value[2] == pytest.approx(green_closed_form(Point2(r=12e-3, z=-4e-3), SOURCE), rel=1e-14)

    def test_symmetric_in_z(self):
        above = green_closed_form(Point2(r=9e-3, z=2e-3), SOURCE)
        below = green_closed_form(Point2(r=9e-3, z=-2e-3), SOURCE)
        assert above == pytest.approx(below, rel=1e-14)

    def test_coincident_points_raise(self):
        with pytest.raises(SingularPointError):
            green_closed_form(SOURCE, SOURCE)
        with pytest.raises(SingularPointError):
            green_quadrature(Point2(r=SOURCE.r + 1e-12, z=0.0), SOURCE)
        with pytest.raises(SingularPointError):
            green_values(np.array([SOURCE.r]), np.array([0.0]), SOURCE.r, SOURCE.z)

    def test_axis_point_raises_for_scalar_routes(self):
        with pytest.raises(SingularPointError):
            green_closed_form(Point2(r=0.0, z=1e-3), SOURCE)
