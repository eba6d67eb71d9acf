"""Free-space Green function of the axisymmetric eddy-current operator.

Phi(x; x0) solves  div((1/r) grad(r Phi)) = -delta_{x0}  in the half-plane
r > 0 and is the azimuthal component of the 3D Laplace kernel integrated
over a current loop of radius r0:

    Phi = (1 / 2 pi) sqrt(r0 / r) Q_{1/2}(t),   t = 1 + |x - x0|^2 / (2 r r0)

Two independent evaluation routes are provided: a periodic quadrature of
the loop integral and a closed form through the Legendre function Q_{1/2}.
"""

import math
from typing import Tuple

import numpy as np
from pydantic import BaseModel, Field
from scipy import integrate, special

from eddy_lsm.exceptions import SingularPointError
from eddy_lsm.models.geometry import Point2

COINCIDENCE_TOLERANCE = 1e-6
ELLIPTIC_LIMIT = 2.0  # elliptic representation for t <= 2, hypergeometric series beyond
_Q_HALF_LARGE = math.pi / (4.0 * math.sqrt(2.0))


class GreenEval(BaseModel):
    """Value and gradient of Phi at one point."""

    value: float = Field(..., description="Phi(x; x0)")
    grad_r: float = Field(..., description="dPhi/dr at x (1/m)")
    grad_z: float = Field(..., description="dPhi/dz at x (1/m)")


def _check_pair(x: Point2, x0: Point2) -> None:
    if x.r <= 0.0 or x0.r <= 0.0:
        raise SingularPointError(f"Green function needs r > 0 and r0 > 0, got r={x.r}, r0={x0.r}")
    if x.distance_to(x0) < COINCIDENCE_TOLERANCE * x0.r:
        raise SingularPointError(f"Evaluation point {x} coincides with the source {x0}")


def legendre_q_half(tm1: np.ndarray) -> np.ndarray:
    """Q_{1/2}(t) for t = 1 + tm1, tm1 > 0.

    Taking ``t - 1`` as input keeps the logarithmic regime near t = 1 accurate.
    """
    tm1 = np.asarray(tm1, dtype=float)
    t = 1.0 + tm1
    out = np.empty_like(t)

    near = t <= ELLIPTIC_LIMIT
    if np.any(near):
        p = tm1[near] / (tm1[near] + 2.0)  # 1 - m with m = 2 / (t + 1)
        m = 1.0 - p
        sqrt_m = np.sqrt(m)
        out[near] = t[near] * sqrt_m * special.ellipkm1(p) - 2.0 / sqrt_m * special.ellipe(m)

    far = ~near
    if np.any(far):
        tf = t[far]
        out[far] = _Q_HALF_LARGE * tf**-1.5 * special.hyp2f1(1.25, 0.75, 2.0, 1.0 / tf**2)
    return out


def legendre_q_half_derivative(tm1: np.ndarray) -> np.ndarray:
    """dQ_{1/2}/dt at t = 1 + tm1."""
    tm1 = np.asarray(tm1, dtype=float)
    t = 1.0 + tm1
    out = np.empty_like(t)

    near = t <= ELLIPTIC_LIMIT
    if np.any(near):
        tn = t[near]
        p = tm1[near] / (tm1[near] + 2.0)
        m = 1.0 - p
        sqrt_m = np.sqrt(m)
        k = special.ellipkm1(p)
        q_half = tn * sqrt_m * k - 2.0 / sqrt_m * special.ellipe(m)
        q_minus_half = sqrt_m * k
        # (t^2 - 1) Q' = (t Q_{1/2} - Q_{-1/2}) / 2
        out[near] = 0.5 * (tn * q_half - q_minus_half) / (tm1[near] * (tn + 1.0))

    far = ~near
    if np.any(far):
        tf = t[far]
        x = 1.0 / tf**2
        f = special.hyp2f1(1.25, 0.75, 2.0, x)
        df = (15.0 / 32.0) * special.hyp2f1(2.25, 1.75, 3.0, x)
        out[far] = _Q_HALF_LARGE * (-1.5 * tf**-2.5 * f - 2.0 * tf**-4.5 * df)
    return out


def green_values(
    r: np.ndarray, z: np.ndarray, r0: float, z0: float
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized Phi, dPhi/dr, dPhi/dz at points (r, z) for a source at (r0, z0).

    Points on the axis (r = 0) get 0 for all three. Points closer to the
    source than ``COINCIDENCE_TOLERANCE * r0`` raise.

    Returns:
        (value, grad_r, grad_z) arrays shaped like ``r``
    """
    r = np.asarray(r, dtype=float)
    z = np.asarray(z, dtype=float)
    r, z = np.broadcast_arrays(r, z)
    if r0 <= 0.0:
        raise SingularPointError(f"Source radius must be positive, got r0={r0}")

    value = np.zeros(r.shape)
    grad_r = np.zeros(r.shape)
    grad_z = np.zeros(r.shape)

    off_axis = r > 0.0
    ro = r[off_axis]
    dz = z[off_axis] - z0
    dist2 = (ro - r0) ** 2 + dz**2
    if np.any(dist2 < (COINCIDENCE_TOLERANCE * r0) ** 2):
        raise SingularPointError(f"Green function evaluated at its source ({r0}, {z0})")

    tm1 = dist2 / (2.0 * ro * r0)
    q = legendre_q_half(tm1)
    dq = legendre_q_half_derivative(tm1)
    scale = np.sqrt(r0 / ro) / (2.0 * math.pi)

    dt_dr = (ro**2 - r0**2 - dz**2) / (2.0 * ro**2 * r0)
    dt_dz = dz / (ro * r0)

    value[off_axis] = scale * q
    grad_r[off_axis] = scale * (-0.5 * q / ro + dq * dt_dr)
    grad_z[off_axis] = scale * dq * dt_dz
    return value, grad_r, grad_z


def green_closed_form(x: Point2, x0: Point2) -> float:
    """Phi(x; x0) through Q_{1/2}.

    Raises:
        SingularPointError: If the points coincide or lie on the axis
    """
    _check_pair(x, x0)
    tm1 = ((x.r - x0.r) ** 2 + (x.z - x0.z) ** 2) / (2.0 * x.r * x0.r)
    if tm1 <= 0.0:
        raise SingularPointError(f"Legendre argument t = 1 + {tm1} must exceed 1")
    return float(math.sqrt(x0.r / x.r) / (2.0 * math.pi) * legendre_q_half(np.array([tm1]))[0])


def _loop_integrand(theta: np.ndarray, a: float, b: float) -> np.ndarray:
    # sin(theta) (1/s1 - 1/s0) rewritten without cancellation
    sin_t = np.sin(theta)
    s0 = math.sqrt(a)
    s1 = np.sqrt(a - b * sin_t)
    return b * sin_t**2 / (s1 * s0 * (s0 + s1))


def green_quadrature(x: Point2, x0: Point2, n_nodes: int = 16, max_nodes: int = 1 << 16) -> float:
    """Phi(x; x0) by quadrature of the current-loop integral.

    Periodic trapezoidal rule, doubled from ``n_nodes`` until successive
    values agree to 1e-13 relative; adaptive Gauss-Kronrod beyond
    ``max_nodes`` (sharply peaked integrand near the source).

    Args:
        x: Evaluation point
        x0: Source point
        n_nodes: Initial number of nodes, at least 16

    Returns:
        Phi(x; x0)
    """
    _check_pair(x, x0)
    if n_nodes < 16:
        raise ValueError(f"n_nodes must be >= 16. Got: {n_nodes}")

    a = x.r**2 + x0.r**2 + (x.z - x0.z) ** 2
    b = 2.0 * x.r * x0.r
    prefactor = x0.r / (4.0 * math.pi)

    n = n_nodes
    previous = None
    while n <= max_nodes:
        theta = 2.0 * math.pi * np.arange(n) / n
        current = 2.0 * math.pi * float(np.mean(_loop_integrand(theta, a, b)))
        if previous is not None and abs(current - previous) <= 1e-13 * abs(current):
            return prefactor * current
        previous = current
        n *= 2

    value, _ = integrate.quad(
        lambda th: float(_loop_integrand(np.array([th]), a, b)[0]),
        -0.5 * math.pi,
        1.5 * math.pi,
        points=[0.5 * math.pi],
        epsabs=1e-15,
        epsrel=1e-13,
        limit=400,
    )
    return prefactor * value


def green_gradient(x: Point2, x0: Point2) -> Tuple[float, float]:
    """(dPhi/dr, dPhi/dz) at x."""
    _check_pair(x, x0)
    _, grad_r, grad_z = green_values(np.array([x.r]), np.array([x.z]), x0.r, x0.z)
    return float(grad_r[0]), float(grad_z[0])


def green_eval(x: Point2, x0: Point2) -> GreenEval:
    """Value and gradient together."""
    _check_pair(x, x0)
    value, grad_r, grad_z = green_values(np.array([x.r]), np.array([x.z]), x0.r, x0.z)
    return GreenEval(value=float(value[0]), grad_r=float(grad_r[0]), grad_z=float(grad_z[0]))


def far_field(x: Point2, x0: Point2) -> float:
    """Leading term r0^2 r / (4 |x|^3) of Phi at large |x| (x0 near the origin)."""
    return x0.r**2 * x.r / (4.0 * math.hypot(x.r, x.z) ** 3)


def near_axis(x: Point2, x0: Point2) -> float:
    """Leading term r0^2 r / (4 (r^2 + r0^2 + dz^2)^{3/2}) of Phi as r -> 0."""
    return x0.r**2 * x.r / (4.0 * (x.r**2 + x0.r**2 + (x.z - x0.z) ** 2) ** 1.5)
