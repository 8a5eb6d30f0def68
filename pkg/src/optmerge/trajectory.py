"""Minimum-energy AV trajectory between fixed endpoints.

With control ``u = a0*t + b0`` the AV state is a cubic in position and a
quadratic in speed. Coefficients are reported in absolute time, as the
closed-form solution states them, but are solved and evaluated in time
shifted to the observation instant: the absolute-time system is badly
conditioned once ``t0`` is large.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateHorizon, OutOfDomain
from .types import ConstraintLimits

MIN_HORIZON = 1e-9
FEASIBILITY_TOL = 1e-9

_GAUSS3_NODES, _GAUSS3_WEIGHTS = np.polynomial.legendre.leggauss(3)


@dataclass(frozen=True)
class TrajectoryCoefficients:
    """Trajectory on ``[valid_from, valid_to]``.

    ``accel``/``jerk`` are the control ``u(valid_from)`` and its slope;
    together with the initial state they fix the motion. The absolute-time
    coefficients ``a0..d0`` are derived properties.
    """

    jerk: float
    accel: float
    x_start: float
    v_start: float
    valid_from: float
    valid_to: float

    @property
    def a0(self) -> float:
        return self.jerk

    @property
    def b0(self) -> float:
        return self.accel - self.jerk * self.valid_from

    @property
    def c0(self) -> float:
        t0, a, b = self.valid_from, self.jerk, self.accel
        return 0.5 * a * t0 * t0 - b * t0 + self.v_start

    @property
    def d0(self) -> float:
        t0, a, b = self.valid_from, self.jerk, self.accel
        return -a * t0**3 / 6.0 + 0.5 * b * t0 * t0 - self.v_start * t0 + self.x_start

    @property
    def horizon(self) -> float:
        return self.valid_to - self.valid_from


def _horizon(t0: float, t_m: float) -> float:
    T = t_m - t0
    if not T >= MIN_HORIZON:
        raise DegenerateHorizon(f"merging time {t_m} must exceed t0 {t0} by at least {MIN_HORIZON}")
    return T


def solve_coefficients(x0, v0, t0, L, v_m, t_m) -> TrajectoryCoefficients:
    """Solve the four boundary conditions x(t0)=x0, v(t0)=v0, x(t_m)=L, v(t_m)=v_m."""
    T = _horizon(t0, t_m)
    P = L - x0 - v0 * T  # distance beyond coasting
    Q = v_m - v0
    jerk = (6.0 * Q * T - 12.0 * P) / T**3
    accel = (6.0 * P - 2.0 * Q * T) / T**2
    return TrajectoryCoefficients(jerk, accel, float(x0), float(v0), float(t0), float(t_m))


def evaluate(coeffs: TrajectoryCoefficients, t):
    """Return ``(u, v, x)`` at absolute time ``t`` (scalar or array)."""
    t_arr = np.asarray(t, dtype=float)
    slack = 1e-12 * max(1.0, abs(coeffs.valid_to))
    if np.any(t_arr < coeffs.valid_from - slack) or np.any(t_arr > coeffs.valid_to + slack):
        raise OutOfDomain(f"t outside [{coeffs.valid_from}, {coeffs.valid_to}]")
    tau = t_arr - coeffs.valid_from
    a, b = coeffs.jerk, coeffs.accel
    u = a * tau + b
    v = coeffs.v_start + tau * (b + 0.5 * a * tau)
    x = coeffs.x_start + tau * (coeffs.v_start + tau * (0.5 * b + a * tau / 6.0))
    if np.ndim(t) == 0:
        return float(u), float(v), float(x)
    return u, v, x


def energy_closed_form(x0, v0, t0, L, v_m, t_m):
    """Integral of u^2/2 for the solved trajectory, as a rational function of the horizon.

    Accepts numpy arrays for any argument.
    """
    T = np.subtract(t_m, t0)
    if np.any(T < MIN_HORIZON):
        raise DegenerateHorizon("merging time must exceed t0")
    D = np.subtract(L, x0)
    num = 2.0 * T * T * (v0 * v0 + v0 * v_m + v_m * v_m) - 6.0 * T * D * (v0 + v_m) + 6.0 * D * D
    E = num / T**3
    return float(E) if np.ndim(E) == 0 else E


def energy_quadrature(coeffs: TrajectoryCoefficients) -> float:
    """Three-point Gauss-Legendre rule; exact for the quadratic integrand."""
    lo, hi = coeffs.valid_from, coeffs.valid_to
    half = 0.5 * (hi - lo)
    taus = half * (_GAUSS3_NODES + 1.0)
    u = coeffs.jerk * taus + coeffs.accel
    return float(half * np.dot(_GAUSS3_WEIGHTS, 0.5 * u * u))


def energy_rational_coefficients(x0, v0, L, v_m):
    """(A1, A2, A3) with E(T) = (A1 T^2 + A2 T + A3) / T^3."""
    D = L - x0
    return (
        2.0 * (v0 * v0 + v0 * v_m + v_m * v_m),
        -6.0 * D * (v0 + v_m),
        6.0 * D * D,
    )


def monotone_horizon_bound(x0, v0, L, v_m) -> float:
    """Largest horizon below which the energy strictly decreases with the horizon.

    ``inf`` when the AV starts and ends at rest, where the energy is
    decreasing everywhere.
    """
    A1, A2, A3 = energy_rational_coefficients(x0, v0, L, v_m)
    if A1 == 0.0:
        return math.inf
    disc = max(A2 * A2 - 3.0 * A1 * A3, 0.0)
    return (-A2 - math.sqrt(disc)) / A1


@dataclass(frozen=True)
class FeasibilityReport:
    speed_ok: bool
    accel_ok: bool
    v_range: tuple[float, float]
    u_range: tuple[float, float]

    @property
    def ok(self) -> bool:
        return self.speed_ok and self.accel_ok

    def __bool__(self) -> bool:
        return self.ok


def extrema(coeffs: TrajectoryCoefficients):
    """Exact speed and control ranges over the whole horizon."""
    a, b, T = coeffs.jerk, coeffs.accel, coeffs.horizon
    u_ends = (b, a * T + b)
    v_end = coeffs.v_start + T * (b + 0.5 * a * T)
    v_cands = [coeffs.v_start, v_end]
    if a != 0.0:
        tau = -b / a
        if 0.0 < tau < T:
            v_cands.append(coeffs.v_start - 0.5 * b * b / a)
    return (min(v_cands), max(v_cands)), (min(u_ends), max(u_ends))


def feasibility(coeffs: TrajectoryCoefficients, limits: ConstraintLimits) -> FeasibilityReport:
    v_range, u_range = extrema(coeffs)
    tol = FEASIBILITY_TOL
    speed_ok = v_range[0] >= limits.v_min - tol and v_range[1] <= limits.v_max + tol
    accel_ok = u_range[0] >= limits.u_min - tol and u_range[1] <= limits.u_max + tol
    return FeasibilityReport(speed_ok, accel_ok, v_range, u_range)
