"""HDV-side cost terms: undisrupted travel times and disruption penalties.

The base disruption functions accept numpy arrays as well as scalars, which
is how the brute-force oracle evaluates whole grids at once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import IndexOutOfRange, NonPositiveParameter, ParameterOutOfRange
from .types import Scenario, check_index


@dataclass(frozen=True)
class HdvCost:
    undisrupted_time_sum: float
    time_disruption: float
    energy_disruption: float


def undisrupted_travel_time(hdv_index: int, scenario: Scenario) -> float:
    """Time for HDV ``hdv_index`` to reach the merge point at its desired speed."""
    if not 1 <= hdv_index <= scenario.N:
        raise IndexOutOfRange(f"HDV index {hdv_index} not in 1..{scenario.N}")
    h = scenario.hdv(hdv_index)
    return (scenario.L - h.x) / h.v_d


def _check_base(v_d, u_bar):
    if np.any(np.asarray(v_d) <= 0) or np.any(np.asarray(u_bar) <= 0):
        raise NonPositiveParameter("v_d and u_bar must be positive")


def base_time_disruption(v_d, v_m, u_bar):
    """Delay of the HDV directly behind the AV: max(v_d - v_m, 0)^2 / (2 u_bar v_d)."""
    _check_base(v_d, u_bar)
    gap = np.maximum(np.subtract(v_d, v_m), 0.0)
    return gap * gap / (2.0 * u_bar * v_d)


def base_energy_disruption(v_d, v_m, u_bar):
    """Extra control effort of that HDV: u_bar * max(v_d - v_m, 0) / 2."""
    _check_base(v_d, u_bar)
    return 0.5 * u_bar * np.maximum(np.subtract(v_d, v_m), 0.0)


def discount_factor(beta, z_ik):
    """exp(-beta * z): attenuation of a disruption over spacing ``z_ik``."""
    if not 0.0 < beta < 1.0:
        raise ParameterOutOfRange(f"beta must lie in (0, 1), got {beta!r}")
    if np.any(np.asarray(z_ik) < 0):
        raise ParameterOutOfRange("spacing must be nonnegative")
    return np.exp(-beta * np.asarray(z_ik, dtype=float))


def inter_hdv_distance(i: int, k: int, t, scenario: Scenario):
    """Distance from HDV ``i`` up to HDV ``k`` at time ``t`` under constant speeds.

    Clipped at zero when a faster follower would otherwise have overtaken.
    """
    hi, hk = scenario.hdv(i), scenario.hdv(k)
    elapsed = np.subtract(t, scenario.t0)
    z = (hk.x - hi.x) + elapsed * (hk.v_d - hi.v_d)
    return np.maximum(z, 0.0)


def discount_sum(k: int, t_m, scenario: Scenario):
    """Sum over i >= k of the discount factor between HDVs i and k at ``t_m``."""
    total = np.zeros_like(np.asarray(t_m, dtype=float))
    for i in range(k, scenario.N + 1):
        if i == k:
            total = total + 1.0
        else:
            total = total + discount_factor(scenario.model.beta, inter_hdv_distance(i, k, t_m, scenario))
    return total


def undisrupted_time_sum(scenario: Scenario) -> float:
    return math.fsum(undisrupted_travel_time(i, scenario) for i in range(1, scenario.N + 1))


def hdv_cost(k: int, v_m: float, t_m: float, scenario: Scenario) -> HdvCost:
    """HDV travel-time and energy terms when the AV merges as the ``k``-th vehicle."""
    check_index(k, scenario)
    base = undisrupted_time_sum(scenario)
    if k == scenario.N + 1:
        return HdvCost(base, 0.0, 0.0)
    v_dk = scenario.hdv(k).v_d
    u_bar = scenario.model.u_bar
    weight = float(discount_sum(k, t_m, scenario))
    return HdvCost(
        base,
        float(base_time_disruption(v_dk, v_m, u_bar)) * weight,
        float(base_energy_disruption(v_dk, v_m, u_bar)) * weight,
    )
