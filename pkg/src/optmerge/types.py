"""Domain types for the single-AV merging problem.

Every type here is a frozen dataclass. Units are SI throughout and times are
absolute seconds, so the observation instant ``t0`` is carried explicitly.

HDVs are indexed 1..N from the merge point backwards (HDV 1 is the closest
to the merge point). In merging sequence ``k`` the AV crosses the merge point
between HDV ``k-1`` (ahead, absent for ``k == 1``) and HDV ``k`` (behind,
absent for ``k == N + 1``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

from .errors import (
    AlphaOutOfRange,
    AssumptionViolated,
    IndexOutOfRange,
    NonPositiveParameter,
    ParameterOutOfRange,
    SpeedMismatch,
    UnorderedHdvs,
)

# Relative tolerance for detecting equal speeds and equal spacing.
ASSUMPTION2_RTOL = 1e-9


@dataclass(frozen=True)
class VehicleState:
    position: float  # m, along the vehicle's lane from a common origin
    velocity: float  # m/s


@dataclass(frozen=True)
class Hdv:
    state: VehicleState
    desired_speed: float

    @property
    def x(self) -> float:
        return self.state.position

    @property
    def v_d(self) -> float:
        return self.desired_speed


@dataclass(frozen=True)
class ConstraintLimits:
    v_min: float
    v_max: float
    u_min: float
    u_max: float
    phi_c: float  # AV reaction time, s
    phi_h: float  # HDV reaction time, s
    delta: float  # standstill gap, m


@dataclass(frozen=True)
class BehaviorModel:
    u_bar: float  # constant HDV accel/decel magnitude, m/s^2
    beta: float  # discount rate per metre of spacing


@dataclass(frozen=True)
class Scenario:
    t0: float
    av: VehicleState
    hdvs: tuple[Hdv, ...]
    L: float
    alpha: float
    limits: ConstraintLimits
    model: BehaviorModel

    @property
    def N(self) -> int:
        return len(self.hdvs)

    def hdv(self, i: int) -> Hdv:
        """Return HDV ``i`` using the 1-based convention."""
        if not 1 <= i <= self.N:
            raise IndexOutOfRange(f"HDV index {i} not in 1..{self.N}")
        return self.hdvs[i - 1]

    def with_alpha(self, alpha: float) -> "Scenario":
        return replace(self, alpha=alpha)

    @property
    def indices(self) -> range:
        return range(1, self.N + 2)


def make_scenario(
    *,
    t0: float,
    x0: float,
    v0: float,
    hdv_positions: Sequence[float],
    hdv_speeds: Sequence[float] | float,
    L: float,
    alpha: float,
    v_min: float = 0.0,
    v_max: float = 33.0,
    u_min: float = -7.0,
    u_max: float = 3.3,
    phi_c: float = 1.0,
    phi_h: float = 1.0,
    delta: float = 5.0,
    u_bar: float = 5.0,
    beta: float = 0.1,
) -> Scenario:
    """Convenience constructor: HDVs cruise at their desired speed."""
    if isinstance(hdv_speeds, (int, float)):
        hdv_speeds = [float(hdv_speeds)] * len(hdv_positions)
    hdvs = tuple(
        Hdv(VehicleState(float(x), float(v)), float(v))
        for x, v in zip(hdv_positions, hdv_speeds)
    )
    return Scenario(
        t0=float(t0),
        av=VehicleState(float(x0), float(v0)),
        hdvs=hdvs,
        L=float(L),
        alpha=float(alpha),
        limits=ConstraintLimits(v_min, v_max, u_min, u_max, phi_c, phi_h, delta),
        model=BehaviorModel(u_bar, beta),
    )


def check_index(k: int, scenario: Scenario) -> int:
    if not 1 <= k <= scenario.N + 1:
        raise IndexOutOfRange(f"sequence index {k} not in 1..{scenario.N + 1}")
    return k


def _positive(name: str, value: float) -> None:
    if not value > 0 or not math.isfinite(value):
        raise NonPositiveParameter(f"{name} must be positive and finite, got {value!r}")


def validate_scenario(raw: Scenario) -> Scenario:
    """Check every scenario invariant and return the scenario unchanged.

    Raises one of the :mod:`optmerge.errors` scenario errors naming the
    first invariant that fails.
    """
    lim, mdl = raw.limits, raw.model
    if not 0.0 <= raw.alpha <= 1.0:
        raise AlphaOutOfRange(f"alpha must lie in [0, 1], got {raw.alpha!r}")
    _positive("L", raw.L)
    _positive("phi_c", lim.phi_c)
    _positive("phi_h", lim.phi_h)
    _positive("delta", lim.delta)
    _positive("u_max", lim.u_max)
    _positive("-u_min", -lim.u_min)
    _positive("v_max", lim.v_max)
    _positive("u_bar", mdl.u_bar)
    if lim.v_min < 0 or lim.v_min >= lim.v_max:
        raise ParameterOutOfRange(f"need 0 <= v_min < v_max, got {lim.v_min}, {lim.v_max}")
    if not 0.0 < mdl.beta < 1.0:
        raise ParameterOutOfRange(f"beta must lie in (0, 1), got {mdl.beta!r}")

    av = raw.av
    if av.velocity < 0:
        raise ParameterOutOfRange(f"AV velocity must be >= 0, got {av.velocity}")
    if not av.position < raw.L:
        raise ParameterOutOfRange(
            f"AV position {av.position} must lie before the merge point {raw.L}"
        )

    prev: Optional[float] = None
    for i, h in enumerate(raw.hdvs, start=1):
        _positive(f"desired speed of HDV {i}", h.desired_speed)
        if h.state.velocity != h.desired_speed:
            raise SpeedMismatch(
                f"HDV {i} velocity {h.state.velocity} != desired speed {h.desired_speed}"
            )
        if h.x > raw.L:
            raise ParameterOutOfRange(f"HDV {i} at {h.x} has already passed the merge point")
        if prev is not None and not prev > h.x:
            raise UnorderedHdvs(
                f"HDV positions must strictly decrease; HDV {i - 1} at {prev}, HDV {i} at {h.x}"
            )
        prev = h.x
    return raw


def hdv_spacing(scenario: Scenario) -> Optional[float]:
    """Common inter-HDV spacing under equal spacing, else ``None``."""
    xs = [h.x for h in scenario.hdvs]
    if len(xs) < 2:
        return None
    gaps = [a - b for a, b in zip(xs, xs[1:])]
    z = gaps[0]
    if all(math.isclose(g, z, rel_tol=ASSUMPTION2_RTOL) for g in gaps):
        return z
    return None


def satisfies_assumption2(scenario: Scenario) -> bool:
    """True when all HDVs share one desired speed and one spacing."""
    speeds = [h.v_d for h in scenario.hdvs]
    if any(not math.isclose(s, speeds[0], rel_tol=ASSUMPTION2_RTOL) for s in speeds):
        return False
    return scenario.N < 2 or hdv_spacing(scenario) is not None


@dataclass(frozen=True)
class GroupParameters:
    """Common speed and spacing of a homogeneous HDV platoon."""

    N: int
    v_d: float
    z: float = field(default=math.nan)


def group_parameters(scenario: Scenario) -> GroupParameters:
    if scenario.N == 0 or not satisfies_assumption2(scenario):
        raise AssumptionViolated("HDVs must share one speed and one spacing")
    z = hdv_spacing(scenario)
    return GroupParameters(scenario.N, scenario.hdvs[0].v_d, math.nan if z is None else z)
