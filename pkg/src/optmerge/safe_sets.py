"""Admissible merging times and velocities for each sequence index.

For index ``k`` the AV must arrive at the merge point at least one reaction
gap behind HDV ``k-1`` and at least one reaction gap ahead of HDV ``k``.
Both HDVs are propagated at their desired speed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

from .errors import EmptyWindow, IndexOutOfRange, TimeBeforeObservation
from .types import Scenario, check_index

# Slack on gap inequalities, metres per metre of control-zone length.
GAP_RTOL = 1e-9

# Unbounded merging-time windows are searched over this many zero-control
# travel times past their earliest admissible instant.
HORIZON_TRAVEL_TIMES = 3.0


def hdv_position_at(hdv_index: int, t: float, scenario: Scenario) -> float:
    if not 1 <= hdv_index <= scenario.N:
        raise IndexOutOfRange(f"HDV index {hdv_index} not in 1..{scenario.N}")
    if t < scenario.t0:
        raise TimeBeforeObservation(f"t={t} precedes the observation time {scenario.t0}")
    h = scenario.hdv(hdv_index)
    return h.x + (t - scenario.t0) * h.v_d


@dataclass(frozen=True)
class SafeWindow:
    """Merging-velocity bound and merging-time interval for one index.

    The lower time bound depends on the merging velocity and is stored as
    ``t_lower(v) = t_lower_intercept + t_lower_slope * v``.
    """

    k: int
    v_upper: float
    t_lower_slope: float
    t_lower_intercept: float
    t_upper: float  # math.inf when no trailing HDV

    def t_lower(self, v_m: float) -> float:
        return self.t_lower_intercept + self.t_lower_slope * v_m

    def contains(self, t_m: float, v_m: float) -> bool:
        return 0.0 <= v_m <= self.v_upper and self.t_lower(v_m) <= t_m <= self.t_upper


def _raw_v_upper(k: int, t_probe: float, scenario: Scenario) -> float:
    lim = scenario.limits
    lead = hdv_position_at(k - 1, t_probe, scenario)
    trail = hdv_position_at(k, t_probe, scenario)
    return (lead - trail - lim.phi_h * scenario.hdv(k).v_d - 2.0 * lim.delta) / lim.phi_c


def safe_window(k: int, t_probe: float, scenario: Scenario) -> SafeWindow:
    """Build the window for index ``k``; raise :class:`EmptyWindow` if it is empty.

    ``t_probe`` is the instant at which the gap between HDVs ``k-1`` and
    ``k`` is measured for the velocity bound. With equal HDV speeds the
    choice does not matter.
    """
    check_index(k, scenario)
    if t_probe < scenario.t0:
        raise TimeBeforeObservation(f"t_probe={t_probe} precedes {scenario.t0}")
    lim, N, t0, L = scenario.limits, scenario.N, scenario.t0, scenario.L

    if 2 <= k <= N:
        v_upper = _raw_v_upper(k, t_probe, scenario)
        if v_upper <= 0.0:
            raise EmptyWindow(k, f"gap admits no positive merging speed (bound {v_upper:.6g})")
        v_upper = min(v_upper, lim.v_max)
    else:
        v_upper = lim.v_max

    if k >= 2:
        lead = scenario.hdv(k - 1)
        slope = lim.phi_c / lead.v_d
        intercept = t0 + (L + lim.delta - lead.x) / lead.v_d
    else:
        slope, intercept = 0.0, t0

    if k <= N:
        trail = scenario.hdv(k)
        t_upper = t0 + (L - lim.phi_h * trail.v_d - lim.delta - trail.x) / trail.v_d
    else:
        t_upper = math.inf

    window = SafeWindow(k, v_upper, slope, intercept, t_upper)
    if window.t_lower(0.0) > t_upper:
        raise EmptyWindow(k, "earliest safe arrival is after the latest safe arrival")
    if t_upper <= t0:
        raise EmptyWindow(k, "trailing HDV is already too close to the merge point")
    return window


class GapCheck(NamedTuple):
    """Outcome of the merge-gap test; truthiness is the combined verdict.

    ``leading``/``trailing`` are ``None`` when that neighbour is absent.
    """

    combined: bool
    leading: Optional[bool]
    trailing: Optional[bool]

    def __bool__(self) -> bool:
        return self.combined


def gap_margins(k: int, t_m: float, v_m: float, scenario: Scenario):
    """Slack (m) of the leading, trailing and combined gap inequalities at ``t_m``.

    The AV sits at the merge point at ``t_m``. Absent neighbours give ``None``;
    the combined margin then reduces to the single remaining component.
    """
    check_index(k, scenario)
    lim, N, L = scenario.limits, scenario.N, scenario.L
    leading = trailing = None
    if k >= 2:
        leading = hdv_position_at(k - 1, t_m, scenario) - L - (lim.phi_c * v_m + lim.delta)
    if k <= N:
        v_dk = scenario.hdv(k).v_d
        trailing = L - hdv_position_at(k, t_m, scenario) - (lim.phi_h * v_dk + lim.delta)
    if leading is not None and trailing is not None:
        z = hdv_position_at(k - 1, t_m, scenario) - hdv_position_at(k, t_m, scenario)
        combined = z - (lim.phi_c * v_m + lim.phi_h * scenario.hdv(k).v_d + 2.0 * lim.delta)
    else:
        combined = leading if leading is not None else trailing
    return leading, trailing, combined


def check_safe_gap(k: int, t_m: float, v_m: float, scenario: Scenario) -> GapCheck:
    tol = GAP_RTOL * max(1.0, scenario.L)
    leading, trailing, combined = gap_margins(k, t_m, v_m, scenario)
    ok = lambda m: None if m is None else m >= -tol  # noqa: E731
    return GapCheck(True if combined is None else combined >= -tol, ok(leading), ok(trailing))


@dataclass(frozen=True)
class SearchRegion:
    """The window of index ``k`` as a searchable region.

    Adds two bounds the window itself does not carry: the merging speed is
    at least ``max(0, v_min)``, and the horizon is at least ``(L - x0) / v_max``
    because any shorter one forces the AV above ``v_max`` on average. A
    missing trailing HDV is replaced by a finite horizon cap.
    """

    k: int
    v_lo: float
    v_hi: float
    t_lower_slope: float
    t_lower_intercept: float
    t_floor: float
    t_hi: float
    capped: bool

    def t_lo(self, v_m: float) -> float:
        return max(self.t_lower_intercept + self.t_lower_slope * v_m, self.t_floor)

    def contains(self, t_m: float, v_m: float, tol: float = 1e-9) -> bool:
        return (
            self.v_lo - tol <= v_m <= self.v_hi + tol
            and self.t_lo(v_m) - tol <= t_m <= self.t_hi + tol
        )


def search_region(k: int, scenario: Scenario) -> SearchRegion:
    lim, t0, av = scenario.limits, scenario.t0, scenario.av
    window = safe_window(k, scenario.t0 if k > scenario.N or k == 1 else _probe(k, scenario), scenario)
    v_lo = max(0.0, lim.v_min)
    v_hi = window.v_upper
    t_floor = t0 + (scenario.L - av.position) / lim.v_max
    if window.t_upper == math.inf:
        t_hi = max(window.t_lower(v_hi), t_floor) + HORIZON_TRAVEL_TIMES * (
            scenario.L - av.position
        ) / max(av.velocity, 1.0)
        capped = True
    else:
        t_hi, capped = window.t_upper, False
    if t_hi < t_floor <= t_hi + 1e-12 * max(1.0, abs(t_hi)):
        t_floor = t_hi  # equal up to rounding: keep the single admissible instant
    if v_hi < v_lo:
        raise EmptyWindow(k, f"merging-speed bound {v_hi:.6g} is below v_min {v_lo:.6g}")
    region = SearchRegion(
        k, v_lo, v_hi, window.t_lower_slope, window.t_lower_intercept, t_floor, t_hi, capped
    )
    if region.t_lo(v_lo) > t_hi:
        raise EmptyWindow(k, "no safe arrival time is reachable within the speed limit")
    if region.t_lo(v_hi) > t_hi:
        # Clip the speed range to where the time interval is nonempty.
        if window.t_lower_slope > 0:
            v_cut = (t_hi - window.t_lower_intercept) / window.t_lower_slope
            region = SearchRegion(
                k, v_lo, min(v_hi, v_cut), window.t_lower_slope,
                window.t_lower_intercept, t_floor, t_hi, capped,
            )
    return region


def _probe(k: int, scenario: Scenario) -> float:
    """Measure the gap at the latest safe arrival, where it is exact for the window."""
    lim = scenario.limits
    trail = scenario.hdv(k)
    t_upper = scenario.t0 + (scenario.L - lim.phi_h * trail.v_d - lim.delta - trail.x) / trail.v_d
    return max(t_upper, scenario.t0)
