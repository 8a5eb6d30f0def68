from dataclasses import replace

import pytest

from optmerge.errors import (
    AlphaOutOfRange, AssumptionViolated, IndexOutOfRange, NonPositiveParameter,
    ParameterOutOfRange, SpeedMismatch, UnorderedHdvs,
)
from optmerge.types import (
    Hdv, VehicleState, check_index, group_parameters, hdv_spacing, make_scenario,
    satisfies_assumption2, validate_scenario,
)

from conftest import platoon


def test_equal_spacing_is_valid_and_homogeneous():
    sc = validate_scenario(platoon())
    assert satisfies_assumption2(sc)
    assert hdv_spacing(sc) == 50.0
    g = group_parameters(sc)
    assert (g.N, g.v_d, g.z) == (3, 25.0, 50.0)


def test_unordered_hdvs_rejected():
    with pytest.raises(UnorderedHdvs):
        validate_scenario(platoon(positions=(250.0, 300.0)))


def test_speed_mismatch_rejected():
    sc = platoon(positions=(300.0,))
    bad = replace(sc, hdvs=(Hdv(VehicleState(300.0, 24.0), 25.0),))
    with pytest.raises(SpeedMismatch):
        validate_scenario(bad)


@pytest.mark.parametrize("kw, err", [
    (dict(alpha=1.5), AlphaOutOfRange),
    (dict(alpha=-0.1), AlphaOutOfRange),
    (dict(L=-1.0), NonPositiveParameter),
    (dict(delta=0.0), NonPositiveParameter),
    (dict(beta=1.0), ParameterOutOfRange),
    (dict(v_min=40.0), ParameterOutOfRange),
    (dict(x0=500.0), ParameterOutOfRange),
    (dict(v0=-1.0), ParameterOutOfRange),
])
def test_invalid_parameters(kw, err):
    with pytest.raises(err):
        validate_scenario(platoon(**kw))


def test_hdv_past_merge_point_rejected():
    with pytest.raises(ParameterOutOfRange):
        validate_scenario(platoon(positions=(410.0, 300.0)))


def test_validate_is_idempotent():
    sc = platoon()
    assert validate_scenario(validate_scenario(sc)) == sc


def test_assumption2_invariant_under_translation():
    for shift in (-1000.0, -37.5, 0.0, 12.25):
        sc = platoon(positions=(300 + shift, 250 + shift, 200 + shift), L=400 + shift, x0=shift)
        assert satisfies_assumption2(sc)
        sc = platoon(positions=(300 + shift, 250 + shift, 190 + shift), L=400 + shift, x0=shift)
        assert not satisfies_assumption2(sc)


def test_assumption2_needs_equal_speeds():
    sc = make_scenario(t0=0, x0=0, v0=20, hdv_positions=[300, 250, 200], hdv_speeds=[25, 25, 26],
                       L=400, alpha=0.5)
    assert not satisfies_assumption2(sc)
    with pytest.raises(AssumptionViolated):
        group_parameters(sc)


def test_index_conventions():
    sc = platoon()
    assert list(sc.indices) == [1, 2, 3, 4]
    assert sc.hdv(1).x == 300.0
    assert check_index(4, sc) == 4
    with pytest.raises(IndexOutOfRange):
        check_index(5, sc)
    with pytest.raises(IndexOutOfRange):
        sc.hdv(0)


def test_scenario_is_frozen():
    sc = platoon()
    with pytest.raises(AttributeError):
        sc.alpha = 0.2
