import itertools
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mcf_ttdl.mcf_model import (CoreDispersion, HeteroMCFSpec, Layout, MCFGeometry,
                                TrenchProfile, core_positions, validate_geometry)


def test_single_core_at_origin():
    g = MCFGeometry(core_count=1, layout="single", core_pitch=123.0)
    assert core_positions(g) == [(0.0, 0.0)]


def test_hex_first_outer_core_on_x_axis():
    pos = core_positions(MCFGeometry.seven_core())
    assert pos[0] == (0.0, 0.0)
    assert pos[1] == pytest.approx((35.0, 0.0))


def test_hex_ring_radius_and_adjacent_distance():
    pos = core_positions(MCFGeometry.seven_core())
    outer = pos[1:]
    for x, y in outer:
        assert math.hypot(x, y) == pytest.approx(35.0, rel=1e-12)
    for a, b in zip(outer, outer[1:] + outer[:1]):
        assert math.dist(a, b) == pytest.approx(35.0, rel=1e-9)


def test_hex_ordering_is_counterclockwise():
    pos = core_positions(MCFGeometry.seven_core())
    angles = [math.atan2(y, x) % (2 * math.pi) for x, y in pos[1:]]
    assert angles == sorted(angles)


def test_positions_deterministic():
    g = MCFGeometry.seven_core()
    assert core_positions(g) == core_positions(g)


def test_unsupported_layout_count():
    with pytest.raises(ValueError, match="unsupported"):
        core_positions(MCFGeometry(core_count=4, layout="hex_1ring"))


def test_validate_commercial_fiber_margin():
    r = validate_geometry(MCFGeometry.seven_core(core_radius_nominal=5.0))
    assert r.passed
    assert r.check("core_inside_cladding").margin == pytest.approx(22.5)


def test_validate_core_on_cladding_edge_fails():
    g = MCFGeometry(7, 80.0, 35.0, "hex_1ring", 5.0)
    r = validate_geometry(g)
    assert not r.passed
    assert [c.rule for c in r.violations] == ["core_inside_cladding"]
    assert r.check("core_inside_cladding").margin == pytest.approx(0.0, abs=1e-12)


def test_validate_zero_pitch():
    r = validate_geometry(MCFGeometry(7, 125.0, 0.0))
    assert not r.passed
    assert "pitch_positive" in [c.rule for c in r.violations]


def test_checked_raises_with_rule():
    with pytest.raises(ValueError, match="pitch_positive"):
        MCFGeometry(7, 125.0, 0.0).checked()


def test_report_records_layout():
    rec = dict(validate_geometry(MCFGeometry.seven_core()).records())
    assert rec["pass"] is True
    assert rec["core_inside_cladding.pass"] is True


def _direct_recheck(g):
    if g.core_count < 1 or g.cladding_diameter <= 0 or g.core_radius_nominal <= 0:
        return False
    if g.layout is Layout.HEX_1RING and g.core_count != 7:
        return False
    if g.layout is Layout.SINGLE and g.core_count != 1:
        return False
    if g.core_count > 1 and g.core_pitch <= 0:
        return False
    if g.layout is Layout.SINGLE:
        pos = [(0.0, 0.0)]
    else:
        pos = [(0.0, 0.0)] + [(g.core_pitch * math.cos(k * math.pi / 3),
                                g.core_pitch * math.sin(k * math.pi / 3)) for k in range(6)]
    r_max = max(math.hypot(*p) for p in pos)
    if not r_max + g.core_radius_nominal < g.cladding_diameter / 2:
        return False
    for a, b in itertools.combinations(pos, 2):
        if math.dist(a, b) < g.core_pitch * (1 - 1e-9):
            return False
    return True


@settings(max_examples=300, deadline=None)
@given(count=st.sampled_from([1, 7, 3]),
       layout=st.sampled_from(["single", "hex_1ring"]),
       clad=st.floats(-10, 200),
       pitch=st.floats(-5, 80),
       radius=st.floats(-1, 12))
def test_validate_matches_direct_recheck(count, layout, clad, pitch, radius):
    g = MCFGeometry(count, clad, pitch, layout, radius)
    assert validate_geometry(g).passed == _direct_recheck(g)


def test_trench_profile_interfaces():
    p = TrenchProfile(4.0, 0.36, 3.0, 4.0, 1.0)
    assert p.interfaces == (4.0, 7.0, 11.0)


@pytest.mark.parametrize("field", ["a1", "delta1", "a2", "w", "delta2"])
def test_trench_profile_rejects_non_positive(field):
    kw = dict(a1=4.0, delta1=0.36, a2=3.0, w=4.0, delta2=1.0)
    kw[field] = 0.0
    with pytest.raises(ValueError, match=field):
        TrenchProfile(**kw)


def test_core_dispersion_physical_tau0_must_be_positive():
    with pytest.raises(ValueError, match="relative"):
        CoreDispersion(0.0, 17.0)
    assert CoreDispersion(0.0, 17.0, relative=True).tau0 == 0.0


def test_spec_core_count_must_match_geometry():
    cores = [CoreDispersion(0.0, 17.0, relative=True)] * 3
    with pytest.raises(ValueError, match="7-core"):
        HeteroMCFSpec(cores, geometry=MCFGeometry.seven_core())


def test_spec_length_positive():
    with pytest.raises(ValueError, match="length"):
        HeteroMCFSpec([CoreDispersion(1.0, 17.0)], length=0.0)


def test_spec_default_labels():
    spec = HeteroMCFSpec([CoreDispersion(1.0, 17.0)] * 2)
    assert spec.labels == ("core 1", "core 2")
