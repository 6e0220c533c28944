import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mcf_ttdl.rf_filter import (NULL_FLOOR_DB, fsr_estimate, response_metrics, spectral_fsr,
                                transfer_function)
from mcf_ttdl.taps import TapSet
from oracles import phasor_sum

THREE = TapSet.uniform(3, 100.0)


def test_three_taps_dc_and_passbands():
    r = transfer_function(THREE, 0.0, 20.0, 2001)
    mag = r.magnitude
    assert mag[0] == 3.0
    assert r.peak == 3.0
    assert mag[1000] == pytest.approx(3.0, rel=1e-12)  # 10 GHz
    assert mag[2000] == pytest.approx(3.0, rel=1e-12)


def test_three_taps_nulls():
    for f in (10 / 3, 20 / 3):
        assert phasor_sum(THREE.delays, THREE.amplitudes, f) < 1e-12
        r = transfer_function(THREE, f, f + 1.0, 2)
        assert r.magnitude[0] < 1e-12


def test_three_taps_midpoint():
    r = transfer_function(THREE, 0.0, 5.0, 2)
    assert r.magnitude[1] == pytest.approx(1.0, rel=1e-12)
    assert r.mag_db()[1] == pytest.approx(20 * math.log10(1 / 3), abs=1e-12)
    assert r.mag_db()[1] == pytest.approx(-9.54, abs=0.01)


def test_matches_brute_force_dense():
    taps = TapSet((0.0, 37.0, 81.5, 140.0), (1.0, 0.4, 0.8, 0.25))
    r = transfer_function(taps, 0.0, 40.0, 4001)
    brute = [phasor_sum(taps.delays, taps.amplitudes, f) for f in r.freq]
    assert np.allclose(r.magnitude, brute, rtol=1e-12, atol=1e-13)


def test_single_tap_all_pass():
    r = transfer_function(TapSet((12.0,), (0.7,)), 0.0, 50.0, 501)
    assert np.allclose(r.magnitude, 0.7, rtol=1e-15)


def test_grid_inclusive_and_validated():
    r = transfer_function(THREE, 1.0, 3.0, 5)
    assert r.freq.tolist() == [1.0, 1.5, 2.0, 2.5, 3.0]
    with pytest.raises(ValueError):
        transfer_function(THREE, 3.0, 1.0, 5)
    with pytest.raises(ValueError):
        transfer_function(THREE, 0.0, 1.0, 1)


def test_phase_relative_to_first_tap_delay():
    r = transfer_function(TapSet((0.0,), (1.0,)), 0.0, 1.0, 3)
    assert np.allclose(r.phase, 0.0)


@pytest.mark.parametrize("spacing,want", [(50.0, 20.0), (100.0, 10.0),
                                          (195.8955218279707, 5.104761919357037)])
def test_fsr_uniform(spacing, want):
    est = fsr_estimate(TapSet.uniform(5, spacing))
    assert est.method == "analytic"
    assert est.fsr == pytest.approx(want, rel=1e-12)


def test_fsr_spectral_for_jittered_taps():
    taps = TapSet((0.0, 100.0, 200.5, 300.0), (1.0, 1.0, 1.0, 1.0))
    est = fsr_estimate(taps)
    assert est.method == "spectral"
    assert est.fsr == pytest.approx(10.0, rel=0.01)


def test_spectral_matches_analytic_on_uniform():
    assert spectral_fsr(TapSet.uniform(7, 50.0)) == pytest.approx(20.0, rel=1e-6)


def test_fsr_needs_two_taps():
    with pytest.raises(ValueError):
        fsr_estimate(TapSet((0.0,), (1.0,)))


def test_metrics_three_taps():
    m = response_metrics(transfer_function(THREE, 0.0, 10.0, 1001))
    assert m.sidelobe_level_db == pytest.approx(20 * math.log10(1 / 3), abs=1e-9)
    # |1 + 2 cos(theta)| / 3 = 1/sqrt(2), theta = 2 pi f * 0.1 ns; doubled for a DC passband.
    theta = math.acos((3 / math.sqrt(2) - 1) / 2)
    assert m.bandwidth_3db == pytest.approx(2 * theta / (2 * math.pi * 0.1), rel=1e-9)
    assert m.null_depth_db == NULL_FLOOR_DB
    assert m.passbands[:2] == pytest.approx((0.0, 10.0), abs=1e-9)


def test_metrics_two_taps_null_floor():
    m = response_metrics(transfer_function(TapSet.uniform(2, 100.0), 0.0, 20.0, 2001))
    assert m.null_depth_db == NULL_FLOOR_DB
    m = response_metrics(transfer_function(TapSet.uniform(2, 100.0), 0.0, 20.0, 2001), floor=-300.0)
    assert m.null_depth_db < -200.0


def test_metrics_raised_cosine_taps():
    # |1 + 2z + z^2| = 4 cos^2(theta/2): no sidelobes and a wider main lobe
    # than three equal taps; both tap sets have exact zeros between passbands.
    tri = TapSet((0.0, 100.0, 200.0), (1.0, 2.0, 1.0))
    m_tri = response_metrics(transfer_function(tri, 0.0, 10.0, 1001))
    m_eq = response_metrics(transfer_function(THREE, 0.0, 10.0, 1001))
    half = 2 * math.acos(2 ** -0.25)
    assert m_tri.bandwidth_3db == pytest.approx(2 * half / (2 * math.pi * 0.1), rel=1e-9)
    assert m_tri.bandwidth_3db > m_eq.bandwidth_3db
    assert m_tri.sidelobe_level_db < m_eq.sidelobe_level_db
    assert m_tri.null_depth_db == m_eq.null_depth_db == NULL_FLOOR_DB


def test_metrics_off_dc_passband():
    m = response_metrics(transfer_function(THREE, 5.0, 25.0, 2001))
    theta = math.acos((3 / math.sqrt(2) - 1) / 2)
    assert m.passbands[0] == pytest.approx(10.0, abs=1e-7)
    assert m.bandwidth_3db == pytest.approx(2 * theta / (2 * math.pi * 0.1), rel=1e-7)


def test_metrics_period_coverage_error():
    with pytest.raises(ValueError, match="period"):
        response_metrics(transfer_function(THREE, 0.0, 4.0, 401))


uniform_sets = st.builds(
    lambda n, sp, amps, off: TapSet.uniform(n, sp, amps[:n], off),
    st.integers(2, 16),
    st.floats(5.0, 500.0),
    st.lists(st.floats(0.05, 5.0), min_size=16, max_size=16),
    st.floats(0.0, 1e4),
)


@settings(max_examples=60, deadline=None)
@given(uniform_sets, st.floats(0.0, 50.0))
def test_periodicity(taps, f0):
    fsr = 1e3 / taps.mean_spacing()
    a = transfer_function(taps, f0, f0 + 1.0, 11).magnitude
    b = transfer_function(taps, f0 + fsr, f0 + fsr + 1.0, 11).magnitude
    scale = sum(taps.amplitudes)
    assert np.all(np.abs(a - b) <= 1e-9 * scale)


@settings(max_examples=60, deadline=None)
@given(uniform_sets, st.floats(-1e3, 1e3))
def test_delay_offset_invariance(taps, shift):
    if taps.delays[0] + shift < 0:
        shift = -shift
    a = transfer_function(taps, 0.0, 30.0, 301).magnitude
    b = transfer_function(taps.shifted(shift), 0.0, 30.0, 301).magnitude
    assert np.all(np.abs(a - b) <= 1e-12 * sum(taps.amplitudes))


@settings(max_examples=60, deadline=None)
@given(uniform_sets, st.floats(0.01, 100.0))
def test_amplitude_scaling_db_unchanged(taps, s):
    s = 2.0 ** round(math.log2(s))  # power-of-two factors keep the check exact
    a = transfer_function(taps, 0.0, 30.0, 301).mag_db(floor=-400.0)
    b = transfer_function(taps.scaled(s), 0.0, 30.0, 301).mag_db(floor=-400.0)
    assert np.array_equal(a, b)


@settings(max_examples=60, deadline=None)
@given(uniform_sets)
def test_dc_value_exact(taps):
    r = transfer_function(taps, 0.0, 1.0, 2)
    assert r.magnitude[0] == sum(taps.amplitudes)


def test_conjugate_symmetry_of_formula():
    taps = TapSet((0.0, 33.0, 70.0), (1.0, 0.5, 0.2))
    for f in (0.3, 4.1, 17.7):
        assert phasor_sum(taps.delays, taps.amplitudes, -f) == \
            pytest.approx(phasor_sum(taps.delays, taps.amplitudes, f), rel=1e-14)
