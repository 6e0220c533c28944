"""Incoherent FIR response of a tap set and its spectral metrics.

H(f) = sum_k a_k exp(-i 2 pi f tau_k), with f in GHz and tau in ps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .taps import UNIFORM_RTOL, TapSet

NULL_FLOOR_DB = -120.0
PASSBAND_TOL_DB = 0.5  # local maxima this close to the peak count as passbands


def _evaluate(taps: TapSet, freq) -> np.ndarray:
    f = np.asarray(freq, dtype=float)
    tau = np.asarray(taps.delays)
    # Sum relative to the first tap to keep phase arguments small; the common
    # factor is restored afterwards.  Tap order of the sum is fixed.
    rel = tau - tau[0]
    acc = np.zeros(f.shape, dtype=complex)
    for a, t in zip(taps.amplitudes, rel):
        acc += a * np.exp(-2j * np.pi * f * t * 1e-3)
    return acc * np.exp(-2j * np.pi * f * tau[0] * 1e-3)


def _magnitude(taps: TapSet, f: float) -> float:
    return float(abs(_evaluate(taps, f)))


@dataclass(frozen=True)
class FilterResponse:
    freq: np.ndarray  # GHz, strictly increasing
    H: np.ndarray
    taps: TapSet

    @property
    def peak(self) -> float:
        """Raw |H| at DC, which is the global maximum for non-negative taps."""
        return float(sum(self.taps.amplitudes))

    @property
    def magnitude(self) -> np.ndarray:
        return np.abs(self.H)

    def mag_db(self, floor: float = NULL_FLOOR_DB) -> np.ndarray:
        with np.errstate(divide="ignore"):
            db = 20 * np.log10(np.abs(self.H) / self.peak)
        return np.maximum(db, floor)

    @property
    def phase(self) -> np.ndarray:
        return np.angle(self.H)


def transfer_function(taps: TapSet, f_start: float, f_stop: float, n_points: int) -> FilterResponse:
    if n_points < 2:
        raise ValueError("need at least 2 frequency points")
    if not (0 <= f_start < f_stop):
        raise ValueError(f"need 0 <= f_start < f_stop, got [{f_start}, {f_stop}]")
    if len(taps) == 0:
        raise ValueError("empty tap set")
    freq = np.linspace(f_start, f_stop, n_points)
    return FilterResponse(freq, _evaluate(taps, freq), taps)


class FsrEstimate(NamedTuple):
    fsr: float  # GHz
    method: str  # "analytic" or "spectral"


def fsr_estimate(taps: TapSet, rtol: float = UNIFORM_RTOL) -> FsrEstimate:
    """FSR as 1/delta_tau for uniform taps, else from passband peak spacing."""
    if len(taps) < 2:
        raise ValueError("FSR needs at least 2 taps")
    if taps.is_uniform(rtol):
        return FsrEstimate(1e3 / taps.mean_spacing(), "analytic")
    return FsrEstimate(spectral_fsr(taps), "spectral")


def _refine_max(taps: TapSet, lo: float, hi: float) -> float:
    res = minimize_scalar(lambda f: -_magnitude(taps, f) ** 2, bounds=(lo, hi),
                          method="bounded", options={"xatol": 1e-12 * max(hi, 1.0)})
    return float(res.x)


def _passband_peaks(taps: TapSet, freq: np.ndarray, mag: np.ndarray,
                    tol_db: float = PASSBAND_TOL_DB) -> tuple[list[float], list[int]]:
    """Refined passband centers and grid indices of the remaining local maxima."""
    step = freq[1] - freq[0]
    # Pad with one evaluation beyond each end so edge points are judged as
    # interior ones; below DC the response mirrors the positive side.
    left = _magnitude(taps, freq[0] - step) if freq[0] > 0 else mag[1]
    right = _magnitude(taps, freq[-1] + step)
    padded = np.concatenate([[left], mag, [right]])
    inner = padded[1:-1]
    is_max = (inner >= padded[:-2]) & (inner >= padded[2:]) & (inner > 0)
    idx = np.flatnonzero(is_max)
    thresh = (sum(taps.amplitudes)) * 10 ** (-tol_db / 20)
    peaks, others = [], []
    for i in idx:
        if mag[i] >= thresh:
            if freq[i] == 0.0:
                peaks.append(0.0)
            else:
                peaks.append(_refine_max(taps, freq[i] - step, freq[i] + step))
        else:
            others.append(int(i))
    # Plateaus can flag neighbouring grid points for the same passband.
    merged = []
    for p in peaks:
        if not merged or p - merged[-1] > 0.5 * step:
            merged.append(p)
    return merged, others


def spectral_fsr(taps: TapSet, periods: float = 4.0, points_per_period: int = 400) -> float:
    """FSR from the spacing of passband peaks of |H| over several periods."""
    if len(taps) < 2:
        raise ValueError("FSR needs at least 2 taps")
    putative = 1e3 / taps.mean_spacing()
    n = int(periods * points_per_period) + 1
    freq = np.linspace(0.0, periods * putative, n)
    peaks, _ = _passband_peaks(taps, freq, np.abs(_evaluate(taps, freq)))
    if len(peaks) < 2:
        raise ValueError("fewer than two passband peaks found; cannot estimate FSR")
    k = np.arange(len(peaks))
    slope = np.polyfit(k, np.asarray(peaks), 1)[0]
    return float(slope)


@dataclass(frozen=True)
class ResponseMetrics:
    sidelobe_level_db: float
    bandwidth_3db: float  # GHz
    null_depth_db: float
    passbands: tuple[float, ...]  # GHz

    def records(self) -> list[tuple[str, object]]:
        return [("sidelobe_level_db", self.sidelobe_level_db),
                ("bandwidth_3db_ghz", self.bandwidth_3db),
                ("null_depth_db", self.null_depth_db),
                ("passbands_ghz", list(self.passbands))]


def _half_power_edge(taps: TapSet, f0: float, direction: float, step: float, peak: float) -> float:
    target = peak / math.sqrt(2.0)
    g = lambda f: _magnitude(taps, f) - target
    f = f0
    for _ in range(100000):
        nxt = f + direction * step
        if g(nxt) < 0:
            a, b = sorted((f, nxt))
            return brentq(g, a, b, xtol=1e-14 * max(abs(f0), 1.0))
        f = nxt
    raise ValueError("no -3 dB crossing found")


def response_metrics(resp: FilterResponse, floor: float = NULL_FLOOR_DB,
                     tol_db: float = PASSBAND_TOL_DB) -> ResponseMetrics:
    taps = resp.taps
    freq, mag = resp.freq, resp.magnitude
    peak = resp.peak
    peaks, others = _passband_peaks(taps, freq, mag, tol_db)
    if len(peaks) < 2:
        raise ValueError("response covers less than one period: fewer than two passband peaks")

    db = lambda m: max(20 * math.log10(m / peak), floor) if m > 0 else floor
    sidelobe = max((db(mag[i]) for i in others), default=floor)
    if others:
        step = freq[1] - freq[0]
        best = max(others, key=lambda i: mag[i])
        lo, hi = freq[best] - step, freq[best] + step
        sidelobe = max(sidelobe, db(_magnitude(taps, _refine_max(taps, max(lo, 0.0), hi))))

    step = freq[1] - freq[0]
    main = peaks[0]
    right = _half_power_edge(taps, main, +1.0, step, _magnitude(taps, main))
    if main == 0.0:
        bandwidth = 2.0 * right
    else:
        left = _half_power_edge(taps, main, -1.0, step, _magnitude(taps, main))
        bandwidth = right - left

    # Deepest null: refine every interior local minimum on |H|^2.
    interior = np.flatnonzero((mag[1:-1] <= mag[:-2]) & (mag[1:-1] <= mag[2:])) + 1
    depth = 0.0
    for i in interior:
        res = minimize_scalar(lambda f: _magnitude(taps, f) ** 2,
                              bounds=(freq[i - 1], freq[i + 1]), method="bounded",
                              options={"xatol": 1e-14 * max(freq[i], 1.0)})
        depth = min(depth, db(math.sqrt(max(res.fun, 0.0))), db(mag[i]))
    if interior.size == 0:
        depth = db(float(mag.min()))
    return ResponseMetrics(sidelobe, bandwidth, depth, tuple(peaks))
