"""Group-delay algebra of dispersion-engineered heterogeneous MCF links.

Each core n has a group delay per unit length expanded around the anchor
wavelength lambda0 up to the dispersion-slope term::

    tau_n(lam) = tau0_n + D_n (lam - lam0) + S_n / 2 (lam - lam0)^2

Delays returned here are for the whole link, in ps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .mcf_model import CoreDispersion, HeteroMCFSpec
from .taps import TapSet

WAVELENGTH_WINDOW = (1200.0, 1700.0)  # nm


def _finite(**kw):
    for name, v in kw.items():
        if not math.isfinite(v):
            raise ValueError(f"{name} must be finite, got {v}")


def group_delay(core: CoreDispersion, wavelength: float, anchor: float, length: float) -> float:
    """Link group delay in ps of ``core`` at ``wavelength`` (nm)."""
    _finite(wavelength=wavelength, anchor=anchor, length=length)
    if length <= 0:
        raise ValueError(f"link length must be > 0 km, got {length}")
    x = wavelength - anchor
    return length * (core.tau0 + core.D * x + 0.5 * core.S * x * x)


def differential_delay_spatial(spec: HeteroMCFSpec, wavelength: float) -> list[float]:
    """Delay between adjacent cores n+1 and n at one optical wavelength.

    Evaluated from coefficient differences rather than by subtracting
    absolute group delays, so it stays exact when tau0 is large.
    """
    _finite(wavelength=wavelength)
    if spec.core_count < 2:
        raise ValueError("spatial differential delay needs at least 2 cores")
    x = wavelength - spec.anchor_wavelength
    out = []
    for lo, hi in zip(spec.cores, spec.cores[1:]):
        d_tau0 = hi.tau0 - lo.tau0
        d_d = hi.D - lo.D
        d_s = hi.S - lo.S
        out.append(spec.length * (d_tau0 + d_d * x + 0.5 * d_s * x * x))
    return out


def differential_delay_wavelength(core: CoreDispersion, step: float, reference: float,
                                  anchor: float, length: float) -> float:
    """Delay between wavelengths ``reference + step`` and ``reference`` in one core."""
    _finite(step=step, reference=reference, anchor=anchor, length=length)
    if step == 0:
        raise ValueError("wavelength step must be non-zero")
    if length <= 0:
        raise ValueError(f"link length must be > 0 km, got {length}")
    x0 = reference - anchor
    x1 = x0 + step
    return length * (core.D * step + 0.5 * core.S * (x1 * x1 - x0 * x0))


@dataclass(frozen=True)
class HeteroTolerances:
    """Pass thresholds for :func:`validate_hetero_spec`.

    ``slope_variation`` is unbounded by default; the quadratic-fraction
    threshold already limits the effect of slope mismatch on the taps.
    """

    anchor_spread: float = 0.1  # ps over the whole link
    delta_d_rel: float = 0.01  # fraction of the mean incremental dispersion
    quadratic_fraction: float = 0.05
    slope_variation: float = math.inf  # ps/(km nm^2)


@dataclass(frozen=True)
class HeteroValidationReport:
    anchor_delay_spread: float
    delta_D_values: tuple[float, ...]
    delta_D_max_deviation: float
    slope_variation_max: float
    quadratic_fraction_max: float
    d_non_decreasing: bool
    tolerances: HeteroTolerances
    length: float

    @property
    def anchor_ok(self) -> bool:
        return self.anchor_delay_spread <= self.tolerances.anchor_spread

    @property
    def delta_d_ok(self) -> bool:
        if not self.delta_D_values:
            return True
        mean = abs(sum(self.delta_D_values) / len(self.delta_D_values))
        return self.delta_D_max_deviation <= self.tolerances.delta_d_rel * mean

    @property
    def slope_ok(self) -> bool:
        return self.slope_variation_max <= self.tolerances.slope_variation

    @property
    def quadratic_ok(self) -> bool:
        return self.quadratic_fraction_max <= self.tolerances.quadratic_fraction

    @property
    def passed(self) -> bool:
        return (self.anchor_ok and self.delta_d_ok and self.slope_ok
                and self.quadratic_ok and self.d_non_decreasing)

    def records(self) -> list[tuple[str, object]]:
        return [
            ("pass", self.passed),
            ("anchor_delay_spread_ps", self.anchor_delay_spread),
            ("anchor_ok", self.anchor_ok),
            ("delta_d_values_ps_per_km_nm", list(self.delta_D_values)),
            ("delta_d_max_deviation_ps_per_km_nm", self.delta_D_max_deviation),
            ("delta_d_ok", self.delta_d_ok),
            ("slope_variation_max_ps_per_km_nm2", self.slope_variation_max),
            ("slope_ok", self.slope_ok),
            ("quadratic_fraction_max", self.quadratic_fraction_max),
            ("quadratic_ok", self.quadratic_ok),
            ("d_non_decreasing", self.d_non_decreasing),
        ]


def validate_hetero_spec(spec: HeteroMCFSpec, band: tuple[float, float],
                         tolerances: HeteroTolerances | None = None) -> HeteroValidationReport:
    """Check the operability conditions of a heterogeneous TTDL.

    Common anchor delay, uniform incremental dispersion with D non-decreasing
    in core index, and a small quadratic share of the differential delay over
    ``band``.
    """
    tol = tolerances or HeteroTolerances()
    lo, hi = band
    _finite(band_min=lo, band_max=hi)
    if lo > hi:
        raise ValueError(f"empty band [{lo}, {hi}] nm")
    if lo < WAVELENGTH_WINDOW[0] or hi > WAVELENGTH_WINDOW[1]:
        raise ValueError(f"band [{lo}, {hi}] nm outside the {WAVELENGTH_WINDOW} nm window")

    tau0 = [c.tau0 for c in spec.cores]
    spread = spec.length * (max(tau0) - min(tau0))
    pairs = list(zip(spec.cores, spec.cores[1:]))
    d_d = tuple(b.D - a.D for a, b in pairs)
    d_s = [b.S - a.S for a, b in pairs]
    if d_d:
        mean = sum(d_d) / len(d_d)
        dev = max(abs(v - mean) for v in d_d)
    else:
        dev = 0.0
    slope_var = max((abs(v) for v in d_s), default=0.0)

    # |dS/2 x^2| / |dD x| = |dS| |x| / (2 |dD|) is largest at the band edge
    # furthest from the anchor.
    x_max = max(abs(lo - spec.anchor_wavelength), abs(hi - spec.anchor_wavelength))
    quad = 0.0
    for dd, ds in zip(d_d, d_s):
        if ds == 0 or x_max == 0:
            continue
        quad = max(quad, math.inf if dd == 0 else abs(ds) * x_max / (2 * abs(dd)))

    return HeteroValidationReport(
        anchor_delay_spread=spread,
        delta_D_values=d_d,
        delta_D_max_deviation=dev,
        slope_variation_max=slope_var,
        quadratic_fraction_max=quad,
        d_non_decreasing=all(v >= 0 for v in d_d),
        tolerances=tol,
        length=spec.length,
    )


def tap_set_spatial(spec: HeteroMCFSpec, wavelength: float, weights=None) -> TapSet:
    """Taps gathered across cores at a single optical wavelength."""
    _finite(wavelength=wavelength)
    if wavelength == spec.anchor_wavelength:
        raise ValueError(
            f"degenerate taps: operating wavelength equals the anchor wavelength "
            f"{spec.anchor_wavelength} nm, where all cores share the same delay")
    weights = [1.0] * spec.core_count if weights is None else list(weights)
    if len(weights) != spec.core_count:
        raise ValueError(f"{len(weights)} weights for {spec.core_count} cores")
    delays = [group_delay(c, wavelength, spec.anchor_wavelength, spec.length) for c in spec.cores]
    labels = [f"{name} @ {wavelength:g} nm" for name in spec.labels]
    return TapSet.from_unsorted(delays, weights, labels,
                                label=f"hetero spatial diversity @ {wavelength:g} nm")


def tap_set_wavelength(spec: HeteroMCFSpec, core_index: int, wavelengths, weights=None) -> TapSet:
    """Taps gathered from one core (1-based index) across several wavelengths."""
    if not 1 <= core_index <= spec.core_count:
        raise ValueError(f"unknown core index {core_index}")
    core = spec.cores[core_index - 1]
    wavelengths = list(wavelengths)
    weights = [1.0] * len(wavelengths) if weights is None else list(weights)
    if len(weights) != len(wavelengths):
        raise ValueError("one weight per wavelength required")
    delays = [group_delay(core, lam, spec.anchor_wavelength, spec.length) for lam in wavelengths]
    labels = [f"{spec.labels[core_index - 1]} @ {lam:g} nm" for lam in wavelengths]
    return TapSet.from_unsorted(delays, weights, labels,
                                label=f"hetero wavelength diversity, {spec.labels[core_index - 1]}")
