"""FBG multicavity delay lines inscribed in homogeneous multicore fibers.

Each grating reflects its Bragg wavelength back toward the input facet, so
a grating at distance z (mm) yields a round-trip delay 2 n_g z / c.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field

from scipy.constants import c as C_LIGHT

from .mcf_model import Check, MCFGeometry, ValidationReport
from .taps import TapSet

DEFAULT_GROUP_INDEX = 1.4682
DEFAULT_GUARD_BAND = 1.0  # nm
DEFAULT_MATCH_TOLERANCE = 0.25  # nm

# Bragg wavelengths (nm) and layout of the fabricated 3-core device.
REFERENCE_WAVELENGTHS = (1537.07, 1541.51, 1546.26)
REFERENCE_CORE_SPACINGS = {6: 20.0, 5: 21.0, 4: 22.0}  # mm between gratings within a core
REFERENCE_DISPLACEMENTS = (6.0, 7.0, 8.0)  # mm between adjacent cores, per wavelength


@dataclass(frozen=True)
class FBG:
    core_id: int
    bragg_wavelength: float  # nm
    position: float  # mm from the input facet
    reflectivity: float = 0.3
    grating_length: float = 1.0  # mm

    def __post_init__(self):
        if not 0 <= self.reflectivity < 1:
            raise ValueError(f"reflectivity must be in [0, 1), got {self.reflectivity}")
        if not (math.isfinite(self.position) and self.position >= 0):
            raise ValueError(f"grating position must be >= 0 mm, got {self.position}")
        if not self.grating_length > 0:
            raise ValueError(f"grating length must be > 0 mm, got {self.grating_length}")
        if not math.isfinite(self.bragg_wavelength):
            raise ValueError("Bragg wavelength must be finite")


@dataclass(frozen=True)
class MulticavityDevice:
    """Gratings written at selected positions in the cores of one fiber.

    Gratings are stored sorted by (core, position).  Overlap and guard-band
    rules are reported by :func:`validate_inscription_plan` rather than
    enforced here.
    """

    geometry: MCFGeometry
    gratings: tuple[FBG, ...]
    group_index: float = DEFAULT_GROUP_INDEX
    guard_band: float = DEFAULT_GUARD_BAND

    def __post_init__(self):
        if not self.group_index > 0:
            raise ValueError("group index must be > 0")
        ids = set(self.geometry.core_ids)
        for g in self.gratings:
            if g.core_id not in ids:
                raise ValueError(f"grating in core {g.core_id}, fiber has cores "
                                 f"1..{self.geometry.core_count}")
        ordered = tuple(sorted(self.gratings, key=lambda g: (g.core_id, g.position)))
        object.__setattr__(self, "gratings", ordered)

    def core_gratings(self, core_id: int) -> list[FBG]:
        return [g for g in self.gratings if g.core_id == core_id]

    @property
    def cores_used(self) -> list[int]:
        return sorted({g.core_id for g in self.gratings})

    def round_trip_delay(self, position: float) -> float:
        """Round-trip delay in ps for a reflection ``position`` mm from the facet."""
        return 2.0 * self.group_index * position * 1e-3 / C_LIGHT * 1e12


@dataclass(frozen=True)
class InscriptionConstraints:
    beam_width_max: float = 23.0  # um, single outer-core addressability
    beam_height_min: float = 30.0  # um
    beam_height_max: float = 50.0  # um
    phase_mask_period: float = 1070.0  # nm

    def __post_init__(self):
        if not 0 < self.beam_height_min < self.beam_height_max:
            raise ValueError("need 0 < beam_height_min < beam_height_max")
        if not self.beam_width_max > 0:
            raise ValueError("beam_width_max must be > 0")


def _tap_amplitude(grating: FBG, nearer: list[FBG]) -> float:
    # Field amplitude: sqrt(R_k) times a double-pass power loss (1 - R_j)^2,
    # i.e. (1 - R_j) in field, for each grating closer to the facet.
    amp = math.sqrt(grating.reflectivity)
    for g in nearer:
        amp *= 1.0 - g.reflectivity
    return amp


def _amplitudes(device: MulticavityDevice, chosen: list[FBG]) -> list[float]:
    out = []
    for g in chosen:
        nearer = [h for h in device.core_gratings(g.core_id) if h.position < g.position]
        out.append(_tap_amplitude(g, nearer))
    return out


def tap_set_wavelength_diversity(device: MulticavityDevice, core_id: int) -> TapSet:
    """One tap per grating of ``core_id``, ordered by position."""
    if core_id not in device.geometry.core_ids:
        raise ValueError(f"unknown core id {core_id}")
    gratings = device.core_gratings(core_id)
    if not gratings:
        raise ValueError(f"core {core_id} holds no gratings")
    return TapSet(
        tuple(device.round_trip_delay(g.position) for g in gratings),
        tuple(_amplitudes(device, gratings)),
        tuple(f"core {g.core_id} @ {g.bragg_wavelength:g} nm" for g in gratings),
        label=f"fbg wavelength diversity, core {core_id}",
    )


def tap_set_spatial_diversity(device: MulticavityDevice, bragg_wavelength: float,
                              matching_tolerance: float = DEFAULT_MATCH_TOLERANCE) -> TapSet:
    """One tap per grating (any core) whose Bragg wavelength matches within tolerance."""
    chosen = [g for g in device.gratings
              if abs(g.bragg_wavelength - bragg_wavelength) <= matching_tolerance]
    if not chosen:
        raise ValueError(f"no gratings within {matching_tolerance} nm of {bragg_wavelength} nm")
    chosen.sort(key=lambda g: g.position)
    return TapSet.from_unsorted(
        [device.round_trip_delay(g.position) for g in chosen],
        _amplitudes(device, chosen),
        [f"core {g.core_id} @ {g.bragg_wavelength:g} nm" for g in chosen],
        label=f"fbg spatial diversity @ {bragg_wavelength:g} nm",
    )


def uniform_fbg_reflectivity(kappa: float, grating_length: float) -> float:
    """Peak power reflectivity tanh^2(kappa L) of a uniform grating (kappa in 1/mm)."""
    if kappa < 0:
        raise ValueError(f"coupling coefficient must be >= 0, got {kappa}")
    if grating_length <= 0:
        raise ValueError(f"grating length must be > 0, got {grating_length}")
    return math.tanh(kappa * grating_length) ** 2


def build_paper_device(reflectivity: float = 0.3, grating_length: float = 1.0,
                       group_index: float = DEFAULT_GROUP_INDEX,
                       first_position: float = 0.0) -> MulticavityDevice:
    """Three 3-grating arrays in cores 6, 5 and 4 of a 7-core fiber.

    Within cores 6, 5, 4 gratings are 20, 21, 22 mm apart; gratings at the
    same wavelength are displaced by 6, 7, 8 mm between adjacent cores for
    1537.07, 1541.51 and 1546.26 nm.  Both rules hold at once with
    z(core m, wavelength j) = z0 + 20 j + 6 m + m j, for m, j = 0, 1, 2 and
    cores taken in the order 6, 5, 4.
    """
    cores = sorted(REFERENCE_CORE_SPACINGS, reverse=True)
    base_spacing = REFERENCE_CORE_SPACINGS[cores[0]]
    gratings = []
    for m, core in enumerate(cores):
        for j, lam in enumerate(REFERENCE_WAVELENGTHS):
            z = first_position + base_spacing * j + REFERENCE_DISPLACEMENTS[0] * m + m * j
            gratings.append(FBG(core, lam, z, reflectivity, grating_length))
    return MulticavityDevice(MCFGeometry.seven_core(), tuple(gratings), group_index)


@dataclass(frozen=True)
class InscriptionPlan:
    """Beam settings used to write a device."""

    beam_width: float = 23.0  # um
    beam_height: float = 40.0  # um


def validate_inscription_plan(device: MulticavityDevice,
                              constraints: InscriptionConstraints | None = None,
                              plan: InscriptionPlan | None = None) -> ValidationReport:
    cons = constraints or InscriptionConstraints()
    plan = plan or InscriptionPlan()
    checks = [
        Check("single_core_addressability", plan.beam_width <= cons.beam_width_max,
              cons.beam_width_max - plan.beam_width,
              f"beam width must not exceed {cons.beam_width_max} um"),
        Check("beam_height_window",
              cons.beam_height_min <= plan.beam_height <= cons.beam_height_max,
              min(plan.beam_height - cons.beam_height_min, cons.beam_height_max - plan.beam_height),
              f"beam height must lie in [{cons.beam_height_min}, {cons.beam_height_max}] um"),
    ]

    by_core = defaultdict(list)
    for g in device.gratings:
        by_core[g.core_id].append(g)

    overlap = math.inf
    guard = math.inf
    for gs in by_core.values():
        for a, b in zip(gs, gs[1:]):
            need = max(a.grating_length, b.grating_length)
            overlap = min(overlap, (b.position - a.position) - need)
        for i, a in enumerate(gs):
            for b in gs[i + 1:]:
                guard = min(guard, abs(a.bragg_wavelength - b.bragg_wavelength) - device.guard_band)
    checks.append(Check("grating_overlap", overlap >= 0, overlap,
                        "same-core gratings must be separated by at least one grating length"))
    checks.append(Check("wavelength_guard_band", guard >= 0, guard,
                        f"same-core Bragg wavelengths must differ by >= {device.guard_band} nm"))
    return ValidationReport(tuple(checks))


@dataclass(frozen=True)
class FsrFit:
    group_index: float
    predicted: tuple[float, ...] = field(default=())


def fit_group_index(spacings_mm, fsr_ghz) -> FsrFit:
    """Single group index minimizing the squared FSR error for uniform spacings.

    FSR = c / (2 n_g d) is linear in 1/n_g, so the least-squares optimum is
    closed form.
    """
    k = [C_LIGHT / (2 * d * 1e-3) / 1e9 for d in spacings_mm]
    inv_ng = sum(ki * fi for ki, fi in zip(k, fsr_ghz)) / sum(ki * ki for ki in k)
    return FsrFit(1.0 / inv_ng, tuple(ki * inv_ng for ki in k))
