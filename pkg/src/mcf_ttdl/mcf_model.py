"""Fiber cross-section, per-core index profiles and per-core dispersion data.

Units are fixed per field and never inferred: transverse lengths in um,
wavelengths in nm, link lengths in km, delays in ps.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from enum import Enum


class Layout(str, Enum):
    SINGLE = "single"
    HEX_1RING = "hex_1ring"


DEFAULT_CORE_RADIUS = 4.1  # um, only used for clearance checks


@dataclass(frozen=True)
class Check:
    """One rule evaluated by a validator.

    ``margin`` is signed: non-negative when the rule holds.
    """

    rule: str
    passed: bool
    margin: float = math.nan
    detail: str = ""


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple[Check, ...] = ()

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def violations(self) -> tuple[Check, ...]:
        return tuple(c for c in self.checks if not c.passed)

    def check(self, rule: str) -> Check:
        for c in self.checks:
            if c.rule == rule:
                return c
        raise KeyError(rule)

    def records(self) -> list[tuple[str, object]]:
        out: list[tuple[str, object]] = [("pass", self.passed)]
        for c in self.checks:
            out.append((f"{c.rule}.pass", c.passed))
            out.append((f"{c.rule}.margin", c.margin))
        return out


@dataclass(frozen=True)
class MCFGeometry:
    """Cross-section of a multicore fiber.

    Construction does not enforce the geometric invariants so that
    :func:`validate_geometry` can report on broken designs; use
    :meth:`checked` to get a geometry that is known to be valid.
    """

    core_count: int = 7
    cladding_diameter: float = 125.0
    core_pitch: float = 35.0
    layout: Layout = Layout.HEX_1RING
    core_radius_nominal: float = DEFAULT_CORE_RADIUS

    def __post_init__(self):
        object.__setattr__(self, "layout", Layout(self.layout))

    @classmethod
    def seven_core(cls, **kw) -> "MCFGeometry":
        """Commercial 7-core fiber: 125 um cladding, 35 um pitch."""
        return cls(core_count=7, cladding_diameter=125.0, core_pitch=35.0,
                   layout=Layout.HEX_1RING, **kw)

    def checked(self) -> "MCFGeometry":
        report = validate_geometry(self)
        if not report.passed:
            rules = ", ".join(c.rule for c in report.violations)
            raise ValueError(f"invalid MCF geometry: {rules}")
        return self

    @property
    def core_ids(self) -> range:
        return range(1, self.core_count + 1)


def core_positions(geometry: MCFGeometry) -> list[tuple[float, float]]:
    """Transverse core centers in um.

    Core 1 is the center; for ``hex_1ring`` cores 2-7 follow counterclockwise
    from the +x axis at radius ``core_pitch``.
    """
    if geometry.layout is Layout.SINGLE and geometry.core_count == 1:
        return [(0.0, 0.0)]
    if geometry.layout is Layout.HEX_1RING and geometry.core_count == 7:
        p = geometry.core_pitch
        out = [(0.0, 0.0)]
        for k in range(6):
            ang = math.radians(60.0 * k)
            out.append((p * math.cos(ang), p * math.sin(ang)))
        return out
    raise ValueError(
        f"unsupported layout/core_count combination: {geometry.layout.value} "
        f"with {geometry.core_count} cores")


def validate_geometry(geometry: MCFGeometry) -> ValidationReport:
    checks = []
    g = geometry
    checks.append(Check("core_count_positive", g.core_count >= 1, float(g.core_count - 1)))
    expected = {Layout.SINGLE: 1, Layout.HEX_1RING: 7}[g.layout]
    checks.append(Check("layout_core_count", g.core_count == expected,
                        float(-abs(g.core_count - expected)),
                        f"{g.layout.value} needs {expected} cores"))
    checks.append(Check("cladding_positive", g.cladding_diameter > 0, g.cladding_diameter))
    checks.append(Check("core_radius_positive", g.core_radius_nominal > 0, g.core_radius_nominal))
    needs_pitch = g.core_count > 1
    checks.append(Check("pitch_positive", g.core_pitch > 0 or not needs_pitch, g.core_pitch))

    if checks[1].passed:
        pos = core_positions(g)
        r_max = max(math.hypot(x, y) for x, y in pos)
        margin = g.cladding_diameter / 2 - (r_max + g.core_radius_nominal)
        checks.append(Check("core_inside_cladding", margin > 0, margin,
                            "outermost core edge must stay strictly inside the cladding"))
        if len(pos) > 1:
            d_min = min(math.dist(a, b) for a, b in itertools.combinations(pos, 2))
            margin = d_min - g.core_pitch
            tol = 1e-9 * max(abs(g.core_pitch), 1.0)
            checks.append(Check("min_core_distance", margin >= -tol, margin,
                                "pairwise center distance must be at least the pitch"))
    return ValidationReport(tuple(checks))


@dataclass(frozen=True)
class TrenchProfile:
    """Trench-assisted step profile of one core.

    Radially: core [0, a1], inner cladding (a1, a1+a2], trench
    (a1+a2, a1+a2+w], outer cladding beyond.  ``delta1`` and ``delta2`` are
    relative index differences in percent.
    """

    a1: float
    delta1: float
    a2: float
    w: float
    delta2: float = 1.0

    def __post_init__(self):
        for name in ("a1", "a2", "w", "delta1", "delta2"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"TrenchProfile.{name} must be finite and > 0, got {v}")

    @property
    def interfaces(self) -> tuple[float, float, float]:
        return (self.a1, self.a1 + self.a2, self.a1 + self.a2 + self.w)


@dataclass(frozen=True)
class CoreDispersion:
    """Group-delay expansion of one core around the anchor wavelength.

    tau0 in ps/km, D in ps/(km nm), S in ps/(km nm^2).  With ``relative=True``
    tau0 is measured from an arbitrary common reference and may be zero or
    negative.
    """

    tau0: float
    D: float
    S: float = 0.0
    relative: bool = False

    def __post_init__(self):
        for name in ("tau0", "D", "S"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"CoreDispersion.{name} must be finite")
        if not self.relative and self.tau0 <= 0:
            raise ValueError("physical tau0 must be > 0; pass relative=True for a relative delay")


@dataclass(frozen=True)
class HeteroMCFSpec:
    """Heterogeneous MCF link: one :class:`CoreDispersion` per core.

    ``geometry`` may be None for an abstract core set (no cross-section).
    """

    cores: tuple[CoreDispersion, ...]
    anchor_wavelength: float = 1550.0
    length: float = 1.0
    geometry: MCFGeometry | None = None
    labels: tuple[str, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "cores", tuple(self.cores))
        if not self.cores:
            raise ValueError("HeteroMCFSpec needs at least one core")
        if not (math.isfinite(self.length) and self.length > 0):
            raise ValueError(f"link length must be > 0 km, got {self.length}")
        if not math.isfinite(self.anchor_wavelength):
            raise ValueError("anchor wavelength must be finite")
        if self.geometry is not None and len(self.cores) != self.geometry.core_count:
            raise ValueError(f"{len(self.cores)} cores given for a "
                             f"{self.geometry.core_count}-core geometry")
        if not self.labels:
            object.__setattr__(self, "labels",
                               tuple(f"core {n}" for n in range(1, len(self.cores) + 1)))
        elif len(self.labels) != len(self.cores):
            raise ValueError("one label per core required")

    @property
    def core_count(self) -> int:
        return len(self.cores)

    @property
    def relative(self) -> bool:
        return any(c.relative for c in self.cores)
