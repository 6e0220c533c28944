"""Sectioned key-value job configuration with unit-suffixed keys.

Example::

    [job]
    kind = simulate-filter

    [grid]
    f_start_ghz = 0
    f_stop_ghz = 40
    n_points = 4001

    [link]
    lambda0_nm = 1550
    length_km = 5
    d1_ps_nm_km = 14.75
    delta_d_ps_nm_km = 1
    core_count = 7
    lambda_m_nm = 1560
"""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, field

KINDS = (
    "simulate-filter", "taps-fbg", "taps-hetero", "validate-hetero", "validate-inscription",
    "design-spacing", "design-wavelength", "design-profile", "solve-dispersion",
)

FLOAT, INT, STR, BOOL, FLOATS, STRS = "float", "int", "str", "bool", "floats", "strs"

SCHEMA = {
    "job": {"kind": STR, "name": STR},
    "grid": {"f_start_ghz": FLOAT, "f_stop_ghz": FLOAT, "n_points": INT},
    "taps": {"delays_ps": FLOATS, "amplitudes": FLOATS, "labels": STRS},
    "geometry": {"layout": STR, "core_count": INT, "cladding_um": FLOAT, "pitch_um": FLOAT,
                 "core_radius_um": FLOAT},
    "link": {
        "lambda0_nm": FLOAT, "length_km": FLOAT, "core_count": INT,
        "d1_ps_nm_km": FLOAT, "delta_d_ps_nm_km": FLOAT, "dispersion_ps_nm_km": FLOATS,
        "tau0_ps_km": FLOATS, "slope_ps_nm2_km": FLOATS, "delta_slope_ps_nm2_km": FLOAT,
        "relative": BOOL,
        "regime": STR, "lambda_m_nm": FLOAT, "core_index": INT, "wavelengths_nm": FLOATS,
        "weights": FLOATS, "band_min_nm": FLOAT, "band_max_nm": FLOAT,
    },
    "tolerances": {"anchor_spread_ps": FLOAT, "delta_d_rel": FLOAT, "quadratic_fraction": FLOAT,
                   "slope_variation_ps_nm2_km": FLOAT},
    "device": {
        "source": STR, "group_index": FLOAT, "guard_band_nm": FLOAT,
        "reflectivity": FLOAT, "grating_length_mm": FLOATS, "first_position_mm": FLOAT,
        "grating_cores": FLOATS, "grating_bragg_nm": FLOATS, "grating_position_mm": FLOATS,
        "grating_reflectivity": FLOATS,
        "regime": STR, "core_id": INT, "bragg_nm": FLOAT, "match_tol_nm": FLOAT,
    },
    "inscription": {"beam_width_um": FLOAT, "beam_height_um": FLOAT, "beam_width_max_um": FLOAT,
                    "beam_height_min_um": FLOAT, "beam_height_max_um": FLOAT,
                    "phase_mask_period_nm": FLOAT},
    "target": {"fsr_ghz": FLOAT, "tau0_ps_km": FLOAT, "d_ps_nm_km": FLOAT,
               "slope_ps_nm2_km": FLOAT},
    "profile": {"a1_um": FLOAT, "delta1_pct": FLOAT, "a2_um": FLOAT, "w_um": FLOAT,
                "delta2_pct": FLOAT, "lambda0_nm": FLOAT, "step_nm": FLOAT,
                "resolution_per_um": FLOAT},
    "box": {"a1_min_um": FLOAT, "a1_max_um": FLOAT, "delta1_min_pct": FLOAT,
            "delta1_max_pct": FLOAT, "a2_min_um": FLOAT, "a2_max_um": FLOAT,
            "w_min_um": FLOAT, "w_max_um": FLOAT, "delta2_pct": FLOAT},
    "fit": {"budget": INT, "seed": INT, "n_seeds": INT, "tol_tau0_ps_km": FLOAT,
            "tol_d_ps_nm_km": FLOAT, "tol_s_ps_nm2_km": FLOAT, "lambda0_nm": FLOAT,
            "step_nm": FLOAT},
}

# Sections each kind may use; the first group lists required sections, with
# "a|b" meaning exactly one of them.
KIND_SECTIONS = {
    "simulate-filter": (("grid", "taps|link|device"), ("geometry",)),
    "taps-fbg": (("device",), ("geometry",)),
    "taps-hetero": (("link",), ("geometry",)),
    "validate-hetero": (("link",), ("geometry", "tolerances")),
    "validate-inscription": (("device",), ("geometry", "inscription")),
    "design-spacing": (("target",), ("device",)),
    "design-wavelength": (("link", "target"), ("tolerances",)),
    "design-profile": (("target|profile",), ("box", "fit")),
    "solve-dispersion": (("profile",), ()),
}

REQUIRED_KEYS = {
    "job": ("kind",),
    "grid": ("f_start_ghz", "f_stop_ghz", "n_points"),
    "taps": ("delays_ps", "amplitudes"),
    "link": ("lambda0_nm", "length_km"),
    "profile": ("a1_um", "delta1_pct"),
}

UNIT_SUFFIX = re.compile(
    r"_(um|nm|mm|km|ps|ghz|pct|ps_km|ps_nm_km|ps_nm2_km|per_um)$")


class ConfigError(ValueError):
    """Input error naming the offending key and line."""

    def __init__(self, message: str, key: str | None = None, line: int | None = None):
        self.key, self.line = key, line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key {key!r}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)


@dataclass
class JobConfig:
    kind: str
    name: str
    sections: dict[str, dict[str, object]] = field(default_factory=dict)

    def has(self, section: str) -> bool:
        return section in self.sections

    def section(self, name: str) -> dict[str, object]:
        return self.sections.get(name, {})


def _stem(key: str) -> str:
    return UNIT_SUFFIX.sub("", key)


def _locate(text: str, section: str, key: str | None = None) -> int | None:
    current = None
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        m = re.match(r"\[(.+)\]$", line)
        if m:
            current = m.group(1).strip()
            if key is None and current == section:
                return no
            continue
        if key is not None and current == section:
            m = re.match(r"([^=:\s]+)\s*[=:]", line)
            if m and m.group(1).lower() == key:
                return no
    return None


def _convert(kind: str, raw: str, key: str, line):
    try:
        if kind == FLOAT:
            return float(raw)
        if kind == INT:
            return int(raw)
        if kind == BOOL:
            low = raw.strip().lower()
            if low in ("true", "yes", "1"):
                return True
            if low in ("false", "no", "0"):
                return False
            raise ValueError(raw)
        if kind == FLOATS:
            return [float(v) for v in raw.split(",") if v.strip()]
        if kind == STRS:
            return [v.strip() for v in raw.split(",")]
        return raw.strip()
    except ValueError:
        raise ConfigError(f"cannot parse {raw!r} as {kind}", key, line) from None


def parse_config(text: str) -> JobConfig:
    parser = configparser.ConfigParser(strict=True, interpolation=None,
                                       comment_prefixes=("#", ";"),
                                       inline_comment_prefixes=("#",),
                                       default_section="\x00defaults")
    try:
        parser.read_string(text)
    except configparser.DuplicateSectionError as e:
        raise ConfigError(f"duplicate section [{e.section}]", line=e.lineno) from None
    except configparser.DuplicateOptionError as e:
        raise ConfigError(f"duplicate key in [{e.section}]", e.option, e.lineno) from None
    except configparser.MissingSectionHeaderError as e:
        raise ConfigError("key outside of any section", line=e.lineno) from None
    except configparser.Error as e:
        raise ConfigError(str(e).splitlines()[0]) from None

    sections: dict[str, dict[str, object]] = {}
    for sec in parser.sections():
        if sec not in SCHEMA:
            raise ConfigError(f"unknown section [{sec}]", line=_locate(text, sec))
        schema = SCHEMA[sec]
        values = {}
        for key, raw in parser.items(sec):
            line = _locate(text, sec, key)
            if key not in schema:
                near = [k for k in schema if _stem(k) != k
                        and (key == _stem(k) or key.startswith(_stem(k) + "_"))]
                if near:
                    raise ConfigError(f"unit-suffix mismatch, expected {near[0]!r}", key, line)
                raise ConfigError(f"unknown key in [{sec}]", key, line)
            values[key] = _convert(schema[key], raw, key, line)
        sections[sec] = values

    if "job" not in sections or "kind" not in sections["job"]:
        raise ConfigError("missing [job] section with a kind", "kind")
    kind = sections["job"]["kind"]
    if kind not in KINDS:
        raise ConfigError(f"unknown job kind {kind!r}", "kind", _locate(text, "job", "kind"))

    required, optional = KIND_SECTIONS[kind]
    allowed = {"job", *optional}
    for group in required:
        names = group.split("|")
        present = [n for n in names if n in sections]
        if len(present) != 1:
            what = " or ".join(f"[{n}]" for n in names)
            raise ConfigError(f"{kind} needs exactly one of {what}" if len(names) > 1
                              else f"{kind} needs a {what} section")
        allowed.update(names)
    for sec in sections:
        if sec not in allowed:
            raise ConfigError(f"section [{sec}] is not used by {kind}", line=_locate(text, sec))
    for sec, keys in REQUIRED_KEYS.items():
        if sec in sections:
            for key in keys:
                if key not in sections[sec]:
                    raise ConfigError(f"missing required key in [{sec}]", key)

    name = str(sections["job"].get("name", kind))
    if not re.fullmatch(r"[A-Za-z0-9_.-]+", name):
        raise ConfigError("job name may only contain letters, digits, '_', '.', '-'", "name",
                          _locate(text, "job", "name"))
    return JobConfig(kind, name, sections)
