"""Batch front end: ``mcf-ttdl <kind> --config <path> [--out <dir>] [--fixtures]``.

Exit codes: 0 success, 1 validation failure (report still written),
2 input error, 3 I/O error.  Floats are written in shortest round-trip form
(Python ``repr``), so identical configs give byte-identical files.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from importlib import resources
from pathlib import Path

from . import design, fbg_multicavity as fbg, hetero_delay as hd, rf_filter
from .config import KINDS, ConfigError, JobConfig, parse_config
from .mcf_model import (CoreDispersion, HeteroMCFSpec, Layout, MCFGeometry, TrenchProfile,
                        validate_geometry)
from .mode_solver import (PS_PER_KM, ModeSolverError, Numerics, RadialIndexProfile,
                          dispersion_from_profile)
from .taps import TapSet

SCHEMA_VERSION = 1
EXIT_OK, EXIT_INVALID, EXIT_INPUT, EXIT_IO = 0, 1, 2, 3


class JobResult:
    def __init__(self, files: dict[str, str], status: int = EXIT_OK, summary: str = "ok"):
        self.files, self.status, self.summary = files, status, summary


def fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float) or hasattr(value, "dtype"):
        v = float(value)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    if isinstance(value, (list, tuple)):
        return ",".join(fmt(v) for v in value)
    return str(value)


def records_text(kind: str, records) -> str:
    lines = [f"schema_version={SCHEMA_VERSION}", f"kind={kind}"]
    lines += [f"{k}={fmt(v)}" for k, v in records]
    return "\n".join(lines) + "\n"


def _csv(kind: str, header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["schema_version", "kind"])
    w.writerow([SCHEMA_VERSION, kind])
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def taps_csv(kind: str, taps: TapSet) -> str:
    rows = [(k, d, a, lab) for k, (d, a, lab) in
            enumerate(zip(taps.delays, taps.amplitudes, taps.labels))]
    return _csv(kind, ["tap_index", "delay_ps", "amplitude", "label"], rows)


def response_csv(kind: str, resp: rf_filter.FilterResponse) -> str:
    rows = zip(resp.freq, resp.mag_db(), resp.phase)
    return _csv(kind, ["freq_ghz", "mag_db", "phase_rad"], rows)


# -- builders: config sections to domain objects --------------------------------

def build_geometry(cfg: JobConfig) -> MCFGeometry:
    g = cfg.section("geometry")
    return MCFGeometry(
        core_count=g.get("core_count", 7),
        cladding_diameter=g.get("cladding_um", 125.0),
        core_pitch=g.get("pitch_um", 35.0),
        layout=Layout(g.get("layout", "hex_1ring")),
        core_radius_nominal=g.get("core_radius_um", 4.1),
    )


def _per_core(values, n, key):
    if len(values) == 1:
        return values * n
    if len(values) != n:
        raise ConfigError(f"expected 1 or {n} values", key)
    return values


def build_link(cfg: JobConfig) -> HeteroMCFSpec:
    s = cfg.section("link")
    if "dispersion_ps_nm_km" in s:
        ds = list(s["dispersion_ps_nm_km"])
        if "d1_ps_nm_km" in s or "delta_d_ps_nm_km" in s:
            raise ConfigError("give either dispersion_ps_nm_km or d1/delta_d, not both",
                              "dispersion_ps_nm_km")
    else:
        for key in ("d1_ps_nm_km", "delta_d_ps_nm_km", "core_count"):
            if key not in s:
                raise ConfigError("missing required key in [link]", key)
        ds = [c.D for c in design.assign_core_dispersions(
            s["core_count"], s["d1_ps_nm_km"], s["delta_d_ps_nm_km"])]
    n = len(ds)
    if "core_count" in s and s["core_count"] != n:
        raise ConfigError(f"core_count {s['core_count']} but {n} dispersion values", "core_count")
    tau0 = _per_core(list(s.get("tau0_ps_km", [0.0])), n, "tau0_ps_km")
    slope = _per_core(list(s.get("slope_ps_nm2_km", [0.0])), n, "slope_ps_nm2_km")
    relative = s.get("relative", min(tau0) <= 0)
    try:
        cores = tuple(CoreDispersion(t, d, sl, relative=relative)
                      for t, d, sl in zip(tau0, ds, slope))
    except ValueError as e:
        raise ConfigError(str(e), "tau0_ps_km") from None
    geometry = build_geometry(cfg) if cfg.has("geometry") else None
    return HeteroMCFSpec(cores, s["lambda0_nm"], s["length_km"], geometry)


def build_device(cfg: JobConfig) -> fbg.MulticavityDevice:
    s = cfg.section("device")
    source = s.get("source", "reference")
    n_g = s.get("group_index", fbg.DEFAULT_GROUP_INDEX)
    if source == "reference":
        lengths = s.get("grating_length_mm", [1.0])
        if len(lengths) != 1:
            raise ConfigError("reference device takes a single grating length", "grating_length_mm")
        dev = fbg.build_paper_device(s.get("reflectivity", 0.3), lengths[0], n_g,
                                     s.get("first_position_mm", 0.0))
        if cfg.has("geometry"):
            dev = fbg.MulticavityDevice(build_geometry(cfg), dev.gratings, n_g)
    elif source == "explicit":
        keys = ("grating_cores", "grating_bragg_nm", "grating_position_mm")
        for key in keys:
            if key not in s:
                raise ConfigError("missing required key for an explicit device", key)
        cores = s["grating_cores"]
        n = len(cores)
        lam = _per_core(list(s["grating_bragg_nm"]), n, "grating_bragg_nm")
        pos = _per_core(list(s["grating_position_mm"]), n, "grating_position_mm")
        refl = _per_core(list(s.get("grating_reflectivity", [s.get("reflectivity", 0.3)])),
                         n, "grating_reflectivity")
        glen = _per_core(list(s.get("grating_length_mm", [1.0])), n, "grating_length_mm")
        gratings = tuple(fbg.FBG(int(c), l, z, r, g)
                         for c, l, z, r, g in zip(cores, lam, pos, refl, glen))
        dev = fbg.MulticavityDevice(build_geometry(cfg), gratings, n_g)
    else:
        raise ConfigError(f"unknown device source {source!r}", "source")
    if "guard_band_nm" in s:
        dev = fbg.MulticavityDevice(dev.geometry, dev.gratings, dev.group_index,
                                    s["guard_band_nm"])
    return dev


def device_taps(cfg: JobConfig, dev: fbg.MulticavityDevice) -> TapSet:
    s = cfg.section("device")
    regime = s.get("regime", "wavelength")
    if regime == "wavelength":
        if "core_id" not in s:
            raise ConfigError("wavelength regime needs core_id", "core_id")
        return fbg.tap_set_wavelength_diversity(dev, s["core_id"])
    if regime == "spatial":
        if "bragg_nm" not in s:
            raise ConfigError("spatial regime needs bragg_nm", "bragg_nm")
        return fbg.tap_set_spatial_diversity(dev, s["bragg_nm"],
                                             s.get("match_tol_nm", fbg.DEFAULT_MATCH_TOLERANCE))
    raise ConfigError(f"unknown regime {regime!r}", "regime")


def link_taps(cfg: JobConfig, spec: HeteroMCFSpec) -> TapSet:
    s = cfg.section("link")
    regime = s.get("regime", "spatial")
    weights = s.get("weights")
    if regime == "spatial":
        if "lambda_m_nm" not in s:
            raise ConfigError("spatial regime needs lambda_m_nm", "lambda_m_nm")
        return hd.tap_set_spatial(spec, s["lambda_m_nm"], weights)
    if regime == "wavelength":
        for key in ("core_index", "wavelengths_nm"):
            if key not in s:
                raise ConfigError("wavelength regime needs core_index and wavelengths_nm", key)
        return hd.tap_set_wavelength(spec, s["core_index"], s["wavelengths_nm"], weights)
    raise ConfigError(f"unknown regime {regime!r}", "regime")


def build_tolerances(cfg: JobConfig) -> hd.HeteroTolerances:
    t = cfg.section("tolerances")
    base = hd.HeteroTolerances()
    return hd.HeteroTolerances(
        t.get("anchor_spread_ps", base.anchor_spread),
        t.get("delta_d_rel", base.delta_d_rel),
        t.get("quadratic_fraction", base.quadratic_fraction),
        t.get("slope_variation_ps_nm2_km", base.slope_variation),
    )


def build_profile(cfg: JobConfig) -> tuple[RadialIndexProfile, TrenchProfile | None]:
    p = cfg.section("profile")
    trench_keys = ("a2_um", "w_um")
    given = [k for k in trench_keys if k in p]
    if given and len(given) != len(trench_keys):
        missing = next(k for k in trench_keys if k not in p)
        raise ConfigError("trench profile needs a2_um and w_um", missing)
    if given:
        tp = TrenchProfile(p["a1_um"], p["delta1_pct"], p["a2_um"], p["w_um"],
                           p.get("delta2_pct", 1.0))
        return RadialIndexProfile.from_trench(tp), tp
    if "delta2_pct" in p:
        raise ConfigError("delta2_pct needs a trench (a2_um, w_um)", "delta2_pct")
    return RadialIndexProfile.step_index(p["a1_um"], p["delta1_pct"]), None


# -- jobs ---------------------------------------------------------------------

def _filter_records(taps: TapSet, resp: rf_filter.FilterResponse):
    recs = [("n_taps", len(taps))]
    if len(taps) >= 2:
        est = rf_filter.fsr_estimate(taps)
        recs += [("mean_spacing_ps", taps.mean_spacing()), ("uniform", taps.is_uniform()),
                 ("fsr_ghz", est.fsr), ("fsr_method", est.method),
                 ("spectral_fsr_ghz", rf_filter.spectral_fsr(taps))]
        try:
            recs += rf_filter.response_metrics(resp).records()
        except ValueError as e:
            recs.append(("metrics", f"unavailable: {e}"))
    return recs


def job_simulate_filter(cfg: JobConfig) -> JobResult:
    if cfg.has("taps"):
        t = cfg.section("taps")
        labels = t.get("labels")
        if labels is not None and len(labels) != len(t["delays_ps"]):
            raise ConfigError("one label per tap required", "labels")
        taps = TapSet.from_unsorted(t["delays_ps"], t["amplitudes"], labels, label="config taps")
    elif cfg.has("link"):
        taps = link_taps(cfg, build_link(cfg))
    else:
        taps = device_taps(cfg, build_device(cfg))
    g = cfg.section("grid")
    resp = rf_filter.transfer_function(taps, g["f_start_ghz"], g["f_stop_ghz"], g["n_points"])
    recs = _filter_records(taps, resp)
    files = {
        f"{cfg.name}.response.csv": response_csv(cfg.kind, resp),
        f"{cfg.name}.taps.csv": taps_csv(cfg.kind, taps),
        f"{cfg.name}.metrics.txt": records_text(cfg.kind, recs),
    }
    fsr = dict(recs).get("fsr_ghz")
    return JobResult(files, summary=f"ok fsr_ghz={fmt(fsr)}" if fsr is not None else "ok")


def _taps_job(cfg: JobConfig, taps: TapSet) -> JobResult:
    recs = [("label", taps.label), ("n_taps", len(taps))]
    if len(taps) >= 2:
        recs += [("mean_spacing_ps", taps.mean_spacing()), ("uniform", taps.is_uniform()),
                 ("differences_ps", list(taps.differences())),
                 ("fsr_ghz", rf_filter.fsr_estimate(taps).fsr)]
    files = {f"{cfg.name}.taps.csv": taps_csv(cfg.kind, taps),
             f"{cfg.name}.summary.txt": records_text(cfg.kind, recs)}
    return JobResult(files, summary=f"ok n_taps={len(taps)}")


def job_taps_fbg(cfg):
    return _taps_job(cfg, device_taps(cfg, build_device(cfg)))


def job_taps_hetero(cfg):
    return _taps_job(cfg, link_taps(cfg, build_link(cfg)))


def job_validate_hetero(cfg: JobConfig) -> JobResult:
    spec = build_link(cfg)
    s = cfg.section("link")
    for key in ("band_min_nm", "band_max_nm"):
        if key not in s:
            raise ConfigError("validate-hetero needs an operating band", key)
    report = hd.validate_hetero_spec(spec, (s["band_min_nm"], s["band_max_nm"]),
                                     build_tolerances(cfg))
    recs = [("status", "pass" if report.passed else "fail")] + report.records()
    return _report(cfg, report.passed, recs)


def job_validate_inscription(cfg: JobConfig) -> JobResult:
    dev = build_device(cfg)
    i = cfg.section("inscription")
    base = fbg.InscriptionConstraints()
    cons = fbg.InscriptionConstraints(
        i.get("beam_width_max_um", base.beam_width_max),
        i.get("beam_height_min_um", base.beam_height_min),
        i.get("beam_height_max_um", base.beam_height_max),
        i.get("phase_mask_period_nm", base.phase_mask_period))
    plan = fbg.InscriptionPlan(i.get("beam_width_um", 23.0), i.get("beam_height_um", 40.0))
    report = fbg.validate_inscription_plan(dev, cons, plan)
    recs = [("status", "pass" if report.passed else "fail"),
            ("violations", [c.rule for c in report.violations])] + report.records()
    return _report(cfg, report.passed, recs)


def geometry_records(geometry: MCFGeometry):
    rep = validate_geometry(geometry)
    return [("geometry_" + k, v) for k, v in rep.records()]


def _report(cfg: JobConfig, passed: bool, recs) -> JobResult:
    if cfg.has("geometry"):
        recs = recs + geometry_records(build_geometry(cfg))
        passed = passed and dict(recs)["geometry_pass"]
        recs[0] = ("status", "pass" if passed else "fail")
    files = {f"{cfg.name}.report.txt": records_text(cfg.kind, recs)}
    if passed:
        return JobResult(files, EXIT_OK, "pass")
    failed = [k[:-5] for k, v in recs if k.endswith("_ok") and v is False]
    return JobResult(files, EXIT_INVALID, "fail " + ",".join(failed))


def job_design_spacing(cfg: JobConfig) -> JobResult:
    t = cfg.section("target")
    if "fsr_ghz" not in t:
        raise ConfigError("missing required key in [target]", "fsr_ghz")
    n_g = cfg.section("device").get("group_index", fbg.DEFAULT_GROUP_INDEX)
    d = design.spacing_for_fsr(t["fsr_ghz"], n_g)
    probe = fbg.MulticavityDevice(MCFGeometry.seven_core(), (), n_g)
    check = rf_filter.fsr_estimate(TapSet.uniform(3, probe.round_trip_delay(d)))
    recs = [("target_fsr_ghz", t["fsr_ghz"]), ("group_index", n_g), ("spacing_mm", d),
            ("forward_fsr_ghz", check.fsr)]
    return JobResult({f"{cfg.name}.design.txt": records_text(cfg.kind, recs)},
                     summary=f"ok spacing_mm={fmt(d)}")


def job_design_wavelength(cfg: JobConfig) -> JobResult:
    s, t = cfg.section("link"), cfg.section("target")
    for sec, key in (("link", "delta_d_ps_nm_km"), ("target", "fsr_ghz")):
        if key not in cfg.section(sec):
            raise ConfigError(f"missing required key in [{sec}]", key)
    d_s = s.get("delta_slope_ps_nm2_km", 0.0)
    lam = design.wavelength_for_fsr_hetero(s["delta_d_ps_nm_km"], s["length_km"], s["lambda0_nm"],
                                           t["fsr_ghz"], d_s, build_tolerances(cfg))
    pair = HeteroMCFSpec((CoreDispersion(0.0, 0.0, 0.0, relative=True),
                          CoreDispersion(0.0, s["delta_d_ps_nm_km"], d_s, relative=True)),
                         s["lambda0_nm"], s["length_km"])
    dtau = hd.differential_delay_spatial(pair, lam)[0]
    recs = [("target_fsr_ghz", t["fsr_ghz"]), ("lambda_m_nm", lam), ("delta_tau_ps", dtau),
            ("forward_fsr_ghz", 1e3 / dtau)]
    return JobResult({f"{cfg.name}.design.txt": records_text(cfg.kind, recs)},
                     summary=f"ok lambda_m_nm={fmt(lam)}")


def job_solve_dispersion(cfg: JobConfig) -> JobResult:
    p = cfg.section("profile")
    profile, _ = build_profile(cfg)
    num = Numerics(resolution=p.get("resolution_per_um", Numerics.resolution))
    lam0 = p.get("lambda0_nm", 1550.0)
    disp = dispersion_from_profile(profile, lam0, step=p.get("step_nm", 2.0), numerics=num)
    recs = [("lambda0_nm", lam0), ("tau0_ps_per_km", disp.tau0), ("group_index", disp.tau0 / PS_PER_KM),
            ("d_ps_per_km_nm", disp.D), ("s_ps_per_km_nm2", disp.S)]
    return JobResult({f"{cfg.name}.dispersion.txt": records_text(cfg.kind, recs)},
                     summary=f"ok d_ps_per_km_nm={fmt(disp.D)}")


def job_design_profile(cfg: JobConfig) -> JobResult:
    b, f = cfg.section("box"), cfg.section("fit")
    base = design.ProfileSearchBox()
    box = design.ProfileSearchBox(
        (b.get("a1_min_um", base.a1[0]), b.get("a1_max_um", base.a1[1])),
        (b.get("delta1_min_pct", base.delta1[0]), b.get("delta1_max_pct", base.delta1[1])),
        (b.get("a2_min_um", base.a2[0]), b.get("a2_max_um", base.a2[1])),
        (b.get("w_min_um", base.w[0]), b.get("w_max_um", base.w[1])),
        b.get("delta2_pct", base.delta2))
    lam0 = f.get("lambda0_nm", 1550.0)
    step = f.get("step_nm", 2.0)
    if cfg.has("profile"):
        profile, _ = build_profile(cfg)
        target = dispersion_from_profile(profile, lam0, step=step, numerics=box.fixed_numerics())
    else:
        t = cfg.section("target")
        for key in ("tau0_ps_km", "d_ps_nm_km", "slope_ps_nm2_km"):
            if key not in t:
                raise ConfigError("missing required key in [target]", key)
        target = CoreDispersion(t["tau0_ps_km"], t["d_ps_nm_km"], t["slope_ps_nm2_km"])
    w = design.FitWeights()
    weights = design.FitWeights(
        1 / f["tol_tau0_ps_km"] ** 2 if "tol_tau0_ps_km" in f else w.tau0,
        1 / f["tol_d_ps_nm_km"] ** 2 if "tol_d_ps_nm_km" in f else w.D,
        1 / f["tol_s_ps_nm2_km"] ** 2 if "tol_s_ps_nm2_km" in f else w.S)
    res = design.fit_profile_to_dispersion(target, box, weights, budget=f.get("budget", 500),
                                           seed=f.get("seed", 20170125),
                                           n_seeds=f.get("n_seeds", 8), anchor=lam0, step=step)
    p = res.profile
    recs = [("target_tau0_ps_per_km", target.tau0), ("target_d_ps_per_km_nm", target.D),
            ("target_s_ps_per_km_nm2", target.S),
            ("a1_um", p.a1), ("delta1_pct", p.delta1), ("a2_um", p.a2), ("w_um", p.w),
            ("delta2_pct", p.delta2),
            ("tau0_ps_per_km", res.achieved.tau0), ("d_ps_per_km_nm", res.achieved.D),
            ("s_ps_per_km_nm2", res.achieved.S), ("objective", res.objective),
            ("initial_objective", res.initial_objective), ("evaluations", res.evaluations),
            ("iterations", res.iterations), ("converged", res.converged), ("seed", res.seed)]
    return JobResult({f"{cfg.name}.design.txt": records_text(cfg.kind, recs)},
                     summary=f"ok objective={fmt(res.objective)}")


JOBS = {
    "simulate-filter": job_simulate_filter,
    "taps-fbg": job_taps_fbg,
    "taps-hetero": job_taps_hetero,
    "validate-hetero": job_validate_hetero,
    "validate-inscription": job_validate_inscription,
    "design-spacing": job_design_spacing,
    "design-wavelength": job_design_wavelength,
    "design-profile": job_design_profile,
    "solve-dispersion": job_solve_dispersion,
}


def execute(cfg: JobConfig) -> JobResult:
    """Run a parsed job in memory; input problems surface as ConfigError/ValueError."""
    try:
        return JOBS[cfg.kind](cfg)
    except ModeSolverError as e:
        raise ValueError(f"mode solver: {e}") from None


def run_job(cfg: JobConfig, out_dir: Path | str = ".") -> tuple[int, str]:
    """Run ``cfg`` and write its outputs to ``out_dir``; returns (exit code, summary)."""
    try:
        result = execute(cfg)
    except (ConfigError, ValueError) as e:
        return EXIT_INPUT, f"error: {e}"
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        for name, text in result.files.items():
            (out / name).write_text(text, encoding="utf-8", newline="")
    except OSError as e:
        return EXIT_IO, f"error: cannot write outputs: {e}"
    return result.status, result.summary


FIXTURE_PACKAGE = "mcf_ttdl.fixtures"


def fixture_names() -> list[str]:
    return sorted(p.name for p in resources.files(FIXTURE_PACKAGE).iterdir()
                  if p.name.endswith(".cfg"))


def fixture_text(name: str) -> str:
    return resources.files(FIXTURE_PACKAGE).joinpath(name).read_text(encoding="utf-8")


def write_fixtures(out_dir: Path | str) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name in fixture_names():
        path = out / name
        path.write_text(fixture_text(name), encoding="utf-8", newline="")
        written.append(path)
    return written


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="mcf-ttdl",
        description="Multicore-fiber true time delay lines and microwave photonic filters.")
    ap.add_argument("kind", nargs="?", choices=KINDS, help="job kind")
    ap.add_argument("--config", type=Path, help="job configuration file")
    ap.add_argument("--out", type=Path, default=Path("."), help="output directory")
    ap.add_argument("--fixtures", action="store_true",
                    help="write the built-in reference configs to --out and exit")
    args = ap.parse_args(argv)
    label = args.kind or "mcf-ttdl"

    if args.fixtures:
        try:
            paths = write_fixtures(args.out)
        except OSError as e:
            print(f"{label}: error: cannot write fixtures: {e}", file=sys.stderr)
            return EXIT_IO
        print(f"{label}: ok wrote {len(paths)} fixture configs to {args.out}", file=sys.stderr)
        return EXIT_OK

    if args.kind is None or args.config is None:
        print(f"{label}: error: a job kind and --config are required", file=sys.stderr)
        return EXIT_INPUT
    try:
        text = args.config.read_text(encoding="utf-8")
    except OSError as e:
        print(f"{label}: error: cannot read config: {e}", file=sys.stderr)
        return EXIT_IO
    try:
        cfg = parse_config(text)
    except ConfigError as e:
        print(f"{label}: error: {e}", file=sys.stderr)
        return EXIT_INPUT
    if cfg.kind != args.kind:
        print(f"{label}: error: config is a {cfg.kind} job", file=sys.stderr)
        return EXIT_INPUT
    code, summary = run_job(cfg, args.out)
    print(f"{label}: {summary}".replace("\n", " "), file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
