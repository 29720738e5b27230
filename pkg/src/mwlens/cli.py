"""Config-driven experiment runner.

Reads a JSON scenario, converts SI quantities to natural units once at the
boundary, runs the named experiment, and emits machine-readable results:
CSV envelope dumps (columns xi, re_psi, im_psi, abs2, full double precision)
plus a results.json with a stable, sorted key schema.  Identical configs
produce byte-identical data payloads; wall-clock metadata is isolated in
meta.json.

Exit codes: 0 success, 2 config error, 3 numerical-guard violation,
4 I/O error.
"""

from __future__ import annotations

import argparse
import copy
import json
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .core import (CarrierState, Grid, SampledEnvelope, central_moment,
                   fidelity, make_asymmetric_pair, make_gaussian, norm,
                   rescale, skewness)
from .dispersion import DispersionSegment, propagate
from .errors import ConfigError, MwlensError
from .imaging import (aberration_sweep, estimate_magnification,
                      expected_image, resolution_experiment, run_pipeline,
                      solve_imaging)
from .lens import LensSpec, apply_lens, build_lens, f_number_kinematic
from .units import EV, PhysicalContext, UnitScales

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4

DEFAULT_N_POINTS = 4096
DEFAULT_SPAN_SIGMA = 160.0  # default window width in units of the input sigma

_UNIT_TABLES = {
    "length": {"m": 1.0, "cm": 1e-2, "mm": 1e-3, "um": 1e-6, "µm": 1e-6,
               "nm": 1e-9, "pm": 1e-12},
    "time": {"s": 1.0, "ms": 1e-3, "us": 1e-6, "µs": 1e-6, "ns": 1e-9,
             "ps": 1e-12, "fs": 1e-15},
    "energy": {"J": 1.0, "eV": EV, "keV": 1e3 * EV, "MeV": 1e6 * EV},
    "efield": {"V/m": 1.0, "kV/m": 1e3, "MV/m": 1e6, "V/cm": 1e2,
               "kV/cm": 1e5},
    "frequency": {"Hz": 1.0, "kHz": 1e3, "MHz": 1e6, "GHz": 1e9, "THz": 1e12},
    "angular_frequency": {"rad/s": 1.0},
    "wavenumber": {"rad/m": 1.0, "1/m": 1.0},
    "velocity": {"m/s": 1.0},
    "mass": {"kg": 1.0},
    "charge": {"C": 1.0},
    "chirp": {"rad/m^2": 1.0},
    "dimensionless": {},
}


def parse_quantity(value: Any, dimension: str, where: str) -> float:
    """Parse a config value: a bare number in the base SI unit, or a string
    '<number> <unit>' with a unit from the dimension's table."""
    if isinstance(value, bool):
        raise ConfigError(f"{where}: expected a quantity, got a boolean")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        parts = value.split()
        table = _UNIT_TABLES[dimension]
        if len(parts) == 2 and parts[1] in table:
            try:
                return float(parts[0]) * table[parts[1]]
            except ValueError:
                raise ConfigError(f"{where}: cannot parse number in {value!r}") from None
        if len(parts) == 1:
            try:
                return float(parts[0])
            except ValueError:
                pass
        raise ConfigError(
            f"{where}: cannot parse {value!r}; use a number (base unit) or "
            f"'<number> <unit>' with unit in {sorted(table) or ['(none)']}")
    raise ConfigError(f"{where}: expected number or string, got {type(value).__name__}")


def _check_keys(section: dict, valid: set[str], where: str) -> None:
    unknown = set(section) - valid
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {sorted(unknown)}; "
                          f"valid keys are {sorted(valid)}")


def _require(section: dict, key: str, where: str) -> Any:
    if key not in section:
        raise ConfigError(f"missing required field: {where}.{key}")
    return section[key]


def _exactly_one(section: dict, keys: tuple[str, ...], where: str) -> str:
    present = [k for k in keys if k in section]
    if len(present) != 1:
        raise ConfigError(f"{where}: give exactly one of {list(keys)}, "
                          f"got {present or 'none'}")
    return present[0]


@dataclass
class ScenarioConfig:
    """A fully validated scenario, SI values plus the natural-unit bridge."""

    ctx_si: PhysicalContext
    carrier_si_k0: float
    input_kind: str
    input_params: dict            # SI
    grid_n: int
    grid_span_si: float
    lens: dict | None             # SI lens parameters
    imaging_L1_si: float | None
    experiment: str
    experiment_params: dict       # SI
    out_dir: str | None
    out_format: str
    raw: dict = field(default_factory=dict)

    # ---- natural-unit bridge -------------------------------------------
    @property
    def scales(self) -> UnitScales:
        return UnitScales(self.ctx_si, self.input_params["sigma"])

    def natural(self) -> dict:
        """Natural-unit working set: context, carrier, grid, input envelope."""
        sc = self.scales
        ctx = sc.natural_context()
        carrier = CarrierState.from_wavenumber(ctx, sc.wavenumber(self.carrier_si_k0))
        grid = Grid(self.grid_n, sc.length(self.grid_span_si))
        if self.input_kind == "gaussian":
            env = make_gaussian(grid, carrier,
                                sigma=sc.length(self.input_params["sigma"]),
                                center=sc.length(self.input_params["center"]),
                                chirp=self.input_params["chirp"] * sc.length_scale**2)
        else:
            env = make_asymmetric_pair(grid, carrier,
                                       sep=sc.length(self.input_params["sep"]),
                                       sigma=sc.length(self.input_params["sigma"]),
                                       amp_ratio=self.input_params["amp_ratio"])
        return {"scales": sc, "ctx": ctx, "carrier": carrier, "grid": grid,
                "env0": env}

    def build_lens_natural(self, ctx, carrier, sc) -> LensSpec:
        lz = self.lens
        return build_lens(E0=sc.efield(lz["E0"]),
                          omega_m=sc.angular_frequency(lz["omega_m"]),
                          length=sc.length(lz["L"]),
                          ctx=ctx, carrier=carrier,
                          v_p=sc.velocity(lz["v_p"]),
                          diverging=lz["diverging"])

    def provenance(self) -> dict:
        """Derived quantities echoed for auditability (SI and natural)."""
        ctx = self.ctx_si
        car = CarrierState.from_wavenumber(ctx, self.carrier_si_k0)
        sc = self.scales
        prov = {
            "si": {
                "k0": car.k0, "omega0": car.omega0, "v_group": car.v_group,
                "v_phase_carrier": car.v_phase_carrier, "lambda0": car.lambda0,
                "kinetic_energy_eV": 0.5 * ctx.mass * car.v_group**2 / EV,
                "grid_span": self.grid_span_si, "grid_step": self.grid_span_si / self.grid_n,
            },
            "natural": {
                "length_scale": sc.length_scale, "time_scale": sc.time_scale,
                "k0": sc.wavenumber(car.k0), "c_light": ctx.c_light / sc.velocity_scale,
            },
            "input": {"kind": self.input_kind, **self.input_params},
        }
        if self.lens is not None:
            lz = self.lens
            prov["si"]["v_p"] = lz["v_p"]
            prov["si"]["slow_factor_n"] = ctx.c_light / lz["v_p"]
            prov["si"]["omega_m"] = lz["omega_m"]
            prov["si"]["k_m"] = lz["omega_m"] / lz["v_p"]
            prov["si"]["velocity_match"] = (
                "matched" if math.isclose(lz["v_p"], car.v_group, rel_tol=1e-9)
                else f"walkoff: v_p/v_g = {lz['v_p'] / car.v_group:.6g}")
        return prov


_SPECIES = {"electron": PhysicalContext.electron}

_EXPERIMENTS = ("disperse", "lens", "image", "sweep", "resolution")


def load_config(path: str | Path) -> ScenarioConfig:
    """Parse and validate a scenario file; every error names the field."""
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {p}")
    try:
        raw = json.loads(p.read_text())
    except json.JSONDecodeError as e:
        raise ConfigError(f"config is not valid JSON: {e}") from None
    return parse_config(raw)


def parse_config(raw: dict) -> ScenarioConfig:
    """Validate a scenario dict and resolve it to SI quantities."""
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    _check_keys(raw, {"particle", "carrier", "grid", "input", "lens",
                      "imaging", "experiment", "output"}, "config")

    # --- particle ---
    part = _require(raw, "particle", "config")
    _check_keys(part, {"species", "mass", "charge", "c_light", "hbar"},
                "particle")
    if "species" in part:
        if part["species"] not in _SPECIES:
            raise ConfigError(f"particle.species: unknown species "
                              f"{part['species']!r}; known: {sorted(_SPECIES)}")
        if set(part) - {"species"}:
            raise ConfigError("particle: species preset cannot be combined "
                              "with explicit mass/charge/c_light/hbar")
        ctx_si = _SPECIES[part["species"]]()
    else:
        # Explicit particles default to SI constants; hbar/c_light overrides
        # admit scaled model-unit scenarios.
        mass = parse_quantity(_require(part, "mass", "particle"), "mass", "particle.mass")
        charge = parse_quantity(_require(part, "charge", "particle"), "charge", "particle.charge")
        c_light = parse_quantity(part.get("c_light", PhysicalContext.electron().c_light),
                                 "velocity", "particle.c_light")
        hbar = parse_quantity(part.get("hbar", PhysicalContext.electron().hbar),
                              "dimensionless", "particle.hbar")
        ctx_si = PhysicalContext(hbar=hbar, mass=mass, charge=charge,
                                 c_light=c_light)

    # --- carrier ---
    carr = _require(raw, "carrier", "config")
    _check_keys(carr, {"kinetic_energy", "k0"}, "carrier")
    which = _exactly_one(carr, ("kinetic_energy", "k0"), "carrier")
    if which == "kinetic_energy":
        e = parse_quantity(carr["kinetic_energy"], "energy", "carrier.kinetic_energy")
        k0 = CarrierState.from_kinetic_energy(ctx_si, e).k0
    else:
        k0 = parse_quantity(carr["k0"], "wavenumber", "carrier.k0")
    if k0 <= 0:
        raise ConfigError("carrier: k0 must be positive")

    # --- input ---
    inp = _require(raw, "input", "config")
    _check_keys(inp, {"type", "sigma", "center", "chirp", "sep", "amp_ratio"},
                "input")
    kind = _require(inp, "type", "input")
    if kind == "gaussian":
        bad = set(inp) & {"sep", "amp_ratio"}
        if bad:
            raise ConfigError(f"input: {sorted(bad)} not valid for gaussian")
        params = {
            "sigma": parse_quantity(_require(inp, "sigma", "input"), "length", "input.sigma"),
            "center": parse_quantity(inp.get("center", 0.0), "length", "input.center"),
            "chirp": parse_quantity(inp.get("chirp", 0.0), "chirp", "input.chirp"),
        }
    elif kind == "asymmetric_pair":
        bad = set(inp) & {"center", "chirp"}
        if bad:
            raise ConfigError(f"input: {sorted(bad)} not valid for asymmetric_pair")
        params = {
            "sigma": parse_quantity(_require(inp, "sigma", "input"), "length", "input.sigma"),
            "sep": parse_quantity(_require(inp, "sep", "input"), "length", "input.sep"),
            "amp_ratio": parse_quantity(_require(inp, "amp_ratio", "input"),
                                        "dimensionless", "input.amp_ratio"),
        }
    else:
        raise ConfigError(f"input.type: unknown type {kind!r}; "
                          f"use 'gaussian' or 'asymmetric_pair'")

    # --- grid (defaults allowed) ---
    gr = raw.get("grid", {})
    _check_keys(gr, {"n_points", "xi_span"}, "grid")
    n_points = gr.get("n_points", DEFAULT_N_POINTS)
    if not isinstance(n_points, int) or n_points < 2:
        raise ConfigError("grid.n_points must be a positive integer")
    if "xi_span" in gr:
        span = parse_quantity(gr["xi_span"], "length", "grid.xi_span")
    else:
        span = DEFAULT_SPAN_SIGMA * params["sigma"]

    # --- experiment ---
    exp = _require(raw, "experiment", "config")
    _check_keys(exp, {"name", "tau", "distance", "probe_width", "widths"},
                "experiment")
    name = _require(exp, "name", "experiment")
    if name not in _EXPERIMENTS:
        raise ConfigError(f"experiment.name: unknown experiment {name!r}; "
                          f"valid: {list(_EXPERIMENTS)}")
    exp_params: dict[str, Any] = {}
    if name == "disperse":
        which = _exactly_one(exp, ("tau", "distance"), "experiment")
        exp_params[which] = parse_quantity(
            exp[which], "time" if which == "tau" else "length",
            f"experiment.{which}")
    elif name == "resolution":
        exp_params["probe_width"] = parse_quantity(
            _require(exp, "probe_width", "experiment"), "length",
            "experiment.probe_width")
    elif name == "sweep":
        widths = _require(exp, "widths", "experiment")
        if not isinstance(widths, list) or not widths:
            raise ConfigError("experiment.widths must be a nonempty list")
        exp_params["widths"] = [parse_quantity(w, "length", "experiment.widths")
                                for w in widths]

    # --- lens ---
    lens_cfg = None
    if name in ("lens", "image", "sweep", "resolution"):
        lz = _require(raw, "lens", "config")
        _check_keys(lz, {"E0", "omega_m", "frequency", "n", "v_p", "L",
                         "mode", "aperture", "diverging"}, "lens")
        wf = _exactly_one(lz, ("omega_m", "frequency"), "lens")
        omega_m = (parse_quantity(lz["omega_m"], "angular_frequency", "lens.omega_m")
                   if wf == "omega_m"
                   else 2 * math.pi * parse_quantity(lz["frequency"], "frequency",
                                                     "lens.frequency"))
        wv = _exactly_one(lz, ("n", "v_p"), "lens")
        if wv == "n":
            n_slow = parse_quantity(lz["n"], "dimensionless", "lens.n")
            v_p = ctx_si.c_light / n_slow
        else:
            v_p = parse_quantity(lz["v_p"], "velocity", "lens.v_p")
        mode = lz.get("mode", "quadratic")
        if mode not in ("quadratic", "full-cosine"):
            raise ConfigError(f"lens.mode: unknown mode {mode!r}")
        aperture = lz.get("aperture")
        if aperture is not None and aperture is not True:
            aperture = parse_quantity(aperture, "length", "lens.aperture")
        lens_cfg = {
            "E0": parse_quantity(_require(lz, "E0", "lens"), "efield", "lens.E0"),
            "omega_m": omega_m,
            "v_p": v_p,
            "L": parse_quantity(_require(lz, "L", "lens"), "length", "lens.L"),
            "mode": mode,
            "aperture": aperture,
            "diverging": bool(lz.get("diverging", False)),
        }
    elif "lens" in raw:
        raise ConfigError(f"lens section is not used by experiment {name!r}")

    # --- imaging ---
    imaging_L1 = None
    if name in ("image", "sweep", "resolution"):
        im = _require(raw, "imaging", "config")
        _check_keys(im, {"L1", "tau1"}, "imaging")
        which = _exactly_one(im, ("L1", "tau1"), "imaging")
        if which == "L1":
            imaging_L1 = parse_quantity(im["L1"], "length", "imaging.L1")
        else:
            tau1 = parse_quantity(im["tau1"], "time", "imaging.tau1")
            imaging_L1 = tau1 * CarrierState.from_wavenumber(ctx_si, k0).v_group
        if imaging_L1 <= 0:
            raise ConfigError("imaging: L1 must be positive")
    elif "imaging" in raw:
        raise ConfigError(f"imaging section is not used by experiment {name!r}")

    # --- output ---
    out = raw.get("output", {})
    _check_keys(out, {"dir", "format"}, "output")
    fmt = out.get("format", "both")
    if fmt not in ("csv", "json", "both"):
        raise ConfigError(f"output.format: unknown format {fmt!r}")

    return ScenarioConfig(ctx_si=ctx_si, carrier_si_k0=k0, input_kind=kind,
                          input_params=params, grid_n=n_points,
                          grid_span_si=span, lens=lens_cfg,
                          imaging_L1_si=imaging_L1, experiment=name,
                          experiment_params=exp_params,
                          out_dir=out.get("dir"), out_format=fmt, raw=raw)


# ---------------------------------------------------------------------------
# output writers
# ---------------------------------------------------------------------------

def write_envelope_csv(path: Path, env: SampledEnvelope, sc: UnitScales) -> None:
    """Dump an envelope in SI units, one row per grid point, 17 significant
    digits (lossless double round-trip)."""
    xi = env.grid.xi() * sc.length_scale
    psi = env.values / math.sqrt(sc.length_scale)
    with path.open("w", newline="\n") as fh:
        fh.write("xi,re_psi,im_psi,abs2\n")
        for x, v in zip(xi, psi):
            fh.write(f"{x:.17g},{v.real:.17g},{v.imag:.17g},{abs(v)**2:.17g}\n")


def _json_ready(obj):
    if isinstance(obj, dict):
        return {k: _json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_ready(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, float) and math.isinf(obj):
        return "inf" if obj > 0 else "-inf"
    return obj


def write_results_json(path: Path, summary: dict) -> None:
    path.write_text(json.dumps(_json_ready(summary), indent=2, sort_keys=True)
                    + "\n")


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------

def _lens_summary(spec: LensSpec, sc: UnitScales) -> dict:
    return {
        "gamma0_rad": spec.gamma0,
        "delta_phi_rad": spec.delta_phi,
        "theta_rad": spec.theta,
        "focal_length_si": sc.length_si(spec.focal_length)
        if math.isfinite(spec.focal_length) else math.inf,
        "f_number": spec.f_number,
        "f_number_kinematic": f_number_kinematic(spec) if spec.E0 > 0 else math.inf,
        "aperture_si": sc.length_si(spec.aperture_width),
        "resolution_input_scale_si": sc.length_si(spec.resolution_input_scale),
        "A0_natural": spec.A0,
        "Phi0_natural": spec.Phi0,
        "lambda_m_si": sc.length_si(spec.lambda_m),
    }


def run_experiment(config: ScenarioConfig, out_dir: Path,
                   out_format: str | None = None,
                   quiet: bool = False) -> dict:
    """Execute the configured experiment; write dumps and results.json.

    Deterministic: identical configs produce byte-identical payloads.
    Returns the summary dict (the content of results.json).
    """
    fmt = out_format or config.out_format
    out_dir.mkdir(parents=True, exist_ok=True)
    nat = config.natural()
    sc, ctx, carrier = nat["scales"], nat["ctx"], nat["carrier"]
    env0 = nat["env0"]
    dumps: dict[str, SampledEnvelope] = {"input": env0}
    results: dict[str, Any] = {}

    name = config.experiment
    if name == "disperse":
        ep = config.experiment_params
        tau_nat = (sc.time(ep["tau"]) if "tau" in ep
                   else sc.length(ep["distance"]) / carrier.v_group)
        if tau_nat == 0.0:
            out_env = env0
        else:
            seg = DispersionSegment.for_time(tau_nat, ctx, carrier)
            out_env = propagate(env0, seg, ctx)
        dumps["output"] = out_env
        results.update({
            "tau_si": sc.time_si(tau_nat),
            "distance_si": sc.length_si(carrier.v_group * tau_nat),
            "variance_in_si": central_moment(env0, 2) * sc.length_scale**2,
            "variance_out_si": central_moment(out_env, 2) * sc.length_scale**2,
            "norm_out": norm(out_env),
            "elapsed_time_si": sc.time_si(out_env.elapsed_time),
            "global_phase_rad": out_env.global_phase,
        })

    elif name == "lens":
        spec = config.build_lens_natural(ctx, carrier, sc)
        aperture = config.lens["aperture"]
        if aperture is True:
            aperture = spec.aperture_width
        elif aperture is not None:
            aperture = sc.length(aperture)
        out_env = apply_lens(env0, spec, mode=config.lens["mode"],
                             aperture=aperture)
        dumps["output"] = out_env
        results.update(_lens_summary(spec, sc))
        results["norm_out"] = norm(out_env)

    elif name == "image":
        spec = config.build_lens_natural(ctx, carrier, sc)
        design = solve_imaging(sc.length(config.imaging_L1_si),
                               spec.focal_length, ctx, carrier)
        aperture = config.lens["aperture"]
        if aperture is True:
            aperture = spec.aperture_width
        elif aperture is not None:
            aperture = sc.length(aperture)
        out_env = run_pipeline(env0, design, spec, mode=config.lens["mode"],
                               aperture=aperture)
        ref = expected_image(env0, design)
        est = estimate_magnification(env0, out_env)
        dumps["output"] = out_env
        dumps["reference"] = ref
        results.update(_lens_summary(spec, sc))
        results.update({
            "L1_si": sc.length_si(design.L1),
            "L2_si": sc.length_si(design.L2),
            "magnification_design": design.magnification,
            "magnification_estimated": est.value,
            "magnification_sign_determined": est.sign_determined,
            "fidelity": fidelity(out_env, ref),
            "fidelity_vs_plain_rescale": fidelity(
                out_env, rescale(env0, design.magnification)),
            "skewness_in": skewness(env0),
            "skewness_out": skewness(out_env),
            "norm_out": norm(out_env),
            "elapsed_time_si": sc.time_si(out_env.elapsed_time),
        })

    elif name == "sweep":
        spec = config.build_lens_natural(ctx, carrier, sc)
        design = solve_imaging(sc.length(config.imaging_L1_si),
                               spec.focal_length, ctx, carrier)
        widths_nat = [sc.length(w) for w in config.experiment_params["widths"]]
        rows = aberration_sweep(nat["grid"], carrier, ctx, spec, design,
                                widths_nat)
        results.update(_lens_summary(spec, sc))
        results["magnification_design"] = design.magnification
        results["aberration_table"] = [
            {"width_si": sc.length_si(r.width_target),
             "width_at_lens_si": sc.length_si(r.width_at_lens),
             "fidelity_full_vs_quadratic": r.fidelity_full_vs_quadratic}
            for r in rows]
        if fmt in ("csv", "both"):
            with (out_dir / "aberration.csv").open("w", newline="\n") as fh:
                fh.write("width,width_at_lens,fidelity_full_vs_quadratic\n")
                for r in rows:
                    fh.write(f"{sc.length_si(r.width_target):.17g},"
                             f"{sc.length_si(r.width_at_lens):.17g},"
                             f"{r.fidelity_full_vs_quadratic:.17g}\n")

    elif name == "resolution":
        spec = config.build_lens_natural(ctx, carrier, sc)
        design = solve_imaging(sc.length(config.imaging_L1_si),
                               spec.focal_length, ctx, carrier)
        aperture = config.lens["aperture"]
        if aperture is True or aperture is None:
            aperture = "default"
        else:
            aperture = sc.length(aperture)
        res = resolution_experiment(
            nat["grid"], carrier, ctx, design, spec,
            probe_width=sc.length(config.experiment_params["probe_width"]),
            aperture=aperture)
        results.update(_lens_summary(spec, sc))
        results.update({
            "magnification_design": design.magnification,
            "resolution_si": sc.length_si(res.input_referred_blur),
            "resolution_over_lambda0_fnumber":
                res.input_referred_blur / res.diffraction_scale,
            "probe_fwhm_si": sc.length_si(res.probe_fwhm),
            "aperture_used_si": sc.length_si(res.aperture_width),
        })

    summary = {
        "experiment": name,
        "provenance": config.provenance(),
        "results": results,
    }
    if fmt in ("csv", "both"):
        for tag, env in dumps.items():
            write_envelope_csv(out_dir / f"{tag}.csv", env, sc)
    if fmt in ("json", "both"):
        write_results_json(out_dir / "results.json", summary)
    (out_dir / "meta.json").write_text(json.dumps(
        {"timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
         "mwlens_version": __version__}, indent=2, sort_keys=True) + "\n")
    if not quiet:
        print(json.dumps(_json_ready(results), indent=2, sort_keys=True))
    return summary


# ---------------------------------------------------------------------------
# command line
# ---------------------------------------------------------------------------

def _set_dotted(d: dict, dotted: str, value: Any) -> None:
    keys = dotted.split(".")
    node = d
    for k in keys[:-1]:
        if k not in node or not isinstance(node[k], dict):
            node[k] = {}
        node = node[k]
    node[keys[-1]] = value


def _parse_override(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _cmd_run(args) -> int:
    config = load_config(args.config)
    out_dir = Path(args.out_dir or config.out_dir or "out")
    run_experiment(config, out_dir, out_format=args.format, quiet=args.quiet)
    return EXIT_OK


def _cmd_check(args) -> int:
    config = load_config(args.config)
    if not args.quiet:
        print(json.dumps(_json_ready(config.provenance()), indent=2,
                         sort_keys=True))
    return EXIT_OK


def _cmd_sweep(args) -> int:
    base = load_config(args.config)  # validate before any run
    values = [v for v in args.values.split(",") if v]
    if not values:
        raise ConfigError("sweep: --values must list at least one value")
    out_root = Path(args.out_dir or base.out_dir or "out")
    aggregate = {}
    for text in values:
        raw = copy.deepcopy(base.raw)
        _set_dotted(raw, args.param, _parse_override(text))
        cfg = parse_config(raw)
        tag = f"{args.param}={text}".replace("/", "_")
        summary = run_experiment(cfg, out_root / tag, out_format=args.format,
                                 quiet=True)
        aggregate[text] = summary["results"]
        if not args.quiet:
            print(f"{args.param} = {text}: done")
    write_results_json(out_root / "sweep_summary.json",
                       {"param": args.param, "values": values,
                        "results": aggregate})
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mwlens",
        description="Matter-wave space-time imaging experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("config", help="scenario JSON file")
        p.add_argument("--out-dir", default=None, help="output directory")
        p.add_argument("--format", choices=("csv", "json", "both"),
                       default=None, help="payload format (default: config)")
        p.add_argument("--quiet", action="store_true")

    p_run = sub.add_parser("run", help="execute the configured experiment")
    common(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_check = sub.add_parser("check", help="validate a config, print provenance")
    p_check.add_argument("config")
    p_check.add_argument("--quiet", action="store_true")
    p_check.set_defaults(func=_cmd_check)

    p_sweep = sub.add_parser("sweep", help="re-run over a list of values "
                                           "for one config key")
    common(p_sweep)
    p_sweep.add_argument("--param", required=True,
                         help="dotted config key, e.g. lens.E0")
    p_sweep.add_argument("--values", required=True,
                         help="comma-separated values")
    p_sweep.set_defaults(func=_cmd_sweep)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except MwlensError as e:
        print(f"numerical guard: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as e:
        print(f"i/o error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
