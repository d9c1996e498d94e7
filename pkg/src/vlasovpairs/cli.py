"""Command-line front end, configuration files, and CSV serialization.

Configuration files are flat key-value text with one section per concern::

    [field]
    type = modulated
    E0 = 0.1          # units of E_cr
    omega_c = 0.65    # units of m
    omega_m = 0.056   # units of m
    M = 1.0
    t_switch = 100pi  # units of tau0; 'pi' suffix multiplies by pi
    t_d = 1000pi

    [grid]
    p_min = -2.0
    p_max = 2.0
    n_points = 401

    [solver]
    rel_tol = 1e-8
    abs_tol = 1e-13

    [scan]
    kind = modulation-frequency
    start = 0.02
    stop = 0.10
    step = 0.002

Unknown keys are rejected with the offending key and line number.  All
quantities use the natural units of :mod:`vlasovpairs.units`, so values can
be copied straight from the literature.  Outputs are deterministic: rerunning
a command with the same inputs produces byte-identical CSVs except for the
wall-time columns.
"""

from __future__ import annotations

import argparse
import math
import os
import re
import sys
from dataclasses import dataclass, field as dc_field

from . import fields, kernel, observables, scans, solver
from .exceptions import (CheckpointError, ConfigurationError, DataError,
                         IntegrationError, NumericalError, ResourceError)
from .provenance import ARTIFACT_VERSION, fingerprint, to_plain

TIER_DURATION_SCALE = {"quick": 0.1, "full": 1.0}

WORKERS_ENV = "VLASOVPAIRS_WORKERS"

EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_CONFIG = 2


# ---------------------------------------------------------------------------
# configuration files

_SECTION_RE = re.compile(r"^\[([a-zA-Z0-9_.]+)\]$")
_INT_RE = re.compile(r"^[+-]?\d+$")

_FIELD_KEYS = {
    "modulated": {"type", "E0", "omega_c", "omega_m", "M", "t_switch", "t_d"},
    "pulse_train": {"type", "E0", "omega_c", "tau", "N", "omega_m", "T_m"},
    "superposition": {"type", "components", "span_end"},
}
_GRID_KEYS = {"p_min", "p_max", "n_points"}
_SOLVER_KEYS = {"rel_tol", "abs_tol", "max_step", "max_steps"}
_SCAN_KEYS = {"kind", "start", "stop", "step", "values", "duration_scale"}


def _read_sections(path):
    sections = {}
    current = None
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            m = _SECTION_RE.match(line)
            if m:
                current = m.group(1)
                if current in sections:
                    raise ConfigurationError(f"line {line_no}: duplicate section [{current}]")
                sections[current] = {}
                continue
            if current is None or "=" not in line:
                raise ConfigurationError(f"line {line_no}: expected 'key = value', got {raw.strip()!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            if key in sections[current]:
                raise ConfigurationError(f"line {line_no}: duplicate key {key!r} in [{current}]")
            sections[current][key] = (value, line_no)
    return sections


def _number(entry, key):
    text, line_no = entry
    s = text.strip()
    factor = 1.0
    if s.endswith("pi"):
        factor = math.pi
        s = s[:-2].strip()
        if s in ("", "+"):
            return factor
        if s == "-":
            return -factor
    try:
        return float(s) * factor
    except ValueError:
        raise ConfigurationError(f"line {line_no}: key {key!r}: not a number: {text!r}") from None


def _integer(entry, key):
    text, line_no = entry
    if not _INT_RE.match(text.strip()):
        raise ConfigurationError(f"line {line_no}: key {key!r}: not an integer: {text!r}")
    return int(text.strip())


def _require(section, name, key):
    if key not in section:
        raise ConfigurationError(f"section [{name}]: missing required key {key!r}")
    return section[key]


def _reject_unknown(section, name, allowed):
    for key, (_, line_no) in section.items():
        if key not in allowed:
            raise ConfigurationError(f"line {line_no}: unknown key {key!r} in section [{name}]")


def _parse_field_section(sections, name):
    if name not in sections:
        raise ConfigurationError(f"missing required section [{name}]")
    sec = sections[name]
    ftype, line_no = _require(sec, name, "type")
    if ftype not in _FIELD_KEYS:
        raise ConfigurationError(f"line {line_no}: unknown field type {ftype!r}")
    _reject_unknown(sec, name, _FIELD_KEYS[ftype])
    try:
        if ftype == "modulated":
            return fields.ModulatedFieldConfig(
                E0=_number(_require(sec, name, "E0"), "E0"),
                omega_c=_number(_require(sec, name, "omega_c"), "omega_c"),
                omega_m=_number(_require(sec, name, "omega_m"), "omega_m"),
                M=_number(_require(sec, name, "M"), "M"),
                t_switch=_number(_require(sec, name, "t_switch"), "t_switch"),
                t_d=_number(_require(sec, name, "t_d"), "t_d"),
            )
        if ftype == "pulse_train":
            has_wm, has_tm = "omega_m" in sec, "T_m" in sec
            if has_wm == has_tm:
                raise ConfigurationError(
                    f"section [{name}]: give exactly one of 'omega_m' or 'T_m'")
            common = dict(
                E0=_number(_require(sec, name, "E0"), "E0"),
                omega_c=_number(_require(sec, name, "omega_c"), "omega_c"),
                tau=_number(_require(sec, name, "tau"), "tau"),
                N=_integer(_require(sec, name, "N"), "N"),
            )
            if has_tm:
                return fields.PulseTrainConfig(T_m=_number(sec["T_m"], "T_m"), **common)
            return fields.PulseTrainConfig.from_modulation_frequency(
                omega_m=_number(sec["omega_m"], "omega_m"), **common)
        count = _integer(_require(sec, name, "components"), "components")
        members = tuple(_parse_field_section(sections, f"{name}.{i}")
                        for i in range(1, count + 1))
        span_end = _number(sec["span_end"], "span_end") if "span_end" in sec else None
        return fields.Superposition(members=members, span_end=span_end)
    except ConfigurationError as exc:
        raise ConfigurationError(f"section [{name}]: {exc}") from None


@dataclass
class RunInput:
    """Everything a subcommand needs, parsed and validated."""

    field_config: fields.FieldConfig
    grid: observables.MomentumGrid | None
    settings: solver.SolverSettings
    scan_kind: str | None = None
    scan_values: tuple | None = None
    scan_duration_scale: float | None = None
    raw: dict = dc_field(default_factory=dict)


def parse_config(path) -> RunInput:
    """Parse and validate a configuration file."""
    if not os.path.exists(path):
        raise ConfigurationError(f"config file not found: {path}")
    sections = _read_sections(path)
    known = {"field", "grid", "solver", "scan"}
    for name in sections:
        if name not in known and not name.startswith("field."):
            raise ConfigurationError(f"unknown section [{name}]")

    field_config = _parse_field_section(sections, "field")

    grid = None
    if "grid" in sections:
        sec = sections["grid"]
        _reject_unknown(sec, "grid", _GRID_KEYS)
        grid = observables.MomentumGrid(
            p_min=_number(_require(sec, "grid", "p_min"), "p_min"),
            p_max=_number(_require(sec, "grid", "p_max"), "p_max"),
            n_points=_integer(_require(sec, "grid", "n_points"), "n_points"),
        )

    kwargs = {}
    if "solver" in sections:
        sec = sections["solver"]
        _reject_unknown(sec, "solver", _SOLVER_KEYS)
        if "rel_tol" in sec:
            kwargs["rel_tol"] = _number(sec["rel_tol"], "rel_tol")
        if "abs_tol" in sec:
            kwargs["abs_tol"] = _number(sec["abs_tol"], "abs_tol")
        if "max_step" in sec:
            kwargs["max_step"] = _number(sec["max_step"], "max_step")
        if "max_steps" in sec:
            kwargs["max_steps"] = _integer(sec["max_steps"], "max_steps")
    settings = solver.SolverSettings(**kwargs)

    scan_kind = scan_values = scan_scale = None
    if "scan" in sections:
        sec = sections["scan"]
        _reject_unknown(sec, "scan", _SCAN_KEYS)
        scan_kind, line_no = _require(sec, "scan", "kind")
        if scan_kind not in scans.SCAN_KINDS:
            raise ConfigurationError(f"line {line_no}: unknown scan kind {scan_kind!r}")
        if "values" in sec:
            text, line_no = sec["values"]
            try:
                scan_values = tuple(float(v) for v in text.split(",") if v.strip())
            except ValueError:
                raise ConfigurationError(
                    f"line {line_no}: key 'values': not a number list: {text!r}") from None
        else:
            start = _number(_require(sec, "scan", "start"), "start")
            stop = _number(_require(sec, "scan", "stop"), "stop")
            step = _number(_require(sec, "scan", "step"), "step")
            if step <= 0.0:
                raise ConfigurationError("scan step must be positive")
            count = int(math.floor((stop - start) / step + 1e-9)) + 1
            scan_values = tuple(start + i * step for i in range(count))
        if "duration_scale" in sec:
            scan_scale = _number(sec["duration_scale"], "duration_scale")

    raw = {name: {k: v for k, (v, _) in sec.items()} for name, sec in sections.items()}
    return RunInput(field_config=field_config, grid=grid, settings=settings,
                    scan_kind=scan_kind, scan_values=scan_values,
                    scan_duration_scale=scan_scale, raw=raw)


def _scale_durations(config, scale):
    """Shrink the flat top of modulated components by the tier scale."""
    if scale == 1.0:
        return config
    if isinstance(config, fields.ModulatedFieldConfig):
        import dataclasses
        return dataclasses.replace(config, t_d=config.t_d * scale)
    if isinstance(config, fields.Superposition):
        return fields.Superposition(
            members=tuple(_scale_durations(m, scale) for m in config.members),
            span_end=config.span_end,
        )
    return config


# ---------------------------------------------------------------------------
# CSV tables

@dataclass
class Table:
    """Column-oriented table with '#'-prefixed metadata header lines."""

    metadata: dict
    columns: tuple
    rows: list


def _format_cell(value) -> str:
    if isinstance(value, bool):
        raise DataError("boolean cells are not supported")
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        s = f"{value:.17g}"
        if not any(c in s for c in ".eE") and "inf" not in s and "nan" not in s:
            s += ".0"
        return s
    s = str(value)
    if "," in s or "\n" in s:
        raise DataError(f"cell value may not contain commas or newlines: {s!r}")
    return s


def write_csv(table: Table, path) -> None:
    """UTF-8 CSV with metadata comments, 17-significant-digit numbers."""
    lines = [f"# {k} = {v}" for k, v in table.metadata.items()]
    lines.append(",".join(table.columns))
    for row in table.rows:
        if len(row) != len(table.columns):
            raise DataError("row length does not match column count")
        lines.append(",".join(_format_cell(v) for v in row))
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"failed to write {path}: {exc}") from exc


def _parse_cell(text: str):
    if _INT_RE.match(text):
        return int(text)
    try:
        return float(text)
    except ValueError:
        return text


def read_csv(path) -> Table:
    """Inverse of :func:`write_csv`; numbers parse back bit-exactly."""
    metadata = {}
    columns = None
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.rstrip("\n")
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    k, v = (s.strip() for s in body.split("=", 1))
                    metadata[k] = v
                continue
            if not line.strip():
                continue
            if columns is None:
                columns = tuple(line.split(","))
                continue
            rows.append(tuple(_parse_cell(c) for c in line.split(",")))
    if columns is None:
        raise DataError(f"{path}: no header row found")
    return Table(metadata=metadata, columns=columns, rows=rows)


# ---------------------------------------------------------------------------
# run manifest

@dataclass(frozen=True)
class RunManifest:
    """Provenance of one CLI invocation, embedded into every output file."""

    subcommand: str
    config_path: str
    tier: str
    out_dir: str
    workers: int
    workers_source: str
    kernel: str
    version: str
    determinism: str
    resolved: dict

    @property
    def fingerprint(self) -> str:
        return fingerprint(self)


def _build_manifest(args, resolved_config) -> RunManifest:
    return RunManifest(
        subcommand=args.subcommand,
        config_path=getattr(args, "config", "") or "",
        tier=args.tier,
        out_dir=args.out,
        workers=args.workers,
        workers_source=args.workers_source,
        kernel=kernel.IMPLEMENTATION,
        version=ARTIFACT_VERSION,
        determinism="seedless; no RNG anywhere in the computation",
        resolved=to_plain(resolved_config),
    )


def _csv_metadata(manifest: RunManifest, **extra) -> dict:
    md = {
        "generator": "vlasovpairs",
        "version": manifest.version,
        "subcommand": manifest.subcommand,
        "tier": manifest.tier,
        "kernel": manifest.kernel,
        "manifest_fingerprint": manifest.fingerprint,
        "determinism": manifest.determinism,
    }
    md.update(extra)
    return md


def _write_manifest(manifest: RunManifest, out_dir) -> None:
    import json
    path = os.path.join(out_dir, "manifest.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({"fingerprint": manifest.fingerprint, **to_plain(manifest)},
                  fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# subcommands

def _cmd_spectrum(args) -> int:
    run = parse_config(args.config)
    config = _scale_durations(run.field_config, TIER_DURATION_SCALE[args.tier])
    grid = run.grid or observables.DEFAULT_SPECTRUM_GRID
    manifest = _build_manifest(args, {"field": config, "grid": grid,
                                      "settings": run.settings})
    spec = observables.momentum_spectrum(config, grid, run.settings,
                                         workers=args.workers)
    table = Table(
        metadata=_csv_metadata(manifest, spectrum_fingerprint=spec.fingerprint),
        columns=("p_parallel_m", "occupation"),
        rows=[(float(p), float(v)) for p, v in zip(grid.nodes, spec.values)],
    )
    write_csv(table, os.path.join(args.out, "spectrum.csv"))
    _write_manifest(manifest, args.out)
    for p, v in observables.find_peaks(spec)[:8]:
        print(f"peak  p_parallel = {p:+.4f} m   occupation = {v:.6e}")
    print(f"wrote {os.path.join(args.out, 'spectrum.csv')}")
    return EXIT_OK


def _cmd_density(args) -> int:
    run = parse_config(args.config)
    config = _scale_durations(run.field_config, TIER_DURATION_SCALE[args.tier])
    grid = run.grid or observables.DEFAULT_DENSITY_GRID
    manifest = _build_manifest(args, {"field": config, "grid": grid,
                                      "settings": run.settings})
    spec = observables.momentum_spectrum(config, grid, run.settings,
                                         workers=args.workers)
    density = observables.number_density(spec)
    table = Table(
        metadata=_csv_metadata(manifest, spectrum_fingerprint=spec.fingerprint),
        columns=("density", "p_min_m", "p_max_m", "n_points"),
        rows=[(density, grid.p_min, grid.p_max, grid.n_points)],
    )
    write_csv(table, os.path.join(args.out, "density.csv"))
    _write_manifest(manifest, args.out)
    print(f"number density = {density:.10e}")
    return EXIT_OK


def _cmd_scan(args) -> int:
    run = parse_config(args.config)
    if run.scan_kind is None:
        raise ConfigurationError("the scan subcommand needs a [scan] section")
    scale = run.scan_duration_scale
    if scale is None:
        scale = TIER_DURATION_SCALE[args.tier]
    grid = run.grid or observables.DEFAULT_DENSITY_GRID
    spec = scans.ScanSpec(kind=run.scan_kind, base=run.field_config,
                          values=run.scan_values, grid=grid,
                          settings=run.settings, duration_scale=scale)
    manifest = _build_manifest(args, {"scan": spec})
    result = scans.run_scan(spec, checkpoint=args.checkpoint, workers=args.workers)
    table = Table(
        metadata=_csv_metadata(manifest, scan_fingerprint=result.fingerprint,
                               **result.metadata),
        columns=("value", "density", "wall_time_s", "status"),
        rows=[(p.value, p.density, p.wall_time_s, p.status) for p in result.points],
    )
    write_csv(table, os.path.join(args.out, "scan.csv"))
    _write_manifest(manifest, args.out)
    n_failed = len(result.failed)
    print(f"scan complete: {len(result.points)} points, {n_failed} failed")
    return EXIT_PARTIAL if n_failed else EXIT_OK


def _cmd_oracle_check(args) -> int:
    manifest = _build_manifest(args, {"suite": "solver-equivalence"})
    rows = []
    worst = 0.0
    for label, kin, config, grid_step in solver.equivalence_suite():
        f_ode = solver.solve_mode(kin, config,
                                  solver.SolverSettings(rel_tol=1e-10, abs_tol=1e-16))
        f_direct = solver.solve_mode_direct(kin, config, grid_step)
        rel = abs(f_ode - f_direct) / max(abs(f_ode), 1e-30)
        worst = max(worst, rel)
        rows.append((label, kin.P3, f_ode, f_direct, rel))
        print(f"{label:26s} P3={kin.P3:+.2f}  ode={f_ode:.8e}  "
              f"direct={f_direct:.8e}  rel={rel:.2e}")
    table = Table(
        metadata=_csv_metadata(manifest),
        columns=("label", "P3_m", "f_ode", "f_direct", "rel_diff"),
        rows=rows,
    )
    write_csv(table, os.path.join(args.out, "oracle_check.csv"))
    _write_manifest(manifest, args.out)
    ok = worst < 1e-5
    print(f"worst relative difference: {worst:.3e} ({'OK' if ok else 'FAIL'})")
    return EXIT_OK if ok else EXIT_PARTIAL


def _combo_frequencies(config):
    if isinstance(config, fields.ModulatedFieldConfig):
        return config.omega_c, config.omega_m
    if isinstance(config, fields.PulseTrainConfig):
        return config.omega_c, config.omega_m
    raise ConfigurationError("resonances need a single-component field configuration")


def _cmd_resonances(args) -> int:
    run = parse_config(args.config)
    omega_c, omega_m = _combo_frequencies(run.field_config)
    m_star = args.m_star if args.m_star is not None else fields.effective_mass(
        _scale_durations(run.field_config, TIER_DURATION_SCALE[args.tier]))
    manifest = _build_manifest(args, {"field": run.field_config,
                                      "m_star": repr(m_star),
                                      "max_photons": args.max_photons})
    rows = []
    for total in range(1, args.max_photons + 1):
        for k_plus in range(total + 1):
            for k_minus in range(total - k_plus + 1):
                k_c = total - k_plus - k_minus
                combo = observables.ResonanceCombo(k_c=k_c, k_plus=k_plus,
                                                   k_minus=k_minus)
                omega_total = combo.total_energy(omega_c, omega_m)
                p = observables.resonance_momentum(combo, omega_c, omega_m, m_star)
                if p is None:
                    rows.append((k_c, k_plus, k_minus, omega_total, math.nan,
                                 "below-threshold"))
                else:
                    rows.append((k_c, k_plus, k_minus, omega_total, p, "ok"))
    table = Table(
        metadata=_csv_metadata(manifest, m_star=f"{m_star:.12g}"),
        columns=("k_c", "k_plus", "k_minus", "total_energy_m", "p_parallel_m",
                 "status"),
        rows=rows,
    )
    write_csv(table, os.path.join(args.out, "resonances.csv"))
    _write_manifest(manifest, args.out)
    print(f"m_star = {m_star:.6f} m; {len(rows)} photon combinations "
          f"written to resonances.csv")
    return EXIT_OK


def _cmd_effective_mass(args) -> int:
    run = parse_config(args.config)
    config = _scale_durations(run.field_config, TIER_DURATION_SCALE[args.tier])
    manifest = _build_manifest(args, {"field": config})
    m_star = fields.effective_mass(config)
    window = fields.field_model(config).averaging_window()
    table = Table(
        metadata=_csv_metadata(manifest),
        columns=("m_star_m", "window_start_tau0", "window_end_tau0"),
        rows=[(m_star, window[0], window[1])],
    )
    write_csv(table, os.path.join(args.out, "effective_mass.csv"))
    _write_manifest(manifest, args.out)
    print(f"effective mass m* = {m_star:.8f} m "
          f"(averaged over [{window[0]:.4g}, {window[1]:.4g}] tau0)")
    return EXIT_OK


_COMMANDS = {
    "spectrum": _cmd_spectrum,
    "density": _cmd_density,
    "scan": _cmd_scan,
    "oracle-check": _cmd_oracle_check,
    "resonances": _cmd_resonances,
    "effective-mass": _cmd_effective_mass,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vlasovpairs",
        description="Vacuum pair production in time-dependent electric fields",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p, needs_config=True):
        if needs_config:
            p.add_argument("--config", required=True, help="configuration file")
        p.add_argument("--tier", choices=("quick", "full"), default="quick",
                       help="duration tier: quick scales flat tops by 0.1")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--workers", type=int, default=None,
                       help=f"worker processes (default: ${WORKERS_ENV} or 1)")

    common(sub.add_parser("spectrum", help="momentum spectrum CSV"))
    common(sub.add_parser("density", help="reduced number density"))
    scan_p = sub.add_parser("scan", help="parameter sweep CSV")
    common(scan_p)
    scan_p.add_argument("--checkpoint", default=None,
                        help="checkpoint file for resumable scans")
    common(sub.add_parser("oracle-check",
                          help="ODE vs direct-history solver equivalence"),
           needs_config=False)
    res_p = sub.add_parser("resonances", help="multiphoton resonance table")
    common(res_p)
    res_p.add_argument("--m-star", type=float, default=None, dest="m_star",
                       help="override the computed effective mass")
    res_p.add_argument("--max-photons", type=int, default=5, dest="max_photons")
    common(sub.add_parser("effective-mass", help="field-dressed electron mass"))
    return parser


def run_cli(argv) -> int:
    """Entry point; returns the process exit status."""
    args = _build_parser().parse_args(argv)
    if args.workers is None:
        env = os.environ.get(WORKERS_ENV)
        args.workers = int(env) if env else 1
        args.workers_source = "env" if env else "default"
    else:
        args.workers_source = "flag"
    if args.workers < 1:
        print("error: --workers must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    os.makedirs(args.out, exist_ok=True)
    try:
        return _COMMANDS[args.subcommand](args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (CheckpointError, DataError, IntegrationError, NumericalError,
            ResourceError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARTIAL


def main() -> None:
    sys.exit(run_cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
