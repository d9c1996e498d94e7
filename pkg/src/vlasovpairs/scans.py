"""Parameter sweeps: resumable, parallel batch jobs over field parameters.

A scan varies one parameter of a base field configuration (modulation
frequency, modulation degree, carrier frequency, or pulse count), computes
the momentum spectrum and reduced number density at every value, and can
persist completed points to a checkpoint file so interrupted runs resume
without recomputation.
"""

from __future__ import annotations

import dataclasses
import math
import os
import time
from concurrent.futures import FIRST_COMPLETED, ProcessPoolExecutor, wait
from dataclasses import dataclass, field

from .exceptions import CheckpointError, ConfigurationError, DataError, IntegrationError
from .fields import FieldConfig, ModulatedFieldConfig, PulseTrainConfig
from .observables import MomentumGrid, momentum_spectrum, number_density
from .provenance import ARTIFACT_VERSION, fingerprint
from .solver import SolverSettings

SCAN_KINDS = ("modulation-frequency", "modulation-degree",
              "carrier-frequency", "pulse-count")

STATUS_OK = "ok"
STATUS_FAILED = "failed"
STATUS_UNDEFINED = "undefined"


@dataclass(frozen=True)
class ScanSpec:
    """One sweep: which knob to turn, over which values, on which base field.

    duration_scale multiplies the flat-top duration of modulated base
    configurations; 1.0 reproduces the full configured duration, smaller
    values give cheap reduced-duration tiers.
    """

    kind: str
    base: FieldConfig
    values: tuple
    grid: MomentumGrid
    settings: SolverSettings = SolverSettings()
    duration_scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if self.kind not in SCAN_KINDS:
            raise ConfigurationError(f"unknown scan kind {self.kind!r}")
        if not self.values:
            raise ConfigurationError("scan needs at least one parameter value")
        if any(b <= a for a, b in zip(self.values, self.values[1:])):
            raise ConfigurationError("scan values must be strictly increasing")
        if not 0.0 < self.duration_scale <= 1.0:
            raise ConfigurationError("duration_scale must lie in (0, 1]")
        if self.kind == "pulse-count":
            if not isinstance(self.base, PulseTrainConfig):
                raise ConfigurationError("pulse-count scans need a pulse-train base")
            if any(v != int(v) or v < 1 for v in self.values):
                raise ConfigurationError("pulse counts must be integers >= 1")
        # derive every point eagerly so bad values fail before any compute
        for v in self.values:
            config_for(self, v)


def _scaled_base(spec: ScanSpec) -> FieldConfig:
    base = spec.base
    if isinstance(base, ModulatedFieldConfig) and spec.duration_scale != 1.0:
        return dataclasses.replace(base, t_d=base.t_d * spec.duration_scale)
    return base


def config_for(spec: ScanSpec, value: float) -> FieldConfig:
    """Field configuration of the scan point at the given parameter value."""
    base = _scaled_base(spec)
    if spec.kind == "modulation-frequency":
        if not isinstance(base, ModulatedFieldConfig):
            raise ConfigurationError("modulation-frequency scans need a modulated base")
        return dataclasses.replace(base, omega_m=value)
    if spec.kind == "modulation-degree":
        if not isinstance(base, ModulatedFieldConfig):
            raise ConfigurationError("modulation-degree scans need a modulated base")
        return dataclasses.replace(base, M=value)
    if spec.kind == "carrier-frequency":
        if isinstance(base, (ModulatedFieldConfig, PulseTrainConfig)):
            return dataclasses.replace(base, omega_c=value)
        raise ConfigurationError("carrier-frequency scans need a single-component base")
    if spec.kind == "pulse-count":
        return dataclasses.replace(base, N=int(value))
    raise ConfigurationError(f"unknown scan kind {spec.kind!r}")


@dataclass(frozen=True)
class ScanPoint:
    value: float
    density: float
    wall_time_s: float
    status: str


@dataclass(frozen=True)
class ScanResult:
    """Ordered (parameter value, density) pairs plus provenance metadata."""

    points: tuple
    fingerprint: str
    metadata: dict = field(default_factory=dict)

    @property
    def values(self):
        return tuple(p.value for p in self.points)

    @property
    def densities(self):
        return tuple(p.density for p in self.points)

    @property
    def failed(self):
        return tuple(p.value for p in self.points if p.status == STATUS_FAILED)


def scan_fingerprint(spec: ScanSpec) -> str:
    return fingerprint(spec)


def _compute_point(args):
    spec, value = args
    start = time.perf_counter()
    try:
        config = config_for(spec, value)
        density = number_density(momentum_spectrum(config, spec.grid, spec.settings))
        status = STATUS_OK
    except IntegrationError:
        density = math.nan
        status = STATUS_FAILED
    return value, density, time.perf_counter() - start, status


# ---------------------------------------------------------------------------
# checkpoint file: '#'-prefixed header, one CSV row per completed point

_CHECKPOINT_COLUMNS = "value,density,wall_time_s,status"


def _read_checkpoint(path, expected_fingerprint):
    done = {}
    if not os.path.exists(path) or os.path.getsize(path) == 0:
        return done
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    fp = None
    for line in lines:
        if line.startswith("# fingerprint"):
            fp = line.split("=", 1)[1].strip()
            break
    if fp != expected_fingerprint:
        raise CheckpointError(
            f"checkpoint {path} belongs to a different scan "
            f"(fingerprint {fp} != {expected_fingerprint})"
        )
    for line in lines:
        if line.startswith("#") or line == _CHECKPOINT_COLUMNS or not line.strip():
            continue
        value_s, density_s, wall_s, status = line.split(",")
        done[float(value_s)] = ScanPoint(float(value_s), float(density_s),
                                         float(wall_s), status)
    return done


def _open_checkpoint(path, fp):
    new = not (os.path.exists(path) and os.path.getsize(path) > 0)
    fh = open(path, "a", encoding="utf-8")
    if new:
        fh.write("# vlasovpairs scan checkpoint\n")
        fh.write(f"# fingerprint = {fp}\n")
        fh.write(f"# version = {ARTIFACT_VERSION}\n")
        fh.write(_CHECKPOINT_COLUMNS + "\n")
        fh.flush()
    return fh


def _append_checkpoint(fh, point: ScanPoint):
    fh.write(f"{point.value:.17g},{point.density:.17g},"
             f"{point.wall_time_s:.6g},{point.status}\n")
    fh.flush()
    os.fsync(fh.fileno())


def run_scan(spec: ScanSpec, checkpoint: str | None = None,
             workers: int = 1) -> ScanResult:
    """Run (or resume) a scan; returns points ordered by parameter value.

    Completed points are appended to the checkpoint as they finish; a rerun
    with the same spec resumes from it, and a checkpoint written for any
    other spec is refused.  Integration failures mark the point 'failed'
    and the scan continues.
    """
    fp = scan_fingerprint(spec)
    done = _read_checkpoint(checkpoint, fp) if checkpoint else {}
    pending = [v for v in spec.values if v not in done]

    fh = _open_checkpoint(checkpoint, fp) if checkpoint else None
    try:
        if pending:
            jobs = [(spec, v) for v in pending]
            if workers <= 1:
                for job in jobs:
                    point = ScanPoint(*_compute_point(job))
                    done[point.value] = point
                    if fh:
                        _append_checkpoint(fh, point)
            else:
                with ProcessPoolExecutor(max_workers=workers) as pool:
                    futures = {pool.submit(_compute_point, job) for job in jobs}
                    while futures:
                        finished, futures = wait(futures, return_when=FIRST_COMPLETED)
                        for fut in finished:
                            point = ScanPoint(*fut.result())
                            done[point.value] = point
                            if fh:
                                _append_checkpoint(fh, point)
    finally:
        if fh:
            fh.close()

    points = tuple(done[v] for v in spec.values)
    metadata = {
        "kind": spec.kind,
        "duration_scale": repr(spec.duration_scale),
        "version": ARTIFACT_VERSION,
        "n_points": str(len(points)),
        "n_failed": str(sum(1 for p in points if p.status == STATUS_FAILED)),
    }
    return ScanResult(points=points, fingerprint=fp, metadata=metadata)


def enhancement_curve(modulated: ScanResult, baseline: ScanResult) -> ScanResult:
    """Pointwise density ratio modulated/baseline on a shared parameter axis.

    Zero-density baseline points are flagged 'undefined' instead of
    producing infinities.
    """
    if modulated.values != baseline.values:
        raise DataError("enhancement curve needs identical parameter axes")
    points = []
    for num, den in zip(modulated.points, baseline.points):
        if STATUS_FAILED in (num.status, den.status):
            points.append(ScanPoint(num.value, math.nan, 0.0, STATUS_FAILED))
        elif den.density == 0.0:
            points.append(ScanPoint(num.value, math.nan, 0.0, STATUS_UNDEFINED))
        else:
            points.append(ScanPoint(num.value, num.density / den.density, 0.0,
                                    STATUS_OK))
    metadata = {
        "kind": "enhancement",
        "numerator": modulated.fingerprint,
        "denominator": baseline.fingerprint,
        "version": ARTIFACT_VERSION,
    }
    return ScanResult(points=tuple(points),
                      fingerprint=fingerprint(modulated.fingerprint,
                                              baseline.fingerprint),
                      metadata=metadata)
