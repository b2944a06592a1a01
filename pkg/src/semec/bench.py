"""Scenario files, experiment sweeps, and CSV emission.

A scenario is one JSON document with three sections: ``system`` (shared
parameters), ``devices`` (an explicit list or a uniform template plus
count), and ``channel`` (explicit gains, or distances from which gains are
derived, optionally with a fading seed). Omitted fields fall back to the
reference simulation defaults baked into the dataclass definitions.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .baselines import solve_local_only, solve_no_semantic
from .model import (
    DelayBreakdown,
    SystemConfig,
    TerminalDevice,
    delay_breakdown,
    generate_channel_gains,
)
from .oracle import perturbation_certify
from .solver import FeasibilityError, SolverReport, solve

__all__ = [
    "Scenario",
    "ScenarioError",
    "SweepSpec",
    "SweepResult",
    "ALGORITHMS",
    "SWEEPABLE_PARAMS",
    "reference_scenario",
    "load_scenario",
    "scenario_from_dict",
    "scenario_to_dict",
    "dump_scenario",
    "run_sweep",
    "emit_csv",
]

ALGORITHMS = ("semantic", "no-semantic", "local")

_DEVICE_PARAMS = ("energy_budget", "task_bits", "beta_min")
_SYSTEM_PARAMS = ("sem_a", "sem_k", "sem_p", "f_mec_total")
SWEEPABLE_PARAMS = _DEVICE_PARAMS + _SYSTEM_PARAMS

_DEVICE_FIELDS = ("task_bits", "intensity", "energy_coeff", "f_local_max",
                  "p_tx_max", "beta_min", "energy_budget")
_SYSTEM_FIELDS = tuple(f.name for f in fields(SystemConfig))

_REFERENCE_DEVICE = {
    "task_bits": 3e6,
    "intensity": 70.0,
    "energy_coeff": 1e-26,
    "f_local_max": 1e9,
    "p_tx_max": 1.0,
    "beta_min": 0.6,
    "energy_budget": 0.5,
}


class ScenarioError(ValueError):
    """Scenario file failed to parse or violated an invariant."""


@dataclass(frozen=True)
class Scenario:
    """A fully resolved experiment setup."""

    system: SystemConfig
    devices: Tuple[TerminalDevice, ...]
    channel: Dict[str, object]
    label: str = ""


@dataclass(frozen=True)
class SweepSpec:
    """One swept parameter and the values it takes."""

    param: str
    values: Tuple[float, ...]

    def __post_init__(self) -> None:
        if self.param not in SWEEPABLE_PARAMS:
            raise ScenarioError(
                f"unknown sweep parameter {self.param!r}; choose from {SWEEPABLE_PARAMS}")
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))


@dataclass(frozen=True)
class SweepResult:
    """One sweep cell: parameter value, algorithm, and solved metrics."""

    swept_param: str
    value: float
    algorithm: str
    max_delay_s: float
    mean_delay_s: float
    per_device_breakdown: List[DelayBreakdown]
    per_device_beta: List[float]
    iterations: int
    error: str = ""


def reference_scenario(n_devices: int = 10, label: str = "reference-baseline") -> Scenario:
    """The reference setup: uniform devices, distances evenly in [120, 255] m."""
    return scenario_from_dict({
        "label": label,
        "system": {"n_devices": n_devices},
        "devices": {"uniform": dict(_REFERENCE_DEVICE), "count": n_devices},
        "channel": {"distances_m": {"linspace": [120.0, 255.0]}},
    })


def _check_keys(section: dict, allowed: Sequence[str], where: str) -> None:
    unknown = set(section) - set(allowed)
    if unknown:
        raise ScenarioError(f"unknown field(s) {sorted(unknown)} in {where}")


def _device_from_dict(entry: dict, gain: float, distance: Optional[float],
                      index: int) -> TerminalDevice:
    allowed = _DEVICE_FIELDS + ("sem_a", "sem_k", "sem_p")
    _check_keys(entry, allowed, f"devices[{index}]")
    merged = dict(_REFERENCE_DEVICE)
    merged.update(entry)
    try:
        return TerminalDevice(channel_gain=gain, distance=distance, **merged)
    except ValueError as exc:
        raise ScenarioError(f"devices[{index}]: {exc}") from exc


def scenario_from_dict(doc: dict) -> Scenario:
    _check_keys(doc, ("label", "system", "devices", "channel"), "scenario")
    label = str(doc.get("label", ""))

    system_doc = dict(doc.get("system", {}))
    _check_keys(system_doc, _SYSTEM_FIELDS, "system")

    devices_doc = doc.get("devices")
    if isinstance(devices_doc, dict):
        _check_keys(devices_doc, ("uniform", "count"), "devices")
        if "uniform" not in devices_doc:
            raise ScenarioError("devices mapping needs a 'uniform' template")
        count = devices_doc.get("count", system_doc.get("n_devices"))
        if count is None:
            raise ScenarioError("devices.count or system.n_devices is required")
        entries = [dict(devices_doc["uniform"]) for _ in range(int(count))]
    elif isinstance(devices_doc, list):
        entries = [dict(e) for e in devices_doc]
    else:
        raise ScenarioError("devices must be a list or a uniform template mapping")

    n = len(entries)
    system_doc.setdefault("n_devices", n)
    try:
        system = SystemConfig(**system_doc)
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"system: {exc}") from exc
    if system.n_devices != n:
        raise ScenarioError(
            f"system.n_devices={system.n_devices} but {n} device entries were given")

    channel = doc.get("channel")
    if not isinstance(channel, dict):
        raise ScenarioError("channel section is required")
    _check_keys(channel, ("gains", "distances_m", "fading_seed"), "channel")
    has_gains = "gains" in channel
    has_dist = "distances_m" in channel
    if has_gains == has_dist:
        raise ScenarioError("channel must give exactly one of 'gains' or 'distances_m'")

    distances: Optional[np.ndarray] = None
    if has_gains:
        if "fading_seed" in channel:
            raise ScenarioError("fading_seed applies only to distance-based channels")
        gains = np.asarray(channel["gains"], dtype=float)
        if gains.shape != (n,):
            raise ScenarioError(f"channel.gains must list {n} values")
        if np.any(gains <= 0):
            raise ScenarioError("channel gains must be positive")
    else:
        spec = channel["distances_m"]
        if isinstance(spec, dict):
            _check_keys(spec, ("linspace",), "channel.distances_m")
            lo, hi = (float(x) for x in spec["linspace"])
            distances = np.linspace(lo, hi, n)
        else:
            distances = np.asarray(spec, dtype=float)
            if distances.shape != (n,):
                raise ScenarioError(f"channel.distances_m must list {n} values")
        if np.any(distances <= 0):
            raise ScenarioError("distances must be positive")
        gains = generate_channel_gains(distances, channel.get("fading_seed"))

    devices = tuple(
        _device_from_dict(entry, float(gains[i]),
                          None if distances is None else float(distances[i]), i)
        for i, entry in enumerate(entries)
    )
    channel_record = {k: (list(map(float, v)) if isinstance(v, (list, tuple)) else v)
                      for k, v in channel.items()}
    return Scenario(system=system, devices=devices, channel=channel_record, label=label)


def scenario_to_dict(scenario: Scenario) -> dict:
    """Canonical plain-dict form; loading it back reproduces the scenario."""
    system = {name: getattr(scenario.system, name) for name in _SYSTEM_FIELDS}
    devices = []
    for td in scenario.devices:
        entry = {name: getattr(td, name) for name in _DEVICE_FIELDS}
        for name in ("sem_a", "sem_k", "sem_p"):
            value = getattr(td, name)
            if value is not None:
                entry[name] = value
        devices.append(entry)
    return {
        "label": scenario.label,
        "system": system,
        "devices": devices,
        "channel": dict(scenario.channel),
    }


def load_scenario(path: Union[str, Path]) -> Scenario:
    """Parse and validate a scenario file."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(
            f"{path}: parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(doc, dict):
        raise ScenarioError(f"{path}: scenario document must be a JSON object")
    return scenario_from_dict(doc)


def dump_scenario(scenario: Scenario, path: Union[str, Path]) -> None:
    """Write the canonical scenario dump (stable key order, full precision)."""
    doc = scenario_to_dict(scenario)
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n",
                          encoding="utf-8")


def _override(scenario: Scenario, param: str, value: float) -> Scenario:
    if param in _DEVICE_PARAMS:
        devices = tuple(replace(td, **{param: value}) for td in scenario.devices)
        return replace(scenario, devices=devices)
    return replace(scenario, system=replace(scenario.system, **{param: value}))


def _run_algorithm(scenario: Scenario, algorithm: str) -> SolverReport:
    if algorithm == "semantic":
        return solve(scenario.devices, scenario.system)
    if algorithm == "no-semantic":
        return solve_no_semantic(scenario.devices, scenario.system)
    if algorithm == "local":
        return solve_local_only(scenario.devices, scenario.system)
    raise ValueError(f"unknown algorithm {algorithm!r}; choose from {ALGORITHMS}")


def _breakdowns(scenario: Scenario, algorithm: str,
                report: SolverReport) -> List[DelayBreakdown]:
    out: List[DelayBreakdown] = []
    for i, td in enumerate(scenario.devices):
        row = report.allocation.device(i)
        if algorithm == "local":
            total = td.task_bits * td.intensity / row.f_local if td.task_bits else 0.0
            out.append(DelayBreakdown(total, 0.0, 0.0, total))
        elif algorithm == "no-semantic":
            if td.task_bits == 0:
                out.append(DelayBreakdown(0.0, 0.0, 0.0, 0.0))
                continue
            t_remote = td.task_bits * td.intensity / row.f_remote
            out.append(DelayBreakdown(0.0, row.t_transmit, t_remote,
                                      row.t_transmit + t_remote))
        else:
            if td.task_bits == 0:
                out.append(DelayBreakdown(0.0, 0.0, 0.0, 0.0))
                continue
            out.append(delay_breakdown(td, row, scenario.system))
    return out


def run_sweep(scenario: Scenario, sweep: SweepSpec, algorithms: Sequence[str],
              seed: int = 0, verify: bool = False) -> List[SweepResult]:
    """Solve every (value, algorithm) cell; failures are recorded, not raised.

    Cells are deterministic given (scenario, sweep, seed); the seed is
    reserved for fading-based channel synthesis, which is resolved at
    scenario load time, so re-running a sweep always reproduces its CSV.
    ``verify`` runs the perturbation certificate on each semantic solve.
    """
    for algorithm in algorithms:
        if algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {algorithm!r}; choose from {ALGORITHMS}")
    del seed  # gains are already resolved; kept for reproducibility plumbing
    results: List[SweepResult] = []
    for value in sweep.values:
        cell_scenario = _override(scenario, sweep.param, value)
        for algorithm in algorithms:
            try:
                report = _run_algorithm(cell_scenario, algorithm)
            except FeasibilityError as exc:
                results.append(SweepResult(sweep.param, value, algorithm,
                                           float("nan"), float("nan"), [], [], 0,
                                           error=str(exc)))
                continue
            if verify and algorithm == "semantic":
                certified = perturbation_certify(report.allocation, cell_scenario.devices,
                                                 cell_scenario.system, n_probes=200,
                                                 step=1e-3)
                if not certified:
                    results.append(SweepResult(sweep.param, value, algorithm,
                                               float("nan"), float("nan"), [], [], 0,
                                               error="optimality certification failed"))
                    continue
            breakdowns = _breakdowns(cell_scenario, algorithm, report)
            totals = [bd.total for bd in breakdowns]
            results.append(SweepResult(
                swept_param=sweep.param,
                value=value,
                algorithm=algorithm,
                max_delay_s=max(totals) if totals else 0.0,
                mean_delay_s=float(np.mean(totals)) if totals else 0.0,
                per_device_breakdown=breakdowns,
                per_device_beta=[float(b) for b in report.allocation.beta],
                iterations=report.iterations,
            ))
    return results


def emit_csv(results: Sequence[SweepResult], path: Union[str, Path]) -> None:
    """Write one header row plus one row per result, byte-deterministic."""
    header = ["swept_param", "value", "algorithm", "max_delay_s", "mean_delay_s",
              "per_device_breakdown", "per_device_beta", "iterations", "error"]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for r in results:
            breakdown = json.dumps(
                [[bd.t_local, bd.t_transmit, bd.t_remote, bd.total]
                 for bd in r.per_device_breakdown],
                separators=(",", ":"))
            betas = json.dumps(list(r.per_device_beta), separators=(",", ":"))
            writer.writerow([r.swept_param, repr(float(r.value)), r.algorithm,
                             repr(float(r.max_delay_s)), repr(float(r.mean_delay_s)),
                             breakdown, betas, r.iterations, r.error])
