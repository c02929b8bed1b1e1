"""Scenario configuration: one JSON format shared by the CLI and the runner.

A config names a scenario kind, its parameters (matrices in the shared
[re, im] encoding), solver thresholds, the requested report tasks, and a
seed. Parsing validates everything eagerly — every referenced matrix must
satisfy its type invariants on load — and diagnostics name the first
offending field and the constraint it violates.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .channels import QuantumChannel
from .linalg import validate_density
from .observables import DiscreteObservable, sharp_observable
from .preservation import SolverOptions
from .scenarios import PLUS_STATE, SIGMA_Z, CanonicalModelSpec
from .serialize import channel_from_dict, matrix_from_pairs, observable_from_dict

KINDS = ("canonical_decoherence", "cloning_sic", "measurement_copy", "custom_channel")

TASKS_BY_KIND = {
    "canonical_decoherence": ("redundancy", "decoherence_factor", "joint_pointer", "correlations"),
    "cloning_sic": ("containment", "preservation", "coarse_graining"),
    "measurement_copy": ("redundancy", "correlations", "marginals"),
    "custom_channel": ("preservation",),
}


class ScenarioError(ValueError):
    """Configuration rejected; the message names the offending field."""


@dataclass(frozen=True)
class ScenarioConfig:
    """A validated scenario: kind, built parameter objects, solver, tasks."""

    name: str
    kind: str
    seed: int
    solver: SolverOptions
    outputs: tuple[str, ...]
    parameters: dict
    raw: dict = field(repr=False)

    def echo(self) -> dict:
        """The config as loaded (defaults not materialized), for reports."""
        return json.loads(json.dumps(self.raw))


def _field(data: dict, path: str, key: str, default=None, required: bool = False):
    if key in data:
        return data[key]
    if required:
        raise ScenarioError(f"{path}.{key}: required field is missing")
    return default


def _as_int(value, path: str, minimum: int | None = None) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        raise ScenarioError(f"{path}: expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ScenarioError(f"{path}: must be at least {minimum}, got {value}")
    return int(value)


def _as_float_list(value, path: str) -> list[float]:
    if not isinstance(value, list) or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
        raise ScenarioError(f"{path}: expected an array of numbers")
    return [float(v) for v in value]


def _solver_options(data: Any, path: str) -> SolverOptions:
    if data is None:
        return SolverOptions()
    if not isinstance(data, dict):
        raise ScenarioError(f"{path}: expected an object")
    allowed = {"eps_feas", "eps_infeas", "max_iter", "seed", "stall_window", "stall_rtol", "record_trace"}
    unknown = set(data) - allowed
    if unknown:
        raise ScenarioError(f"{path}.{sorted(unknown)[0]}: unknown solver option")
    try:
        return SolverOptions(**data)
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"{path}: {exc}") from exc


def _observable(data: Any, path: str, default: DiscreteObservable | None = None) -> DiscreteObservable:
    if data is None:
        if default is None:
            raise ScenarioError(f"{path}: required field is missing")
        return default
    try:
        return observable_from_dict(data, where=path)
    except ValueError as exc:
        raise ScenarioError(str(exc)) from exc


def _density(data: Any, path: str, default: np.ndarray) -> np.ndarray:
    if data is None:
        return default
    try:
        return validate_density(matrix_from_pairs(data, where=path))
    except ValueError as exc:
        raise ScenarioError(f"{path}: {exc}") from exc


def _canonical_parameters(params: dict, path: str) -> dict:
    generator = params.get("system_generator")
    if generator is not None:
        try:
            generator = matrix_from_pairs(generator, where=f"{path}.system_generator")
        except ValueError as exc:
            raise ScenarioError(str(exc)) from exc
    else:
        generator = np.array(SIGMA_Z)

    n = _as_int(_field(params, path, "env_qubit_count", default=4), f"{path}.env_qubit_count", minimum=1)
    couplings = params.get("couplings")
    couplings = tuple(_as_float_list(couplings, f"{path}.couplings")) if couplings is not None else (1.0,) * n
    env_initial = _density(params.get("env_initial"), f"{path}.env_initial", np.array(PLUS_STATE))

    times = params.get("times")
    time_grid = params.get("time_grid")
    if times is not None:
        times = _as_float_list(times, f"{path}.times")
    if time_grid is not None:
        if not isinstance(time_grid, dict):
            raise ScenarioError(f"{path}.time_grid: expected an object with start/stop/count")
        start = float(_field(time_grid, f"{path}.time_grid", "start", required=True))
        stop = float(_field(time_grid, f"{path}.time_grid", "stop", required=True))
        count = _as_int(_field(time_grid, f"{path}.time_grid", "count", required=True),
                        f"{path}.time_grid.count", minimum=2)
        time_grid = {"start": start, "stop": stop, "count": count}
    if times is None and time_grid is None:
        times = [0.0, math.pi / 4]

    try:
        base_spec = CanonicalModelSpec(
            system_generator=generator, couplings=couplings,
            env_qubit_count=n, env_initial=env_initial, time=0.0,
        )
    except ValueError as exc:
        raise ScenarioError(f"{path}: {exc}") from exc

    default_obs = sharp_observable(np.array(SIGMA_Z)) if generator.shape == (2, 2) else sharp_observable(generator)
    observable = _observable(params.get("observable"), f"{path}.observable", default=default_obs)
    if observable.dim != generator.shape[0]:
        raise ScenarioError(
            f"{path}.observable: dim {observable.dim} does not match the system dim {generator.shape[0]}"
        )

    input_state = _density(params.get("input_state"), f"{path}.input_state",
                           np.eye(generator.shape[0], dtype=complex) / generator.shape[0])
    pair = params.get("fragment_pair", [1, 2])
    if (not isinstance(pair, list) or len(pair) != 2
            or not all(isinstance(i, int) and 0 <= i <= n for i in pair) or pair[0] == pair[1]):
        raise ScenarioError(f"{path}.fragment_pair: expected two distinct fragment indices in [0, {n}]")

    return {
        "base_spec": base_spec,
        "times": times,
        "time_grid": time_grid,
        "observable": observable,
        "input_state": input_state,
        "fragment_pair": tuple(pair),
    }


def _cloning_parameters(params: dict, path: str) -> dict:
    orientation = params.get("orientation", [0.0, 0.0, 1.0])
    orientation = _as_float_list(orientation, f"{path}.orientation")
    if len(orientation) != 3 or not any(abs(v) > 1e-12 for v in orientation):
        raise ScenarioError(f"{path}.orientation: expected a nonzero 3-vector")
    return {
        "orientation": tuple(orientation),
        "sample_count": _as_int(_field(params, path, "sample_count", default=1000),
                                f"{path}.sample_count", minimum=1),
        "instance_count": _as_int(_field(params, path, "instance_count", default=100),
                                  f"{path}.instance_count", minimum=1),
    }


def _copy_parameters(params: dict, path: str) -> dict:
    observable = _observable(params.get("observable"), f"{path}.observable",
                             default=sharp_observable(np.array(SIGMA_Z)))
    fragments = _as_int(_field(params, path, "fragments", default=2), f"{path}.fragments", minimum=1)
    if observable.num_outcomes ** fragments > 10 ** 6:
        raise ScenarioError(f"{path}.fragments: output dimension "
                            f"{observable.num_outcomes ** fragments} exceeds cap 10^6")
    input_state = _density(params.get("input_state"), f"{path}.input_state",
                           np.eye(observable.dim, dtype=complex) / observable.dim)
    return {"observable": observable, "fragments": fragments, "input_state": input_state}


def _custom_parameters(params: dict, path: str) -> dict:
    channel_data = _field(params, path, "channel", required=True)
    try:
        n: QuantumChannel = channel_from_dict(channel_data, where=f"{path}.channel")
    except ValueError as exc:
        raise ScenarioError(str(exc)) from exc
    observables_data = _field(params, path, "observables", required=True)
    if not isinstance(observables_data, list) or not observables_data:
        raise ScenarioError(f"{path}.observables: expected a nonempty array")
    observables = []
    for k, item in enumerate(observables_data):
        obs = _observable(item, f"{path}.observables[{k}]")
        if obs.dim != n.dim_in:
            raise ScenarioError(
                f"{path}.observables[{k}]: dim {obs.dim} does not match channel dim_in {n.dim_in}"
            )
        observables.append(obs)
    return {"channel": n, "observables": tuple(observables)}


_PARAMETER_BUILDERS = {
    "canonical_decoherence": _canonical_parameters,
    "cloning_sic": _cloning_parameters,
    "measurement_copy": _copy_parameters,
    "custom_channel": _custom_parameters,
}


def load_config(data: dict, name_fallback: str = "scenario") -> ScenarioConfig:
    """Validate an already-parsed config mapping into a ScenarioConfig."""
    if not isinstance(data, dict):
        raise ScenarioError("config: top level must be an object")
    kind = _field(data, "config", "kind", required=True)
    if kind not in KINDS:
        raise ScenarioError(f"config.kind: unknown kind {kind!r}; expected one of {', '.join(KINDS)}")
    name = str(data.get("name", name_fallback))
    seed = _as_int(data.get("seed", 0), "config.seed")
    solver = _solver_options(data.get("solver"), "config.solver")

    outputs = data.get("outputs", [])
    if not isinstance(outputs, list) or not all(isinstance(t, str) for t in outputs):
        raise ScenarioError("config.outputs: expected an array of task names")
    for task in outputs:
        if task not in TASKS_BY_KIND[kind]:
            raise ScenarioError(
                f"config.outputs: task {task!r} not available for kind {kind!r} "
                f"(choose from {', '.join(TASKS_BY_KIND[kind])})"
            )

    raw_params = data.get("parameters", {})
    if not isinstance(raw_params, dict):
        raise ScenarioError("config.parameters: expected an object")
    parameters = _PARAMETER_BUILDERS[kind](raw_params, "config.parameters")

    return ScenarioConfig(
        name=name, kind=kind, seed=seed, solver=solver,
        outputs=tuple(outputs), parameters=parameters, raw=data,
    )


def parse_scenario(path: str | Path) -> ScenarioConfig:
    """Load and validate a scenario config file.

    Syntax errors carry the line/column; invariant violations carry the field
    path and the constraint violated.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}:{exc.lineno}:{exc.colno}: syntax error: {exc.msg}") from exc
    return load_config(data, name_fallback=path.stem)
