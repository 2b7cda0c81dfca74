"""Scenario documents: nested mappings that describe a :class:`Scenario`.

A scenario document is what ``print-preset`` emits and ``--scenario``
reads (YAML).  Layout::

    n_taps: 16
    runs: 200
    seed: 0
    algorithms: [lms, lp, lpgc, lpngc]
    ngc_lag: false                # lag the smoothed comparator one step
    params:
      mu: 0.05
      epsilon: 0.05
      p: 0.5
      window: 5                   # comparator window length S
      rho: {stage1: 0.0008, stage2: 0.0003, stage3: 0.0001}
      rho_by_algorithm: {}        # e.g. {lpgc: 0.0003}; overrides rho per algorithm
    input: {kind: white, variance: 1.0}
    #  or {kind: ar1, variance: 1.0, ar_coefficient: 0.8,
    #      innovation_variance: 0.01, burn_in: 1000}
    noise: {variance: 0.01}
    stages:
      stage1: {iterations: 500, nonzero: 1}
      stage2: {iterations: 500, system: ecg}          # bundled ECG-like system
      stage3: {iterations: 500, system_file: ir.txt}  # 256 reals

Every value can be overridden from the command line with a dotted key,
e.g. ``params.rho.stage2=0.0001`` or ``stages.stage1.iterations=800``.
"""
from __future__ import annotations

import copy
import math
import re
from typing import Any

import yaml

from .filters import Algorithm, LpParams
from .harness import Scenario
from .signals import (
    InputModel,
    NoiseModel,
    SparseSystemSpec,
    StageSchedule,
    load_ecg_ir,
)

__all__ = ["ConfigError", "scenario_from_dict", "apply_overrides", "parse_override", "load_document", "dump_document"]


class ConfigError(ValueError):
    """Invalid scenario document or override; the message names the key."""


_TOP_KEYS = {"n_taps", "runs", "seed", "algorithms", "ngc_lag", "params", "input", "noise", "stages"}
_PARAM_KEYS = {"mu", "epsilon", "p", "window", "rho", "rho_by_algorithm"}
_INPUT_KEYS = {"kind", "variance", "ar_coefficient", "innovation_variance", "burn_in"}
_NOISE_KEYS = {"variance"}
_STAGE_KEYS = {"iterations", "nonzero", "system", "system_file"}
_STAGE_NAME = re.compile(r"stage([1-9][0-9]*)$")


def _check_keys(mapping, allowed, where):
    if not isinstance(mapping, dict):
        raise ConfigError(f"{where or 'document'}: expected a mapping, got {type(mapping).__name__}")
    for key in mapping:
        if key not in allowed:
            path = f"{where}.{key}" if where else str(key)
            raise ConfigError(f"unknown key '{path}'")


def _require(mapping, key, where):
    if key not in mapping:
        raise ConfigError(f"missing key '{where}.{key}'" if where else f"missing key '{key}'")
    return mapping[key]


def _number(value, path, *, integer=False, minimum=None, exclusive=False):
    if isinstance(value, str):
        # YAML 1.1 reads exponents without a dot, e.g. 1e-4, as strings
        try:
            value = float(value)
        except ValueError:
            pass
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"'{path}' must be a number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(f"'{path}' must be finite, got {value!r}")
    if integer and int(value) != value:
        raise ConfigError(f"'{path}' must be an integer, got {value!r}")
    if minimum is not None and (value <= minimum if exclusive else value < minimum):
        bound = ">" if exclusive else ">="
        raise ConfigError(f"'{path}' must be {bound} {minimum}, got {value!r}")
    return int(value) if integer else float(value)


def _stage_names(stages):
    _check_keys(stages, set(stages), "stages")
    order = []
    for name in stages:
        match = _STAGE_NAME.match(str(name))
        if not match:
            raise ConfigError(f"unknown key 'stages.{name}' (stages are named stage1, stage2, ...)")
        order.append((int(match.group(1)), name))
    order.sort()
    if [i for i, _ in order] != list(range(1, len(order) + 1)):
        raise ConfigError("stages must be numbered stage1, stage2, ... without gaps")
    return [name for _, name in order]


def _build_stage(stage, where, n_taps):
    _check_keys(stage, _STAGE_KEYS, where)
    length = _number(_require(stage, "iterations", where), f"{where}.iterations", integer=True, minimum=1)
    sources = [k for k in ("nonzero", "system", "system_file") if k in stage]
    if len(sources) != 1:
        raise ConfigError(f"'{where}' needs exactly one of nonzero, system, system_file")
    source = sources[0]
    try:
        if source == "nonzero":
            k = _number(stage["nonzero"], f"{where}.nonzero", integer=True, minimum=0)
            spec = SparseSystemSpec(n_taps, k)
        elif source == "system":
            if stage["system"] != "ecg":
                raise ConfigError(f"'{where}.system' must be 'ecg', got {stage['system']!r}")
            spec = SparseSystemSpec.fixed(load_ecg_ir())
        else:
            spec = SparseSystemSpec.fixed(load_ecg_ir(stage["system_file"]))
        if spec.n_taps != n_taps:
            raise ConfigError(f"'{where}': system has {spec.n_taps} taps but n_taps is {n_taps}")
    except (ValueError, OSError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"'{where}.{source}': {exc}") from None
    return spec, length


def scenario_from_dict(doc: dict[str, Any]) -> Scenario:
    """Validate a scenario document and build the :class:`Scenario`."""
    _check_keys(doc, _TOP_KEYS, "")
    n_taps = _number(_require(doc, "n_taps", ""), "n_taps", integer=True, minimum=1)
    runs = _number(doc.get("runs", 200), "runs", integer=True, minimum=1)
    seed = _number(doc.get("seed", 0), "seed", integer=True, minimum=0)
    ngc_lag = doc.get("ngc_lag", False)
    if not isinstance(ngc_lag, bool):
        raise ConfigError(f"'ngc_lag' must be true or false, got {ngc_lag!r}")

    algorithms = doc.get("algorithms", [a.value for a in Algorithm])
    if isinstance(algorithms, str):
        algorithms = [a.strip() for a in algorithms.split(",")]
    try:
        algorithms = tuple(Algorithm(a) for a in algorithms)
    except (ValueError, TypeError):
        choices = ", ".join(a.value for a in Algorithm)
        raise ConfigError(f"'algorithms' must list names from {{{choices}}}, got {algorithms!r}") from None

    params = _require(doc, "params", "")
    _check_keys(params, _PARAM_KEYS, "params")
    mu = _number(_require(params, "mu", "params"), "params.mu", minimum=0, exclusive=True)
    epsilon = _number(params.get("epsilon", 0.05), "params.epsilon", minimum=0, exclusive=True)
    p = _number(params.get("p", 0.5), "params.p", minimum=0, exclusive=True)
    if not p < 1:
        raise ConfigError(f"'params.p' must be < 1, got {p!r}")
    window = _number(params.get("window", 5), "params.window", integer=True, minimum=1)

    stages = _require(doc, "stages", "")
    names = _stage_names(stages)
    specs = [_build_stage(stages[name], f"stages.{name}", n_taps) for name in names]

    rho = params.get("rho", {})
    if isinstance(rho, (int, float)) and not isinstance(rho, bool):
        rho = {name: rho for name in names}
    _check_keys(rho, set(names), "params.rho")
    stage_params = []
    for name in names:
        value = _number(rho.get(name, 0.0), f"params.rho.{name}", minimum=0)
        stage_params.append(LpParams(mu=mu, rho=value, epsilon=epsilon, p=p))

    by_algorithm = params.get("rho_by_algorithm") or {}
    _check_keys(by_algorithm, {a.value for a in Algorithm}, "params.rho_by_algorithm")
    by_algorithm = {
        Algorithm(a): _number(v, f"params.rho_by_algorithm.{a}", minimum=0) for a, v in by_algorithm.items()
    }

    inp = _require(doc, "input", "")
    _check_keys(inp, _INPUT_KEYS, "input")
    kind = inp.get("kind", "white")
    if kind not in ("white", "ar1"):
        raise ConfigError(f"'input.kind' must be 'white' or 'ar1', got {kind!r}")
    input_kwargs = {"kind": kind}
    for key, integer in (("variance", False), ("ar_coefficient", False), ("innovation_variance", False), ("burn_in", True)):
        if key in inp:
            input_kwargs[key] = _number(inp[key], f"input.{key}", integer=integer)
    try:
        input_model = InputModel(**input_kwargs)
    except ValueError as exc:
        raise ConfigError(f"'input': {exc}") from None

    noise = _require(doc, "noise", "")
    _check_keys(noise, _NOISE_KEYS, "noise")
    noise_model = NoiseModel(_number(_require(noise, "variance", "noise"), "noise.variance", minimum=0))

    return Scenario(
        schedule=StageSchedule(tuple(specs)),
        input=input_model,
        noise=noise_model,
        stage_params=tuple(stage_params),
        algorithms=algorithms,
        runs=runs,
        master_seed=seed,
        window_size=window,
        ngc_lag=ngc_lag,
        rho_by_algorithm=by_algorithm,
    )


def parse_override(text: str) -> tuple[str, Any]:
    """Split ``key=value``; the value is read as a YAML scalar or list."""
    key, sep, raw = text.partition("=")
    key = key.strip()
    if not sep or not key:
        raise ConfigError(f"override {text!r} is not of the form key=value")
    try:
        value = yaml.safe_load(raw) if raw.strip() else None
    except yaml.YAMLError:
        raise ConfigError(f"override '{key}': cannot parse value {raw!r}") from None
    return key, value


def apply_overrides(doc: dict, overrides) -> dict:
    """Return a copy of ``doc`` with dotted-key overrides applied.

    Intermediate keys must already exist; whether the final key is valid
    is decided by :func:`scenario_from_dict`.
    """
    doc = copy.deepcopy(doc)
    for item in overrides:
        key, value = parse_override(item) if isinstance(item, str) else item
        parts = key.split(".")
        node = doc
        for depth, part in enumerate(parts[:-1]):
            child = node.get(part) if isinstance(node, dict) else None
            if child is None and parts[depth] == "rho_by_algorithm" and isinstance(node, dict):
                child = node[part] = {}
            if not isinstance(child, dict):
                raise ConfigError(f"unknown key '{key}'")
            node = child
        node[parts[-1]] = value
    return doc


def load_document(path) -> dict:
    with open(path) as fh:
        doc = yaml.safe_load(fh)
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: scenario file must contain a mapping")
    return doc


def dump_document(doc: dict) -> str:
    return yaml.safe_dump(doc, sort_keys=False, default_flow_style=None)
