"""Identification trials, Monte-Carlo ensembles and MSD summaries."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Mapping

import numpy as np

from .filters import Algorithm, LpParams, init_state, step
from .signals import (
    InputModel,
    NoiseModel,
    StageSchedule,
    draw_system,
    gen_input,
    gen_regressor_stream,
    measure_output,
    trial_generators,
)

__all__ = [
    "Scenario",
    "TrialData",
    "MsdCurve",
    "generate_trial",
    "identify",
    "run_trial",
    "run_monte_carlo",
    "steady_state_msd",
    "msd_in_db",
    "MIN_STAGE_LENGTH",
]

ALL_ALGORITHMS = tuple(Algorithm)
MIN_STAGE_LENGTH = 50
STEADY_STATE_FRACTION = 0.1


@dataclass(frozen=True)
class Scenario:
    """Everything needed to reproduce an ensemble of identification runs.

    ``stage_params[s]`` applies during stage ``s`` to every algorithm.  The
    step size, epsilon and p must be the same in all stages; only ``rho``
    may change.  ``rho_by_algorithm`` pins a constant ``rho`` per
    algorithm instead, overriding the per-stage value.
    """

    schedule: StageSchedule
    input: InputModel
    noise: NoiseModel
    stage_params: tuple
    algorithms: tuple = ALL_ALGORITHMS
    runs: int = 200
    master_seed: int = 0
    window_size: int = 5
    ngc_lag: bool = False
    rho_by_algorithm: Mapping = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "stage_params", tuple(self.stage_params))
        object.__setattr__(self, "algorithms", tuple(Algorithm(a) for a in self.algorithms))
        object.__setattr__(
            self, "rho_by_algorithm", {Algorithm(a): float(r) for a, r in self.rho_by_algorithm.items()}
        )
        if len(self.stage_params) != len(self.schedule.stages):
            raise ValueError(
                f"{len(self.stage_params)} parameter sets for {len(self.schedule.stages)} stages"
            )
        first = self.stage_params[0]
        for params in self.stage_params[1:]:
            if (params.mu, params.epsilon, params.p) != (first.mu, first.epsilon, first.p):
                raise ValueError("mu, epsilon and p must be identical across stages")
        if not self.algorithms:
            raise ValueError("at least one algorithm is required")
        if len(set(self.algorithms)) != len(self.algorithms):
            raise ValueError("duplicate algorithms")
        if self.runs < 1:
            raise ValueError(f"runs must be >= 1, got {self.runs}")
        if self.window_size < 1:
            raise ValueError(f"window_size must be >= 1, got {self.window_size}")
        for rho in self.rho_by_algorithm.values():
            if not rho >= 0:
                raise ValueError(f"rho must be >= 0, got {rho}")

    @property
    def n_taps(self) -> int:
        return self.schedule.n_taps

    @property
    def stage_lengths(self) -> list[int]:
        return self.schedule.lengths

    @property
    def total_iterations(self) -> int:
        return self.schedule.total_iterations

    def params_for(self, algorithm: Algorithm, stage: int) -> LpParams:
        params = self.stage_params[stage]
        rho = self.rho_by_algorithm.get(Algorithm(algorithm))
        return params if rho is None else replace(params, rho=rho)


@dataclass(frozen=True)
class TrialData:
    """The shared measurement record of one trial.

    ``inputs`` has ``total_iterations + N - 1`` samples; iteration ``k``
    uses the regressor ending at sample ``k + N - 1``.
    """

    inputs: np.ndarray
    outputs: np.ndarray
    systems: np.ndarray

    @property
    def regressors(self) -> np.ndarray:
        return gen_regressor_stream(self.inputs, self.systems.shape[-1])


@dataclass(frozen=True)
class MsdCurve:
    algorithm: Algorithm
    per_iteration_msd: np.ndarray
    stage_lengths: tuple

    def __post_init__(self):
        if len(self.per_iteration_msd) != sum(self.stage_lengths):
            raise ValueError("curve length does not match the stage lengths")

    @property
    def steady_state_msd_per_stage(self) -> list[float]:
        return steady_state_msd(self.per_iteration_msd, self.stage_lengths)

    def in_db(self) -> np.ndarray:
        return msd_in_db(self.per_iteration_msd)


def generate_trial(scenario: Scenario, trial_index: int) -> TrialData:
    """Draw the systems, input and noisy outputs of trial ``trial_index``."""
    gens = trial_generators(scenario.master_seed, trial_index)
    schedule = scenario.schedule
    n = schedule.n_taps
    systems = np.stack([draw_system(spec, gens["system"]) for spec, _ in schedule.stages])
    inputs = gen_input(scenario.input, schedule.total_iterations + n - 1, gens["input"])
    regressors = gen_regressor_stream(inputs, n)
    outputs = np.empty(schedule.total_iterations)
    start = 0
    for w, length in zip(systems, schedule.lengths):
        stop = start + length
        outputs[start:stop] = measure_output(w, regressors[start:stop], scenario.noise, gens["noise"])
        start = stop
    return TrialData(inputs, outputs, systems)


def identify(
    algorithm: Algorithm | str,
    inputs,
    outputs,
    systems,
    stage_lengths,
    stage_params,
    *,
    window_size: int = 5,
    lagged: bool = False,
) -> np.ndarray:
    """Run one adaptive filter over recorded data.

    ``inputs`` is ``(..., T + N - 1)``, ``outputs`` is ``(..., T)`` and
    ``systems`` is ``(..., n_stages, N)``; leading axes index independent
    trials that are advanced together.  Returns ``||w_true - w_k||**2``
    for every iteration, measured before the k-th update against the
    system of the current stage, so entry 0 is ``||w_true||**2``.  The
    filter state crosses stage boundaries untouched.
    """
    inputs = np.asarray(inputs, dtype=float)
    outputs = np.asarray(outputs, dtype=float)
    systems = np.asarray(systems, dtype=float)
    stage_lengths = list(stage_lengths)
    n_taps = systems.shape[-1]
    total = sum(stage_lengths)
    if outputs.shape[-1] != total or inputs.shape[-1] != total + n_taps - 1:
        raise ValueError("inputs/outputs do not match the stage lengths")
    if systems.shape[-2] != len(stage_lengths) or len(stage_params) != len(stage_lengths):
        raise ValueError("need one system and one parameter set per stage")

    batch = outputs.shape[:-1]
    state = init_state(
        algorithm, n_taps, stage_params[0], window_size=window_size, lagged=lagged, batch_shape=batch
    )
    deviations = np.empty(batch + (total,))
    k = 0
    for stage, length in enumerate(stage_lengths):
        state = replace(state, params=stage_params[stage])
        w_true = systems[..., stage, :]
        for _ in range(length):
            x = inputs[..., k:k + n_taps][..., ::-1]
            w = state.estimate
            deviations[..., k] = np.sum((w_true - w) ** 2, axis=-1)
            e = outputs[..., k] - np.sum(w * x, axis=-1)
            state = step(state, x, e)
            k += 1
    return deviations


def _run(scenario: Scenario, algorithm: Algorithm, trials: list[TrialData]) -> np.ndarray:
    params = [scenario.params_for(algorithm, s) for s in range(len(scenario.stage_params))]
    return identify(
        algorithm,
        np.stack([t.inputs for t in trials]),
        np.stack([t.outputs for t in trials]),
        np.stack([t.systems for t in trials]),
        scenario.stage_lengths,
        params,
        window_size=scenario.window_size,
        lagged=scenario.ngc_lag,
    )


def run_trial(scenario: Scenario, algorithm: Algorithm | str, trial_index: int = 0) -> np.ndarray:
    """Squared deviation per iteration for a single trial."""
    data = generate_trial(scenario, trial_index)
    return _run(scenario, Algorithm(algorithm), [data])[0]


def run_monte_carlo(scenario: Scenario) -> dict[Algorithm, MsdCurve]:
    """Average squared deviations over ``scenario.runs`` trials.

    Every algorithm sees the very same trials (systems, inputs, noise),
    and trial ``i`` depends only on ``(master_seed, i)``.
    """
    trials = [generate_trial(scenario, i) for i in range(scenario.runs)]
    curves = {}
    for algorithm in scenario.algorithms:
        deviations = _run(scenario, algorithm, trials)
        curves[algorithm] = MsdCurve(algorithm, deviations.mean(axis=0), tuple(scenario.stage_lengths))
    return curves


def steady_state_msd(curve, stage_lengths, fraction: float = STEADY_STATE_FRACTION) -> list[float]:
    """Mean of each stage's trailing ``fraction`` of iterations."""
    values = np.asarray(getattr(curve, "per_iteration_msd", curve), dtype=float)
    if len(values) != sum(stage_lengths):
        raise ValueError("curve length does not match the stage lengths")
    out = []
    start = 0
    for length in stage_lengths:
        if length < MIN_STAGE_LENGTH:
            raise ValueError(f"stage of {length} iterations is shorter than {MIN_STAGE_LENGTH}")
        tail = math.ceil(fraction * length)
        out.append(float(values[start + length - tail:start + length].mean()))
        start += length
    return out


def msd_in_db(msd):
    msd = np.asarray(msd, dtype=float)
    if np.any(~(msd > 0)):
        raise ValueError("MSD must be positive to express in dB")
    out = 10.0 * np.log10(msd)
    return float(out) if out.ndim == 0 else out
