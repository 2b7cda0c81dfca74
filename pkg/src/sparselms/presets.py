"""The three published identification experiments as scenario presets.

``PUBLISHED_PARAMETERS`` restates the published parameter tables in flat
form; :func:`verify_presets` checks every preset against it so the preset
documents cannot silently drift.
"""
from __future__ import annotations

import copy
import math

from .config import ConfigError, scenario_from_dict
from .harness import Scenario
from .signals import ECG_N_NONZERO, ECG_N_TAPS, InputKind

__all__ = ["PRESETS", "PUBLISHED_PARAMETERS", "preset_document", "build_preset", "verify_presets"]

_ALL = ["lms", "lp", "lpgc", "lpngc"]

PRESETS = {
    "example1": {
        "n_taps": 16,
        "runs": 200,
        "seed": 0,
        "algorithms": list(_ALL),
        "ngc_lag": False,
        "params": {
            "mu": 0.05,
            "epsilon": 0.05,
            "p": 0.5,
            "window": 5,
            "rho": {"stage1": 0.0008, "stage2": 0.0003, "stage3": 0.0001},
            "rho_by_algorithm": {},
        },
        "input": {"kind": "white", "variance": 1.0},
        "noise": {"variance": 0.01},
        "stages": {
            "stage1": {"iterations": 500, "nonzero": 1},
            "stage2": {"iterations": 500, "nonzero": 4},
            "stage3": {"iterations": 500, "nonzero": 8},
        },
    },
    "example2": {
        "n_taps": 16,
        "runs": 200,
        "seed": 0,
        "algorithms": list(_ALL),
        "ngc_lag": False,
        "params": {
            "mu": 0.015,
            "epsilon": 0.1,
            "p": 0.5,
            "window": 5,
            "rho": {"stage1": 0.0005, "stage2": 0.00005, "stage3": 0.00001},
            "rho_by_algorithm": {},
        },
        "input": {
            "kind": "ar1",
            "variance": 1.0,
            "ar_coefficient": 0.8,
            "innovation_variance": 0.01,
            "burn_in": 1000,
        },
        "noise": {"variance": 0.1},
        "stages": {
            "stage1": {"iterations": 3000, "nonzero": 1},
            "stage2": {"iterations": 3000, "nonzero": 4},
            "stage3": {"iterations": 3000, "nonzero": 8},
        },
    },
    "example3": {
        "n_taps": 256,
        "runs": 200,
        "seed": 0,
        "algorithms": list(_ALL),
        "ngc_lag": False,
        "params": {
            "mu": 0.005,
            "epsilon": 0.1,
            "p": 0.5,
            "window": 5,
            "rho": {"stage1": 0.000007},
            "rho_by_algorithm": {},
        },
        "input": {"kind": "white", "variance": 1.0},
        "noise": {"variance": 0.1},
        # the iteration count is not published; 3000 covers convergence of all four filters
        "stages": {"stage1": {"iterations": 3000, "system": "ecg"}},
    },
}

PUBLISHED_PARAMETERS = {
    "example1": {
        "n_taps": 16,
        "mu": 0.05,
        "rho": (0.0008, 0.0003, 0.0001),
        "epsilon": 0.05,
        "p": 0.5,
        "nonzero": (1, 4, 8),
        "stage_iterations": (500, 500, 500),
        "input": "white",
        "input_variance": 1.0,
        "noise_variance": 0.01,
        "runs": 200,
    },
    "example2": {
        "n_taps": 16,
        "mu": 0.015,
        "rho": (0.0005, 0.00005, 0.00001),
        "epsilon": 0.1,
        "p": 0.5,
        "window": 5,
        "nonzero": (1, 4, 8),
        "stage_iterations": (3000, 3000, 3000),
        "input": "ar1",
        "ar_coefficient": 0.8,
        "innovation_variance": 0.01,
        "input_variance": 1.0,
        "noise_variance": 0.1,
        "runs": 200,
    },
    "example3": {
        "n_taps": ECG_N_TAPS,
        "mu": 0.005,
        "rho": (0.000007,),
        "epsilon": 0.1,
        "p": 0.5,
        "window": 5,
        "nonzero": (ECG_N_NONZERO,),
        "input": "white",
        "input_variance": 1.0,
        "noise_variance": 0.1,
        "runs": 200,
    },
}


def preset_document(name: str) -> dict:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    return copy.deepcopy(PRESETS[name])


def build_preset(name: str) -> Scenario:
    return scenario_from_dict(preset_document(name))


def _mismatches(scenario: Scenario, table: dict) -> list[str]:
    actual = {
        "n_taps": scenario.n_taps,
        "mu": scenario.stage_params[0].mu,
        "rho": tuple(p.rho for p in scenario.stage_params),
        "epsilon": scenario.stage_params[0].epsilon,
        "p": scenario.stage_params[0].p,
        "window": scenario.window_size,
        "nonzero": tuple(spec.n_nonzero for spec, _ in scenario.schedule.stages),
        "stage_iterations": tuple(scenario.stage_lengths),
        "input": scenario.input.kind.value,
        "input_variance": scenario.input.variance,
        "noise_variance": scenario.noise.variance,
        "runs": scenario.runs,
    }
    if scenario.input.kind is InputKind.AR1:
        actual["ar_coefficient"] = scenario.input.ar_coefficient
        actual["innovation_variance"] = scenario.input.innovation_variance
    bad = []
    for key, expected in table.items():
        got = actual.get(key)
        if isinstance(expected, tuple):
            same = got is not None and len(got) == len(expected) and all(
                math.isclose(a, b, rel_tol=1e-12) for a, b in zip(got, expected)
            )
        else:
            same = got is not None and (got == expected or math.isclose(got, expected, rel_tol=1e-12))
        if not same:
            bad.append(f"{key}: preset has {got!r}, table says {expected!r}")
    return bad


def verify_presets() -> None:
    """Raise ``AssertionError`` if any preset disagrees with the table."""
    for name, table in PUBLISHED_PARAMETERS.items():
        bad = _mismatches(build_preset(name), table)
        if bad:
            raise AssertionError(f"preset {name} drifted from the published table: " + "; ".join(bad))
