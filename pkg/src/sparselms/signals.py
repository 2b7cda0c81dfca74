"""Unknown systems, excitation and observation noise for identification runs.

All randomness flows through :class:`numpy.random.Generator` objects.  A
trial gets three independent streams (system draws, input, noise) derived
from ``(master_seed, trial_index)`` by :func:`trial_generators`, so trial
``i`` is the same no matter how many trials run or in what order.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.signal import lfilter

__all__ = [
    "SparseSystemSpec",
    "StageSchedule",
    "InputKind",
    "InputModel",
    "NoiseModel",
    "trial_generators",
    "draw_system",
    "gen_input",
    "gen_regressor_stream",
    "measure_output",
    "load_ecg_ir",
    "ecg_structure_ok",
    "ECG_N_TAPS",
    "ECG_N_NONZERO",
]

ECG_N_TAPS = 256
ECG_N_NONZERO = 28
_ECG_RESOURCE = "ecg_ir.txt"


@dataclass(frozen=True)
class SparseSystemSpec:
    """Recipe for one stage's true impulse response.

    Either random (``n_nonzero`` taps at uniformly chosen positions, each
    +1 or -1 with equal probability) or fixed (``taps`` given verbatim).
    """

    n_taps: int
    n_nonzero: int
    taps: np.ndarray | None = None

    def __post_init__(self):
        if self.n_taps < 1:
            raise ValueError(f"n_taps must be >= 1, got {self.n_taps}")
        if not 0 <= self.n_nonzero <= self.n_taps:
            raise ValueError(f"n_nonzero must lie in [0, {self.n_taps}], got {self.n_nonzero}")
        if self.taps is not None:
            taps = np.asarray(self.taps, dtype=float)
            if taps.shape != (self.n_taps,):
                raise ValueError(f"fixed taps must have shape ({self.n_taps},), got {taps.shape}")
            if np.count_nonzero(taps) != self.n_nonzero:
                raise ValueError("n_nonzero does not match the fixed taps")

    @classmethod
    def fixed(cls, taps) -> SparseSystemSpec:
        taps = np.asarray(taps, dtype=float)
        taps.setflags(write=False)
        return cls(len(taps), int(np.count_nonzero(taps)), taps)

    @property
    def sparsity_ratio(self) -> Fraction:
        return Fraction(self.n_nonzero, self.n_taps)


@dataclass(frozen=True)
class StageSchedule:
    """Consecutive stages, each with its own true system and length."""

    stages: tuple

    def __post_init__(self):
        if not self.stages:
            raise ValueError("a schedule needs at least one stage")
        n_taps = {spec.n_taps for spec, _ in self.stages}
        if len(n_taps) != 1:
            raise ValueError("all stages must share one tap count")
        for _, length in self.stages:
            if length < 1:
                raise ValueError(f"stage length must be >= 1, got {length}")

    @property
    def n_taps(self) -> int:
        return self.stages[0][0].n_taps

    @property
    def lengths(self) -> list[int]:
        return [length for _, length in self.stages]

    @property
    def total_iterations(self) -> int:
        return sum(self.lengths)

    def stage_index(self) -> np.ndarray:
        """Stage number (0-based) of every iteration."""
        return np.repeat(np.arange(len(self.stages)), self.lengths)


class InputKind(str, enum.Enum):
    WHITE = "white"
    AR1 = "ar1"


@dataclass(frozen=True)
class InputModel:
    """Zero-mean Gaussian excitation.

    ``variance`` is the variance of the produced sequence for both kinds.
    For ``AR1`` the sequence follows ``x[k+1] = a*x[k] + u[k]`` with
    innovation variance ``innovation_variance``, started at zero, the
    first ``burn_in`` samples dropped, then scaled by the closed-form
    stationary factor ``sqrt(variance * (1 - a**2) / innovation_variance)``.
    """

    kind: InputKind = InputKind.WHITE
    variance: float = 1.0
    ar_coefficient: float = 0.8
    innovation_variance: float = 1e-2
    burn_in: int = 1000

    def __post_init__(self):
        object.__setattr__(self, "kind", InputKind(self.kind))
        if not self.variance > 0:
            raise ValueError(f"input variance must be > 0, got {self.variance}")
        if self.kind is InputKind.AR1:
            if not abs(self.ar_coefficient) < 1:
                raise ValueError(f"|ar_coefficient| must be < 1, got {self.ar_coefficient}")
            if not self.innovation_variance > 0:
                raise ValueError(f"innovation_variance must be > 0, got {self.innovation_variance}")
            if self.burn_in < 0:
                raise ValueError(f"burn_in must be >= 0, got {self.burn_in}")

    @property
    def ar_scale(self) -> float:
        a = self.ar_coefficient
        return math.sqrt(self.variance * (1 - a * a) / self.innovation_variance)


@dataclass(frozen=True)
class NoiseModel:
    variance: float

    def __post_init__(self):
        if not self.variance >= 0:
            raise ValueError(f"noise variance must be >= 0, got {self.variance}")


def trial_generators(master_seed: int, trial_index: int) -> dict[str, np.random.Generator]:
    """Independent ``system``/``input``/``noise`` generators for one trial."""
    seq = np.random.SeedSequence(master_seed, spawn_key=(trial_index,))
    system, inputs, noise = seq.spawn(3)
    return {
        "system": np.random.default_rng(system),
        "input": np.random.default_rng(inputs),
        "noise": np.random.default_rng(noise),
    }


def draw_system(spec: SparseSystemSpec, rng: np.random.Generator) -> np.ndarray:
    if spec.taps is not None:
        return np.array(spec.taps, dtype=float)
    w = np.zeros(spec.n_taps)
    positions = rng.choice(spec.n_taps, size=spec.n_nonzero, replace=False)
    w[positions] = rng.choice([-1.0, 1.0], size=spec.n_nonzero)
    return w


def gen_input(model: InputModel, length: int, rng: np.random.Generator) -> np.ndarray:
    if length < 1:
        raise ValueError(f"input length must be >= 1, got {length}")
    if model.kind is InputKind.WHITE:
        return rng.normal(0.0, math.sqrt(model.variance), size=length)
    a = model.ar_coefficient
    u = rng.normal(0.0, math.sqrt(model.innovation_variance), size=model.burn_in + length)
    # x[0] = 0, x[k+1] = a x[k] + u[k]
    x = lfilter([0.0, 1.0], [1.0, -a], u)
    return x[model.burn_in:] * model.ar_scale


def gen_regressor_stream(x, n_taps: int) -> np.ndarray:
    """Sliding regressors ``[x_k, x_{k-1}, ..., x_{k-N+1}]``, newest first.

    Only full windows are produced, so ``len(x) - n_taps + 1`` rows come
    back (a read-only view).
    """
    x = np.asarray(x, dtype=float)
    if n_taps < 1:
        raise ValueError(f"n_taps must be >= 1, got {n_taps}")
    if x.ndim != 1 or len(x) < n_taps:
        raise ValueError(f"input of length {len(x)} is shorter than the {n_taps}-tap window")
    return sliding_window_view(x, n_taps)[:, ::-1]


def measure_output(w, x, noise: NoiseModel, rng: np.random.Generator):
    """Noisy system output ``w.x + n`` for one regressor or a stack of them."""
    w = np.asarray(w, dtype=float)
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != w.shape[-1]:
        raise ValueError(f"regressor length {x.shape[-1]} does not match {w.shape[-1]} taps")
    clean = x @ w
    y = clean + rng.normal(0.0, math.sqrt(noise.variance), size=np.shape(clean))
    return float(y) if np.ndim(y) == 0 else y


def ecg_structure_ok(w) -> bool:
    """True when ``w`` has the bundled ECG system's 256 taps / 28 nonzeros."""
    w = np.asarray(w)
    return w.shape == (ECG_N_TAPS,) and np.count_nonzero(w) == ECG_N_NONZERO


def load_ecg_ir(path: str | Path | None = None, *, strict: bool | None = None) -> np.ndarray:
    """Read a 256-tap impulse response, one or more reals per line.

    Without ``path`` the bundled ECG-like system is returned.  ``strict``
    (default: on for the bundled file only) additionally requires exactly
    28 nonzero taps.
    """
    if path is None:
        text = resources.files("sparselms.data").joinpath(_ECG_RESOURCE).read_text()
        source = "bundled ECG impulse response"
        strict = True if strict is None else strict
    else:
        text = Path(path).read_text()
        source = str(path)
    try:
        taps = np.array([float(tok) for tok in text.replace(",", " ").split()])
    except ValueError as exc:
        raise ValueError(f"{source}: cannot parse tap values ({exc})") from None
    if taps.shape != (ECG_N_TAPS,):
        raise ValueError(f"{source}: expected {ECG_N_TAPS} taps, found {taps.size}")
    if not np.all(np.isfinite(taps)):
        raise ValueError(f"{source}: taps must be finite")
    if strict and not ecg_structure_ok(taps):
        raise ValueError(
            f"{source}: expected {ECG_N_NONZERO} nonzero taps, found {np.count_nonzero(taps)}"
        )
    return taps
