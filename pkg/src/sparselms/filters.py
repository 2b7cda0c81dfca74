"""Weight-update rules for LMS and the p-norm constrained LMS family.

Every step function is pure: it takes a :class:`FilterState`, the current
regressor ``x`` and the a-priori error ``e = y - w.x`` and returns a new
state.  Arrays may carry leading batch dimensions, so a whole ensemble of
independent filters can be advanced at once; ``estimate`` and ``x`` have
shape ``(..., N)`` and ``e`` has shape ``(...)``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

import numpy as np

__all__ = [
    "Algorithm",
    "LpParams",
    "ComparatorWindow",
    "FilterState",
    "sign",
    "p_norm",
    "lp_attractor",
    "gc_comparator",
    "ngc_comparator",
    "init_state",
    "lms_step",
    "lp_lms_step",
    "lp_gc_step",
    "lp_ngc_step",
    "step",
]


class Algorithm(str, enum.Enum):
    LMS = "lms"
    LP_LMS = "lp"
    LP_GC = "lpgc"
    LP_NGC = "lpngc"

    @property
    def label(self) -> str:
        return _LABELS[self]


_LABELS = {
    Algorithm.LMS: "LMS",
    Algorithm.LP_LMS: "lp-LMS",
    Algorithm.LP_GC: "lpGC-LMS",
    Algorithm.LP_NGC: "lpNGC-LMS",
}


@dataclass(frozen=True)
class LpParams:
    """Step size and p-norm attractor settings.

    ``rho`` is the product of the step size and the penalty weight; it is
    the only knob that scales the zero attractor.  The LMS rule reads
    ``mu`` alone.  Stability needs ``mu`` below the reciprocal of the
    largest eigenvalue of the input covariance; that is not checked here
    because a filter never sees the covariance.
    """

    mu: float
    rho: float = 0.0
    epsilon: float = 0.05
    p: float = 0.5

    def __post_init__(self):
        for name in ("mu", "rho", "epsilon", "p"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite, got {getattr(self, name)!r}")
        if self.mu <= 0:
            raise ValueError(f"mu must be > 0, got {self.mu}")
        if self.rho < 0:
            raise ValueError(f"rho must be >= 0, got {self.rho}")
        if self.epsilon <= 0:
            raise ValueError(f"epsilon must be > 0, got {self.epsilon}")
        if not 0 < self.p < 1:
            raise ValueError(f"p must lie in (0, 1), got {self.p}")


@dataclass(frozen=True)
class ComparatorWindow:
    """Bounded FIFO of the most recent instantaneous comparator diagonals.

    With ``lagged=True`` the smoothed comparator of an iteration is taken
    from the window *before* the current diagonal is pushed, i.e. it lags
    the instantaneous comparator by one step.
    """

    capacity: int = 5
    history: tuple = ()
    lagged: bool = False

    def __post_init__(self):
        if int(self.capacity) != self.capacity or self.capacity < 1:
            raise ValueError(f"window capacity must be a positive integer, got {self.capacity!r}")
        if len(self.history) > self.capacity:
            raise ValueError("window history exceeds its capacity")

    def __len__(self) -> int:
        return len(self.history)

    def push(self, diag: np.ndarray) -> ComparatorWindow:
        history = (self.history + (diag,))[-self.capacity:]
        return replace(self, history=history)


@dataclass(frozen=True)
class FilterState:
    estimate: np.ndarray
    params: LpParams
    algorithm: Algorithm = Algorithm.LMS
    window: ComparatorWindow | None = field(default=None)

    def __post_init__(self):
        if np.ndim(self.estimate) < 1 or np.shape(self.estimate)[-1] < 1:
            raise ValueError("estimate must have at least one tap")
        if (self.window is not None) != (self.algorithm is Algorithm.LP_NGC):
            raise ValueError("a comparator window is required for, and only for, lpNGC-LMS")

    @property
    def n_taps(self) -> int:
        return self.estimate.shape[-1]


def _require_finite(name, value):
    if not np.all(np.isfinite(value)):
        raise ValueError(f"{name} contains NaN or Inf")


def sign(x):
    """Elementwise sign with ``sign(0) == 0``; rejects NaN."""
    x = np.asarray(x, dtype=float)
    if np.any(np.isnan(x)):
        raise ValueError("sign() is undefined for NaN")
    out = np.sign(x)
    return float(out) if out.ndim == 0 else out


def p_norm(w, p: float):
    """``(sum |w_i|**p) ** (1/p)`` over the last axis, for ``0 < p < 1``."""
    if not 0 < p < 1:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    w = np.asarray(w, dtype=float)
    out = np.sum(np.abs(w) ** p, axis=-1) ** (1.0 / p)
    return float(out) if out.ndim == 0 else out


def lp_attractor(w, params: LpParams) -> np.ndarray:
    """Zero-attractor term subtracted by the p-norm constrained updates.

    ``t_i = rho * ||w||_p**(1-p) * sign(w_i) / (epsilon + |w_i|**(1-p))``.
    For small ``epsilon`` this is ``rho`` times the gradient of ``||w||_p``.
    The all-zero vector maps to zero.
    """
    w = np.asarray(w, dtype=float)
    p = params.p
    # ||w||_p ** (1 - p) without forming the norm first
    scale = np.sum(np.abs(w) ** p, axis=-1, keepdims=True) ** ((1.0 - p) / p)
    return params.rho * scale * np.sign(w) / (params.epsilon + np.abs(w) ** (1.0 - p))


def gc_comparator(x, e, w) -> np.ndarray:
    """Diagonal of the instantaneous gradient comparator.

    ``|sign(e*x_i) - sign(w_i)| / 2``: 1 where both signs are nonzero and
    opposite (tap i and the gradient of ``e**2/2`` share polarity), 0 where
    they agree, 0.5 where exactly one of them is zero.
    """
    ex = np.asarray(e, dtype=float)[..., None] * np.asarray(x, dtype=float)
    return np.abs(np.sign(ex) - np.sign(w)) / 2.0


def ngc_comparator(window: ComparatorWindow) -> np.ndarray:
    """Sign of the mean of the stored comparator diagonals.

    Averages over however many diagonals are stored (fewer than the
    capacity early on); entries are 0 or 1.
    """
    if not window.history:
        raise ValueError("cannot form the smoothed comparator from an empty window")
    return np.sign(np.mean(np.stack(window.history), axis=0))


def init_state(
    algorithm: Algorithm | str,
    n_taps: int,
    params: LpParams,
    *,
    window_size: int = 5,
    lagged: bool = False,
    batch_shape: tuple = (),
) -> FilterState:
    """Zero-initialised filter state, optionally batched."""
    algorithm = Algorithm(algorithm)
    if n_taps < 1:
        raise ValueError(f"n_taps must be >= 1, got {n_taps}")
    window = None
    if algorithm is Algorithm.LP_NGC:
        window = ComparatorWindow(capacity=window_size, lagged=lagged)
    return FilterState(np.zeros(tuple(batch_shape) + (n_taps,)), params, algorithm, window)


def _check_inputs(state: FilterState, x, e):
    x = np.asarray(x, dtype=float)
    e = np.asarray(e, dtype=float)
    if x.shape != state.estimate.shape:
        raise ValueError(f"regressor shape {x.shape} does not match estimate shape {state.estimate.shape}")
    if e.shape != state.estimate.shape[:-1]:
        raise ValueError(f"error shape {e.shape} does not match batch shape {state.estimate.shape[:-1]}")
    _require_finite("regressor", x)
    _require_finite("error", e)
    return x, e


def _gradient_term(mu, x, e):
    return mu * e[..., None] * x


def _finish(state: FilterState, estimate, window=None) -> FilterState:
    _require_finite("updated estimate", estimate)
    if window is None:
        return replace(state, estimate=estimate)
    return replace(state, estimate=estimate, window=window)


def lms_step(state: FilterState, x, e) -> FilterState:
    x, e = _check_inputs(state, x, e)
    return _finish(state, state.estimate + _gradient_term(state.params.mu, x, e))


def lp_lms_step(state: FilterState, x, e) -> FilterState:
    x, e = _check_inputs(state, x, e)
    w = state.estimate
    return _finish(state, w + _gradient_term(state.params.mu, x, e) - lp_attractor(w, state.params))


def lp_gc_step(state: FilterState, x, e, gate=None) -> FilterState:
    """p-norm LMS with the attractor gated by the instantaneous comparator.

    ``gate`` replaces the computed comparator diagonal when given.
    """
    x, e = _check_inputs(state, x, e)
    w = state.estimate
    if gate is None:
        gate = gc_comparator(x, e, w)
    update = w + _gradient_term(state.params.mu, x, e) - gate * lp_attractor(w, state.params)
    return _finish(state, update)


def lp_ngc_step(state: FilterState, x, e) -> FilterState:
    """p-norm LMS gated by the sign of the windowed mean comparator.

    The comparator of the current (pre-update) estimate enters the window
    and, unless the window is lagged, the smoothed gate of this iteration.
    """
    x, e = _check_inputs(state, x, e)
    w = state.estimate
    window = state.window
    g = gc_comparator(x, e, w)
    if window.lagged and window.history:
        gate = ngc_comparator(window)
        window = window.push(g)
    else:
        window = window.push(g)
        gate = ngc_comparator(window)
    update = w + _gradient_term(state.params.mu, x, e) - gate * lp_attractor(w, state.params)
    return _finish(state, update, window)


_STEPS = {
    Algorithm.LMS: lms_step,
    Algorithm.LP_LMS: lp_lms_step,
    Algorithm.LP_GC: lp_gc_step,
    Algorithm.LP_NGC: lp_ngc_step,
}


def step(state: FilterState, x, e) -> FilterState:
    """Dispatch to the update rule named by ``state.algorithm``."""
    return _STEPS[state.algorithm](state, x, e)
