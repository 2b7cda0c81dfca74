"""Sparse adaptive filtering: LMS, p-norm LMS and its gradient-compared variants."""
from .filters import (
    Algorithm,
    ComparatorWindow,
    FilterState,
    LpParams,
    gc_comparator,
    init_state,
    lms_step,
    lp_attractor,
    lp_gc_step,
    lp_lms_step,
    lp_ngc_step,
    ngc_comparator,
    p_norm,
    sign,
    step,
)
from .harness import MsdCurve, Scenario, msd_in_db, run_monte_carlo, run_trial, steady_state_msd
from .presets import build_preset

__version__ = "0.1.0"
