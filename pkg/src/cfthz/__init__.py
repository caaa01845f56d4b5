"""Cell-free terahertz downlink simulator with leaky-wave antennas.

Frequency-angle-coupled antenna gain, four transmit-antenna-selection
schemes, cross-entropy subchannel allocation under bandwidth/flatness
constraints, and deterministic Monte Carlo sweeps.
"""

__version__ = "0.1.0"

from .alloc import (
    CEConfig,
    CEResult,
    CEState,
    GridRss,
    Subchannel,
    SubchannelPlan,
    build_plan,
    ce_init,
    ce_iterate,
    ce_optimize,
    coherence_search,
    enforce_budget,
    integrated_rate,
    plan_rate,
    resolve_overlaps,
    trim_to_budget,
)
from .phy import (
    SPEED_OF_LIGHT,
    AntennaConfig,
    BelowCutoffError,
    PhysConstants,
    antenna_gain,
    complex_sinc,
    cutoff_from_plates,
    link_rss,
    path_gain,
    peak_frequency,
    phase_constant,
    wavenumber,
)
from .selection import (
    AccessPoint,
    Scheme,
    SelectionMask,
    combined_rss,
    rss_function,
    select_best_at,
    select_best_nsel,
    select_best_per_subchannel,
    select_mrt,
    select_nearest,
)
from .sim import (
    ScenarioConfig,
    SweepResult,
    TrialResult,
    colocated_baseline,
    equal_allocation_baseline,
    generate_scenario,
    monte_carlo,
    run_trial,
)
