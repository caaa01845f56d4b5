"""Scenario generation, baselines, and Monte Carlo sweeps.

A scenario is a random drop of N access points around one UE, each AP
described only by its distance and line-of-sight angle. Trials are fully
deterministic given (config, seed): every trial owns RNG substreams derived
from (seed, axis index, trial index), and all schemes within a trial share
the same cross-entropy stream so per-trial comparisons are paired.
"""

from __future__ import annotations

import hashlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import alloc, selection
from .alloc import CEConfig, GridRss
from .phy import AntennaConfig, dbm_per_hz_to_w_per_hz
from .selection import AccessPoint, Scheme

CE_SCHEMES = ("mrt", "best_nsel", "best_per_subchannel", "nearest")
BASELINE_SCHEMES = ("equal_mrt", "colocated")
ALL_SCHEMES = CE_SCHEMES + BASELINE_SCHEMES

# substream tags within one (seed, axis, trial) cell
_STREAM_SCENARIO = 0
_STREAM_CE = 1
_STREAM_COLOCATED = 2


@dataclass
class ScenarioConfig:
    """Full experiment configuration with simulation-parameter defaults."""

    n_aps: int = 20
    n_sel: int = 2
    radius: float = 50.0  # m
    d_min: float = 0.5  # m, keeps free-space loss finite
    angle_guard: float = 0.01  # rad, keeps theta off both interval ends
    f_co: float = 100e9
    f_upper: float = 300e9
    b_total: float = 16e9
    p_total: float = 1.0  # W, PSD p = p_total / b_total
    noise_psd: float = dbm_per_hz_to_w_per_hz(-168.0)
    gamma_th: float = dbm_per_hz_to_w_per_hz(-174.5)
    eps_db: float = 0.5
    trials: int = 200
    seed: int = 1234
    schemes: tuple = ALL_SCHEMES
    antenna: AntennaConfig | None = None
    ce: CEConfig = field(default_factory=CEConfig)

    def __post_init__(self):
        if self.d_min <= 0:
            raise ValueError("d_min must be > 0")
        if self.radius <= self.d_min:
            raise ValueError("radius must exceed d_min")
        if self.f_upper <= self.f_co:
            raise ValueError("f_upper must exceed f_co")
        if self.p_total <= 0:
            raise ValueError("p_total must be > 0")
        if self.b_total <= 0:
            raise ValueError("b_total must be > 0")
        unknown = set(self.schemes) - set(ALL_SCHEMES)
        if unknown:
            raise ValueError(f"unknown schemes: {sorted(unknown)}")
        if self.antenna is None:
            self.antenna = AntennaConfig(f_co=self.f_co)
        elif self.antenna.f_co != self.f_co:
            raise ValueError(
                f"antenna.f_co {self.antenna.f_co} != config f_co {self.f_co}"
            )

    @property
    def p(self):
        """Per-AP transmit PSD in W/Hz."""
        return self.p_total / self.b_total

    @property
    def band(self):
        return (self.f_co, self.f_upper)


@dataclass
class TrialResult:
    scheme: str
    plan_rate: float  # bit/s, center-RSS objective of the emitted plan
    integrated_rate: float  # bit/s, trapezoidal spectral integral
    active_aps: int
    plan: alloc.SubchannelPlan
    incumbent_value: float
    scenario_digest: str


@dataclass
class SweepRow:
    axis: str
    axis_value: float
    scheme: str
    mean_rate: float
    stderr_rate: float
    mean_active_aps: float
    trials: int


@dataclass
class SweepResult:
    axis: str
    rows: list


def generate_scenario(rng, cfg: ScenarioConfig):
    """Drop n_aps APs: d ~ U(d_min, radius), theta ~ U(guard, pi/2-guard)."""
    d = rng.uniform(cfg.d_min, cfg.radius, cfg.n_aps)
    theta = rng.uniform(cfg.angle_guard, np.pi / 2 - cfg.angle_guard, cfg.n_aps)
    return [AccessPoint(i, d[i], theta[i]) for i in range(cfg.n_aps)]


def scenario_digest(aps):
    geom = np.array([[ap.distance, ap.angle] for ap in aps])
    return hashlib.sha256(geom.tobytes()).hexdigest()[:16]


def _build_mask(scheme, aps, cfg):
    if scheme == "mrt":
        return selection.select_mrt(aps)
    if scheme == "best_nsel":
        return selection.select_best_nsel(
            aps, min(cfg.n_sel, len(aps)), cfg.p, cfg.antenna, cfg.f_upper
        )
    if scheme == "best_per_subchannel":
        return selection.select_best_per_subchannel()
    if scheme == "nearest":
        return selection.select_nearest(aps)
    raise ValueError(f"not a selection scheme: {scheme}")


def _active_count(scheme, mask, aps, cfg, plan):
    if scheme != "best_per_subchannel":
        return len(mask.static_set)
    used = {
        selection.select_best_at(aps, ch.center, cfg.p, cfg.antenna)
        for ch in plan.channels
        if ch.width > 0
    }
    return len(used)


def run_trial(aps, scheme, cfg: ScenarioConfig, rng, gain_fn=None) -> TrialResult:
    """Build the scheme's mask, optimize the subchannel plan with the CE
    allocator, and record both rate metrics plus the active-AP count."""
    mask = _build_mask(scheme, aps, cfg)
    rss_fn = selection.rss_function(
        mask, aps, cfg.p, cfg.antenna, cfg.gamma_th, gain_fn=gain_fn
    )
    grid = GridRss(rss_fn, cfg.band, cfg.ce.step)
    result = alloc.ce_optimize(
        grid,
        cfg.ce,
        cfg.band,
        rng,
        eps_db=cfg.eps_db,
        total_budget=cfg.b_total,
        noise_psd=cfg.noise_psd,
    )
    return TrialResult(
        scheme=scheme,
        plan_rate=result.plan_value,
        integrated_rate=alloc.integrated_rate(
            result.plan, grid, cfg.noise_psd, cfg.ce.step
        ),
        active_aps=_active_count(scheme, mask, aps, cfg, result.plan),
        plan=result.plan,
        incumbent_value=result.incumbent_value,
        scenario_digest=scenario_digest(aps),
    )


def equal_allocation_trial(aps, cfg: ScenarioConfig) -> TrialResult:
    """MRT over all APs with n_sub equal-width, evenly spaced subchannels.

    Rated by the integrated metric: the equal plan ignores the flatness
    constraint, so the center-RSS objective would overstate its rate.
    """
    n_sub = cfg.ce.n_sub
    spacing = (cfg.f_upper - cfg.f_co) / n_sub
    width = cfg.b_total / n_sub
    if width > spacing:
        raise ValueError(
            f"equal plan overlaps: width {width:.3e} exceeds spacing {spacing:.3e}"
        )
    mask = selection.select_mrt(aps)
    rss_fn = selection.rss_function(mask, aps, cfg.p, cfg.antenna, cfg.gamma_th)
    grid = GridRss(rss_fn, cfg.band, cfg.ce.step)
    centers = cfg.f_co + (np.arange(1, n_sub + 1) - 0.5) * spacing
    channels = tuple(alloc.Subchannel(c, width) for c in centers)
    plan = alloc.SubchannelPlan(channels, cfg.b_total)
    irate = alloc.integrated_rate(plan, grid, cfg.noise_psd, cfg.ce.step)
    return TrialResult(
        scheme="equal_mrt",
        plan_rate=alloc.plan_rate(plan, grid, cfg.noise_psd),
        integrated_rate=irate,
        active_aps=len(aps),
        plan=plan,
        incumbent_value=irate,
        scenario_digest=scenario_digest(aps),
    )


def equal_allocation_baseline(aps, cfg: ScenarioConfig) -> float:
    """Integrated rate of the equal-bandwidth MRT baseline [bit/s]."""
    return equal_allocation_trial(aps, cfg).integrated_rate


def colocated_trial(draw_rng, ce_rng, cfg: ScenarioConfig) -> TrialResult:
    """All n_aps antennas share one random site: a single (d, theta) draw,
    MRT combining (N identical links), then the usual CE allocation."""
    d = draw_rng.uniform(cfg.d_min, cfg.radius)
    theta = draw_rng.uniform(cfg.angle_guard, np.pi / 2 - cfg.angle_guard)
    aps = [AccessPoint(i, d, theta) for i in range(cfg.n_aps)]
    result = run_trial(aps, "mrt", cfg, ce_rng)
    return replace(result, scheme="colocated")


def colocated_baseline(rng, cfg: ScenarioConfig) -> float:
    """Rate of the co-located MRT baseline [bit/s]; rng drives both the
    site draw and the CE stream."""
    return colocated_trial(rng, rng, cfg).plan_rate


def _headline_rate(result: TrialResult) -> float:
    # equal_mrt is rated by the integral; everything else by the objective
    return result.integrated_rate if result.scheme == "equal_mrt" else result.plan_rate


def _trial_cell(cfg: ScenarioConfig, axis_idx: int, trial_idx: int):
    """All configured schemes on one shared scenario and CE stream."""

    def rng_for(tag):
        return np.random.default_rng(
            np.random.SeedSequence([cfg.seed, axis_idx, trial_idx, tag])
        )

    aps = generate_scenario(rng_for(_STREAM_SCENARIO), cfg)
    out = {}
    for scheme in cfg.schemes:
        if scheme == "equal_mrt":
            out[scheme] = equal_allocation_trial(aps, cfg)
        elif scheme == "colocated":
            out[scheme] = colocated_trial(
                rng_for(_STREAM_COLOCATED), rng_for(_STREAM_CE), cfg
            )
        else:
            out[scheme] = run_trial(aps, scheme, cfg, rng_for(_STREAM_CE))
    return out


def _with_axis_value(cfg, axis, value):
    if axis == "n_aps":
        return replace(cfg, n_aps=int(value))
    if axis == "b_total":
        return replace(cfg, b_total=float(value))
    raise ValueError(f"axis must be 'n_aps' or 'b_total', got {axis!r}")


def monte_carlo(cfg: ScenarioConfig, axis, values, threads=1) -> SweepResult:
    """Sweep `axis` over `values`, running cfg.trials trials per point.

    Results are a deterministic function of (cfg, seed) regardless of the
    thread count: every trial owns its substream and aggregation is ordered
    by trial index.
    """
    rows = []
    for axis_idx, value in enumerate(values):
        cfg_v = _with_axis_value(cfg, axis, value)
        jobs = range(cfg_v.trials)
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                cells = list(pool.map(lambda t: _trial_cell(cfg_v, axis_idx, t), jobs))
        else:
            cells = [_trial_cell(cfg_v, axis_idx, t) for t in jobs]
        for scheme in cfg_v.schemes:
            rates = np.array([_headline_rate(cell[scheme]) for cell in cells])
            active = np.array([cell[scheme].active_aps for cell in cells], dtype=float)
            stderr = (
                float(rates.std(ddof=1) / np.sqrt(rates.size)) if rates.size > 1 else 0.0
            )
            rows.append(
                SweepRow(
                    axis=axis,
                    axis_value=float(value),
                    scheme=scheme,
                    mean_rate=float(rates.mean()),
                    stderr_rate=stderr,
                    mean_active_aps=float(active.mean()),
                    trials=int(rates.size),
                )
            )
    return SweepResult(axis=axis, rows=rows)
