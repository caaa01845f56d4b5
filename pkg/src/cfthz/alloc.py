"""Subchannel construction and the cross-entropy allocator.

A subchannel plan is a disjoint set of (center, width) intervals inside the
usable band whose widths sum to at most the bandwidth budget and whose
edge-to-edge RSS difference stays below a flatness tolerance (in dB). Plans
are built per candidate center vector by a one-dimensional bandwidth
search, overlap resolution in favor of the stronger subchannel, and a
budget trim that grants bandwidth to the strongest subchannels first. The cross-entropy loop fits per-subchannel
Gaussians over center frequencies to elite samples with smoothed MLE
updates.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

# Chunk length for the expanding bandwidth search against a generic callable.
_SEARCH_CHUNK = 128
# Resampling attempts before out-of-band Gaussian draws get clamped.
_MAX_RESAMPLE = 50


@dataclass(frozen=True)
class Subchannel:
    center: float  # Hz
    width: float  # Hz, >= 0

    def __post_init__(self):
        if self.width < 0:
            raise ValueError(f"width must be >= 0, got {self.width}")

    @property
    def low(self):
        return self.center - self.width / 2.0

    @property
    def high(self):
        return self.center + self.width / 2.0


@dataclass(frozen=True)
class SubchannelPlan:
    channels: tuple
    total_budget: float  # Hz

    @property
    def total_width(self):
        return sum(ch.width for ch in self.channels)

    def validate(self, band=None, atol=1e-3):
        """Raise if disjointness, the budget, or band containment fails."""
        if self.total_width > self.total_budget * (1 + 1e-12) + atol:
            raise ValueError(
                f"total width {self.total_width:.6e} exceeds budget {self.total_budget:.6e}"
            )
        occupied = sorted(
            (ch.low, ch.high) for ch in self.channels if ch.width > 0
        )
        for (_, hi), (lo, _) in zip(occupied, occupied[1:]):
            if lo < hi - atol:
                raise ValueError(f"overlapping subchannels near {lo:.6e} Hz")
        if band is not None:
            lo_b, hi_b = band
            for ch in self.channels:
                if ch.width > 0 and (ch.low < lo_b - atol or ch.high > hi_b + atol):
                    raise ValueError(
                        f"subchannel [{ch.low:.6e}, {ch.high:.6e}] outside band"
                    )


@dataclass
class CEConfig:
    """Cross-entropy hyperparameters and the bandwidth-search grid."""

    n_sub: int = 40  # number of subchannels
    samples: int = 100  # Gaussian samples per iteration
    elites: int = 10  # elite samples kept for the MLE update
    smooth_mean: float = 0.8  # alpha
    smooth_var: float = 0.7  # beta
    smooth_power: float = 5.0  # q in the variance-smoothing schedule
    max_iter: int = 30
    step: float = 10e6  # Hz, bandwidth-search grid

    def __post_init__(self):
        if not 1 <= self.elites <= self.samples:
            raise ValueError("need 1 <= elites <= samples")
        if not 0 < self.smooth_mean <= 1:
            raise ValueError("smooth_mean must be in (0, 1]")
        if not 0 < self.smooth_var <= 1:
            raise ValueError("smooth_var must be in (0, 1]")
        if self.smooth_power <= 0:
            raise ValueError("smooth_power must be > 0")
        if self.step <= 0:
            raise ValueError("step must be > 0")
        if self.n_sub < 1:
            raise ValueError("n_sub must be >= 1")


@dataclass
class CEState:
    means: np.ndarray  # Hz
    vars: np.ndarray  # Hz^2
    band: tuple
    iter: int = 0
    incumbent_plan: SubchannelPlan | None = None
    incumbent_value: float = -np.inf


@dataclass
class CEResult:
    plan: SubchannelPlan  # built from the final means
    plan_value: float
    incumbent_plan: SubchannelPlan
    incumbent_value: float
    best_per_iter: np.ndarray  # best sampled objective at each iteration
    incumbent_trace: np.ndarray  # running best-ever objective
    state: CEState


class GridRss:
    """RSS samples cached on a uniform frequency grid over the band.

    Calling it looks frequencies up by nearest grid index, so the allocator
    snaps candidate centers to this grid before searching bandwidths.
    """

    def __init__(self, rss_fn, band, step):
        self.band = (float(band[0]), float(band[1]))
        self.step = float(step)
        n = int(np.floor((self.band[1] - self.band[0]) / self.step + 1e-9)) + 1
        self.freqs = self.band[0] + self.step * np.arange(n)
        self.values = np.asarray(rss_fn(self.freqs), dtype=float)
        with np.errstate(divide="ignore"):
            self.db = 10.0 * np.log10(self.values)

    def index_of(self, f):
        idx = np.round((np.asarray(f, dtype=float) - self.band[0]) / self.step)
        return np.clip(idx.astype(int), 0, self.freqs.size - 1)

    def snap(self, f):
        return self.freqs[self.index_of(f)]

    def __call__(self, f):
        out = self.values[self.index_of(f)]
        return float(out) if np.ndim(f) == 0 else out


def _edge_pair_ok(g_lo, g_hi, eps_db):
    """C3 check on one pair of edge values; a dead edge stops expansion."""
    dead = (g_lo <= 0) | (g_hi <= 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        diff = np.abs(10.0 * np.log10(g_lo) - 10.0 * np.log10(g_hi))
    flat = diff == 0.0
    return ~dead & (flat | (diff < eps_db))


def coherence_search(rss_fn, center, eps_db, band, step, max_width=None):
    """Largest grid width 2k*step whose edges stay in band and satisfy the
    edge-to-edge dB flatness bound; returns the value preceding the first
    violation. A zero RSS at the center marks a dead subchannel (width 0).
    """
    lo_b, hi_b = band
    if not lo_b <= center <= hi_b:
        raise ValueError(f"center {center} outside band [{lo_b}, {hi_b}]")
    if float(rss_fn(center)) <= 0.0:
        return 0.0
    k_max = int(min((center - lo_b), (hi_b - center)) / step + 1e-9)
    if max_width is not None:
        k_max = min(k_max, int(max_width / (2 * step) + 1e-9))
    k = 1
    while k <= k_max:
        ks = np.arange(k, min(k + _SEARCH_CHUNK, k_max + 1))
        g_lo = np.atleast_1d(rss_fn(center - ks * step))
        g_hi = np.atleast_1d(rss_fn(center + ks * step))
        ok = _edge_pair_ok(g_lo, g_hi, eps_db)
        if not ok.all():
            first_bad = ks[int(np.argmin(ok))]
            return 2.0 * (first_bad - 1) * step
        k = ks[-1] + 1
    return 2.0 * k_max * step


def _grid_widths(grid: GridRss, centers_idx, eps_db, max_width=None):
    """Vectorized coherence search for many grid-aligned centers at once."""
    n = grid.values.size
    idx = np.atleast_1d(centers_idx)
    k_cap = np.minimum(idx, n - 1 - idx)
    if max_width is not None:
        k_cap = np.minimum(k_cap, int(max_width / (2 * grid.step) + 1e-9))
    k_hi = int(k_cap.max(initial=0))
    if k_hi == 0:
        return np.zeros(idx.shape)
    ks = np.arange(1, k_hi + 1)
    left = np.clip(idx[:, None] - ks[None, :], 0, n - 1)
    right = np.clip(idx[:, None] + ks[None, :], 0, n - 1)
    ok = _edge_pair_ok(grid.values[left], grid.values[right], eps_db)
    ok &= ks[None, :] <= k_cap[:, None]
    # number of leading True entries per row = widest admissible k
    bad = ~ok
    first_bad = np.where(bad.any(axis=1), bad.argmax(axis=1), k_hi)
    widths = 2.0 * first_bad * grid.step
    widths[grid.values[idx] <= 0.0] = 0.0
    return widths


def _eval_rss(rss_fn, f_arr):
    """Evaluate an rss callable on an array, tolerating scalar-only ones."""
    try:
        out = np.asarray(rss_fn(f_arr), dtype=float)
        if out.shape == f_arr.shape:
            return out
    except (TypeError, ValueError):
        pass
    return np.array([float(rss_fn(f)) for f in f_arr])


def resolve_overlaps(raw, rss_fn):
    """Make the channels pairwise disjoint, resolving each overlap in favor
    of the channel with the larger RSS at its center (lower index on ties).

    The loser keeps the part of its interval on its center's side of the
    winner's edge; a loser whose center falls inside a winner gets width 0.
    Output order matches the input order.
    """
    raw = list(raw)
    center_rss = _eval_rss(rss_fn, np.array([ch.center for ch in raw]))
    order = sorted(range(len(raw)), key=lambda j: (-center_rss[j], j))
    claimed = []  # disjoint (lo, hi) intervals of already-placed winners
    resolved = [None] * len(raw)
    for j in order:
        lo, hi = raw[j].low, raw[j].high
        center = raw[j].center
        if raw[j].width > 0:
            for c_lo, c_hi in claimed:
                if c_hi <= lo or c_lo >= hi:
                    continue
                if c_lo < center < c_hi:
                    lo = hi = center  # fully displaced
                    break
                if center <= c_lo:
                    hi = min(hi, c_lo)
                else:
                    lo = max(lo, c_hi)
        width = max(0.0, hi - lo)
        if width > 0:
            claimed.append((lo, hi))
            resolved[j] = Subchannel((lo + hi) / 2.0, width)
        else:
            resolved[j] = Subchannel(center, 0.0)
    return resolved


def enforce_budget(plan: SubchannelPlan) -> SubchannelPlan:
    """Shrink every width proportionally about its center if the summed
    width exceeds the budget; disjoint plans stay disjoint."""
    total = plan.total_width
    if total <= plan.total_budget:
        return plan
    scale = plan.total_budget / total
    channels = tuple(replace(ch, width=ch.width * scale) for ch in plan.channels)
    return SubchannelPlan(channels, plan.total_budget)


def trim_to_budget(plan: SubchannelPlan, rss_fn) -> SubchannelPlan:
    """Enforce the total-bandwidth limit by granting budget in descending
    center-RSS order; the channel at the boundary is trimmed symmetrically
    about its center and weaker ones are dropped.

    This is the enforcement used inside the CE loop: it keeps the strongest
    subchannels whole, which makes sample scores reflect the best channels
    in a sample instead of diluting them (as a proportional shrink would).
    """
    chans = list(plan.channels)
    if sum(ch.width for ch in chans) <= plan.total_budget:
        return plan
    g = _eval_rss(rss_fn, np.array([ch.center for ch in chans]))
    order = sorted(range(len(chans)), key=lambda j: (-g[j], j))
    remaining = plan.total_budget
    out = list(chans)
    for j in order:
        take = min(chans[j].width, max(remaining, 0.0))
        if take < chans[j].width:
            out[j] = Subchannel(chans[j].center, take)
        remaining -= take
    return SubchannelPlan(tuple(out), plan.total_budget)


def plan_rate(plan: SubchannelPlan, rss_fn, noise_psd):
    """Rate objective: sum of width * log2(1 + rss(center)/noise) [bit/s]."""
    if noise_psd <= 0:
        raise ValueError(f"noise_psd must be > 0, got {noise_psd}")
    live = [ch for ch in plan.channels if ch.width > 0]
    if not live:
        return 0.0
    g = _eval_rss(rss_fn, np.array([ch.center for ch in live]))
    widths = np.array([ch.width for ch in live])
    return float(np.sum(widths * np.log2(1.0 + np.maximum(g, 0.0) / noise_psd)))


def integrated_rate(plan: SubchannelPlan, rss_fn, noise_psd, step):
    """Trapezoidal integral of log2(1 + rss(f)/noise) over each channel;
    fair for wide channels where the center-RSS objective overstates."""
    if noise_psd <= 0:
        raise ValueError(f"noise_psd must be > 0, got {noise_psd}")
    rate = 0.0
    for ch in plan.channels:
        if ch.width <= 0:
            continue
        n_pts = max(2, int(np.ceil(ch.width / step)) + 1)
        f = np.linspace(ch.low, ch.high, n_pts)
        spectral = np.log2(1.0 + np.asarray(rss_fn(f), dtype=float) / noise_psd)
        rate += np.trapezoid(spectral, f)
    return rate


def build_plan(centers, rss_fn, eps_db, total_budget, band, step, grid=None):
    """Construct a full plan from candidate centers: bandwidth search,
    overlap resolution, then the budget shrink."""
    centers = np.asarray(centers, dtype=float)
    if grid is not None:
        idx = grid.index_of(centers)
        widths = _grid_widths(grid, idx, eps_db, max_width=total_budget)
        centers = grid.freqs[idx]
        lookup = grid
    else:
        widths = np.array(
            [
                coherence_search(rss_fn, c, eps_db, band, step, max_width=total_budget)
                for c in centers
            ]
        )
        lookup = rss_fn
    raw = [Subchannel(c, w) for c, w in zip(centers, widths)]
    resolved = resolve_overlaps(raw, lookup)
    return trim_to_budget(SubchannelPlan(tuple(resolved), total_budget), lookup)


def ce_init(cfg: CEConfig, band) -> CEState:
    """Evenly spread means over the band; wide common initial variance."""
    lo, hi = band
    if hi <= lo:
        raise ValueError(f"band upper {hi} must exceed lower {lo}")
    i = np.arange(1, cfg.n_sub + 1)
    means = lo + (i - 0.5) * (hi - lo) / cfg.n_sub
    variances = np.full(cfg.n_sub, 16.0 * (hi - lo) ** 2 / cfg.n_sub**2)
    return CEState(means=means, vars=variances, band=(float(lo), float(hi)))


def variance_smoothing(beta, q, t):
    """beta_t = beta - beta * (1 - 1/(t+1))^q."""
    return beta - beta * (1.0 - 1.0 / (t + 1.0)) ** q


def _sample_centers(state: CEState, cfg: CEConfig, rng):
    lo, hi = state.band
    std = np.sqrt(state.vars)
    x = rng.normal(state.means, std, size=(cfg.samples, cfg.n_sub))
    for _ in range(_MAX_RESAMPLE):
        out = (x < lo) | (x > hi)
        if not out.any():
            break
        x[out] = rng.normal(
            np.broadcast_to(state.means, x.shape)[out],
            np.broadcast_to(std, x.shape)[out],
        )
    return np.clip(x, lo, hi)


def ce_iterate(state, rss_fn, cfg, rng, *, eps_db, total_budget, noise_psd, grid=None):
    """One cross-entropy iteration: sample center vectors, build and score
    each plan, refit the Gaussians to the elites with smoothing.

    Returns (new_state, best_objective_this_iteration).
    """
    if state.iter >= cfg.max_iter:
        raise ValueError(f"iteration budget {cfg.max_iter} exhausted")
    samples = _sample_centers(state, cfg, rng)
    scores = np.empty(cfg.samples)
    best_plan, best_score = None, -np.inf
    if grid is not None:
        # batch the bandwidth search over all m*I centers at once
        idx = grid.index_of(samples)
        widths = _grid_widths(grid, idx.ravel(), eps_db, max_width=total_budget)
        widths = widths.reshape(idx.shape)
        snapped = grid.freqs[idx]
        for s in range(cfg.samples):
            raw = [Subchannel(c, w) for c, w in zip(snapped[s], widths[s])]
            plan = trim_to_budget(
                SubchannelPlan(tuple(resolve_overlaps(raw, grid)), total_budget), grid
            )
            scores[s] = plan_rate(plan, grid, noise_psd)
            if scores[s] > best_score:
                best_plan, best_score = plan, scores[s]
    else:
        for s in range(cfg.samples):
            plan = build_plan(
                samples[s], rss_fn, eps_db, total_budget, state.band, cfg.step
            )
            scores[s] = plan_rate(plan, rss_fn, noise_psd)
            if scores[s] > best_score:
                best_plan, best_score = plan, scores[s]
    elite_idx = np.argsort(-scores, kind="stable")[: cfg.elites]
    elites = samples[elite_idx]
    elite_mean = elites.mean(axis=0)
    elite_var = elites.var(axis=0)
    beta_t = variance_smoothing(cfg.smooth_var, cfg.smooth_power, state.iter)
    new_means = cfg.smooth_mean * elite_mean + (1.0 - cfg.smooth_mean) * state.means
    new_vars = beta_t * elite_var + (1.0 - beta_t) * state.vars
    new_vars = np.maximum(new_vars, cfg.step**2)  # keep the sampler proper
    new_state = CEState(
        means=new_means,
        vars=new_vars,
        band=state.band,
        iter=state.iter + 1,
        incumbent_plan=state.incumbent_plan,
        incumbent_value=state.incumbent_value,
    )
    if best_score > state.incumbent_value:
        new_state.incumbent_plan = best_plan
        new_state.incumbent_value = best_score
    return new_state, best_score


def ce_optimize(rss_fn, cfg, band, rng, *, eps_db, total_budget, noise_psd, grid=None):
    """Run the full cross-entropy loop and build the plan from the final
    means. The best-ever sampled plan and the objective traces come along
    as diagnostics."""
    if grid is None:
        grid = rss_fn if isinstance(rss_fn, GridRss) else GridRss(rss_fn, band, cfg.step)
    state = ce_init(cfg, band)
    best_per_iter = np.empty(cfg.max_iter)
    incumbent_trace = np.empty(cfg.max_iter)
    for t in range(cfg.max_iter):
        state, best = ce_iterate(
            state,
            rss_fn,
            cfg,
            rng,
            eps_db=eps_db,
            total_budget=total_budget,
            noise_psd=noise_psd,
            grid=grid,
        )
        best_per_iter[t] = best
        incumbent_trace[t] = state.incumbent_value
    final_plan = build_plan(
        state.means, rss_fn, eps_db, total_budget, band, cfg.step, grid=grid
    )
    final_value = plan_rate(final_plan, grid if grid is not None else rss_fn, noise_psd)
    incumbent = state.incumbent_plan if state.incumbent_plan is not None else final_plan
    incumbent_value = max(state.incumbent_value, final_value)
    return CEResult(
        plan=final_plan,
        plan_value=final_value,
        incumbent_plan=incumbent,
        incumbent_value=incumbent_value,
        best_per_iter=best_per_iter,
        incumbent_trace=incumbent_trace,
        state=state,
    )


def plan_records(plan: SubchannelPlan, rss_fn, noise_psd):
    """Serialize a plan to (index, center_Hz, width_Hz, rss_W_per_Hz,
    rate_bps) records for machine-readable output."""
    records = []
    for i, ch in enumerate(plan.channels):
        g = float(rss_fn(ch.center)) if ch.width > 0 else 0.0
        rate = ch.width * float(np.log2(1.0 + g / noise_psd)) if g > 0 else 0.0
        records.append(
            {
                "index": i,
                "center_hz": ch.center,
                "width_hz": ch.width,
                "rss_w_per_hz": g,
                "rate_bps": rate,
            }
        )
    return records
