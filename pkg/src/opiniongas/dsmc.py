"""Direct-simulation Monte Carlo solver for the bounded opinion gas.

N equal-weight particles carry momenta p_i (the dp-measure sample of the
distribution, N^0 = 1 at all times). One time step applies, in order,

1. collision_step - no-time-counter pair selection: the per-unordered-pair
   exchange rate is k(i,j) = A c0/N * g(i,j) with the Moller velocity
   g <= 2 as the exact majorant and c0 = N^0 = 1 the reference density.
   We draw M = round_stochastic(A c0 (N-1) dt) ordered candidate pairs
   uniformly with replacement (i = j draws are harmless: g = 0), accept
   each with probability g/2 measured from the *current* momenta, and
   apply the direct exchange rule with a fresh uniform kick
   delta = delta_amp (2W - 1). Candidates are processed in draw order;
   a conflict-free "rounds" schedule makes that sequential semantics
   vectorizable without changing any result.
2. vlasov_step - the external-party drift integrated exactly over dt:
   p <- P + (p - P) e^{-B dt}, P = m_p gamma(m_p).

Determinism: all randomness comes from the generator stored on the
ensemble, consumed in a fixed documented order per step (candidate count
coin, pair indices, kick uniforms, acceptance uniforms), so a (config,
seed) pair reproduces the run bit-exactly in this single-threaded mode.

The default time step keeps A c0 dt <= 0.1 (expected exchange candidates
per particle per step <= 0.2), which holds the Lie-splitting error below
Monte Carlo noise.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .diagnostics import FlowState, HistogramPair, _mj_opinion_density, histogram_vs_mj, measure_flow
from .equilibrium import MjState, mj_sample
from .kinematics import TwoVector, gamma_of_opinion, opinion_to_momentum
from .specfun import bessel_k_ratio

__all__ = [
    "UniformRanges",
    "EquilibriumInitial",
    "SimConfig",
    "EnsembleState",
    "RunSummary",
    "MemorySink",
    "default_dt",
    "init_ensemble",
    "collision_step",
    "vlasov_step",
    "advance",
    "run",
]

KERNELS = ("moller", "moller_over_energies")

MAX_OPINION = 1.0 - 1e-16  # uniform draws clipped here so p stays finite


class MajorantError(RuntimeError):
    """A computed Moller velocity exceeded the exact bound 2."""


class NumericsError(RuntimeError):
    """Non-finite momenta detected; carries a short state dump."""


@dataclass(frozen=True)
class UniformRanges:
    """Opinions drawn uniformly within each (lo, hi) range.

    `weight` is the probability mass of the range (ranges are equally
    populated when weights are equal, regardless of their widths).
    """

    ranges: tuple[tuple[float, float, float], ...]

    def __post_init__(self):
        if not self.ranges:
            raise ValueError("at least one opinion range is required")
        for lo, hi, w in self.ranges:
            # closed +-1 endpoints are allowed: draws are clipped inside (-1, 1)
            if not -1.0 <= lo < hi <= 1.0:
                raise ValueError(f"invalid opinion range ({lo}, {hi})")
            if not w > 0:
                raise ValueError(f"range weight must be positive, got {w}")


@dataclass(frozen=True)
class EquilibriumInitial:
    """Thermal start: momenta sampled from the equilibrium at (chi, mbar)."""

    chi: float
    mbar: float = 0.0

    def __post_init__(self):
        if not self.chi > 0:
            raise ValueError("chi must be positive")
        if not abs(self.mbar) < 1:
            raise ValueError("mean opinion magnitude must be < 1")


InitialCondition = UniformRanges | EquilibriumInitial


def default_dt(a_rate: float, b_rate: float, t_end: float) -> float:
    """Largest step with A*dt <= 0.1 and B*dt <= 0.1 (>= 10 steps per run)."""
    dt = 0.1 / max(a_rate, b_rate, 1e-12)
    return min(dt, t_end / 10.0)


@dataclass(frozen=True)
class SimConfig:
    """Complete run description; see module docstring for the semantics."""

    lambda_: float
    delta_amp: float
    t_end: float
    init: InitialCondition
    a_rate: float = 1.0
    b_rate: float = 0.0
    m_party: float = 0.0
    n_particles: int = 100_000
    dt: float | None = None
    seed: int = 20240801
    output_every: int | None = None
    collision_kernel: str = "moller"

    def __post_init__(self):
        if not 0.0 <= self.lambda_ <= 1.0:
            raise ValueError(f"lambda must be in [0, 1], got {self.lambda_}")
        if self.delta_amp < 0:
            raise ValueError("delta_amp must be >= 0")
        if not self.a_rate > 0:
            raise ValueError("a_rate must be positive")
        if self.b_rate < 0:
            raise ValueError("b_rate must be >= 0")
        if not abs(self.m_party) < 1:
            raise ValueError("m_party magnitude must be < 1")
        if self.n_particles < 2:
            raise ValueError("need at least two particles")
        if not self.t_end > 0:
            raise ValueError("t_end must be positive")
        if self.dt is not None and not 0 < self.dt <= self.t_end:
            raise ValueError("dt must be positive and at most t_end")
        if self.output_every is not None and self.output_every < 1:
            raise ValueError("output_every must be a positive integer")
        if self.collision_kernel not in KERNELS:
            raise ValueError(f"collision_kernel must be one of {KERNELS}")

    @property
    def step(self) -> float:
        return self.dt if self.dt is not None else default_dt(self.a_rate, self.b_rate, self.t_end)

    @property
    def party_momentum(self) -> float:
        return opinion_to_momentum(self.m_party)


@dataclass
class EnsembleState:
    """Particle population, simulation clock, RNG state, and telemetry."""

    momenta: np.ndarray
    time: float
    rng: np.random.Generator
    collision_count: int = 0
    candidate_count: int = 0
    _sched_buf: np.ndarray | None = field(default=None, repr=False)

    @property
    def n_particles(self) -> int:
        return int(self.momenta.size)

    @property
    def acceptance_ratio(self) -> float:
        return self.collision_count / self.candidate_count if self.candidate_count else 0.0


def init_ensemble(config: SimConfig) -> EnsembleState:
    """Deterministically populate the ensemble from the configured start."""
    rng = np.random.default_rng(config.seed)
    n = config.n_particles
    init = config.init
    if isinstance(init, EquilibriumInitial):
        p = mj_sample(MjState(n=1.0, ubar=init.mbar, chi=init.chi), rng, size=n)
    else:
        weights = np.array([r[2] for r in init.ranges], dtype=float)
        weights /= weights.sum()
        which = rng.choice(len(init.ranges), size=n, p=weights)
        lo = np.array([r[0] for r in init.ranges])[which]
        hi = np.array([r[1] for r in init.ranges])[which]
        m = lo + rng.random(n) * (hi - lo)
        m = np.clip(m, -MAX_OPINION, MAX_OPINION)
        p = opinion_to_momentum(m)
    return EnsembleState(momenta=np.asarray(p, dtype=float), time=0.0, rng=rng)


def _schedule_rounds(ii: np.ndarray, jj: np.ndarray, first: np.ndarray):
    """Partition candidates into rounds with no particle repeated per round.

    Candidate k lands in the earliest round after every earlier candidate
    sharing a particle with it, so executing rounds in order reproduces
    strict draw-order sequential processing.
    """
    m = ii.size
    remaining = np.arange(m)
    while remaining.size:
        first.fill(m)
        np.minimum.at(first, ii[remaining], remaining)
        np.minimum.at(first, jj[remaining], remaining)
        ready = (first[ii[remaining]] == remaining) & (first[jj[remaining]] == remaining)
        yield remaining[ready]
        remaining = remaining[~ready]


def collision_step(state: EnsembleState, config: SimConfig, dt: float) -> EnsembleState:
    """One no-time-counter collision sweep of length dt (mutates state)."""
    p = state.momenta
    n = p.size
    rng = state.rng
    half = 0.5 * (1.0 + config.lambda_)
    over_energies = config.collision_kernel == "moller_over_energies"

    m_real = config.a_rate * (n - 1) * dt  # c0 = N^0 = 1
    m_cand = int(m_real) + (1 if rng.random() < m_real - int(m_real) else 0)
    if m_cand == 0:
        return state
    ii = rng.integers(0, n, m_cand)
    jj = rng.integers(0, n, m_cand)
    deltas = config.delta_amp * (2.0 * rng.random(m_cand) - 1.0)
    u_acc = 2.0 * rng.random(m_cand)  # accept when u_acc < g

    if state._sched_buf is None or state._sched_buf.size != n:
        state._sched_buf = np.empty(n, dtype=np.int64)

    accepted = 0
    for batch in _schedule_rounds(ii, jj, state._sched_buf):
        bi, bj = ii[batch], jj[batch]
        pi, pj = p[bi], p[bj]
        ei = np.sqrt(1.0 + pi * pi)
        ej = np.sqrt(1.0 + pj * pj)
        g = np.abs(pi * ej - pj * ei) / (ei * ej)
        if np.any(g > 2.0 + 1e-12):
            raise MajorantError(f"Moller velocity {g.max()} exceeds the exact bound 2")
        if over_energies:
            g = g / (ei * ej)
        acc = u_acc[batch] < g
        if not np.any(acc):
            continue
        sel = batch[acc]
        bi, bj = ii[sel], jj[sel]
        h = half * (p[bj] - p[bi] + deltas[sel])
        p[bi] += h
        p[bj] -= h
        accepted += int(acc.sum())

    state.candidate_count += m_cand
    state.collision_count += accepted
    return state


def vlasov_step(state: EnsembleState, config: SimConfig, dt: float) -> EnsembleState:
    """Exact drift toward the party momentum: p <- P + (p - P) e^{-B dt}."""
    if config.b_rate > 0.0:
        decay = np.exp(-config.b_rate * dt)
        pp = config.party_momentum
        state.momenta[:] = pp + (state.momenta - pp) * decay
    return state


def advance(state: EnsembleState, config: SimConfig, dt: float) -> EnsembleState:
    """Lie splitting: collisions then drift; advances the clock by dt."""
    collision_step(state, config, dt)
    vlasov_step(state, config, dt)
    state.time += dt
    return state


class MemorySink:
    """Default diagnostics consumer: collects FlowState records in a list."""

    def __init__(self):
        self.records: list[FlowState] = []

    def emit(self, fs: FlowState) -> None:
        self.records.append(fs)


@dataclass
class RunSummary:
    """Everything a scenario needs to persist or assert on after a run."""

    config: SimConfig
    flow_states: list[FlowState]
    final_histogram: HistogramPair
    tail_histogram: HistogramPair | None
    tail_window_start: float
    collision_count: int
    candidate_count: int
    snapshots: dict[float, HistogramPair]

    @property
    def final(self) -> FlowState:
        return self.flow_states[-1]


def _check_finite(state: EnsembleState, config: SimConfig) -> None:
    bad = ~np.isfinite(state.momenta)
    if bad.any():
        k = int(bad.sum())
        raise NumericsError(
            f"{k} non-finite momenta at t={state.time:.6g} "
            f"(first index {int(np.argmax(bad))}, collisions so far {state.collision_count}, "
            f"config {config})"
        )


def run(config: SimConfig, sink=None, histogram_bins: int = 80,
        tail_fraction: float = 0.2, snapshot_times=()) -> RunSummary:
    """Step the ensemble from 0 to t_end, emitting FlowState records.

    A FlowState goes to the sink every `output_every` steps (default:
    about 400 rows per run). Over the final `tail_fraction` of the run an
    opinion histogram is accumulated at output times; its equilibrium
    reference is evaluated at the tail-averaged flow. `snapshot_times`
    requests opinion histograms at the first step-time reaching each
    entry. Raises NumericsError on non-finite momenta.
    """
    state = init_ensemble(config)
    sink = sink if sink is not None else MemorySink()
    dt = config.step
    n_steps = max(1, int(round(config.t_end / dt)))
    out_every = config.output_every or max(1, n_steps // 400)

    records: list[FlowState] = []

    def emit(fs: FlowState) -> None:
        records.append(fs)
        sink.emit(fs)

    emit(measure_flow(state))

    tail_start = (1.0 - tail_fraction) * config.t_end
    edges = np.linspace(-1.0, 1.0, histogram_bins + 1)
    centers = 0.5 * (edges[1:] + edges[:-1])
    tail_counts = np.zeros(histogram_bins)
    tail_snapshots = 0
    pending_snaps = sorted(float(t) for t in snapshot_times)
    snapshots: dict[float, HistogramPair] = {}

    for step_idx in range(1, n_steps + 1):
        advance(state, config, dt)
        while pending_snaps and state.time >= pending_snaps[0] - 0.5 * dt:
            snapshots[pending_snaps.pop(0)] = histogram_vs_mj(state, bins=histogram_bins)
        at_output = step_idx % out_every == 0 or step_idx == n_steps
        if not at_output:
            continue
        _check_finite(state, config)
        emit(measure_flow(state))
        if state.time >= tail_start:
            m = state.momenta / np.sqrt(1.0 + state.momenta**2)
            tail_counts += np.histogram(m, bins=edges)[0]
            tail_snapshots += 1

    final_hist = histogram_vs_mj(state, bins=histogram_bins)
    tail_hist = None
    if tail_snapshots:
        f_emp = tail_counts / (tail_counts.sum() * (edges[1] - edges[0]))
        tail_flow = tail_mean(records, tail_fraction, config.t_end)
        tail_hist = HistogramPair(centers=centers, f=f_emp,
                                  f_mj=_mj_opinion_density(edges, tail_flow))

    return RunSummary(
        config=config,
        flow_states=records,
        final_histogram=final_hist,
        tail_histogram=tail_hist,
        tail_window_start=tail_start,
        collision_count=state.collision_count,
        candidate_count=state.candidate_count,
        snapshots=snapshots,
    )


def tail_mean(records: list[FlowState], tail_fraction: float, t_end: float) -> FlowState:
    """Time-averaged FlowState over the final fraction of the run.

    Vector/derived fields (u, c_param) are rebuilt from the averaged mbar
    and chi so the result is self-consistent.
    """
    t0 = (1.0 - tail_fraction) * t_end
    window = [r for r in records if r.t >= t0] or records[-1:]

    def avg(attr):
        return float(np.mean([getattr(r, attr) for r in window]))

    mbar = avg("mbar")
    chi = avg("chi")
    g = gamma_of_opinion(mbar)
    return FlowState(
        t=avg("t"), n=avg("n"), mbar=mbar, u=TwoVector(g, g * mbar),
        chi=chi, theta=1.0 / chi, pi_dyn=avg("pi_dyn"), q1=avg("q1"),
        pi11=avg("pi11"), phi=avg("phi"),
        c_param=float(g * mbar * bessel_k_ratio(2, 1, chi)),
        cold=all(r.cold for r in window),
    )


def is_stationary(records: list[FlowState], attr: str = "chi",
                  tail_fraction: float = 0.2, z_threshold: float = 3.0) -> bool:
    """Crude stationarity check: the two halves of the tail window agree.

    Compares half-window means of `attr` against the pooled standard error.
    """
    if len(records) < 8:
        return False
    t_end = records[-1].t
    t0 = (1.0 - tail_fraction) * t_end
    vals = np.array([getattr(r, attr) for r in records if r.t >= t0])
    if vals.size < 6:
        return False
    a, b = np.array_split(vals, 2)
    pooled = np.std(vals, ddof=1) / np.sqrt(vals.size) + 1e-300
    return bool(abs(a.mean() - b.mean()) <= z_threshold * pooled)
