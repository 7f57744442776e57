"""Seeded Monte Carlo of the nested PME repeater.

Time model ("attempt-slotted"): local PME generation is a geometric process
with slots of ``1/r``; every basic-link attempt and every swap attempt costs
``L0/c`` for classical heralding. A level-``i`` link waits for two
independent level-``i-1`` links, then tries a swap; a failed swap discards
both sub-links. In the "continuous" model the local wait per link attempt is
exponential with rate ``r p_r`` instead of slotted.

Trials are cut into chunks of `CHUNK_SIZE`; chunk ``k`` draws from the
``k``-th child of ``numpy.random.SeedSequence(seed)``. The result therefore
depends on the seed only, not on how many workers process the chunks.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .analytics import ProtocolParams, local_success, link_success, swap_success, total_time

CHUNK_SIZE = 4096
RATIO_BAND = (0.75, 1.35)
TIME_MODELS = ("attempt-slotted", "continuous")


@dataclass(frozen=True)
class LinkModel:
    """Stage probabilities and timings driving the Monte Carlo."""

    n: int
    p_r: float
    p_b: float
    p_swap: float
    slot_time: float
    hop_time: float

    def __post_init__(self):
        for name in ("p_r", "p_b", "p_swap"):
            p = getattr(self, name)
            if not 0 < p <= 1:
                raise ValueError(f"{name}={p} must lie in (0, 1] for a finite simulation")
        if self.n < 0 or self.slot_time < 0 or self.hop_time < 0:
            raise ValueError("n, slot_time and hop_time must be non-negative")

    @classmethod
    def from_params(cls, params: ProtocolParams) -> "LinkModel":
        return cls(
            n=params.n,
            p_r=local_success(params),
            p_b=link_success(params),
            p_swap=swap_success(params),
            slot_time=1 / params.r,
            hop_time=params.L0 / params.c,
        )

    def expected_level_time(self, level: int) -> float:
        """Closed form at ``level``: exact for level 0, the (3/2)^n estimate above."""
        base = (self.hop_time + self.slot_time / self.p_r) / self.p_b
        return base * (1.5 / self.p_swap) ** level


@dataclass(frozen=True)
class SimConfig:
    params: ProtocolParams
    trials: int = 10_000
    seed: int = 0
    memory_coherence_time: float | None = None
    time_model: str = "attempt-slotted"
    workers: int = 1

    def __post_init__(self):
        if isinstance(self.trials, bool) or int(self.trials) != self.trials or self.trials < 1:
            raise ValueError(f"trials={self.trials} must be a positive integer")
        if isinstance(self.seed, bool) or int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise ValueError(f"seed={self.seed} must be an unsigned 64-bit integer")
        if self.memory_coherence_time is not None and not self.memory_coherence_time > 0:
            raise ValueError("memory_coherence_time must be positive when set")
        if self.time_model not in TIME_MODELS:
            raise ValueError(f"time_model must be one of {TIME_MODELS}")
        if int(self.workers) != self.workers or self.workers < 1:
            raise ValueError("workers must be a positive integer")


@dataclass(frozen=True)
class SimOutcome:
    n: int
    trials: int
    seed: int
    mean_total_time: float
    std_error: float
    attempts_per_level: tuple[int, ...]
    links_per_level: tuple[int, ...]
    level_mean: tuple[float, ...]
    level_std_error: tuple[float, ...]

    @property
    def success_rate_conditional(self) -> tuple[float, ...]:
        """Successful links per attempt at each level (estimates p_b, p_1, ...)."""
        return tuple(k / a for k, a in zip(self.links_per_level, self.attempts_per_level))

    def as_dict(self) -> dict:
        d = asdict(self)
        d["success_rate_conditional"] = self.success_rate_conditional
        return d


def geometric(rng: np.random.Generator, p: float, size: int) -> np.ndarray:
    """Number of Bernoulli(p) trials up to the first success, by inversion."""
    if p == 1:
        return np.ones(size, dtype=np.int64)
    u = rng.random(size)
    return (np.floor(np.log1p(-u) / math.log1p(-p)) + 1).astype(np.int64)


@dataclass
class _LevelStats:
    attempts: np.ndarray
    links: np.ndarray
    count: np.ndarray
    mean: np.ndarray
    m2: np.ndarray

    @classmethod
    def empty(cls, levels: int) -> "_LevelStats":
        return cls(*(np.zeros(levels, dtype=dt) for dt in (np.int64, np.int64, np.int64, float, float)))

    def record(self, level: int, times: np.ndarray) -> None:
        self._merge(level, times.size, float(times.mean()), float(((times - times.mean()) ** 2).sum()))

    def _merge(self, level: int, nb: int, mb: float, m2b: float) -> None:
        na, ma = int(self.count[level]), float(self.mean[level])
        n = na + nb
        delta = mb - ma
        self.mean[level] = ma + delta * nb / n
        self.m2[level] += m2b + delta**2 * na * nb / n
        self.count[level] = n

    def absorb(self, other: "_LevelStats") -> None:
        self.attempts += other.attempts
        self.links += other.links
        for lvl in range(len(self.count)):
            if other.count[lvl]:
                self._merge(lvl, int(other.count[lvl]), float(other.mean[lvl]), float(other.m2[lvl]))


@dataclass
class _Sampler:
    model: LinkModel
    rng: np.random.Generator
    stats: _LevelStats
    tau: float | None = None
    continuous: bool = False

    def level0(self, size: int) -> np.ndarray:
        m = self.model
        k = geometric(self.rng, m.p_b, size)
        if self.continuous:
            local = self.rng.gamma(k, m.slot_time / m.p_r)
        elif m.p_r == 1:
            local = k * m.slot_time
        else:
            # sum of k geometric(p_r) slot counts
            local = (k + self.rng.negative_binomial(k, m.p_r)) * m.slot_time
        times = local + k * m.hop_time
        self.stats.attempts[0] += int(k.sum())
        return times

    def sample(self, level: int, size: int) -> np.ndarray:
        if level == 0:
            times = self.level0(size)
        else:
            times = np.zeros(size)
            active = np.arange(size)
            m = self.model
            while active.size:
                a = self.sample(level - 1, active.size)
                b = self.sample(level - 1, active.size)
                times[active] += np.maximum(a, b) + m.hop_time
                ok = self.rng.random(active.size) < m.p_swap
                if self.tau is not None:
                    # the earlier sub-link idles for |a - b| in memory
                    ok &= self.rng.random(active.size) < np.exp(-np.abs(a - b) / self.tau)
                self.stats.attempts[level] += active.size
                active = active[~ok]
        self.stats.links[level] += size
        self.stats.record(level, times)
        return times


def _run_chunk(task) -> tuple[np.ndarray, _LevelStats]:
    model, level, size, seed_seq, tau, continuous = task
    stats = _LevelStats.empty(level + 1)
    sampler = _Sampler(model, np.random.default_rng(seed_seq), stats, tau, continuous)
    return sampler.sample(level, size), stats


def simulate_model(
    model: LinkModel,
    level: int,
    trials: int,
    seed: int = 0,
    memory_coherence_time: float | None = None,
    time_model: str = "attempt-slotted",
    workers: int = 1,
) -> SimOutcome:
    """Monte Carlo of a level-``level`` link for an explicit `LinkModel`."""
    if time_model not in TIME_MODELS:
        raise ValueError(f"time_model must be one of {TIME_MODELS}")
    sizes = [CHUNK_SIZE] * (trials // CHUNK_SIZE)
    if trials % CHUNK_SIZE:
        sizes.append(trials % CHUNK_SIZE)
    seeds = np.random.SeedSequence(seed).spawn(len(sizes))
    tasks = [
        (model, level, size, s, memory_coherence_time, time_model == "continuous")
        for size, s in zip(sizes, seeds)
    ]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
            results = list(pool.map(_run_chunk, tasks))
    else:
        results = [_run_chunk(t) for t in tasks]

    times = np.concatenate([r[0] for r in results])
    stats = _LevelStats.empty(level + 1)
    for _, s in results:
        stats.absorb(s)
    std = times.std(ddof=1) if trials > 1 else 0.0
    level_se = tuple(
        float(math.sqrt(m2 / (c - 1) / c)) if c > 1 else 0.0 for m2, c in zip(stats.m2, stats.count)
    )
    return SimOutcome(
        n=level,
        trials=trials,
        seed=seed,
        mean_total_time=float(times.mean()),
        std_error=float(std / math.sqrt(trials)),
        attempts_per_level=tuple(int(x) for x in stats.attempts),
        links_per_level=tuple(int(x) for x in stats.links),
        level_mean=tuple(float(x) for x in stats.mean),
        level_std_error=level_se,
    )


def _simulate(cfg: SimConfig, level: int) -> SimOutcome:
    return simulate_model(
        LinkModel.from_params(cfg.params),
        level,
        cfg.trials,
        cfg.seed,
        cfg.memory_coherence_time,
        cfg.time_model,
        cfg.workers,
    )


def simulate_basic_link(cfg: SimConfig) -> SimOutcome:
    """Time to one elementary link (level 0) of length ``L0``."""
    return _simulate(cfg, 0)


def simulate_nested(cfg: SimConfig) -> SimOutcome:
    """Time to a PME state over ``L_n = 2^n L0``."""
    if cfg.params.n < 1:
        raise ValueError("nested simulation needs n >= 1; use simulate_basic_link for n = 0")
    return _simulate(cfg, cfg.params.n)


@dataclass(frozen=True)
class ConvergenceRow:
    level: int
    samples: int
    mc_mean: float
    std_error: float
    analytic: float
    ratio: float
    ratio_low: float
    ratio_high: float
    within: bool

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class ConvergenceReport:
    outcome: SimOutcome
    rows: tuple[ConvergenceRow, ...]
    band: tuple[float, float] = field(default=RATIO_BAND)

    @property
    def ok(self) -> bool:
        return all(r.within for r in self.rows)


def convergence_report(cfg: SimConfig, outcome: SimOutcome | None = None, band=RATIO_BAND) -> ConvergenceReport:
    """Compare Monte Carlo means per level with the closed-form total time.

    Every sub-link drawn while building the top level is an independent draw
    of its level, so one run yields an estimate for each level ``0..n``. At
    level 0 the closed form is exact and a row passes when it lies within
    3 standard errors; above that the ratio must fall inside ``band``.
    """
    if outcome is None:
        outcome = simulate_basic_link(cfg) if cfg.params.n == 0 else simulate_nested(cfg)
    rows = []
    for level in range(outcome.n + 1):
        analytic = total_time(cfg.params.at_level(level))
        mean, se = outcome.level_mean[level], outcome.level_std_error[level]
        ratio = mean / analytic
        lo, hi = (mean - 3 * se) / analytic, (mean + 3 * se) / analytic
        within = lo <= 1 <= hi if level == 0 else band[0] <= ratio <= band[1]
        rows.append(
            ConvergenceRow(level, int(outcome.links_per_level[level]), mean, se, analytic, ratio, lo, hi, within)
        )
    return ConvergenceReport(outcome, tuple(rows), tuple(band))
