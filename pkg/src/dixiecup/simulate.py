"""Monte Carlo estimation of the collection time T.

Replications draw i.i.d. coupons through an alias table (O(1) per draw after
an O(N) build) in vectorized blocks, stopping at the exact draw on which the
last type reaches its m-th copy.  Each replication owns a counter-based RNG
stream keyed by (seed, replication index), so results are bit-identical for a
fixed (seed, reps) regardless of the worker count; per-chunk summaries are
merged in fixed chunk order.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .families import CouponDistribution
from .gumbel import GumbelNormalization

DRAW_CAP = 2**46
_CHUNK_SIZE = 4096  # fixed, so the merge tree never depends on the worker count
_CDF_MAX_POINTS = 512
_MASK64 = 2**64 - 1


class SimulationStall(RuntimeError):
    """A replication exceeded the hard draw cap (RNG pathology guard)."""


class AliasTable:
    """Vose alias method for discrete sampling in O(1) per draw."""

    def __init__(self, probs: np.ndarray):
        n = len(probs)
        scaled = probs * n
        prob = np.ones(n)
        alias = np.arange(n)
        small = [i for i in range(n) if scaled[i] < 1.0]
        large = [i for i in range(n) if scaled[i] >= 1.0]
        scaled = scaled.copy()
        while small and large:
            s = small.pop()
            g = large.pop()
            prob[s] = scaled[s]
            alias[s] = g
            scaled[g] -= 1.0 - scaled[s]
            (small if scaled[g] < 1.0 else large).append(g)
        self.n = n
        self.prob = prob
        self.alias = alias

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Draw `size` type indices; one uniform per draw (split into cell+coin)."""
        x = rng.random(size) * self.n
        idx = x.astype(np.int64)
        frac = x - idx
        return np.where(frac < self.prob[idx], idx, self.alias[idx])


def replication_rng(seed: int, replication: int) -> np.random.Generator:
    """Independent stream for one replication: counter-based RNG keyed by (seed, index)."""
    key = np.array([seed & _MASK64, replication & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _initial_block(dist: CouponDistribution, m: int) -> int:
    n = dist.n_types
    ln_n = math.log(max(n, 2))
    est = n * (ln_n + (m - 1) * max(math.log(ln_n), 0.0) + 1.0) + m + 5 * n
    return max(64, int(est))


def _sample_trial(table: AliasTable, probs: np.ndarray, m: int, rng: np.random.Generator, first_block: int) -> int:
    n = table.n
    counts = np.zeros(n, dtype=np.int64)
    drawn = 0
    block_size = first_block
    while True:
        block = table.sample(rng, block_size)
        new_counts = counts + np.bincount(block, minlength=n)
        if new_counts.min() >= m:
            need = m - counts
            incomplete = np.flatnonzero(need > 0)
            order = np.argsort(block, kind="stable")
            starts = np.searchsorted(block[order], incomplete)
            last = order[starts + need[incomplete] - 1]
            return drawn + int(last.max()) + 1
        counts = new_counts
        drawn += block_size
        if drawn > DRAW_CAP:
            raise SimulationStall(f"no completion after {drawn} draws")
        # Resize toward the slowest remaining type.
        need = m - counts
        open_types = need > 0
        est = 1.5 * float(np.max(need[open_types] / probs[open_types]))
        block_size = min(max(64, int(est)), 2**22)


def sample_trial(dist: CouponDistribution, m: int, rng: np.random.Generator) -> int:
    """Number of draws until every type has appeared at least m times."""
    if m < 1:
        raise ValueError("m must be a positive integer")
    table = AliasTable(dist.probs)
    return _sample_trial(table, dist.probs, m, rng, _initial_block(dist, m))


@dataclass
class _ChunkStats:
    count: int
    mean: float
    m2: float
    t_min: int
    t_max: int
    samples: np.ndarray


def _run_chunk(table: AliasTable, probs: np.ndarray, m: int, seed: int, start: int, stop: int, first_block: int) -> _ChunkStats:
    samples = np.empty(stop - start, dtype=np.int64)
    for i, rep in enumerate(range(start, stop)):
        rng = replication_rng(seed, rep)
        samples[i] = _sample_trial(table, probs, m, rng, first_block)
    mean = float(samples.mean())
    m2 = float(np.sum((samples - mean) ** 2))
    return _ChunkStats(
        count=len(samples),
        mean=mean,
        m2=m2,
        t_min=int(samples.min()),
        t_max=int(samples.max()),
        samples=samples,
    )


def _merge(a: _ChunkStats, b: _ChunkStats) -> _ChunkStats:
    count = a.count + b.count
    delta = b.mean - a.mean
    mean = a.mean + delta * b.count / count
    m2 = a.m2 + b.m2 + delta * delta * a.count * b.count / count
    return _ChunkStats(
        count=count,
        mean=mean,
        m2=m2,
        t_min=min(a.t_min, b.t_min),
        t_max=max(a.t_max, b.t_max),
        samples=np.concatenate([a.samples, b.samples]),
    )


_WORKER: dict = {}


def _init_worker(probs: np.ndarray, m: int, seed: int, first_block: int) -> None:
    _WORKER["table"] = AliasTable(probs)
    _WORKER["probs"] = probs
    _WORKER["m"] = m
    _WORKER["seed"] = seed
    _WORKER["first_block"] = first_block


def _worker_chunk(bounds: tuple[int, int]) -> _ChunkStats:
    return _run_chunk(
        _WORKER["table"],
        _WORKER["probs"],
        _WORKER["m"],
        _WORKER["seed"],
        bounds[0],
        bounds[1],
        _WORKER["first_block"],
    )


@dataclass(eq=False)
class SimulationSummary:
    """Streaming moments plus the empirical CDF of the simulated T values."""

    replications: int
    mean: float
    variance: float
    min: int
    max: int
    empirical_cdf: list[tuple[int, float]]
    seed: int
    elapsed: float
    total_draws: int
    degenerate: bool = False
    samples: np.ndarray = field(repr=False, default=None)

    @property
    def std_error(self) -> float:
        """Standard error of the mean."""
        if self.replications < 2:
            return math.inf
        return math.sqrt(self.variance / self.replications)

    @property
    def draws_per_second(self) -> float:
        return self.total_draws / self.elapsed if self.elapsed > 0 else math.inf

    def to_dict(self) -> dict:
        return {
            "replications": self.replications,
            "mean": self.mean,
            "variance": self.variance,
            "min": self.min,
            "max": self.max,
            "empirical_cdf": [[int(t), f] for t, f in self.empirical_cdf],
            "seed": self.seed,
            "elapsed": self.elapsed,
            "total_draws": self.total_draws,
            "degenerate": self.degenerate,
        }


def _empirical_cdf(samples: np.ndarray) -> list[tuple[int, float]]:
    n = len(samples)
    ordered = np.sort(samples)
    thresholds = np.unique(ordered)
    if len(thresholds) > _CDF_MAX_POINTS:
        picks = np.linspace(0, len(thresholds) - 1, _CDF_MAX_POINTS).astype(int)
        thresholds = thresholds[picks]
    fractions = np.searchsorted(ordered, thresholds, side="right") / n
    return [(int(t), float(f)) for t, f in zip(thresholds, fractions)]


def run_simulation(
    dist: CouponDistribution,
    m: int,
    reps: int,
    seed: int,
    workers: int = 1,
) -> SimulationSummary:
    """Simulate `reps` independent collection times.

    Output is bit-identical for fixed (dist, m, reps, seed) at any worker
    count: replication streams depend only on (seed, index) and chunk
    summaries are merged in fixed index order.
    """
    if reps < 1:
        raise ValueError("reps must be a positive integer")
    if m < 1:
        raise ValueError("m must be a positive integer")
    if workers < 1:
        raise ValueError("workers must be a positive integer")
    started = time.perf_counter()
    first_block = _initial_block(dist, m)
    bounds = [
        (start, min(start + _CHUNK_SIZE, reps)) for start in range(0, reps, _CHUNK_SIZE)
    ]
    if workers == 1 or len(bounds) == 1:
        table = AliasTable(dist.probs)
        chunks = [
            _run_chunk(table, dist.probs, m, seed, a, b, first_block) for a, b in bounds
        ]
    else:
        with ProcessPoolExecutor(
            max_workers=min(workers, len(bounds)),
            initializer=_init_worker,
            initargs=(dist.probs, m, seed, first_block),
        ) as pool:
            chunks = list(pool.map(_worker_chunk, bounds))

    merged = chunks[0]
    for chunk in chunks[1:]:
        merged = _merge(merged, chunk)
    elapsed = time.perf_counter() - started

    degenerate = merged.count == 1
    variance = 0.0 if degenerate else merged.m2 / (merged.count - 1)
    return SimulationSummary(
        replications=merged.count,
        mean=merged.mean,
        variance=variance,
        min=merged.t_min,
        max=merged.t_max,
        empirical_cdf=_empirical_cdf(merged.samples),
        seed=seed,
        elapsed=elapsed,
        total_draws=int(merged.samples.sum()),
        degenerate=degenerate,
        samples=merged.samples,
    )


@dataclass(frozen=True)
class KsReport:
    statistic: float
    sample_size: int
    normalization: GumbelNormalization

    def __post_init__(self) -> None:
        if not (0.0 <= self.statistic <= 1.0):
            raise ValueError("KS statistic must lie in [0, 1]")

    def to_dict(self) -> dict:
        return {
            "statistic": self.statistic,
            "sample_size": self.sample_size,
            "normalization": self.normalization.to_dict(),
        }


def ks_distance_to_gumbel(summary: SimulationSummary, norm: GumbelNormalization) -> KsReport:
    """Sup distance between the CDF of (T - b_N)/k_N and the standard Gumbel."""
    if summary.replications < 100:
        raise ValueError("need at least 100 replications for a KS distance")
    z = np.sort((summary.samples - norm.b_N) / norm.k_N)
    n = len(z)
    ref = np.exp(-np.exp(-z))
    upper = np.max(np.arange(1, n + 1) / n - ref)
    lower = np.max(ref - np.arange(0, n) / n)
    return KsReport(
        statistic=float(max(upper, lower)), sample_size=n, normalization=norm
    )


def write_samples(summary: SimulationSummary, path) -> None:
    """Dump raw replication values, one integer per line."""
    np.savetxt(path, summary.samples, fmt="%d")
