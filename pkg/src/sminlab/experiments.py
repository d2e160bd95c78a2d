"""Reproducible Monte Carlo estimation of tail probabilities.

One matrix realization per trial serves every grid point, which keeps
hit counts monotone along the grid and reduces variance.  Trials are
keyed by ``(master_seed, trial_index)`` so serial and parallel runs
produce bit-identical results; the ``SMINLAB_THREADS`` environment
variable caps the worker count.

Statistics (per realization ``B = A + M`` of dimension ``n``):

* ``smin_scaled``      -- value ``s_min(B) * sqrt(n)``; a grid point
  ``t`` is hit when the value is at most ``t``.
* ``hs_scaled_sqrt``   -- value ``hs_inverse(B) / sqrt(n)``; hit when
  the value is at least ``t``.
* ``hs_scaled_n``      -- value ``hs_inverse(B) / n``; hit when the
  value is at least ``t``.
* ``distance_profile(k, a)`` -- value is the ``k``-th smallest
  row-to-complement distance, so ``value <= a`` says at least ``k``
  rows sit within distance ``a`` of the span of the other rows.  The
  grid supplies the thresholds; the statistic's own ``a`` serves as a
  single-point grid for :func:`distance_profile_tail`.

Confidence intervals are Wilson score intervals at z = 1.96, which stay
honest for proportions near zero where all the interesting claims live.
"""

from __future__ import annotations

import csv
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError
from .linalg import RANK_RTOL, row_distances
from .samplers import RowDistribution, SeedSpec, ShiftSpec, build_shift, sample_matrix

Z_95 = 1.96

STATISTIC_KINDS = ("smin_scaled", "hs_scaled_sqrt", "hs_scaled_n", "distance_profile")


def wilson_interval(hits: int, trials: int, z: float = Z_95) -> tuple[float, float]:
    """Wilson score confidence interval for a binomial proportion."""
    if trials <= 0:
        raise InvalidInputError("trials must be positive")
    if not (0 <= hits <= trials):
        raise InvalidInputError("hits must lie in [0, trials]")
    p = hits / trials
    denom = 1.0 + z * z / trials
    center = (p + z * z / (2.0 * trials)) / denom
    margin = (z / denom) * math.sqrt(p * (1.0 - p) / trials + z * z / (4.0 * trials * trials))
    # the interval contains the point estimate exactly; clamping repairs
    # the one-ulp float shortfall at p near 0 or 1
    return min(max(0.0, center - margin), p), max(min(1.0, center + margin), p)


@dataclass(frozen=True)
class Statistic:
    """Which scalar is computed from each matrix realization."""

    kind: str
    k: int | None = None
    a: float | None = None

    def __post_init__(self):
        if self.kind not in STATISTIC_KINDS:
            raise InvalidInputError(
                f"unknown statistic {self.kind!r}; choose from {STATISTIC_KINDS}"
            )
        if self.kind == "distance_profile":
            if self.k is None or self.k < 1:
                raise InvalidInputError("distance_profile needs a cardinality k >= 1")
            if self.a is not None and self.a <= 0:
                raise InvalidInputError("distance threshold a must be positive")
        elif self.k is not None or self.a is not None:
            raise InvalidInputError(f"statistic {self.kind!r} takes no parameters")

    @classmethod
    def smin_scaled(cls) -> "Statistic":
        return cls("smin_scaled")

    @classmethod
    def hs_scaled_sqrt(cls) -> "Statistic":
        return cls("hs_scaled_sqrt")

    @classmethod
    def hs_scaled_n(cls) -> "Statistic":
        return cls("hs_scaled_n")

    @classmethod
    def distance_profile(cls, k: int, a: float | None = None) -> "Statistic":
        return cls("distance_profile", k=k, a=a)

    @property
    def hit_when_below(self) -> bool:
        """True when a grid point is hit by ``value <= t`` (else ``value >= t``)."""
        return self.kind in ("smin_scaled", "distance_profile")

    def label(self) -> str:
        if self.kind != "distance_profile":
            return self.kind
        a_part = f",a={self.a:g}" if self.a is not None else ""
        return f"distance_profile(k={self.k}{a_part})"

    def to_dict(self) -> dict:
        d: dict = {"kind": self.kind}
        if self.k is not None:
            d["k"] = self.k
        if self.a is not None:
            d["a"] = self.a
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Statistic":
        return cls(kind=d["kind"], k=d.get("k"), a=d.get("a"))


@dataclass(frozen=True)
class ExperimentConfig:
    """Full description of one tail-estimation run."""

    dist: RowDistribution
    shift: ShiftSpec
    n: int
    trials: int
    t_grid: tuple[float, ...]
    master_seed: int
    statistic: Statistic = field(default_factory=Statistic.smin_scaled)

    def __post_init__(self):
        if self.n < 1:
            raise InvalidInputError("n must be a positive integer")
        if self.trials < 1:
            raise InvalidInputError("trials must be a positive integer")
        grid = tuple(float(t) for t in self.t_grid)
        if any(t < 0 for t in grid):
            raise InvalidInputError("grid thresholds must be non-negative")
        if any(grid[i] >= grid[i + 1] for i in range(len(grid) - 1)):
            raise InvalidInputError("t_grid must be strictly increasing")
        object.__setattr__(self, "t_grid", grid)

    def to_dict(self) -> dict:
        return {
            "dist": self.dist.to_dict(),
            "shift": self.shift.to_dict(),
            "n": self.n,
            "trials": self.trials,
            "t_grid": list(self.t_grid),
            "master_seed": self.master_seed,
            "statistic": self.statistic.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        return cls(
            dist=RowDistribution.from_dict(d["dist"]),
            shift=ShiftSpec.from_dict(d["shift"]),
            n=int(d["n"]),
            trials=int(d["trials"]),
            t_grid=tuple(d["t_grid"]),
            master_seed=int(d["master_seed"]),
            statistic=Statistic.from_dict(d["statistic"]),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class GridPointEstimate:
    t: float
    hits: int
    trials: int
    p_hat: float
    ci_low: float
    ci_high: float


@dataclass
class TailEstimate:
    """Per-grid-point hit counts with Wilson intervals, plus the config echo."""

    config: ExperimentConfig
    points: list[GridPointEstimate]
    wall_time: float

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "wall_time": self.wall_time,
            "points": [
                {
                    "t": p.t,
                    "hits": p.hits,
                    "trials": p.trials,
                    "p_hat": p.p_hat,
                    "ci_low": p.ci_low,
                    "ci_high": p.ci_high,
                }
                for p in self.points
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "TailEstimate":
        return cls(
            config=ExperimentConfig.from_dict(d["config"]),
            points=[GridPointEstimate(**p) for p in d["points"]],
            wall_time=float(d["wall_time"]),
        )

    @classmethod
    def from_json(cls, text: str) -> "TailEstimate":
        return cls.from_dict(json.loads(text))


def resolve_workers(workers: int | None = None) -> int:
    """Worker count: explicit request, capped by ``SMINLAB_THREADS`` when set."""
    count = workers if workers is not None else (os.cpu_count() or 1)
    cap = os.environ.get("SMINLAB_THREADS")
    if cap is not None:
        count = min(count, max(1, int(cap)))
    return max(1, count)


def _singular_values_with_floor(B: np.ndarray) -> tuple[np.ndarray, float]:
    s = np.linalg.svd(B, compute_uv=False)
    tol = RANK_RTOL * float(np.max(np.linalg.norm(B, axis=1)))
    return s, tol


def _trial_value(config: ExperimentConfig, shift_matrix: np.ndarray, trial_index: int) -> float:
    A = sample_matrix(config.dist, config.n, SeedSpec(config.master_seed, trial_index))
    B = A + shift_matrix
    stat = config.statistic
    if stat.kind == "distance_profile":
        if stat.k > config.n:
            return math.inf
        d = np.sort(row_distances(B))
        return float(d[stat.k - 1])
    s, tol = _singular_values_with_floor(B)
    singular = s[-1] <= tol
    if stat.kind == "smin_scaled":
        return 0.0 if singular else float(s[-1]) * math.sqrt(config.n)
    hs = math.inf if singular else float(np.sqrt(np.sum(s**-2.0)))
    if stat.kind == "hs_scaled_sqrt":
        return hs / math.sqrt(config.n)
    return hs / config.n


def _trial_values(config: ExperimentConfig, workers: int | None) -> np.ndarray:
    shift_matrix = build_shift(config.shift, config.n)
    values = np.empty(config.trials)
    nworkers = resolve_workers(workers)
    if nworkers == 1 or config.trials < 4:
        for idx in range(config.trials):
            values[idx] = _trial_value(config, shift_matrix, idx)
        return values

    def run_chunk(start: int, stop: int) -> None:
        for idx in range(start, stop):
            values[idx] = _trial_value(config, shift_matrix, idx)

    chunk = max(1, math.ceil(config.trials / (nworkers * 8)))
    starts = range(0, config.trials, chunk)
    with ThreadPoolExecutor(max_workers=nworkers) as pool:
        futures = [pool.submit(run_chunk, s, min(s + chunk, config.trials)) for s in starts]
        for f in futures:
            f.result()
    return values


def estimate_tail(config: ExperimentConfig, workers: int | None = None) -> TailEstimate:
    """Run the Monte Carlo experiment described by ``config``.

    Singular realizations enter the counts as ``s_min = 0`` (and an
    infinite inverse norm), so the estimate stays a total function of
    the sample.  An empty grid yields an empty estimate without
    sampling.
    """
    start = time.perf_counter()
    if not config.t_grid:
        return TailEstimate(config=config, points=[], wall_time=time.perf_counter() - start)
    values = _trial_values(config, workers)
    points = []
    for t in config.t_grid:
        if config.statistic.hit_when_below:
            hits = int(np.count_nonzero(values <= t))
        else:
            hits = int(np.count_nonzero(values >= t))
        low, high = wilson_interval(hits, config.trials)
        points.append(
            GridPointEstimate(
                t=t,
                hits=hits,
                trials=config.trials,
                p_hat=hits / config.trials,
                ci_low=low,
                ci_high=high,
            )
        )
    return TailEstimate(config=config, points=points, wall_time=time.perf_counter() - start)


def distance_profile_tail(config: ExperimentConfig, workers: int | None = None) -> TailEstimate:
    """Tail estimate for the distance-profile statistic.

    Uses the config grid as the sweep of distance thresholds when one
    is given; otherwise falls back to the single threshold carried by
    the statistic.
    """
    stat = config.statistic
    if stat.kind != "distance_profile":
        raise InvalidInputError("config must carry a distance_profile statistic")
    if not config.t_grid:
        if stat.a is None:
            raise InvalidInputError("need a t_grid or a fixed distance threshold a")
        config = ExperimentConfig(
            dist=config.dist,
            shift=config.shift,
            n=config.n,
            trials=config.trials,
            t_grid=(stat.a,),
            master_seed=config.master_seed,
            statistic=stat,
        )
    return estimate_tail(config, workers)


@dataclass
class CounterexampleReport:
    """Summary of the sign-matrix experiment against the two-zero diagonal shift.

    ``corner_frequency`` estimates the probability that the bottom-right
    2x2 block of the sign matrix has both row sums of its last two
    columns equal to zero (expected 1/4).  ``smin_tail[C]`` estimates
    ``P(s_min <= C n / tau)`` and ``kappa_tail[c]`` estimates
    ``P(condition number >= c tau^2 / n)``.
    """

    n: int
    tau: float
    trials: int
    master_seed: int
    corner_frequency: float
    corner_ci: tuple[float, float]
    smin_tail: dict[float, float]
    kappa_tail: dict[float, float]
    corner_smin_median: float | None

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "tau": self.tau,
            "trials": self.trials,
            "master_seed": self.master_seed,
            "corner_frequency": self.corner_frequency,
            "corner_ci": list(self.corner_ci),
            "smin_tail": {str(k): v for k, v in self.smin_tail.items()},
            "kappa_tail": {str(k): v for k, v in self.kappa_tail.items()},
            "corner_smin_median": self.corner_smin_median,
        }


def counterexample_experiment(
    n: int,
    tau: float,
    trials: int,
    master_seed: int,
    smin_constants: tuple[float, ...] = (1.0, 5.0, 10.0),
    kappa_constants: tuple[float, ...] = (0.01, 0.1),
    workers: int | None = None,
) -> CounterexampleReport:
    """Monte Carlo study of sign matrices shifted by ``diag(tau, ..., tau, 0, 0)``."""
    if n < 8:
        raise InvalidInputError("n must be at least 8")
    if tau < n:
        raise InvalidInputError(f"tau={tau} is outside the regime tau >= n={n}")
    if trials < 1:
        raise InvalidInputError("trials must be positive")
    dist = RowDistribution("bernoulli")
    shift_matrix = build_shift(ShiftSpec.counterexample(tau), n)
    s_min = np.empty(trials)
    s_max = np.empty(trials)
    corner = np.empty(trials, dtype=bool)

    def run_chunk(start: int, stop: int) -> None:
        for idx in range(start, stop):
            B = sample_matrix(dist, n, SeedSpec(master_seed, idx))
            s, tol = _singular_values_with_floor(B + shift_matrix)
            s_min[idx] = 0.0 if s[-1] <= tol else s[-1]
            s_max[idx] = s[0]
            corner[idx] = (B[n - 2, n - 2] + B[n - 2, n - 1] == 0.0) and (
                B[n - 1, n - 2] + B[n - 1, n - 1] == 0.0
            )

    nworkers = resolve_workers(workers)
    chunk = max(1, math.ceil(trials / (nworkers * 8)))
    if nworkers == 1:
        run_chunk(0, trials)
    else:
        with ThreadPoolExecutor(max_workers=nworkers) as pool:
            futures = [
                pool.submit(run_chunk, s0, min(s0 + chunk, trials))
                for s0 in range(0, trials, chunk)
            ]
            for f in futures:
                f.result()

    kappa = np.full(trials, np.inf)
    nonzero = s_min > 0
    kappa[nonzero] = s_max[nonzero] / s_min[nonzero]
    corner_hits = int(corner.sum())
    corner_smin = np.sort(s_min[corner])
    return CounterexampleReport(
        n=n,
        tau=float(tau),
        trials=trials,
        master_seed=master_seed,
        corner_frequency=corner_hits / trials,
        corner_ci=wilson_interval(corner_hits, trials),
        smin_tail={
            float(C): float(np.count_nonzero(s_min <= C * n / tau)) / trials
            for C in smin_constants
        },
        kappa_tail={
            float(c): float(np.count_nonzero(kappa >= c * tau * tau / n)) / trials
            for c in kappa_constants
        },
        corner_smin_median=float(np.median(corner_smin)) if corner_smin.size else None,
    )


CSV_COLUMNS = (
    "t",
    "trials",
    "hits",
    "p_hat",
    "ci_low",
    "ci_high",
    "n",
    "statistic",
    "dist",
    "shift",
    "master_seed",
)


def _fmt17(x: float) -> str:
    return format(float(x), ".17g")


def emit_results(estimate: TailEstimate, path, fmt: str = "csv") -> None:
    """Write a tail estimate to ``path`` as CSV rows or a JSON document.

    CSV numbers are rendered with 17 significant digits so parsing the
    file back reproduces the exact float values; the JSON form mirrors
    :meth:`TailEstimate.to_dict` (Python's shortest round-trip float
    rendering, equally lossless).
    """
    if fmt not in ("csv", "json"):
        raise InvalidInputError(f"format must be 'csv' or 'json', got {fmt!r}")
    cfg = estimate.config
    if fmt == "json":
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(estimate.to_json())
            fh.write("\n")
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for p in estimate.points:
            writer.writerow(
                [
                    _fmt17(p.t),
                    p.trials,
                    p.hits,
                    _fmt17(p.p_hat),
                    _fmt17(p.ci_low),
                    _fmt17(p.ci_high),
                    cfg.n,
                    cfg.statistic.label(),
                    cfg.dist.kind,
                    cfg.shift.label(),
                    cfg.master_seed,
                ]
            )
