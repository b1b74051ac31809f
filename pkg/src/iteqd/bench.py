"""Knockout-variant harness: the full method against its ablations.

Six strategies share one trial budget and one evaluator so their
per-trial best curves are directly comparable: the full map-prior
Bayesian loop, random search over the map, map BO without the per-cell
prior (constant mean and variance), finite-difference policy gradient
seeded from the map, plain BO in genome space, and policy gradient in
genome space. An optional multiplicative Gaussian noise model perturbs
measured performances only; priors are never noised.
"""

from __future__ import annotations

import dataclasses
import enum
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .adapt import AdaptConfig, TrialRecord, adapt, argmax_lowest_key, ucb_scores
from .archive import ArchiveGrid
from .gp import KernelParams, Observation, fit, posterior_batch


class VariantKind(str, enum.Enum):
    ITE = "ite"
    MAP_RANDOM = "map_random"
    MAP_BO_NOPRIOR = "map_bo_noprior"
    MAP_POLICY_GRADIENT = "map_policy_gradient"
    RAW_BO = "raw_bo"
    RAW_POLICY_GRADIENT = "raw_policy_gradient"


MAP_KINDS = (
    VariantKind.ITE,
    VariantKind.MAP_RANDOM,
    VariantKind.MAP_BO_NOPRIOR,
    VariantKind.MAP_POLICY_GRADIENT,
)

PG_TRIALS_PER_ITERATION = 15
PG_STEP = 0.05
PG_EPSILON = 0.05
BO_RANDOM_INIT = 5


@dataclass(frozen=True)
class NoiseModel:
    """Multiplicative Gaussian factor applied to measured performance only."""

    mean: float = 0.95
    std: float = 0.1
    enabled: bool = True
    seed: int = 0

    def wrap(self, evaluator: Callable[[np.ndarray], float]) -> Callable[[np.ndarray], float]:
        if not self.enabled:
            return evaluator
        rng = np.random.default_rng(self.seed)

        def noisy(genome: np.ndarray) -> float:
            return float(evaluator(genome)) * rng.normal(self.mean, self.std)

        return noisy


@dataclass(frozen=True)
class BenchConfig:
    budget: int = 17
    adapt: AdaptConfig = AdaptConfig()
    raw_rho: float = 0.4  # genome-space length scale for raw BO
    bo_candidates: int = 1024

    def __post_init__(self):
        if self.budget < 1:
            raise ValueError("budget must be >= 1")


def _record(trial, measured, best, cell=None, desc=None) -> TrialRecord:
    return TrialRecord(
        trial=trial,
        cell_index=cell,
        descriptor=desc,
        predicted_mu=float("nan"),
        predicted_sigma=float("nan"),
        acquisition=float("nan"),
        measured=measured,
        best_so_far=best,
        stop=None,
    )


def _map_random_search(grid, evaluator, budget, rng) -> list[TrialRecord]:
    """Uniform draws of untested filled cells; keep the best measurement."""
    keys = [k for k, _ in grid.sorted_items()]
    order = rng.permutation(len(keys))
    log, best = [], -np.inf
    for trial in range(1, budget + 1):
        pos = int(order[(trial - 1) % len(keys)])
        elite = grid.cells[keys[pos]]
        measured = float(evaluator(elite.genome))
        best = max(best, measured)
        log.append(
            _record(trial, measured, best, cell=keys[pos], desc=[float(v) for v in elite.descriptor])
        )
    return log


def _map_bo_noprior(grid, evaluator, budget, rng, config: BenchConfig, prior_values=None) -> list[TrialRecord]:
    """BO over the archive with a flat prior: constant mean and variance.

    The constant mean is the archive's average prediction and the constant
    variance its prediction variance, so only the per-cell structure of the
    prior is knocked out. The first few trials are uniform random draws.
    """
    items = grid.sorted_items()
    keys = [k for k, _ in items]
    descs = np.array([e.descriptor for _, e in items])
    if prior_values is None:
        prior_values = np.array([e.performance for _, e in items])
    const_mean = float(np.mean(prior_values))
    const_var = float(np.var(prior_values))
    kernel = KernelParams(rho=config.adapt.rho, signal_var=max(const_var, 1e-12))
    flat_prior = np.full(len(keys), const_mean)

    log, best, observations = [], -np.inf, []
    n_init = min(BO_RANDOM_INIT, budget)
    init_positions = rng.choice(len(keys), size=n_init, replace=len(keys) < n_init)
    state = fit(const_mean, observations, config.adapt.noise_var, kernel)
    mus, variances = posterior_batch(state, descs, flat_prior)
    for trial in range(1, budget + 1):
        if trial <= n_init:
            pos = int(init_positions[trial - 1])
        else:
            scores = ucb_scores(mus, np.sqrt(variances), config.adapt.kappa)
            pos = argmax_lowest_key(scores, keys)
        elite = grid.cells[keys[pos]]
        measured = float(evaluator(elite.genome))
        best = max(best, measured)
        observations.append(Observation(chi=descs[pos], measured=measured, prior_at_chi=const_mean))
        state = fit(const_mean, observations, config.adapt.noise_var, kernel)
        mus, variances = posterior_batch(state, descs, flat_prior)
        log.append(
            _record(trial, measured, best, cell=keys[pos], desc=[float(v) for v in descs[pos]])
        )
    return log


def _raw_bo(genome_length, evaluator, budget, rng, config: BenchConfig) -> list[TrialRecord]:
    """Plain BO on [0,1]^n: zero constant mean, random initial trials,
    acquisition maximized over a fresh uniform candidate pool each step."""
    kernel = KernelParams(rho=config.raw_rho)
    log, best, observations = [], -np.inf, []
    for trial in range(1, budget + 1):
        if trial <= min(BO_RANDOM_INIT, budget):
            x = rng.random(genome_length)
        else:
            pool = rng.random((config.bo_candidates, genome_length))
            state = fit(0.0, observations, config.adapt.noise_var, kernel)
            mus, variances = posterior_batch(state, pool)
            scores = ucb_scores(mus, np.sqrt(variances), config.adapt.kappa)
            x = pool[int(np.argmax(scores))]
        measured = float(evaluator(x))
        best = max(best, measured)
        observations.append(Observation(chi=x, measured=measured, prior_at_chi=0.0))
        log.append(_record(trial, measured, best))
    return log


def _policy_gradient(start: np.ndarray, evaluator, budget, rng) -> list[TrialRecord]:
    """Finite-difference ascent: batches of perturbed trials, one step each.

    Every dimension of every perturbation is -eps, 0, or +eps with equal
    probability; the gradient estimate per dimension compares the mean
    performance of the +eps and -eps groups (zeroed when the 0 group wins).
    A trailing partial batch still spends its trials but cannot step.
    """
    if budget < PG_TRIALS_PER_ITERATION:
        raise ValueError(
            f"policy gradient needs a budget of at least {PG_TRIALS_PER_ITERATION}, got {budget}"
        )
    theta = np.asarray(start, dtype=float).copy()
    n = len(theta)
    log, best, trial = [], -np.inf, 0
    while trial < budget:
        batch = min(PG_TRIALS_PER_ITERATION, budget - trial)
        signs = rng.integers(-1, 2, size=(batch, n))
        candidates = np.clip(theta + signs * PG_EPSILON, 0.0, 1.0)
        perfs = np.empty(batch)
        for i in range(batch):
            trial += 1
            perfs[i] = float(evaluator(candidates[i]))
            best = max(best, perfs[i])
            log.append(_record(trial, float(perfs[i]), best))
        if batch < PG_TRIALS_PER_ITERATION:
            break
        grad = np.zeros(n)
        for d in range(n):
            plus = perfs[signs[:, d] == 1]
            zero = perfs[signs[:, d] == 0]
            minus = perfs[signs[:, d] == -1]
            avg_plus = plus.mean() if len(plus) else -np.inf
            avg_minus = minus.mean() if len(minus) else -np.inf
            avg_zero = zero.mean() if len(zero) else -np.inf
            if avg_zero > avg_plus and avg_zero > avg_minus:
                grad[d] = 0.0
            else:
                a = avg_plus if np.isfinite(avg_plus) else avg_zero
                b = avg_minus if np.isfinite(avg_minus) else avg_zero
                grad[d] = a - b
        norm = np.linalg.norm(grad)
        if norm > 0:
            theta = np.clip(theta + grad / norm * PG_STEP, 0.0, 1.0)
    return log


def run_variant(
    kind: VariantKind,
    trial_evaluator: Callable[[np.ndarray], float],
    budget: int,
    rng: np.random.Generator,
    config: BenchConfig | None = None,
    grid: ArchiveGrid | None = None,
    prior=None,
    genome_length: int | None = None,
) -> list[TrialRecord]:
    """Run one strategy for exactly ``budget`` evaluator calls.

    Map-based kinds require a non-empty ``grid`` (and accept the same
    ``prior`` argument as adapt); raw-space kinds require ``genome_length``.
    """
    kind = VariantKind(kind)
    cfg = config or BenchConfig(budget=budget)
    if kind in MAP_KINDS:
        if grid is None or grid.filled_count == 0:
            raise ValueError(f"{kind.value} requires a non-empty archive")
    elif genome_length is None:
        raise ValueError(f"{kind.value} requires genome_length")

    if kind is VariantKind.ITE:
        adapt_cfg = dataclasses.replace(cfg.adapt, max_trials=budget)
        _, log = adapt(grid, trial_evaluator, adapt_cfg, prior=prior)
        return log
    if kind is VariantKind.MAP_RANDOM:
        return _map_random_search(grid, trial_evaluator, budget, rng)
    if kind is VariantKind.MAP_BO_NOPRIOR:
        prior_values = None
        if prior is not None:
            items = grid.sorted_items()
            if callable(prior):
                prior_values = np.array([float(prior(e.descriptor)) for _, e in items])
            else:
                prior_values = np.asarray(prior, dtype=float)
        return _map_bo_noprior(grid, trial_evaluator, budget, rng, cfg, prior_values)
    if kind is VariantKind.MAP_POLICY_GRADIENT:
        start = grid.random_elite(rng).genome
        return _policy_gradient(start, trial_evaluator, budget, rng)
    if kind is VariantKind.RAW_BO:
        return _raw_bo(genome_length, trial_evaluator, budget, rng, cfg)
    if kind is VariantKind.RAW_POLICY_GRADIENT:
        start = rng.random(genome_length)
        return _policy_gradient(start, trial_evaluator, budget, rng)
    raise ValueError(f"unhandled variant {kind!r}")


def best_at_cut(log: Sequence[TrialRecord], cut: int) -> float:
    """Cumulative best after ``cut`` trials (carried forward past early stops)."""
    if not log:
        raise ValueError("empty trial log")
    pos = min(cut, len(log)) - 1
    return log[pos].best_so_far


def percentile(values: Sequence[float], q: float) -> float:
    """Linear-interpolation percentile (matches numpy's default rule)."""
    return float(np.percentile(np.asarray(values, dtype=float), q))


def summarize(
    logs_by_variant: dict[str, Sequence[Sequence[TrialRecord]]],
    cuts: tuple[int, ...] = (17, 150),
) -> list[dict]:
    """Median and quartiles of best-at-cut per variant and cut."""
    rows = []
    for variant, logs in logs_by_variant.items():
        if not logs:
            raise ValueError(f"no logs for variant {variant}")
        for cut in cuts:
            vals = [best_at_cut(log, cut) for log in logs]
            rows.append(
                {
                    "variant": variant,
                    "cut": cut,
                    "n": len(vals),
                    "median": percentile(vals, 50),
                    "p25": percentile(vals, 25),
                    "p75": percentile(vals, 75),
                }
            )
    return rows
