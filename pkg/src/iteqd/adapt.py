"""Adaptation loop: UCB selection over archive cells, trial, GP update, stop rules.

Each iteration scores every filled cell with mu + kappa * sigma from the
current GP posterior (exhaustive scan over the stored actual descriptors),
tests the selected cell's genome on the trial evaluator, appends the
observation, refits the GP, and checks the stop rules. The loop is strictly
sequential; only the scan itself is vectorized.

Stop rules, in precedence order: target radius (when configured, the trial
measurement reached -radius or better), the alpha criterion (best measured
>= alpha * max posterior mean over the map, re-evaluated after each GP
update so the threshold can decrease), and the max-trials fallback.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, asdict
from typing import Callable, Sequence

import numpy as np

from .archive import ArchiveGrid, Elite
from .gp import GpState, KernelParams, Observation, fit, posterior_batch


@dataclass(frozen=True)
class AdaptConfig:
    """Defaults are the unit-cube task parameters; see arm_adapt_config()."""

    kappa: float = 0.05
    alpha: float = 0.9
    noise_var: float = 0.001
    rho: float = 0.4
    signal_var: float = 1.0
    max_trials: int = 20
    use_alpha_stop: bool = True
    target_radius: float | None = None
    perf_floor: float | None = None  # clamp low measurements when set
    failure_value: float | None = None  # sentinel for evaluator failures; None aborts

    def __post_init__(self):
        if self.kappa < 0:
            raise ValueError("kappa must be non-negative")
        if not 0 < self.alpha <= 1:
            raise ValueError("alpha must lie in (0, 1]")
        if self.max_trials < 1:
            raise ValueError("max_trials must be >= 1")
        if not self.noise_var > 0:
            raise ValueError("noise_var must be positive")

    def kernel(self) -> KernelParams:
        return KernelParams(rho=self.rho, signal_var=self.signal_var)


def arm_adapt_config(**overrides) -> AdaptConfig:
    """Arm-task parameters: wider noise, short length scale, radius stop."""
    base = dict(
        kappa=0.3,
        noise_var=0.03,
        rho=0.1,
        max_trials=31,
        use_alpha_stop=False,
        target_radius=0.05,
    )
    base.update(overrides)
    return AdaptConfig(**base)


@dataclass
class TrialRecord:
    trial: int
    cell_index: int | None
    descriptor: list[float] | None
    predicted_mu: float
    predicted_sigma: float
    acquisition: float
    measured: float
    best_so_far: float
    stop: str | None
    max_predicted_mu: float | None = None  # over the map, after the GP update
    k_cond: float | None = None


@dataclass
class AdaptOutcome:
    """Best measured behavior plus how the loop ended."""

    elite: Elite | None
    cell_index: int | None
    best_measured: float
    trials: int
    stop: str


def ucb_scores(mus: np.ndarray, sigmas: np.ndarray, kappa: float) -> np.ndarray:
    return mus + kappa * sigmas


def argmax_lowest_key(scores: np.ndarray, keys: Sequence[int]) -> int:
    """Position of the maximum score; exact ties go to the lowest key."""
    best = np.max(scores)
    tied = np.flatnonzero(scores == best)
    if len(tied) == 1:
        return int(tied[0])
    return int(min(tied, key=lambda i: keys[i]))


def ucb_select(
    gp: GpState,
    candidates: Sequence[tuple[int, np.ndarray]],
    kappa: float,
) -> int:
    """Cell index maximizing mu + kappa*sigma, scanned exhaustively."""
    if not candidates:
        raise ValueError("candidate list is empty")
    keys = [c[0] for c in candidates]
    X = np.array([np.asarray(c[1], dtype=float) for c in candidates])
    mus, variances = posterior_batch(gp, X)
    pos = argmax_lowest_key(ucb_scores(mus, np.sqrt(variances), kappa), keys)
    return keys[pos]


def stop_check(best_measured: float, max_predicted_mu: float, alpha: float) -> bool:
    """True once the best measurement reaches alpha times the map's best prediction."""
    return best_measured >= alpha * max_predicted_mu


def _resolve_prior(grid: ArchiveGrid, prior, keys, descs):
    """Per-cell prior values plus a callable for the GP state."""
    if prior is None:
        values = np.array([grid.cells[k].performance for k in keys])
    elif callable(prior):
        values = np.array([float(prior(d)) for d in descs])
        return values, prior
    else:
        values = np.asarray(prior, dtype=float)
        if values.shape != (len(keys),):
            raise ValueError(
                "prior array must align with the archive's sorted cell order"
            )
    table = {tuple(np.asarray(d)): float(v) for d, v in zip(descs, values)}

    def lookup(x: np.ndarray) -> float:
        return table[tuple(np.asarray(x))]

    return values, lookup


def adapt(
    grid: ArchiveGrid,
    trial_evaluator: Callable[[np.ndarray], float],
    config: AdaptConfig,
    prior=None,
) -> tuple[AdaptOutcome, list[TrialRecord]]:
    """Run the select/test/update loop over a non-empty archive.

    ``prior`` selects the per-cell prediction the GP starts from: None uses
    each elite's stored performance, a callable is applied to each stored
    descriptor, and an array must align with sorted(cell index) order.
    Returns the best measured behavior and the full trial log.
    """
    if grid.filled_count == 0:
        raise ValueError("cannot adapt over an empty archive")
    items = grid.sorted_items()
    keys = [k for k, _ in items]
    descs = np.array([np.asarray(e.descriptor, dtype=float) for _, e in items])
    prior_values, prior_fn = _resolve_prior(grid, prior, keys, descs)

    kernel = config.kernel()
    observations: list[Observation] = []
    state = fit(prior_fn, observations, config.noise_var, kernel)
    mus, variances = posterior_batch(state, descs, prior_values)

    log: list[TrialRecord] = []
    best = -np.inf
    best_pos: int | None = None
    stop = "max_trials"
    for trial in range(1, config.max_trials + 1):
        sigmas = np.sqrt(variances)
        scores = ucb_scores(mus, sigmas, config.kappa)
        pos = argmax_lowest_key(scores, keys)
        mu_sel, sigma_sel, acq_sel = float(mus[pos]), float(sigmas[pos]), float(scores[pos])
        elite = grid.cells[keys[pos]]
        try:
            measured = float(trial_evaluator(elite.genome))
        except Exception:
            if config.failure_value is None:
                raise
            measured = config.failure_value
        if config.perf_floor is not None and measured < config.perf_floor:
            measured = config.perf_floor
        if measured > best:
            best = measured
            best_pos = pos
        observations.append(
            Observation(
                chi=descs[pos], measured=measured, prior_at_chi=float(prior_values[pos])
            )
        )
        state = fit(prior_fn, observations, config.noise_var, kernel)
        mus, variances = posterior_batch(state, descs, prior_values)
        max_mu = float(mus.max())

        reason = None
        if config.target_radius is not None and measured >= -config.target_radius:
            reason = "target_radius"
        elif config.use_alpha_stop and stop_check(best, max_mu, config.alpha):
            reason = "alpha"
        elif trial == config.max_trials:
            reason = "max_trials"
        log.append(
            TrialRecord(
                trial=trial,
                cell_index=keys[pos],
                descriptor=[float(v) for v in descs[pos]],
                predicted_mu=mu_sel,
                predicted_sigma=sigma_sel,
                acquisition=acq_sel,
                measured=measured,
                best_so_far=best,
                stop=reason,
                max_predicted_mu=max_mu,
                k_cond=state.cond_estimate,
            )
        )
        if reason is not None:
            stop = reason
            break
    outcome = AdaptOutcome(
        elite=grid.cells[keys[best_pos]] if best_pos is not None else None,
        cell_index=keys[best_pos] if best_pos is not None else None,
        best_measured=best,
        trials=len(log),
        stop=stop,
    )
    return outcome, log


def write_trial_log_jsonl(records: Sequence[TrialRecord], path, header: dict | None = None) -> None:
    """One JSON object per trial; optional leading header record."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if header is not None:
            fh.write(json.dumps({"header": header}, sort_keys=True) + "\n")
        for r in records:
            fh.write(json.dumps(asdict(r), sort_keys=True) + "\n")


def trial_log_jsonl(records: Sequence[TrialRecord], header: dict | None = None) -> str:
    lines = []
    if header is not None:
        lines.append(json.dumps({"header": header}, sort_keys=True))
    lines += [json.dumps(asdict(r), sort_keys=True) for r in records]
    return "\n".join(lines) + "\n"
