"""Illumination loop filling a behavior-performance archive.

Random initialization, then repeat: pick a random elite, mutate it,
evaluate, and insert the result if it beats the occupant of its cell.
A uniform random-sampling baseline with the same evaluation budget is
provided for comparison runs.

Evaluation can be batched: parents for a whole batch are selected against
the archive state at the batch boundary, evaluated together (vectorized or
concurrently), then inserted in order through the archive's insert. Results
are deterministic for a fixed (seed, batch_size); batch_size=1 reproduces
the strict select-mutate-insert ordering.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from typing import Protocol, runtime_checkable

import numpy as np

from .archive import ArchiveGrid, Elite, GridSpec, cell_indices_flat


def mutate_discrete(
    genome: np.ndarray,
    rng: np.random.Generator,
    rate: float = 0.05,
    levels: int = 21,
) -> np.ndarray:
    """Resample each component with probability ``rate``, uniformly over the
    level set {0, 1/(levels-1), ..., 1}. Resampling may pick the current value."""
    g = np.asarray(genome, dtype=float).copy()
    mask = rng.random(g.shape) < rate
    n = int(mask.sum())
    if n:
        g[mask] = rng.integers(levels, size=n) / (levels - 1)
    return g


def mutate_polynomial(
    genome: np.ndarray,
    rng: np.random.Generator,
    rate: float = 0.125,
    eta_m: float = 10.0,
) -> np.ndarray:
    """Polynomial mutation, unbounded-delta variant with a final clamp.

    Each component is perturbed with probability ``rate`` by
    delta = (2u)^(1/(eta+1)) - 1 for u < 0.5, else 1 - (2(1-u))^(1/(eta+1)),
    and the result is clamped back into [0, 1].
    """
    g = np.asarray(genome, dtype=float).copy()
    mask = rng.random(g.shape) < rate
    n = int(mask.sum())
    if n:
        u = rng.random(n)
        exponent = 1.0 / (eta_m + 1.0)
        delta = np.where(
            u < 0.5,
            np.power(2.0 * u, exponent) - 1.0,
            1.0 - np.power(2.0 * (1.0 - u), exponent),
        )
        g[mask] = np.clip(g[mask] + delta, 0.0, 1.0)
    return g


class DiscreteMutation:
    """Level-set genomes: uniform random init and per-component resampling."""

    def __init__(self, rate: float = 0.05, levels: int = 21):
        self.rate = rate
        self.levels = levels

    def random_genomes(self, count: int, length: int, rng: np.random.Generator) -> np.ndarray:
        return rng.integers(self.levels, size=(count, length)) / (self.levels - 1)

    def mutate_batch(self, genomes: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        out = genomes.copy()
        mask = rng.random(out.shape) < self.rate
        n = int(mask.sum())
        if n:
            out[mask] = rng.integers(self.levels, size=n) / (self.levels - 1)
        return out


class PolynomialMutation:
    """Continuous [0,1] genomes: uniform init and polynomial perturbation."""

    def __init__(self, rate: float = 0.125, eta_m: float = 10.0):
        self.rate = rate
        self.eta_m = eta_m

    def random_genomes(self, count: int, length: int, rng: np.random.Generator) -> np.ndarray:
        return rng.random((count, length))

    def mutate_batch(self, genomes: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        out = genomes.copy()
        mask = rng.random(out.shape) < self.rate
        n = int(mask.sum())
        if n:
            u = rng.random(n)
            exponent = 1.0 / (self.eta_m + 1.0)
            delta = np.where(
                u < 0.5,
                np.power(2.0 * u, exponent) - 1.0,
                1.0 - np.power(2.0 * (1.0 - u), exponent),
            )
            out[mask] = np.clip(out[mask] + delta, 0.0, 1.0)
        return out


@runtime_checkable
class Evaluator(Protocol):
    """Pure mapping genome -> (descriptor, performance, valid).

    Must be deterministic given the genome; any stochastic noise belongs to
    the harness, not the evaluator. valid=False means "do not insert".
    """

    def evaluate(self, genome: np.ndarray) -> tuple[np.ndarray, float, bool]: ...


@dataclass
class MapElitesConfig:
    total_iterations: int
    genome_length: int
    mutation: DiscreteMutation | PolynomialMutation
    seed: int
    init_random_count: int = 400
    batch_size: int = 1
    checkpoint_every: int = 100_000

    def __post_init__(self):
        if self.total_iterations < 1:
            raise ValueError("empty run: total_iterations must be >= 1")
        if not 0 <= self.init_random_count <= self.total_iterations:
            raise ValueError("need 0 <= init_random_count <= total_iterations")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")


def _evaluate_batch(evaluator, genomes: np.ndarray):
    batch_fn = getattr(evaluator, "evaluate_batch", None)
    if batch_fn is not None:
        return batch_fn(genomes)
    descs, perfs, valids = [], [], []
    for g in genomes:
        d, p, v = evaluator.evaluate(g)
        descs.append(np.asarray(d, dtype=float))
        perfs.append(p)
        valids.append(v)
    return np.array(descs), np.array(perfs, dtype=float), np.array(valids, dtype=bool)


class _ProgressLog:
    def __init__(self, path, every: int, header: dict | None = None):
        self.path = path
        self.every = every
        self.next_at = every
        self.t0 = time.perf_counter()
        self.fh = open(path, "w", encoding="utf-8") if path is not None else None
        if self.fh is not None and header is not None:
            self.fh.write(json.dumps({"header": header}, sort_keys=True) + "\n")

    def maybe_emit(self, grid: ArchiveGrid, force: bool = False):
        if self.fh is None:
            return
        if not force and grid.evaluations < self.next_at:
            return
        while self.next_at <= grid.evaluations:
            self.next_at += self.every
        st = grid.stats()
        self.fh.write(
            json.dumps(
                {
                    "iterations": grid.evaluations,
                    "filled": st.filled_count,
                    "mean_perf": st.mean_performance,
                    "max_perf": st.max_performance,
                    "wall_seconds": round(time.perf_counter() - self.t0, 3),
                }
            )
            + "\n"
        )

    def close(self):
        if self.fh is not None:
            self.fh.close()


def run_map_elites(
    config: MapElitesConfig,
    spec: GridSpec,
    evaluator: Evaluator,
    progress_path=None,
    progress_header: dict | None = None,
) -> ArchiveGrid:
    """Run the illumination loop for exactly ``total_iterations`` evaluations.

    The first ``init_random_count`` genomes are uniform random; afterwards
    parents are uniform draws over filled cells. Invalid evaluations still
    consume an iteration. Raises if the archive is still empty once
    selection is required.
    """
    rng = np.random.default_rng(config.seed)
    grid = ArchiveGrid(spec, config.genome_length, seed=config.seed)
    log = _ProgressLog(progress_path, config.checkpoint_every, progress_header)
    mut = config.mutation
    try:
        while grid.evaluations < config.total_iterations:
            space = config.total_iterations - grid.evaluations
            n_init = max(0, min(space, config.init_random_count - grid.evaluations))
            batch = min(config.batch_size, space)
            if 0 < n_init < batch:
                batch = n_init  # do not mix init and selection phases in one batch
            if n_init > 0:
                genomes = mut.random_genomes(batch, config.genome_length, rng)
            else:
                if grid.filled_count == 0:
                    raise RuntimeError(
                        f"archive still empty after {grid.evaluations} initialization "
                        f"evaluations: evaluator {evaluator!r} produced no valid result"
                    )
                keys = grid.random_keys(rng, batch)
                parents = np.array([grid.cells[k].genome for k in keys])
                genomes = mut.mutate_batch(parents, rng)
            descs, perfs, valids = _evaluate_batch(evaluator, genomes)
            flats = cell_indices_flat(descs, spec)
            for i in range(batch):
                if valids[i]:
                    grid.try_insert_at(
                        int(flats[i]),
                        Elite(genome=genomes[i], descriptor=descs[i], performance=float(perfs[i])),
                    )
            grid.evaluations += batch
            log.maybe_emit(grid)
        log.maybe_emit(grid, force=True)
    finally:
        log.close()
    if grid.filled_count == 0:
        raise RuntimeError(
            f"archive empty after {grid.evaluations} evaluations: "
            f"evaluator {evaluator!r} produced no valid result"
        )
    return grid


def run_random_sampling(
    config: MapElitesConfig,
    spec: GridSpec,
    evaluator: Evaluator,
    progress_path=None,
    progress_header: dict | None = None,
) -> ArchiveGrid:
    """Equal-budget baseline: every genome is drawn uniform random."""
    rng = np.random.default_rng(config.seed)
    grid = ArchiveGrid(spec, config.genome_length, seed=config.seed)
    log = _ProgressLog(progress_path, config.checkpoint_every, progress_header)
    mut = config.mutation
    try:
        while grid.evaluations < config.total_iterations:
            batch = min(config.batch_size, config.total_iterations - grid.evaluations)
            genomes = mut.random_genomes(batch, config.genome_length, rng)
            descs, perfs, valids = _evaluate_batch(evaluator, genomes)
            flats = cell_indices_flat(descs, spec)
            for i in range(batch):
                if valids[i]:
                    grid.try_insert_at(
                        int(flats[i]),
                        Elite(genome=genomes[i], descriptor=descs[i], performance=float(perfs[i])),
                    )
            grid.evaluations += batch
            log.maybe_emit(grid)
        log.maybe_emit(grid, force=True)
    finally:
        log.close()
    return grid
