"""Discretized behavior-performance archive keeping one elite per grid cell.

The grid covers a closed N-dimensional box. Each cell stores the single
best-performing solution whose behavior descriptor falls inside it;
replacement requires strictly greater performance, so per-cell performance
is monotone non-decreasing over any insertion sequence.

Archives serialize to a versioned UTF-8 CSV format (``ITEQD-ARCHIVE v1``)
with 17-significant-digit floats, which round-trip float64 exactly.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

ARCHIVE_MAGIC = "ITEQD-ARCHIVE v1"


class EmptyArchiveError(RuntimeError):
    """An operation required at least one filled cell."""


class ArchiveFormatError(ValueError):
    """An archive file does not conform to the versioned format."""


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


@dataclass(frozen=True)
class GridSpec:
    """Regular discretization of a closed box: per-dim bounds and bin counts."""

    lower: tuple[float, ...]
    upper: tuple[float, ...]
    bins: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "lower", tuple(float(v) for v in self.lower))
        object.__setattr__(self, "upper", tuple(float(v) for v in self.upper))
        object.__setattr__(self, "bins", tuple(int(b) for b in self.bins))
        if not (len(self.lower) == len(self.upper) == len(self.bins)):
            raise ValueError("lower, upper and bins must have equal lengths")
        if len(self.bins) == 0:
            raise ValueError("grid needs at least one dimension")
        for lo, hi in zip(self.lower, self.upper):
            if not lo < hi:
                raise ValueError(f"need lower < upper per dim, got [{lo}, {hi}]")
        if any(b < 1 for b in self.bins):
            raise ValueError("bin counts must be >= 1")

    @property
    def dims(self) -> int:
        return len(self.bins)

    @property
    def cell_count(self) -> int:
        n = 1
        for b in self.bins:
            n *= b
        return n

    def flatten(self, idx: tuple[int, ...]) -> int:
        """Row-major (C-order) flattening of a multi-index."""
        flat = 0
        for i, b in zip(idx, self.bins):
            flat = flat * b + i
        return flat

    def unflatten(self, flat: int) -> tuple[int, ...]:
        idx = []
        for b in reversed(self.bins):
            idx.append(flat % b)
            flat //= b
        return tuple(reversed(idx))


def cell_index(descriptor, spec: GridSpec) -> tuple[int, ...]:
    """Map a descriptor to its cell multi-index.

    Values at or beyond the upper bound clamp into the last bin; values
    below the lower bound clamp to bin 0, so the map is total on finite
    descriptors.
    """
    desc = np.asarray(descriptor, dtype=float)
    if desc.shape != (spec.dims,):
        raise ValueError(
            f"descriptor has shape {desc.shape}, grid expects ({spec.dims},)"
        )
    idx = []
    for v, lo, hi, b in zip(desc, spec.lower, spec.upper, spec.bins):
        # Clamp into the box first so huge finite values cannot overflow,
        # then floor((v-lo)/(hi-lo) * bins): dividing by the full range
        # keeps exact midpoints/edges exact in float.
        v = min(max(v, lo), hi)
        i = int(np.floor((v - lo) / (hi - lo) * b))
        idx.append(min(i, b - 1))
    return tuple(idx)


def cell_indices_flat(descriptors: np.ndarray, spec: GridSpec) -> np.ndarray:
    """Vectorized cell_index + flatten for a (B, dims) descriptor batch."""
    desc = np.asarray(descriptors, dtype=float)
    if desc.ndim != 2 or desc.shape[1] != spec.dims:
        raise ValueError(f"expected (B, {spec.dims}) descriptors, got {desc.shape}")
    lo = np.asarray(spec.lower)
    hi = np.asarray(spec.upper)
    b = np.asarray(spec.bins)
    clamped = np.clip(desc, lo, hi)
    idx = np.floor((clamped - lo) / (hi - lo) * b).astype(np.int64)
    np.clip(idx, 0, b - 1, out=idx)
    flat = np.zeros(len(desc), dtype=np.int64)
    for k in range(spec.dims):
        flat = flat * b[k] + idx[:, k]
    return flat


@dataclass
class Elite:
    """Best solution yet found for one cell.

    The descriptor keeps its actual (non-discretized) values; the cell
    assignment is derived from it via cell_index.
    """

    genome: np.ndarray
    descriptor: np.ndarray
    performance: float


class InsertOutcome(enum.Enum):
    INSERTED_NEW = "inserted_new"
    REPLACED = "replaced"
    REJECTED = "rejected"


@dataclass(frozen=True)
class ArchiveStats:
    filled_count: int
    mean_performance: float | None
    max_performance: float | None


class ArchiveGrid:
    """Sparse grid of elites keyed by flattened cell index.

    Single-threaded use with a fixed seed is bit-reproducible. Reads are
    shareable; inserts go through try_insert, whose compare-and-swap
    semantics are per cell (serial in this implementation).
    """

    def __init__(
        self,
        spec: GridSpec,
        genome_length: int,
        evaluations: int = 0,
        seed: int | None = None,
    ):
        self.spec = spec
        self.genome_length = int(genome_length)
        self.cells: dict[int, Elite] = {}
        self._keys: list[int] = []  # occupied flat indices, kept for O(1) sampling
        self.evaluations = int(evaluations)
        self.seed = seed

    @property
    def filled_count(self) -> int:
        return len(self.cells)

    def try_insert(self, elite: Elite) -> InsertOutcome:
        """Insert an elite into the cell its descriptor maps to.

        The candidate replaces the occupant only on strictly greater
        performance; ties keep the incumbent.
        """
        if len(elite.genome) != self.genome_length:
            raise ValueError(
                f"genome length {len(elite.genome)} != archive's {self.genome_length}"
            )
        if not np.isfinite(elite.performance):
            raise ValueError("elite performance must be finite")
        flat = self.spec.flatten(cell_index(elite.descriptor, self.spec))
        return self.try_insert_at(flat, elite)

    def try_insert_at(self, flat: int, elite: Elite) -> InsertOutcome:
        """Insert with a precomputed flat cell index (hot path for batches)."""
        current = self.cells.get(flat)
        if current is None:
            self.cells[flat] = elite
            self._keys.append(flat)
            return InsertOutcome.INSERTED_NEW
        if elite.performance > current.performance:
            self.cells[flat] = elite
            return InsertOutcome.REPLACED
        return InsertOutcome.REJECTED

    def random_elite(self, rng: np.random.Generator) -> Elite:
        """Uniform draw over occupied cells."""
        if not self._keys:
            raise EmptyArchiveError("cannot sample from an empty archive")
        return self.cells[self._keys[rng.integers(len(self._keys))]]

    def random_keys(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Flat indices of `size` uniform draws over occupied cells."""
        if not self._keys:
            raise EmptyArchiveError("cannot sample from an empty archive")
        picks = rng.integers(len(self._keys), size=size)
        keys = np.asarray(self._keys)
        return keys[picks]

    def stats(self) -> ArchiveStats:
        if not self.cells:
            return ArchiveStats(0, None, None)
        perfs = np.fromiter(
            (e.performance for e in self.cells.values()), dtype=float, count=len(self.cells)
        )
        return ArchiveStats(len(self.cells), float(perfs.mean()), float(perfs.max()))

    def sorted_items(self) -> list[tuple[int, Elite]]:
        """Occupied (flat index, elite) pairs in ascending index order."""
        return sorted(self.cells.items())


def serialize_archive(grid: ArchiveGrid, extra_metadata: dict[str, str] | None = None) -> str:
    """Render the versioned CSV interchange format.

    Layout: magic line, metadata key/value rows, a ``cells`` sentinel row,
    then one row per occupied cell (ascending flat index):
    flattened index, descriptor values, performance, genome values.
    """
    spec = grid.spec
    lines = [ARCHIVE_MAGIC]
    lines.append(f"dims,{spec.dims}")
    lines.append("lower," + ",".join(_fmt(v) for v in spec.lower))
    lines.append("upper," + ",".join(_fmt(v) for v in spec.upper))
    lines.append("bins," + ",".join(str(b) for b in spec.bins))
    lines.append(f"genome_length,{grid.genome_length}")
    lines.append(f"evaluations,{grid.evaluations}")
    lines.append(f"seed,{'' if grid.seed is None else grid.seed}")
    for k, v in (extra_metadata or {}).items():
        if "," in k or "\n" in k or "\n" in str(v):
            raise ValueError(f"metadata key/value must be comma- and newline-free: {k!r}")
        lines.append(f"{k},{v}")
    lines.append("cells")
    for flat, elite in grid.sorted_items():
        parts = [str(flat)]
        parts += [_fmt(v) for v in np.asarray(elite.descriptor, dtype=float)]
        parts.append(_fmt(elite.performance))
        parts += [_fmt(v) for v in np.asarray(elite.genome, dtype=float)]
        lines.append(",".join(parts))
    return "\n".join(lines) + "\n"


def save_archive(grid: ArchiveGrid, path, extra_metadata: dict[str, str] | None = None) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize_archive(grid, extra_metadata))


def deserialize_archive(text: str) -> ArchiveGrid:
    lines = text.splitlines()
    if not lines or lines[0] != ARCHIVE_MAGIC:
        raise ArchiveFormatError(f"missing magic header {ARCHIVE_MAGIC!r}")
    meta: dict[str, list[str]] = {}
    row = 1
    while row < len(lines):
        line = lines[row]
        row += 1
        if line == "cells":
            break
        key, _, rest = line.partition(",")
        meta[key] = rest.split(",") if rest else []
    else:
        raise ArchiveFormatError("missing 'cells' sentinel row")
    try:
        dims = int(meta["dims"][0])
        lower = tuple(float(v) for v in meta["lower"])
        upper = tuple(float(v) for v in meta["upper"])
        bins = tuple(int(v) for v in meta["bins"])
        genome_length = int(meta["genome_length"][0])
        evaluations = int(meta["evaluations"][0])
        seed_field = meta["seed"]
        seed = int(seed_field[0]) if seed_field and seed_field[0] != "" else None
    except (KeyError, IndexError, ValueError) as exc:
        raise ArchiveFormatError(f"bad metadata block: {exc}") from exc
    if not (len(lower) == len(upper) == len(bins) == dims):
        raise ArchiveFormatError("metadata dimension mismatch")
    spec = GridSpec(lower, upper, bins)
    grid = ArchiveGrid(spec, genome_length, evaluations=evaluations, seed=seed)
    for line in lines[row:]:
        if not line:
            continue
        parts = line.split(",")
        expected = 1 + dims + 1 + genome_length
        if len(parts) != expected:
            raise ArchiveFormatError(
                f"cell row has {len(parts)} fields, expected {expected}: {line!r}"
            )
        flat = int(parts[0])
        desc = np.array([float(v) for v in parts[1 : 1 + dims]])
        perf = float(parts[1 + dims])
        genome = np.array([float(v) for v in parts[2 + dims :]])
        if flat in grid.cells:
            raise ArchiveFormatError(f"duplicate cell index {flat}")
        grid.cells[flat] = Elite(genome=genome, descriptor=desc, performance=perf)
        grid._keys.append(flat)
    return grid


def load_archive(path) -> ArchiveGrid:
    with open(path, "r", encoding="utf-8") as fh:
        return deserialize_archive(fh.read())
