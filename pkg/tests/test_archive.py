import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from iteqd.archive import (
    ArchiveFormatError,
    ArchiveGrid,
    Elite,
    EmptyArchiveError,
    GridSpec,
    InsertOutcome,
    cell_index,
    cell_indices_flat,
    deserialize_archive,
    serialize_archive,
)

ARM_SPEC = GridSpec(lower=(-0.7, 0.0), upper=(0.7, 0.7), bins=(200, 100))


def make_elite(desc, perf, genome_length=4, rng=None):
    rng = rng or np.random.default_rng(0)
    return Elite(genome=rng.random(genome_length), descriptor=np.asarray(desc, float), performance=perf)


class TestGridSpec:
    def test_validation(self):
        with pytest.raises(ValueError):
            GridSpec(lower=(0.0,), upper=(0.0,), bins=(5,))
        with pytest.raises(ValueError):
            GridSpec(lower=(0.0,), upper=(1.0,), bins=(0,))
        with pytest.raises(ValueError):
            GridSpec(lower=(0.0, 0.0), upper=(1.0,), bins=(5,))

    def test_cell_count_and_flatten_roundtrip(self):
        spec = GridSpec(lower=(0, 0, 0), upper=(1, 1, 1), bins=(3, 4, 5))
        assert spec.cell_count == 60
        for flat in range(60):
            assert spec.flatten(spec.unflatten(flat)) == flat


class TestCellIndex:
    def test_arm_midpoint(self):
        # 7 mm cells: (0.0, 0.35) sits 100 cells from x=-0.7 and 50 from y=0
        assert cell_index((0.0, 0.35), ARM_SPEC) == (100, 50)

    def test_upper_boundary_clamps_into_last_bin(self):
        assert cell_index((0.7, 0.7), ARM_SPEC) == (199, 99)

    def test_lower_corner(self):
        assert cell_index((-0.7, 0.0), ARM_SPEC) == (0, 0)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            cell_index((0.0,), ARM_SPEC)

    @given(
        st.lists(
            st.floats(allow_nan=False, allow_infinity=False, width=64),
            min_size=2,
            max_size=2,
        )
    )
    def test_total_on_finite_descriptors(self, desc):
        idx = cell_index(desc, ARM_SPEC)
        assert 0 <= idx[0] < 200 and 0 <= idx[1] < 100

    def test_batch_matches_scalar(self):
        rng = np.random.default_rng(3)
        descs = rng.uniform(-1.0, 1.0, (500, 2))
        flats = cell_indices_flat(descs, ARM_SPEC)
        for d, f in zip(descs, flats):
            assert ARM_SPEC.flatten(cell_index(d, ARM_SPEC)) == f


class TestTryInsert:
    def test_empty_cell_inserts(self):
        grid = ArchiveGrid(ARM_SPEC, genome_length=4)
        assert grid.try_insert(make_elite((0.1, 0.1), 0.30)) is InsertOutcome.INSERTED_NEW
        assert grid.filled_count == 1

    def test_better_replaces(self):
        grid = ArchiveGrid(ARM_SPEC, genome_length=4)
        grid.try_insert(make_elite((0.1, 0.1), 0.30))
        assert grid.try_insert(make_elite((0.1, 0.1), 0.40)) is InsertOutcome.REPLACED
        flat = ARM_SPEC.flatten(cell_index((0.1, 0.1), ARM_SPEC))
        assert grid.cells[flat].performance == 0.40

    def test_tie_keeps_incumbent(self):
        grid = ArchiveGrid(ARM_SPEC, genome_length=4)
        first = make_elite((0.1, 0.1), 0.30)
        grid.try_insert(first)
        assert grid.try_insert(make_elite((0.1, 0.1), 0.30)) is InsertOutcome.REJECTED
        flat = ARM_SPEC.flatten(cell_index((0.1, 0.1), ARM_SPEC))
        assert grid.cells[flat] is first

    def test_rejects_genome_length_mismatch(self):
        grid = ArchiveGrid(ARM_SPEC, genome_length=8)
        with pytest.raises(ValueError):
            grid.try_insert(make_elite((0.1, 0.1), 0.30, genome_length=4))

    def test_rejects_non_finite_performance(self):
        grid = ArchiveGrid(ARM_SPEC, genome_length=4)
        with pytest.raises(ValueError):
            grid.try_insert(make_elite((0.1, 0.1), float("nan")))

    def test_per_cell_monotonicity_replay(self):
        rng = np.random.default_rng(7)
        grid = ArchiveGrid(ARM_SPEC, genome_length=4)
        best_seen: dict[int, float] = {}
        for _ in range(2000):
            desc = rng.uniform(-0.8, 0.8, 2)
            perf = float(rng.normal())
            grid.try_insert(make_elite(desc, perf, rng=rng))
            flat = ARM_SPEC.flatten(cell_index(desc, ARM_SPEC))
            best_seen[flat] = max(best_seen.get(flat, -np.inf), perf)
            assert grid.cells[flat].performance == best_seen[flat]

    def test_self_consistency_after_clamping(self):
        rng = np.random.default_rng(11)
        grid = ArchiveGrid(ARM_SPEC, genome_length=4)
        for _ in range(500):
            grid.try_insert(make_elite(rng.uniform(-2, 2, 2), rng.random(), rng=rng))
        for flat, elite in grid.cells.items():
            assert ARM_SPEC.flatten(cell_index(elite.descriptor, ARM_SPEC)) == flat


class TestRandomElite:
    def test_single_cell_certain(self):
        grid = ArchiveGrid(ARM_SPEC, genome_length=4)
        elite = make_elite((0.2, 0.2), 1.0)
        grid.try_insert(elite)
        rng = np.random.default_rng(0)
        assert all(grid.random_elite(rng) is elite for _ in range(20))

    def test_two_cells_uniform(self):
        grid = ArchiveGrid(ARM_SPEC, genome_length=4)
        a = make_elite((0.2, 0.2), 1.0)
        b = make_elite((-0.2, 0.2), 2.0)
        grid.try_insert(a)
        grid.try_insert(b)
        rng = np.random.default_rng(42)
        draws = 100_000
        hits_a = sum(grid.random_elite(rng) is a for _ in range(draws))
        assert abs(hits_a / draws - 0.5) < 0.01

    def test_empty_errors(self):
        grid = ArchiveGrid(ARM_SPEC, genome_length=4)
        with pytest.raises(EmptyArchiveError):
            grid.random_elite(np.random.default_rng(0))


class TestStats:
    def test_empty(self):
        st_ = ArchiveGrid(ARM_SPEC, genome_length=4).stats()
        assert st_ == (0, None, None) or (
            st_.filled_count == 0
            and st_.mean_performance is None
            and st_.max_performance is None
        )

    def test_two_cells(self):
        grid = ArchiveGrid(ARM_SPEC, genome_length=4)
        grid.try_insert(make_elite((0.2, 0.2), 0.1))
        grid.try_insert(make_elite((-0.2, 0.2), 0.3))
        st_ = grid.stats()
        assert st_.filled_count == 2
        assert st_.mean_performance == pytest.approx(0.2)
        assert st_.max_performance == 0.3

    def test_max_non_decreasing_over_inserts(self):
        rng = np.random.default_rng(5)
        grid = ArchiveGrid(ARM_SPEC, genome_length=4)
        prev = -np.inf
        for _ in range(1000):
            grid.try_insert(make_elite(rng.uniform(-0.7, 0.7, 2), rng.normal(), rng=rng))
            cur = grid.stats().max_performance
            assert cur >= prev
            prev = cur


class TestSerialization:
    def _random_grid(self, seed=0, cells=300):
        rng = np.random.default_rng(seed)
        grid = ArchiveGrid(ARM_SPEC, genome_length=8, evaluations=12345, seed=seed)
        for _ in range(cells):
            grid.try_insert(
                Elite(
                    genome=rng.random(8),
                    descriptor=rng.uniform(-0.7, 0.7, 2),
                    performance=float(rng.normal()),
                )
            )
        return grid

    def test_round_trip_exact(self):
        grid = self._random_grid()
        clone = deserialize_archive(serialize_archive(grid))
        assert clone.filled_count == grid.filled_count
        assert clone.evaluations == grid.evaluations
        assert clone.seed == grid.seed
        assert clone.spec == grid.spec
        for flat, elite in grid.cells.items():
            other = clone.cells[flat]
            assert other.performance == elite.performance  # bit-exact via %.17g
            np.testing.assert_allclose(other.genome, elite.genome, rtol=0, atol=1e-12)
            np.testing.assert_array_equal(other.descriptor, elite.descriptor)

    def test_serialization_deterministic(self):
        grid = self._random_grid(seed=9)
        assert serialize_archive(grid) == serialize_archive(grid)

    def test_metadata_block(self):
        text = serialize_archive(self._random_grid(), extra_metadata={"config_hash": "abc"})
        head = text.splitlines()[:9]
        assert head[0] == "ITEQD-ARCHIVE v1"
        assert head[1] == "dims,2"
        assert any(line.startswith("config_hash,abc") for line in head)

    def test_bad_magic_rejected(self):
        with pytest.raises(ArchiveFormatError):
            deserialize_archive("NOT-AN-ARCHIVE\n")

    def test_truncated_rejected(self):
        text = serialize_archive(self._random_grid(cells=5))
        broken = text.replace("cells\n", "")
        with pytest.raises(ArchiveFormatError):
            deserialize_archive(broken)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(min_value=0, max_value=2**31 - 1))
    def test_round_trip_property(self, seed):
        grid = self._random_grid(seed=seed, cells=40)
        clone = deserialize_archive(serialize_archive(grid))
        assert sorted(clone.cells) == sorted(grid.cells)
        for flat in grid.cells:
            assert clone.cells[flat].performance == grid.cells[flat].performance
