from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from iteqd.arm import DEFAULT_WORKSPACE, MapCreationEvaluator
from iteqd.map_elites import MapElitesConfig, PolynomialMutation, run_map_elites

# One line per acceptance criterion, printed in the terminal summary.
ACCEPTANCE_LINES: list[tuple[int, str]] = []


@pytest.fixture(scope="session")
def acceptance_report():
    def record(num: int, name: str, ok: bool, detail: str = "") -> bool:
        status = "PASS" if ok else "FAIL"
        line = f"ACCEPTANCE {num:02d} [{status}] {name}" + (f" ({detail})" if detail else "")
        ACCEPTANCE_LINES.append((num, line))
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(line)


ARM_MAP_EVALS = 300_000
ARM_MAP_BATCH = 4096
ARM_MAP_SEEDS = tuple(range(100, 115))


def build_arm_map(seed: int, evals: int = ARM_MAP_EVALS):
    cfg = MapElitesConfig(
        total_iterations=evals,
        genome_length=8,
        mutation=PolynomialMutation(),
        seed=seed,
        init_random_count=400,
        batch_size=ARM_MAP_BATCH,
    )
    return run_map_elites(cfg, DEFAULT_WORKSPACE.grid_spec(), MapCreationEvaluator())


@pytest.fixture(scope="session")
def arm_maps15():
    """Fifteen independently seeded arm archives shared by the acceptance suite."""
    return [(seed, build_arm_map(seed)) for seed in ARM_MAP_SEEDS]


@pytest.fixture(scope="session")
def shared_state():
    """Cross-test scratch space for the determinism criterion."""
    return {}
