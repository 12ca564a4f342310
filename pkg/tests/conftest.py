import numpy as np
import pytest

from sweetspot.synthfield import SynthConfig, generate


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(scope="session")
def small_field(tmp_path_factory):
    """A small synthetic field written to disk, shared across tests."""
    cfg = SynthConfig(n_vertical=30, n_horizontal=24, n_short_history=2, n_gas_unreported=1, n_missing_tops=2, seed=11)
    field = generate(cfg)
    root = tmp_path_factory.mktemp("field")
    field.write(root)
    return root, field, cfg


def pytest_configure(config):
    config._acceptance_lines = []


@pytest.fixture
def acceptance(request):
    """Record one pass/fail line for an acceptance criterion."""

    def record(number: int, passed: bool, detail: str) -> None:
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'} | {detail}"
        request.config._acceptance_lines.append((number, line))
        print(line)

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
