"""Pytest configuration and shared fixtures."""
import pytest
import sys
import os
from pathlib import Path

import numpy as np
from hypothesis import settings, HealthCheck

# Add repository root to path for imports
sys.path.insert(0, os.path.dirname(__file__))

from bosonctx.runner import ScenarioRunner
from utils.assertions import BosonCtxAssertions
from fixtures.scenario_generators import ScenarioGenerator


settings.register_profile("ci", max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("dev", max_examples=50, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "dev"))

# Reports written during the current test
_written_reports = []


@pytest.fixture(scope="function")
def runner():
    """Create a scenario runner with report tracking."""
    runner = ScenarioRunner()

    # Wrap write_report to track written files
    original_write = runner.write_report

    def tracked_write(report, output_path, fmt="json"):
        path = original_write(report, output_path, fmt)
        _written_reports.append(Path(path))
        return path

    runner.write_report = tracked_write
    return runner


@pytest.fixture(scope="function")
def assertions():
    """Create assertions helper."""
    return BosonCtxAssertions()


@pytest.fixture(scope="function")
def generator(request):
    """Scenario generator with Faker seeded from the test name."""
    ScenarioGenerator.seed(sum(request.node.name.encode()))
    return ScenarioGenerator()


@pytest.fixture(scope="function")
def rng():
    """Seeded numpy generator."""
    return np.random.default_rng(20140)


@pytest.fixture(scope="function")
def scenario_file(tmp_path):
    """Write a scenario payload (dict or raw text) and return its path."""
    import json

    def write(payload, name="scenario.json"):
        path = tmp_path / name
        path.write_text(payload if isinstance(payload, str) else json.dumps(payload), encoding="utf-8")
        return path

    return write


@pytest.fixture(scope="function", autouse=True)
def cleanup_written_reports():
    """Delete every report file a test wrote, and any temporary file left beside it."""
    _written_reports.clear()

    yield  # Let the test run first

    for path in _written_reports:
        try:
            path.unlink()
        except FileNotFoundError:
            pass
        for leftover in path.parent.glob(f".{path.name}.*.tmp"):
            leftover.unlink()

    _written_reports.clear()
