"""Assertion helpers for engine results and run reports."""
import json
import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional

import numpy as np
from dateutil.parser import isoparse

from bosonctx import schemas
from bosonctx.fock_quantum import OutcomeDistribution
from bosonctx.hv_models import Behavior
from bosonctx.inequalities import BoundsReport, LP_TOL, no_disturbance_check

ROW_STATUSES = ("MATCH", "MISMATCH", "INFO")


class BosonCtxAssertions:
    """Assertion helpers for distributions, Behaviors, bounds and reports."""

    @staticmethod
    def assert_close(actual: float, expected: float, tol: float = 1e-10, message: Optional[str] = None):
        """Assert two reals differ by at most ``tol``."""
        msg = message or f"Expected {expected!r} within {tol}, got {actual!r}"
        assert abs(actual - expected) <= tol, msg

    @staticmethod
    def assert_relative_close(actual: complex, expected: complex, rel: float = 1e-12):
        """Assert relative error below ``rel`` (absolute when ``expected`` is near zero)."""
        scale = max(abs(expected), 1.0)
        assert abs(actual - expected) <= rel * scale, \
            f"Expected {expected!r}, got {actual!r} (relative error {abs(actual - expected) / scale:.3e})"

    @staticmethod
    def assert_normalized(dist: OutcomeDistribution, tol: float = 1e-10):
        """Assert a distribution sums to 1 and every outcome conserves photon number."""
        total = math.fsum(p for _, p in dist.support)
        assert abs(total - 1.0) <= tol, f"Distribution sums to {total!r}"
        photons = {state.total_photons for state, _ in dist.support}
        assert len(photons) == 1, f"Outcomes carry different photon numbers: {sorted(photons)}"

    @staticmethod
    def assert_behavior_normalized(behavior: Behavior, tol: float = 1e-10):
        """Assert every table of a Behavior is a probability distribution."""
        for context in behavior.contexts:
            table = behavior.table(context)
            assert np.all(table >= 0), f"Negative entry in table for {context}: {table}"
            assert abs(math.fsum(table) - 1.0) <= tol, f"Table for {context} sums to {math.fsum(table)!r}"

    @staticmethod
    def assert_no_disturbance(behavior: Behavior, tol: float = 1e-10):
        """Assert shared observables have equal marginals in every context."""
        report = no_disturbance_check(behavior, tol)
        assert report.passed, \
            f"Observable A{report.worst_observable} is disturbed (marginal gap {report.max_gap!r})"

    @staticmethod
    def assert_anticorrelated(behavior: Behavior):
        """Assert every context only ever returns opposite values."""
        for context in behavior.contexts:
            assert behavior.probability(context, (1, 1)) == 0.0, f"{context} has mass on (+1, +1)"
            assert behavior.probability(context, (-1, -1)) == 0.0, f"{context} has mass on (-1, -1)"

    @staticmethod
    def assert_bounds_ordered(report: BoundsReport, tol: float = LP_TOL):
        """Assert arithmetic ≤ ND ≤ classical ≤ classical ≤ ND ≤ arithmetic."""
        chain = [report.arithmetic_min, report.nd_min, report.classical_min,
                 report.classical_max, report.nd_max, report.arithmetic_max]
        for lower, upper in zip(chain, chain[1:]):
            assert lower <= upper + tol, f"Bounds out of order: {chain}"

    @staticmethod
    def assert_report_valid(report: Dict[str, Any]):
        """Assert a RunReport has the documented shape and re-validating payloads.

        Example: assertions.assert_report_valid(json.loads(path.read_text()))
        """
        for key in ("kind", "inputs", "results", "operations", "rows", "provenance"):
            assert key in report, f"Report missing '{key}'"
        provenance = report["provenance"]
        assert isinstance(provenance["seed"], int), f"Seed {provenance['seed']!r} is not an integer"
        assert provenance["version"], "Report has no version"
        stamp = isoparse(provenance["timestamp"])
        assert stamp.tzinfo is not None, "Timestamp is not timezone aware"
        for row in report["rows"]:
            assert set(row) == {"quantity", "value", "expected", "provenance", "status"}, \
                f"Unexpected row layout {sorted(row)}"
            assert row["status"] in ROW_STATUSES, f"Unknown status {row['status']!r}"
        BosonCtxAssertions.assert_payloads_revalidate(report["results"])
        return report

    @staticmethod
    def assert_payloads_revalidate(results: Any):
        """Assert every emitted Behavior and distribution validates against the input schemas."""
        for key, value in _walk(results):
            if (key.endswith("behavior") or key.startswith("nd_arg")) and isinstance(value, list):
                schemas.validate(value, "behavior")
            elif key.endswith("distribution") and isinstance(value, list):
                schemas.validate(value, "distribution")

    @staticmethod
    def assert_rows_match(report: Dict[str, Any], minimum: int = 1):
        """Assert no row is a MISMATCH and at least ``minimum`` rows were checked."""
        mismatches = [row for row in report["rows"] if row["status"] == "MISMATCH"]
        assert not mismatches, "MISMATCH rows:\n" + "\n".join(
            f"  {row['quantity']}: got {row['value']!r}, expected {row['expected']!r}" for row in mismatches
        )
        matched = sum(row["status"] == "MATCH" for row in report["rows"])
        assert matched >= minimum, f"Only {matched} MATCH rows, expected at least {minimum}"

    @staticmethod
    def row(report: Dict[str, Any], quantity: str) -> Dict[str, Any]:
        """Return the row for ``quantity`` or fail."""
        for candidate in report["rows"]:
            if candidate["quantity"] == quantity:
                return candidate
        raise AssertionError(f"Report has no row for {quantity!r}")

    @staticmethod
    def assert_row_status(report: Dict[str, Any], quantity: str, status: str):
        actual = BosonCtxAssertions.row(report, quantity)["status"]
        assert actual == status, f"Expected {quantity} to be {status}, got {actual}"

    @staticmethod
    def load_report(path: Path) -> Dict[str, Any]:
        """Read a JSON report written by the runner."""
        path = Path(path)
        assert path.exists(), f"Report {path} was not written"
        return json.loads(path.read_text(encoding="utf-8"))

    @staticmethod
    def operations(reports: Iterable[Dict[str, Any]]) -> List[str]:
        """Union of the operations several reports invoked, sorted."""
        return sorted({name for report in reports for name in report["operations"]})


def _walk(node: Any, key: str = ""):
    if isinstance(node, dict):
        for child_key, child in node.items():
            yield child_key, child
            yield from _walk(child, child_key)
    elif isinstance(node, list):
        for child in node:
            yield from _walk(child, key)
