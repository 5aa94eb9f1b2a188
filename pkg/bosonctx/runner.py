"""Scenario runner: load scenario files, dispatch to the engines, build and write reports."""
import contextlib
import csv
import io
import json
import logging
import math
import os
import tempfile
from dataclasses import dataclass
from datetime import datetime
from itertools import combinations, permutations
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
from dateutil.tz import tzutc

import bosonctx
from bosonctx import fock_quantum as fq
from bosonctx import hv_models as hv
from bosonctx import inequalities as iq
from bosonctx import schemas
from bosonctx.errors import BosonCtxError, ScenarioParseError, ScenarioValidationError

logger = logging.getLogger(__name__)

DEFAULT_SEED = 20140
DEFAULT_TOLERANCE = 1e-7
DEFAULT_REPLY_SAMPLES = 10_000
BUNDLED_SCENARIOS = Path(__file__).parent / "scenarios"
CSV_COLUMNS = ("quantity", "value", "expected", "provenance", "status")
FORMATS = ("json", "csv")


@dataclass(frozen=True)
class Expectation:
    value: Any
    tolerance: Optional[float] = None
    provenance: str = ""


class _Trace:
    """Ordered record of the engine operations a run invoked."""

    def __init__(self):
        self.names: List[str] = []

    def __call__(self, operation: Callable, *args, **kwargs):
        if operation.__name__ not in self.names:
            self.names.append(operation.__name__)
        return operation(*args, **kwargs)


def _plain(value: Any) -> Any:
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    return value


def _marginal_deviation(behavior: hv.Behavior) -> float:
    return max(
        abs(behavior.marginal(context, observable) - 0.5)
        for context in behavior.contexts
        for observable in context.observables
    )


class ScenarioRunner:
    """Runs scenario files against the quantum, hidden-variable and inequality engines."""

    def __init__(
        self,
        scenario_dir: Optional[str] = None,
        seed: Optional[int] = None,
        tolerance: Optional[float] = None,
    ):
        """Initialize the runner.

        Args:
            scenario_dir: Directory of bundled scenarios (default: BOSONCTX_SCENARIO_DIR or the package's scenarios/)
            seed: Default Monte Carlo seed (default: BOSONCTX_SEED or 20140)
            tolerance: Default MATCH tolerance (default: BOSONCTX_TOLERANCE or 1e-7)
        """
        self.scenario_dir = Path(scenario_dir or os.environ.get("BOSONCTX_SCENARIO_DIR", BUNDLED_SCENARIOS))
        self.seed = int(seed if seed is not None else os.environ.get("BOSONCTX_SEED", DEFAULT_SEED))
        self.tolerance = float(
            tolerance if tolerance is not None else os.environ.get("BOSONCTX_TOLERANCE", DEFAULT_TOLERANCE)
        )

    def scenario_path(self, name: str) -> Path:
        """Path of a bundled scenario file."""
        return self.scenario_dir / name

    def bundled_scenarios(self) -> List[Path]:
        return sorted(self.scenario_dir.glob("*.json"))

    def load(self, path: Any) -> Dict[str, Any]:
        """Read and validate a scenario file.

        Raises:
            ScenarioParseError: file unreadable or not JSON
            ScenarioValidationError: schema violation
        """
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ScenarioParseError(f"Cannot read {path}: {exc}") from exc
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ScenarioParseError(f"{path}: {exc}") from exc
        schemas.validate(payload)
        return payload

    def execute(
        self,
        payload: Dict[str, Any],
        seed_override: Optional[int] = None,
        samples_override: Optional[int] = None,
        inject_fault: Optional[str] = None,
    ) -> Dict[str, Any]:
        """Validate ``payload`` and compute its RunReport.

        Args:
            payload: Decoded scenario file
            seed_override: Replaces any seed in the payload
            samples_override: Replaces any Monte Carlo sample count in the payload
            inject_fault: Quantity whose computed value is deliberately corrupted (test hook)

        Returns:
            RunReport dictionary
        """
        schemas.validate(payload)
        kind = payload["kind"]
        seed = self._resolve_seed(payload, seed_override)
        logger.info("Running %s scenario (seed %d)", kind, seed)
        if kind == "full-report":
            samples = samples_override if samples_override is not None else payload.get("samples")
            return self.reproduce_reply(samples=samples, seed=seed, inject_fault=inject_fault)

        handlers = {
            "quantum": self._quantum,
            "hidden-variable": self._hidden_variable,
            "bounds": self._bounds,
        }
        trace = _Trace()
        results, quantities = handlers[kind](payload, trace, seed, samples_override)
        expectations = {
            name: Expectation(item["value"], item.get("tolerance"), item.get("provenance", ""))
            for name, item in payload.get("expect", {}).items()
        }
        unknown = sorted(set(expectations) - set(quantities))
        if unknown:
            raise ScenarioValidationError(f"Expectations name unknown quantities: {unknown}")
        return self._report(kind, payload, results, quantities, expectations, trace, seed, inject_fault)

    def run(
        self,
        scenario_path: Any,
        output_path: Any,
        fmt: str = "json",
        seed_override: Optional[int] = None,
        samples_override: Optional[int] = None,
        inject_fault: Optional[str] = None,
    ) -> int:
        """Run one scenario file and write its report.

        Returns:
            Exit status: 0 success, 1 MISMATCH rows, otherwise the error's exit code
        """
        try:
            payload = self.load(scenario_path)
            report = self.execute(payload, seed_override, samples_override, inject_fault)
            self.write_report(report, output_path, fmt)
        except BosonCtxError as exc:
            logger.error("%s: %s", type(exc).__name__, exc)
            return exc.exit_code
        return self.exit_status(report)

    def run_reply(
        self,
        output_path: Any,
        fmt: str = "json",
        seed_override: Optional[int] = None,
        samples_override: Optional[int] = None,
        inject_fault: Optional[str] = None,
    ) -> int:
        """Write the consolidated reply report; same exit status rules as ``run``."""
        try:
            report = self.reproduce_reply(samples_override, seed_override, inject_fault)
            self.write_report(report, output_path, fmt)
        except BosonCtxError as exc:
            logger.error("%s: %s", type(exc).__name__, exc)
            return exc.exit_code
        return self.exit_status(report)

    @staticmethod
    def exit_status(report: Dict[str, Any]) -> int:
        return 1 if any(row["status"] == "MISMATCH" for row in report["rows"]) else 0

    def write_report(self, report: Dict[str, Any], output_path: Any, fmt: str = "json") -> Path:
        """Write ``report`` atomically (temporary file, then rename)."""
        if fmt == "json":
            text = json.dumps(report, indent=2) + "\n"
        elif fmt == "csv":
            buffer = io.StringIO()
            writer = csv.DictWriter(buffer, fieldnames=CSV_COLUMNS, lineterminator="\n")
            writer.writeheader()
            for row in report["rows"]:
                writer.writerow({k: "" if row[k] is None else row[k] for k in CSV_COLUMNS})
            text = buffer.getvalue()
        else:
            raise ScenarioValidationError(f"Unknown report format {fmt!r}; expected one of {FORMATS}")

        path = Path(output_path)
        path.parent.mkdir(parents=True, exist_ok=True)
        handle, temporary = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
        try:
            with os.fdopen(handle, "w", encoding="utf-8", newline="") as stream:
                stream.write(text)
            os.replace(temporary, path)
        except BaseException:
            with contextlib.suppress(FileNotFoundError):
                os.unlink(temporary)
            raise
        logger.info("Wrote %s report to %s", fmt, path)
        return path

    def reproduce_reply(
        self,
        samples: Optional[int] = None,
        seed: Optional[int] = None,
        inject_fault: Optional[str] = None,
    ) -> Dict[str, Any]:
        """Recompute every quantitative claim of the dispute in one report.

        Args:
            samples: Monte Carlo runs per context (default DEFAULT_REPLY_SAMPLES)
            seed: Monte Carlo seed (default: the runner's seed)
            inject_fault: Quantity whose computed value is deliberately corrupted (test hook)

        Returns:
            RunReport dictionary; every row with an expectation should read MATCH
        """
        seed = self.seed if seed is None else seed
        samples = DEFAULT_REPLY_SAMPLES if samples is None else samples
        trace = _Trace()
        results: Dict[str, Any] = {}
        quantities: Dict[str, Any] = {}
        expectations: Dict[str, Expectation] = {}

        def claim(name, value, expected=None, provenance="", tolerance=None):
            quantities[name] = value
            if expected is not None:
                expectations[name] = Expectation(expected, tolerance, provenance)

        # Two photons on a balanced beam splitter.
        splitter = fq.ModeUnitary.balanced_beam_splitter()
        single, pair, crowd = fq.FockState((1, 0)), fq.FockState((1, 1)), fq.FockState((2, 1))
        hom = trace(fq.output_distribution, splitter, pair)
        results["hom_distribution"] = hom.to_json()
        for occupations, expected, provenance in (
            ((2, 0), 0.5, "DERIVED: two-photon amplitude sum"),
            ((0, 2), 0.5, "DERIVED: two-photon amplitude sum"),
            ((1, 1), 0.0, "DERIVED: two-photon interference null"),
        ):
            output = fq.FockState(occupations)
            claim(
                f"hom.p[{pair}->{output}]",
                trace(fq.transition_probability, splitter, pair, output),
                expected,
                provenance,
                1e-10,
            )
        lone = trace(fq.output_distribution, splitter, single)
        claim("hom.marginal[(1,0)][0]", trace(fq.per_photon_marginal, lone, 0), 0.5,
              "CLAIM: a lone photon is transmitted or reflected with probability 1/2", 1e-10)
        claim("hom.marginal[(1,1)][0]", trace(fq.per_photon_marginal, hom, 0), 0.5,
              "CLAIM: with a second photon each photon still has a 1/2 chance", 1e-10)
        results["no_signalling"] = []
        for added, provenance in (
            (pair, "CLAIM: a photon in the other port leaves the marginal unchanged"),
            (crowd, "DERIVED: amplitude-sum oracle"),
        ):
            report = trace(fq.no_signalling_report, splitter, single, added, 0)
            results["no_signalling"].append(
                {"base": list(single.occupations), "added": list(added.occupations), "mode": 0,
                 "before": report.marginal_before, "after": report.marginal_after,
                 "difference": report.difference}
            )
            claim(f"no_signalling[{single}->{added}][0].difference", report.difference, 0.0, provenance, 1e-10)
        claim("permanent[ones 2x2]", trace(fq.permanent, np.ones((2, 2))).real, 2.0,
              "TRIVIAL: permanent of the all-ones matrix is n!", 1e-12)

        # The λ-ordering model on the KCBS pentagon and the Specker triangle.
        kcbs, specker = iq.CycleScenario.of_length(5), iq.CycleScenario.of_length(3)
        kcbs_exact = trace(hv.lambda_exact_behavior, kcbs)
        specker_exact = trace(hv.lambda_exact_behavior, specker)
        results["kcbs_lambda_behavior"] = kcbs_exact.to_json()
        disturbance = trace(iq.no_disturbance_check, kcbs_exact, 1e-12)
        claim("kcbs.lambda.no_disturbance", disturbance.passed, True,
              "DERIVED: every marginal is 1/2 by exchange symmetry")
        claim("kcbs.lambda.max_marginal_gap", disturbance.max_gap, 0.0,
              "DERIVED: every marginal is 1/2 by exchange symmetry", 0.0)

        state = hv.HiddenLambdaState((0.2, 0.5, 0.9))
        claim("witness.A2[(2,3)]", trace(hv.lambda_model_outcome, state, (2, 3))[0], -1,
              "CLAIM: with λ1 < λ2 < λ3, measuring A2 with A3 gives A2 = -1")
        claim("witness.A2[(1,2)]", trace(hv.lambda_model_outcome, state, (1, 2))[1], 1,
              "CLAIM: with λ1 < λ2 < λ3, measuring A2 with A1 gives A2 = +1")
        witness = trace(hv.context_dependence_witness, state, 2, (2, 3), (1, 2))
        results["witness"] = witness.to_json() if witness else None
        claim("witness.exists", witness is not None, True, "CLAIM: the outcome of A2 is context dependent")
        middle_only = all(
            (hv.context_dependence_witness(hv.HiddenLambdaState(order), 2, (2, 3), (1, 2)) is not None)
            == (sorted(order)[1] == order[1])
            for order in permutations(state.lambdas)
        )
        claim("witness.middle_order_statistic_only", middle_only, True,
              "DERIVED: all six orderings of three λ values")

        for label, scenario, exact, expected in (
            ("kcbs", kcbs, kcbs_exact, {"lambda.cycle_value": -5.0, "classical_min": -3.0, "classical_max": 5.0,
                                        "nd_min": -5.0, "nd_max": 5.0, "arithmetic_min": -5.0,
                                        "arithmetic_max": 5.0}),
            ("specker", specker, specker_exact, {"lambda.cycle_value": -3.0, "classical_min": -1.0,
                                                 "classical_max": 3.0, "nd_min": -3.0, "nd_max": 3.0,
                                                 "arithmetic_min": -3.0, "arithmetic_max": 3.0}),
        ):
            expr = iq.InequalityExpr.cycle_sum(scenario)
            bounds = iq.BoundsReport.from_extrema(
                trace(iq.classical_bound, scenario, expr),
                trace(iq.nd_bound, scenario, expr),
                trace(iq.arithmetic_bound, scenario, expr),
            )
            results[f"{label}_bounds"] = bounds.to_json()
            computed = {"lambda.cycle_value": trace(iq.cycle_value, exact, scenario)}
            computed.update({key: getattr(bounds, key) for key in expected if key != "lambda.cycle_value"})
            for key, value in computed.items():
                claim(f"{label}.{key}", value, expected[key], _BOUND_PROVENANCE[label][key])
        claim("kcbs.quantum_reference", iq.KCBS_QUANTUM_MINIMUM)

        alternating = trace(hv.deterministic_behavior, hv.DeterministicAssignment((1, -1, 1, -1, 1)), kcbs)
        claim("kcbs.deterministic[+-+-+].cycle_value", trace(iq.cycle_value, alternating, kcbs), -3.0,
              "DERIVED: an odd cycle keeps at least one correlated edge")

        # Exclusivity: counterfactual events against orthogonal projectors.
        events = iq.reflection_events(specker)
        results["triangle_events"] = [e.to_json() for e in events]
        pairwise = all(trace(iq.are_exclusive, a, b) for a, b in combinations(events, 2))
        triangle = trace(iq.exclusivity_sum, specker_exact, events)
        results["triangle_exclusivity"] = triangle.to_json()
        claim("exclusivity.triangle.pairwise_exclusive", pairwise, True,
              "DERIVED: consecutive events disagree on their shared boson")
        claim("exclusivity.triangle.sum", triangle.total, 1.5,
              "DERIVED: three events of probability 1/2 under the λ-model")
        claim("exclusivity.triangle.satisfies_E", triangle.satisfies_e, False,
              "CLAIM: the λ-model breaks the exclusivity bound of 1")
        both_orders = [iq.Event(hv.MeasurementContext(1, 2), (1, -1)), iq.Event(hv.MeasurementContext(1, 2), (-1, 1))]
        claim("exclusivity.context.sum", trace(iq.exclusivity_sum, specker_exact, both_orders).total, 1.0,
              "TRIVIAL: exhaustive outcomes of one context", 1e-10)
        basis = [np.outer(v, v.conj()) for v in np.eye(3, dtype=complex)]
        projected = trace(iq.projector_exclusivity_sum, np.ones(3, dtype=complex) / math.sqrt(3), basis)
        claim("exclusivity.projectors.orthogonal", projected.orthogonal, True, "TRIVIAL: orthonormal basis")
        claim("exclusivity.projectors.sum", projected.total, 1.0, "TRIVIAL: resolution of the identity", 1e-10)

        if samples:
            sampled = trace(hv.lambda_sample_behavior, kcbs, samples, seed)
            claim("kcbs.sample.cycle_value", trace(iq.cycle_value, sampled, kcbs), -5.0,
                  "DERIVED: every sampled run is anticorrelated", 0.02)
            claim("kcbs.sample.max_marginal_deviation", _marginal_deviation(sampled), 0.0,
                  "DERIVED: 5-sigma binomial bound", hv.sampling_tolerance(samples))

        inputs = {"samples": samples, "seed": seed}
        return self._report("full-report", inputs, results, quantities, expectations, trace, seed, inject_fault)

    def _resolve_seed(self, payload: Dict[str, Any], seed_override: Optional[int]) -> int:
        if seed_override is not None:
            return int(seed_override)
        for candidate in (payload.get("seed"), (payload.get("behavior") or {}).get("seed")):
            if candidate is not None:
                return int(candidate)
        return self.seed

    def _interferometer(self, config: Dict[str, Any]) -> fq.ModeUnitary:
        preset = config.get("preset")
        if preset == "balanced_beam_splitter":
            return fq.ModeUnitary.balanced_beam_splitter()
        if preset == "identity":
            return fq.ModeUnitary.identity(config.get("dim", 2))
        if preset == "beam_splitter":
            return fq.ModeUnitary.beam_splitter(config.get("transmissivity", 0.5), config.get("phase", 0.0))
        return fq.ModeUnitary.from_json(config)

    def _quantum(self, payload, trace, seed, samples_override) -> Tuple[Dict[str, Any], Dict[str, Any]]:
        unitary = self._interferometer(payload["interferometer"])
        results: Dict[str, Any] = {"interferometer": unitary.to_json()}
        quantities: Dict[str, Any] = {}

        results["distributions"] = []
        for occupations in payload.get("inputs", []):
            state = fq.FockState(tuple(occupations))
            dist = trace(fq.output_distribution, unitary, state)
            marginals = [trace(fq.per_photon_marginal, dist, mode) for mode in range(dist.dim)]
            bunching = fq.bunching_probability(dist)
            results["distributions"].append(
                {"input": list(state.occupations), "distribution": dist.to_json(),
                 "marginals": marginals, "bunching": bunching}
            )
            for output, p in dist.support:
                quantities[f"p[{state}->{output}]"] = p
            for mode, marginal in enumerate(marginals):
                quantities[f"marginal[{state}][{mode}]"] = marginal
            quantities[f"bunching[{state}]"] = bunching

        results["transitions"] = []
        for item in payload.get("transitions", []):
            source, target = fq.FockState(tuple(item["input"])), fq.FockState(tuple(item["output"]))
            p = trace(fq.transition_probability, unitary, source, target)
            results["transitions"].append({"input": item["input"], "output": item["output"], "p": p})
            quantities[f"p[{source}->{target}]"] = p

        results["no_signalling"] = []
        for item in payload.get("no_signalling", []):
            base, added = fq.FockState(tuple(item["base"])), fq.FockState(tuple(item["added"]))
            report = trace(fq.no_signalling_report, unitary, base, added, item["mode"])
            key = f"no_signalling[{base}->{added}][{item['mode']}]"
            results["no_signalling"].append(dict(item, before=report.marginal_before,
                                                 after=report.marginal_after, difference=report.difference))
            quantities[f"{key}.before"] = report.marginal_before
            quantities[f"{key}.after"] = report.marginal_after
            quantities[f"{key}.difference"] = report.difference

        results["permanents"] = []
        for index, matrix in enumerate(payload.get("permanents", [])):
            value = trace(fq.permanent, fq.complex_array(matrix, "permanent matrix"))
            results["permanents"].append({"re": value.real, "im": value.imag})
            quantities[f"permanent[{index}].re"] = value.real
            quantities[f"permanent[{index}].im"] = value.imag

        if "projectors" in payload:
            family = payload["projectors"]
            state = fq.complex_array(family["state"], "projector state")
            projected = trace(
                iq.projector_exclusivity_sum, state, [fq.complex_array(p, "projector") for p in family["projectors"]]
            )
            results["projectors"] = projected.to_json()
            quantities["projectors.sum"] = projected.total
            quantities["projectors.orthogonal"] = projected.orthogonal
        return results, quantities

    def _behavior_quantities(self, prefix, behavior, scenario, trace, quantities, tol) -> None:
        for context in scenario.contexts:
            quantities[f"{prefix}.correlator{context}"] = trace(iq.correlator, behavior, context)
        quantities[f"{prefix}.max_marginal_deviation"] = _marginal_deviation(behavior)
        report = trace(iq.no_disturbance_check, behavior, tol)
        quantities[f"{prefix}.no_disturbance.passed"] = report.passed
        quantities[f"{prefix}.no_disturbance.max_gap"] = report.max_gap

    def _hidden_variable(self, payload, trace, seed, samples_override) -> Tuple[Dict[str, Any], Dict[str, Any]]:
        scenario = hv.Scenario.from_json(payload["scenario"])
        law = hv.LambdaLaw.from_json(payload.get("law"))
        results: Dict[str, Any] = {"scenario": scenario.to_json(), "law": law.to_json()}
        quantities: Dict[str, Any] = {}

        if law.exchangeable:
            exact = trace(hv.lambda_exact_behavior, scenario, law)
            results["exact_behavior"] = exact.to_json()
            self._behavior_quantities("exact", exact, scenario, trace, quantities, self.tolerance)

        samples = samples_override if samples_override is not None else payload.get("samples")
        if samples:
            sampled = trace(hv.lambda_sample_behavior, scenario, samples, seed, law)
            results["sample_behavior"] = sampled.to_json()
            results["samples"] = samples
            tolerance = hv.sampling_tolerance(samples)
            quantities["sample.tolerance"] = tolerance
            self._behavior_quantities("sample", sampled, scenario, trace, quantities, 2 * tolerance)

        if "witnesses" in payload and "lambdas" not in payload:
            raise ScenarioValidationError("Witnesses need a fixed λ-state under 'lambdas'")
        if "lambdas" in payload:
            state = hv.HiddenLambdaState(tuple(payload["lambdas"]))
            results["outcomes"] = []
            for context in scenario.contexts:
                values = trace(hv.lambda_model_outcome, state, context)
                results["outcomes"].append({"context": context.to_json(), "values": list(values)})
                for observable, value in zip(context.observables, values):
                    quantities[f"outcome{context}.A{observable}"] = value
            results["witnesses"] = []
            for item in payload.get("witnesses", []):
                first, second = (hv.as_context(c) for c in item["contexts"])
                observable = item["observable"]
                witness = trace(hv.context_dependence_witness, state, observable, first, second)
                results["witnesses"].append(witness.to_json() if witness else None)
                key = f"witness[A{observable};{first}|{second}]"
                quantities[f"{key}.exists"] = witness is not None
                if witness is not None:
                    quantities[f"{key}.value_a"] = witness.value_a
                    quantities[f"{key}.value_b"] = witness.value_b

        results["deterministic"] = []
        for index, values in enumerate(payload.get("assignments", [])):
            behavior = trace(hv.deterministic_behavior, hv.DeterministicAssignment(tuple(values)), scenario)
            results["deterministic"].append({"values": values, "behavior": behavior.to_json()})
            quantities[f"deterministic[{index}].correlator_sum"] = math.fsum(
                trace(iq.correlator, behavior, context) for context in scenario.contexts
            )
            quantities[f"deterministic[{index}].no_disturbance"] = trace(
                iq.no_disturbance_check, behavior, self.tolerance
            ).passed
        return results, quantities

    def _behavior(self, config, scenario, trace, seed, samples_override) -> hv.Behavior:
        source = config["source"]
        if source == "lambda-exact":
            return trace(hv.lambda_exact_behavior, scenario, hv.LambdaLaw.from_json(config.get("law")))
        if source == "lambda-sample":
            samples = samples_override if samples_override is not None else config.get("samples")
            if not samples:
                raise ScenarioValidationError("A lambda-sample behavior needs 'samples'")
            return trace(hv.lambda_sample_behavior, scenario, samples, seed, hv.LambdaLaw.from_json(config.get("law")))
        if source == "deterministic":
            if "values" not in config:
                raise ScenarioValidationError("A deterministic behavior needs 'values'")
            return trace(hv.deterministic_behavior, hv.DeterministicAssignment(tuple(config["values"])), scenario)
        if "tables" not in config:
            raise ScenarioValidationError("A table behavior needs 'tables'")
        return hv.Behavior.from_json(config["tables"])

    def _bounds(self, payload, trace, seed, samples_override) -> Tuple[Dict[str, Any], Dict[str, Any]]:
        if "cycle" in payload:
            scenario = iq.CycleScenario.of_length(payload["cycle"])
        else:
            scenario = hv.Scenario.from_json(payload["scenario"])
        inequality = payload.get("inequality", "cycle-sum")
        if inequality == "cycle-sum":
            expr = iq.InequalityExpr.cycle_sum(scenario)
        else:
            expr = iq.InequalityExpr.from_json(inequality)
        expr.validate_against(scenario)

        bounds = iq.BoundsReport.from_extrema(
            trace(iq.classical_bound, scenario, expr),
            trace(iq.nd_bound, scenario, expr),
            trace(iq.arithmetic_bound, scenario, expr),
        )
        results: Dict[str, Any] = {
            "scenario": scenario.to_json(),
            "inequality": expr.to_json(),
            "bounds": bounds.to_json(),
        }
        quantities: Dict[str, Any] = {
            key: getattr(bounds, key)
            for key in ("classical_min", "classical_max", "nd_min", "nd_max", "arithmetic_min", "arithmetic_max")
        }

        behavior = None
        if "behavior" in payload:
            behavior = self._behavior(payload["behavior"], scenario, trace, seed, samples_override)
            results["behavior"] = behavior.to_json()
            quantities["behavior.value"] = expr.evaluate(behavior)
            quantities["behavior.cycle_value"] = trace(iq.cycle_value, behavior, scenario)
            report = trace(iq.no_disturbance_check, behavior, self.tolerance)
            results["no_disturbance"] = report.to_json()
            quantities["behavior.no_disturbance.passed"] = report.passed
            quantities["behavior.no_disturbance.max_gap"] = report.max_gap

        if "events" in payload:
            if behavior is None:
                raise ScenarioValidationError("Events need a 'behavior' to be evaluated on")
            if payload["events"] == "reflection":
                events = iq.reflection_events(scenario)
            else:
                events = [iq.Event.from_json(item) for item in payload["events"]]
            results["events"] = [e.to_json() for e in events]
            results["exclusive_pairs"] = [
                {"events": [i, j], "exclusive": trace(iq.are_exclusive, events[i], events[j])}
                for i, j in combinations(range(len(events)), 2)
            ]
            summed = trace(iq.exclusivity_sum, behavior, events)
            results["exclusivity"] = summed.to_json()
            quantities["events.sum"] = summed.total
            quantities["events.pairwise_exclusive"] = summed.pairwise_exclusive
            quantities["events.satisfies_E"] = summed.satisfies_e
        return results, quantities

    def _row(self, name: str, value: Any, expectation: Optional[Expectation]) -> Dict[str, Any]:
        if expectation is None:
            return {"quantity": name, "value": value, "expected": None, "provenance": "", "status": "INFO"}
        if isinstance(expectation.value, bool) or isinstance(value, bool):
            matched = isinstance(value, bool) and value == expectation.value
        else:
            tolerance = self.tolerance if expectation.tolerance is None else expectation.tolerance
            matched = abs(value - expectation.value) <= tolerance
        return {
            "quantity": name,
            "value": value,
            "expected": expectation.value,
            "provenance": expectation.provenance,
            "status": "MATCH" if matched else "MISMATCH",
        }

    def _report(self, kind, inputs, results, quantities, expectations, trace, seed, inject_fault) -> Dict[str, Any]:
        if inject_fault is not None and inject_fault not in quantities:
            raise ScenarioValidationError(f"Cannot inject a fault into unknown quantity {inject_fault!r}")
        rows = []
        for name, value in quantities.items():
            value = _plain(value)
            if name == inject_fault:
                value = (not value) if isinstance(value, bool) else value + 1.0
            row = self._row(name, value, expectations.get(name))
            if row["status"] == "MISMATCH":
                logger.warning("MISMATCH %s: got %r, expected %r", name, row["value"], row["expected"])
            rows.append(row)
        matched = sum(row["status"] == "MATCH" for row in rows)
        logger.info("%d of %d expected rows match", matched, len(expectations))
        return {
            "kind": kind,
            "inputs": inputs,
            "results": results,
            "operations": list(trace.names),
            "rows": rows,
            "provenance": {
                "seed": seed,
                "version": bosonctx.__version__,
                "timestamp": datetime.now(tzutc()).isoformat(),
            },
        }


_BOUND_PROVENANCE = {
    "kcbs": {
        "lambda.cycle_value": "CLAIM: the λ-model reaches the KCBS no-disturbance and arithmetic bound of -5",
        "classical_min": "DERIVED: enumeration of all 2^5 assignments",
        "classical_max": "DERIVED: enumeration of all 2^5 assignments",
        "nd_min": "CLAIM: the KCBS no-disturbance bound is -5",
        "nd_max": "TRIVIAL: all-correlated tables",
        "arithmetic_min": "CLAIM: the KCBS arithmetic bound is -5",
        "arithmetic_max": "TRIVIAL: five terms of +1",
    },
    "specker": {
        "lambda.cycle_value": "DERIVED: three anticorrelated edges violate Specker's inequality maximally",
        "classical_min": "DERIVED: enumeration of all 2^3 assignments",
        "classical_max": "DERIVED: enumeration of all 2^3 assignments",
        "nd_min": "DERIVED: anticorrelated tables with uniform marginals are no-disturbance feasible",
        "nd_max": "TRIVIAL: all-correlated tables",
        "arithmetic_min": "TRIVIAL: three terms of -1",
        "arithmetic_max": "TRIVIAL: three terms of +1",
    },
}
