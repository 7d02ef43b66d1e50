"""Command-line front end.

Subcommands::

    coneapprox approx     --config cfg.json [--out out.json]
    coneapprox infer      --config cfg.json [--out out.json]
    coneapprox experiment --config cfg.json [--out results] [--jobs N]
    coneapprox diagnose   --config cfg.json [--out out.json]
    coneapprox enumerate  --config cfg.json [--out out.csv]

Shared flags: ``--seed N`` overrides the seed of generator-backed coefficient
sources (and pins the experiment to a single seed), ``--set key=value``
(repeatable, dotted keys reach into nested objects, values parse as JSON with
a plain-string fallback) patches the config after loading, and
``--show-config`` prints the effective configuration as JSON and exits
without running.  Standard output carries data only; complaints go to
standard error.  Exit codes: 0 success / tolerance met, 1 usage or config
error, 2 budget exhausted, 3 experiment finished with failed rows.

Config schemas by subcommand (JSON; ``"inf"`` is accepted for infinite
exponents):

* ``approx``: ``algorithm`` (``ball`` | ``pilot`` | ``tracking``), ``model``
  (weight-model object: ``d``, ``w``, ``s``, optional ``gamma``), ``space``
  (``ratio_exponent``, ``solution_exponent``), ``tolerance``,
  ``coefficients`` (either ``{"table": {"1,0": 0.5, ...}, "default": 0}``
  or ``{"generator": {"seed": 7}}``), plus ``radius`` for ``ball``,
  ``pilot`` (``size``, ``inflation``) for ``pilot``, ``tracking``
  (``start``, ``inflation``, ``decay``, optional ``kind``/``factor``/
  ``step``) for ``tracking``, optional ``budget_cap``.
* ``infer``: ``dimension``, ``space``, ``coefficients``, optional
  ``candidates`` (``coordinate_grid``, ``rate_grid``, ``axis_degree_cap``),
  ``gamma``, and, to run the full probe-fit-approximate pipeline, a
  ``tolerance`` plus optional ``inflation``/``pilot_size``/``budget_cap``/
  ``selection_window``.  Without ``tolerance`` only the fit is reported.
* ``experiment``: ``dimensions``, ``tolerances``, ``seeds`` (list or count),
  optional ``inflation``, ``axis_degree_cap``, ``budget_cap``,
  ``axis_points``, ``scatter_count``, ``timing``, ``jobs``.
* ``diagnose``: ``model``, ``space``, optional ``radius``, ``tolerance``,
  ``pilot``, ``tracking`` (with optional nested ``regularity`` constants:
  ``slack``, ``lower_rate``, ``upper_rate``, ``weight_spread``,
  ``retained_fraction``), ``tractability`` (``coordinate_rule`` object and
  ``eta_grid``; decay defaults to the model's).
* ``enumerate``: ``model``, ``count``.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from typing import List, Optional

from .approximation import (
    DEFAULT_BUDGET_CAP,
    TOLERANCE_MET,
    PilotConeSpec,
    RegularityConstants,
    TrackingConeSpec,
    approximate_on_ball,
    approximate_on_pilot_cone,
    approximate_on_tracking_cone,
    ball_cost_bound,
    pilot_complexity_lower,
    pilot_cost_bound,
    pilot_optimality_factor,
    tracking_complexity_lower,
    tracking_cost_bound,
    tracking_optimality_factor,
)
from .enumeration import WavenumberStream, write_prefix_csv
from .experiments import ExperimentConfig, run_experiment, write_csv, write_jsonl, CSV_HEADER
from .inference import (
    CandidateSets,
    approximate_with_inferred_weights,
    infer_weights,
    probe_wavenumbers,
)
from .spaces import CoefficientOracle, DivergentNormError, SpaceConfig, solution_operator_norm
from .weights import CoordinateRule, WeightModel, _decay_from_dict, strong_tractability

__all__ = ["main"]

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_BUDGET = 2
EXIT_PARTIAL = 3


class _UsageError(Exception):
    """Config or argument problem; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # exit 1, not argparse's default 2
        self.print_usage(sys.stderr)
        raise _UsageError(message)


def _parse_exponent(value) -> float:
    if isinstance(value, str):
        if value.lower() in ("inf", "infinity"):
            return math.inf
        return float(value)
    return float(value)


def _space_from(data: dict) -> SpaceConfig:
    return SpaceConfig(
        ratio_exponent=_parse_exponent(data["ratio_exponent"]),
        solution_exponent=_parse_exponent(data["solution_exponent"]),
    )


def _oracle_from(spec: dict, dimension: int, seed: Optional[int]) -> CoefficientOracle:
    if "table" in spec:
        table = {}
        for key, value in spec["table"].items():
            k = tuple(int(part) for part in str(key).split(","))
            if len(k) != dimension:
                raise _UsageError(f"coefficient key {key!r} has wrong dimension")
            table[k] = float(value)
        return CoefficientOracle.from_table(table, float(spec.get("default", 0.0)))
    if "generator" in spec:
        from .experiments import make_random_function

        gen_seed = seed if seed is not None else int(spec["generator"].get("seed", 0))
        return make_random_function(dimension, gen_seed).oracle()
    raise _UsageError("coefficients need either a 'table' or a 'generator' entry")


def _candidates_from(data: Optional[dict], default_cap: int = 4) -> CandidateSets:
    if data is None:
        return CandidateSets.default(axis_degree_cap=default_cap)
    return CandidateSets(
        coordinate_grid=tuple(data["coordinate_grid"]),
        rate_grid=tuple(data["rate_grid"]),
        axis_degree_cap=int(data.get("axis_degree_cap", default_cap)),
    )


def _set_by_path(config: dict, dotted: str, value) -> None:
    parts = dotted.split(".")
    node = config
    for part in parts[:-1]:
        node = node.setdefault(part, {})
        if not isinstance(node, dict):
            raise _UsageError(f"override path {dotted!r} crosses a non-object")
    node[parts[-1]] = value


def _apply_overrides(config: dict, pairs: List[str]) -> None:
    for pair in pairs:
        if "=" not in pair:
            raise _UsageError(f"override {pair!r} is not key=value")
        key, raw = pair.split("=", 1)
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        _set_by_path(config, key, value)


def _load_config(path: Optional[str]) -> dict:
    if path is None:
        raise _UsageError("--config is required")
    try:
        with open(path, "r", encoding="utf-8") as handle:
            data = json.load(handle)
    except OSError as exc:
        raise _UsageError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise _UsageError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise _UsageError("config root must be a JSON object")
    return data


def _emit(text: str, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text if text.endswith("\n") else text + "\n")


def _show(config: dict) -> int:
    sys.stdout.write(json.dumps(config, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def _cmd_approx(config: dict, args) -> int:
    model = WeightModel.from_dict(config["model"])
    space = _space_from(config["space"])
    tolerance = float(config["tolerance"])
    budget = int(config.get("budget_cap", DEFAULT_BUDGET_CAP))
    algorithm = config["algorithm"]
    effective = dict(config)
    effective["budget_cap"] = budget
    if args.show_config:
        return _show(effective)
    oracle = _oracle_from(config["coefficients"], model.dimension, args.seed)
    stream = WavenumberStream(model)
    if algorithm == "ball":
        outcome = approximate_on_ball(
            oracle, stream, space, model, float(config["radius"]), tolerance, budget
        )
    elif algorithm == "pilot":
        spec = PilotConeSpec(
            pilot_size=int(config["pilot"]["size"]),
            inflation=float(config["pilot"]["inflation"]),
        )
        outcome = approximate_on_pilot_cone(oracle, stream, space, model, spec, tolerance, budget)
    elif algorithm == "tracking":
        block = config["tracking"]
        spec = TrackingConeSpec(
            start=int(block["start"]),
            inflation=float(block["inflation"]),
            decay=float(block["decay"]),
            kind=block.get("kind", "geometric"),
            factor=int(block.get("factor", 2)),
            step=int(block.get("step", 0)),
        )
        outcome = approximate_on_tracking_cone(oracle, stream, space, model, spec, tolerance, budget)
    else:
        raise _UsageError(f"unknown algorithm {algorithm!r}")
    _emit(outcome.to_json(), args.out)
    return EXIT_OK if outcome.stopped_by == TOLERANCE_MET else EXIT_BUDGET


def _cmd_infer(config: dict, args) -> int:
    dimension = int(config["dimension"])
    space = _space_from(config["space"])
    candidates = _candidates_from(config.get("candidates"))
    gamma = config.get("gamma")
    effective = dict(config)
    effective["candidates"] = {
        "coordinate_grid": list(candidates.coordinate_grid),
        "rate_grid": list(candidates.rate_grid),
        "axis_degree_cap": candidates.axis_degree_cap,
    }
    if "tolerance" in config:
        effective.setdefault("inflation", 1.1)
        effective.setdefault("budget_cap", DEFAULT_BUDGET_CAP)
    if args.show_config:
        return _show(effective)
    oracle = _oracle_from(config["coefficients"], dimension, args.seed)
    if "tolerance" in config:
        outcome = approximate_with_inferred_weights(
            oracle,
            dimension,
            candidates,
            space,
            inflation=float(config.get("inflation", 1.1)),
            tolerance=float(config["tolerance"]),
            interaction_weights=gamma,
            pilot_size=config.get("pilot_size"),
            budget_cap=int(config.get("budget_cap", DEFAULT_BUDGET_CAP)),
            selection_window=config.get("selection_window"),
        )
        _emit(outcome.to_json(), args.out)
        return EXIT_OK if outcome.stopped_by == TOLERANCE_MET else EXIT_BUDGET
    samples = {k: oracle.query(k) for k in probe_wavenumbers(dimension, candidates.axis_degree_cap)}
    fitted = infer_weights(samples, dimension, candidates, space, gamma)
    _emit(json.dumps(fitted.to_dict()), args.out)
    return EXIT_OK


def _cmd_experiment(config: dict, args) -> int:
    body = dict(config)
    if args.seed is not None:
        body["seeds"] = [args.seed]
    if args.jobs is not None:
        body["jobs"] = args.jobs
    try:
        cfg = ExperimentConfig.from_dict(body)
    except (TypeError, ValueError) as exc:
        raise _UsageError(str(exc)) from exc
    if args.show_config:
        return _show(dataclasses.asdict(cfg))
    rows = run_experiment(cfg)
    if args.out is None:
        sys.stdout.write(CSV_HEADER + "\n")
        for row in rows:
            sys.stdout.write(row.to_csv() + "\n")
    else:
        base = args.out[:-4] if args.out.endswith(".csv") else args.out
        write_csv(rows, base + ".csv")
        write_jsonl(rows, base + ".jsonl")
    failed = sum(1 for row in rows if row.status.startswith("failed:"))
    if failed:
        sys.stderr.write(f"{failed} of {len(rows)} rows failed\n")
        return EXIT_PARTIAL
    return EXIT_OK


def _cmd_diagnose(config: dict, args) -> int:
    model = WeightModel.from_dict(config["model"])
    space = _space_from(config["space"])
    radius = float(config.get("radius", 1.0))
    tolerance = config.get("tolerance")
    effective = dict(config)
    effective["radius"] = radius
    if args.show_config:
        return _show(effective)
    report: dict = {}
    try:
        report["operator_norm"] = solution_operator_norm(space, model)
    except DivergentNormError as exc:
        report["operator_norm"] = {"error": type(exc).__name__, "detail": str(exc)}
    if tolerance is not None:
        tolerance = float(tolerance)
        report["ball"] = {"cost": ball_cost_bound(space, model, radius, tolerance)}
        if "pilot" in config:
            spec = PilotConeSpec(
                pilot_size=int(config["pilot"]["size"]),
                inflation=float(config["pilot"]["inflation"]),
            )
            report["pilot"] = {
                "cost": pilot_cost_bound(space, model, spec, radius, tolerance),
                "complexity_lower": pilot_complexity_lower(space, model, spec, radius, tolerance),
                "optimality_factor": pilot_optimality_factor(space, spec.inflation),
            }
        if "tracking" in config:
            block = config["tracking"]
            spec = TrackingConeSpec(
                start=int(block["start"]),
                inflation=float(block["inflation"]),
                decay=float(block["decay"]),
                kind=block.get("kind", "geometric"),
                factor=int(block.get("factor", 2)),
                step=int(block.get("step", 0)),
            )
            stream = WavenumberStream(model)
            cost = tracking_cost_bound(space, model, stream, spec, radius, tolerance)
            entry: dict = {
                "cost": None if cost is None else {"block": cost[0], "samples": cost[1]}
            }
            if "regularity" in block:
                reg = block["regularity"]
                constants = RegularityConstants(
                    slack=float(reg["slack"]),
                    lower_rate=float(reg["lower_rate"]),
                    upper_rate=float(reg["upper_rate"]),
                    weight_spread=float(reg["weight_spread"]),
                    retained_fraction=float(reg["retained_fraction"]),
                )
                lower = tracking_complexity_lower(
                    space, model, stream, spec, constants, radius, tolerance
                )
                entry["complexity_lower"] = {"block": lower[0], "samples": lower[1]}
                entry["optimality_factor"] = tracking_optimality_factor(space, spec, constants)
            report["tracking"] = entry
    if "tractability" in config:
        tract = config["tractability"]
        rule = CoordinateRule(
            kind=tract["coordinate_rule"]["kind"],
            scale=float(tract["coordinate_rule"].get("scale", 1.0)),
            rate=float(tract["coordinate_rule"].get("rate", 0.0)),
        )
        decay = _decay_from_dict(tract["decay"]) if "decay" in tract else model.decay
        verdict = strong_tractability(rule, decay, tract["eta_grid"])
        report["tractability"] = {
            "strongly_tractable": verdict.strongly_tractable,
            "witness_eta": verdict.witness_eta,
            "eta_infimum": verdict.eta_infimum,
            "note": verdict.note,
        }
    _emit(json.dumps(report, indent=2, sort_keys=True), args.out)
    return EXIT_OK


def _cmd_enumerate(config: dict, args) -> int:
    model = WeightModel.from_dict(config["model"])
    count = int(config.get("count", 100))
    effective = dict(config)
    effective["count"] = count
    if args.show_config:
        return _show(effective)
    if args.out is None:
        write_prefix_csv(model, count, sys.stdout)
    else:
        write_prefix_csv(model, count, args.out)
    return EXIT_OK


_COMMANDS = {
    "approx": _cmd_approx,
    "infer": _cmd_infer,
    "experiment": _cmd_experiment,
    "diagnose": _cmd_diagnose,
    "enumerate": _cmd_enumerate,
}


def _build_parser() -> _Parser:
    parser = _Parser(prog="coneapprox", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", metavar="subcommand")
    for name in _COMMANDS:
        p = sub.add_parser(name, add_help=True)
        p.add_argument("--config", required=False, help="JSON config path")
        p.add_argument("--out", default=None, help="output path (default: stdout)")
        p.add_argument("--seed", type=int, default=None, help="seed override")
        p.add_argument(
            "--set",
            dest="overrides",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="config override, dotted keys allowed; repeatable",
        )
        p.add_argument(
            "--show-config",
            action="store_true",
            help="print the effective config and exit",
        )
        if name == "experiment":
            p.add_argument("--jobs", type=int, default=None, help="parallel row workers")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.subcommand is None:
            parser.print_usage(sys.stderr)
            return EXIT_USAGE
        config = _load_config(args.config)
        _apply_overrides(config, args.overrides)
        return _COMMANDS[args.subcommand](config, args)
    except _UsageError as exc:
        sys.stderr.write(f"coneapprox: error: {exc}\n")
        return EXIT_USAGE
    except (KeyError, TypeError, ValueError) as exc:
        sys.stderr.write(f"coneapprox: config error: {type(exc).__name__}: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
