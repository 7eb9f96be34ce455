"""Command-line front end.

Bitstrings are read with the leftmost character as attribute 0. Machine
output is one JSON document on stdout; diagnostics go to stderr.
Exit codes: 0 ok, 1 validation error, 2 invariant violation, 3 estimation
cap exceeded.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from .decompose import lower_to_basis, mcx_table
from .forest import ForestValidationError, load_forest, parse_bitstring, predict_proba
from .qae import SCHEDULES, EstimationCapExceeded, estimate_probability, run_seeds
from .simulator import WidthLimitError, run
from .synth import STRATEGIES, synthesize_rf_predict

EXIT_OK, EXIT_VALIDATION, EXIT_INVARIANT, EXIT_CAP = 0, 1, 2, 3
AGREEMENT_TOL = 1e-9


class InvariantViolation(RuntimeError):
    pass


@dataclass
class RunReport:
    forest: str
    x: str
    seed: int | None
    classical: float
    simulated: float
    gate_counts: dict
    samples: dict | None = None
    duration_s: float = field(default=0.0)

    def __post_init__(self) -> None:
        if abs(self.classical - self.simulated) > AGREEMENT_TOL:
            raise InvariantViolation(
                f"classical {self.classical!r} and simulated {self.simulated!r} disagree"
            )

    def to_dict(self) -> dict:
        out = {"forest": self.forest, "input": self.x, "seed": self.seed,
               "classical_p_class0": self.classical, "simulated_p_class0": self.simulated,
               "gate_counts": self.gate_counts, "duration_s": round(self.duration_s, 6)}
        if self.samples is not None:
            out["samples"] = self.samples
        return out


def _load(args):
    forest = load_forest(args.forest)
    x = parse_bitstring(args.input, forest.attr_count)
    return forest, x


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj, indent=2) + "\n")


def cmd_validate(args) -> int:
    forest = load_forest(args.forest)
    _emit({"valid": True, "trees": forest.n_trees, "height": forest.height,
           "attr_count": forest.attr_count})
    return EXIT_OK


def cmd_predict(args) -> int:
    start = time.perf_counter()
    forest, x = _load(args)
    pred = synthesize_rf_predict(forest, x, args.strategy)
    lowered = lower_to_basis(pred.circuit)
    state = run(lowered)
    samples = None
    if args.shots:
        samples = state.sample([pred.class_qubit], args.shots, seed=args.seed).to_dict()
    report = RunReport(args.forest, args.input, args.seed, predict_proba(forest, x),
                       state.marginal(pred.class_qubit, 0), lowered.count_gates().to_dict(),
                       samples, time.perf_counter() - start)
    _emit(report.to_dict())
    return EXIT_OK


def cmd_estimate(args) -> int:
    forest, x = _load(args)
    pred = synthesize_rf_predict(forest, x, args.strategy)
    seed = 0 if args.seed is None else args.seed
    if args.runs is None:
        result = estimate_probability(pred, seed, args.schedule)
        out = result.to_dict()
        out["classical_p_class0"] = predict_proba(forest, x)
        _emit(out)
        return EXIT_OK
    results = [estimate_probability(pred, s, args.schedule) for s in run_seeds(seed, args.runs)]
    _emit({"classical_p_class0": predict_proba(forest, x), "seed": seed, "runs": args.runs,
           "schedule": args.schedule,
           "mean_q_applications": float(np.mean([r.q_applications for r in results])),
           "mean_estimate": float(np.mean([r.estimate for r in results])),
           "results": [r.to_dict() for r in results]})
    return EXIT_OK


def cmd_count_gates(args) -> int:
    forest, x = _load(args)
    pred = synthesize_rf_predict(forest, x, args.strategy)
    composite = pred.circuit.count_gates()
    lowered = lower_to_basis(pred.circuit).count_gates(with_depth=True)
    if args.text:
        print(f"width {lowered.width}  U {lowered.u_count}  CX {lowered.cx_count}  "
              f"depth {lowered.depth}")
        return EXIT_OK
    _emit({"strategy": args.strategy, "lowered": lowered.to_dict(),
           "composite": composite.to_dict()})
    return EXIT_OK


def cmd_mcx_table(args) -> int:
    rows = mcx_table(args.max_controls)
    if args.text:
        print(f"{'k':>2}  {'ucg U':>6} {'ucg CX':>6}  {'rec U':>6} {'rec CX':>6}")
        for r in rows:
            ru = "-" if r.recursion_u is None else r.recursion_u
            rc = "-" if r.recursion_cx is None else r.recursion_cx
            print(f"{r.k:>2}  {r.ucg_u:>6} {r.ucg_cx:>6}  {ru:>6} {rc:>6}")
        return EXIT_OK
    _emit({"rows": [r.to_dict() for r in rows]})
    return EXIT_OK


def cmd_synth(args) -> int:
    forest, x = _load(args)
    pred = synthesize_rf_predict(forest, x, args.strategy)
    lowered = lower_to_basis(pred.circuit)
    text = lowered.to_json()
    if args.output == "-":
        sys.stdout.write(text + "\n")
    else:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
        out = lowered.count_gates().to_dict()
        out["output"] = args.output
        out["class_qubit"] = pred.class_qubit
        _emit(out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qforest",
        description="Quantum random-forest prediction circuits: synthesis, simulation, counting.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_input=True):
        p.add_argument("--forest", required=True, help="forest JSON file")
        if needs_input:
            p.add_argument("--input", required=True,
                           help="attribute bitstring, leftmost character is attribute 0")
            p.add_argument("--strategy", choices=STRATEGIES, default="auto",
                           help="MCX lowering at tree-selection sites")

    p = sub.add_parser("validate", help="check a forest file")
    common(p, needs_input=False)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("predict", help="classical vs simulated class-0 probability")
    common(p)
    p.add_argument("--shots", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("estimate", help="amplitude-estimation loop")
    common(p)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--runs", type=int, default=None)
    p.add_argument("--schedule", choices=SCHEDULES, default="linear")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("count-gates", help="gate counts of the lowered circuit")
    common(p)
    p.add_argument("--text", action="store_true")
    p.set_defaults(func=cmd_count_gates)

    p = sub.add_parser("mcx-table", help="U/CX counts of both MCX lowerings")
    p.add_argument("--max-controls", type=int, default=9)
    p.add_argument("--text", action="store_true")
    p.set_defaults(func=cmd_mcx_table)

    p = sub.add_parser("synth", help="write the lowered circuit as JSON")
    common(p)
    p.add_argument("--output", "-o", default="-", help="output path, '-' for stdout")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ForestValidationError, WidthLimitError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except InvariantViolation as exc:
        print(f"invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except EstimationCapExceeded as exc:
        print(f"estimation cap exceeded: {exc}", file=sys.stderr)
        return EXIT_CAP


if __name__ == "__main__":
    sys.exit(main())
