"""QSearch-style amplitude estimation of the class-0 probability.

The good subspace is class qubit = 0. ``Q`` is applied as S_chi, then A^-1,
then S0, then A, which is one Grover step around A|0>.

Linear schedule: trial ``k`` measures the class qubit of ``Q**k A|0>``. The
loop stops at the first class-0 outcome and reports ``(sin(pi/4k))**2``
(1 for k = 0). Trials are simulated incrementally, since a fresh preparation
followed by ``k`` applications of Q gives the same state as one more Q on the
previous trial's (unmeasured) state. The exponential schedule draws the
iteration count uniformly from ``[0, ceil(m))`` with ``m`` growing by 6/5
after each failure.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .circuit import Circuit, compose, inverse
from .forest import constant_forest
from .simulator import Statevector, run
from .synth import SynthesizedPredictor, synthesize_reflections, synthesize_rf_predict

SCHEDULES = ("linear", "exponential")
DEFAULT_MAX_TRIALS = 64
GROWTH = 6 / 5


class EstimationCapExceeded(RuntimeError):
    def __init__(self, trials: int, trial_log) -> None:
        self.trials = trials
        self.trial_log = trial_log
        super().__init__(
            f"no class-0 outcome after {trials} trials; P(class=0) is ~0 or the predictor is broken"
        )


def estimate_from_k(k: int) -> float:
    if k < 0:
        raise ValueError("k must be non-negative")
    if k == 0:
        return 1.0
    if k == 1:
        return 0.5  # sin(pi/4)**2 exactly; the float product rounds to 0.4999999999999999
    return math.sin(math.pi / (4 * k)) ** 2


@dataclass(frozen=True)
class EstimationResult:
    k: int
    estimate: float
    trial_log: tuple[tuple[int, int], ...]
    seed: int | None
    schedule: str = "linear"
    q_applications: int = field(default=0)

    def to_dict(self) -> dict:
        return {"k": self.k, "estimate": self.estimate, "seed": self.seed,
                "schedule": self.schedule, "q_applications": self.q_applications,
                "trial_log": [list(t) for t in self.trial_log]}


def build_Q(predictor: SynthesizedPredictor) -> Circuit:
    a = predictor.circuit
    s0, s_chi = synthesize_reflections(predictor.layout)
    return compose(compose(compose(s_chi, inverse(a)), s0), a)


def _measure_class(state: Statevector, qubit: int, rng: np.random.Generator) -> int:
    return 0 if rng.random() < state.marginal(qubit, 0) else 1


def estimate_probability(predictor: SynthesizedPredictor, seed: int | None = None,
                         schedule: str = "linear",
                         max_trials: int = DEFAULT_MAX_TRIALS) -> EstimationResult:
    if schedule not in SCHEDULES:
        raise ValueError(f"schedule must be one of {SCHEDULES}, got {schedule!r}")
    rng = np.random.default_rng(seed)
    q = build_Q(predictor)
    cq = predictor.class_qubit
    prepared = run(predictor.circuit)
    log: list[tuple[int, int]] = []
    total = 0

    if schedule == "linear":
        state = prepared.copy()
        for k in range(max_trials):
            if k:
                state.apply_circuit(q)
            total += k
            outcome = _measure_class(state, cq, rng)
            log.append((k, outcome))
            if outcome == 0:
                return EstimationResult(k, estimate_from_k(k), tuple(log), seed, schedule, total)
        raise EstimationCapExceeded(max_trials, tuple(log))

    # exponential: cache powers of Q applied to A|0> as they are reached
    powers = [prepared]
    m = 1.0
    for trial in range(max_trials):
        k = 0 if trial == 0 else int(rng.integers(0, math.ceil(m)))
        while len(powers) <= k:
            powers.append(powers[-1].copy().apply_circuit(q))
        total += k
        outcome = _measure_class(powers[k], cq, rng)
        log.append((k, outcome))
        if outcome == 0:
            return EstimationResult(k, estimate_from_k(k), tuple(log), seed, schedule, total)
        if trial:
            m *= GROWTH
    raise EstimationCapExceeded(max_trials, tuple(log))


def run_seeds(seed: int, runs: int) -> list[int]:
    """Independent per-run seeds derived from one master seed."""
    return [int(s) for s in np.random.SeedSequence(seed).generate_state(runs, dtype=np.uint32)]


def expected_iterations_check(p: float, runs: int, seed: int, schedule: str = "linear") -> float:
    """Mean total Q applications over ``runs`` estimations on a constant-``p`` forest."""
    if not 0 < p <= 1:
        raise ValueError("p must be in (0, 1]")
    predictor = synthesize_rf_predict(constant_forest(p), (0,))
    totals = [estimate_probability(predictor, s, schedule).q_applications
              for s in run_seeds(seed, runs)]
    return float(np.mean(totals))
