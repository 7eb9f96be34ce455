import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qforest.circuit import inverse
from qforest.forest import constant_forest, random_forest
from qforest.qae import (
    EstimationCapExceeded,
    build_Q,
    estimate_from_k,
    estimate_probability,
    expected_iterations_check,
    run_seeds,
)
from qforest.simulator import Statevector, run
from qforest.synth import synthesize_rf_predict


def _predictor(p):
    return synthesize_rf_predict(constant_forest(p), (0,))


def _classical_linear_schedule(p, rng, cap=64):
    """Same loop with the analytic success probability sin^2((2k+1) theta)."""
    theta = math.asin(math.sqrt(p))
    total = 0
    for k in range(cap):
        total += k
        if rng.random() < math.sin((2 * k + 1) * theta) ** 2:
            return k, total
    raise AssertionError("cap")


class TestEstimateFromK:
    @pytest.mark.parametrize("k,value", [(0, 1.0), (1, 0.5), (3, 0.0669872981077807)])
    def test_values(self, k, value):
        assert estimate_from_k(k) == pytest.approx(value, abs=1e-15)

    def test_negative(self):
        with pytest.raises(ValueError):
            estimate_from_k(-1)


class TestQ:
    @pytest.mark.parametrize("p,after", [(0.25, 1.0), (0.5, 0.5), (0.1, math.sin(3 * math.asin(math.sqrt(0.1))) ** 2)])
    def test_one_grover_step(self, p, after):
        pred = _predictor(p)
        state = run(build_Q(pred), run(pred.circuit))
        assert state.marginal(pred.class_qubit, 0) == pytest.approx(after, abs=1e-12)
        assert abs(1 - state.norm()) <= 1e-9

    def test_multi_tree_predictor(self, f2):
        pred = synthesize_rf_predict(f2, (0, 0, 0))
        theta = math.asin(math.sqrt(0.05))
        state = run(pred.circuit)
        for k in range(1, 4):
            state = run(build_Q(pred), state)
            assert state.marginal(pred.class_qubit, 0) == pytest.approx(
                math.sin((2 * k + 1) * theta) ** 2, abs=1e-10)

    @settings(max_examples=10, deadline=None)
    @given(seed=st.integers(0, 2 ** 32 - 1))
    def test_a_then_inverse(self, seed):
        rng = np.random.default_rng(seed)
        forest = random_forest(rng, int(rng.integers(0, 3)), int(rng.integers(2, 4)), 3)
        a = synthesize_rf_predict(forest, (0, 1, 1)).circuit
        out = run(inverse(a), run(a))
        assert np.max(np.abs(out.amplitudes - Statevector(a.width).amplitudes)) <= 1e-10


class TestLoop:
    def test_certain(self):
        r = estimate_probability(_predictor(1.0), seed=3)
        assert (r.k, r.estimate, r.trial_log) == (0, 1.0, ((0, 0),))

    def test_p025_stops_by_one(self):
        # one Grover step maps 0.25 to exactly 1
        for seed in range(30):
            assert estimate_probability(_predictor(0.25), seed).k in (0, 1)

    def test_deterministic(self, f2):
        pred = synthesize_rf_predict(f2, (0, 0, 0))
        assert estimate_probability(pred, 5) == estimate_probability(pred, 5)
        assert estimate_probability(pred, 5, "exponential") == estimate_probability(pred, 5, "exponential")

    def test_log_shape(self, f2):
        r = estimate_probability(synthesize_rf_predict(f2, (0, 0, 0)), 11)
        assert [k for k, _ in r.trial_log] == list(range(r.k + 1))
        assert [c for _, c in r.trial_log] == [1] * r.k + [0]
        assert r.q_applications == r.k * (r.k + 1) // 2

    def test_cap(self):
        with pytest.raises(EstimationCapExceeded):
            estimate_probability(_predictor(0.0), seed=0, max_trials=10)

    def test_unknown_schedule(self):
        with pytest.raises(ValueError):
            estimate_probability(_predictor(0.5), 0, "quadratic")

    def test_matches_classical_schedule_distribution(self):
        # stopping-time mean of the simulated loop vs the analytic schedule
        p, runs = 0.04, 300
        sim = np.mean([estimate_probability(_predictor(p), s).k for s in run_seeds(1, runs)])
        rng = np.random.default_rng(99)
        ref = np.mean([_classical_linear_schedule(p, rng)[0] for _ in range(20000)])
        assert sim == pytest.approx(ref, abs=0.25)


class TestExpectedIterations:
    def test_certain(self):
        assert expected_iterations_check(1.0, runs=20, seed=0) == 0.0

    def test_p004_within_factor(self):
        mean = expected_iterations_check(0.04, runs=200, seed=3)
        assert 5 / 2.5 <= mean <= 5 * 2.5

    def test_p025_analytic_value(self):
        # stop at k=0 with prob 1/4, else at k=1: mean total is exactly 3/4
        mean = expected_iterations_check(0.25, runs=400, seed=1)
        assert mean == pytest.approx(0.75, abs=0.07)

    def test_bad_p(self):
        with pytest.raises(ValueError):
            expected_iterations_check(0.0, 10, 0)


@settings(max_examples=200, deadline=None)
@given(k=st.integers(1, 10_000))
def test_half_angle_form_matches_sine(k):
    assert estimate_from_k(k) == pytest.approx(math.sin(math.pi / (4 * k)) ** 2, rel=1e-12, abs=1e-15)
