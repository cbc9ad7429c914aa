import math

import mpmath as mp
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ewrobust.stats import (ErrorBudget, RunningCount, TestPlan, choose_epsilon_prime,
                            early_accept, early_reject, plan_test)

mp.mp.dps = 50


def oracle_plan(eps, alpha, beta, eps_prime=None):
    """Arbitrary-precision evaluation of the sample-size and threshold
    formulas, independent of the float64 implementation."""
    eps, alpha, beta = mp.mpf(eps), mp.mpf(alpha), mp.mpf(beta)
    if eps_prime is None:
        eps_prime = eps - min(eps * (1 - eps), mp.mpf("0.005"))
    else:
        eps_prime = mp.mpf(eps_prime)
    z_a = mp.sqrt(2) * mp.erfinv(2 * alpha - 1)
    z_b = mp.sqrt(2) * mp.erfinv(2 * (1 - beta) - 1)
    ratio = (eps * (1 - eps) * z_b - eps_prime * (1 - eps_prime) * z_a) / (eps - eps_prime)
    sqrt_n = max(ratio, 3 * mp.sqrt((1 - eps) / eps))
    n = int(mp.ceil(sqrt_n ** 2))
    c = eps * (1 - eps) * z_b / mp.sqrt(n) + (1 - eps)
    return n, float(c)


class TestChooseEpsilonPrime:
    def test_large_eps_uses_cap(self):
        assert choose_epsilon_prime(0.2) == pytest.approx(0.195, abs=1e-15)

    def test_tiny_eps_uses_variance_term(self):
        assert choose_epsilon_prime(0.001) == pytest.approx(1e-6, abs=1e-12)

    def test_cap_boundary(self):
        # eps(1-eps) = 0.0099 > 0.005, so the 0.005 cap applies
        assert choose_epsilon_prime(0.01) == pytest.approx(0.005, abs=1e-15)

    @given(st.floats(1e-6, 1 - 1e-6))
    def test_always_inside_interval(self, eps):
        ep = choose_epsilon_prime(eps)
        assert 0.0 < ep < eps

    def test_domain(self):
        for eps in (0.0, 1.0, -0.5):
            with pytest.raises(ValueError):
                choose_epsilon_prime(eps)


class TestPlanTest:
    # frozen from the arbitrary-precision oracle above
    FROZEN = {0.001: 8991, 0.01: 891, 0.2: 38379}

    @pytest.mark.parametrize("eps,expected_n", sorted(FROZEN.items()))
    def test_reference_sample_sizes(self, eps, expected_n):
        plan = plan_test(eps, ErrorBudget(0.001, 0.001))
        n_ref, c_ref = oracle_plan(eps, 0.001, 0.001)
        assert abs(plan.N - n_ref) <= 1
        assert plan.N == expected_n
        assert plan.c == pytest.approx(c_ref, abs=1e-12)

    def test_threshold_value_large_eps(self):
        plan = plan_test(0.2, ErrorBudget(0.001, 0.001))
        assert plan.c == pytest.approx(0.80252, abs=1e-5)

    def test_explicit_epsilon_prime(self):
        plan = plan_test(0.2, ErrorBudget(0.05, 0.05), epsilon_prime=0.1)
        n_ref, c_ref = oracle_plan(0.2, 0.05, 0.05, eps_prime=0.1)
        assert plan.N == n_ref
        assert plan.c == pytest.approx(c_ref, abs=1e-12)

    def test_large_sample_condition_always_holds(self):
        for eps in (0.001, 0.05, 0.3, 0.9):
            plan = plan_test(eps, ErrorBudget(0.01, 0.01))
            assert plan.N >= 9 * (1 - eps) / eps - 1e-9

    def test_sample_size_monotone_in_eps(self):
        budget = ErrorBudget(0.001, 0.001)
        sizes = [plan_test(k / 1000, budget).N for k in range(1, 21)]
        assert all(a >= b for a, b in zip(sizes, sizes[1:]))

    def test_invalid_inputs(self):
        budget = ErrorBudget(0.01, 0.01)
        with pytest.raises(ValueError):
            plan_test(0.0, budget)
        with pytest.raises(ValueError):
            plan_test(0.1, budget, epsilon_prime=0.1)
        with pytest.raises(ValueError):
            plan_test(0.1, budget, epsilon_prime=0.0)
        with pytest.raises(ValueError):
            ErrorBudget(0.5, 0.01)
        with pytest.raises(ValueError):
            ErrorBudget(0.01, 0.0)


class TestEarlyStopping:
    plan = plan_test(0.001, ErrorBudget(0.001, 0.001))  # N=8991

    def test_accept_at_ceiled_threshold(self):
        bar = math.ceil(self.plan.c * self.plan.N)
        assert bar == 8983  # frozen: ceil(c*N) for the reference plan
        assert early_accept(self.plan, RunningCount(bar, bar))
        assert early_accept(self.plan, RunningCount(bar, self.plan.N))
        assert not early_accept(self.plan, RunningCount(bar - 1, self.plan.N - 1))

    def test_nothing_fires_at_start(self):
        start = RunningCount(0, 0)
        assert not early_accept(self.plan, start)
        assert not early_reject(self.plan, start)

    def test_all_successes_never_reject(self):
        for i in (0, 1, 100, self.plan.N):
            assert not early_reject(self.plan, RunningCount(i, i))

    def test_reject_at_full_draw(self):
        bar = math.ceil(self.plan.c * self.plan.N)
        assert early_reject(self.plan, RunningCount(bar - 1, self.plan.N))

    def test_drawn_bounded_by_plan(self):
        with pytest.raises(ValueError):
            early_accept(self.plan, RunningCount(0, self.plan.N + 1))

    @given(st.integers(9, 200), st.floats(0.55, 0.99))
    @settings(max_examples=200)
    def test_conclusive_and_terminating(self, n, c):
        plan = TestPlan(0.5, 0.25, -1.0, 1.0, n, c)
        for i in range(n + 1):
            for s in (0, i // 2, i):
                count = RunningCount(s, i)
                if early_accept(plan, count):
                    # all-failure completion: final count s still accepts
                    assert early_accept(plan, RunningCount(s, n))
                if early_reject(plan, count):
                    # all-success completion: final count s + (n-i) still rejects
                    assert early_reject(plan, RunningCount(s + (n - i), n))
        # at i == N exactly one rule fires
        for s in range(n + 1):
            count = RunningCount(s, n)
            assert early_accept(plan, count) != early_reject(plan, count)


def test_running_count_invariant():
    with pytest.raises(ValueError):
        RunningCount(3, 2)
    with pytest.raises(ValueError):
        RunningCount(-1, 2)


def test_test_plan_invariants():
    with pytest.raises(ValueError):
        TestPlan(0.5, 0.6, -1.0, 1.0, 100, 0.7)  # eps' >= eps
    with pytest.raises(ValueError):
        TestPlan(0.5, 0.25, -1.0, 1.0, 4, 0.7)  # violates large-sample bound
