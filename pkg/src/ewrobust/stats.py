"""Test planning and early stopping for the robustness hypothesis test.

The sample size, acceptance threshold and relaxed boundary are computed
verbatim from the source formulas: with z_a = Phi^-1(alpha) and
z_b = Phi^-1(1-beta),

    eps' = eps - min(eps*(1-eps), 0.005)                      (default)
    sqrt(N) >= max{ (eps(1-eps) z_b - eps'(1-eps') z_a) / (eps - eps'),
                    3 sqrt((1-eps)/eps) }
    c = eps(1-eps) z_b / sqrt(N) + (1-eps)

The decision accepts (SAT) when the success count S reaches c*N and rejects
(UNSAT) as soon as even all-successes over the remaining draws could not
reach c*N; both rules are conclusive for the full-N comparison S/N >= c.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .special import inv_norm_cdf


@dataclass(frozen=True)
class ErrorBudget:
    """Type I (false reject) and type II (false accept) error bounds."""
    alpha: float
    beta: float

    def __post_init__(self):
        if not 0.0 < self.alpha < 0.5:
            raise ValueError(f"alpha must lie in (0, 0.5), got {self.alpha}")
        if not 0.0 < self.beta < 0.5:
            raise ValueError(f"beta must lie in (0, 0.5), got {self.beta}")


@dataclass(frozen=True)
class TestPlan:
    """Frozen statistical contract of one decision run."""
    epsilon: float
    epsilon_prime: float
    z_alpha: float
    z_one_minus_beta: float
    N: int
    c: float

    def __post_init__(self):
        if not 0.0 < self.epsilon_prime < self.epsilon:
            raise ValueError("epsilon_prime must lie in (0, epsilon)")
        if self.N < 9.0 * (1.0 - self.epsilon) / self.epsilon - 1e-9:
            raise ValueError("N violates the large-sample condition")
        if not 0.0 < self.c < 1.0:
            raise ValueError(f"threshold c must lie in (0, 1), got {self.c}")


@dataclass(frozen=True)
class RunningCount:
    """Prefix success count: S successes out of the first `drawn` samples."""
    successes: int
    drawn: int

    def __post_init__(self):
        if not 0 <= self.successes <= self.drawn:
            raise ValueError(f"need 0 <= successes <= drawn, "
                             f"got {self.successes}, {self.drawn}")


def choose_epsilon_prime(epsilon: float) -> float:
    """Default relaxed boundary eps - min(eps*(1-eps), 0.005)."""
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    return epsilon - min(epsilon * (1.0 - epsilon), 0.005)


def plan_test(epsilon: float, budget: ErrorBudget,
              epsilon_prime: float | None = None) -> TestPlan:
    """Sample size N and acceptance threshold c for one decision."""
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    if epsilon_prime is None:
        epsilon_prime = choose_epsilon_prime(epsilon)
    if not 0.0 < epsilon_prime < epsilon:
        raise ValueError(f"epsilon_prime must lie in (0, epsilon), got {epsilon_prime}")
    z_alpha = inv_norm_cdf(budget.alpha)
    z_one_minus_beta = inv_norm_cdf(1.0 - budget.beta)
    ratio = ((epsilon * (1.0 - epsilon) * z_one_minus_beta
              - epsilon_prime * (1.0 - epsilon_prime) * z_alpha)
             / (epsilon - epsilon_prime))
    sqrt_n = max(ratio, 3.0 * math.sqrt((1.0 - epsilon) / epsilon))
    n = math.ceil(sqrt_n * sqrt_n)
    c = epsilon * (1.0 - epsilon) * z_one_minus_beta / math.sqrt(n) + (1.0 - epsilon)
    return TestPlan(epsilon, epsilon_prime, z_alpha, z_one_minus_beta, n, c)


def early_accept(plan: TestPlan, count: RunningCount) -> bool:
    """True once S >= c*N: no completion of the run can flip the verdict."""
    if count.drawn > plan.N:
        raise ValueError(f"drawn {count.drawn} exceeds plan N {plan.N}")
    return count.successes >= plan.c * plan.N


def early_reject(plan: TestPlan, count: RunningCount) -> bool:
    """True once S < (c-1)*N + i: even all-successes ahead cannot reach c*N.

    Evaluated in the equivalent form S + (N - i) < c*N so both stopping rules
    compare against the identical float product c*N; the printed form
    (c-1)*N + i computes the same bound with a cancellation error that can
    fire one draw early at exact integer boundaries of c*N.
    """
    if count.drawn > plan.N:
        raise ValueError(f"drawn {count.drawn} exceeds plan N {plan.N}")
    return count.successes + (plan.N - count.drawn) < plan.c * plan.N
