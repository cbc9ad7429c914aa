"""Robustness decision (hypothesis test over ball samples) and radius
evaluation (bisection over the decision oracle).

The stopping loop is factored out into decide_with_source so synthetic 0/1
sources (calibration runs, Boolean-corner oracles) share the exact stopping
semantics of the full model+sampler pipeline.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from . import sampling
from .nn import NetworkModel, indicative
from .prng import derive_subseed
from .stats import ErrorBudget, RunningCount, TestPlan, early_accept, early_reject, plan_test

SAT = "SAT"
UNSAT = "UNSAT"

# source: maps an array of sample indices to 0/1 outcomes, deterministically
IndicativeSource = Callable[[np.ndarray], np.ndarray]


class CenterMisclassifiedError(ValueError):
    """Radius evaluation requires the center itself to be accepted."""


@dataclass(frozen=True)
class RobustnessQuery:
    model: NetworkModel
    center: np.ndarray
    radius: float
    norm: str
    epsilon: float
    omega: frozenset[int]
    budget: ErrorBudget
    seed: int
    batch_size: int = 256
    epsilon_prime: float | None = None
    clamp: tuple[float, float] | None = None
    radial: str = sampling.RADIAL_GAMMA

    def __post_init__(self):
        object.__setattr__(self, "center",
                           np.asarray(self.center, dtype=np.float64).ravel())
        object.__setattr__(self, "omega", frozenset(int(l) for l in self.omega))
        if not self.omega:
            raise ValueError("omega must be non-empty")
        if any(l < 0 or l >= self.model.num_labels for l in self.omega):
            raise ValueError(f"omega {sorted(self.omega)} contains labels outside "
                             f"[0, {self.model.num_labels})")
        if self.radius < 0:
            raise ValueError(f"radius must be non-negative, got {self.radius}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be positive, got {self.batch_size}")


@dataclass(frozen=True)
class Verdict:
    decision: str  # SAT | UNSAT
    successes: int
    samples_drawn: int
    plan: TestPlan
    stop_reason: str  # "early_accept" | "early_reject"


@dataclass(frozen=True)
class RadiusResult:
    r_star: float
    probes: tuple[tuple[float, Verdict], ...]
    precision: float
    radius_max: float
    clamped: bool = False


def decide_with_source(plan: TestPlan, source: IndicativeSource,
                       batch_size: int = 256) -> Verdict:
    """Run the stopping loop against an arbitrary deterministic 0/1 source.

    Early-stop rules are checked on prefix counts at batch boundaries; both
    rules are conclusive, so the verdict matches the full-N comparison for
    every batch size.
    """
    successes = 0
    drawn = 0
    while True:
        count = min(batch_size, plan.N - drawn)
        outcomes = source(np.arange(drawn, drawn + count, dtype=np.uint64))
        successes += int(np.sum(outcomes))
        drawn += count
        running = RunningCount(successes, drawn)
        if early_accept(plan, running):
            return Verdict(SAT, successes, drawn, plan, "early_accept")
        if early_reject(plan, running):
            return Verdict(UNSAT, successes, drawn, plan, "early_reject")
        # at drawn == N exactly one rule fires, so the loop always returns


def model_source(query: RobustnessQuery) -> IndicativeSource:
    """0/1 source that samples the query's ball and runs the classifier."""
    spec = sampling.BallSpec(query.center, query.radius, query.norm)
    stream = sampling.SampleStream(query.seed, radial=query.radial)

    def source(indices: np.ndarray) -> np.ndarray:
        start = int(indices[0])
        batch = sampling.sample_batch(spec, stream, start, indices.size,
                                      clamp=query.clamp)
        points = batch.reshape((indices.size,) + query.model.input_shape)
        return indicative(query.model, points, query.omega)

    return source


def decide(query: RobustnessQuery) -> Verdict:
    """SAT iff the sampled wrong-classification fraction stays below the
    epsilon budget, with the query's type I/II error contract."""
    plan = plan_test(query.epsilon, query.budget, query.epsilon_prime)
    return decide_with_source(plan, model_source(query), query.batch_size)


def point_check(model: NetworkModel, center: np.ndarray, omega) -> bool:
    """Degenerate radius-0 case: is the center itself accepted?"""
    center = np.asarray(center, dtype=np.float64)
    point = center.reshape((1,) + model.input_shape)
    return bool(indicative(model, point, omega)[0] == 1)


def evaluate(query: RobustnessQuery, radius_max: float, precision: float,
             oracle: Callable[[float], Verdict] | None = None) -> RadiusResult:
    """Largest radius (within `precision`) at which the decision oracle
    answers SAT, by midpoint bisection on [0, radius_max].

    `oracle` overrides the per-radius decision procedure (stub oracles for
    tests); by default each probe runs decide() at that radius with a
    probe-specific sub-seed so the whole evaluation is reproducible.
    query.radius is ignored.
    """
    if radius_max <= 0:
        raise ValueError(f"radius_max must be positive, got {radius_max}")
    if precision <= 0:
        raise ValueError(f"precision must be positive, got {precision}")
    if oracle is None:
        if not point_check(query.model, query.center, query.omega):
            raise CenterMisclassifiedError(
                "center is not classified into omega; the bisection search does "
                "not apply to misclassified points -- run decide() at fixed, "
                "pre-chosen radii instead")

        def oracle(radius: float, _probe=[0]) -> Verdict:
            sub = replace(query, radius=radius,
                          seed=derive_subseed(query.seed, _probe[0]))
            _probe[0] += 1
            return decide(sub)

    r_min = 0.0
    r_max = radius_max
    probes: list[tuple[float, Verdict]] = []
    while r_max - r_min > precision:
        r = (r_min + r_max) / 2.0
        verdict = oracle(r)
        probes.append((r, verdict))
        if verdict.decision == SAT:
            r_min = r
        else:
            r_max = r
    return RadiusResult(r_min, tuple(probes), precision, radius_max,
                        clamped=query.clamp is not None)
