"""Command-line front end.

Subcommands: decide (one point, one radius), evaluate (max radius for one
point), curve (fraction-SAT over a radius grid), radii (per-point max radii
with class summaries), gadget (CNF to model file), sample (raw sampler dump).

Exit codes: 0 success, 2 usage error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__, sampling
from .data import fmt, load_dataset, load_inputs, write_report
from .decision import (SAT, CenterMisclassifiedError, RobustnessQuery,
                       Verdict, decide, evaluate, point_check)
from .gadgets import DimacsError, build_gadget, parse_dimacs
from .nn import ModelError, dump_model, load_model, predict
from .prng import derive_subseed
from .stats import ErrorBudget, plan_test

DEFAULT_ALPHA = 0.001
DEFAULT_BETA = 0.001


class UsageError(ValueError):
    pass


def _parse_shape(text: str) -> tuple[int, ...]:
    try:
        shape = tuple(int(d) for d in text.split(","))
    except ValueError:
        raise UsageError(f"bad --shape {text!r}") from None
    if not shape or any(d <= 0 for d in shape):
        raise UsageError(f"bad --shape {text!r}")
    return shape


def _parse_omega(text: str) -> frozenset[int]:
    try:
        omega = frozenset(int(l) for l in text.split(","))
    except ValueError:
        raise UsageError(f"bad --omega {text!r}") from None
    if not omega:
        raise UsageError("--omega must list at least one label")
    return omega


def _parse_clamp(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(v) for v in text.split(","))
    except ValueError:
        raise UsageError(f"bad --clamp {text!r}") from None
    if lo >= hi:
        raise UsageError(f"--clamp lower bound must be below upper, got {text!r}")
    return lo, hi


def _parse_norm(text: str) -> str:
    if text not in sampling.NORMS:
        raise UsageError(f"--norm must be one of {'/'.join(sampling.NORMS)}, got {text!r}")
    return text


def _parse_grid(args) -> list[float]:
    if args.radius_grid is not None:
        try:
            lo, hi, step = (float(v) for v in args.radius_grid.split(":"))
        except ValueError:
            raise UsageError(f"bad --radius-grid {args.radius_grid!r}") from None
        if step <= 0:
            raise UsageError("--radius-grid step must be positive")
        count = int(math.floor((hi - lo) / step + 1e-9)) + 1
        grid = [lo + k * step for k in range(count)]
    elif args.radius is not None:
        try:
            grid = [float(v) for v in str(args.radius).split(",")]
        except ValueError:
            raise UsageError(f"bad --radius {args.radius!r}") from None
    else:
        grid = []
    if not grid:
        raise UsageError("no radii given (use --radius or --radius-grid)")
    if any(r < 0 for r in grid):
        raise UsageError("radii must be non-negative")
    return grid


def _load_model_file(path: str):
    with open(path, "rb") as fh:
        return load_model(fh.read())


def _load_center(args, model):
    """Center tensor plus gold label (None when no labels are in play)."""
    shape = _parse_shape(args.shape) if args.shape else model.input_shape
    if args.input is not None:
        rows = load_inputs(args.input, shape)
        return rows[0], None
    if args.dataset is not None:
        if args.index is None:
            raise UsageError("--dataset needs --index to pick a point")
        inputs = load_inputs(args.dataset, shape)
        if not 0 <= args.index < len(inputs):
            raise UsageError(f"--index {args.index} outside dataset of {len(inputs)} rows")
        gold = None
        if args.labels is not None:
            from .data import load_labels
            gold = int(load_labels(args.labels, len(inputs), model.num_labels)[args.index])
        return inputs[args.index], gold
    raise UsageError("give a center via --input or --dataset with --index")


def _resolve_omega(args, model, center, gold):
    if args.omega is not None:
        return _parse_omega(args.omega)
    if gold is not None:
        return frozenset({gold})
    # fall back to the model's own prediction at the center
    return frozenset({int(predict(model, center[None])[0])})


def _budget(args) -> ErrorBudget:
    return ErrorBudget(args.alpha, args.beta)


def _query(args, model, center, omega) -> RobustnessQuery:
    return RobustnessQuery(
        model=model, center=center, radius=getattr(args, "radius", 0.0) or 0.0,
        norm=_parse_norm(args.norm), epsilon=args.eps, omega=omega,
        budget=_budget(args), seed=args.seed, batch_size=args.batch,
        epsilon_prime=args.eps_prime,
        clamp=_parse_clamp(args.clamp) if args.clamp else None)


def _run_metadata(args, plan=None) -> list[str]:
    md = [f"ewrobust {__version__}",
          f"seed={args.seed} norm={args.norm} eps={args.eps} "
          f"eps_prime={args.eps_prime} alpha={args.alpha} beta={args.beta}",
          f"clamp={args.clamp or 'off'} batch={args.batch} "
          f"workers={getattr(args, 'workers', 1)}"]
    if plan is not None:
        md.append(f"plan: N={plan.N} c={fmt(plan.c)} eps_prime={fmt(plan.epsilon_prime)}")
    return md


def _stub_oracle(r_true: float, plan):
    def oracle(radius: float) -> Verdict:
        sat = radius <= r_true
        return Verdict(SAT if sat else "UNSAT", 0, 0, plan,
                       "early_accept" if sat else "early_reject")
    return oracle


# --- subcommands -------------------------------------------------------------

def cmd_decide(args) -> int:
    model = _load_model_file(args.model)
    center, gold = _load_center(args, model)
    omega = _resolve_omega(args, model, center, gold)
    if args.radius is None:
        raise UsageError("--radius is required")
    t0 = time.perf_counter()
    if args.radius == 0.0:
        ok = point_check(model, center, omega)
        print("SAT" if ok else "UNSAT", "(point check, r=0)")
        decision = "SAT" if ok else "UNSAT"
        successes = drawn = int(ok)
        plan = None
    else:
        query = _query(args, model, center, omega)
        verdict = decide(query)
        plan = verdict.plan
        decision, successes, drawn = verdict.decision, verdict.successes, verdict.samples_drawn
        print(f"{decision} successes={successes} drawn={drawn} "
              f"N={plan.N} c={fmt(plan.c)}")
    wall = time.perf_counter() - t0
    if args.out:
        header = ["id", "gold", "omega", "decision", "successes", "samples_drawn"]
        row = [args.index if args.index is not None else 0,
               gold if gold is not None else "",
               ";".join(str(l) for l in sorted(omega)), decision, successes, drawn]
        if args.timings:
            header.append("wall_time_s")
            row.append(wall)
        write_report(args.out, _run_metadata(args, plan), header, [row])
    return 0


def cmd_evaluate(args) -> int:
    model = _load_model_file(args.model)
    center, gold = _load_center(args, model)
    omega = _resolve_omega(args, model, center, gold)
    query = _query(args, model, center, omega)
    oracle = None
    if args.stub_radius is not None:  # test hook: deterministic monotone oracle
        plan = plan_test(args.eps, _budget(args), args.eps_prime)
        oracle = _stub_oracle(float(args.stub_radius.split(",")[0]), plan)
        if not point_check(model, center, omega):
            raise CenterMisclassifiedError("center fails the point check")
    result = evaluate(query, args.radius_max, args.precision, oracle=oracle)
    print(f"r_star={fmt(result.r_star)} probes={len(result.probes)}")
    for r, verdict in result.probes:
        print(f"  probe r={fmt(r)} -> {verdict.decision}")
    if args.out:
        rows = [[k, r, v.decision, v.successes, v.samples_drawn]
                for k, (r, v) in enumerate(result.probes)]
        rows.append(["r_star", result.r_star, "", "", ""])
        write_report(args.out, _run_metadata(args),
                     ["probe", "radius", "decision", "successes", "samples_drawn"], rows)
    return 0


def _curve_point(model, dataset, args, omega_override, clamp, radius, ri, pi):
    center = dataset.inputs[pi].ravel()
    omega = omega_override or frozenset({int(dataset.labels[pi])})
    seed = derive_subseed(derive_subseed(args.seed, ri), pi)
    if radius == 0.0:
        return point_check(model, dataset.inputs[pi], omega)
    query = RobustnessQuery(
        model=model, center=center, radius=radius, norm=_parse_norm(args.norm),
        epsilon=args.eps, omega=omega, budget=_budget(args), seed=seed,
        batch_size=args.batch, epsilon_prime=args.eps_prime, clamp=clamp)
    return decide(query).decision == SAT


def cmd_curve(args) -> int:
    model = _load_model_file(args.model)
    if args.dataset is None or args.labels is None or args.shape is None:
        raise UsageError("curve needs --dataset, --labels and --shape")
    dataset = load_dataset(args.dataset, args.labels,
                           _parse_shape(args.shape), model.num_labels)
    grid = _parse_grid(args)
    omega_override = _parse_omega(args.omega) if args.omega else None
    clamp = _parse_clamp(args.clamp) if args.clamp else None

    keep = list(range(len(dataset)))
    if args.correct_only:
        predictions = predict(model, dataset.inputs)
        keep = [i for i in keep if predictions[i] == dataset.labels[i]]
        if not keep:
            raise UsageError("--correct-only left no dataset points")

    rows = []
    with ThreadPoolExecutor(max_workers=args.workers) as pool:
        for ri, radius in enumerate(grid):
            verdicts = list(pool.map(
                lambda pi: _curve_point(model, dataset, args, omega_override,
                                        clamp, radius, ri, pi), keep))
            n_sat = sum(verdicts)
            rows.append([radius, len(keep), n_sat, n_sat / len(keep)])
    write_report(args.out or sys.stdout, _run_metadata(args),
                 ["radius", "n_points", "n_sat", "fraction_sat"], rows)
    return 0


def _radii_point(model, dataset, args, omega_override, clamp, stub_radii, pi):
    center = dataset.inputs[pi].ravel()
    gold = int(dataset.labels[pi])
    omega = omega_override or frozenset({gold})
    if not point_check(model, dataset.inputs[pi], omega):
        return gold, None  # flagged, excluded from summaries
    seed = derive_subseed(args.seed, pi)
    query = RobustnessQuery(
        model=model, center=center, radius=0.0, norm=_parse_norm(args.norm),
        epsilon=args.eps, omega=omega, budget=_budget(args), seed=seed,
        batch_size=args.batch, epsilon_prime=args.eps_prime, clamp=clamp)
    oracle = None
    if stub_radii is not None:
        plan = plan_test(args.eps, _budget(args), args.eps_prime)
        oracle = _stub_oracle(stub_radii[pi % len(stub_radii)], plan)
    result = evaluate(query, args.radius_max, args.precision, oracle=oracle)
    return gold, result.r_star


def cmd_radii(args) -> int:
    model = _load_model_file(args.model)
    if args.dataset is None or args.labels is None or args.shape is None:
        raise UsageError("radii needs --dataset, --labels and --shape")
    if args.radius_max is None or args.precision is None:
        raise UsageError("radii needs --radius-max and --precision")
    dataset = load_dataset(args.dataset, args.labels,
                           _parse_shape(args.shape), model.num_labels)
    omega_override = _parse_omega(args.omega) if args.omega else None
    clamp = _parse_clamp(args.clamp) if args.clamp else None
    stub_radii = ([float(v) for v in args.stub_radius.split(",")]
                  if args.stub_radius is not None else None)

    with ThreadPoolExecutor(max_workers=args.workers) as pool:
        results = list(pool.map(
            lambda pi: _radii_point(model, dataset, args, omega_override,
                                    clamp, stub_radii, pi),
            range(len(dataset))))

    rows = []
    by_class: dict[int, list[float]] = {}
    for pid, (gold, r_star) in zip(dataset.ids, results):
        flagged = r_star is None
        rows.append(["point", pid, gold,
                     None if flagged else r_star, int(flagged), None, None])
        if not flagged:
            by_class.setdefault(gold, []).append(r_star)
    for gold in sorted(by_class):
        values = np.array(by_class[gold])
        rows.append(["class_summary", None, gold, None, None,
                     float(values.mean()), float(values.std())])  # population std
    metadata = _run_metadata(args)
    metadata.append("summary std convention: population (divide by n)")
    write_report(args.out or sys.stdout, metadata,
                 ["kind", "id", "gold", "r_star", "misclassified", "mean", "std"], rows)
    return 0


def cmd_gadget(args) -> int:
    with open(args.cnf, encoding="utf-8") as fh:
        try:
            cnf = parse_dimacs(fh.read())
        except DimacsError as exc:
            raise UsageError(f"{args.cnf}: {exc}") from None
    gadget = build_gadget(cnf)
    text = dump_model(gadget.model)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    print(f"variables={cnf.num_vars} clauses={gadget.clause_count}", file=sys.stderr)
    return 0


def cmd_sample(args) -> int:
    norm = _parse_norm(args.norm)
    if args.count < 0:
        raise UsageError("--count must be non-negative")
    shape = _parse_shape(args.shape)
    n = math.prod(shape)
    if args.input is not None:
        center = load_inputs(args.input, shape)[0].ravel()
    else:
        center = np.zeros(n)
    clamp = _parse_clamp(args.clamp) if args.clamp else None
    header = ["index"] + [f"x{j}" for j in range(n)]
    rows = []
    if args.count > 0:
        spec = sampling.BallSpec(center, args.radius, norm)
        stream = sampling.SampleStream(args.seed, radial=args.radial)
        batch = sampling.sample_batch(spec, stream, args.start, args.count, clamp=clamp)
        rows = [[i + args.start] + [float(v) for v in row]
                for i, row in enumerate(batch)]
    metadata = [f"ewrobust {__version__}",
                f"seed={args.seed} norm={norm} radius={args.radius} "
                f"radial={args.radial} clamp={args.clamp or 'off'}"]
    write_report(args.out or sys.stdout, metadata, header, rows)
    return 0


# --- parser ------------------------------------------------------------------

def _add_common(sub, *, stats=True, workers=False):
    sub.add_argument("--model", help="model file (JSON)")
    sub.add_argument("--dataset", help="inputs CSV, one flattened tensor per row")
    sub.add_argument("--labels", help="gold labels, one integer per line")
    sub.add_argument("--shape", help="tensor shape, e.g. 3,32,32")
    sub.add_argument("--input", help="single-point CSV (first row used)")
    sub.add_argument("--index", type=int, help="row index into --dataset")
    sub.add_argument("--omega", help="allowed labels, e.g. 1,9 (default: gold or predicted)")
    sub.add_argument("--norm", default="inf", help="ball norm: 1, 2 or inf")
    sub.add_argument("--seed", type=int, default=0, help="64-bit stream seed")
    sub.add_argument("--clamp", help="clip samples into lo,hi (changes the measure)")
    sub.add_argument("--out", help="CSV output path (default: stdout where applicable)")
    if stats:
        sub.add_argument("--eps", type=float, required=True,
                         help="tolerated wrong-classification fraction in (0,1)")
        sub.add_argument("--eps-prime", type=float, default=None,
                         help="relaxed boundary in (0, eps); default eps-min(eps(1-eps),0.005)")
        sub.add_argument("--alpha", type=float, default=DEFAULT_ALPHA,
                         help="type I error bound")
        sub.add_argument("--beta", type=float, default=DEFAULT_BETA,
                         help="type II error bound")
        sub.add_argument("--batch", type=int, default=256, help="samples per batch")
        sub.add_argument("--timings", action="store_true",
                         help="include wall-time columns (breaks byte reproducibility)")
    if workers:
        sub.add_argument("--workers", type=int, default=None,
                         help="parallel workers (default: CPU count); never changes results")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ewrobust",
        description="Statistical epsilon-weakened robustness decision and "
                    "evaluation for feed-forward classifiers.")
    parser.add_argument("--version", action="version", version=f"ewrobust {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("decide", help="decide robustness at one radius")
    _add_common(p)
    p.add_argument("--radius", type=float, help="perturbation radius")
    p.set_defaults(func=cmd_decide)

    p = subs.add_parser("evaluate", help="maximum robust radius for one point")
    _add_common(p)
    p.add_argument("--radius-max", type=float, required=True, help="search upper bound")
    p.add_argument("--precision", type=float, required=True, help="bisection precision")
    p.add_argument("--stub-radius", help=argparse.SUPPRESS)  # test hook
    p.set_defaults(func=cmd_evaluate)

    p = subs.add_parser("curve", help="fraction-SAT over a radius grid")
    _add_common(p, workers=True)
    p.add_argument("--radius", help="comma-separated radius list")
    p.add_argument("--radius-grid", help="min:max:step inclusive grid")
    p.add_argument("--correct-only", action="store_true",
                   help="restrict to points the model classifies correctly")
    p.set_defaults(func=cmd_curve)

    p = subs.add_parser("radii", help="per-point maximum radii with class summaries")
    _add_common(p, workers=True)
    p.add_argument("--radius-max", type=float, help="search upper bound")
    p.add_argument("--precision", type=float, help="bisection precision")
    p.add_argument("--stub-radius", help=argparse.SUPPRESS)  # test hook
    p.set_defaults(func=cmd_radii)

    p = subs.add_parser("gadget", help="compile DIMACS CNF into a gadget model file")
    p.add_argument("--cnf", required=True, help="DIMACS CNF path")
    p.add_argument("--out", help="model file output path (default: stdout)")
    p.set_defaults(func=cmd_gadget)

    p = subs.add_parser("sample", help="dump raw ball samples as CSV")
    p.add_argument("--norm", required=True, help="ball norm: 1, 2 or inf")
    p.add_argument("--radius", type=float, required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--start", type=int, default=0, help="first sample index")
    p.add_argument("--shape", required=True, help="tensor shape, e.g. 784 or 3,32,32")
    p.add_argument("--input", help="center point CSV (default: origin)")
    p.add_argument("--clamp", help="clip samples into lo,hi")
    p.add_argument("--radial", default=sampling.RADIAL_GAMMA,
                   choices=[sampling.RADIAL_GAMMA, sampling.RADIAL_UNIFORM],
                   help="l2 radius law (cross-check switch)")
    p.add_argument("--out", help="CSV output path (default: stdout)")
    p.set_defaults(func=cmd_sample)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "workers", None) is None and hasattr(args, "workers"):
        import os
        args.workers = os.cpu_count() or 1
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (ModelError, CenterMisclassifiedError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
