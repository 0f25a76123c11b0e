"""Command-line front end.

Subcommands:
  driver    four-phase traffic-signal scenario
  colors    neverending-color scenario (and its all-irrelevant variant)
  analytic  closed-form values and curves as CSV
  compare   simulation vs. analytic learning curve, side by side
"""

from __future__ import annotations

import argparse
import sys

from . import analytics
from .agent import AgentConfig
from .environments import ALL_IRRELEVANT, DRIVER, NEVERENDING_COLOR, EnvironmentSpec
from .experiment import ExperimentConfig, run_experiment


def _add_common(p: argparse.ArgumentParser, agents: int, steps: int):
    p.add_argument("--agents", type=int, default=agents, help="ensemble size")
    p.add_argument("--steps", type=int, default=steps, help="time steps per agent")
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--out", type=str, default=None, help="CSV output path")
    p.add_argument("--basic", action="store_true", help="disable generalization")
    p.add_argument(
        "--engine",
        choices=("kernel", "reference"),
        default="kernel",
        help="compiled kernel (default) or pure-Python reference loop",
    )


def _colors_args(p: argparse.ArgumentParser):
    p.add_argument("--n-actions", type=int, default=2)
    p.add_argument("--categories", type=int, default=2, help="K, including color")
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--reward", type=float, default=1000.0)
    p.add_argument("--majority", type=int, default=None, metavar="R",
                   help="odd number of walks per decision (majority voting)")
    p.add_argument("--track-tau", action="store_true",
                   help="record per-agent learning times")
    p.add_argument("--all-irrelevant", action="store_true",
                   help="reward a fixed action regardless of the percept")
    _add_common(p, agents=10_000, steps=500)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="psgen")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("driver", help="four-phase driver scenario")
    p.add_argument("--gamma", type=float, default=0.005)
    p.add_argument("--reward", type=float, default=1.0)
    _add_common(p, agents=10_000, steps=4000)

    p = sub.add_parser("colors", help="neverending-color scenario")
    _colors_args(p)
    p.add_argument("--analytic-overlay", action="store_true",
                   help="append the expected-efficiency column (K=2 only)")

    p = sub.add_parser("analytic", help="closed-form values and curves")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, default=None, help="category count for the "
                   "K-category asymptotes")
    p.add_argument("--t-max", type=int, default=None,
                   help="print the expected learning curve for t=1..t_max")

    p = sub.add_parser("compare", help="simulated vs. analytic learning curve")
    _colors_args(p)

    return parser


def _print_summary(result, args, variant):
    print(f"tail_mean={result.tail_mean():.6f}")
    if variant == NEVERENDING_COLOR and not args.basic:
        if args.categories == 2:
            print(f"analytic_asymptote={analytics.asymptotic_efficiency(args.n_actions):.6f}")
        else:
            print(
                "analytic_asymptote="
                f"{analytics.asymptotic_efficiency_k(args.n_actions, args.categories):.6f}"
            )
    if variant == ALL_IRRELEVANT and not args.basic:
        print(
            "analytic_asymptote="
            f"{analytics.asymptotic_efficiency_all_irrelevant(args.n_actions, args.categories):.6f}"
        )
    if getattr(args, "track_tau", False):
        print(f"mean_tau={result.tau_mean:.4f}")
        print(f"tau_missing={result.tau_missing}")


def _run_colors(args, analytic_overlay=False) -> int:
    variant = ALL_IRRELEVANT if args.all_irrelevant else NEVERENDING_COLOR
    cfg = ExperimentConfig(
        env=EnvironmentSpec(
            variant=variant,
            n_actions=args.n_actions,
            categories=args.categories,
            reward=args.reward,
        ),
        agent=AgentConfig(
            n_actions=args.n_actions,
            categories=args.categories,
            generalization=not args.basic,
            gamma=args.gamma,
            majority_votes=args.majority,
        ),
        n_agents=args.agents,
        n_steps=args.steps,
        master_seed=args.seed,
        output_path=args.out,
        analytic_overlay=analytic_overlay,
        track_learning_time=args.track_tau,
        engine=args.engine,
    )
    result = run_experiment(cfg)
    _print_summary(result, args, variant)
    if analytic_overlay:
        tail = len(result.efficiency) - len(result.efficiency) // 10
        dev = max(
            abs(result.efficiency[t] - result.analytic[t])
            for t in range(tail, len(result.efficiency))
        )
        print(f"max_tail_deviation={dev:.6f}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "driver":
        cfg = ExperimentConfig(
            env=EnvironmentSpec(variant=DRIVER, n_actions=2, categories=2,
                                reward=args.reward),
            agent=AgentConfig(
                n_actions=2,
                categories=2,
                generalization=not args.basic,
                gamma=args.gamma,
            ),
            n_agents=args.agents,
            n_steps=args.steps,
            master_seed=args.seed,
            output_path=args.out,
            engine=args.engine,
        )
        result = run_experiment(cfg)
        print(f"tail_mean={result.tail_mean():.6f}")
        return 0

    if args.command == "colors":
        return _run_colors(args, analytic_overlay=args.analytic_overlay)

    if args.command == "compare":
        if args.categories != 2 or args.basic:
            print("compare requires the enhanced agent with K=2", file=sys.stderr)
            return 2
        return _run_colors(args, analytic_overlay=True)

    if args.command == "analytic":
        n = args.n
        print(f"asymptotic_efficiency={analytics.asymptotic_efficiency(n):.7f}")
        print(f"learning_time={analytics.expected_learning_time(n):.1f}")
        if args.k is not None:
            print(
                "asymptotic_efficiency_k="
                f"{analytics.asymptotic_efficiency_k(n, args.k):.7f}"
            )
            print(
                "asymptotic_efficiency_all_irrelevant="
                f"{analytics.asymptotic_efficiency_all_irrelevant(n, args.k):.7f}"
            )
        if args.t_max is not None:
            print("t,expected_efficiency")
            for t in range(1, args.t_max + 1):
                print(f"{t},{analytics.expected_efficiency(n, t):.7f}")
        return 0

    return 2


if __name__ == "__main__":
    sys.exit(main())
