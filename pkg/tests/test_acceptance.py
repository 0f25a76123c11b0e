"""Acceptance gate: one test per release criterion, each printing a single
PASS/FAIL line with the measured value and its pinned tolerance.

These run the full-scale ensembles (10^4 to 10^5 agents), so this module
takes a few minutes on one core; everything is deterministic for the seeds
fixed below.
"""

import numpy as np
import pytest

from psgen import analytics
from psgen.agent import Agent, AgentConfig
from psgen.clips import ClipNetwork
from psgen.environments import EnvironmentSpec
from psgen.experiment import ExperimentConfig, run_experiment
from psgen.rng import Xoshiro256StarStar


def report(capsys, ok: bool, message: str) -> None:
    with capsys.disabled():
        print(f"[{'PASS' if ok else 'FAIL'}] {message}")
    if not ok:
        pytest.fail(message)


def colors_run(n, k=2, *, n_agents, n_steps, seed, variant="neverending-color",
               generalization=True, gamma=0.0, track=False):
    cfg = ExperimentConfig(
        env=EnvironmentSpec(variant, n_actions=n, categories=k, reward=1000.0),
        agent=AgentConfig(n, k, generalization=generalization, gamma=gamma),
        n_agents=n_agents,
        n_steps=n_steps,
        master_seed=seed,
        track_learning_time=track,
    )
    return run_experiment(cfg)


def test_criterion_1_asymptotic_efficiency(capsys):
    """Tail-window efficiency matches the closed-form asymptote +-0.015."""
    cases = [(2, 500), (3, 1300), (5, 4500)]
    lines, ok = [], True
    for n, steps in cases:
        result = colors_run(n, n_agents=10_000, n_steps=steps, seed=100 + n)
        target = analytics.asymptotic_efficiency(n)
        tail = result.tail_mean()
        ok &= abs(tail - target) <= 0.015
        lines.append(f"n={n}: {tail:.4f} vs {target:.5f}")
    report(capsys, ok, "criterion 1 asymptotic efficiency +-0.015 | " + "; ".join(lines))


def test_criterion_2_basic_agent_stays_random(capsys):
    """Without generalization the efficiency pins to 1/n at every step."""
    lines, ok = [], True
    for n, steps in [(2, 500), (3, 1300), (5, 4500)]:
        result = colors_run(
            n, n_agents=10_000, n_steps=steps, seed=200 + n, generalization=False
        )
        eff = result.efficiency
        worst = float(np.abs(eff - 1.0 / n).max())
        tenth = steps // 10
        trend = float(eff[-tenth:].mean() - eff[:tenth].mean())
        ok &= worst <= 0.02 and abs(trend) <= 0.01
        lines.append(f"n={n}: max dev {worst:.4f}, trend {trend:+.4f}")
    report(
        capsys,
        ok,
        "criterion 2 basic agent 1/n +-0.02, trend +-0.01 | " + "; ".join(lines),
    )


def test_criterion_3_learning_curve_matches_the_closed_form(capsys):
    """n=2 simulated curve tracks the analytic one within 0.03 on t in [50, 500]."""
    cfg = ExperimentConfig(
        env=EnvironmentSpec("neverending-color", n_actions=2, reward=1000.0),
        agent=AgentConfig(2, 2),
        n_agents=100_000,
        n_steps=500,
        master_seed=7,
        analytic_overlay=True,
    )
    result = run_experiment(cfg)
    window = slice(49, 500)
    deviation = float(
        np.abs(result.efficiency[window] - result.analytic[window]).max()
    )
    report(
        capsys,
        deviation <= 0.03,
        f"criterion 3 learning curve |sim-analytic| {deviation:.4f} <= 0.03 "
        "(n=2, N=100000, t in [50,500])",
    )


def test_criterion_4_learning_time(capsys):
    """Mean learning time within 15% of n(n+1)(n+2)."""
    lines, ok = [], True
    for n, steps in [(2, 1000), (3, 2000)]:
        result = colors_run(
            n, n_agents=10_000, n_steps=steps, seed=5 + n, track=True
        )
        target = analytics.expected_learning_time(n)
        mean = result.tau_mean
        ok &= abs(mean - target) <= 0.15 * target
        lines.append(f"n={n}: mean tau {mean:.2f} vs {target:.0f}")
    report(capsys, ok, "criterion 4 learning time +-15% | " + "; ".join(lines))


def test_criterion_5_category_count_ladder(capsys):
    """K-category asymptotes match the closed form and increase with K."""
    measured, lines, ok = [], [], True
    for k in (2, 3, 4, 5):
        result = colors_run(2, k, n_agents=10_000, n_steps=2000, seed=20 + k)
        target = analytics.asymptotic_efficiency_k(2, k)
        tail = result.tail_mean()
        measured.append(tail)
        ok &= abs(tail - target) <= 0.02
        lines.append(f"K={k}: {tail:.4f} vs {target:.4f}")
    increasing = all(b > a for a, b in zip(measured, measured[1:]))
    ok &= increasing
    report(
        capsys,
        ok,
        "criterion 5 K-ladder +-0.02, strictly increasing "
        f"({increasing}) | " + "; ".join(lines),
    )


def test_criterion_6_all_irrelevant_variant(capsys):
    """With no relevant category the n=2, K=3 asymptote is 5/6."""
    result = colors_run(
        2, 3, n_agents=10_000, n_steps=1500, seed=30, variant="all-irrelevant"
    )
    target = analytics.asymptotic_efficiency_all_irrelevant(2, 3)
    tail = result.tail_mean()
    report(
        capsys,
        abs(tail - target) <= 0.02,
        f"criterion 6 all-irrelevant K=3 tail {tail:.4f} vs {target:.4f} +-0.02",
    )


def test_criterion_7_driver_phases(capsys):
    """Four-phase task: high plateaus, dips at switches, best final phase."""
    cfg = ExperimentConfig(
        env=EnvironmentSpec("driver", reward=1.0),
        agent=AgentConfig(2, 2, gamma=0.005),
        n_agents=10_000,
        n_steps=4000,
        master_seed=3,
    )
    eff = run_experiment(cfg).efficiency
    ends = [1000, 2000, 3000, 4000]
    plateaus = [float(eff[e - 200 : e].mean()) for e in ends]
    plateaus_ok = all(p >= 0.8 for p in plateaus)
    dips_ok = all(
        float(eff[e : e + 20].mean()) < float(eff[e - 20 : e].mean())
        for e in ends[:-1]
    )
    final_ok = plateaus[3] > plateaus[0]
    ok = plateaus_ok and dips_ok and final_ok
    report(
        capsys,
        ok,
        "criterion 7 driver phases: plateaus "
        + "/".join(f"{p:.3f}" for p in plateaus)
        + f" >=0.8 ({plateaus_ok}), dips at switches ({dips_ok}), "
        f"final>first ({final_ok})",
    )


def test_criterion_8_structural_suite(capsys):
    """Invariants over 1000 random percept sequences plus the fixed-point
    networks of both scenarios."""
    rng = Xoshiro256StarStar(88)
    ok = True
    for _ in range(1000):
        k = 2 + rng.randbelow(3)  # K in {2, 3, 4}
        n = 2 + rng.randbelow(2)
        net = ClipNetwork(n)
        for _ in range(4 + rng.randbelow(10)):
            s = tuple(rng.randbelow(3) for _ in range(k))
            net.add_percept(s)
        try:
            net.check_invariants()
        except AssertionError:
            ok = False
            break

    # saturated fresh-color network: percept out-degree n + 2^(K-1)
    out_degree_ok = True
    for n, k in [(2, 2), (3, 3), (2, 4)]:
        net = ClipNetwork(n)
        walker = Xoshiro256StarStar(n * 10 + k)
        last = None
        for t in range(1, 300):
            extras = tuple(walker.randbelow(2) for _ in range(k - 2))
            last, _ = net.add_percept((walker.randbelow(n), t) + extras)
        out_degree_ok &= len(net.edges[last]) == n + 2 ** (k - 1)

    # the driver percept set saturates at 11 clips
    net = ClipNetwork(2)
    for s in [(0, 0), (1, 0), (1, 1), (0, 1)]:
        net.add_percept(s)
    driver_ok = len(net.clips) == 11

    ok = ok and out_degree_ok and driver_ok
    report(
        capsys,
        ok,
        f"criterion 8 structural suite: 1000 random sequences ({ok}), "
        f"out-degree n+2^(K-1) ({out_degree_ok}), driver 11 clips ({driver_ok})",
    )


def test_criterion_9_majority_vote_amplification(capsys):
    """Majority voting on a converged network amplifies 0.625 to ~0.967.

    The oracle assumes the converged configuration in which only the
    arrow-wildcard -> matching-action edges carry weight, making every
    walk succeed with probability 5/8 independently; we build that network
    explicitly and sample 10^4 votes of 51 walks each.
    """
    net = ClipNetwork(2)
    t = 0
    for arrow in (0, 1):
        for _ in range(2):
            t += 1
            net.add_percept((arrow, t))
    for arrow in (0, 1):
        wid = next(
            w for w in net.wildcard_ids() if net.clips[w].slots == (arrow, None)
        )
        net.update_weights([(wid, arrow)], 1e9, 0.0)

    # no learning happens during the trials, so walks from any fresh-color
    # percept of a given arrow are identically distributed; one start clip
    # per arrow suffices
    starts = []
    for arrow in (0, 1):
        t += 1
        pid, _ = net.add_percept((arrow, t))
        starts.append(pid)

    rng = Xoshiro256StarStar(55)
    trials = 10_000
    vote_hits = single_hits = 0
    for _ in range(trials):
        arrow = rng.randbelow(2)
        pid = starts[arrow]
        vote_hits += net.majority_vote(pid, rng, 51) == arrow
        action, _ = net.random_walk(pid, rng)
        single_hits += action == arrow
    vote_rate = vote_hits / trials
    single_rate = single_hits / trials
    oracle = analytics.majority_vote_success(0.625, 2, 51)
    ok = abs(vote_rate - oracle) <= 0.02 and vote_rate > 0.625
    report(
        capsys,
        ok,
        f"criterion 9 majority vote R=51: {vote_rate:.4f} vs oracle "
        f"{oracle:.4f} +-0.02, single-walk rate {single_rate:.4f}",
    )


def test_criterion_10_byte_identical_csv(capsys, tmp_path):
    """Re-running any config with the same seed reproduces the CSV exactly."""
    digests = []
    for run in range(2):
        path = tmp_path / f"run{run}.csv"
        cfg = ExperimentConfig(
            env=EnvironmentSpec("neverending-color", n_actions=2, reward=1000.0),
            agent=AgentConfig(2, 2),
            n_agents=10_000,
            n_steps=500,
            master_seed=102,
            output_path=str(path),
            analytic_overlay=True,
        )
        run_experiment(cfg)
        digests.append(path.read_bytes())
    ok = digests[0] == digests[1]
    report(
        capsys,
        ok,
        f"criterion 10 determinism: identical-seed CSVs byte-identical ({ok})",
    )
