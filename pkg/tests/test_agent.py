"""Agent-level tests: step/learn alternation, basic vs. enhanced mode and
the weight-update fixed points."""

import pytest

from psgen.agent import Agent, AgentConfig
from psgen.rng import Xoshiro256StarStar


def make_agent(**kw):
    defaults = dict(n_actions=2, categories=2)
    defaults.update(kw)
    return Agent(AgentConfig(**defaults))


class TestAlternationContract:
    def test_two_steps_without_learn_fail(self):
        agent = make_agent()
        rng = Xoshiro256StarStar(0)
        agent.step((0, 1), rng)
        with pytest.raises(RuntimeError):
            agent.step((1, 2), rng)

    def test_learn_before_any_step_fails(self):
        with pytest.raises(RuntimeError):
            make_agent().learn(0.0)

    def test_double_learn_fails(self):
        agent = make_agent()
        agent.step((0, 1), Xoshiro256StarStar(0))
        agent.learn(1.0)
        with pytest.raises(RuntimeError):
            agent.learn(1.0)

    def test_strict_alternation_is_fine(self):
        agent = make_agent()
        rng = Xoshiro256StarStar(0)
        for t in range(1, 20):
            agent.step((t % 2, t), rng)
            agent.learn(float(t % 3 == 0))
        assert agent.steps_taken == 19


class TestConfigValidation:
    @pytest.mark.parametrize(
        "kw",
        [
            dict(n_actions=1, categories=2),
            dict(n_actions=2, categories=0),
            dict(n_actions=2, categories=2, gamma=-0.1),
            dict(n_actions=2, categories=2, gamma=1.1),
            dict(n_actions=2, categories=2, h0=0.0),
            dict(n_actions=2, categories=2, majority_votes=2),
            dict(n_actions=2, categories=2, majority_votes=0),
        ],
    )
    def test_bad_configs_rejected(self, kw):
        with pytest.raises(ValueError):
            AgentConfig(**kw)

    def test_percept_arity_checked(self):
        agent = make_agent()
        with pytest.raises(ValueError):
            agent.step((0, 1, 2), Xoshiro256StarStar(0))


class TestBasicMode:
    def test_never_builds_wildcards(self):
        agent = make_agent(generalization=False)
        rng = Xoshiro256StarStar(1)
        for t in range(1, 200):
            agent.step((rng.randbelow(2), t), rng)
            agent.learn(0.0)
        assert agent.wildcard_clip_count() == 0

    def test_fresh_percepts_draw_uniform_actions(self):
        agent = make_agent(generalization=False)
        rng = Xoshiro256StarStar(2)
        n_steps = 4000
        ones = 0
        for t in range(1, n_steps + 1):
            ones += agent.step((rng.randbelow(2), t), rng)
            agent.learn(1000.0)  # rewards cannot help: every percept is new
        freq = ones / n_steps
        assert abs(freq - 0.5) < 3 * (0.25 / n_steps) ** 0.5


class TestEnhancedMode:
    def test_first_step_is_uniform_over_actions(self):
        # only percept->action edges exist at t=1
        agent = make_agent(n_actions=4)
        agent.step((0, 1), Xoshiro256StarStar(3))
        net = agent.network
        pid = net.percept_id((0, 1))
        assert set(net.edges[pid]) == {0, 1, 2, 3}
        assert all(h == 1.0 for h in net.edges[pid].values())

    def test_builds_wildcards_from_shared_arrows(self):
        agent = make_agent()
        rng = Xoshiro256StarStar(4)
        for t in range(1, 10):
            agent.step((t % 2, t), rng)
            agent.learn(0.0)
        assert agent.wildcard_clip_count() == 3  # (0,#), (1,#), (#,#)


class TestLearning:
    def test_zero_reward_zero_gamma_leaves_network_unchanged(self):
        agent = make_agent()
        rng = Xoshiro256StarStar(5)
        agent.step((0, 1), rng)
        before = agent.network.dump()
        agent.learn(0.0)
        assert agent.network.dump() == before

    def test_reward_lands_on_every_traversed_edge(self):
        agent = make_agent()
        rng = Xoshiro256StarStar(6)
        for t in range(1, 4):
            agent.step((0, t), rng)
            agent.learn(0.0)
        # force a known 2-edge path and reward it
        net = agent.network
        pid = net.percept_id((0, 3))
        wid = next(w for w in net.wildcard_ids() if net.clips[w].slots == (0, None))
        agent.last_path = [(pid, wid), (wid, 0)]
        agent._awaiting_learn = True
        agent.learn(1000.0)
        assert net.edges[pid][wid] == pytest.approx(1001.0)
        assert net.edges[wid][0] == pytest.approx(1001.0)

    def test_repeated_reward_converges_to_one_plus_reward_over_gamma(self):
        agent = make_agent(gamma=0.005)
        agent.step((0, 1), Xoshiro256StarStar(7))
        agent.learn(0.0)
        net = agent.network
        pid = net.percept_id((0, 1))
        for _ in range(5000):
            net.update_weights([(pid, 0)], 1.0, 0.005)
        assert net.edges[pid][0] == pytest.approx(201.0, abs=1e-6)


class TestMajorityVoting:
    def test_credit_path_matches_the_winning_action(self):
        agent = make_agent(majority_votes=5)
        rng = Xoshiro256StarStar(8)
        for t in range(1, 50):
            action = agent.step((t % 2, t), rng)
            assert agent.last_path[-1][1] == action  # path ends on the winner
            agent.learn(0.0)
