import itertools

import numpy as np
import pytest

import dcl
from bruteforce import BruteForce

LL = (0, 0)  # joint listen


def ai_of(model, a):
    return model.joint_action_index(a)


# -- enumeration ------------------------------------------------------------


def test_beverage_initial_support(beverage):
    vt = dcl.enumerate_support(beverage, dcl.uniform_policy(beverage))
    assert vt.pr_t[0] == {((), 0): 0.5, ((), 1): 0.5}


def test_dectiger_level_one_support(dectiger):
    policy = dcl.dectiger_listen_always(dectiger)
    vt = dcl.enumerate_support(dectiger, policy)
    level = vt.pr_t[1]
    assert len(level) == 8
    h = ((LL, (0, 0)),)  # heard (hear-left, hear-left)
    assert level[(h, dectiger.state_index("tiger-left"))] == pytest.approx(0.361250, abs=1e-12)
    for t in range(dectiger.horizon):
        assert sum(vt.pr_t[t].values()) == pytest.approx(1.0, abs=1e-12)


def test_dectiger_two_consistent_observations_posterior(dectiger, listen_open_tables):
    policy, tables = listen_open_tables
    vt = tables.visitation
    h = ((LL, (1, 1)), (LL, (1, 1)))  # (hear-right, hear-right) twice
    cond = vt.rho_s_given_h(h)
    expected = 0.85**4 / (0.85**4 + 0.15**4)
    assert cond[dectiger.state_index("tiger-right")] == pytest.approx(expected, abs=1e-9)
    assert expected == pytest.approx(0.99904, abs=1e-4)


def test_support_cap_raises(meetgrid):
    with pytest.raises(dcl.ResourceCapError) as exc:
        dcl.enumerate_support(meetgrid.with_horizon(4), dcl.uniform_policy(meetgrid), cap=100)
    assert "100" in str(exc.value)


# -- visitation -------------------------------------------------------------


def test_visitation_normalization(dectiger):
    policy = dcl.uniform_policy(dectiger)
    vt = dcl.visitation(dectiger, policy)
    assert sum(vt.rho.values()) == pytest.approx(1.0, abs=1e-10)
    # conditionals renormalize
    for h in {h for (h, _s) in vt.rho}:
        assert sum(vt.rho_s_given_h(h).values()) == pytest.approx(1.0, abs=1e-10)
    for s in vt.rho_s:
        assert sum(vt.rho_h_given_s(s).values()) == pytest.approx(1.0, abs=1e-10)


def test_visitation_matches_bruteforce(dectiger):
    policy = dcl.dectiger_listen_open(dectiger)
    vt = dcl.visitation(dectiger, policy)
    oracle = BruteForce(dectiger, policy)
    assert set(vt.eta) == set(oracle.eta)
    for key, v in oracle.eta.items():
        assert vt.eta[key] == pytest.approx(v, abs=1e-12)
    L = dectiger.state_index("tiger-left")
    mine = vt.rho_h_given_s(L)
    total = sum(p for (h, s), p in oracle.rho.items() if s == L)
    for h, p in mine.items():
        assert p == pytest.approx(oracle.rho.get((h, L), 0.0) / total, abs=1e-12)


def test_beverage_state_posterior_is_uniform(beverage):
    vt = dcl.visitation(beverage, dcl.uniform_policy(beverage))
    assert vt.rho_s_given_h(())[0] == pytest.approx(0.5, abs=1e-15)


# -- values -----------------------------------------------------------------


def test_dectiger_paper_values(dectiger, listen_open_tables):
    policy, tables = listen_open_tables
    a = ai_of(dectiger, LL)
    hstar = ((LL, (1, 1)),)
    assert tables.episode.q_ha[hstar][a] == pytest.approx(13.8859, abs=1e-3)
    L, R = dectiger.state_index("tiger-left"), dectiger.state_index("tiger-right")
    assert tables.episode.q_sa[L][a] == pytest.approx(-16.175, abs=1e-3)
    assert tables.episode.q_sa[R][a] == pytest.approx(-16.175, abs=1e-3)


def test_dectiger_state_value_at_horizon_four(dectiger4, listen_open_tables4):
    # the 0.0474 state value belongs to the horizon-4 setting
    policy, tables = listen_open_tables4
    a = ai_of(dectiger4, LL)
    L = dectiger4.state_index("tiger-left")
    assert tables.episode.q_sa[L][a] == pytest.approx(0.0474, abs=1e-3)


def test_marginalization_identities(dectiger):
    """q_ha(h,a) = sum_s rho(s|h) q_hsa(h,s,a); q_sa via rho(h|s)pi-weighting."""
    policy = dcl.uniform_policy(dectiger)
    tables = dcl.values(dectiger, policy)
    vt = tables.visitation
    for ts in (tables.episode, tables.continuation):
        for h, vec in ts.q_ha.items():
            cond = vt.rho_s_given_h(h)
            expect = sum(p * ts.q_hsa[(h, s)] for s, p in cond.items())
            assert np.allclose(vec, expect, atol=1e-10)
    # uniform policy: pi(a|h) is constant, so the q_sa aggregation reduces to
    # the plain rho(h|s)-weighted marginalization of the paper
    gamma_t = {}
    for t, level in enumerate(vt.pr_t):
        for (h, s), p in level.items():
            gamma_t[(h, s)] = p
    for ts in (tables.episode, tables.continuation):
        for s in range(dectiger.num_states):
            if s not in vt.rho_s:
                continue
            cond = vt.rho_h_given_s(s)
            expect = sum(p * ts.q_hsa[(h, s)] for h, p in cond.items())
            got = ts.q_sa[s]
            mask = ts.q_sa_defined[s]
            assert np.allclose(got[mask], expect[mask], atol=1e-10)


def test_values_match_bruteforce_horizon3():
    for name, mkpol in (
        ("dectiger", dcl.uniform_policy),
        ("beverage", dcl.uniform_policy),
        ("meetgrid3", lambda m: dcl.random_policy(m, 5, reactive=True)),
    ):
        model = dcl.builtin(name, horizon=min(3, dcl.builtin(name).horizon))
        policy = mkpol(model)
        tables = dcl.values(model, policy)
        oracle = BruteForce(model, policy)
        for kind in ("episode", "continuation"):
            ts = tables.table_set(kind)
            for (h, s, ai), v in oracle.q_hsa[kind].items():
                assert ts.q_hsa[(h, s)][ai] == pytest.approx(v, abs=1e-10)
            for (h, ai), v in oracle.q_ha[kind].items():
                assert ts.q_ha[h][ai] == pytest.approx(v, abs=1e-10)
            for (s, t, ai), v in oracle.q_sa_t[kind].items():
                assert ts.q_sa_t[(s, t)][ai] == pytest.approx(v, abs=1e-10)
            for (s, ai), v in oracle.q_sa[kind].items():
                assert ts.q_sa[s][ai] == pytest.approx(v, abs=1e-10)
        assert dcl.policy_value(model, policy) == pytest.approx(oracle.j, abs=1e-10)


# -- bias -------------------------------------------------------------------


def test_dectiger_bias_at_famous_cell(dectiger, listen_open_tables):
    policy, tables = listen_open_tables
    report = dcl.bias_report(dectiger, policy, tables=tables)
    hstar = ((LL, (1, 1)),)
    assert report.rows[(hstar, LL)] == pytest.approx(30.06, abs=1e-2)
    assert report.max_abs_bias > 1.0


def test_beverage_bias_zero(beverage):
    policy = dcl.uniform_policy(beverage)
    report = dcl.bias_report(beverage, policy)
    assert report.rows[((), (1,))] == pytest.approx(0.0, abs=1e-12)
    assert report.max_abs_bias <= 1e-12


def test_meetgrid_reactive_bias_zero(meetgrid):
    model = meetgrid.with_horizon(4)
    for policy in (dcl.uniform_policy(model), dcl.random_policy(model, 2, reactive=True)):
        report = dcl.bias_report(model, policy)
        assert report.max_abs_bias <= 1e-10


# -- gradients ----------------------------------------------------------------


def test_appendix_gradient_components(dectiger4, listen_open_tables4):
    policy, tables = listen_open_tables4
    report = dcl.gradient_report(dectiger4, policy, tables=tables)
    listen = 0
    hi = ((listen, 0), (listen, 1))  # (listen, hear-left, listen, hear-right)
    pos = report.index.position(0, hi, listen)
    assert report.kinds["H"].per_visit[pos] == pytest.approx(-9.74, abs=1e-2)
    assert report.kinds["S"].per_visit[pos] == pytest.approx(0.0474, abs=1e-3)


def test_hs_gradient_equals_h(dectiger, beverage):
    for model in (dectiger, beverage):
        for policy in (dcl.uniform_policy(model), dcl.random_policy(model, 9)):
            for rk in ("episode", "continuation"):
                rep = dcl.gradient_report(model, policy, kinds=("H", "HS"), return_kind=rk)
                assert np.allclose(rep.kinds["HS"].gradient, rep.kinds["H"].gradient, atol=1e-10)


def test_gradient_matches_bruteforce(dectiger, beverage):
    for model in (beverage, dectiger):
        policy = dcl.random_policy(model, 17)
        tables = dcl.values(model, policy)
        idx = dcl.parameter_index(model, tables.visitation)
        for rk in ("episode", "continuation"):
            rep = dcl.gradient_report(model, policy, return_kind=rk, tables=tables)
            oracle = BruteForce(model, policy)
            expect = oracle.gradient(idx, return_kind=rk)
            assert np.allclose(rep.kinds["H"].gradient, expect, atol=1e-10)


def test_variance_matches_bruteforce(dectiger):
    policy = dcl.random_policy(dectiger, 23)
    tables = dcl.values(dectiger, policy)
    idx = dcl.parameter_index(dectiger, tables.visitation)
    oracle = BruteForce(dectiger, policy)
    for kind in ("H", "S", "HS"):
        for rk in ("episode", "continuation"):
            rep = dcl.gradient_report(dectiger, policy, kinds=(kind,), return_kind=rk, tables=tables)
            mean, second = oracle.estimator_moments(idx, kind, rk)
            assert np.allclose(rep.kinds[kind].estimator_mean, mean, atol=1e-10)
            assert rep.kinds[kind].total_variance == pytest.approx(second - float(mean @ mean), rel=1e-9)


def test_beverage_variance_gap_is_one(beverage):
    policy = dcl.TabularJointPolicy(action_sizes=beverage.action_sizes, parameterization="direct")
    policy.set(0, (), np.array([0.0, 1.0]))  # deterministic serve-tea
    rep = dcl.gradient_report(beverage, policy)
    var_h = rep.kinds["H"].total_variance
    var_s = rep.kinds["S"].total_variance
    assert var_h == pytest.approx(0.0, abs=1e-12)
    assert var_s - var_h == pytest.approx(1.0, abs=1e-12)  # 1 * (score magnitude 1)^2


def test_single_state_model_variances_coincide():
    # one state, noisy observations: state conveys nothing, all critic weights
    # coincide for reward-to-go values under a reactive policy
    model = dcl.parse_model(
        """
agents: 1
discount: 1.0
horizon: 3
states: only
actions 0: a b
observations 0: x y
start: 1.0
T: only * -> only 1.0
O: a only -> x 0.5
O: a only -> y 0.5
O: b only -> x 0.25
O: b only -> y 0.75
R: only a * 1.0
R: only b * 0.25
"""
    )
    policy = dcl.random_policy(model, 4, reactive=True)
    rep = dcl.gradient_report(model, policy, return_kind="continuation")
    v = [rep.kinds[k].total_variance for k in ("H", "S", "HS")]
    assert v[0] == pytest.approx(v[1], abs=1e-10)
    assert v[0] == pytest.approx(v[2], abs=1e-10)


def test_conditional_variance_ordering(meetgrid, beverage):
    model = meetgrid.with_horizon(4)
    for policy in (dcl.uniform_policy(model), dcl.random_policy(model, 31, reactive=True)):
        tables = dcl.values(model, policy)
        rep = dcl.gradient_report(model, policy, tables=tables, return_kind="continuation")
        assert rep.max_abs_bias <= 1e-10
        assert rep.kinds["S"].total_variance >= rep.kinds["H"].total_variance - 1e-10
        assert rep.kinds["HS"].total_variance >= rep.kinds["H"].total_variance - 1e-10
    # HS >= H holds unconditionally, also for the paper's episode returns
    policy = dcl.random_policy(beverage, 8)
    rep = dcl.gradient_report(beverage, policy, return_kind="episode")
    assert rep.kinds["HS"].total_variance >= rep.kinds["H"].total_variance - 1e-10


def test_degenerate_score_guard(beverage):
    policy = dcl.TabularJointPolicy(action_sizes=beverage.action_sizes, parameterization="direct")
    policy.set(0, (), np.array([1.0, 0.0]))
    with pytest.raises(dcl.DegenerateScoreError):
        policy.score(0, (), 1)


def test_finite_difference_gradient(beverage, dectiger):
    eps = 1e-5
    for model, seed in ((beverage, 1), (dectiger, 2)):
        policy, idx, theta = dcl.random_softmax_policy(model, seed)
        rep = dcl.gradient_report(model, policy, kinds=("H",))
        grad = rep.kinds["H"].gradient
        for pos in range(idx.size):
            up = theta.copy()
            up[pos] += eps
            down = theta.copy()
            down[pos] -= eps
            j_up = dcl.policy_value(model, dcl.softmax_policy_from_vector(idx, up))
            j_down = dcl.policy_value(model, dcl.softmax_policy_from_vector(idx, down))
            fd = (j_up - j_down) / (2 * eps)
            scale = max(abs(fd), abs(grad[pos]), 1e-8)
            assert abs(grad[pos] - fd) / scale < 1e-5, (pos, grad[pos], fd)
