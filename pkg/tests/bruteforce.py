"""Independent complete-trajectory oracle.

Enumerates every positive-probability trajectory of (model, policy) over the
full horizon (terminal states self-loop rather than stopping) and derives
visitation tables, value tables, J, policy gradients and estimator moments
purely by weighted aggregation over trajectories. No code is shared with the
package's dynamic-programming implementation beyond the model tables.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class TrajStep:
    state: int
    action: tuple
    action_index: int
    reward: float
    obs: tuple


@dataclass
class Traj:
    prob: float
    steps: list


def enumerate_trajectories(model, policy):
    """All trajectories with positive probability, full horizon."""
    T, O, R = model.transition, model.observation_fn, model.reward
    out: list[Traj] = []

    def recurse(t, s, h, prob, steps):
        if t == model.horizon:
            out.append(Traj(prob, steps))
            return
        per_agent = [policy.probs(i, tuple((a[i], o[i]) for a, o in h)) for i in range(model.num_agents)]
        for ai, a in enumerate(model.joint_actions):
            pa = 1.0
            for i, a_i in enumerate(a):
                pa *= per_agent[i][a_i]
            if pa == 0.0:
                continue
            for s2 in np.nonzero(T[s, ai])[0]:
                pt = float(T[s, ai, s2])
                r = float(R[s, ai, s2])
                for zi in np.nonzero(O[ai, s2])[0]:
                    po = float(O[ai, s2, zi])
                    o = model.joint_observations[zi]
                    recurse(
                        t + 1,
                        int(s2),
                        h + ((a, o),),
                        prob * pa * pt * po,
                        steps + [TrajStep(s, a, ai, r, o)],
                    )

    for s0 in np.nonzero(model.initial_dist)[0]:
        recurse(0, int(s0), (), float(model.initial_dist[s0]), [])
    return out


class BruteForce:
    """Trajectory-aggregation oracle for every exact-module quantity."""

    def __init__(self, model, policy):
        self.model = model
        self.policy = policy
        self.gamma = model.discount
        self.horizon = model.horizon
        self.trajs = enumerate_trajectories(model, policy)
        self._aggregate()

    def _returns(self, traj):
        """(discounted episode return, per-timestep locally discounted rewards-to-go)."""
        g0 = sum((self.gamma**t) * st.reward for t, st in enumerate(traj.steps))
        togo = []
        acc = 0.0
        for st in reversed(traj.steps):
            acc = st.reward + self.gamma * acc
            togo.append(acc)
        togo.reverse()
        return g0, togo

    def _aggregate(self):
        gamma = self.gamma
        self.pr_t = [dict() for _ in range(self.horizon)]
        self.j = 0.0
        num_hsa_ep, num_hsa_cont, den_hsa = {}, {}, {}
        num_ha_ep, num_ha_cont, den_ha = {}, {}, {}
        num_sat_ep, num_sat_cont, den_sat = {}, {}, {}
        num_sa_ep, num_sa_cont, den_sa = {}, {}, {}

        for traj in self.trajs:
            g0, togo = self._returns(traj)
            self.j += traj.prob * g0
            h = ()
            for t, st in enumerate(traj.steps):
                key = (h, st.state)
                self.pr_t[t][key] = self.pr_t[t].get(key, 0.0) + traj.prob
                disc = gamma**t
                ep = g0
                cont = togo[t]
                for table, val in (
                    (num_hsa_ep, ep),
                    (num_hsa_cont, cont),
                ):
                    k = (h, st.state, st.action_index)
                    table[k] = table.get(k, 0.0) + traj.prob * val
                k = (h, st.state, st.action_index)
                den_hsa[k] = den_hsa.get(k, 0.0) + traj.prob
                k = (h, st.action_index)
                num_ha_ep[k] = num_ha_ep.get(k, 0.0) + traj.prob * ep
                num_ha_cont[k] = num_ha_cont.get(k, 0.0) + traj.prob * cont
                den_ha[k] = den_ha.get(k, 0.0) + traj.prob
                k = (st.state, t, st.action_index)
                num_sat_ep[k] = num_sat_ep.get(k, 0.0) + disc * traj.prob * ep
                num_sat_cont[k] = num_sat_cont.get(k, 0.0) + disc * traj.prob * cont
                den_sat[k] = den_sat.get(k, 0.0) + disc * traj.prob
                k = (st.state, st.action_index)
                num_sa_ep[k] = num_sa_ep.get(k, 0.0) + disc * traj.prob * ep
                num_sa_cont[k] = num_sa_cont.get(k, 0.0) + disc * traj.prob * cont
                den_sa[k] = den_sa.get(k, 0.0) + disc * traj.prob
                h = h + ((st.action, st.obs),)

        self.eta = {}
        for t, level in enumerate(self.pr_t):
            for key, p in level.items():
                self.eta[key] = self.eta.get(key, 0.0) + (gamma**t) * p
        total = sum(self.eta.values())
        self.rho = {k: v / total for k, v in self.eta.items()}
        self.eta_total = total

        def ratio(num, den):
            return {k: num[k] / den[k] for k in num}

        self.q_hsa = {"episode": ratio(num_hsa_ep, den_hsa), "continuation": ratio(num_hsa_cont, den_hsa)}
        self.q_ha = {"episode": ratio(num_ha_ep, den_ha), "continuation": ratio(num_ha_cont, den_ha)}
        self.q_sa_t = {"episode": ratio(num_sat_ep, den_sat), "continuation": ratio(num_sat_cont, den_sat)}
        self.q_sa = {"episode": ratio(num_sa_ep, den_sa), "continuation": ratio(num_sa_cont, den_sa)}

    # -- gradients and estimator moments (full-support policies) -----------

    def gradient(self, index, return_kind="episode"):
        """Likelihood-ratio gradient: sum_t gamma^t E[indicator/pi * return]."""
        g = np.zeros(index.size)
        gamma = self.gamma
        for traj in self.trajs:
            g0, togo = self._returns(traj)
            h = ()
            hists = [() for _ in range(self.model.num_agents)]
            for t, st in enumerate(traj.steps):
                val = g0 if return_kind == "episode" else togo[t]
                for i, a_i in enumerate(st.action):
                    pi = self.policy.prob(i, hists[i], a_i)
                    pos = index.position(i, hists[i], a_i)
                    g[pos] += (gamma**t) * traj.prob * val / pi
                for i in range(self.model.num_agents):
                    hists[i] = hists[i] + ((st.action[i], st.obs[i]),)
                h = h + ((st.action, st.obs),)
        return g

    def estimator_moments(self, index, kind, return_kind="episode"):
        """Exact mean vector and trace second moment of the single-sample
        estimator, summing over (trajectory, timestep) sample points."""
        mean = np.zeros(index.size)
        second = 0.0
        gamma = self.gamma
        qt = {"H": None, "S": None, "HS": None}
        for traj in self.trajs:
            h = ()
            hists = [() for _ in range(self.model.num_agents)]
            for t, st in enumerate(traj.steps):
                w_sample = traj.prob * (gamma**t) / self.eta_total
                if kind == "H":
                    w = self.q_ha[return_kind][(h, st.action_index)]
                elif kind == "S":
                    w = self.q_sa_t[return_kind][(st.state, t, st.action_index)]
                else:
                    w = self.q_hsa[return_kind][(h, st.state, st.action_index)]
                score_sq = 0.0
                for i, a_i in enumerate(st.action):
                    pi = self.policy.prob(i, hists[i], a_i)
                    pos = index.position(i, hists[i], a_i)
                    mean[pos] += w_sample * w / pi
                    score_sq += 1.0 / (pi * pi)
                second += w_sample * w * w * score_sq
                for i in range(self.model.num_agents):
                    hists[i] = hists[i] + ((st.action[i], st.obs[i]),)
                h = h + ((st.action, st.obs),)
        return mean, second

    def variance(self, index, kind, return_kind="episode"):
        mean, second = self.estimator_moments(index, kind, return_kind)
        return second - float(mean @ mean)
