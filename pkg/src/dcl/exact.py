"""Exact enumeration, on-policy visitation distributions, value tables,
policy gradients and gradient variances for tabular Dec-POMDPs.

Histories are nested tuples ((joint_action, joint_obs), ...). Two value
semantics are computed side by side:

  episode      -- Q(h,s,a) is the expected *full episode* return given the
                  agents pass through (h,s) and take a; expected rewards
                  accumulated before reaching h are included.
  continuation -- Q(h,s,a) is the expected return from h's timestep onward
                  (the usual reward-to-go backward recursion).

The two agree on histories with no past (and everywhere on horizon-1
problems); they differ by the expected accumulated reward otherwise.
State-action values are conditioned on the action actually being taken:
the history average is weighted by rho(h,s)*pi(a|h). Time-indexed state
values Q(s,t,a) drive the bias table and the state-critic estimator weight;
the time-aggregated Q(s,a) table is the reported state value.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .model import DecPomdpModel, JointAction
from .policies import IndividualHistory, JointHistory, TabularJointPolicy, project

DEFAULT_SUPPORT_CAP = 5_000_000

RETURN_KINDS = ("episode", "continuation")
CRITIC_KINDS = ("H", "S", "HS")


class ResourceCapError(RuntimeError):
    def __init__(self, cap: int, count: int):
        super().__init__(f"reachable (history, state) support has {count} entries, exceeding the cap of {cap}")
        self.cap = cap
        self.count = count


class _Dynamics:
    """Support lists and per-agent index maps precomputed from the model tables."""

    _instances: dict[int, "_Dynamics"] = {}

    def __init__(self, model: DecPomdpModel):
        T, O, R = model.transition, model.observation_fn, model.reward
        self.joint_actions = model.joint_actions
        self.joint_obs = model.joint_observations
        n_a = model.num_joint_actions
        # tsup[s][ai] -> ((s2, p, r), ...); osup[ai][s2] -> ((obs_tuple, po), ...)
        self.tsup = [
            [
                tuple((int(s2), float(T[s, ai, s2]), float(R[s, ai, s2])) for s2 in np.nonzero(T[s, ai])[0])
                for ai in range(n_a)
            ]
            for s in range(model.num_states)
        ]
        self.osup = [
            [
                tuple((self.joint_obs[int(zi)], float(O[ai, s2, zi])) for zi in np.nonzero(O[ai, s2])[0])
                for s2 in range(model.num_states)
            ]
            for ai in range(n_a)
        ]
        # component[i][ai] = agent i's action index inside joint action ai
        self.component = [
            np.array([a[i] for a in self.joint_actions]) for i in range(model.num_agents)
        ]
        # group[i]: (A x n_i) one-hot matrix summing joint-action vectors per component
        self.group = []
        for i in range(model.num_agents):
            g = np.zeros((n_a, model.action_sizes[i]))
            g[np.arange(n_a), self.component[i]] = 1.0
            self.group.append(g)

    @classmethod
    def of(cls, model: DecPomdpModel) -> "_Dynamics":
        key = id(model)
        if key not in cls._instances:
            if len(cls._instances) > 16:
                cls._instances.clear()
            cls._instances[key] = cls(model)
        return cls._instances[key]


def joint_action_probs(per_agent: list[np.ndarray]) -> np.ndarray:
    """Product distribution over flat joint actions (product ordering)."""
    pa = per_agent[0]
    for vec in per_agent[1:]:
        pa = np.multiply.outer(pa, vec)
    return pa.ravel()


# -- forward enumeration ---------------------------------------------------


@dataclass
class VisitationTable:
    """Pr_t(h,s) per timestep plus eta/rho tables and cached conditionals.

    eta(h,s) = sum_t gamma^t Pr_t(h,s); rho = eta normalized. past_mean(h,s)
    is the expected discounted reward accumulated strictly before reaching
    (h,s), used to convert continuation values into episode values.
    """

    horizon: int
    gamma: float
    pr_t: list[dict[tuple[JointHistory, int], float]]
    past_mean: dict[tuple[JointHistory, int], float]
    eta: dict[tuple[JointHistory, int], float] = field(default_factory=dict)
    rho: dict[tuple[JointHistory, int], float] = field(default_factory=dict)
    rho_h: dict[JointHistory, float] = field(default_factory=dict)
    rho_s: dict[int, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.eta:
            for t, level in enumerate(self.pr_t):
                w = self.gamma**t
                for key, p in level.items():
                    self.eta[key] = self.eta.get(key, 0.0) + w * p
            total = sum(self.eta.values())
            for key, v in self.eta.items():
                r = v / total
                self.rho[key] = r
                h, s = key
                self.rho_h[h] = self.rho_h.get(h, 0.0) + r
                self.rho_s[s] = self.rho_s.get(s, 0.0) + r

    def states_of(self, h: JointHistory) -> list[int]:
        t = len(h)
        return [s for (hh, s) in self.pr_t[t] if hh == h]

    def rho_s_given_h(self, h: JointHistory) -> dict[int, float]:
        t = len(h)
        level = self.pr_t[t]
        states = {s: p for (hh, s), p in level.items() if hh == h}
        total = sum(states.values())
        return {s: p / total for s, p in states.items()}

    def rho_h_given_s(self, s: int) -> dict[JointHistory, float]:
        total = self.rho_s[s]
        return {h: v / total for (h, ss), v in self.rho.items() if ss == s}

    @property
    def num_entries(self) -> int:
        return sum(len(level) for level in self.pr_t)


def enumerate_support(
    model: DecPomdpModel,
    policy: TabularJointPolicy,
    cap: int = DEFAULT_SUPPORT_CAP,
) -> VisitationTable:
    """Forward pass over t = 0..horizon-1; zero-probability branches pruned."""
    dyn = _Dynamics.of(model)
    gamma = model.discount
    joint_actions = model.joint_actions

    level: dict[tuple[JointHistory, int], float] = {}
    mass: dict[tuple[JointHistory, int], float] = {}
    empty: JointHistory = ()
    for s in range(model.num_states):
        p = float(model.initial_dist[s])
        if p > 0.0:
            level[(empty, s)] = p
            mass[(empty, s)] = 0.0

    pr_t = [level]
    past_mean = {key: 0.0 for key in level}
    count = len(level)

    for t in range(model.horizon - 1):
        nxt: dict[tuple[JointHistory, int], float] = {}
        nxt_mass: dict[tuple[JointHistory, int], float] = {}
        pa_cache: dict[JointHistory, np.ndarray] = {}
        disc = gamma**t
        budget = cap - count
        for (h, s), p in level.items():
            if len(nxt) > budget:
                raise ResourceCapError(cap, count + len(nxt))
            pa_vec = pa_cache.get(h)
            if pa_vec is None:
                pa_vec = joint_action_probs(policy.joint_probs(h))
                pa_cache[h] = pa_vec
            m = mass[(h, s)]
            tsup_s = dyn.tsup[s]
            for ai in np.nonzero(pa_vec)[0]:
                pa = pa_vec[ai]
                a = joint_actions[ai]
                for s2, pt, r in tsup_s[ai]:
                    step_mass = m + p * disc * r
                    for o, po in dyn.osup[ai][s2]:
                        w = p * pa * pt * po
                        if w == 0.0:
                            continue
                        key = (h + ((a, o),), s2)
                        if key in nxt:
                            nxt[key] += w
                            nxt_mass[key] += pa * pt * po * step_mass
                        else:
                            nxt[key] = w
                            nxt_mass[key] = pa * pt * po * step_mass
        count += len(nxt)
        if count > cap:
            raise ResourceCapError(cap, count)
        for key, p in nxt.items():
            past_mean[key] = nxt_mass[key] / p
        pr_t.append(nxt)
        level, mass = nxt, nxt_mass

    return VisitationTable(horizon=model.horizon, gamma=gamma, pr_t=pr_t, past_mean=past_mean)


def visitation(
    model: DecPomdpModel, policy: TabularJointPolicy, cap: int = DEFAULT_SUPPORT_CAP
) -> VisitationTable:
    return enumerate_support(model, policy, cap)


# -- value tables ------------------------------------------------------------


@dataclass
class ValueTableSet:
    """All four value tables for one return semantics."""

    return_kind: str
    q_hsa: dict[tuple[JointHistory, int], np.ndarray]
    q_ha: dict[JointHistory, np.ndarray]
    q_sa_t: dict[tuple[int, int], np.ndarray]
    q_sa_t_defined: dict[tuple[int, int], np.ndarray]
    q_sa: dict[int, np.ndarray]
    q_sa_defined: dict[int, np.ndarray]
    e_s_qsa: dict[JointHistory, np.ndarray]


@dataclass
class ValueTables:
    model: DecPomdpModel
    policy: TabularJointPolicy
    visitation: VisitationTable
    episode: ValueTableSet
    continuation: ValueTableSet

    def table_set(self, return_kind: str) -> ValueTableSet:
        if return_kind == "episode":
            return self.episode
        if return_kind == "continuation":
            return self.continuation
        raise ValueError(f"unknown return kind {return_kind!r}")


class _ContinuationValues:
    """Memoized continuation recursion, valid off the on-policy support."""

    def __init__(self, model: DecPomdpModel, policy: TabularJointPolicy):
        self.model = model
        self.policy = policy
        self.dyn = _Dynamics.of(model)
        self._v: dict[tuple[JointHistory, int], float] = {}

    def v(self, h: JointHistory, s: int, t: int) -> float:
        if t >= self.model.horizon or s in self.model.terminal_states:
            return 0.0
        key = (h, s)
        if key in self._v:
            return self._v[key]
        pa_vec = joint_action_probs(self.policy.joint_probs(h))
        total = 0.0
        for ai in np.nonzero(pa_vec)[0]:
            total += pa_vec[ai] * self.q(h, s, t, int(ai))
        self._v[key] = total
        return total

    def q(self, h: JointHistory, s: int, t: int, ai: int) -> float:
        model = self.model
        if t >= model.horizon or s in model.terminal_states:
            return 0.0
        a = self.dyn.joint_actions[ai]
        last = t + 1 >= model.horizon
        gamma = model.discount
        total = 0.0
        for s2, pt, r in self.dyn.tsup[s][ai]:
            acc = r
            if not last:
                cont = 0.0
                for o, po in self.dyn.osup[ai][s2]:
                    cont += po * self.v(h + ((a, o),), s2, t + 1)
                acc += gamma * cont
            total += pt * acc
        return total

    def q_vector(self, h: JointHistory, s: int, t: int) -> np.ndarray:
        return np.array([self.q(h, s, t, ai) for ai in range(self.model.num_joint_actions)])


def values(
    model: DecPomdpModel,
    policy: TabularJointPolicy,
    cap: int = DEFAULT_SUPPORT_CAP,
    vt: VisitationTable | None = None,
) -> ValueTables:
    """Compute all value tables for both return semantics."""
    if vt is None:
        vt = enumerate_support(model, policy, cap)
    cv = _ContinuationValues(model, policy)
    gamma = model.discount
    n_a = model.num_joint_actions

    q_hsa_c: dict[tuple[JointHistory, int], np.ndarray] = {}
    q_hsa_e: dict[tuple[JointHistory, int], np.ndarray] = {}
    for t, level in enumerate(vt.pr_t):
        for (h, s) in level:
            vec = cv.q_vector(h, s, t)
            q_hsa_c[(h, s)] = vec
            q_hsa_e[(h, s)] = vt.past_mean[(h, s)] + (gamma**t) * vec

    sets = {}
    for kind, q_hsa in (("continuation", q_hsa_c), ("episode", q_hsa_e)):
        q_ha: dict[JointHistory, np.ndarray] = {}
        num_sa_t: dict[tuple[int, int], np.ndarray] = {}
        den_sa_t: dict[tuple[int, int], np.ndarray] = {}
        num_sa: dict[int, np.ndarray] = {}
        den_sa: dict[int, np.ndarray] = {}
        probs_cache: dict[JointHistory, np.ndarray] = {}

        for t, level in enumerate(vt.pr_t):
            disc = gamma**t
            by_h: dict[JointHistory, float] = {}
            for (h, s), p in level.items():
                by_h[h] = by_h.get(h, 0.0) + p
            for (h, s), p in level.items():
                pa = probs_cache.get(h)
                if pa is None:
                    pa = joint_action_probs(policy.joint_probs(h))
                    probs_cache[h] = pa
                qv = q_hsa[(h, s)]
                cond = p / by_h[h]
                if h in q_ha:
                    q_ha[h] = q_ha[h] + cond * qv
                else:
                    q_ha[h] = cond * qv
                w = disc * p * pa
                key = (s, t)
                if key not in num_sa_t:
                    num_sa_t[key] = np.zeros(n_a)
                    den_sa_t[key] = np.zeros(n_a)
                num_sa_t[key] += w * qv
                den_sa_t[key] += w
                if s not in num_sa:
                    num_sa[s] = np.zeros(n_a)
                    den_sa[s] = np.zeros(n_a)
                num_sa[s] += w * qv
                den_sa[s] += w

        q_sa_t = {}
        q_sa_t_defined = {}
        for key, num in num_sa_t.items():
            den = den_sa_t[key]
            defined = den > 0.0
            vec = np.zeros(n_a)
            vec[defined] = num[defined] / den[defined]
            vec[~defined] = np.nan
            q_sa_t[key] = vec
            q_sa_t_defined[key] = defined
        q_sa = {}
        q_sa_defined = {}
        for s, num in num_sa.items():
            den = den_sa[s]
            defined = den > 0.0
            vec = np.zeros(n_a)
            vec[defined] = num[defined] / den[defined]
            vec[~defined] = np.nan
            q_sa[s] = vec
            q_sa_defined[s] = defined

        e_s_qsa: dict[JointHistory, np.ndarray] = {}
        for t, level in enumerate(vt.pr_t):
            by_h: dict[JointHistory, float] = {}
            for (h, s), p in level.items():
                by_h[h] = by_h.get(h, 0.0) + p
            for (h, s), p in level.items():
                vec = q_sa_t[(s, t)]
                contrib = (p / by_h[h]) * vec
                if h in e_s_qsa:
                    e_s_qsa[h] = e_s_qsa[h] + contrib
                else:
                    e_s_qsa[h] = contrib

        sets[kind] = ValueTableSet(
            return_kind=kind,
            q_hsa=q_hsa,
            q_ha=q_ha,
            q_sa_t=q_sa_t,
            q_sa_t_defined=q_sa_t_defined,
            q_sa=q_sa,
            q_sa_defined=q_sa_defined,
            e_s_qsa=e_s_qsa,
        )

    return ValueTables(
        model=model,
        policy=policy,
        visitation=vt,
        episode=sets["episode"],
        continuation=sets["continuation"],
    )


def policy_value(model: DecPomdpModel, policy: TabularJointPolicy) -> float:
    """J = expected (discounted) episode return of the joint policy."""
    cv = _ContinuationValues(model, policy)
    empty: JointHistory = ()
    return float(
        sum(
            float(model.initial_dist[s]) * cv.v(empty, s, 0)
            for s in range(model.num_states)
            if model.initial_dist[s] > 0.0
        )
    )


# -- bias report -------------------------------------------------------------


@dataclass
class BiasReport:
    """Per-(h,a) gap Q(h,a) - E_{s~rho(s|h)}[Q(s,t(h),a)] and its max magnitude.

    Computed on continuation values: the accumulated-past component of the
    episode values cancels only history-wise, not state-wise, and the
    theoretical zero-bias conditions are statements about reward-to-go.
    """

    return_kind: str
    rows: dict[tuple[JointHistory, JointAction], float]
    max_abs_bias: float


def bias_report(
    model: DecPomdpModel,
    policy: TabularJointPolicy,
    tables: ValueTables | None = None,
    return_kind: str = "continuation",
    cap: int = DEFAULT_SUPPORT_CAP,
) -> BiasReport:
    if tables is None:
        tables = values(model, policy, cap)
    ts = tables.table_set(return_kind)
    vt = tables.visitation
    terminal = model.terminal_states

    rows: dict[tuple[JointHistory, JointAction], float] = {}
    max_abs = 0.0
    joint_actions = model.joint_actions
    for level in vt.pr_t:
        support_by_h: dict[JointHistory, list[int]] = {}
        for (h, s) in level:
            support_by_h.setdefault(h, []).append(s)
        for h, support in support_by_h.items():
            if any(ss in terminal for ss in support):
                continue
            pa = joint_action_probs(policy.joint_probs(h))
            diff = ts.q_ha[h] - ts.e_s_qsa[h]
            for ai in np.nonzero(pa)[0]:
                b = float(diff[ai])
                rows[(h, joint_actions[ai])] = b
                if abs(b) > max_abs:
                    max_abs = abs(b)
    return BiasReport(return_kind=return_kind, rows=rows, max_abs_bias=max_abs)


# -- gradients ---------------------------------------------------------------


@dataclass
class ParameterIndex:
    """Flat index over (agent, individual history, action) triples."""

    entries: list[tuple[int, IndividualHistory, int]]
    offsets: dict[tuple[int, IndividualHistory], int]
    action_sizes: tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.entries)

    def position(self, agent: int, hist: IndividualHistory, action: int) -> int:
        return self.offsets[(agent, hist)] + action


def parameter_index(model: DecPomdpModel, vt: VisitationTable) -> ParameterIndex:
    entries: list[tuple[int, IndividualHistory, int]] = []
    offsets: dict[tuple[int, IndividualHistory], int] = {}
    for agent in range(model.num_agents):
        seen: set[IndividualHistory] = set()
        for level in vt.pr_t:
            for (h, _s) in level:
                hi = project(h, agent)
                if hi in seen:
                    continue
                seen.add(hi)
                offsets[(agent, hi)] = len(entries)
                for a in range(model.action_sizes[agent]):
                    entries.append((agent, hi, a))
    return ParameterIndex(entries=entries, offsets=offsets, action_sizes=model.action_sizes)


@dataclass
class KindGradient:
    kind: str
    return_kind: str
    gradient: np.ndarray
    per_visit: np.ndarray
    estimator_mean: np.ndarray
    total_variance: float


@dataclass
class GradientReport:
    model: DecPomdpModel
    policy: TabularJointPolicy
    index: ParameterIndex
    visit_prob: np.ndarray
    kinds: dict[str, KindGradient]
    bias: BiasReport

    @property
    def max_abs_bias(self) -> float:
        return self.bias.max_abs_bias


def _weight(ts: ValueTableSet, kind: str, h: JointHistory, s: int, t: int, ai: int) -> float:
    if kind == "H":
        return float(ts.q_ha[h][ai])
    if kind == "S":
        return float(ts.q_sa_t[(s, t)][ai])
    if kind == "HS":
        return float(ts.q_hsa[(h, s)][ai])
    raise ValueError(f"unknown critic kind {kind!r}")


def gradient_report(
    model: DecPomdpModel,
    policy: TabularJointPolicy,
    kinds: tuple[str, ...] = CRITIC_KINDS,
    return_kind: str = "episode",
    tables: ValueTables | None = None,
    cap: int = DEFAULT_SUPPORT_CAP,
) -> GradientReport:
    """Exact policy gradients and single-sample estimator moments per critic kind.

    `gradient` is the sum over timesteps of gamma^t Pr_t-weighted score terms
    (the policy gradient; for softmax parameterization exactly dJ/dtheta).
    `estimator_mean` divides by sum_t gamma^t, i.e. the expectation of the
    single-draw estimator whose (h,s) ~ rho and a ~ pi. `per_visit` divides
    each component by its history's visit probability, the conditional form
    used in the reference computations. `total_variance` is the exact
    trace-variance of the single-sample estimator.
    """
    if tables is None:
        tables = values(model, policy, cap)
    ts = tables.table_set(return_kind)
    vt = tables.visitation
    dyn = _Dynamics.of(model)
    idx = parameter_index(model, vt)
    direct = policy.parameterization == "direct"
    gamma = model.discount
    n_agents = model.num_agents

    visit = np.zeros(idx.size)
    for t, level in enumerate(vt.pr_t):
        disc = gamma**t
        for (h, s), p in level.items():
            for i in range(n_agents):
                base = idx.offsets[(i, project(h, i))]
                visit[base : base + model.action_sizes[i]] += disc * p

    eta_total = sum(gamma**t * sum(level.values()) for t, level in enumerate(vt.pr_t))

    grads = {k: np.zeros(idx.size) for k in kinds}
    second = {k: 0.0 for k in kinds}

    def weight_vector(kind: str, h, s, t) -> np.ndarray:
        if kind == "H":
            return ts.q_ha[h]
        if kind == "S":
            return ts.q_sa_t[(s, t)]
        if kind == "HS":
            return ts.q_hsa[(h, s)]
        raise ValueError(f"unknown critic kind {kind!r}")

    for t, level in enumerate(vt.pr_t):
        disc = gamma**t
        probs_cache: dict[JointHistory, tuple] = {}
        for (h, s), p in level.items():
            cached = probs_cache.get(h)
            if cached is None:
                per_agent = policy.joint_probs(h)
                pa = joint_action_probs(per_agent)
                on = pa > 0.0
                if direct:
                    # per-agent score magnitudes on the support (0/0-safe off it)
                    inv = [np.where(vec > 0.0, 1.0 / np.maximum(vec, 1e-300), 0.0) for vec in per_agent]
                    score_sq = np.zeros(len(pa))
                    for i in range(n_agents):
                        score_sq += (inv[i] ** 2)[dyn.component[i]]
                else:
                    norms = [float(vec @ vec) for vec in per_agent]
                    score_sq = np.zeros(len(pa))
                    for i in range(n_agents):
                        score_sq += 1.0 + norms[i] - 2.0 * per_agent[i][dyn.component[i]]
                cached = (per_agent, pa, on, inv if direct else None, score_sq)
                probs_cache[h] = cached
            per_agent, pa, on, inv, score_sq = cached
            projections = [project(h, i) for i in range(n_agents)]
            wvecs = {k: np.where(on, weight_vector(k, h, s, t), 0.0) for k in kinds}
            for k in kinds:
                wv = wvecs[k]
                paw = pa * wv
                for i in range(n_agents):
                    base = idx.offsets[(i, projections[i])]
                    n_i = model.action_sizes[i]
                    comp_sum = dyn.group[i].T @ paw
                    if direct:
                        grads[k][base : base + n_i] += (disc * p) * comp_sum * inv[i]
                    else:
                        grads[k][base : base + n_i] += (disc * p) * (comp_sum - paw.sum() * per_agent[i])
                second[k] += (disc * p / eta_total) * float((paw * wv) @ score_sq)

    kind_results = {}
    for k in kinds:
        mean = grads[k] / eta_total
        with np.errstate(invalid="ignore", divide="ignore"):
            per_visit = np.where(visit > 0.0, grads[k] / visit, np.nan)
        kind_results[k] = KindGradient(
            kind=k,
            return_kind=return_kind,
            gradient=grads[k],
            per_visit=per_visit,
            estimator_mean=mean,
            total_variance=float(second[k] - mean @ mean),
        )

    bias = bias_report(model, policy, tables=tables)
    return GradientReport(
        model=model, policy=policy, index=idx, visit_prob=visit, kinds=kind_results, bias=bias
    )


def exact_gradient(
    model: DecPomdpModel,
    policy: TabularJointPolicy,
    kind: str,
    return_kind: str = "episode",
    tables: ValueTables | None = None,
    cap: int = DEFAULT_SUPPORT_CAP,
) -> np.ndarray:
    report = gradient_report(model, policy, kinds=(kind,), return_kind=return_kind, tables=tables, cap=cap)
    return report.kinds[kind].gradient


def gradient_variance(
    model: DecPomdpModel,
    policy: TabularJointPolicy,
    kind: str,
    return_kind: str = "episode",
    tables: ValueTables | None = None,
    cap: int = DEFAULT_SUPPORT_CAP,
) -> float:
    report = gradient_report(model, policy, kinds=(kind,), return_kind=return_kind, tables=tables, cap=cap)
    return report.kinds[kind].total_variance


# -- softmax materialization (finite differences etc.) -----------------------


def softmax_policy_from_vector(index: ParameterIndex, theta: np.ndarray, name: str = "softmax") -> TabularJointPolicy:
    n_agents = len(index.action_sizes)
    tables: list[dict[IndividualHistory, np.ndarray]] = [dict() for _ in range(n_agents)]
    for (agent, hist), base in index.offsets.items():
        tables[agent][hist] = np.asarray(theta[base : base + index.action_sizes[agent]], dtype=float)
    return TabularJointPolicy(
        action_sizes=index.action_sizes,
        parameterization="softmax",
        tables=tables,
        name=name,
    )


def random_softmax_policy(
    model: DecPomdpModel, seed: int, scale: float = 0.3
) -> tuple[TabularJointPolicy, ParameterIndex, np.ndarray]:
    """A full-support softmax policy with seeded logits over all reachable
    individual histories (enumerated under the uniform policy)."""
    from .policies import uniform_policy

    vt = enumerate_support(model, uniform_policy(model))
    idx = parameter_index(model, vt)
    rng = np.random.default_rng(seed)
    theta = scale * rng.standard_normal(idx.size)
    return softmax_policy_from_vector(idx, theta, name=f"softmax-{seed}"), idx, theta
