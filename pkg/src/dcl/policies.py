"""Tabular joint policies over individual action-observation histories.

A joint policy is a product of per-agent maps from that agent's own
(action, observation) history to a distribution over its actions. Stored
entries override a default rule, so deterministic benchmark policies and
uniform/random policies never need the full history tree materialized.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .model import DecPomdpModel, JointAction

# individual history: ((a_i, o_i), (a_i, o_i), ...)
IndividualHistory = tuple[tuple[int, int], ...]
# joint history: ((joint_action, joint_obs), ...)
JointHistory = tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]

DIST_TOL = 1e-12


class DegenerateScoreError(ValueError):
    """Raised when a direct-parameterization score is requested at pi = 0."""


def project(h: JointHistory, agent: int) -> IndividualHistory:
    """Agent `agent`'s own view of a joint history."""
    return tuple((a[agent], o[agent]) for a, o in h)


@dataclass
class TabularJointPolicy:
    """Per-agent history-conditioned action distributions.

    parameterization:
      direct  -- stored vectors are the probabilities themselves; the score of
                 an action is the one-hot indicator divided by its probability.
      softmax -- stored vectors are logits; probabilities are their softmax and
                 the score is (one-hot - pi) on the history's block.

    `defaults[i]` supplies the stored vector for histories absent from
    `tables[i]` (uniform probabilities / zero logits when None).
    """

    action_sizes: tuple[int, ...]
    parameterization: str = "direct"
    tables: list[dict[IndividualHistory, np.ndarray]] = field(default_factory=list)
    defaults: list[Callable[[IndividualHistory], np.ndarray] | None] = field(default_factory=list)
    name: str = "policy"

    def __post_init__(self) -> None:
        if self.parameterization not in ("direct", "softmax"):
            raise ValueError(f"unknown parameterization {self.parameterization!r}")
        if not self.tables:
            self.tables = [dict() for _ in self.action_sizes]
        if not self.defaults:
            self.defaults = [None for _ in self.action_sizes]
        if self.parameterization == "direct":
            self._fallback = [np.full(n, 1.0 / n) for n in self.action_sizes]
        else:
            self._fallback = [np.zeros(n) for n in self.action_sizes]

    @property
    def num_agents(self) -> int:
        return len(self.action_sizes)

    def raw(self, agent: int, hist: IndividualHistory) -> np.ndarray:
        """Stored vector (probabilities or logits) for one history.

        The returned array may be shared; callers must not mutate it.
        """
        table = self.tables[agent]
        if hist in table:
            return table[hist]
        default = self.defaults[agent]
        if default is not None:
            return default(hist)
        return self._fallback[agent]

    def probs(self, agent: int, hist: IndividualHistory) -> np.ndarray:
        vec = self.raw(agent, hist)
        if self.parameterization == "direct":
            return vec
        z = vec - vec.max()
        e = np.exp(z)
        return e / e.sum()

    def prob(self, agent: int, hist: IndividualHistory, action: int) -> float:
        return float(self.probs(agent, hist)[action])

    def joint_probs(self, h: JointHistory) -> list[np.ndarray]:
        return [self.probs(i, project(h, i)) for i in range(self.num_agents)]

    def joint_action_prob(self, h: JointHistory, a: JointAction) -> float:
        p = 1.0
        for i in range(self.num_agents):
            p *= self.prob(i, project(h, i), a[i])
        return p

    def score(self, agent: int, hist: IndividualHistory, action: int) -> np.ndarray:
        """grad_theta log pi_i(action; hist) on the history's action block."""
        pi = self.probs(agent, hist)
        if self.parameterization == "direct":
            if pi[action] <= 0.0:
                raise DegenerateScoreError(
                    f"agent {agent}: pi({action}; {hist}) = 0 under direct parameterization"
                )
            vec = np.zeros_like(pi)
            vec[action] = 1.0 / pi[action]
            return vec
        vec = -pi.copy()
        vec[action] += 1.0
        return vec

    def set(self, agent: int, hist: IndividualHistory, vec: np.ndarray) -> None:
        vec = np.asarray(vec, dtype=float)
        if self.parameterization == "direct" and abs(vec.sum() - 1.0) > 1e-9:
            raise ValueError(f"distribution sums to {vec.sum():.17g}")
        self.tables[agent][hist] = vec

    def validate_tables(self) -> None:
        if self.parameterization != "direct":
            return
        for agent, table in enumerate(self.tables):
            for hist, vec in table.items():
                if abs(float(vec.sum()) - 1.0) > DIST_TOL and abs(float(vec.sum()) - 1.0) > 1e-9:
                    raise ValueError(f"agent {agent} history {hist}: distribution sums to {vec.sum():.17g}")


# -- builtin policies ------------------------------------------------------


def uniform_policy(model: DecPomdpModel) -> TabularJointPolicy:
    return TabularJointPolicy(action_sizes=model.action_sizes, name="uniform")


def _deterministic(n: int, a: int) -> np.ndarray:
    v = np.zeros(n)
    v[a] = 1.0
    return v


class _DectigerListenOpen:
    """Listen at every non-final step; at the final step open the door away
    from the majority observation, ties broken by the first observation."""

    def __init__(self, horizon: int, always_listen: bool = False):
        self.horizon = horizon
        self.always_listen = always_listen

    def __call__(self, hist: IndividualHistory) -> np.ndarray:
        LISTEN, OPEN_L, OPEN_R = 0, 1, 2
        t = len(hist)
        if self.always_listen or t < self.horizon - 1:
            return _deterministic(3, LISTEN)
        obs = [o for _, o in hist]
        if not obs:
            return _deterministic(3, LISTEN)
        n_left = sum(1 for o in obs if o == 0)
        n_right = len(obs) - n_left
        if n_left > n_right:
            side = 0
        elif n_right > n_left:
            side = 1
        else:
            side = obs[0]
        return _deterministic(3, OPEN_R if side == 0 else OPEN_L)


def dectiger_listen_open(model: DecPomdpModel) -> TabularJointPolicy:
    rule = _DectigerListenOpen(model.horizon)
    return TabularJointPolicy(
        action_sizes=model.action_sizes,
        parameterization="direct",
        defaults=[rule, rule],
        name="dectiger-listen-open",
    )


def dectiger_listen_always(model: DecPomdpModel) -> TabularJointPolicy:
    rule = _DectigerListenOpen(model.horizon, always_listen=True)
    return TabularJointPolicy(
        action_sizes=model.action_sizes,
        parameterization="direct",
        defaults=[rule, rule],
        name="dectiger-listen-always",
    )


class _SeededRandomRule:
    """Deterministic pseudo-random distribution per history.

    reactive=True keys the draw on the last observation only, which makes the
    policy reactive in the usual sense.
    """

    def __init__(self, agent: int, n_actions: int, seed: int, reactive: bool):
        self.agent = agent
        self.n_actions = n_actions
        self.seed = seed
        self.reactive = reactive
        self._cache: dict[object, np.ndarray] = {}

    def _key(self, hist: IndividualHistory) -> object:
        if self.reactive:
            return hist[-1][1] if hist else -1
        return hist

    def __call__(self, hist: IndividualHistory) -> np.ndarray:
        key = self._key(hist)
        if key not in self._cache:
            # tuple-of-int hashing is deterministic, so the draw is reproducible
            rng = np.random.default_rng([self.seed, self.agent, abs(hash(key)) % (2**32)])
            raw = rng.random(self.n_actions) + 0.05  # keep full support
            self._cache[key] = raw / raw.sum()
        return self._cache[key]


def random_policy(model: DecPomdpModel, seed: int, reactive: bool = False) -> TabularJointPolicy:
    defaults = [
        _SeededRandomRule(i, model.action_sizes[i], seed, reactive)
        for i in range(model.num_agents)
    ]
    kind = "reactive" if reactive else "history"
    return TabularJointPolicy(
        action_sizes=model.action_sizes,
        parameterization="direct",
        defaults=defaults,
        name=f"random-{kind}-{seed}",
    )


BUILTIN_POLICIES = ("uniform", "dectiger-listen-open", "dectiger-listen-always")


def builtin_policy(name: str, model: DecPomdpModel) -> TabularJointPolicy:
    if name == "uniform":
        return uniform_policy(model)
    if name == "dectiger-listen-open":
        return dectiger_listen_open(model)
    if name == "dectiger-listen-always":
        return dectiger_listen_always(model)
    raise KeyError(f"unknown builtin policy {name!r}; valid names: {', '.join(BUILTIN_POLICIES)}")
