"""Tabular advantage actor-critic with swappable centralized critics.

The critic is a plain value table keyed on the state (S), the truncated
joint history (H), or the (truncated joint history, state) pair (HS), and
is trained with TD(0). Actors are per-agent softmax tables over truncated
individual histories. Updates run on-policy after every environment step:
one TD error drives first the critic update and then the actor update.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .model import DecPomdpModel
from .policies import IndividualHistory, TabularJointPolicy
from . import exact
from .exact import _Dynamics
from .sampling import _action_strides, _draw, _draw_support

CRITIC_KIND_NAMES = {"state": "S", "history": "H", "history-state": "HS"}


class DivergenceError(RuntimeError):
    def __init__(self, episode: int, where: str):
        super().__init__(f"non-finite parameter in {where} at episode {episode}")
        self.episode = episode
        self.where = where


@dataclass
class CriticTable:
    """TD(0)-trained value table; unseen keys read as 0."""

    kind: str  # S | H | HS
    truncation: int
    learning_rate: float
    values: dict = field(default_factory=dict)

    def key(self, joint_history, state: int):
        if self.kind == "S":
            return state
        trunc = joint_history[-self.truncation :] if self.truncation > 0 else ()
        if self.kind == "H":
            return trunc
        if self.kind == "HS":
            return (trunc, state)
        raise ValueError(f"unknown critic kind {self.kind!r}")

    def value(self, key) -> float:
        return self.values.get(key, 0.0)


@dataclass
class Transition:
    """One environment step as seen by the centralized critic."""

    joint_history: tuple
    state: int
    action: tuple
    reward: float
    next_joint_history: tuple
    next_state: int
    done: bool


def advantage(critic: CriticTable, tr: Transition, discount: float) -> float:
    v = critic.value(critic.key(tr.joint_history, tr.state))
    v2 = 0.0 if tr.done else critic.value(critic.key(tr.next_joint_history, tr.next_state))
    return tr.reward + discount * v2 - v


def critic_update(critic: CriticTable, tr: Transition, discount: float) -> CriticTable:
    delta = advantage(critic, tr, discount)
    key = critic.key(tr.joint_history, tr.state)
    critic.values[key] = critic.value(key) + critic.learning_rate * delta
    return critic


@dataclass
class ActorParams:
    """Per-agent softmax logits over truncated individual histories.

    Logits are plain float lists: action sets are tiny and the training loop
    is python-level, so list arithmetic beats numpy dispatch here.
    """

    action_sizes: tuple[int, ...]
    truncation: int
    learning_rate: float
    entropy_coef: float
    logits: list[dict[IndividualHistory, list[float]]] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.logits:
            self.logits = [dict() for _ in self.action_sizes]
        self._uniform = [[1.0 / n] * n for n in self.action_sizes]

    def key(self, agent: int, hist: IndividualHistory) -> IndividualHistory:
        return hist[-self.truncation :] if self.truncation > 0 else ()

    def probs(self, agent: int, hist: IndividualHistory) -> list[float]:
        theta = self.logits[agent].get(self.key(agent, hist))
        if theta is None:
            return self._uniform[agent]
        m = max(theta)
        e = [math.exp(x - m) for x in theta]
        z = sum(e)
        return [x / z for x in e]

    def policy(self) -> TabularJointPolicy:
        """Freeze into a softmax TabularJointPolicy (zero logits when unseen)."""
        actor = self

        class _Rule:
            def __init__(self, agent: int):
                self.agent = agent

            def __call__(self, hist: IndividualHistory) -> np.ndarray:
                theta = actor.logits[self.agent].get(actor.key(self.agent, hist))
                if theta is None:
                    return np.zeros(actor.action_sizes[self.agent])
                return np.asarray(theta, dtype=float)

        return TabularJointPolicy(
            action_sizes=self.action_sizes,
            parameterization="softmax",
            defaults=[_Rule(i) for i in range(len(self.action_sizes))],
            name="trained-actor",
        )


def actor_update(
    actor: ActorParams,
    agent: int,
    hist: IndividualHistory,
    action: int,
    adv: float,
    lr: float | None = None,
) -> ActorParams:
    """theta += lr * adv * grad log pi + lr * entropy_coef * grad entropy."""
    lr = actor.learning_rate if lr is None else lr
    key = actor.key(agent, hist)
    table = actor.logits[agent]
    theta = table.get(key)
    if theta is None:
        theta = [0.0] * actor.action_sizes[agent]
        table[key] = theta
    pi = actor.probs(agent, hist)
    coef = lr * adv
    beta = lr * actor.entropy_coef
    if beta != 0.0:
        logp = [math.log(p) if p > 0.0 else -700.0 for p in pi]
        entropy = -sum(p * lp for p, lp in zip(pi, logp))
        for j in range(len(theta)):
            theta[j] += coef * ((1.0 if j == action else 0.0) - pi[j]) - beta * pi[j] * (logp[j] + entropy)
    else:
        for j in range(len(theta)):
            theta[j] += coef * ((1.0 if j == action else 0.0) - pi[j])
    return actor


@dataclass
class TrainConfig:
    critic: str = "history"  # state | history | history-state
    episodes: int = 20000
    actor_lr: float = 0.05
    critic_lr: float = 0.2
    discount: float | None = None  # None: use the model's
    truncation: int | None = None  # None: the horizon
    entropy_coef: float = 0.01
    eval_interval: int = 1000
    eval_episodes: int = 500
    seed: int = 0

    def critic_kind(self) -> str:
        if self.critic in CRITIC_KIND_NAMES:
            return CRITIC_KIND_NAMES[self.critic]
        if self.critic in CRITIC_KIND_NAMES.values():
            return self.critic
        raise ValueError(f"unknown critic {self.critic!r}; use state, history or history-state")


@dataclass
class LearningCurve:
    rows: list[tuple[int, float, float, float]] = field(default_factory=list)  # episode, mean, std, seconds

    def add(self, episode: int, mean: float, std: float, seconds: float) -> None:
        if self.rows and episode <= self.rows[-1][0]:
            raise ValueError("episode indices must be strictly increasing")
        self.rows.append((episode, mean, std, seconds))

    @property
    def final_mean(self) -> float:
        return self.rows[-1][1]


@dataclass
class TrainResult:
    actor: ActorParams
    critic: CriticTable
    curve: LearningCurve
    config: TrainConfig


def _episode(model, rng, act) -> tuple[list[Transition], float]:
    """Roll one on-policy episode, yielding critic transitions and the return."""
    dyn = _Dynamics.of(model)
    strides = _action_strides(model)
    terminal = model.terminal_states
    n_agents = model.num_agents
    s = _draw(rng, model.initial_dist)
    hists: list[IndividualHistory] = [() for _ in range(n_agents)]
    joint_history: tuple = ()
    transitions = []
    ret = 0.0
    disc = 1.0
    gamma = model.discount
    for t in range(model.horizon):
        if s in terminal:
            break
        a = tuple(act(i, hists[i], rng) for i in range(n_agents))
        ai = 0
        for i in range(n_agents):
            ai += a[i] * strides[i]
        s2, _pt, r = _draw_support(rng, dyn.tsup[s][ai], 1)
        o, _po = _draw_support(rng, dyn.osup[ai][s2], 1)
        nxt = joint_history + ((a, o),)
        done = (t == model.horizon - 1) or (s2 in terminal)
        transitions.append(Transition(joint_history, s, a, r, nxt, s2, done))
        ret += disc * r
        disc *= gamma
        joint_history = nxt
        for i in range(n_agents):
            hists[i] = hists[i] + ((a[i], o[i]),)
        s = s2
    return transitions, ret


def train(model: DecPomdpModel, config: TrainConfig) -> TrainResult:
    """On-policy advantage actor-critic; fully deterministic per seed."""
    kind = config.critic_kind()
    gamma = model.discount if config.discount is None else config.discount
    truncation = model.horizon if config.truncation is None else config.truncation
    critic = CriticTable(kind=kind, truncation=truncation, learning_rate=config.critic_lr)
    actor = ActorParams(
        action_sizes=model.action_sizes,
        truncation=truncation,
        learning_rate=config.actor_lr,
        entropy_coef=config.entropy_coef,
    )
    rng = np.random.default_rng([config.seed, 0])
    curve = LearningCurve()
    start = time.perf_counter()

    def act(agent: int, hist: IndividualHistory, gen: np.random.Generator) -> int:
        return _draw(gen, actor.probs(agent, hist))

    for ep in range(1, config.episodes + 1):
        transitions, _ret = _episode(model, rng, act)
        for tr in transitions:
            adv = advantage(critic, tr, gamma)
            if not math.isfinite(adv):
                raise DivergenceError(ep, "critic")
            critic_update(critic, tr, gamma)
            for i, a_i in enumerate(tr.action):
                hist_i = tuple((aj[i], oj[i]) for aj, oj in tr.joint_history)
                actor_update(actor, i, hist_i, a_i, adv)
        if ep % config.eval_interval == 0 or ep == config.episodes:
            for table in actor.logits:
                for theta in table.values():
                    if not np.all(np.isfinite(theta)):
                        raise DivergenceError(ep, "actor")
            mean, std = evaluate_policy(model, actor, config.eval_episodes, seed=[config.seed, 1, ep])
            curve.add(ep, mean, std, time.perf_counter() - start)
    return TrainResult(actor=actor, critic=critic, curve=curve, config=config)


def evaluate_policy(
    model: DecPomdpModel,
    actor_or_policy,
    episodes: int,
    seed,
) -> tuple[float, float]:
    """Monte-Carlo estimate of J under the (stochastic) policy."""
    probs = actor_or_policy.probs  # ActorParams and TabularJointPolicy share the signature
    rng = np.random.default_rng(seed)

    def act(agent: int, hist: IndividualHistory, gen: np.random.Generator) -> int:
        return _draw(gen, probs(agent, hist))

    returns = np.empty(episodes)
    for k in range(episodes):
        _transitions, ret = _episode(model, rng, act)
        returns[k] = ret
    return float(returns.mean()), float(returns.std())


def evaluate_policy_exact(model: DecPomdpModel, actor_or_policy) -> float:
    """Exact J for small models (the --exact evaluation variant)."""
    if isinstance(actor_or_policy, ActorParams):
        policy = actor_or_policy.policy()
    else:
        policy = actor_or_policy
    return exact.policy_value(model, policy)
