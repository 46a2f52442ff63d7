"""Tabular Dec-POMDP data model, validation, and built-in benchmark domains.

A model is a fully enumerated finite Dec-POMDP: labelled states, per-agent
action and observation sets, dense transition / observation / reward tables
indexed by (state, flat joint action [, successor state]), an initial state
distribution, a discount factor and a finite horizon.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

PROB_TOL = 1e-12

JointAction = tuple[int, ...]
JointObservation = tuple[int, ...]


@dataclass(frozen=True)
class Violation:
    """One validation failure, with enough location info to fix the model."""

    location: str
    message: str

    def __str__(self) -> str:
        return f"{self.location}: {self.message}"


@dataclass(frozen=True)
class DecPomdpModel:
    """Immutable tabular Dec-POMDP.

    transition[s, a, s'] = P(s' | s, a)
    observation_fn[a, s', z] = P(joint obs z | a, s')
    reward[s, a, s'] = shared reward, with a the flat joint-action index.
    """

    name: str
    num_agents: int
    states: tuple[str, ...]
    actions: tuple[tuple[str, ...], ...]
    observations: tuple[tuple[str, ...], ...]
    initial_dist: np.ndarray
    transition: np.ndarray
    observation_fn: np.ndarray
    reward: np.ndarray
    discount: float
    horizon: int

    # -- index helpers -----------------------------------------------------

    @property
    def num_states(self) -> int:
        return len(self.states)

    @cached_property
    def action_sizes(self) -> tuple[int, ...]:
        return tuple(len(a) for a in self.actions)

    @cached_property
    def observation_sizes(self) -> tuple[int, ...]:
        return tuple(len(o) for o in self.observations)

    @cached_property
    def num_joint_actions(self) -> int:
        return int(np.prod(self.action_sizes))

    @cached_property
    def num_joint_observations(self) -> int:
        return int(np.prod(self.observation_sizes))

    @cached_property
    def joint_actions(self) -> tuple[JointAction, ...]:
        return tuple(itertools.product(*[range(n) for n in self.action_sizes]))

    @cached_property
    def joint_observations(self) -> tuple[JointObservation, ...]:
        return tuple(itertools.product(*[range(n) for n in self.observation_sizes]))

    @cached_property
    def _action_index(self) -> dict[JointAction, int]:
        return {a: i for i, a in enumerate(self.joint_actions)}

    @cached_property
    def _obs_index(self) -> dict[JointObservation, int]:
        return {o: i for i, o in enumerate(self.joint_observations)}

    def joint_action_index(self, a: JointAction) -> int:
        return self._action_index[tuple(a)]

    def joint_obs_index(self, o: JointObservation) -> int:
        return self._obs_index[tuple(o)]

    def action_label(self, agent: int, a: int) -> str:
        return self.actions[agent][a]

    def joint_action_label(self, a: JointAction) -> str:
        return ",".join(self.actions[i][ai] for i, ai in enumerate(a))

    @cached_property
    def terminal_states(self) -> frozenset[int]:
        """States that self-loop under every action with zero reward.

        These model "episode over"; they are excluded from value/bias reports.
        """
        out = set()
        for s in range(self.num_states):
            absorbing = all(
                self.transition[s, a, s] == 1.0 and self.reward[s, a, s] == 0.0
                for a in range(self.num_joint_actions)
            )
            if absorbing:
                out.add(s)
        return frozenset(out)

    def state_index(self, label: str) -> int:
        return self.states.index(label)

    def with_horizon(self, horizon: int) -> "DecPomdpModel":
        return DecPomdpModel(
            name=self.name,
            num_agents=self.num_agents,
            states=self.states,
            actions=self.actions,
            observations=self.observations,
            initial_dist=self.initial_dist,
            transition=self.transition,
            observation_fn=self.observation_fn,
            reward=self.reward,
            discount=self.discount,
            horizon=horizon,
        )

    def equal_to(self, other: "DecPomdpModel", prob_tol: float = 0.0) -> bool:
        """Structural equality: labels exactly, probabilities within prob_tol."""
        if (
            self.num_agents != other.num_agents
            or self.states != other.states
            or self.actions != other.actions
            or self.observations != other.observations
            or self.horizon != other.horizon
            or self.discount != other.discount
        ):
            return False
        for mine, theirs in (
            (self.initial_dist, other.initial_dist),
            (self.transition, other.transition),
            (self.observation_fn, other.observation_fn),
            (self.reward, other.reward),
        ):
            if mine.shape != theirs.shape:
                return False
            if not np.allclose(mine, theirs, rtol=0.0, atol=prob_tol):
                return False
        return True


def validate(model: DecPomdpModel) -> list[Violation]:
    """Check every model invariant; an empty list means the model is valid."""
    issues: list[Violation] = []
    if model.num_agents < 1:
        issues.append(Violation("agents", "num_agents must be >= 1"))
    if model.horizon < 1:
        issues.append(Violation("horizon", "horizon must be >= 1"))
    if not (0.0 <= model.discount <= 1.0):
        issues.append(Violation("discount", f"discount {model.discount} outside [0, 1]"))
    if len(model.actions) != model.num_agents:
        issues.append(Violation("actions", "need one action set per agent"))
    if len(model.observations) != model.num_agents:
        issues.append(Violation("observations", "need one observation set per agent"))

    n_s = model.num_states
    n_a = model.num_joint_actions
    n_z = model.num_joint_observations

    if model.initial_dist.shape != (n_s,):
        issues.append(Violation("start", f"initial_dist has shape {model.initial_dist.shape}, expected ({n_s},)"))
    elif abs(float(model.initial_dist.sum()) - 1.0) > PROB_TOL:
        issues.append(Violation("start", f"initial distribution sums to {float(model.initial_dist.sum())!r}"))
    if np.any(model.initial_dist < 0):
        issues.append(Violation("start", "initial distribution has negative entries"))

    if model.transition.shape != (n_s, n_a, n_s):
        issues.append(Violation("T", f"transition has shape {model.transition.shape}, expected {(n_s, n_a, n_s)}"))
    else:
        if np.any(model.transition < 0):
            issues.append(Violation("T", "transition has negative entries"))
        sums = model.transition.sum(axis=2)
        for s, a in zip(*np.nonzero(np.abs(sums - 1.0) > PROB_TOL)):
            issues.append(
                Violation(
                    f"T[{model.states[s]}, {model.joint_action_label(model.joint_actions[a])}]",
                    f"row sums to {float(sums[s, a])!r}",
                )
            )

    if model.observation_fn.shape != (n_a, n_s, n_z):
        issues.append(
            Violation("O", f"observation_fn has shape {model.observation_fn.shape}, expected {(n_a, n_s, n_z)}")
        )
    else:
        if np.any(model.observation_fn < 0):
            issues.append(Violation("O", "observation_fn has negative entries"))
        sums = model.observation_fn.sum(axis=2)
        for a, s2 in zip(*np.nonzero(np.abs(sums - 1.0) > PROB_TOL)):
            issues.append(
                Violation(
                    f"O[{model.joint_action_label(model.joint_actions[a])}, {model.states[s2]}]",
                    f"row sums to {float(sums[a, s2])!r}",
                )
            )

    if model.reward.shape != (n_s, n_a, n_s):
        issues.append(Violation("R", f"reward has shape {model.reward.shape}, expected {(n_s, n_a, n_s)}"))
    elif not np.all(np.isfinite(model.reward)):
        issues.append(Violation("R", "reward has non-finite entries"))

    return issues


BUILTIN_NAMES = ("dectiger", "beverage", "meetgrid3")


def builtin(name: str, horizon: int | None = None) -> DecPomdpModel:
    """Construct a built-in benchmark model, optionally overriding its horizon."""
    if name == "dectiger":
        model = _dectiger()
    elif name == "beverage":
        model = _beverage()
    elif name == "meetgrid3":
        model = _meetgrid3()
    else:
        raise KeyError(f"unknown builtin model {name!r}; valid names: {', '.join(BUILTIN_NAMES)}")
    if horizon is not None:
        model = model.with_horizon(horizon)
    return model


def _dectiger() -> DecPomdpModel:
    states = ("tiger-left", "tiger-right", "done")
    acts = ("listen", "open-left", "open-right")
    obs = ("hear-left", "hear-right")
    n_s, n_agents = 3, 2
    actions = (acts, acts)
    observations = (obs, obs)
    joint_actions = list(itertools.product(range(3), repeat=2))
    joint_obs = list(itertools.product(range(2), repeat=2))
    n_a, n_z = len(joint_actions), len(joint_obs)

    LISTEN, OPEN_L, OPEN_R = 0, 1, 2
    L, R, DONE = 0, 1, 2
    HEAR = {L: 0, R: 1}  # index of the correct observation per tiger state
    ACC = 0.85

    T = np.zeros((n_s, n_a, n_s))
    O = np.zeros((n_a, n_s, n_z))
    Rw = np.zeros((n_s, n_a, n_s))

    for ai, a in enumerate(joint_actions):
        all_listen = a == (LISTEN, LISTEN)
        for s in (L, R):
            s2 = s if all_listen else DONE
            T[s, ai, s2] = 1.0
            Rw[s, ai, s2] = _dectiger_reward(s, a)
        T[DONE, ai, DONE] = 1.0
        # observations given the successor state
        for s2 in (L, R):
            for zi, z in enumerate(joint_obs):
                p = 1.0
                for o in z:
                    p *= ACC if o == HEAR[s2] else 1.0 - ACC
                O[ai, s2, zi] = p
        O[ai, DONE, 0] = 1.0  # deterministic dummy observation (hear-left, hear-left)

    return DecPomdpModel(
        name="dectiger",
        num_agents=n_agents,
        states=states,
        actions=actions,
        observations=observations,
        initial_dist=np.array([0.5, 0.5, 0.0]),
        transition=T,
        observation_fn=O,
        reward=Rw,
        discount=1.0,
        horizon=3,
    )


def _dectiger_reward(s: int, a: tuple[int, int]) -> float:
    LISTEN, OPEN_L, OPEN_R = 0, 1, 2
    tiger_door = OPEN_L if s == 0 else OPEN_R
    opens = [x for x in a if x != LISTEN]
    if not opens:
        return -2.0
    if len(opens) == 1:
        return -101.0 if opens[0] == tiger_door else 9.0
    if a[0] != a[1]:
        return -100.0
    return -50.0 if a[0] == tiger_door else 20.0


def _beverage() -> DecPomdpModel:
    states = ("coffee", "tea")
    actions = (("serve-coffee", "serve-tea"),)
    observations = (("none",),)
    T = np.zeros((2, 2, 2))
    O = np.ones((2, 2, 1))
    Rw = np.zeros((2, 2, 2))
    for s in range(2):
        for a in range(2):
            T[s, a, s] = 1.0
            Rw[s, a, s] = 1.0 if s == a else -1.0
    return DecPomdpModel(
        name="beverage",
        num_agents=1,
        states=states,
        actions=actions,
        observations=observations,
        initial_dist=np.array([0.5, 0.5]),
        transition=T,
        observation_fn=O,
        reward=Rw,
        discount=1.0,
        horizon=1,
    )


MEETGRID_SIZE = 3
MEETGRID_MOVES = ("up", "down", "left", "right", "stay")
_MOVE_DELTAS = {"up": (0, 1), "down": (0, -1), "left": (-1, 0), "right": (1, 0), "stay": (0, 0)}


def _meetgrid3() -> DecPomdpModel:
    n = MEETGRID_SIZE
    cells = [(x, y) for y in range(n) for x in range(n)]
    cell_index = {c: i for i, c in enumerate(cells)}
    cell_labels = tuple(f"c{x}{y}" for (x, y) in cells)
    n_cells = len(cells)

    states = tuple(f"{cell_labels[i]}+{cell_labels[j]}" for i in range(n_cells) for j in range(n_cells))
    sid = lambda i, j: i * n_cells + j
    n_s = len(states)

    actions = (MEETGRID_MOVES, MEETGRID_MOVES)
    observations = (cell_labels, cell_labels)
    joint_actions = list(itertools.product(range(5), repeat=2))
    n_a = len(joint_actions)
    n_z = n_cells * n_cells

    def move(ci: int, m: int) -> int:
        x, y = cells[ci]
        dx, dy = _MOVE_DELTAS[MEETGRID_MOVES[m]]
        x2, y2 = x + dx, y + dy
        if 0 <= x2 < n and 0 <= y2 < n:
            return cell_index[(x2, y2)]
        return ci  # bump into the wall

    T = np.zeros((n_s, n_a, n_s))
    O = np.zeros((n_a, n_s, n_z))
    Rw = np.zeros((n_s, n_a, n_s))
    for i in range(n_cells):
        for j in range(n_cells):
            s = sid(i, j)
            for ai, (m1, m2) in enumerate(joint_actions):
                i2, j2 = move(i, m1), move(j, m2)
                s2 = sid(i2, j2)
                T[s, ai, s2] = 1.0
                Rw[s, ai, s2] = 1.0 if i2 == j2 else 0.0
    for ai in range(n_a):
        for i in range(n_cells):
            for j in range(n_cells):
                O[ai, sid(i, j), i * n_cells + j] = 1.0  # each agent sees its own cell

    start = np.zeros(n_s)
    start[sid(cell_index[(0, 0)], cell_index[(n - 1, n - 1)])] = 1.0

    return DecPomdpModel(
        name="meetgrid3",
        num_agents=2,
        states=states,
        actions=actions,
        observations=observations,
        initial_dist=start,
        transition=T,
        observation_fn=O,
        reward=Rw,
        discount=1.0,
        horizon=8,
    )
