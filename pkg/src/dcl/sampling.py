"""Trajectory simulation and single-sample Monte-Carlo gradient estimators.

The estimators draw (h, s) ~ rho and a ~ pi(h) by rolling out one
full-horizon trajectory and picking a timestep with probability
proportional to gamma^t (uniform when gamma = 1). Rollouts used for
sampling never stop early: the absorbing terminal state self-loops inside
the model, so every trajectory has exactly `horizon` steps and the induced
timestep mixture reproduces the visitation distribution exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import DecPomdpModel, JointAction, JointObservation
from .policies import JointHistory, TabularJointPolicy, project
from .exact import ValueTables, ParameterIndex, _Dynamics, parameter_index, values, _weight

RNG_ALGORITHM = "numpy default_rng (PCG64 / SeedSequence)"

_STRIDE_CACHE: dict[int, tuple[int, ...]] = {}


def _action_strides(model: DecPomdpModel) -> tuple[int, ...]:
    """Strides mapping per-agent action indices to the flat joint index."""
    key = id(model)
    if key not in _STRIDE_CACHE:
        sizes = model.action_sizes
        strides = []
        acc = 1
        for n in reversed(sizes):
            strides.append(acc)
            acc *= n
        _STRIDE_CACHE[key] = tuple(reversed(strides))
    return _STRIDE_CACHE[key]


@dataclass
class TrajectoryStep:
    state: int
    action: JointAction
    reward: float
    observation: JointObservation
    next_state: int


@dataclass
class Trajectory:
    seed: int | None
    steps: list[TrajectoryStep]
    terminal: bool

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def total_return(self) -> float:
        return sum(s.reward for s in self.steps)

    def discounted_return(self, gamma: float) -> float:
        return sum((gamma**t) * s.reward for t, s in enumerate(self.steps))

    def joint_history(self, t: int) -> JointHistory:
        return tuple((s.action, s.observation) for s in self.steps[:t])


def _draw(rng: np.random.Generator, probs) -> int:
    """Categorical draw consuming exactly one uniform variate."""
    r = rng.random()
    if not isinstance(probs, list):
        probs = probs.tolist()
    acc = 0.0
    for i, p in enumerate(probs):
        acc += p
        if r < acc:
            return i
    return len(probs) - 1


def _draw_support(rng: np.random.Generator, entries, prob_at: int) -> tuple:
    """Draw one entry from a support list whose prob sits at index prob_at."""
    r = rng.random()
    acc = 0.0
    for entry in entries:
        acc += entry[prob_at]
        if r < acc:
            return entry
    return entries[-1]


def rollout(
    model: DecPomdpModel,
    policy: TabularJointPolicy,
    seed: int | np.random.Generator,
    stop_at_terminal: bool = True,
) -> Trajectory:
    """Simulate one episode; reproducible given the seed."""
    if isinstance(seed, np.random.Generator):
        rng, seed_record = seed, None
    else:
        rng, seed_record = np.random.default_rng(seed), seed
    dyn = _Dynamics.of(model)
    terminal = model.terminal_states
    strides = _action_strides(model)
    n_agents = model.num_agents

    s = _draw(rng, model.initial_dist)
    steps: list[TrajectoryStep] = []
    hists = [() for _ in range(n_agents)]
    hit_terminal = False
    for _t in range(model.horizon):
        if stop_at_terminal and s in terminal:
            hit_terminal = True
            break
        a = tuple(_draw(rng, policy.probs(i, hists[i])) for i in range(n_agents))
        ai = 0
        for i in range(n_agents):
            ai += a[i] * strides[i]
        s2, _pt, r = _draw_support(rng, dyn.tsup[s][ai], 1)
        o, _po = _draw_support(rng, dyn.osup[ai][s2], 1)
        steps.append(TrajectoryStep(s, a, r, o, s2))
        for i in range(n_agents):
            hists[i] = hists[i] + ((a[i], o[i]),)
        s = s2
    if s in terminal:
        hit_terminal = True
    return Trajectory(seed=seed_record, steps=steps, terminal=hit_terminal)


def sample_point(
    model: DecPomdpModel,
    policy: TabularJointPolicy,
    seed: int | np.random.Generator,
) -> tuple[JointHistory, int, JointAction]:
    """One (joint history, state, joint action) draw from rho(h,s) * pi(a|h)."""
    if isinstance(seed, np.random.Generator):
        rng = seed
    else:
        rng = np.random.default_rng(seed)
    traj = rollout(model, policy, rng, stop_at_terminal=False)
    gamma = model.discount
    if gamma == 1.0:
        t = int(rng.integers(len(traj)))
    else:
        w = gamma ** np.arange(len(traj))
        t = _draw(rng, w / w.sum())
    step = traj.steps[t]
    return traj.joint_history(t), step.state, step.action


@dataclass
class McEstimate:
    kind: str
    return_kind: str
    point: tuple[JointHistory, int, JointAction]
    vector: np.ndarray
    weight: float


def mc_gradient(
    model: DecPomdpModel,
    policy: TabularJointPolicy,
    kind: str,
    point: tuple[JointHistory, int, JointAction],
    tables: ValueTables,
    index: ParameterIndex,
    return_kind: str = "episode",
) -> McEstimate:
    """Single-sample estimator: oracle critic weight times the score vector."""
    h, s, a = point
    t = len(h)
    ts = tables.table_set(return_kind)
    ai = model.joint_action_index(a)
    w = _weight(ts, kind, h, s, t, ai)
    vec = np.zeros(index.size)
    for i, a_i in enumerate(a):
        hi = project(h, i)
        base = index.offsets[(i, hi)]
        vec[base : base + model.action_sizes[i]] = w * policy.score(i, hi, a_i)
    return McEstimate(kind=kind, return_kind=return_kind, point=point, vector=vec, weight=w)


@dataclass
class EmpiricalMoments:
    kind: str
    return_kind: str
    n: int
    seed: int
    workers: int
    mean: np.ndarray
    total_variance: float | None
    metadata: dict

    def stderr_mean(self) -> np.ndarray:
        """Componentwise standard error of the mean (needs second moments)."""
        return self.metadata["component_stderr"]


def empirical_moments(
    model: DecPomdpModel,
    policy: TabularJointPolicy,
    kind: str,
    n: int,
    seed: int,
    return_kind: str = "episode",
    tables: ValueTables | None = None,
    index: ParameterIndex | None = None,
    workers: int = 1,
) -> EmpiricalMoments:
    """Sample mean and unbiased trace sample variance over n estimator draws.

    Samples are split into `workers` deterministic chunks with spawned child
    seeds; the result depends only on (seed, n, workers).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if tables is None:
        tables = values(model, policy)
    if index is None:
        index = parameter_index(model, tables.visitation)

    chunk_sizes = [n // workers + (1 if w < n % workers else 0) for w in range(workers)]
    child_seeds = np.random.SeedSequence(seed).spawn(workers)

    total = np.zeros(index.size)
    total_sq = np.zeros(index.size)
    norm_sq = 0.0
    for size, child in zip(chunk_sizes, child_seeds):
        rng = np.random.default_rng(child)
        for _ in range(size):
            point = sample_point(model, policy, rng)
            est = mc_gradient(model, policy, kind, point, tables, index, return_kind)
            total += est.vector
            total_sq += est.vector * est.vector
            norm_sq += float(est.vector @ est.vector)

    mean = total / n
    if n >= 2:
        variance = (norm_sq - n * float(mean @ mean)) / (n - 1)
        comp_var = np.maximum(total_sq / n - mean * mean, 0.0) * (n / (n - 1))
        stderr = np.sqrt(comp_var / n)
    else:
        variance = None
        stderr = np.full(index.size, np.nan)

    return EmpiricalMoments(
        kind=kind,
        return_kind=return_kind,
        n=n,
        seed=seed,
        workers=workers,
        mean=mean,
        total_variance=variance,
        metadata={
            "rng": RNG_ALGORITHM,
            "workers": workers,
            "component_stderr": stderr,
        },
    )
