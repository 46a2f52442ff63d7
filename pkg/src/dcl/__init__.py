"""Exact evaluation, estimator diagnostics and tabular actor-critic training
for finite-horizon Dec-POMDPs with state-, history- and history-state-based
centralized critics."""

from .model import DecPomdpModel, JointAction, JointObservation, Violation, builtin, validate
from .modelfile import (
    ModelInvalidError,
    ModelSource,
    ParseError,
    parse_model,
    parse_policy,
    serialize_model,
    serialize_policy,
)
from .policies import (
    DegenerateScoreError,
    TabularJointPolicy,
    builtin_policy,
    dectiger_listen_always,
    dectiger_listen_open,
    random_policy,
    uniform_policy,
)
from .exact import (
    BiasReport,
    GradientReport,
    ParameterIndex,
    ResourceCapError,
    ValueTables,
    VisitationTable,
    bias_report,
    enumerate_support,
    exact_gradient,
    gradient_report,
    gradient_variance,
    parameter_index,
    policy_value,
    random_softmax_policy,
    softmax_policy_from_vector,
    values,
    visitation,
)
from .sampling import (
    EmpiricalMoments,
    McEstimate,
    Trajectory,
    empirical_moments,
    mc_gradient,
    rollout,
    sample_point,
)
from .train import (
    ActorParams,
    CriticTable,
    DivergenceError,
    LearningCurve,
    TrainConfig,
    TrainResult,
    Transition,
    actor_update,
    advantage,
    critic_update,
    evaluate_policy,
    evaluate_policy_exact,
    train,
)

__version__ = "0.1.0"
