"""Command-line front end: validate, values, bias, gradient, variance,
sample, train, evaluate.

Models and policies are `builtin:<name>` or file paths. Exit codes:
0 ok, 1 validation failure, 2 parse/IO error, 3 resource cap or degenerate
score, 4 training divergence.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import os
import pickle
import sys

import numpy as np

import dcl.train as train_mod

from . import exact, reports, sampling
from .model import BUILTIN_NAMES, DecPomdpModel, builtin, validate
from .modelfile import (
    ModelInvalidError,
    ModelSource,
    ParseError,
    parse_model,
    parse_policy,
    serialize_policy,
)
from .policies import (
    BUILTIN_POLICIES,
    DegenerateScoreError,
    TabularJointPolicy,
    builtin_policy,
)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_PARSE_IO = 2
EXIT_RESOURCE = 3
EXIT_DIVERGENCE = 4


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _load_model(ref: str, horizon: int | None, gamma: float | None) -> tuple[DecPomdpModel, str]:
    """Returns the model and a stable identity string for caching."""
    if ref.startswith("builtin:"):
        name = ref.split(":", 1)[1]
        try:
            model = builtin(name)
        except KeyError as exc:
            raise CliError(EXIT_PARSE_IO, str(exc)) from exc
        ident = ref
    else:
        try:
            src = ModelSource.from_file(ref)
        except OSError as exc:
            raise CliError(EXIT_PARSE_IO, f"{ref}: {exc.strerror or exc}") from exc
        model = parse_model(src)
        ident = hashlib.sha256(src.text.encode()).hexdigest()
    if horizon is not None:
        model = model.with_horizon(horizon)
    if gamma is not None:
        model = dataclasses.replace(model, discount=gamma)
    return model, f"{ident}|h={model.horizon}|g={model.discount!r}"


def _load_policy(ref: str, model: DecPomdpModel) -> tuple[TabularJointPolicy, str]:
    if ref.startswith("builtin:"):
        name = ref.split(":", 1)[1]
        try:
            return builtin_policy(name, model), ref
        except KeyError as exc:
            raise CliError(EXIT_PARSE_IO, str(exc)) from exc
    try:
        src = ModelSource.from_file(ref)
    except OSError as exc:
        raise CliError(EXIT_PARSE_IO, f"{ref}: {exc.strerror or exc}") from exc
    return parse_policy(src, model), hashlib.sha256(src.text.encode()).hexdigest()


def _cached_visitation(model: DecPomdpModel, policy: TabularJointPolicy, model_id: str, policy_id: str, cap: int):
    cache_dir = os.environ.get("DCL_CACHE_DIR")
    if not cache_dir:
        return exact.enumerate_support(model, policy, cap)
    os.makedirs(cache_dir, exist_ok=True)
    key = hashlib.sha256(f"{model_id}|{policy_id}".encode()).hexdigest()
    path = os.path.join(cache_dir, f"visitation-{key}.pkl")
    if os.path.exists(path):
        with open(path, "rb") as fh:
            return pickle.load(fh)
    vt = exact.enumerate_support(model, policy, cap)
    with open(path, "wb") as fh:
        pickle.dump(vt, fh)
    return vt


def _tables(args) -> tuple[DecPomdpModel, TabularJointPolicy, exact.ValueTables, dict]:
    model, model_id = _load_model(args.model, args.horizon, getattr(args, "gamma", None))
    policy, policy_id = _load_policy(args.policy, model)
    cap = getattr(args, "cap", exact.DEFAULT_SUPPORT_CAP)
    vt = _cached_visitation(model, policy, model_id, policy_id, cap)
    tables = exact.values(model, policy, vt=vt)
    meta = {
        "model": args.model,
        "policy": args.policy,
        "horizon": model.horizon,
        "gamma": model.discount,
        "threads": getattr(args, "threads", 1),
    }
    return model, policy, tables, meta


def cmd_validate(args) -> int:
    if args.model.startswith("builtin:"):
        name = args.model.split(":", 1)[1]
        try:
            model = builtin(name)
        except KeyError as exc:
            raise CliError(EXIT_PARSE_IO, str(exc)) from exc
    else:
        try:
            src = ModelSource.from_file(args.model)
        except OSError as exc:
            raise CliError(EXIT_PARSE_IO, f"{args.model}: {exc.strerror or exc}") from exc
        try:
            model = parse_model(src)
        except ModelInvalidError as exc:
            for violation in exc.report:
                print(violation)
            return EXIT_VALIDATION
    report = validate(model)
    for violation in report:
        print(violation)
    if report:
        return EXIT_VALIDATION
    print("ok")
    return EXIT_OK


def cmd_values(args) -> int:
    model, policy, tables, meta = _tables(args)
    meta["return_kind"] = args.return_kind
    j = exact.policy_value(model, policy)
    if args.out:
        header, rows = reports.value_rows(model, tables, args.return_kind)
        reports.write_report(args.out, args.format, header, rows, meta)
    print(f"J={j!r}")
    return EXIT_OK


def cmd_bias(args) -> int:
    model, policy, tables, meta = _tables(args)
    report = exact.bias_report(model, policy, tables=tables)
    meta["return_kind"] = report.return_kind
    if args.out:
        header, rows = reports.bias_rows(model, report)
        reports.write_report(args.out, args.format, header, rows, meta)
    print(f"max_abs_bias={report.max_abs_bias!r}")
    return EXIT_OK


def cmd_gradient(args) -> int:
    model, policy, tables, meta = _tables(args)
    kinds = (args.kind,) if args.kind else exact.CRITIC_KINDS
    report = exact.gradient_report(model, policy, kinds=kinds, return_kind=args.return_kind, tables=tables)
    meta["return_kind"] = args.return_kind
    if args.out:
        header, rows = reports.gradient_rows(model, report)
        reports.write_report(args.out, args.format, header, rows, meta)
    for kind in kinds:
        kg = report.kinds[kind]
        print(f"norm_{kind}={float(np.linalg.norm(kg.gradient))!r}")
    return EXIT_OK


def cmd_variance(args) -> int:
    model, policy, tables, meta = _tables(args)
    kinds = (args.kind,) if args.kind else exact.CRITIC_KINDS
    report = exact.gradient_report(model, policy, kinds=kinds, return_kind=args.return_kind, tables=tables)
    for kind in kinds:
        print(f"var_{kind}={report.kinds[kind].total_variance!r}")
    print(f"max_abs_bias={report.max_abs_bias!r}")
    if args.out:
        header = ["kind", "total_variance"]
        rows = [[kind, report.kinds[kind].total_variance] for kind in kinds]
        meta["return_kind"] = args.return_kind
        reports.write_report(args.out, args.format, header, rows, meta)
    return EXIT_OK


def cmd_sample(args) -> int:
    model, policy, tables, meta = _tables(args)
    index = exact.parameter_index(model, tables.visitation)
    report = exact.gradient_report(
        model, policy, kinds=(args.kind,), return_kind=args.return_kind, tables=tables
    )
    kg = report.kinds[args.kind]
    moments = sampling.empirical_moments(
        model,
        policy,
        args.kind,
        n=args.n,
        seed=args.seed,
        return_kind=args.return_kind,
        tables=tables,
        index=index,
        workers=args.workers,
    )
    meta.update(
        {
            "kind": args.kind,
            "return_kind": args.return_kind,
            "n": args.n,
            "seed": args.seed,
            "workers": args.workers,
            "rng": sampling.RNG_ALGORITHM,
            "exact_variance": kg.total_variance,
            "empirical_variance": "" if moments.total_variance is None else moments.total_variance,
        }
    )
    header, rows = reports.moments_rows(model, moments, kg.estimator_mean, index.entries)
    if args.out:
        reports.write_report(args.out, args.format, header, rows, meta)
    zs = [abs(row[-1]) for row in rows if row[-1] is not None and np.isfinite(row[-1])]
    print(f"max_abs_z={max(zs) if zs else 0.0!r}")
    if moments.total_variance is None:
        print("variance=")
    else:
        print(f"variance={moments.total_variance!r} exact_variance={kg.total_variance!r}")
    return EXIT_OK


def _parse_config_file(path: str) -> dict:
    out = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise CliError(EXIT_PARSE_IO, f"{path}: {exc.strerror or exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise CliError(EXIT_PARSE_IO, f"{path}:{lineno}: expected `key: value`")
        key, _, value = line.partition(":")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def cmd_train(args) -> int:
    model, _model_id = _load_model(args.model, args.horizon, getattr(args, "gamma", None))
    fields = dict(
        critic=args.critic,
        episodes=args.episodes,
        actor_lr=args.actor_lr,
        critic_lr=args.critic_lr,
        entropy_coef=args.entropy,
        truncation=args.truncation,
        eval_interval=args.eval_interval,
        eval_episodes=args.eval_episodes,
        seed=args.seed,
    )
    if args.config:
        loaded = _parse_config_file(args.config)
        casts = {
            "critic": str,
            "episodes": int,
            "actor_lr": float,
            "critic_lr": float,
            "entropy_coef": float,
            "truncation": int,
            "eval_interval": int,
            "eval_episodes": int,
            "seed": int,
            "discount": float,
        }
        for key, value in loaded.items():
            if key == "model":
                continue
            if key not in casts:
                raise CliError(EXIT_PARSE_IO, f"{args.config}: unknown config key {key!r}")
            fields[key] = casts[key](value)
    config = train_mod.TrainConfig(**fields)
    result = train_mod.train(model, config)
    meta = {
        "model": args.model,
        "critic": config.critic,
        "episodes": config.episodes,
        "actor_lr": config.actor_lr,
        "critic_lr": config.critic_lr,
        "entropy_coef": config.entropy_coef,
        "truncation": model.horizon if config.truncation is None else config.truncation,
        "eval_interval": config.eval_interval,
        "eval_episodes": config.eval_episodes,
        "seed": config.seed,
        "threads": getattr(args, "threads", 1),
        "rng": sampling.RNG_ALGORITHM,
    }
    if args.out:
        header = ["episode", "mean_return", "std_return", "seconds"]
        reports.write_csv(args.out, header, [list(r) for r in result.curve.rows], meta)
    if args.policy_out:
        # materialize visited actor keys so the emitted file round-trips;
        # unlisted histories stay uniform on both sides
        pol = result.actor.policy()
        for agent, table in enumerate(result.actor.logits):
            for hist, theta in table.items():
                pol.tables[agent][hist] = theta
        with open(args.policy_out, "w", encoding="utf-8") as fh:
            fh.write(serialize_policy(model, pol))
    print(f"final_mean_return={result.curve.final_mean!r}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    model, _ = _load_model(args.model, args.horizon, getattr(args, "gamma", None))
    policy, _ = _load_policy(args.policy, model)
    if args.exact:
        j = train_mod.evaluate_policy_exact(model, policy)
        print(f"mean_return={j!r} std_return=0.0 exact=1")
    else:
        mean, std = train_mod.evaluate_policy(model, policy, args.episodes, args.seed)
        print(f"mean_return={mean!r} std_return={std!r} exact=0")
    return EXIT_OK


def _add_common(p: argparse.ArgumentParser, policy: bool = True) -> None:
    p.add_argument("--model", required=True, help="builtin:<name> or model file path")
    if policy:
        p.add_argument("--policy", required=True, help="builtin:<name> or policy file path")
    p.add_argument("--horizon", type=int, default=None, help="override the model horizon")
    p.add_argument("--gamma", type=float, default=None, help="override the discount")
    p.add_argument("--threads", type=int, default=1, help="worker count (recorded in metadata)")
    p.add_argument("--cap", type=int, default=exact.DEFAULT_SUPPORT_CAP, help="reachable-support size cap")
    p.add_argument("--out", default=None, help="report output path")
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dcl",
        description="Exact evaluation, estimator diagnostics and tabular training "
        "for finite-horizon Dec-POMDPs with swappable centralized critics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a model file or builtin")
    p.add_argument("--model", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("values", help="exact value tables and J")
    _add_common(p)
    p.add_argument("--return-kind", choices=exact.RETURN_KINDS, default="episode")
    p.set_defaults(func=cmd_values)

    p = sub.add_parser("bias", help="state-critic bias table")
    _add_common(p)
    p.set_defaults(func=cmd_bias)

    p = sub.add_parser("gradient", help="exact policy gradients")
    _add_common(p)
    p.add_argument("--kind", choices=exact.CRITIC_KINDS, default=None)
    p.add_argument("--return-kind", choices=exact.RETURN_KINDS, default="episode")
    p.set_defaults(func=cmd_gradient)

    p = sub.add_parser("variance", help="exact single-sample estimator variances")
    _add_common(p)
    p.add_argument("--kind", choices=exact.CRITIC_KINDS, default=None)
    p.add_argument("--return-kind", choices=exact.RETURN_KINDS, default="episode")
    p.set_defaults(func=cmd_variance)

    p = sub.add_parser("sample", help="Monte-Carlo estimator moments vs exact")
    _add_common(p)
    p.add_argument("--kind", choices=exact.CRITIC_KINDS, required=True)
    p.add_argument("--return-kind", choices=exact.RETURN_KINDS, default="episode")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("train", help="tabular A2C with a centralized critic")
    p.add_argument("--model", required=True)
    p.add_argument("--horizon", type=int, default=None)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--critic", default="history", help="state | history | history-state")
    p.add_argument("--episodes", type=int, default=20000)
    p.add_argument("--actor-lr", type=float, default=0.05)
    p.add_argument("--critic-lr", type=float, default=0.2)
    p.add_argument("--entropy", type=float, default=0.01)
    p.add_argument("--truncation", type=int, default=None)
    p.add_argument("--eval-interval", type=int, default=1000)
    p.add_argument("--eval-episodes", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", default=None, help="key: value config file")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", default=None, help="learning-curve CSV path")
    p.add_argument("--policy-out", default=None, help="final-policy file path")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="evaluate a policy (MC or exact)")
    p.add_argument("--model", required=True)
    p.add_argument("--policy", required=True)
    p.add_argument("--horizon", type=int, default=None)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--exact", action="store_true")
    p.add_argument("--episodes", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_evaluate)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(str(exc), file=sys.stderr)
        return exc.code
    except ParseError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_PARSE_IO
    except ModelInvalidError as exc:
        for violation in exc.report:
            print(violation, file=sys.stderr)
        return EXIT_VALIDATION
    except exact.ResourceCapError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_RESOURCE
    except DegenerateScoreError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_RESOURCE
    except train_mod.DivergenceError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_DIVERGENCE


if __name__ == "__main__":
    sys.exit(main())
