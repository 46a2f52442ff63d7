"""Line-oriented text format for Dec-POMDP models and tabular policies.

One directive per line, `#` starts a comment:

    agents: <n>
    discount: <float>
    horizon: <int>
    states: <labels...>
    actions <agent-idx>: <labels...>
    observations <agent-idx>: <labels...>
    start: <probs...>
    T: <state> <a1,...,an> -> <state'> <prob>
    O: <a1,...,an> <state'> -> <o1,...,on> <prob>
    R: <state> <a1,...,an> <state'|*> <value>

Unspecified T/O entries default to 0, unspecified R entries to 0; `*`
wildcards expand over the full axis they stand in for. Duplicate T/O/R
assignments keep the last value and produce a warning. Policy files use

    policy <agent-idx>: <history> -> <action:prob ...>

where the history is `@` (empty) or `action/obs/action/obs/...` in the
agent's own labels; unlisted histories act uniformly at random.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field

import numpy as np

from .model import DecPomdpModel, Violation, validate
from .policies import IndividualHistory, TabularJointPolicy


@dataclass(frozen=True)
class ModelSource:
    text: str
    origin: str = "<inline>"

    @classmethod
    def from_file(cls, path: str) -> "ModelSource":
        with open(path, "r", encoding="utf-8") as fh:
            return cls(text=fh.read(), origin=path)

    @classmethod
    def coerce(cls, src: "ModelSource | str") -> "ModelSource":
        if isinstance(src, ModelSource):
            return src
        return cls(text=src)


class ParseError(ValueError):
    def __init__(self, origin: str, line: int, column: int, message: str, token: str = ""):
        super().__init__(f"{origin}:{line}:{column}: {message}")
        self.origin = origin
        self.line = line
        self.column = column
        self.message = message
        self.token = token


class ModelInvalidError(ValueError):
    """The file parsed, but the resulting model fails validation."""

    def __init__(self, origin: str, report: list[Violation]):
        lines = "; ".join(str(v) for v in report)
        super().__init__(f"{origin}: model invalid: {lines}")
        self.origin = origin
        self.report = report


@dataclass
class _Token:
    text: str
    column: int  # 1-based


def _tokenize(line: str) -> list[_Token]:
    code = line.split("#", 1)[0]
    return [_Token(m.group(0), m.start() + 1) for m in re.finditer(r"\S+", code)]


@dataclass
class _Builder:
    origin: str
    num_agents: int | None = None
    discount: float = 1.0
    horizon: int | None = None
    states: list[str] | None = None
    actions: dict[int, list[str]] = field(default_factory=dict)
    observations: dict[int, list[str]] = field(default_factory=dict)
    start: np.ndarray | None = None
    t_entries: list = field(default_factory=list)
    o_entries: list = field(default_factory=list)
    r_entries: list = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)


def _err(b: _Builder, lineno: int, tok: _Token, message: str) -> ParseError:
    return ParseError(b.origin, lineno, tok.column, message, tok.text)


def _need(b: _Builder, lineno: int, toks: list[_Token], count: int, what: str) -> None:
    if len(toks) != count:
        tok = toks[min(len(toks), count) - 1] if toks else _Token("", 1)
        raise ParseError(b.origin, lineno, tok.column, f"{what}: expected {count} fields, got {len(toks)}", tok.text)


def _number(b: _Builder, lineno: int, tok: _Token, what: str = "probability") -> float:
    try:
        return float(tok.text)
    except ValueError:
        raise _err(b, lineno, tok, f"non-numeric {what} {tok.text!r}") from None


def _index_of(b: _Builder, lineno: int, tok: _Token, labels: list[str] | None, what: str) -> list[int]:
    """Resolve a label (or `*`) against a declared label list."""
    if labels is None:
        raise _err(b, lineno, tok, f"{what} used before declaration")
    if tok.text == "*":
        return list(range(len(labels)))
    if tok.text not in labels:
        raise _err(b, lineno, tok, f"unknown {what} label {tok.text!r} (used before declaration?)")
    return [labels.index(tok.text)]


def _split_tuple(b: _Builder, lineno: int, tok: _Token, per_agent: dict[int, list[str]], what: str) -> list[list[int]]:
    """Resolve `x1,...,xn` (with `*` components) against per-agent label lists."""
    if b.num_agents is None:
        raise _err(b, lineno, tok, "agents must be declared before table lines")
    parts = tok.text.split(",")
    if len(parts) != b.num_agents:
        raise _err(b, lineno, tok, f"arity mismatch: {what} tuple has {len(parts)} components, expected {b.num_agents}")
    out = []
    for i, part in enumerate(parts):
        labels = per_agent.get(i)
        if labels is None:
            raise _err(b, lineno, tok, f"agent {i} {what}s used before declaration")
        if part == "*":
            out.append(list(range(len(labels))))
        elif part in labels:
            out.append([labels.index(part)])
        else:
            raise _err(b, lineno, tok, f"unknown {what} label {part!r} for agent {i}")
    return out


def parse_model_report(src: ModelSource | str) -> tuple[DecPomdpModel, list[str]]:
    """Parse a model and return it with any duplicate-assignment warnings."""
    src = ModelSource.coerce(src)
    b = _Builder(origin=src.origin)

    for lineno, raw in enumerate(src.text.splitlines(), start=1):
        toks = _tokenize(raw)
        if not toks:
            continue
        head = toks[0]
        if head.text == "agents:":
            _need(b, lineno, toks, 2, "agents")
            b.num_agents = int(_number(b, lineno, toks[1], "agent count"))
        elif head.text == "discount:":
            _need(b, lineno, toks, 2, "discount")
            b.discount = _number(b, lineno, toks[1], "discount")
        elif head.text == "horizon:":
            _need(b, lineno, toks, 2, "horizon")
            b.horizon = int(_number(b, lineno, toks[1], "horizon"))
        elif head.text == "states:":
            b.states = [t.text for t in toks[1:]]
        elif head.text in ("actions", "observations"):
            if len(toks) < 2 or not toks[1].text.endswith(":"):
                raise _err(b, lineno, head, f"expected `{head.text} <agent-idx>: <labels...>`")
            try:
                agent = int(toks[1].text[:-1])
            except ValueError:
                raise _err(b, lineno, toks[1], "non-numeric agent index") from None
            labels = [t.text for t in toks[2:]]
            (b.actions if head.text == "actions" else b.observations)[agent] = labels
        elif head.text == "start:":
            b.start = np.array([_number(b, lineno, t) for t in toks[1:]])
        elif head.text == "T:":
            _need(b, lineno, toks, 6, "T line")
            if toks[3].text != "->":
                raise _err(b, lineno, toks[3], "expected `->`")
            ss = _index_of(b, lineno, toks[1], b.states, "state")
            aa = _split_tuple(b, lineno, toks[2], b.actions, "action")
            s2 = _index_of(b, lineno, toks[4], b.states, "state")
            p = _number(b, lineno, toks[5])
            b.t_entries.append((lineno, ss, aa, s2, p))
        elif head.text == "O:":
            _need(b, lineno, toks, 6, "O line")
            if toks[3].text != "->":
                raise _err(b, lineno, toks[3], "expected `->`")
            aa = _split_tuple(b, lineno, toks[1], b.actions, "action")
            s2 = _index_of(b, lineno, toks[2], b.states, "state")
            oo = _split_tuple(b, lineno, toks[4], b.observations, "observation")
            p = _number(b, lineno, toks[5])
            b.o_entries.append((lineno, aa, s2, oo, p))
        elif head.text == "R:":
            _need(b, lineno, toks, 5, "R line")
            ss = _index_of(b, lineno, toks[1], b.states, "state")
            aa = _split_tuple(b, lineno, toks[2], b.actions, "action")
            s2 = _index_of(b, lineno, toks[3], b.states, "state")
            v = _number(b, lineno, toks[4], "reward")
            b.r_entries.append((lineno, ss, aa, s2, v))
        else:
            raise _err(b, lineno, head, f"unknown directive {head.text!r}")

    for name, value in (("agents", b.num_agents), ("horizon", b.horizon), ("states", b.states)):
        if value is None:
            raise ParseError(b.origin, 1, 1, f"missing required directive `{name}:`")
    for i in range(b.num_agents):
        if i not in b.actions:
            raise ParseError(b.origin, 1, 1, f"missing `actions {i}:` declaration")
        if i not in b.observations:
            raise ParseError(b.origin, 1, 1, f"missing `observations {i}:` declaration")

    states = tuple(b.states)
    actions = tuple(tuple(b.actions[i]) for i in range(b.num_agents))
    observations = tuple(tuple(b.observations[i]) for i in range(b.num_agents))
    n_s = len(states)
    action_sizes = [len(a) for a in actions]
    obs_sizes = [len(o) for o in observations]
    n_a = int(np.prod(action_sizes))
    n_z = int(np.prod(obs_sizes))

    def flat(index_lists: list[list[int]], sizes: list[int]) -> list[int]:
        out = []
        for combo in itertools.product(*index_lists):
            out.append(int(np.ravel_multi_index(combo, sizes)))
        return out

    T = np.zeros((n_s, n_a, n_s))
    seen_t = np.zeros((n_s, n_a, n_s), dtype=bool)
    for lineno, ss, aa, s2s, p in b.t_entries:
        for s in ss:
            for ai in flat(aa, action_sizes):
                for s2 in s2s:
                    if seen_t[s, ai, s2]:
                        b.warnings.append(f"{b.origin}:{lineno}: duplicate T entry overwritten")
                    T[s, ai, s2] = p
                    seen_t[s, ai, s2] = True

    O = np.zeros((n_a, n_s, n_z))
    seen_o = np.zeros((n_a, n_s, n_z), dtype=bool)
    for lineno, aa, s2s, oo, p in b.o_entries:
        for ai in flat(aa, action_sizes):
            for s2 in s2s:
                for zi in flat(oo, obs_sizes):
                    if seen_o[ai, s2, zi]:
                        b.warnings.append(f"{b.origin}:{lineno}: duplicate O entry overwritten")
                    O[ai, s2, zi] = p
                    seen_o[ai, s2, zi] = True

    R = np.zeros((n_s, n_a, n_s))
    seen_r = np.zeros((n_s, n_a, n_s), dtype=bool)
    for lineno, ss, aa, s2s, v in b.r_entries:
        for s in ss:
            for ai in flat(aa, action_sizes):
                for s2 in s2s:
                    if seen_r[s, ai, s2]:
                        b.warnings.append(f"{b.origin}:{lineno}: duplicate R entry overwritten")
                    R[s, ai, s2] = v
                    seen_r[s, ai, s2] = True

    start = b.start if b.start is not None else np.full(n_s, 1.0 / n_s)

    model = DecPomdpModel(
        name=src.origin,
        num_agents=b.num_agents,
        states=states,
        actions=actions,
        observations=observations,
        initial_dist=start,
        transition=T,
        observation_fn=O,
        reward=R,
        discount=b.discount,
        horizon=b.horizon,
    )
    report = validate(model)
    if report:
        raise ModelInvalidError(src.origin, report)
    return model, b.warnings


def parse_model(src: ModelSource | str) -> DecPomdpModel:
    model, _warnings = parse_model_report(src)
    return model


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def serialize_model(model: DecPomdpModel) -> str:
    """Emit text that parses back to a structurally identical model."""
    report = validate(model)
    if report:
        raise ModelInvalidError(model.name, report)
    lines = [
        f"# {model.name}",
        f"agents: {model.num_agents}",
        f"discount: {_fmt(model.discount)}",
        f"horizon: {model.horizon}",
        "states: " + " ".join(model.states),
    ]
    for i in range(model.num_agents):
        lines.append(f"actions {i}: " + " ".join(model.actions[i]))
    for i in range(model.num_agents):
        lines.append(f"observations {i}: " + " ".join(model.observations[i]))
    lines.append("start: " + " ".join(_fmt(p) for p in model.initial_dist))
    for s in range(model.num_states):
        for ai, a in enumerate(model.joint_actions):
            alabel = model.joint_action_label(a)
            for s2 in range(model.num_states):
                p = model.transition[s, ai, s2]
                if p != 0.0:
                    lines.append(f"T: {model.states[s]} {alabel} -> {model.states[s2]} {_fmt(p)}")
    for ai, a in enumerate(model.joint_actions):
        alabel = model.joint_action_label(a)
        for s2 in range(model.num_states):
            for zi, z in enumerate(model.joint_observations):
                p = model.observation_fn[ai, s2, zi]
                if p != 0.0:
                    zlabel = ",".join(model.observations[i][oi] for i, oi in enumerate(z))
                    lines.append(f"O: {alabel} {model.states[s2]} -> {zlabel} {_fmt(p)}")
    for s in range(model.num_states):
        for ai, a in enumerate(model.joint_actions):
            alabel = model.joint_action_label(a)
            for s2 in range(model.num_states):
                v = model.reward[s, ai, s2]
                if v != 0.0:
                    lines.append(f"R: {model.states[s]} {alabel} {model.states[s2]} {_fmt(v)}")
    return "\n".join(lines) + "\n"


# -- policies ----------------------------------------------------------------


def history_from_string(
    model: DecPomdpModel, agent: int, text: str, origin: str = "<inline>", lineno: int = 1, column: int = 1
) -> IndividualHistory:
    if text == "@":
        return ()
    parts = text.split("/")
    if len(parts) % 2 != 0:
        raise ParseError(origin, lineno, column, f"history {text!r} must alternate action/observation", text)
    hist = []
    for k in range(0, len(parts), 2):
        a_label, o_label = parts[k], parts[k + 1]
        if a_label not in model.actions[agent]:
            raise ParseError(origin, lineno, column, f"unknown action label {a_label!r} for agent {agent}", a_label)
        if o_label not in model.observations[agent]:
            raise ParseError(origin, lineno, column, f"unknown observation label {o_label!r} for agent {agent}", o_label)
        hist.append((model.actions[agent].index(a_label), model.observations[agent].index(o_label)))
    return tuple(hist)


def history_to_string(model: DecPomdpModel, agent: int, hist: IndividualHistory) -> str:
    if not hist:
        return "@"
    return "/".join(
        f"{model.actions[agent][a]}/{model.observations[agent][o]}" for a, o in hist
    )


def parse_policy(src: ModelSource | str, model: DecPomdpModel) -> TabularJointPolicy:
    """Parse `policy <agent>: <history> -> <action:prob ...>` lines."""
    src = ModelSource.coerce(src)
    policy = TabularJointPolicy(action_sizes=model.action_sizes, parameterization="direct", name=src.origin)
    for lineno, raw in enumerate(src.text.splitlines(), start=1):
        toks = _tokenize(raw)
        if not toks:
            continue
        if toks[0].text != "policy":
            raise ParseError(src.origin, lineno, toks[0].column, f"unknown directive {toks[0].text!r}", toks[0].text)
        if len(toks) < 5 or not toks[1].text.endswith(":") or toks[3].text != "->":
            raise ParseError(src.origin, lineno, toks[0].column, "expected `policy <agent>: <history> -> <action:prob ...>`")
        try:
            agent = int(toks[1].text[:-1])
        except ValueError:
            raise ParseError(src.origin, lineno, toks[1].column, "non-numeric agent index", toks[1].text) from None
        if not (0 <= agent < model.num_agents):
            raise ParseError(src.origin, lineno, toks[1].column, f"agent index {agent} out of range", toks[1].text)
        hist = history_from_string(model, agent, toks[2].text, src.origin, lineno, toks[2].column)
        dist = np.zeros(model.action_sizes[agent])
        for tok in toks[4:]:
            if ":" not in tok.text:
                raise ParseError(src.origin, lineno, tok.column, f"expected `action:prob`, got {tok.text!r}", tok.text)
            label, _, ptext = tok.text.rpartition(":")
            if label not in model.actions[agent]:
                raise ParseError(src.origin, lineno, tok.column, f"unknown action label {label!r} for agent {agent}", tok.text)
            try:
                p = float(ptext)
            except ValueError:
                raise ParseError(src.origin, lineno, tok.column, f"non-numeric probability {ptext!r}", tok.text) from None
            dist[model.actions[agent].index(label)] = p
        if abs(float(dist.sum()) - 1.0) > 1e-9:
            raise ParseError(
                src.origin,
                lineno,
                toks[2].column,
                f"distribution for history {toks[2].text!r} sums to {float(dist.sum())!r}",
                toks[2].text,
            )
        policy.tables[agent][hist] = dist
    return policy


def serialize_policy(model: DecPomdpModel, policy: TabularJointPolicy) -> str:
    """Emit the policy's stored entries; unlisted histories stay uniform."""
    lines = [f"# policy {policy.name}"]
    for agent, table in enumerate(policy.tables):
        for hist, vec in table.items():
            probs = policy.probs(agent, hist)
            entries = " ".join(
                f"{model.actions[agent][a]}:{_fmt(p)}" for a, p in enumerate(probs) if p != 0.0
            )
            lines.append(f"policy {agent}: {history_to_string(model, agent, hist)} -> {entries}")
    return "\n".join(lines) + "\n"
