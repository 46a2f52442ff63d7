"""JSON/CSV encodings of visitation, value, bias, gradient and sampling reports.

Joint histories are rendered as the per-agent `/`-notation of the policy-file
grammar, agents joined by `|`; the empty history is `@`. Joint actions and
observations are comma-joined labels. Both formats carry the same rows, so a
JSON file and a CSV file produced by the same invocation encode identical data.
"""

from __future__ import annotations

import csv
import io
import json
import math

import numpy as np

from .model import DecPomdpModel
from .modelfile import history_to_string
from .policies import JointHistory, project
from .exact import BiasReport, GradientReport, ValueTables, VisitationTable
from .sampling import EmpiricalMoments


def joint_history_string(model: DecPomdpModel, h: JointHistory) -> str:
    if not h:
        return "@"
    return "|".join(history_to_string(model, i, project(h, i)) for i in range(model.num_agents))


def joint_action_string(model: DecPomdpModel, a) -> str:
    return model.joint_action_label(a)


def _finite(x: float) -> float | None:
    return None if (x is None or not math.isfinite(x)) else float(x)


def visitation_rows(model: DecPomdpModel, vt: VisitationTable) -> tuple[list[str], list[list]]:
    header = ["t", "history", "state", "pr_t", "eta", "rho"]
    rows = []
    for t, level in enumerate(vt.pr_t):
        for (h, s), p in level.items():
            key = (h, s)
            rows.append(
                [t, joint_history_string(model, h), model.states[s], p, vt.eta[key], vt.rho[key]]
            )
    return header, rows


def value_rows(model: DecPomdpModel, tables: ValueTables, return_kind: str) -> tuple[list[str], list[list]]:
    ts = tables.table_set(return_kind)
    vt = tables.visitation
    terminal = model.terminal_states
    header = ["table", "history", "state", "t", "action", "value"]
    rows: list[list] = []
    for (h, s), vec in ts.q_hsa.items():
        hs = joint_history_string(model, h)
        for ai, a in enumerate(model.joint_actions):
            rows.append(["q_hsa", hs, model.states[s], len(h), joint_action_string(model, a), vec[ai]])
    for h, vec in ts.q_ha.items():
        hs = joint_history_string(model, h)
        for ai, a in enumerate(model.joint_actions):
            rows.append(["q_ha", hs, "", len(h), joint_action_string(model, a), vec[ai]])
    for s, vec in ts.q_sa.items():
        if s in terminal:
            continue
        for ai, a in enumerate(model.joint_actions):
            if ts.q_sa_defined[s][ai]:
                rows.append(["q_sa", "", model.states[s], "", joint_action_string(model, a), vec[ai]])
    for h, vec in ts.e_s_qsa.items():
        hs = joint_history_string(model, h)
        for ai, a in enumerate(model.joint_actions):
            if math.isfinite(vec[ai]):
                rows.append(["e_s_qsa", hs, "", len(h), joint_action_string(model, a), vec[ai]])
    return header, rows


def bias_rows(model: DecPomdpModel, report: BiasReport) -> tuple[list[str], list[list]]:
    header = ["history", "action", "bias"]
    rows = [
        [joint_history_string(model, h), joint_action_string(model, a), b]
        for (h, a), b in report.rows.items()
    ]
    return header, rows


def gradient_rows(model: DecPomdpModel, report: GradientReport) -> tuple[list[str], list[list]]:
    header = ["kind", "agent", "history", "action", "gradient", "per_visit", "estimator_mean"]
    rows: list[list] = []
    for kind, kg in report.kinds.items():
        for pos, (agent, hist, a) in enumerate(report.index.entries):
            rows.append(
                [
                    kind,
                    agent,
                    history_to_string(model, agent, hist),
                    model.actions[agent][a],
                    kg.gradient[pos],
                    _finite(kg.per_visit[pos]),
                    kg.estimator_mean[pos],
                ]
            )
    return header, rows


def moments_rows(
    model: DecPomdpModel,
    moments: EmpiricalMoments,
    exact_mean: np.ndarray,
    index_entries,
) -> tuple[list[str], list[list]]:
    header = ["agent", "history", "action", "empirical_mean", "exact_mean", "stderr", "z"]
    stderr = moments.metadata["component_stderr"]
    rows: list[list] = []
    for pos, (agent, hist, a) in enumerate(index_entries):
        se = stderr[pos]
        diff = moments.mean[pos] - exact_mean[pos]
        z = diff / se if se > 0 else (0.0 if diff == 0 else math.inf)
        rows.append(
            [
                agent,
                history_to_string(model, agent, hist),
                model.actions[agent][a],
                moments.mean[pos],
                exact_mean[pos],
                se,
                z,
            ]
        )
    return header, rows


def _plain(v):
    """Coerce numpy scalars/non-finite floats into JSON-safe python values."""
    if v is None or isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        x = float(v)
        return x if math.isfinite(x) else None
    return v


def write_csv(path: str, header: list[str], rows: list[list], metadata: dict | None = None) -> None:
    buf = io.StringIO()
    if metadata:
        for k, v in metadata.items():
            buf.write(f"# {k}: {v}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        out = []
        for v in row:
            v = _plain(v)
            out.append("" if v is None else repr(v) if isinstance(v, float) else v)
        writer.writerow(out)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())


def write_json(path: str, header: list[str], rows: list[list], metadata: dict | None = None) -> None:
    payload = {
        "metadata": metadata or {},
        "columns": header,
        "rows": [[_plain(v) for v in row] for row in rows],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")


def write_report(path: str, fmt: str, header: list[str], rows: list[list], metadata: dict | None = None) -> None:
    if fmt == "csv":
        write_csv(path, header, rows, metadata)
    elif fmt == "json":
        write_json(path, header, rows, metadata)
    else:
        raise ValueError(f"unknown format {fmt!r}")
