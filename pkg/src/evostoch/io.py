"""File formats: CSV scenario/path ingestion, JSON results, Graphviz DOT trees.

Scenario CSV: one scenario per row, optional header, optional final column
``prob``. Path CSV: columns ``stage2..stageT`` (an optional constant
``stage1`` column sets the root value), optional final ``prob`` column.
Without a header every column is data and probabilities are uniform.
"""
import csv
import json
import re
from pathlib import Path

import numpy as np

from .distributions import ScenarioPathMatrix, ScenarioSet
from .exceptions import DataFormatError

FORMAT_VERSION = 1

_STAGE_RE = re.compile(r"^stage(\d+)$", re.IGNORECASE)


def _is_number(cell):
    try:
        float(cell)
    except ValueError:
        return False
    return True


def read_table(path):
    """Return ``(header or None, float matrix, file line numbers)`` for a CSV file."""
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            rows = [(i, row) for i, row in enumerate(csv.reader(fh), start=1)
                    if row and any(c.strip() for c in row)]
    except OSError as exc:
        raise DataFormatError(f"cannot read file: {exc.strerror}", source=path) from None
    if not rows:
        raise DataFormatError("file is empty", source=path)
    header = None
    if not all(_is_number(c) for c in rows[0][1]):
        header = [c.strip() for c in rows[0][1]]
        rows = rows[1:]
    if not rows:
        raise DataFormatError("no data rows", source=path)
    width = len(header) if header else len(rows[0][1])
    data = np.empty((len(rows), width))
    for r, (line, row) in enumerate(rows):
        if len(row) != width:
            raise DataFormatError(f"expected {width} columns, found {len(row)}",
                                  source=path, row=line)
        try:
            data[r] = [float(c) for c in row]
        except ValueError:
            raise DataFormatError("non-numeric cell", source=path, row=line) from None
        if not np.all(np.isfinite(data[r])):
            raise DataFormatError("non-finite value", source=path, row=line)
    return header, data, [line for line, _ in rows]


def _split_prob(header, data, path):
    if header is None:
        return None, data, None
    lowered = [h.lower() for h in header]
    if "prob" not in lowered:
        return header, data, None
    if lowered.index("prob") != len(header) - 1 or lowered.count("prob") > 1:
        raise DataFormatError("'prob' must be the final column", source=path)
    return header[:-1], data[:, :-1], data[:, -1]


def _probability_error(path, lines, probs, exc):
    if probs is not None:
        bad = np.flatnonzero(probs < 0)
        if bad.size:
            return DataFormatError(f"negative probability {probs[bad[0]]}",
                                   source=path, row=lines[bad[0]])
    return DataFormatError(str(exc), source=path)


def read_scenarios(path):
    """Load a :class:`ScenarioSet`; returns ``(scenarios, column_names or None)``."""
    header, data, lines = read_table(path)
    names, values, probs = _split_prob(header, data, path)
    if values.shape[1] == 0:
        raise DataFormatError("no value columns", source=path)
    try:
        return ScenarioSet(values, probs), names
    except ValueError as exc:
        raise _probability_error(path, lines, probs, exc) from None


def read_paths(path, root_value=None):
    """Load a :class:`ScenarioPathMatrix` from a path CSV."""
    header, data, lines = read_table(path)
    names, values, probs = _split_prob(header, data, path)
    root = 0.0 if root_value is None else float(root_value)
    if names is not None:
        stages = []
        for name in names:
            m = _STAGE_RE.match(name)
            if not m:
                raise DataFormatError(f"unexpected column {name!r}; expected stage2..stageT",
                                      source=path)
            stages.append(int(m.group(1)))
        first = stages[0]
        if first not in (1, 2) or stages != list(range(first, first + len(stages))):
            raise DataFormatError("stage columns must be consecutive from stage1 or stage2",
                                  source=path)
        if first == 1:
            col = values[:, 0]
            if np.ptp(col) != 0:
                r = int(np.flatnonzero(col != col[0])[0])
                raise DataFormatError("stage1 (root) column must be constant",
                                      source=path, row=lines[r])
            if root_value is None:
                root = float(col[0])
            values = values[:, 1:]
    try:
        return ScenarioPathMatrix(values, probs, root)
    except ValueError as exc:
        raise _probability_error(path, lines, probs, exc) from None


def write_scenarios_csv(scenarios, path, names=None):
    names = list(names) if names else [f"x{i + 1}" for i in range(scenarios.n_dims)]
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(names + ["prob"])
        for row, p in zip(scenarios.values, scenarios.probabilities):
            writer.writerow([repr(float(v)) for v in row] + [repr(float(p))])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps_json(payload):
    payload = {"format_version": FORMAT_VERSION, **payload}
    return json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n"


def write_json(payload, path):
    Path(path).write_text(dumps_json(payload))


def log_records(log):
    return [
        {"generation": r.generation, "best": r.best, "mean": r.mean,
         "invalid_count": r.invalid_count}
        for r in log
    ]


def export_tree_dot(tree, name="scenario_tree", precision=4):
    """Render ``tree`` as a Graphviz digraph, one rank per stage.

    Nodes are emitted stage by stage in index order; edges carry the
    conditional transition probability rounded to three decimals.
    """
    lines = [f"digraph {name} {{", "  rankdir=LR;", "  node [shape=circle];"]
    for t, values in enumerate(tree.values):
        lines.append("  { rank=same;")
        for j, v in enumerate(values):
            lines.append(f'    "n{t + 1}_{j}" [label="{float(v):.{precision}g}"];')
        lines.append("  }")
    for t in range(1, tree.n_stages):
        cond = tree.conditional_probabilities(t)
        for j, parent in enumerate(tree.parents[t]):
            lines.append(f'  "n{t}_{parent}" -> "n{t + 1}_{j}" [label="{cond[j]:.3f}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
