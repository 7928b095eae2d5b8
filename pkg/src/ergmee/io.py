"""Edge-list and attribute ingestion, and run artifact serialization.

All formats are plain text (whitespace edge lists, CSV/TSV attributes and
traces) so runs can be inspected and plotted with standard tools.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .graph import AttributeTable, Graph
from .estimator import EstimateReport, EstimationTrace


@dataclass
class EdgeListData:
    """A loaded graph plus the label mapping and ingestion counts."""

    graph: Graph
    labels: list[str]  # node id -> original label
    duplicates_dropped: int = 0
    self_loops_dropped: int = 0

    @property
    def label_to_id(self) -> dict[str, int]:
        return {lab: i for i, lab in enumerate(self.labels)}


def load_edge_list(path: str | Path) -> EdgeListData:
    """Read whitespace-separated node pairs, one edge per line.

    Labels are arbitrary strings, remapped to dense 0-based ids in first
    appearance order. Comment lines starting with ``#`` are skipped;
    duplicate edges and self-loops are dropped and counted. Raises on
    malformed lines (with the line number) and on files with no edges.
    """
    path = Path(path)
    labels: list[str] = []
    index: dict[str, int] = {}
    pairs: list[tuple[int, int]] = []
    dup = 0
    loops = 0
    seen: set[tuple[int, int]] = set()

    def node_id(label: str) -> int:
        idx = index.get(label)
        if idx is None:
            idx = len(labels)
            index[label] = idx
            labels.append(label)
        return idx

    with path.open() as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            tokens = stripped.split()
            if len(tokens) != 2:
                raise ValueError(
                    f"{path}:{lineno}: expected two tokens, got {len(tokens)}: {stripped!r}"
                )
            a, b = node_id(tokens[0]), node_id(tokens[1])
            if a == b:
                loops += 1
                continue
            key = (a, b) if a < b else (b, a)
            if key in seen:
                dup += 1
                continue
            seen.add(key)
            pairs.append(key)
    if not labels:
        raise ValueError(f"{path}: no edges found")
    g = Graph.from_edges(len(labels), pairs)
    return EdgeListData(graph=g, labels=labels, duplicates_dropped=dup, self_loops_dropped=loops)


def save_edge_list(path: str | Path, g: Graph, labels: list[str] | None = None) -> None:
    """Write edges as whitespace-separated label pairs, one per line."""
    path = Path(path)
    with path.open("w") as fh:
        for i, j in sorted(g.edges()):
            if labels is None:
                fh.write(f"{i} {j}\n")
            else:
                fh.write(f"{labels[i]} {labels[j]}\n")


@dataclass
class AttributeData:
    """Raw attribute columns keyed by node label, untied to any graph.

    Columns are declared binary or categorical with a ``:b`` / ``:c``
    suffix in the header. Binding to a graph's label mapping happens at
    model-bind time, when full node coverage is enforced.
    """

    binary: dict[str, dict[str, int]] = field(default_factory=dict)
    categorical: dict[str, dict[str, str]] = field(default_factory=dict)

    def bind(self, labels: list[str]) -> AttributeTable:
        """Resolve columns against a graph's node labels.

        Every graph node must be covered by every column; missing nodes
        are reported by label.
        """
        table = AttributeTable(len(labels))
        for name, column in self.binary.items():
            missing = [lab for lab in labels if lab not in column]
            if missing:
                raise ValueError(
                    f"binary attribute {name!r} missing nodes: {_preview(missing)}"
                )
            table.add_binary(name, [column[lab] for lab in labels])
        for name, column in self.categorical.items():
            missing = [lab for lab in labels if lab not in column]
            if missing:
                raise ValueError(
                    f"categorical attribute {name!r} missing nodes: {_preview(missing)}"
                )
            levels: list[str] = []
            level_id: dict[str, int] = {}
            values = []
            for lab in labels:
                v = column[lab]
                if v not in level_id:
                    level_id[v] = len(levels)
                    levels.append(v)
                values.append(level_id[v])
            table.add_categorical(name, values, levels)
        return table


def _preview(items: list[str], limit: int = 8) -> str:
    head = ", ".join(items[:limit])
    return head + (f", ... ({len(items)} total)" if len(items) > limit else "")


def load_attributes(path: str | Path) -> AttributeData:
    """Read a delimited attribute file with a typed header.

    First row: ``node,<name>:b,<name>:c,...`` where ``b`` marks binary
    columns (values 0/1) and ``c`` categorical ones (arbitrary string
    levels, mapped to small ids in first-seen order at bind time). The
    delimiter is a tab if the header contains one, otherwise a comma.
    """
    path = Path(path)
    with path.open() as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty attribute file")
    sep = "\t" if "\t" in lines[0] else ","
    header = [h.strip() for h in lines[0].split(sep)]
    if len(header) < 2:
        raise ValueError(f"{path}: need a node column plus at least one attribute")
    columns: list[tuple[str, str]] = []
    for raw in header[1:]:
        if ":" not in raw:
            raise ValueError(
                f"{path}: column {raw!r} missing a :b or :c type suffix"
            )
        name, kind = raw.rsplit(":", 1)
        if kind not in ("b", "c"):
            raise ValueError(f"{path}: column {raw!r} has unknown type {kind!r}")
        columns.append((name.strip(), kind))

    data = AttributeData()
    for name, kind in columns:
        target = data.binary if kind == "b" else data.categorical
        if name in data.binary or name in data.categorical:
            raise ValueError(f"{path}: duplicate attribute column {name!r}")
        target[name] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        parts = [p.strip() for p in line.split(sep)]
        if len(parts) != len(header):
            raise ValueError(
                f"{path}:{lineno}: expected {len(header)} fields, got {len(parts)}"
            )
        node = parts[0]
        for (name, kind), value in zip(columns, parts[1:]):
            if kind == "b":
                if value not in ("0", "1"):
                    raise ValueError(
                        f"{path}:{lineno}: binary attribute {name!r} has "
                        f"non-0/1 value {value!r}"
                    )
                data.binary[name][node] = int(value)
            else:
                data.categorical[name][node] = value
    return data


# -- run artifacts -----------------------------------------------------------


def trace_header(term_names: tuple[str, ...]) -> list[str]:
    cols = ["step"]
    cols += [f"{name}_theta" for name in term_names]
    cols += [f"{name}_dz" for name in term_names]
    cols.append("acceptance_rate")
    return cols


def write_trace_csv(path: str | Path, trace: EstimationTrace) -> None:
    """One row per outer step: step, per-term theta, per-term dz, acceptance."""
    path = Path(path)
    with path.open("w") as fh:
        fh.write(",".join(trace_header(trace.term_names)) + "\n")
        for t in range(trace.n_steps):
            row = [str(t)]
            row += [repr(float(v)) for v in trace.theta[t]]
            row += [repr(float(v)) for v in trace.dz[t]]
            row.append(repr(float(trace.acceptance[t])))
            fh.write(",".join(row) + "\n")


def read_trace_csv(path: str | Path) -> tuple[list[str], np.ndarray]:
    path = Path(path)
    with path.open() as fh:
        header = fh.readline().strip().split(",")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    return header, data


def write_statistics_csv(
    path: str | Path, term_names: tuple[str, ...], samples: np.ndarray
) -> None:
    path = Path(path)
    with path.open("w") as fh:
        fh.write("sample," + ",".join(term_names) + "\n")
        for idx, row in enumerate(samples):
            fh.write(str(idx) + "," + ",".join(repr(float(v)) for v in row) + "\n")


def write_estimates(
    path_json: str | Path,
    path_txt: str | Path,
    report: EstimateReport,
    extra: dict | None = None,
) -> None:
    """Machine-readable estimates plus a human-readable table."""
    cv = report.convergence
    rows = []
    for k, name in enumerate(report.term_names):
        rows.append(
            {
                "term": name,
                "theta": float(report.theta[k]),
                "se": _json_float(report.standard_error[k]),
                "ci_low": _json_float(report.ci_low[k]),
                "ci_high": _json_float(report.ci_high[k]),
                "tau": _json_float(cv.tau[k]),
                "plateau_stat": float(cv.plateau_stat[k]),
                "converged": bool(cv.converged_terms[k]),
            }
        )
    payload = {
        "terms": rows,
        "converged": cv.converged,
        "t_b": cv.t_b,
        "se_method": report.se_method,
        "mean_acceptance": report.mean_acceptance,
    }
    if extra:
        payload.update(extra)
    Path(path_json).write_text(json.dumps(payload, indent=2) + "\n")

    lines = [
        f"{'term':<24} {'theta':>12} {'se':>10} {'95% CI':>26} {'tau':>9} {'conv':>5}"
    ]
    for r in rows:
        ci = f"[{_fmt(r['ci_low'])}, {_fmt(r['ci_high'])}]"
        lines.append(
            f"{r['term']:<24} {r['theta']:>12.4f} {_fmt(r['se']):>10} "
            f"{ci:>26} {_fmt(r['tau']):>9} {'yes' if r['converged'] else 'NO':>5}"
        )
    lines.append(
        f"overall: {'converged' if cv.converged else 'NOT converged'} "
        f"(t_B={cv.t_b}, se={report.se_method})"
    )
    Path(path_txt).write_text("\n".join(lines) + "\n")


def _json_float(v: float) -> float | None:
    f = float(v)
    return None if np.isnan(f) or np.isinf(f) else f


def _fmt(v) -> str:
    if v is None:
        return "nan"
    f = float(v)
    if np.isnan(f):
        return "nan"
    if np.isinf(f):
        return "inf"
    return f"{f:.4f}"


def write_manifest(path: str | Path, manifest: dict) -> None:
    Path(path).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def write_node_map(path: str | Path, labels: list[str]) -> None:
    path = Path(path)
    with path.open("w") as fh:
        fh.write("id\tlabel\n")
        for i, lab in enumerate(labels):
            fh.write(f"{i}\t{lab}\n")
