"""File formats: dataset CSV, edge-list CSV, tier and role CSVs, and the
network JSON document.

Dataset CSVs have a header of variable names and state labels in the body;
the loader maps labels to indices in first-appearance order unless a
network's state order is supplied. Edge lists are ``ID,Parent,Child``.
Network JSON is ``{"variables": [{"name", "states"}], "edges": [[p, c]],
"cpts": {name: rows}}`` with CPT rows in mixed-radix order of the parents
sorted by variable index (first parent most significant).
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .errors import ArityMismatch, MalformedRow
from .graph import Dag, Edge
from .model import Dataset, DiscreteBn


def load_dataset_csv(path, states: dict[str, tuple[str, ...]] | None = None) -> Dataset:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise MalformedRow("empty dataset file")
    names = tuple(cell.strip() for cell in rows[0])
    maps: list[dict[str, int]] = []
    fixed: list[bool] = []
    for name in names:
        if states is not None and name in states:
            maps.append({label: k for k, label in enumerate(states[name])})
            fixed.append(True)
        else:
            maps.append({})
            fixed.append(False)
    data = []
    for row in rows[1:]:
        if not any(cell.strip() for cell in row):
            continue
        if len(row) != len(names):
            raise MalformedRow(f"expected {len(names)} cells, got {len(row)}: {row}")
        rec = []
        for j, cell in enumerate(row):
            label = cell.strip()
            if label not in maps[j]:
                if fixed[j]:
                    raise ArityMismatch(f"unknown state {label!r} for {names[j]}")
                maps[j][label] = len(maps[j])
            rec.append(maps[j][label])
        data.append(rec)
    arities = tuple(max(2, len(m)) for m in maps)
    labels = []
    for j, m in enumerate(maps):
        ordered = [label for label, _ in sorted(m.items(), key=lambda kv: kv[1])]
        while len(ordered) < arities[j]:
            ordered.append(str(len(ordered)))
        labels.append(tuple(ordered))
    return Dataset(names, arities, np.asarray(data, dtype=np.int64), tuple(labels))


def save_dataset_csv(dataset: Dataset, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(dataset.variables)
        labels = dataset.state_labels
        for row in dataset.data:
            writer.writerow([labels[j][row[j]] for j in range(len(dataset.variables))])


def load_edge_csv(path) -> list[Edge]:
    """Pairs in file order; the first column is an identifier and ignored."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    pairs = []
    for row in rows[1:]:
        if not any(cell.strip() for cell in row):
            continue
        if len(row) != 3:
            raise MalformedRow(f"expected 3 columns, got {len(row)}: {row}")
        pairs.append((row[1].strip(), row[2].strip()))
    return pairs


def save_edge_csv(edges, path, header=("ID", "Parent", "Child")):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for k, (a, b) in enumerate(edges, start=1):
            writer.writerow([k, a, b])


def save_tiers_csv(tiers, path):
    """One column per tier, members stacked into rows (Table-style layout)."""
    columns = [sorted(t) for t in tiers.tiers]
    depth = max((len(c) for c in columns), default=0)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["ID"] + [f"Tier {t}" for t in range(1, len(columns) + 1)])
        for r in range(depth):
            writer.writerow([r + 1] + [c[r] if r < len(c) else "" for c in columns])


def save_bdn_roles_csv(annotation, path):
    decisions = sorted(annotation.decisions)
    utilities = sorted(annotation.utilities)
    depth = max(len(decisions), len(utilities))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["ID", "Decision", "Utility"])
        for r in range(depth):
            writer.writerow([
                r + 1,
                decisions[r] if r < len(decisions) else "",
                utilities[r] if r < len(utilities) else "",
            ])


def save_network_json(bn: DiscreteBn, path):
    doc = {
        "variables": [{"name": v, "states": list(bn.states[v])} for v in bn.variables],
        "edges": [[p, c] for p, c in bn.dag.sorted_edges()],
        "cpts": {v: np.asarray(bn.cpts[v]).tolist() for v in bn.variables},
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def load_network_json(path) -> DiscreteBn:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    names = [entry["name"] for entry in doc["variables"]]
    states = {entry["name"]: tuple(entry["states"]) for entry in doc["variables"]}
    dag = Dag(names, [tuple(edge) for edge in doc["edges"]])
    cpts = doc.get("cpts")
    if cpts is None:
        raise MalformedRow("network document has no cpts")
    return DiscreteBn(dag, states, {v: np.asarray(cpts[v], dtype=float) for v in names})


def load_graph_json(path) -> tuple[Dag, dict[str, tuple[str, ...]]]:
    """A graph-only document: edges plus (optionally) state labels."""
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    names = [entry["name"] for entry in doc["variables"]]
    states = {
        entry["name"]: tuple(entry.get("states", ("0", "1")))
        for entry in doc["variables"]
    }
    return Dag(names, [tuple(edge) for edge in doc["edges"]]), states


def save_graph_json(dag: Dag, path, states=None):
    doc = {
        "variables": [
            {"name": v, "states": list(states[v]) if states else ["0", "1"]}
            for v in dag.variables
        ],
        "edges": [[p, c] for p, c in dag.sorted_edges()],
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
