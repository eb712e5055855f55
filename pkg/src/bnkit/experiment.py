"""Experiment grid runner: networks x sample sizes x algorithms x
(approach, rate) cells, with per-run wall-clock caps, resumable append-only
run records and plot-ready aggregate tables.

Relative impact per metric is (constrained - baseline) / |baseline|
against the unconstrained run with the same case, sample size, algorithm
and seed. Sign semantics are per column: larger is better for f1/bsf/bic,
a negative shd change is an improvement. Runs are grouped into
limited/big-data regimes: limited means n <= 10^3 for small networks and
n <= 10^4 for large ones.
"""

from __future__ import annotations

import csv
import json
import statistics
from dataclasses import dataclass
from pathlib import Path

from .errors import SearchTimeout, TooFewVariables
from .evaluation import evaluate
from .io import save_edge_csv
from .knowledge import empty_spec
from .model import forward_sample
from .sampling import build_spec, legal_rates
from .saiyanh import saiyanh
from .search import SearchConfig, hill_climb, mahc, tabu

LEARNERS = {"hc": hill_climb, "tabu": tabu, "saiyanh": saiyanh, "mahc": mahc}

DEFAULT_SAMPLE_SIZES = (100, 1_000, 10_000, 100_000, 1_000_000)
DEFAULT_TIMEOUT = 18_000.0

_METRICS = ("f1", "bsf", "shd", "bic", "free_parameters", "arcs", "runtime")


@dataclass(frozen=True)
class ExperimentManifest:
    case: str
    network: str
    size_class: str = "small"  # limited-data cut: small <= 10^3, large <= 10^4
    sample_sizes: tuple[int, ...] = DEFAULT_SAMPLE_SIZES
    algorithms: tuple[str, ...] = ("hc",)
    approaches: tuple[tuple[str, tuple], ...] = ()
    seeds: tuple[int, ...] = (1,)
    timeout_secs: float = DEFAULT_TIMEOUT
    max_indegree: int | None = None
    prune_indegree: int = 3

    def __post_init__(self):
        if self.size_class not in ("small", "large"):
            raise ValueError("size_class must be 'small' or 'large'")
        if self.timeout_secs <= 0:
            raise ValueError("timeout must be positive")
        for algo in self.algorithms:
            if algo not in LEARNERS:
                raise ValueError(f"unknown algorithm {algo!r}")
        for approach, rates in self.approaches:
            legal = legal_rates(approach)
            for rate in rates:
                if rate not in legal:
                    raise ValueError(f"rate {rate} is illegal for {approach}")

    @property
    def limited_cut(self) -> int:
        return 1_000 if self.size_class == "small" else 10_000

    @classmethod
    def from_json(cls, path) -> "ExperimentManifest":
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        approaches = tuple(
            (approach, tuple(None if r in (None, "varies") else float(r) for r in rates))
            for approach, rates in doc.get("approaches", {}).items()
        )
        return cls(
            case=doc["case"],
            network=doc["network"],
            size_class=doc.get("size_class", "small"),
            sample_sizes=tuple(int(n) for n in doc.get("sample_sizes", DEFAULT_SAMPLE_SIZES)),
            algorithms=tuple(doc.get("algorithms", ["hc"])),
            approaches=approaches,
            seeds=tuple(int(s) for s in doc.get("seeds", [1])),
            timeout_secs=float(doc.get("timeout_secs", DEFAULT_TIMEOUT)),
            max_indegree=doc.get("max_indegree"),
            prune_indegree=int(doc.get("prune_indegree", 3)),
        )


RUN_COLUMNS = (
    "case", "sample_size", "algorithm", "approach", "rate", "seed", "status",
    "score", "free_parameters", "arcs_learnt", "iterations", "runtime_seconds",
    "f1_dag", "shd_dag", "bsf_dag", "f1_cpdag", "shd_cpdag", "bsf_cpdag",
)


def _rate_str(rate) -> str:
    return "" if rate is None else f"{rate:g}"


def _run_key(case, n, algo, approach, rate, seed) -> tuple:
    return (case, str(n), algo, approach, _rate_str(rate), str(seed))


def _graph_filename(n, algo, approach, rate, seed) -> str:
    rate_part = _rate_str(rate) or "na"
    return f"{n}_{algo}_{approach}_{rate_part}_{seed}.csv"


class ExperimentRunner:
    """Executes a manifest cell by cell, appending one record per run.

    Completed cells (matched by their full key) are skipped on resume, so
    an interrupted grid picks up where it stopped and produces the same
    records an uninterrupted run would have.
    """

    def __init__(self, manifest: ExperimentManifest, out_dir):
        self.manifest = manifest
        self.case_dir = Path(out_dir) / manifest.case
        self.case_dir.mkdir(parents=True, exist_ok=True)
        (self.case_dir / "graphs").mkdir(exist_ok=True)
        self.runs_path = self.case_dir / "runs.csv"
        self.aggregate_path = self.case_dir / "aggregates.csv"

    def _existing_keys(self) -> set[tuple]:
        if not self.runs_path.exists():
            return set()
        with open(self.runs_path, newline="", encoding="utf-8") as fh:
            return {
                (row["case"], row["sample_size"], row["algorithm"],
                 row["approach"], row["rate"], row["seed"])
                for row in csv.DictReader(fh)
            }

    def _append(self, record: dict):
        new_file = not self.runs_path.exists()
        with open(self.runs_path, "a", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(fh, fieldnames=RUN_COLUMNS, lineterminator="\n")
            if new_file:
                writer.writeheader()
            writer.writerow(record)

    def run(self, log=lambda msg: None) -> Path:
        from .io import load_network_json

        manifest = self.manifest
        bn = load_network_json(manifest.network)
        truth = bn.dag
        save_edge_csv(truth.sorted_edges(), self.case_dir / "truth.csv")
        (self.case_dir / "variables.txt").write_text(
            "\n".join(truth.variables) + "\n", encoding="utf-8")

        done = self._existing_keys()
        cells = [("none", None)] + [
            (approach, rate)
            for approach, rates in manifest.approaches
            for rate in rates
        ]
        for n in manifest.sample_sizes:
            for seed in manifest.seeds:
                dataset = None
                for algo in manifest.algorithms:
                    for approach, rate in cells:
                        key = _run_key(manifest.case, n, algo, approach, rate, seed)
                        if key in done:
                            continue
                        if dataset is None:
                            dataset = forward_sample(bn, n, seed)
                        record = self._run_cell(dataset, truth, n, algo, approach, rate, seed)
                        if record is None:
                            log(f"skip {key} (not applicable)")
                            continue
                        self._append(record)
                        log(f"done {key} [{record['status']}]")
        self.write_aggregates()
        return self.runs_path

    def _run_cell(self, dataset, truth, n, algo, approach, rate, seed) -> dict | None:
        manifest = self.manifest
        if approach == "none":
            spec = empty_spec(truth.variables)
        else:
            try:
                spec = build_spec(truth, approach, rate, seed)
            except TooFewVariables:
                return None
        config = SearchConfig(
            max_indegree=manifest.max_indegree,
            mahc_prune_indegree=manifest.prune_indegree,
            seed=seed,
            timeout_secs=manifest.timeout_secs,
        )
        record = {
            "case": manifest.case, "sample_size": n, "algorithm": algo,
            "approach": approach, "rate": _rate_str(rate), "seed": seed,
        }
        try:
            result = LEARNERS[algo](dataset, spec, config)
        except SearchTimeout:
            record["status"] = "timeout"
            for col in RUN_COLUMNS:
                record.setdefault(col, "")
            return record
        dag_report = evaluate(result.dag, truth, "dag")
        cpdag_report = evaluate(result.dag, truth, "cpdag")
        save_edge_csv(result.dag.sorted_edges(),
                      self.case_dir / "graphs" / _graph_filename(n, algo, approach, rate, seed))
        record.update({
            "status": "ok",
            "score": f"{result.score:.6f}",
            "free_parameters": f"{result.free_parameters:g}",
            "arcs_learnt": result.arcs_learnt,
            "iterations": result.iterations,
            "runtime_seconds": f"{result.runtime_seconds:.6f}",
            "f1_dag": f"{dag_report.f1:.6f}",
            "shd_dag": f"{dag_report.shd:.6f}",
            "bsf_dag": f"{dag_report.bsf:.6f}",
            "f1_cpdag": f"{cpdag_report.f1:.6f}",
            "shd_cpdag": f"{cpdag_report.shd:.6f}",
            "bsf_cpdag": f"{cpdag_report.bsf:.6f}",
        })
        return record

    # -- aggregation -----------------------------------------------------

    def write_aggregates(self) -> Path:
        rows = self.read_runs()
        aggregates = compute_aggregates(rows, self.manifest.limited_cut)
        with open(self.aggregate_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["approach", "rate", "regime", "metric",
                             "mean_rel_change", "std_rel_change", "n_runs"])
            for row in aggregates:
                writer.writerow(row)
        return self.aggregate_path

    def read_runs(self) -> list[dict]:
        if not self.runs_path.exists():
            return []
        with open(self.runs_path, newline="", encoding="utf-8") as fh:
            return list(csv.DictReader(fh))


def _metric_value(row: dict, metric: str) -> float:
    column = {
        "f1": "f1_dag", "bsf": "bsf_dag", "shd": "shd_dag", "bic": "score",
        "free_parameters": "free_parameters", "arcs": "arcs_learnt",
        "runtime": "runtime_seconds",
    }[metric]
    return float(row[column])


def compute_aggregates(rows: list[dict], limited_cut: int) -> list[list]:
    """Per (approach, rate, regime, metric): mean and population standard
    deviation of the relative change against the matching baseline run."""
    baselines = {
        (r["case"], r["sample_size"], r["algorithm"], r["seed"]): r
        for r in rows
        if r["approach"] == "none" and r["status"] == "ok"
    }
    buckets: dict[tuple, list[float]] = {}
    for row in rows:
        if row["approach"] == "none" or row["status"] != "ok":
            continue
        base = baselines.get((row["case"], row["sample_size"], row["algorithm"], row["seed"]))
        if base is None:
            continue
        regimes = ["overall"]
        regimes.append("limited" if int(row["sample_size"]) <= limited_cut else "big")
        for metric in _METRICS:
            value = _metric_value(row, metric)
            ref = _metric_value(base, metric)
            if ref == 0:
                continue
            rel = (value - ref) / abs(ref)
            for regime in regimes:
                buckets.setdefault((row["approach"], row["rate"], regime, metric), []).append(rel)
    out = []
    for (approach, rate, regime, metric), values in sorted(buckets.items()):
        mean = statistics.fmean(values)
        std = statistics.pstdev(values)
        out.append([approach, rate, regime, metric,
                    f"{mean:.9f}", f"{std:.9f}", len(values)])
    return out


def run_experiment(manifest: ExperimentManifest, out_dir, log=lambda msg: None) -> Path:
    return ExperimentRunner(manifest, out_dir).run(log)
