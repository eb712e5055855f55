import json
import subprocess
import sys

import numpy as np
import pytest

from bnkit.cli import main
from bnkit.fixtures import chain3, get_fixture, mixed5
from bnkit.io import (
    load_dataset_csv,
    load_edge_csv,
    load_network_json,
    save_dataset_csv,
    save_edge_csv,
    save_network_json,
    save_tiers_csv,
)
from bnkit.knowledge import parse_tiers
from bnkit.model import forward_sample
from bnkit.sampling import sample_tiers


class TestDatasetRoundTrip:
    def test_labels_survive(self, tmp_path):
        bn = mixed5().bn
        ds = forward_sample(bn, 200, seed=1)
        path = tmp_path / "d.csv"
        save_dataset_csv(ds, path)
        back = load_dataset_csv(path, bn.states)
        assert back.variables == ds.variables
        assert np.array_equal(back.data, ds.data)

    def test_first_appearance_order_without_states(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("A,B\nyes,low\nno,high\nyes,high\n", encoding="utf-8")
        ds = load_dataset_csv(path)
        assert ds.state_labels[0] == ("yes", "no")
        assert ds.data[:, 0].tolist() == [0, 1, 0]


class TestNetworkJson:
    def test_round_trip(self, tmp_path):
        bn = chain3().bn
        path = tmp_path / "net.json"
        save_network_json(bn, path)
        back = load_network_json(path)
        assert back.dag == bn.dag
        for v in bn.variables:
            assert np.allclose(back.cpts[v], bn.cpts[v])


class TestGraphJson:
    def test_graph_only_round_trip(self, tmp_path):
        from bnkit.io import load_graph_json, save_graph_json

        bn = mixed5().bn
        path = tmp_path / "g.json"
        save_graph_json(bn.dag, path, bn.states)
        dag, states = load_graph_json(path)
        assert dag == bn.dag
        assert states == bn.states


class TestEdgeCsv:
    def test_round_trip(self, tmp_path):
        edges = [("A", "B"), ("B", "C")]
        path = tmp_path / "e.csv"
        save_edge_csv(edges, path)
        assert load_edge_csv(path) == edges

    def test_tiers_round_trip(self, tmp_path):
        truth = get_fixture("sports9").bn.dag
        tiers = sample_tiers(truth, 0.5, seed=2)
        path = tmp_path / "t.csv"
        save_tiers_csv(tiers, path)
        back = parse_tiers(path.read_text(encoding="utf-8"))
        assert back.tiers == tiers.tiers


@pytest.fixture
def workdir(tmp_path):
    bn = mixed5().bn
    net = tmp_path / "net.json"
    save_network_json(bn, net)
    data = tmp_path / "data.csv"
    save_dataset_csv(forward_sample(bn, 2_000, seed=3), data)
    return tmp_path, net, data


class TestCli:
    def test_learn_smoke(self, workdir, capsys):
        tmp, net, data = workdir
        rc = main(["learn", "--algo", "hc", "--data", str(data),
                   "--out", str(tmp / "run")])
        assert rc == 0
        report = json.loads((tmp / "run" / "report.json").read_text())
        assert report["algorithm"] == "hc"
        assert (tmp / "run" / "graph.csv").exists()

    def test_learn_with_constraints(self, workdir):
        tmp, net, data = workdir
        save_edge_csv([("A", "B")], tmp / "req.csv")
        rc = main(["learn", "--algo", "tabu", "--data", str(data),
                   "--directed", str(tmp / "req.csv"),
                   "--out", str(tmp / "run2")])
        assert rc == 0
        edges = load_edge_csv(tmp / "run2" / "graph.csv")
        assert ("A", "B") in edges

    def test_conflicting_constraints_exit_nonzero(self, workdir, capsys):
        tmp, net, data = workdir
        save_edge_csv([("A", "B")], tmp / "req.csv")
        save_edge_csv([("A", "B")], tmp / "forb.csv", header=("ID", "Var1", "Var2"))
        rc = main(["learn", "--algo", "hc", "--data", str(data),
                   "--directed", str(tmp / "req.csv"),
                   "--forbidden", str(tmp / "forb.csv"),
                   "--out", str(tmp / "run3")])
        assert rc == 1
        err = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
        assert err["error"] == "ConstraintConflict"

    def test_sample_data_deterministic(self, workdir, capsys):
        tmp, net, data = workdir
        out1, out2 = tmp / "s1.csv", tmp / "s2.csv"
        assert main(["sample", "data", "--net", str(net), "--n", "100",
                     "--seed", "7", "--out", str(out1)]) == 0
        assert main(["sample", "data", "--net", str(net), "--n", "100",
                     "--seed", "7", "--out", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_sample_constraints_counts(self, workdir, capsys):
        tmp, net, data = workdir
        rc = main(["sample", "constraints", "--net", str(net),
                   "--approach", "dir-edg", "--rate", "0.5",
                   "--seed", "1", "--out", str(tmp / "cons")])
        assert rc == 0
        rows = load_edge_csv(tmp / "cons" / "directed.csv")
        assert len(rows) == 2  # round(0.5 * 4 edges)

    def test_sample_tiers_too_few(self, workdir, capsys):
        tmp, net, data = workdir
        rc = main(["sample", "constraints", "--net", str(net),
                   "--approach", "rel-tem", "--rate", "0.2",
                   "--seed", "1", "--out", str(tmp / "cons2")])
        assert rc == 1
        err = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
        assert err["error"] == "TooFewVariables"
        assert "two variables" in err["message"]

    def test_evaluate_round_trip(self, workdir, capsys):
        tmp, net, data = workdir
        bn = mixed5().bn
        save_edge_csv(bn.dag.sorted_edges(), tmp / "truth.csv")
        save_edge_csv([("A", "B"), ("A", "C"), ("C", "D")], tmp / "learned.csv")
        (tmp / "vars.txt").write_text("\n".join(bn.variables), encoding="utf-8")
        rc = main(["evaluate", "--learned", str(tmp / "learned.csv"),
                   "--truth", str(tmp / "truth.csv"),
                   "--variables", str(tmp / "vars.txt")])
        assert rc == 0
        doc = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
        assert doc["fn"] == 1.0 and doc["tp"] == 3.0

    def test_entry_point_installed(self):
        proc = subprocess.run([sys.executable, "-m", "bnkit.cli", "--help"],
                              capture_output=True, text=True)
        assert proc.returncode == 0
        assert "learn" in proc.stdout

    def test_experiment_subcommand(self, workdir, capsys):
        tmp, net, data = workdir
        manifest = {
            "case": "cli-demo",
            "network": str(net),
            "sample_sizes": [200],
            "algorithms": ["hc"],
            "approaches": {"dir-edg": [0.5]},
            "seeds": [1],
        }
        path = tmp / "manifest.json"
        path.write_text(json.dumps(manifest), encoding="utf-8")
        rc = main(["experiment", "--manifest", str(path), "--out", str(tmp / "exp")])
        assert rc == 0
        doc = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
        assert (tmp / "exp" / "cli-demo" / "runs.csv").exists()
        assert (tmp / "exp" / "cli-demo" / "aggregates.csv").exists()
        assert doc["runs"].endswith("runs.csv")
