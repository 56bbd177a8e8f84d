import json
import subprocess
import sys

import pytest

from hamlab.cli import main
from hamlab.edgelist import read_edgelist, write_edgelist
from hamlab.graph import complete_graph, cycle_graph, path_graph, petersen_graph, star_graph


def _write(tmp_path, name, G):
    p = tmp_path / name
    write_edgelist(p, G)
    return str(p)


def test_sample_round_trip_and_determinism(tmp_path):
    a, b = tmp_path / "a.el", tmp_path / "b.el"
    assert main(["sample", "--n", "100", "--p", "0.05", "--seed", "7", "--out", str(a)]) == 0
    assert main(["sample", "--n", "100", "--p", "0.05", "--seed", "7", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    G = read_edgelist(str(a))
    assert G.n == 100 and G.edge_count() > 0
    c = tmp_path / "c.el"
    main(["sample", "--n", "100", "--p", "0.05", "--seed", "8", "--out", str(c)])
    assert c.read_bytes() != a.read_bytes()


def test_usage_errors(capsys):
    assert main(["sample", "--n", "100", "--p", "1.5"]) == 2
    assert "--p" in capsys.readouterr().err
    assert main(["sample", "--p", "0.1"]) == 2
    assert main(["sample", "--n", "10", "--p", "0.1", "--lambda", "2"]) == 2
    assert main(["sample", "--n", "10", "--bogus"]) == 2
    assert main(["sweep", "--n", "100", "--c-grid", "1.2,0.8"]) == 2
    assert main(["solve"]) == 2


def test_help_documents_every_flag(capsys):
    for cmd in ["sample", "solve", "certify", "sweep", "obstruct"]:
        assert main([cmd, "--help"]) == 0
        out = capsys.readouterr().out
        assert "--seed" in out and "--config" in out


def test_solve_verdicts(tmp_path, capsys):
    assert main(["solve", _write(tmp_path, "c5.el", cycle_graph(5))]) == 0
    out = capsys.readouterr().out
    assert out.startswith("HAMILTONIAN")
    star = _write(tmp_path, "star.el", star_graph(4))
    assert main(["solve", star]) == 0
    assert "EXHAUSTED" in capsys.readouterr().out
    assert main(["solve", "--exact", star]) == 3
    assert "NON-HAMILTONIAN" in capsys.readouterr().out
    assert main(["solve", "--exact", _write(tmp_path, "pet.el", petersen_graph())]) == 3
    assert "NON-HAMILTONIAN" in capsys.readouterr().out
    assert main(["solve", str(tmp_path / "missing.el")]) == 1


def test_solve_writes_certificate(tmp_path):
    cert = tmp_path / "cycle.txt"
    g = _write(tmp_path, "k5.el", complete_graph(5))
    assert main(["solve", g, "--certificate", str(cert), "--quiet"]) == 0
    from hamlab.posa import check_certificate
    assert check_certificate(complete_graph(5), cert.read_text())


def test_certify_exit_codes(tmp_path, capsys):
    assert main(["certify", _write(tmp_path, "p5.el", path_graph(5)), "--k-bound", "1", "--show-witness"]) == 3
    out = capsys.readouterr().out
    assert "falsified" in out and "witness:" in out
    assert main(["certify", _write(tmp_path, "k9.el", complete_graph(9)), "--k-bound", "2"]) == 0
    js = tmp_path / "r.json"
    assert main(["certify", "--mode", "e123", "--n", "3000", "--budget", "500", "--json", str(js)]) == 0
    recs = json.loads(js.read_text())
    assert [r["label"] for r in recs] == ["E1", "E2", "E3"]
    assert main(["certify", "--mode", "h1", "--n", "20000", "--family", "clique-blobs", "--budget", "2000"]) == 0
    assert main(["certify", "--mode", "h1", "--n", "1000", "--family", "bipartite", "--budget", "500"]) == 3


def test_obstruct_table(tmp_path):
    out = tmp_path / "o.tsv"
    assert main(["obstruct", "--n", "200", "--alpha", "0.1", "--c", "0,0.9", "--trials", "5", "--out", str(out)]) == 0
    rows = [l.split("\t") for l in out.read_text().splitlines()]
    head = rows[0]
    first = dict(zip(head, rows[1]))
    assert first["mean_Y"] == first["B"] == "180" and first["cert_rate"] == "1"
    assert float(dict(zip(head, rows[2]))["EY"]) == pytest.approx(180 * (1 - 0.9 * 2.302585092994046 / 200) ** 179, rel=1e-5)


def test_config_file(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# sample defaults\nn = 50\np = 0.1\nseed = 3\n")
    a, b = tmp_path / "a.el", tmp_path / "b.el"
    assert main(["sample", "--config", str(cfg), "--out", str(a)]) == 0
    assert main(["sample", "--n", "50", "--p", "0.1", "--seed", "3", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    c = tmp_path / "c.el"
    assert main(["sample", "--config", str(cfg), "--seed", "4", "--out", str(c)]) == 0
    assert c.read_bytes() != a.read_bytes()
    cfg.write_text("colour = blue\n")
    assert main(["sample", "--config", str(cfg)]) == 2


def test_sweep_jobs_do_not_change_outputs(tmp_path):
    outs = []
    for jobs in ("1", "8"):
        d = tmp_path / jobs
        d.mkdir()
        assert main(["sweep", "--n", "600", "--c-grid", "0.8,1.6,2.4", "--trials", "6", "--jobs", jobs,
                     "--out", str(d / "s.csv"), "--plotdata", str(d / "s.tsv"), "--log", str(d / "s.jsonl")]) == 0
        outs.append([(d / f).read_bytes() for f in ("s.csv", "s.tsv", "s.jsonl")])
    assert outs[0] == outs[1]


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "hamlab", "--version"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.startswith("hamlab ")
