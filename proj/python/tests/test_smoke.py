import os
import subprocess
import tempfile

import pytest

import curvscan

SPHERE = """
dim 2
coords theta phi
domain theta 0.4 2.7
domain phi 0.1 6.2
g 1 1 : 1
g 2 2 : sin(theta)^2
"""

FLAT3 = """
dim 3
coords x1 x2 x3
domain x1 0 1
domain x2 0 1
domain x3 0 1
g 1 1 : 1
g 2 2 : 1
g 3 3 : 1
"""


def test_expr_parse_diff_eval():
    e = curvscan.parse_expr("x1^2", ["x1"])
    d = e.diff("x1")
    assert d({"x1": 3.0}) == pytest.approx(6.0)
    h = curvscan.parse_expr("c1*exp(c2*x2)", ["x2"], ["c1", "c2"])
    assert h.diff("x2")({"x2": 0.0, "c1": 1.0, "c2": 1.0}) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        curvscan.parse_expr("sin(x1", ["x1"])


def test_sphere_curvature():
    chart = curvscan.MetricChart.from_string(SPHERE)
    out = chart.curvature_at({"theta": 1.1, "phi": 2.0})
    assert out["kappa"] == pytest.approx(2.0)
    import math

    assert out["riemann"][0][1][1][0] == pytest.approx(math.sin(1.1) ** 2)


def test_classify_flat():
    report = curvscan.classify(curvscan.MetricChart.from_string(FLAT3), points=6)
    flags = report["flags"]
    assert flags["flat"] == "pass"
    assert flags["roter"] == "pass"
    assert flags["ein_level"] == 1
    assert report["config"]["seed"] == 42


def test_warped_verify():
    base = curvscan.MetricChart.from_string(
        "dim 1\ncoords x1\ndomain x1 0.5 1.5\ng 1 1 : 1\n"
    )
    fiber = curvscan.MetricChart.from_string(
        "dim 2\ncoords v1 v2\ndomain v1 0.3 1.3\ndomain v2 0.3 1.3\n"
        "g 1 1 : 1\ng 2 2 : v1^2 + 2\n"
    )
    spec = curvscan.WarpedSpec(base, fiber, "x1^2 + 2")
    report = curvscan.verify_warped(spec, points=5)
    assert max(report["formula_deviations"].values()) < 1e-8
    assert spec.assemble().dim == 3


def test_run_case():
    assert len(curvscan.corpus_cases()) == 8
    report = curvscan.run_case("fiber-step-i", points=5)
    assert report["passed"]
    assert report["classification"]["flags"]["roter"] == "pass"
    assert report["classification"]["flags"]["ein_level"] == 2


def test_verify_paper_text_deterministic():
    a = curvscan.verify_paper_text(points=4, seed=7)
    b = curvscan.verify_paper_text(points=4, seed=7)
    assert a == b


@pytest.fixture(scope="module")
def cli():
    path = os.environ.get("CURVSCAN_CLI")
    if not path or not os.path.exists(path):
        pytest.skip("CURVSCAN_CLI not set")
    return path


def test_cli_analyze_and_determinism(cli):
    with tempfile.TemporaryDirectory() as tmp:
        curvscan.export_corpus(tmp)
        metric = os.path.join(tmp, "m_step1.metric")
        j1 = os.path.join(tmp, "a.json")
        j2 = os.path.join(tmp, "b.json")
        r1 = subprocess.run(
            [cli, "analyze", metric, "--points", "6", "--json", j1],
            capture_output=True,
            text=True,
        )
        assert r1.returncode == 0, r1.stderr
        assert "grt" in r1.stdout
        r2 = subprocess.run(
            [cli, "analyze", metric, "--points", "6", "--json", j2],
            capture_output=True,
            text=True,
        )
        assert r2.returncode == 0
        with open(j1, "rb") as f1, open(j2, "rb") as f2:
            assert f1.read() == f2.read()

        bad = os.path.join(tmp, "broken.metric")
        with open(bad, "w") as f:
            f.write("dim 1\ncoords x\ndomain x 0 1\ng 1 1 : 2 + q\n")
        r3 = subprocess.run([cli, "analyze", bad], capture_output=True, text=True)
        assert r3.returncode == 2
        assert "unknown identifier 'q'" in r3.stderr


def test_cli_verify_paper_single_case(cli):
    r = subprocess.run(
        [cli, "verify-paper", "--case", "fiber-step-i", "--points", "5"],
        capture_output=True,
        text=True,
    )
    assert r.returncode == 0, r.stderr
    assert "1/1 cases passed" in r.stdout
    r_bad = subprocess.run(
        [cli, "verify-paper", "--case", "nope"], capture_output=True, text=True
    )
    assert r_bad.returncode == 2
