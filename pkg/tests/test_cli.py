"""
Tests for the htg command-line interface
"""
import json
import math

import pytest

from main import FOLIATION_HEADER, cli, main

IDENTITY = ["1", "0", "0", "0", "1", "0", "0", "0", "1"]


@pytest.fixture
def out_file(tmp_path):
    return tmp_path / "result.out"


def _json(path):
    return json.loads(path.read_text(encoding="utf-8"))


def _lines(path):
    return path.read_text(encoding="utf-8").splitlines()


class TestCertify:
    def test_certified(self, runner, out_file):
        result = runner.invoke(cli, ["certify", "3", "--t", "1", "--out", str(out_file)])
        assert result.exit_code == 0
        document = _json(out_file)
        assert document["verdict"] == "Certified"
        assert document["k_bound"] == 2
        assert len(document["entries"]) == 7

    def test_failed(self, runner, out_file):
        result = runner.invoke(cli, ["certify", "3", "--t", "0.3", "--out", str(out_file)])
        assert result.exit_code == 2
        assert _json(out_file)["verdict"] == "Failed"

    def test_angular_invariant_as_fraction_of_pi(self, runner, out_file):
        result = runner.invoke(cli, ["certify", "3", "--A", "1/2", "--frac-pi", "--out", str(out_file)])
        assert result.exit_code == 0
        assert _json(out_file)["t"] == pytest.approx(1.0)

    def test_needs_exactly_one_parameter(self, runner):
        assert runner.invoke(cli, ["certify", "3"]).exit_code == 1
        assert runner.invoke(cli, ["certify", "3", "--t", "1", "--A", "1.5"]).exit_code == 1

    def test_csv_rows(self, runner, out_file):
        result = runner.invoke(cli, ["certify", "3", "--t", "1", "--format", "csv", "--out", str(out_file)])
        assert result.exit_code == 0
        lines = _lines(out_file)
        assert lines[0] == "jprime,j,k,rho"
        assert len(lines) == 8


class TestQueries:
    def test_classify_identity(self, runner, out_file):
        result = runner.invoke(cli, ["classify", *IDENTITY, "--format", "json", "--out", str(out_file)])
        assert result.exit_code == 0
        report = _json(out_file)
        assert report["kind"] == "Boundary"
        assert report["refined"] == "Identity"

    def test_classify_dilation(self, runner, out_file):
        entries = ["2", "0", "0", "0", "1", "0", "0", "0", "0.5"]
        result = runner.invoke(cli, ["classify", *entries, "--out", str(out_file)])
        assert result.exit_code == 0
        lines = _lines(out_file)
        assert lines[0] == "field,value"
        assert lines[1] == "kind,Loxodromic"

    def test_classify_rejects_non_unitary(self, runner):
        entries = ["2", "0", "0", "0", "1", "0", "0", "0", "1"]
        assert runner.invoke(cli, ["classify", *entries, "--form", "ball"]).exit_code == 1

    def test_classify_rejects_short_input(self, runner):
        assert runner.invoke(cli, ["classify", "1", "0", "0"]).exit_code == 1

    def test_cygan(self, runner, out_file):
        result = runner.invoke(cli, ["cygan", "0", "0", "0", "4", "--out", str(out_file)])
        assert result.exit_code == 0
        assert _lines(out_file) == ["cygan", "2.0"]

    def test_cartan(self, runner, out_file):
        coords = ["1", "0", "0", "0", "0", "1", "i", "0", "1"]
        result = runner.invoke(cli, ["cartan", *coords, "--format", "json", "--out", str(out_file)])
        assert result.exit_code == 0
        assert _json(out_file)["cartan"] == pytest.approx(math.pi / 2)

    def test_sphere_of_stabilizer_element(self, runner):
        assert runner.invoke(cli, ["sphere", *IDENTITY]).exit_code == 1


class TestIntersections:
    def test_intersect2(self, runner, out_file):
        result = runner.invoke(cli, ["intersect2", "1/2", "1", "--frac-pi", "--out", str(out_file)])
        assert result.exit_code == 0
        header, row = _lines(out_file)
        assert header == "theta1,theta2,c22,c20,c02,c11,c00"
        values = [float(v) for v in row.split(",")]
        assert values[2:] == pytest.approx([8, 12, 8, -8, -4])

    def test_intersect2_singular_angles(self, runner, out_file):
        result = runner.invoke(cli, ["intersect2", "1/2", "1", "--frac-pi", "--format", "json",
                                     "--out", str(out_file)])
        assert result.exit_code == 0
        assert _json(out_file)["singular_angles"] == pytest.approx([0, math.pi / 2, 3 * math.pi / 2, 2 * math.pi])

    def test_intersect3(self, runner, out_file):
        result = runner.invoke(cli, ["intersect3", "1/2", "1", "3/2", "--frac-pi", "--out", str(out_file)])
        assert result.exit_code == 0
        lines = _lines(out_file)
        assert lines[0] == "eps,tau,sigma,X,Y,psi1,psi2,W"
        assert len(lines) == 5
        for line in lines[1:]:
            assert abs(float(line.split(",")[-1])) < 1e-8

    def test_bad_angle(self, runner):
        assert runner.invoke(cli, ["intersect2", "half", "1"]).exit_code == 1

    def test_foliation_csv(self, runner, out_file):
        result = runner.invoke(cli, ["foliation", "1/4", "3/2", "--frac-pi", "--grid", "8",
                                     "--out", str(out_file)])
        assert result.exit_code == 0
        lines = _lines(out_file)
        assert lines[0] == ",".join(FOLIATION_HEADER)
        assert len({line.split(",")[0] for line in lines[1:]}) == 8

    def test_foliation_json(self, runner, out_file):
        result = runner.invoke(cli, ["foliation", "1/4", "3/2", "--frac-pi", "--grid", "8",
                                     "--format", "json", "--out", str(out_file)])
        assert result.exit_code == 0
        document = _json(out_file)
        assert document["grid"] == 8
        assert len(document["leaves"]) == 8
        assert sum(leaf["singular"] for leaf in document["leaves"]) == 3


class TestFordAndSweep:
    def test_ford(self, runner, out_file):
        result = runner.invoke(cli, ["ford", "6", "--out", str(out_file)])
        assert result.exit_code == 0
        document = _json(out_file)
        assert document["euler"] == 2
        assert len(document["faces"]) == 8

    def test_ford_csv(self, runner, out_file):
        result = runner.invoke(cli, ["ford", "4", "--format", "csv", "--out", str(out_file)])
        assert result.exit_code == 0
        lines = _lines(out_file)
        assert lines[0] == "cell,label,incidences"
        assert sum(line.startswith("face,") for line in lines) == 4

    def test_sweep(self, runner, out_file):
        result = runner.invoke(cli, ["sweep", "3", "--t-min", "0.3", "--t-max", "1.0", "--grid", "8",
                                     "--format", "json", "--out", str(out_file)])
        assert result.exit_code == 0
        table = _json(out_file)
        roots = [c["t"] for c in table["crossings"] if (c["jprime"], c["j"], c["k"]) == (2, 1, 1)]
        assert roots == [pytest.approx(1 / math.sqrt(3), abs=1e-9)]

    def test_sweep_range(self, runner):
        assert runner.invoke(cli, ["sweep", "3", "--t-min", "2", "--t-max", "1"]).exit_code == 1


class TestMain:
    def test_exit_codes(self, tmp_path):
        assert main(["certify", "3", "--t", "1", "--out", str(tmp_path / "a.json")]) == 0
        assert main(["certify", "3", "--t", "0.3", "--out", str(tmp_path / "b.json")]) == 2
        assert main(["certify", "3", "--t", str(1 / math.sqrt(3)), "--out", str(tmp_path / "c.json")]) == 3

    def test_usage_error(self):
        assert main(["no-such-command"]) == 1
