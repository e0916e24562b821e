"""CLI surface: exit codes, JSON reports, artifact determinism."""

import json

import pytest
from click.testing import CliRunner

from hauteur.cli import main

from conftest import fixture_path

LEG2 = str(fixture_path("legendre_x2.json"))
LEG5 = str(fixture_path("legendre_x5.json"))
SILV = str(fixture_path("silverman.json"))


@pytest.fixture()
def runner():
    return CliRunner()


def _last_json(text):
    """The JSON report is the final brace-balanced block of stdout."""
    idx = text.index("{\n")
    return json.loads(text[idx:])


class TestHeight:
    def test_height_at_good_fiber(self, runner):
        res = runner.invoke(main, ["height", LEG2, "--t", "3"])
        assert res.exit_code == 0, res.output
        rep = _last_json(res.output)
        assert rep["command"] == "height"
        out = rep["outcomes"]
        assert out["canonical_height"] > 0
        assert not out["exact_zero"]
        places = {e["place"] for e in out["local_heights"]}
        assert "inf" in places

    def test_height_at_torsion_parameter_is_zero(self, runner):
        res = runner.invoke(main, ["height", LEG2, "--t", "2"])
        assert res.exit_code == 0
        out = _last_json(res.output)["outcomes"]
        assert out["exact_zero"] and out["canonical_height"] == 0.0

    def test_singular_fiber_is_an_error(self, runner):
        res = runner.invoke(main, ["height", LEG2, "--t", "1"])
        assert res.exit_code == 1

    def test_missing_config(self, runner, tmp_path):
        res = runner.invoke(main, ["height", str(tmp_path / "x.json"),
                                   "--t", "3"])
        assert res.exit_code == 1


class TestDivisor:
    def test_silverman_divisor(self, runner, tmp_path):
        csv_path = tmp_path / "d.csv"
        res = runner.invoke(main, ["divisor", SILV, "-o", str(csv_path)])
        assert res.exit_code == 0, res.output
        out = _last_json(res.output)["outcomes"]
        assert out["degree"] == "1/15"
        assert out["degree_equals_height"]
        lines = csv_path.read_text().strip().split("\n")
        assert lines[0].startswith("gamma_kind,")
        assert len(lines) == 1 + out["entries"]


class TestTorsion:
    def test_level_two_csv_and_report(self, runner, tmp_path):
        csv_path = tmp_path / "t.csv"
        res = runner.invoke(main, ["torsion", LEG2, "--n", "2",
                                   "-o", str(csv_path)])
        assert res.exit_code == 0, res.output
        out = _last_json(res.output)["outcomes"]
        assert out["mode"] == "exact" and out["complete"]
        assert out["rational_parameters"] == ["4/3", "4"]
        header = csv_path.read_text().split("\n", 1)[0]
        assert header == "n,re,im,exact_order_flag,multiplicity,rational_certified_flag"


class TestRender:
    def test_byte_deterministic_artifact(self, runner, tmp_path):
        args = ["render", LEG2, "--region", "-3,5,-4,4",
                "--nx", "64", "--ny", "64"]
        p1, p2 = tmp_path / "a.ppm", tmp_path / "b.ppm"
        r1 = runner.invoke(main, args + ["-o", str(p1)])
        r2 = runner.invoke(main, args + ["-o", str(p2)])
        assert r1.exit_code == 0 and r2.exit_code == 0
        assert p1.read_bytes() == p2.read_bytes()
        assert p1.read_bytes().startswith(b"P6\n64 64\n255\n")
        s1 = _last_json(r1.output)["outcomes"]["sha256"]
        s2 = _last_json(r2.output)["outcomes"]["sha256"]
        assert s1 == s2
        assert _last_json(r1.output)["outcomes"]["marked_nodes"] > 0


class TestDensity:
    def test_density_artifacts(self, runner, tmp_path):
        pre = str(tmp_path / "dens")
        res = runner.invoke(main, ["density", LEG2, "--region", "-3,5,-4,4",
                                   "--nx", "48", "--ny", "48",
                                   "--depth", "16", "--threads", "1",
                                   "-o", pre])
        assert res.exit_code == 0, res.output
        out = _last_json(res.output)["outcomes"]
        assert 0.0 < out["mass"] <= 1.3
        assert (tmp_path / "dens.csv").exists()
        assert (tmp_path / "dens.ppm").read_bytes().startswith(b"P6\n48 48\n")


class TestEquidist:
    def test_small_levels_table(self, runner):
        res = runner.invoke(main, ["equidist", LEG2, "--levels", "2,3",
                                   "--region", "-3,5,-4,4",
                                   "--nx", "48", "--ny", "48"])
        assert res.exit_code == 0, res.output
        out = _last_json(res.output)["outcomes"]
        assert [row["level"] for row in out["table"]] == [2, 3]
        assert all(0.0 <= row["discrepancy"] <= 1.0 for row in out["table"])


class TestPair:
    def test_distinct_sections_empty(self, runner):
        res = runner.invoke(main, ["pair", LEG2, LEG5, "--nmax", "2"])
        assert res.exit_code == 0, res.output
        rep = _last_json(res.output)
        assert rep["outcomes"]["empty"]
        assert len(rep["inputs"]) == 2


class TestReferenceCheck:
    def test_good_parameters_pass(self, runner):
        res = runner.invoke(main, ["reference-check", LEG2, "--t", "3,5",
                                   "--primes", "8"])
        assert res.exit_code == 0, res.output
        out = _last_json(res.output)["outcomes"]
        assert out["all_explained"]
