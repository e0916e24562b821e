"""Config ingestion: validation paths and error codes."""

import json
from fractions import Fraction

import pytest

from hauteur.config import load_config, parse_config_bytes, parse_rational
from hauteur.errors import ConfigError

from conftest import fixture_path


def _err_code(excinfo):
    return excinfo.value.code


class TestLoading:
    def test_fixture_loads(self):
        cfg = load_config(fixture_path("legendre_x2.json"))
        assert cfg.constant_x and cfg.y_P is None
        assert cfg.var == "t"
        assert len(cfg.digest) == 64
        assert cfg.option("grid", "nx") == 512
        assert cfg.option("grid", "missing", default=7) == 7

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError) as e:
            load_config(tmp_path / "nope.json")
        assert _err_code(e) == "config-missing"

    def test_malformed_json(self):
        with pytest.raises(ConfigError) as e:
            parse_config_bytes(b"{not json")
        assert _err_code(e) == "config-json"

    def test_non_object_root(self):
        with pytest.raises(ConfigError) as e:
            parse_config_bytes(b"[1, 2]")
        assert _err_code(e) == "config-json"

    def test_missing_section(self):
        raw = json.dumps({"curve": {"var": "t", "a4": "t"}}).encode()
        with pytest.raises(ConfigError) as e:
            parse_config_bytes(raw)
        assert _err_code(e) == "config-json"

    def test_singular_curve(self):
        raw = json.dumps({"curve": {"var": "t"},
                          "section": {"x": "2"}}).encode()
        with pytest.raises(ConfigError) as e:
            parse_config_bytes(raw)
        assert _err_code(e) == "config-singular"


class TestSections:
    def test_nonconstant_x_needs_y(self):
        raw = json.dumps({"curve": {"var": "t", "a2": "-(t+1)", "a4": "t"},
                          "section": {"x": "t+2"}}).encode()
        with pytest.raises(ConfigError) as e:
            parse_config_bytes(raw)
        assert _err_code(e) == "config-offcurve"

    def test_off_curve_pair_rejected(self):
        raw = json.dumps({"curve": {"var": "t", "a2": "-(t+1)", "a4": "t"},
                          "section": {"x": "t", "y": "1"}}).encode()
        with pytest.raises(ConfigError) as e:
            parse_config_bytes(raw)
        assert _err_code(e) == "config-offcurve"

    def test_on_curve_pair_accepted(self):
        # x = t, y = 0 satisfies y^2 = x^3 - (t+1)x^2 + tx identically
        raw = json.dumps({"curve": {"var": "t", "a2": "-(t+1)", "a4": "t"},
                          "section": {"x": "t", "y": "0"}}).encode()
        cfg = parse_config_bytes(raw)
        assert not cfg.constant_x
        assert cfg.y_P is not None


class TestRationals:
    def test_parse_rational(self):
        assert parse_rational("3/2") == Fraction(3, 2)
        assert parse_rational("-7") == Fraction(-7)

    def test_parse_rational_rejects_garbage(self):
        with pytest.raises(ConfigError):
            parse_rational("two")
        with pytest.raises(ConfigError):
            parse_rational("1/0")
