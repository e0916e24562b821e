"""Shared fixtures: the three standard surfaces and fixture paths."""

import json
from fractions import Fraction
from pathlib import Path

import pytest

from hauteur.kernel import RatFunc
from hauteur.weierstrass import curve_from_spec

FIXTURE_DIR = Path(__file__).resolve().parent.parent / "src" / "hauteur" / "fixtures"


def fixture_path(name):
    return FIXTURE_DIR / name


def load_fixture_curve(name):
    spec = json.loads(fixture_path(name).read_text())
    return curve_from_spec(spec["curve"])


@pytest.fixture(scope="session")
def legendre():
    """y^2 = x(x-1)(x-t) in the expanded Weierstrass form."""
    return curve_from_spec({"var": "t", "a2": "-(t+1)", "a4": "t"})


@pytest.fixture(scope="session")
def silverman_curve():
    return curve_from_spec(
        {"var": "t", "a1": "1/t", "a2": "2/t", "a3": "1/t"})


@pytest.fixture(scope="session")
def x2():
    return RatFunc.constant(Fraction(2))


@pytest.fixture(scope="session")
def x5():
    return RatFunc.constant(Fraction(5))
