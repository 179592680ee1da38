import math
import os
from pathlib import Path

import pytest

import heightlab

DATA = Path(os.environ.get("HEIGHTLAB_DATA", Path(__file__).resolve().parents[2] / "data")) / "families"
SEED7 = str(DATA / "seed7.json")


def test_dynamical_degree():
    assert heightlab.dynamical_degree([1, 2, 3]) == pytest.approx(9 + 4 * math.sqrt(5), rel=1e-14)
    assert heightlab.dynamical_degree([1, 2]) == 1.0


def test_lambda_report():
    rep = heightlab.run("lambda", SEED7)
    assert rep["salem_factor"]["value"] == "x^2 - 18*x + 1"
    assert rep["lambda_equal_exactly"]


def test_family_orbits_and_heights():
    fam = heightlab.Family(SEED7)
    assert fam.num_sections == 3
    assert fam.orbit_degrees(1, "+", 2) == [[0, 0, 0], [1, 3, 9], [24, 64, 168]]
    h = fam.canonical_height(0, "+", 2)
    assert h["value"] == 0.0 and h["period"] == 2
    assert fam.classify(0, max_n=2) == "periodic(2)"


def test_green_potential_decay():
    fam = heightlab.Family(SEED7)
    g = fam.green_potential(1, 0.4 - 0.3j, "+", 12)
    assert not g["dropped"]
    assert g["fitted_ratio"] * fam.lambda_ == pytest.approx(1, abs=0.1)


def test_errors():
    with pytest.raises(heightlab.RunError) as err:
        heightlab.run("lambda", str(DATA / "missing.json"))
    assert err.value.exit_code == 2
    with pytest.raises(ValueError):
        heightlab.Family(str(DATA / "word12.json"))
