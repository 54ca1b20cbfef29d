import json
import os
import sys
import tempfile
from fractions import Fraction

from dotenv import load_dotenv
from pydantic import ValidationError

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from config import RunConfig, SurfaceConfig, load_run_config, load_settings
from polygon import EmptyPolygonError

load_dotenv()


def test_surfaces():
    print("Testing surface configs...\n")
    p2 = SurfaceConfig.model_validate("P2")
    preset, polygon = p2.resolve()
    assert p2.label == "P2" and polygon.area() == Fraction(1, 2)

    h1 = SurfaceConfig.model_validate({"surface": {"hirzebruch": 1}, "coeffs": ["1", "2"]})
    assert h1.label == "H1"
    assert h1.resolve()[1].area() == 4

    c2 = SurfaceConfig.model_validate("c2")
    assert c2.is_c2 and c2.resolve() == (None, None)

    raw = SurfaceConfig.model_validate({"polygon": {"c": 2, "lower": [[0, 0]], "upper": [[-1, 2]]}})
    assert raw.resolve()[1].area() == 2
    print("✅ Presets, Hirzebruch spec, affine plane and raw polygon")

    for bad in ({}, {"surface": "P2", "polygon": {"c": 1, "upper": [[0, 1]]}}, "P3", {"surface": "P2", "bogus": 1}):
        try:
            SurfaceConfig.model_validate(bad)
        except ValidationError:
            print(f"✅ Refused {bad!r}")
        else:
            raise AssertionError(f"{bad!r} should not validate")

    empty = SurfaceConfig.model_validate({"polygon": {"c": 1, "lower": [[0, 3]], "upper": [[0, 1]]}})
    try:
        empty.resolve()
    except EmptyPolygonError:
        print("✅ Empty raw polygon reported on resolve")


def test_run_config():
    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "run.json")
        with open(path, "w", encoding="utf-8") as handle:
            json.dump({"command": "body", "surface": "P2", "n": 3, "r": 1, "step": "1/4"}, handle)
        config = load_run_config(path, {"n": 4, "r": None})
        assert config.n == 4 and config.r == 1
        assert config.step == Fraction(1, 4)
        assert config.surface.label == "P2"

    assert RunConfig.model_validate({"command": "dh-grid"}).r is None
    vector = RunConfig.model_validate({"command": "semigroup", "vector": {"a": [0, 0], "b": [0, 2]}}).vector
    assert vector == {"a": [0, 0], "b": [0, 2]}
    print("✅ r stays unset unless given, vectors accept the JSON form")

    for bad in ({"command": "nope"}, {"command": "body", "extra_key": 1}, {"command": "mu-table", "n_min": 5, "n_max": 2}):
        try:
            RunConfig.model_validate(bad)
        except ValidationError:
            print(f"✅ Refused {bad}")
        else:
            raise AssertionError(f"{bad} should not validate")


def test_settings():
    saved = os.environ.get("NOBODIES_WORKERS")
    os.environ["NOBODIES_WORKERS"] = "3"
    try:
        assert load_settings().workers == 3
        os.environ["NOBODIES_WORKERS"] = "zero"
        try:
            load_settings()
        except ValidationError:
            print("✅ Bad worker count refused")
    finally:
        if saved is None:
            os.environ.pop("NOBODIES_WORKERS", None)
        else:
            os.environ["NOBODIES_WORKERS"] = saved


if __name__ == "__main__":
    test_surfaces()
    test_run_config()
    test_settings()
