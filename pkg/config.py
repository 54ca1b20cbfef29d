import json
import logging
import os
from fractions import Fraction
from typing import Any, Dict, List, Literal, Optional, Tuple, Union

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, PositiveInt, model_validator

from polygon import NewtonPolygon, SurfacePreset, hirzebruch, preset_from_label, TABLE_RAYS
from ratcore import QQ

# Configure module logger
logger = logging.getLogger(__name__)


class Settings(BaseModel):
    model_config = ConfigDict(frozen=True)

    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"] = "INFO"
    workers: PositiveInt = 1
    output_dir: str = "."
    run_slow: bool = False


def load_settings() -> Settings:
    """Reads NOBODIES_* variables (after loading .env)."""
    load_dotenv()
    values: Dict[str, Any] = {}
    for field, var in (("log_level", "NOBODIES_LOG_LEVEL"), ("workers", "NOBODIES_WORKERS"),
                       ("output_dir", "NOBODIES_OUTPUT_DIR"), ("run_slow", "NOBODIES_RUN_SLOW")):
        raw = os.getenv(var)
        if raw is not None and raw != "":
            values[field] = raw.upper() if field == "log_level" else raw
    return Settings(**values)


class HirzebruchSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    hirzebruch: int = Field(ge=0)
    mirrored: bool = False


class PolygonSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True, arbitrary_types_allowed=True)

    c: Optional[QQ] = None
    lower: List[Tuple[QQ, QQ]] = [(0, 0)]
    upper: List[Tuple[QQ, QQ]] = []


class SurfaceConfig(BaseModel):
    """
    One of: {"surface": "P2" | "P1xP1" | "H<e>" | {"hirzebruch": e, "mirrored": false}, "coeffs": [...]},
    {"polygon": {"c": ..., "lower": [...], "upper": [...]}}, or "c2" for the affine plane.
    """
    model_config = ConfigDict(extra="forbid", frozen=True, arbitrary_types_allowed=True)

    surface: Optional[Union[str, HirzebruchSpec]] = None
    coeffs: Optional[Tuple[QQ, ...]] = None
    polygon: Optional[PolygonSpec] = None

    @model_validator(mode="before")
    @classmethod
    def _accept_plain_label(cls, data):
        if isinstance(data, str):
            return {"surface": data}
        return data

    @model_validator(mode="after")
    def _one_source(self):
        if (self.surface is None) == (self.polygon is None):
            raise ValueError("Give exactly one of 'surface' or 'polygon'")
        if self.polygon is not None and self.coeffs is not None:
            raise ValueError("'coeffs' only applies to preset surfaces")
        if self.is_c2 and self.coeffs is not None:
            raise ValueError("The affine plane takes no coefficients")
        if isinstance(self.surface, str) and not self.is_c2:
            preset_from_label(self.surface)
        return self

    @property
    def is_c2(self) -> bool:
        return isinstance(self.surface, str) and self.surface.lower() == "c2"

    @property
    def label(self) -> str:
        if self.is_c2:
            return "c2"
        if self.polygon is not None:
            return "polygon"
        return self.preset().label

    def preset(self) -> Optional[SurfacePreset]:
        if self.surface is None or self.is_c2:
            return None
        if isinstance(self.surface, HirzebruchSpec):
            return hirzebruch(self.surface.hirzebruch, self.surface.mirrored)
        return preset_from_label(self.surface)

    def resolve(self) -> Tuple[Optional[SurfacePreset], Optional[NewtonPolygon]]:
        if self.is_c2:
            return None, None
        if self.polygon is not None:
            spec = self.polygon
            return None, NewtonPolygon.build(spec.c, spec.lower, spec.upper)
        preset = self.preset()
        coeffs = self.coeffs if self.coeffs is not None else TABLE_RAYS.get(preset.label, (1,) * preset.picard_rank)
        return preset, preset.polygon(coeffs)


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True, arbitrary_types_allowed=True)

    command: Literal["mu-table", "body", "semigroup", "dh-grid", "check"]
    surface: Optional[SurfaceConfig] = None
    surfaces: List[SurfaceConfig] = []
    n: Optional[PositiveInt] = None
    n_min: PositiveInt = 2
    n_max: PositiveInt = 8
    r: Optional[int] = None
    format: Literal["json", "csv"] = "json"
    output: Optional[str] = None
    vertices: bool = False
    volume: bool = False
    approx: bool = False
    # semigroup subcommand
    action: Literal["enumerate", "decompose", "member"] = "enumerate"
    vector: Optional[Union[List[int], Dict[str, List[int]]]] = None
    box: Optional[Tuple[int, int]] = None
    graded: Optional[Tuple[int, int]] = None
    # dh-grid subcommand
    resolution: PositiveInt = 5
    step: QQ = Fraction(1, 2)
    # check subcommand
    suite: Optional[str] = None

    @model_validator(mode="after")
    def _ranges(self):
        if self.n_min > self.n_max:
            raise ValueError(f"n_min={self.n_min} exceeds n_max={self.n_max}")
        return self


def load_run_config(path: Optional[str], overrides: Dict[str, Any]) -> RunConfig:
    """File values first, then every override that is not None."""
    data: Dict[str, Any] = {}
    if path:
        with open(path, "r", encoding="utf-8") as handle:
            data = json.load(handle)
        logger.info(f"Loaded run config from {path}")
    for key, value in overrides.items():
        if value is not None:
            data[key] = value
    return RunConfig.model_validate(data)
