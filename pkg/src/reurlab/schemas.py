"""Validated request payloads shared by the CLI and the HTTP service."""

from __future__ import annotations

import re
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

DiscreteModelName = Literal["uniform", "boltzmann", "moments"]


class VerifyRequest(BaseModel):
    """Random-instance sweep of the discrete uncertainty relations."""

    model_config = ConfigDict(extra="forbid")

    seed: int = Field(0, ge=0)
    instances: int = Field(1000, ge=1, le=100000)
    dims: list[int] = Field(default_factory=lambda: [2, 3, 4, 5, 6, 7, 8])
    models: DiscreteModelName = "uniform"
    tolerance: float = Field(1e-9, gt=0.0, le=1.0)
    flip_entropy_sign: bool = False

    @field_validator("dims")
    @classmethod
    def _check_dims(cls, dims: list[int]) -> list[int]:
        if not dims:
            raise ValueError("dims must be nonempty")
        for d in dims:
            if not 2 <= d <= 16:
                raise ValueError(f"dimension {d} outside the supported range 2..16")
        return dims


class ContinuousRequest(BaseModel):
    """Position-momentum pipeline on an adaptive symmetric grid."""

    model_config = ConfigDict(extra="forbid")

    preset: Literal["gaussian", "squeezed", "hermite", "gaussian_superposition"] = (
        "gaussian"
    )
    order: int = Field(1, ge=0, le=48)
    alpha: float = Field(4.0, gt=0.0, le=64.0)
    separation: float = Field(2.0, ge=0.0, le=16.0)
    grid_points: int = Field(4096, ge=256, le=65536)
    tolerance: float = Field(1e-5, gt=0.0, le=1.0)

    @model_validator(mode="before")
    @classmethod
    def _normalize_preset(cls, data):
        # accept hyphenated spellings and "hermite-<n>" shorthand
        if isinstance(data, dict) and isinstance(data.get("preset"), str):
            name = data["preset"].replace("-", "_")
            match = re.fullmatch(r"hermite_(\d+)", name)
            if match:
                data = dict(data)
                data["preset"] = "hermite"
                data.setdefault("order", int(match.group(1)))
            elif name != data["preset"]:
                data = dict(data)
                data["preset"] = name
        return data

    @field_validator("grid_points")
    @classmethod
    def _check_power_of_two(cls, n: int) -> int:
        if n & (n - 1):
            raise ValueError("grid_points must be a power of two")
        return n


class AngularRequest(BaseModel):
    """Angle / angular-momentum sweep over a list of spin values J."""

    model_config = ConfigDict(extra="forbid")

    j_values: list[float] = Field(default_factory=lambda: [2.0, 4.0, 8.0, 16.0, 32.0])
    state: Literal["phase", "mixed"] = "phase"
    m_sigma: float = Field(3.0, gt=0.0, le=64.0)
    theta0: float = Field(0.0, ge=0.0, lt=6.2831853071795865)
    angle_model: Literal["uniform", "von_mises"] = "von_mises"
    momentum_model: Literal["uniform", "gaussian_moments"] = "gaussian_moments"
    grid_points: int = Field(4096, ge=256, le=65536)
    scale_r: list[float] = Field(default_factory=lambda: [1.0, 10.0])

    @field_validator("j_values")
    @classmethod
    def _check_j_values(cls, js: list[float]) -> list[float]:
        if not js:
            raise ValueError("j_values must be nonempty")
        for j in js:
            if abs(2 * j - round(2 * j)) > 1e-12:
                raise ValueError(f"J must be integer or half-integer, got {j}")
            if not 0.5 <= j <= 64:
                raise ValueError(f"J={j} outside the supported range 0.5..64")
        if any(b <= a for a, b in zip(js, js[1:])):
            raise ValueError("j_values must be strictly increasing")
        return js

    @field_validator("scale_r")
    @classmethod
    def _check_scales(cls, scales: list[float]) -> list[float]:
        if not scales:
            raise ValueError("scale_r must be nonempty")
        for s in scales:
            if not 1e-6 <= s <= 1e6:
                raise ValueError(f"scale_r entry {s} outside 1e-6..1e6")
        return scales

    @field_validator("grid_points")
    @classmethod
    def _check_power_of_two(cls, n: int) -> int:
        if n & (n - 1):
            raise ValueError("grid_points must be a power of two")
        return n


class ConstraintSpec(BaseModel):
    """One moment constraint; target defaults to the data's own moment."""

    model_config = ConfigDict(extra="forbid")

    kind: Literal["power", "indicator", "cos", "sin"]
    degree: int = Field(1, ge=1, le=8)
    at: float = 0.0
    target: float | None = None


class DensityPayload(BaseModel):
    """Inline gridded density, mirroring the JSON ingestion format."""

    model_config = ConfigDict(extra="forbid")

    grid_start: float
    spacing: float = Field(..., gt=0.0)
    topology: Literal["line", "circle"]
    values: list[float] = Field(..., min_length=2)


class MaxentFitRequest(BaseModel):
    """Fit one model family to a histogram, a density, or a circular moment."""

    model_config = ConfigDict(extra="forbid")

    family: Literal["uniform", "boltzmann", "moments", "gaussian", "von_mises"]
    histogram: list[tuple[float, float]] | None = None
    density: DensityPayload | None = None
    moment_modulus: float | None = Field(None, ge=0.0)
    moment_angle: float = 0.0
    constraints: list[ConstraintSpec] = Field(default_factory=list)

    @model_validator(mode="after")
    def _check_source(self) -> "MaxentFitRequest":
        sources = [
            s
            for s in (self.histogram, self.density, self.moment_modulus)
            if s is not None
        ]
        if len(sources) != 1:
            raise ValueError(
                "provide exactly one of histogram, density, moment_modulus"
            )
        if self.moment_modulus is not None and self.family != "von_mises":
            raise ValueError("moment_modulus input applies to von_mises only")
        if self.family == "moments" and not self.constraints:
            raise ValueError("the moments family needs at least one constraint")
        if self.family != "moments" and self.constraints:
            raise ValueError("constraints apply to the moments family only")
        return self


REQUEST_TYPES = {
    "verify": VerifyRequest,
    "continuous": ContinuousRequest,
    "angular": AngularRequest,
    "maxent-fit": MaxentFitRequest,
}
