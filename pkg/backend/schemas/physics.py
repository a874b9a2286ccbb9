from enum import Enum
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from core.config import get_settings
from core.linalg import DensityMatrix


class GeneratorMode(str, Enum):
    FULL = "full"
    APPENDIX = "appendix"


class AppendixVariant(str, Enum):
    TRACE_PRESERVING = "trace_preserving"
    PRINTED = "printed"


class StationaryMethod(str, Enum):
    LONG_TIME = "long_time"
    NULL_SPACE = "null_space"


class WaveguideParams(BaseModel):
    """V-groove geometry and coupling; lengths in meters."""

    beta: float = Field(ge=0.0, le=1.0)
    spontaneous_rate: float = Field(default=1.0, ge=0.0)
    separation: float
    propagation_length: float
    groove_height: float = 150e-9
    cos_krd: float
    sin_krd: float
    lamb_shift: float = 0.0

    @classmethod
    def from_settings(cls, **overrides: Any) -> "WaveguideParams":
        settings = get_settings()
        values = {
            "beta": settings.BETA,
            "spontaneous_rate": settings.SPONTANEOUS_RATE,
            "separation": settings.QUBIT_SEPARATION,
            "propagation_length": settings.PROPAGATION_LENGTH,
            "groove_height": settings.GROOVE_HEIGHT,
            "cos_krd": settings.COS_KRD,
            "sin_krd": settings.SIN_KRD,
            "lamb_shift": settings.LAMB_SHIFT,
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


class FeedbackSpec(BaseModel):
    mu: float = Field(default=0.0, ge=-1.0, le=1.0)
    enabled: bool = True

    @classmethod
    def disabled(cls) -> "FeedbackSpec":
        return cls(mu=0.0, enabled=False)


class IntegratorConfig(BaseModel):
    dt: float = Field(default=1e-3, gt=0.0)
    t_max: float = 20.0
    record_stride: int = Field(default=1, ge=1)
    mode: GeneratorMode = GeneratorMode.APPENDIX

    @model_validator(mode="after")
    def check_horizon(self) -> "IntegratorConfig":
        if self.t_max < self.dt:
            raise ValueError(f"t_max={self.t_max} shorter than dt={self.dt}")
        return self

    @property
    def steps(self) -> int:
        return int(round(self.t_max / self.dt))


class WernerParams(BaseModel):
    a: float = Field(ge=0.0, le=1.0)

    def to_density_matrix(self) -> DensityMatrix:
        return DensityMatrix.werner(self.a)


class XInitial(BaseModel):
    """Independent entries of an X-state initial condition (rho32, rho41 by Hermiticity)."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    rho11: float
    rho22: float
    rho33: float
    rho44: float
    rho14: complex = 0j
    rho23: complex = 0j

    @field_validator("rho14", "rho23", mode="before")
    @classmethod
    def coerce_complex(cls, value: Any) -> complex:
        if isinstance(value, dict):
            return complex(value.get("re", 0.0), value.get("im", 0.0))
        return complex(value)

    @model_validator(mode="after")
    def check_state(self) -> "XInitial":
        self.to_density_matrix()
        return self

    @classmethod
    def from_density_matrix(cls, rho: DensityMatrix) -> "XInitial":
        return cls(
            rho11=rho.entry(1, 1).real,
            rho22=rho.entry(2, 2).real,
            rho33=rho.entry(3, 3).real,
            rho44=rho.entry(4, 4).real,
            rho14=rho.entry(1, 4),
            rho23=rho.entry(2, 3),
        )

    @classmethod
    def from_werner(cls, a: float) -> "XInitial":
        return cls.from_density_matrix(DensityMatrix.werner(a))

    def to_density_matrix(self) -> DensityMatrix:
        m = np.diag([self.rho11, self.rho22, self.rho33, self.rho44]).astype(complex)
        m[0, 3], m[3, 0] = self.rho14, np.conj(self.rho14)
        m[1, 2], m[2, 1] = self.rho23, np.conj(self.rho23)
        return DensityMatrix(m)

    @property
    def kappa1(self) -> float:
        return self.rho22 + self.rho33

    @property
    def kappa2(self) -> float:
        return 2.0 * self.rho23.real

    @property
    def kappa3(self) -> float:
        return self.rho11 + self.rho44
