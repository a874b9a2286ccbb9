import math
from enum import Enum
from typing import Any, Optional

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator

from core.exceptions import OracleDiscrepancy
from schemas.physics import AppendixVariant, GeneratorMode, StationaryMethod

FROM_WAVEGUIDE = "from-waveguide"


class Scenario(str, Enum):
    FIG1 = "fig1"
    FIG2 = "fig2"
    FIG3 = "fig3"
    FIG4 = "fig4"
    FIG5 = "fig5"
    FIG6 = "fig6"
    EVOLVE = "evolve"
    STEADY = "steady"
    DISCORD = "discord"
    SWEEP = "sweep"


class OutputFormat(str, Enum):
    CSV = "csv"
    JSON = "json"


def parse_grid(value: Any) -> Optional[list[float]]:
    """
    Grid from a scalar, a list, a comma list "0.1,0.5,1" or "start:stop:count".

    Returns None for an empty value or "from-waveguide".
    """
    if value is None:
        return None
    if isinstance(value, (int, float)):
        return [float(value)]
    if isinstance(value, str):
        text = value.strip()
        if not text or text.lower() in (FROM_WAVEGUIDE, "none"):
            return None
        if ":" in text:
            parts = text.split(":")
            if len(parts) != 3:
                raise ValueError(f"Range grid must read start:stop:count, got {text!r}")
            start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
            if count < 1:
                raise ValueError(f"Grid count must be positive, got {count}")
            return np.linspace(start, stop, count).tolist()
        return [float(part) for part in text.split(",") if part.strip()]
    return [float(v) for v in value]


def _check_grid(name: str, grid: Optional[list[float]]) -> Optional[list[float]]:
    if grid is None:
        return None
    if not grid:
        raise ValueError(f"{name} grid is empty")
    if not all(math.isfinite(v) for v in grid):
        raise ValueError(f"{name} grid has non-finite values")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError(f"{name} grid must be strictly ascending")
    return grid


class ScenarioConfig(BaseModel):
    scenario: Scenario
    mu: Optional[list[float]] = None
    feedback: bool = True
    a: Optional[list[float]] = None
    xi: Optional[list[float]] = None
    mode: GeneratorMode = GeneratorMode.APPENDIX
    variant: AppendixVariant = AppendixVariant.TRACE_PRESERVING
    method: StationaryMethod = StationaryMethod.LONG_TIME
    t_max: Optional[float] = Field(default=None, gt=0.0)
    dt: Optional[float] = Field(default=None, gt=0.0)
    record_stride: Optional[int] = Field(default=None, ge=1)

    # waveguide, used when xi is taken from the geometry
    beta: Optional[list[float]] = None
    d: Optional[list[float]] = None
    propagation_length: Optional[float] = Field(default=None, gt=0.0)
    cos_krd: Optional[float] = None
    sin_krd: Optional[float] = None
    kr: Optional[float] = None

    matrix: Optional[str] = None
    brute_force: bool = False
    output: str = "results"
    format: OutputFormat = OutputFormat.CSV
    workers: Optional[int] = Field(default=None, ge=1)

    @field_validator("mu", "a", "xi", "beta", "d", mode="before")
    @classmethod
    def parse_grids(cls, value: Any) -> Optional[list[float]]:
        return parse_grid(value)

    @field_validator("mu")
    @classmethod
    def check_mu(cls, grid: Optional[list[float]]) -> Optional[list[float]]:
        grid = _check_grid("mu", grid)
        if grid and any(abs(v) > 1.0 for v in grid):
            raise ValueError("mu must lie in [-1, 1]")
        return grid

    @field_validator("a")
    @classmethod
    def check_a(cls, grid: Optional[list[float]]) -> Optional[list[float]]:
        grid = _check_grid("a", grid)
        if grid and any(not 0.0 <= v <= 1.0 for v in grid):
            raise ValueError("a must lie in [0, 1]")
        return grid

    @field_validator("xi")
    @classmethod
    def check_xi(cls, grid: Optional[list[float]]) -> Optional[list[float]]:
        grid = _check_grid("xi", grid)
        if grid and any(v < 0.0 for v in grid):
            raise ValueError("xi must be non-negative")
        return grid

    @field_validator("beta")
    @classmethod
    def check_beta(cls, grid: Optional[list[float]]) -> Optional[list[float]]:
        grid = _check_grid("beta", grid)
        if grid and any(not 0.0 <= v <= 1.0 for v in grid):
            raise ValueError("beta must lie in [0, 1]")
        return grid

    @field_validator("d")
    @classmethod
    def check_d(cls, grid: Optional[list[float]]) -> Optional[list[float]]:
        return _check_grid("d", grid)

    @model_validator(mode="after")
    def check_horizon(self) -> "ScenarioConfig":
        if self.t_max is not None and self.dt is not None and self.t_max < self.dt:
            raise ValueError(f"t_max={self.t_max} shorter than dt={self.dt}")
        return self


class CheckResult(BaseModel):
    name: str
    passed: bool
    value: Optional[float] = None
    expected: Optional[float] = None
    tolerance: Optional[float] = None
    detail: str = ""


class RunReport(BaseModel):
    scenario: str
    parameters: dict[str, Any]
    rows: int = 0
    files: list[str] = []
    max_trace_drift: float = 0.0
    max_hermiticity_correction: float = 0.0
    min_eigenvalue: Optional[float] = None
    positivity_violations: int = 0
    flags: list[str] = []
    discrepancies: list[str] = []
    comparisons: dict[str, float] = {}
    checks: list[CheckResult] = []

    @property
    def exit_code(self) -> int:
        failed = any(not check.passed for check in self.checks)
        return 3 if self.discrepancies or failed else 0

    def raise_for_discrepancies(self) -> None:
        """Raise OracleDiscrepancy if any hard discrepancy or failed check was recorded."""
        failed = [check.name for check in self.checks if not check.passed]
        if self.discrepancies or failed:
            problems = self.discrepancies + [f"check {name} failed" for name in failed]
            raise OracleDiscrepancy(f"{self.scenario}: " + "; ".join(problems))

    def table(self) -> str:
        """Pass/fail table of the validation checks."""
        width = max([len(c.name) for c in self.checks] + [5])
        lines = [f"{'check'.ljust(width)}  result  value"]
        for check in self.checks:
            value = "" if check.value is None else f"{check.value:.6g}"
            lines.append(f"{check.name.ljust(width)}  {'PASS' if check.passed else 'FAIL':6}  {value}")
        return "\n".join(lines)
