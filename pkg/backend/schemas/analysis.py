from typing import Optional

from pydantic import BaseModel, Field

from schemas.physics import GeneratorMode


class MatrixPayload(BaseModel):
    re: list[list[float]]
    im: Optional[list[list[float]]] = None


class DiscordRequest(BaseModel):
    matrix: MatrixPayload
    brute_force: bool = False
    resolution: Optional[int] = Field(default=None, ge=4, le=400)


class CorrelationResponse(BaseModel):
    total: float
    classical: float
    discord: float
    theta: Optional[float] = None
    phi: Optional[float] = None


class DiscordResponse(CorrelationResponse):
    brute_force: Optional[float] = None


class StationaryResponse(BaseModel):
    mu: Optional[float]
    a: float
    xi: float
    mode: GeneratorMode
    state: MatrixPayload
    residual: float
    null_space_dimension: int
    correlations: CorrelationResponse


class AnalyticResponse(BaseModel):
    scheme: str
    a: float
    xi: Optional[float]
    state: MatrixPayload
    closed_form: CorrelationResponse
    numeric: CorrelationResponse
    deviation: float
    agrees: bool
