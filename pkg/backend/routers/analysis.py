import logging
from enum import Enum
from typing import Optional

from fastapi import APIRouter, HTTPException, Query

from core.exceptions import LabError
from core.linalg import DensityMatrix
from models.waveguide import default_rates
from schemas.analysis import (
    AnalyticResponse,
    CorrelationResponse,
    DiscordRequest,
    DiscordResponse,
    MatrixPayload,
    StationaryResponse,
)
from schemas.physics import GeneratorMode, WernerParams
from schemas.scenario import Scenario, ScenarioConfig
from services.analytic_service import f1_correlations, f1_stationary, f2_correlations, f2_stationary
from services.discord_service import CorrelationTriple, brute_force_discord, quantum_discord
from services.scenario_service import scenario_service

logger = logging.getLogger(__name__)

router = APIRouter()


class Scheme(str, Enum):
    F1 = "f1"
    F2 = "f2"


def _correlations(triple: CorrelationTriple) -> CorrelationResponse:
    return CorrelationResponse(
        total=triple.total,
        classical=triple.classical,
        discord=triple.discord,
        theta=triple.argmin.theta if triple.argmin else None,
        phi=triple.argmin.phi if triple.argmin else None,
    )


@router.post("/discord", response_model=DiscordResponse)
def discord(request: DiscordRequest):
    """Total, classical and quantum correlations of a two-qubit X state."""
    logger.info(f"🔄 [DISCORD] Request (brute_force={request.brute_force})")
    try:
        rho = DensityMatrix.from_payload(request.matrix.model_dump())
        triple = quantum_discord(rho)
        oracle = brute_force_discord(rho, resolution=request.resolution) if request.brute_force else None
    except (LabError, ValueError) as e:
        logger.warning(f"❌ [DISCORD] Rejected: {e}")
        raise HTTPException(status_code=400, detail=str(e))
    return DiscordResponse(**_correlations(triple).model_dump(), brute_force=oracle)


@router.get("/stationary", response_model=StationaryResponse)
def stationary(
    mu: Optional[float] = Query(None, ge=-1.0, le=1.0),
    a: float = Query(1.0, ge=0.0, le=1.0),
    xi: Optional[float] = Query(None, ge=0.0, description="Defaults to the waveguide rate"),
    mode: GeneratorMode = Query(GeneratorMode.APPENDIX),
    feedback: bool = Query(True),
):
    """Stationary state reached from Werner(a)."""
    logger.info(f"🔄 [DYNAMICS] Stationary request mu={mu} a={a} xi={xi} mode={mode.value}")
    try:
        cfg = ScenarioConfig(scenario=Scenario.STEADY, mode=mode, feedback=feedback)
        point = scenario_service.steady_point(cfg, mu if feedback else None, a, xi=xi)
        triple = quantum_discord(point.state)
    except LabError as e:
        logger.warning(f"❌ [DYNAMICS] Stationary search failed: {e}")
        raise HTTPException(status_code=400, detail=str(e))
    return StationaryResponse(
        mu=point.mu,
        a=a,
        xi=point.rates.xi,
        mode=mode,
        state=MatrixPayload(**point.state.to_payload()),
        residual=point.residual,
        null_space_dimension=point.null_space_dimension,
        correlations=_correlations(triple),
    )


@router.get("/analytic/{scheme}", response_model=AnalyticResponse)
def analytic(
    scheme: Scheme,
    a: float = Query(1.0, ge=0.0, le=1.0),
    xi: Optional[float] = Query(None, gt=0.0, description="F2 only; defaults to the waveguide rate"),
):
    """Closed-form stationary matrix and correlations against the numeric pipeline."""
    w = WernerParams(a=a)
    try:
        if scheme is Scheme.F1:
            state = f1_stationary(w)
            result = f1_correlations(w)
        else:
            xi = xi if xi is not None else default_rates().xi
            state = f2_stationary(w, xi)
            result = f2_correlations(w, xi)
    except LabError as e:
        logger.warning(f"❌ [ANALYTIC] {scheme.value} failed: {e}")
        raise HTTPException(status_code=400, detail=str(e))
    logger.info(f"✅ [ANALYTIC] {scheme.value} a={a}: deviation {result.deviation:.3e}")
    return AnalyticResponse(
        scheme=result.scheme,
        a=a,
        xi=result.xi,
        state=MatrixPayload(**state.to_payload()),
        closed_form=_correlations(result.triple),
        numeric=_correlations(result.numeric),
        deviation=result.deviation,
        agrees=result.agrees,
    )
