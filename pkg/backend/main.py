import logging
from contextlib import asynccontextmanager

from dotenv import load_dotenv
from fastapi import FastAPI, Request

from core.config import get_settings
from models.waveguide import default_rates
from routers.analysis import router as analysis_router

# Load environment variables
load_dotenv()

logging.basicConfig(
    level=get_settings().log_level,
    format="%(asctime)s - %(levelname)s - %(message)s"
)
logger = logging.getLogger(__name__)


@asynccontextmanager
async def lifespan(app: FastAPI):
    rates = default_rates()
    logger.info(f"Waveguide rates: xi={rates.xi:.6f}, gamma={rates.gamma:.6f}")
    yield
    logger.info("Shutting down...")


app = FastAPI(
    title="Plasmon Feedback Discord Lab API",
    description="Stationary states and quantum discord of feedback-controlled plasmonic qubit pairs",
    version="1.0.0",
    lifespan=lifespan
)


@app.middleware("http")
async def log_requests(request: Request, call_next):
    logger.info(f"➡️  {request.method} {request.url.path}")
    response = await call_next(request)
    logger.info(f"⬅️  {request.method} {request.url.path} - Status: {response.status_code}")
    return response


app.include_router(analysis_router, prefix="/api", tags=["analysis"])


@app.get("/api/health")
async def health_check():
    logger.info("Health check requested")
    return {"status": "healthy"}
