"""
Svetlichny Nonlocality Service
FastAPI server evaluating four-qubit Svetlichny values and spacetime scenarios
"""

import time
from typing import Dict, List, Optional

import structlog
from fastapi import Depends, FastAPI, Header, HTTPException, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import __version__
from .config import configure_logging, settings
from .errors import NonlocalityError
from .oracle import OracleConfig, maximize, svetlichny_value
from .qstate import DensityOperator
from .spacetime import (
    SchwarzschildScenario,
    SdSScenario,
    schwarzschild_closed_form,
    sds_closed_form,
    svetlichny_schwarzschild,
    svetlichny_sds,
)

configure_logging()

# Setup structured logging
logger = structlog.get_logger()

# Initialize FastAPI app
app = FastAPI(
    title="Svetlichny Nonlocality Service",
    description="Genuine four-partite nonlocality of GHZ states in curved spacetime",
    version=__version__,
)

# CORS configuration
app.add_middleware(
    CORSMiddleware,
    allow_origins=settings.ALLOWED_ORIGINS,
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

# Track service stats
service_stats = {
    "start_time": time.time(),
    "total_requests": 0,
    "oracle_runs": 0,
}


# Pydantic Models
class DensityPayload(BaseModel):
    dim: int = 16
    re: List[List[float]]
    im: Optional[List[List[float]]] = None

    def to_operator(self) -> DensityOperator:
        payload = self.model_dump(exclude_none=True)
        return DensityOperator.from_json(payload)


class SvetlichnyResponse(BaseModel):
    value: float
    measure: float
    branch: str  # "coherence" | "diagonal" | "numeric"
    floor: Optional[float] = None
    certificate: Optional[Dict[str, List[float]]] = None
    pair_modulus: Optional[float] = None
    signed_sum: Optional[float] = None
    thermo: Optional[Dict[str, float]] = None


class OracleRequest(BaseModel):
    density: DensityPayload
    config: Optional[OracleConfig] = None


class OracleResponse(BaseModel):
    value: float
    settings: Dict[str, List[float]]
    angles: Dict[str, float]
    iterations_used: int
    converged: bool
    starts: int


class HealthResponse(BaseModel):
    status: str
    version: str
    total_requests: int
    oracle_runs: int
    uptime_seconds: int


# Authentication Dependency
async def verify_service_token(authorization: Optional[str] = Header(None)):
    """Verify the bearer token when SERVICE_SECRET is configured"""
    if not settings.SERVICE_SECRET:
        return True

    if not authorization:
        logger.warning("request_missing_auth")
        raise HTTPException(401, "Missing Authorization header")

    token = authorization.replace("Bearer ", "")
    if token != settings.SERVICE_SECRET:
        logger.warning("request_invalid_token")
        raise HTTPException(401, "Invalid service token")

    return True


@app.exception_handler(NonlocalityError)
async def nonlocality_error_handler(request: Request, exc: NonlocalityError):
    logger.warning(
        "request_rejected",
        path=request.url.path,
        error=str(exc),
        error_type=type(exc).__name__,
    )
    return JSONResponse(
        status_code=422,
        content={"detail": str(exc), "error_type": type(exc).__name__},
    )


# Routes
@app.get("/health", response_model=HealthResponse)
async def health():
    """Health check endpoint"""
    return HealthResponse(
        status="healthy",
        version=__version__,
        total_requests=service_stats["total_requests"],
        oracle_runs=service_stats["oracle_runs"],
        uptime_seconds=int(time.time() - service_stats["start_time"]),
    )


@app.post("/svetlichny", response_model=SvetlichnyResponse)
def evaluate_density(
    request: DensityPayload,
    authenticated: bool = Depends(verify_service_token),
):
    """
    Maximal Svetlichny value of a density operator
    X-type inputs use the closed form, anything else runs the numeric oracle
    """
    service_stats["total_requests"] += 1
    result = svetlichny_value(request.to_operator())
    if result.branch.value == "numeric":
        service_stats["oracle_runs"] += 1

    logger.info("svetlichny_evaluated", value=result.value, branch=result.branch.value)
    return SvetlichnyResponse(**result.to_json())


@app.post("/scenario/schwarzschild", response_model=SvetlichnyResponse)
def evaluate_schwarzschild(
    scenario: SchwarzschildScenario,
    authenticated: bool = Depends(verify_service_token),
):
    """Closed-form value for a GHZ state with n parties near a Schwarzschild horizon"""
    service_stats["total_requests"] += 1
    result = svetlichny_schwarzschild(scenario)
    pair, signed_sum = schwarzschild_closed_form(scenario)

    logger.info(
        "schwarzschild_evaluated",
        n=scenario.n,
        p=scenario.p,
        q=scenario.q,
        value=result.value,
    )
    return SvetlichnyResponse(**result.to_json(), pair_modulus=pair, signed_sum=signed_sum)


@app.post("/scenario/sds", response_model=SvetlichnyResponse)
def evaluate_sds(
    scenario: SdSScenario,
    authenticated: bool = Depends(verify_service_token),
):
    """Closed-form value for a GHZ state split between the two SdS horizons"""
    service_stats["total_requests"] += 1
    result = svetlichny_sds(scenario)
    pair, signed_sum = sds_closed_form(scenario)

    logger.info("sds_evaluated", n=scenario.n, m=scenario.m, value=result.value)
    return SvetlichnyResponse(
        **result.to_json(),
        pair_modulus=pair,
        signed_sum=signed_sum,
        thermo=scenario.thermo().to_json(),
    )


@app.post("/oracle", response_model=OracleResponse)
def run_oracle(
    request: OracleRequest,
    authenticated: bool = Depends(verify_service_token),
):
    """Numeric maximisation with a replayable certificate"""
    service_stats["total_requests"] += 1
    service_stats["oracle_runs"] += 1

    try:
        outcome = maximize(request.density.to_operator(), request.config)
    except NonlocalityError:
        raise
    except Exception as e:
        logger.error("oracle_request_failed", error=str(e))
        raise HTTPException(500, f"Oracle failed: {str(e)}")

    return OracleResponse(**outcome.to_json())


if __name__ == "__main__":
    import uvicorn

    uvicorn.run(
        "nonlocality_service.main:app",
        host="0.0.0.0",
        port=settings.PORT,
        reload=settings.DEBUG,
        log_level=settings.LOG_LEVEL.lower(),
    )
