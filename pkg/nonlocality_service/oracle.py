"""
Numeric Svetlichny Oracle - Multistart maximisation over measurement angles
Searches the twelve polar/azimuthal angles of parties 1, 2 and 4; the third
party's directions are optimised in closed form at every evaluation
"""

import time
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
import structlog
from pydantic import BaseModel, Field

from .config import settings
from .errors import DimensionMismatch, NotXType
from .qstate import (
    CorrelationTensor,
    DensityOperator,
    MatrixLike,
    classify_xtype,
    pauli_tensor,
)
from .search import LocalResult, get_local_search
from .svetlichny import (
    S_MAX,
    Branch,
    MeasurementSettings,
    SvetlichnyResult,
    coherence_angles,
    coherence_certificate,
    diagonal_certificate,
    direction,
    expectation,
    lambda_vectors,
    nonlocality_measure,
    settings_from_angles,
    svetlichny_xtype,
)

logger = structlog.get_logger()


ANGLE_COUNT = 12
TWO_PI = 2 * np.pi
DELTA_BOUND = 32.0


# =========================================================================== #
# Angle parametrisation                                                       #
# =========================================================================== #


@dataclass(frozen=True, eq=False)
class AngleVector:
    """
    alpha1..alpha6 and beta1..beta6, wrapped into [0, 2pi)

    (alpha1, alpha2) -> a, (beta1, beta2) -> a', (alpha3, alpha4) -> b,
    (beta3, beta4) -> b', (alpha5, alpha6) -> d, (beta5, beta6) -> d'
    with the odd-numbered angle polar and the even-numbered one azimuthal.
    """

    angles: np.ndarray

    def __post_init__(self):
        raw = np.asarray(self.angles, dtype=float)
        if raw.shape != (ANGLE_COUNT,):
            raise DimensionMismatch(f"Expected {ANGLE_COUNT} angles, got shape {raw.shape}")
        if not np.all(np.isfinite(raw)):
            raise DimensionMismatch("Angles must be finite")
        wrapped = np.mod(raw, TWO_PI)
        wrapped.setflags(write=False)
        object.__setattr__(self, "angles", wrapped)

    @property
    def alphas(self) -> np.ndarray:
        return self.angles[:6]

    @property
    def betas(self) -> np.ndarray:
        return self.angles[6:]

    def to_dict(self) -> Dict[str, float]:
        names = [f"alpha{k}" for k in range(1, 7)] + [f"beta{k}" for k in range(1, 7)]
        return dict(zip(names, self.angles.tolist()))

    @classmethod
    def from_dict(cls, payload: Dict[str, float]) -> "AngleVector":
        return cls(
            [payload[f"alpha{k}"] for k in range(1, 7)] + [payload[f"beta{k}"] for k in range(1, 7)]
        )


AngleLike = Union[AngleVector, np.ndarray]


def _angle_array(v: AngleLike) -> np.ndarray:
    return v.angles if isinstance(v, AngleVector) else np.asarray(v, dtype=float)


def angles_to_vectors(v: AngleLike) -> Tuple[np.ndarray, ...]:
    """(a, a', b, b', d, d') for an angle vector"""
    angles = _angle_array(v)
    alphas, betas = angles[..., :6], angles[..., 6:]
    a, b, d = np.moveaxis(direction(alphas[..., 0::2], alphas[..., 1::2]), -2, 0)
    a_prime, b_prime, d_prime = np.moveaxis(direction(betas[..., 0::2], betas[..., 1::2]), -2, 0)
    return a, a_prime, b, b_prime, d, d_prime


def _objective_from_block(T3: np.ndarray, angles: np.ndarray) -> float:
    lambda0, lambda1 = lambda_vectors(T3, *angles_to_vectors(angles))
    return float(np.linalg.norm(lambda0 + lambda1) + np.linalg.norm(lambda0 - lambda1))


def angle_objective(tensor: Union[CorrelationTensor, np.ndarray], v: AngleLike) -> float:
    """
    Best Svetlichny expectation for the six directions encoded by v

    The third party's c, c' are eliminated through inner_max.
    """
    T3 = tensor.correlations if isinstance(tensor, CorrelationTensor) else np.asarray(tensor)
    if T3.shape == (4, 4, 4, 4):
        T3 = T3[1:, 1:, 1:, 1:]
    return _objective_from_block(T3, _angle_array(v))


def delta_terms(angles) -> Tuple[np.ndarray, np.ndarray]:
    """
    delta and delta' for angle vectors of shape (..., 12)

    Only the polar angles enter, through the moduli of their sines.
    """
    angles = np.asarray(angles, dtype=float)
    s = np.abs(np.sin(angles))
    sa1, sa3, sa5 = s[..., 0], s[..., 2], s[..., 4]
    sb1, sb3, sb5 = s[..., 6], s[..., 8], s[..., 10]

    A = sa1**2 + sb1**2
    B = sa3**2 + sb3**2
    C = sa5**2 + sb5**2
    delta = (
        A * B * C
        + 4 * sa1 * sb1 * sa3 * sb3 * C
        + 4 * sa3 * sb3 * sa5 * sb5 * A
        + 4 * sa1 * sb1 * sa5 * sb5 * B
    )
    delta_prime = (2 - A) * (2 - B) * (2 - C)
    return delta, delta_prime


def delta_inequality_check(v: AngleLike) -> Tuple[float, float, bool]:
    """(delta, delta', delta + 4 delta' <= 32 + 1e-12)"""
    delta, delta_prime = delta_terms(_angle_array(v))
    return float(delta), float(delta_prime), bool(delta + 4 * delta_prime <= DELTA_BOUND + 1e-12)


# =========================================================================== #
# Multistart maximisation                                                     #
# =========================================================================== #


class OracleConfig(BaseModel):
    """Budget and seed for one maximisation"""

    restarts: int = Field(default_factory=lambda: settings.ORACLE_RESTARTS, ge=1)
    max_iterations: int = Field(default_factory=lambda: settings.ORACLE_MAX_ITERATIONS, gt=0)
    step_tolerance: float = Field(default_factory=lambda: settings.ORACLE_STEP_TOLERANCE, gt=0)
    value_tolerance: float = Field(default_factory=lambda: settings.ORACLE_VALUE_TOLERANCE, gt=0)
    rng_seed: int = Field(default_factory=lambda: settings.ORACLE_SEED, ge=0, lt=2**64)
    method: str = Field(default_factory=lambda: settings.ORACLE_METHOD)
    warm_start: bool = True


@dataclass(frozen=True)
class OracleOutcome:
    """
    Best value found and the settings that reach it

    value is expectation(rho, settings), so it is a certified lower bound
    on the maximal Svetlichny value.
    """

    value: float
    settings: MeasurementSettings
    angles: AngleVector
    iterations_used: int
    converged: bool
    starts: int

    def to_json(self) -> Dict:
        return {
            "value": float(self.value),
            "settings": self.settings.to_dict(),
            "angles": self.angles.to_dict(),
            "iterations_used": self.iterations_used,
            "converged": self.converged,
            "starts": self.starts,
        }


def restart_angles(seed: int, restart_index: int) -> np.ndarray:
    """Uniform angles from a counter-based stream keyed by (seed, restart)"""
    key = np.array([seed, restart_index], dtype=np.uint64)
    generator = np.random.Generator(np.random.Philox(key=key))
    return generator.uniform(0.0, TWO_PI, ANGLE_COUNT)


def warm_starts(rho: MatrixLike) -> List[np.ndarray]:
    """All-z angles, plus the in-plane coherence settings when rho is X-type"""
    starts = [np.zeros(ANGLE_COUNT)]
    try:
        x = classify_xtype(rho)
    except NotXType:
        return starts
    phase = float(np.angle(x.pair_value))
    starts.insert(0, coherence_angles(x.pair_index, phase, sign=-1))
    starts.insert(0, coherence_angles(x.pair_index, phase, sign=1))
    return starts


def maximize(rho: MatrixLike, cfg: Optional[OracleConfig] = None) -> OracleOutcome:
    """
    Multistart local ascent on angle_objective

    Args:
        rho: Valid density operator
        cfg: Budget and seed (defaults from settings)

    Returns:
        OracleOutcome; converged is False when the best run hit its budget

    Raises:
        InvalidDensityOperator: If rho fails validation
    """
    cfg = cfg or OracleConfig()
    rho = DensityOperator.checked(rho)
    tensor = pauli_tensor(rho)
    T3 = np.ascontiguousarray(tensor.correlations)
    search = get_local_search(cfg.method)

    def objective(x: np.ndarray) -> float:
        return _objective_from_block(T3, x)

    starts = warm_starts(rho) if cfg.warm_start else []
    starts += [restart_angles(cfg.rng_seed, r) for r in range(cfg.restarts)]

    logger.info(
        "oracle_started",
        method=search.name,
        starts=len(starts),
        restarts=cfg.restarts,
        seed=cfg.rng_seed,
    )
    started = time.perf_counter()

    best: Optional[LocalResult] = None
    iterations = 0
    for index, x0 in enumerate(starts):
        run = search.run(objective, x0, cfg.max_iterations, cfg.step_tolerance, cfg.value_tolerance)
        iterations += run.iterations
        if best is None or run.value > best.value:
            best = run
            logger.debug("oracle_improved", start=index, value=run.value)

    polish = search.run(objective, best.x, cfg.max_iterations, cfg.step_tolerance, cfg.value_tolerance)
    iterations += polish.iterations
    if polish.value >= best.value:
        best = polish

    certificate = settings_from_angles(tensor, best.x)
    value = expectation(rho, certificate)

    if not best.converged:
        logger.warning("oracle_budget_exhausted", value=value, iterations=iterations)

    logger.info(
        "oracle_complete",
        value=value,
        converged=best.converged,
        iterations=iterations,
        elapsed_s=round(time.perf_counter() - started, 3),
    )
    return OracleOutcome(
        value=value,
        settings=certificate,
        angles=AngleVector(best.x),
        iterations_used=iterations,
        converged=best.converged,
        starts=len(starts),
    )


def svetlichny_value(rho: MatrixLike, cfg: Optional[OracleConfig] = None) -> SvetlichnyResult:
    """
    Maximal Svetlichny value of any four-qubit state

    X-type states use the closed form with an explicit certificate; other
    states go through maximize() and report the numeric branch.
    """
    rho = DensityOperator.checked(rho)
    try:
        x = classify_xtype(rho)
    except NotXType:
        outcome = maximize(rho, cfg)
        value = min(max(outcome.value, 0.0), S_MAX)
        return SvetlichnyResult(
            value=value,
            measure=nonlocality_measure(value),
            branch=Branch.NUMERIC,
            certificate=outcome.settings,
            floor=value,
        )

    result = svetlichny_xtype(x)
    if result.branch is Branch.COHERENCE:
        certificate = coherence_certificate(x)
    else:
        coherence_floor = 16.0 * np.sqrt(2.0) * abs(x.pair_value)
        diagonal_floor = 4.0 * abs(x.signed_sum)
        certificate = (
            coherence_certificate(x) if coherence_floor >= diagonal_floor else diagonal_certificate(x)
        )
    return SvetlichnyResult(
        value=result.value,
        measure=result.measure,
        branch=result.branch,
        certificate=certificate,
        floor=result.floor,
    )
