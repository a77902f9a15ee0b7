"""
Curved Spacetime Scenarios - Fermionic GHZ states near horizons
Schwarzschild and Schwarzschild-de Sitter mode states, their reduced
four-mode density operators, and closed-form Svetlichny values
"""

from dataclasses import asdict, dataclass
from typing import List, Optional, Tuple

import numpy as np
import structlog
from pydantic import BaseModel, Field, model_validator
from scipy.special import expit

from .errors import NariaiViolation, NonPositiveMass, NonPositiveParameter
from .qstate import (
    DensityOperator,
    ModeLabel,
    ModeState,
    basis_vector,
    classify_xtype,
    kron_all,
    partial_trace,
)
from .svetlichny import SvetlichnyResult, closed_form_result, svetlichny_xtype

logger = structlog.get_logger()


PARTIES = 4
NARIAI_MARGIN = 1e-9
MASS_TEMPERATURE_TOLERANCE = 1e-9

# |0_K> -> cos|0 0> + sin|1 1>, |1_K> -> |1 0> over (exterior, interior)
_EXCITED_PAIR = np.array([0.0, 0.0, 1.0, 0.0], dtype=complex)


def _vacuum_pair(cos: float, sin: float) -> np.ndarray:
    return np.array([cos, 0.0, 0.0, sin], dtype=complex)


def hawking_temperature(mass: float) -> float:
    """T = 1/(8 pi M) in natural units"""
    if not mass > 0:
        raise NonPositiveMass(f"Mass must be positive, got {mass}")
    return 1.0 / (8.0 * np.pi * mass)


def squeeze_coeffs(omega: float, temperature: float) -> Tuple[float, float]:
    """
    Fermionic squeezing amplitudes for a mode of frequency omega

    Returns:
        (cos, sin) with cos = 1/sqrt(exp(-omega/T) + 1), sin = 1/sqrt(exp(omega/T) + 1)
    """
    if not omega > 0:
        raise NonPositiveParameter(f"omega must be positive, got {omega}")
    if not temperature > 0:
        raise NonPositiveParameter(f"Temperature must be positive, got {temperature}")
    ratio = omega / temperature
    return float(np.sqrt(expit(ratio))), float(np.sqrt(expit(-ratio)))


def _branch_amplitude(alpha: float) -> float:
    return float(alpha * np.sqrt(max(0.0, 1.0 - alpha**2)))


# =========================================================================== #
# Schwarzschild                                                               #
# =========================================================================== #


class SchwarzschildScenario(BaseModel):
    """GHZ state with n parties near a Schwarzschild horizon"""

    alpha: float = Field(..., ge=0.0, le=1.0)
    omega: float = Field(1.0, gt=0.0)
    temperature: Optional[float] = Field(None, gt=0.0)
    mass: Optional[float] = Field(None, gt=0.0)
    n: int = Field(1, ge=1, le=3)
    p: int = Field(1, ge=0)
    q: int = Field(0, ge=0)

    @model_validator(mode="after")
    def _consistent(self):
        if self.p + self.q != self.n:
            raise ValueError(f"p + q must equal n, got p={self.p}, q={self.q}, n={self.n}")
        if self.temperature is None and self.mass is None:
            raise ValueError("Either temperature or mass is required")
        if self.temperature is not None and self.mass is not None:
            implied = hawking_temperature(self.mass)
            if abs(implied - self.temperature) > MASS_TEMPERATURE_TOLERANCE:
                raise ValueError(
                    f"temperature {self.temperature} disagrees with 1/(8 pi M) = {implied}"
                )
        return self

    @property
    def hawking_temperature(self) -> float:
        if self.temperature is not None:
            return self.temperature
        return hawking_temperature(self.mass)

    def modes(self) -> List[ModeLabel]:
        kruskal = [ModeLabel("kruskal", k) for k in range(self.n + 1, PARTIES + 1)]
        horizon = []
        for i in range(1, self.n + 1):
            horizon += [ModeLabel("out", i), ModeLabel("in", i)]
        return kruskal + horizon

    def kept_modes(self) -> List[ModeLabel]:
        """Far Kruskal modes, then out_1..out_p, then in_{p+1}..in_n"""
        kruskal = [ModeLabel("kruskal", k) for k in range(self.n + 1, PARTIES + 1)]
        exterior = [ModeLabel("out", i) for i in range(1, self.p + 1)]
        interior = [ModeLabel("in", i) for i in range(self.p + 1, self.n + 1)]
        return kruskal + exterior + interior


def build_schwarzschild_state(s: SchwarzschildScenario) -> ModeState:
    """
    Evolve alpha|0000> + sqrt(1 - alpha^2)|1111> through n horizon modes

    Each of the first n parties splits into an exterior/interior pair; the
    remaining 4 - n parties stay Kruskal modes and lead the mode order.
    """
    cos, sin = squeeze_coeffs(s.omega, s.hawking_temperature)
    far = PARTIES - s.n
    ground = kron_all([basis_vector(0, far)] + [_vacuum_pair(cos, sin)] * s.n)
    excited = kron_all([basis_vector(2**far - 1, far)] + [_EXCITED_PAIR] * s.n)
    amplitudes = s.alpha * ground + np.sqrt(1.0 - s.alpha**2) * excited
    return ModeState(amplitudes, tuple(s.modes()))


def reduce_schwarzschild(s: SchwarzschildScenario) -> DensityOperator:
    """Four-mode state seen by the far parties, p exterior and q interior modes"""
    return partial_trace(build_schwarzschild_state(s), s.kept_modes())


def schwarzschild_closed_form(s: SchwarzschildScenario) -> Tuple[float, float]:
    """(|rho_pair|, N) of the reduced state without building it"""
    cos, sin = squeeze_coeffs(s.omega, s.hawking_temperature)
    pair = _branch_amplitude(s.alpha) * cos**s.p * sin**s.q
    signed_sum = s.alpha**2 * (cos**2 - sin**2) ** s.n + (-1) ** s.q * (1.0 - s.alpha**2)
    return pair, signed_sum


def svetlichny_schwarzschild(s: SchwarzschildScenario) -> SvetlichnyResult:
    """max(16 sqrt2 alpha sqrt(1 - alpha^2) cos^p sin^q, 4 sqrt2 |N|)"""
    return closed_form_result(*schwarzschild_closed_form(s))


def svetlichny_schwarzschild_pipeline(s: SchwarzschildScenario) -> SvetlichnyResult:
    """Same value through build, trace, classify and the generic X-type form"""
    return svetlichny_xtype(classify_xtype(reduce_schwarzschild(s)))


# =========================================================================== #
# Schwarzschild-de Sitter                                                     #
# =========================================================================== #


def _nariai_parameter(mass: float, lambda_cosmo: float) -> float:
    if not mass > 0:
        raise NonPositiveMass(f"Mass must be positive, got {mass}")
    if not lambda_cosmo > 0:
        raise NonPositiveParameter(f"Cosmological constant must be positive, got {lambda_cosmo}")
    return 3.0 * mass * np.sqrt(lambda_cosmo)


def sds_horizons(mass: float, lambda_cosmo: float) -> Tuple[float, float]:
    """
    Black hole and cosmological horizon radii

    Args:
        mass: Black hole mass M > 0
        lambda_cosmo: Cosmological constant > 0

    Returns:
        (r_H, r_C), the two positive roots of 1 - 2M/r - Lambda r^2/3

    Raises:
        NariaiViolation: If 3 M sqrt(Lambda) >= 1
    """
    x = _nariai_parameter(mass, lambda_cosmo)
    if x >= 1.0:
        raise NariaiViolation(f"3 M sqrt(Lambda) = {x} reaches the Nariai limit")
    scale = 2.0 / np.sqrt(lambda_cosmo)
    angle = np.arccos(x)
    r_h = scale * np.cos((np.pi + angle) / 3.0)
    r_c = scale * np.cos((angle - np.pi) / 3.0)
    return float(r_h), float(r_c)


@dataclass(frozen=True)
class SdSThermo:
    r_H: float
    r_C: float
    k_H: float
    k_C: float
    T_H: float
    T_C: float
    cos_r: float
    sin_r: float
    cos_w: float
    sin_w: float

    def to_json(self) -> dict:
        return asdict(self)


def sds_thermo(mass: float, lambda_cosmo: float, omega: float) -> SdSThermo:
    """
    Surface gravities, temperatures and squeezing at both horizons

    Raises:
        NariaiViolation: If 3 M sqrt(Lambda) >= 1 - 1e-9
    """
    x = _nariai_parameter(mass, lambda_cosmo)
    if x >= 1.0 - NARIAI_MARGIN:
        logger.warning("nariai_limit_rejected", mass=mass, lambda_cosmo=lambda_cosmo, parameter=x)
        raise NariaiViolation(f"3 M sqrt(Lambda) = {x} is within {NARIAI_MARGIN} of the Nariai limit")
    r_h, r_c = sds_horizons(mass, lambda_cosmo)
    gap = r_c - r_h
    k_h = lambda_cosmo * (2.0 * r_h + r_c) * gap / (6.0 * r_h)
    k_c = lambda_cosmo * (2.0 * r_c + r_h) * gap / (6.0 * r_c)
    t_h, t_c = k_h / (2.0 * np.pi), k_c / (2.0 * np.pi)
    cos_r, sin_r = squeeze_coeffs(omega, t_h)
    cos_w, sin_w = squeeze_coeffs(omega, t_c)
    return SdSThermo(
        r_H=r_h, r_C=r_c, k_H=k_h, k_C=k_c, T_H=t_h, T_C=t_c,
        cos_r=cos_r, sin_r=sin_r, cos_w=cos_w, sin_w=sin_w,
    )


class SdSScenario(BaseModel):
    """GHZ state with n parties at the black hole horizon and m at the cosmological one"""

    alpha: float = Field(..., ge=0.0, le=1.0)
    omega: float = Field(1.0, gt=0.0)
    mass: float = Field(..., gt=0.0)
    lambda_cosmo: float = Field(..., gt=0.0)
    n: int = Field(2, ge=1, le=3)
    m: int = Field(2, ge=1, le=3)

    @model_validator(mode="after")
    def _consistent(self):
        if self.n + self.m != PARTIES:
            raise ValueError(f"n + m must equal {PARTIES}, got n={self.n}, m={self.m}")
        x = 3.0 * self.mass * np.sqrt(self.lambda_cosmo)
        if x >= 1.0 - NARIAI_MARGIN:
            raise ValueError(f"3 M sqrt(Lambda) = {x} violates the sub-Nariai condition")
        return self

    def thermo(self) -> SdSThermo:
        return sds_thermo(self.mass, self.lambda_cosmo, self.omega)

    def modes(self) -> List[ModeLabel]:
        labels = []
        for i in range(1, self.n + 1):
            labels += [ModeLabel("A", i), ModeLabel("L", i)]
        for j in range(1, self.m + 1):
            labels += [ModeLabel("B", j), ModeLabel("R", j)]
        return labels

    def kept_modes(self) -> List[ModeLabel]:
        return [ModeLabel("A", i) for i in range(1, self.n + 1)] + [
            ModeLabel("B", j) for j in range(1, self.m + 1)
        ]


def build_sds_modes(s: SdSScenario) -> ModeState:
    """Eight-mode pure state: every party split at its horizon"""
    th = s.thermo()
    ground = kron_all(
        [_vacuum_pair(th.cos_r, th.sin_r)] * s.n + [_vacuum_pair(th.cos_w, th.sin_w)] * s.m
    )
    excited = kron_all([_EXCITED_PAIR] * PARTIES)
    amplitudes = s.alpha * ground + np.sqrt(1.0 - s.alpha**2) * excited
    return ModeState(amplitudes, tuple(s.modes()))


def build_sds_state(s: SdSScenario) -> DensityOperator:
    """Four exterior modes A_1..A_n, B_1..B_m after tracing L and R"""
    return partial_trace(build_sds_modes(s), s.kept_modes())


def sds_closed_form(s: SdSScenario) -> Tuple[float, float]:
    th = s.thermo()
    pair = _branch_amplitude(s.alpha) * th.cos_r**s.n * th.cos_w**s.m
    signed_sum = (
        s.alpha**2
        * (th.cos_r**2 - th.sin_r**2) ** s.n
        * (th.cos_w**2 - th.sin_w**2) ** s.m
        + (1.0 - s.alpha**2)
    )
    return pair, signed_sum


def svetlichny_sds(s: SdSScenario) -> SvetlichnyResult:
    """max(16 sqrt2 alpha sqrt(1 - alpha^2) cos^n r cos^m w, 4 sqrt2 |N|)"""
    return closed_form_result(*sds_closed_form(s))


def svetlichny_sds_pipeline(s: SdSScenario) -> SvetlichnyResult:
    return svetlichny_xtype(classify_xtype(build_sds_state(s)))
