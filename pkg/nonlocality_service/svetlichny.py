"""
Svetlichny Inequality - Four-party operator, expectations and closed forms
Builds the four-partite Svetlichny operator, reduces its expectation to the
lambda-vector pair, and evaluates the closed-form maximum for X-type states
"""

from dataclasses import dataclass, fields
from enum import Enum
from typing import Dict, Optional, Tuple, Union

import numpy as np

from .errors import NonUnitVector, OutOfRange
from .qstate import (
    PAULIS,
    CorrelationTensor,
    DensityOperator,
    MatrixLike,
    XTypeState,
    _as_matrix,
    kron_all,
    pauli_tensor,
)


CLASSICAL_BOUND = 8.0
S_MAX = 8.0 * np.sqrt(2.0)
UNIT_TOLERANCE = 1e-12
MEASURE_OVERSHOOT = 1e-6

Z_AXIS = np.array([0.0, 0.0, 1.0])


class Branch(str, Enum):
    COHERENCE = "coherence"
    DIAGONAL = "diagonal"
    NUMERIC = "numeric"


def direction(polar, azimuth) -> np.ndarray:
    """
    Unit vector (sin p sin a, sin p cos a, cos p)

    Broadcasts over array inputs; the last axis of the result holds the
    three components.
    """
    polar = np.asarray(polar, dtype=float)
    azimuth = np.asarray(azimuth, dtype=float)
    sin_polar = np.sin(polar)
    return np.stack(
        [sin_polar * np.sin(azimuth), sin_polar * np.cos(azimuth), np.cos(polar)],
        axis=-1,
    )


def _unit(vector, name: str) -> np.ndarray:
    v = np.asarray(vector, dtype=float)
    if v.shape != (3,):
        raise NonUnitVector(f"Direction {name} must have 3 components, got shape {v.shape}")
    norm = float(np.linalg.norm(v))
    if abs(norm - 1.0) > UNIT_TOLERANCE:
        raise NonUnitVector(f"Direction {name} has norm {norm:.15f}, expected 1")
    return v


# =========================================================================== #
# Measurement settings                                                        #
# =========================================================================== #


@dataclass(frozen=True, eq=False)
class MeasurementSettings:
    """Two dichotomic observables per party, as Bloch directions"""

    a: np.ndarray
    a_prime: np.ndarray
    b: np.ndarray
    b_prime: np.ndarray
    c: np.ndarray
    c_prime: np.ndarray
    d: np.ndarray
    d_prime: np.ndarray

    def __post_init__(self):
        for f in fields(self):
            v = _unit(getattr(self, f.name), f.name)
            v.setflags(write=False)
            object.__setattr__(self, f.name, v)

    @classmethod
    def uniform(cls, vector) -> "MeasurementSettings":
        """Every observable along the same direction"""
        return cls(*([vector] * 8))

    def to_dict(self) -> Dict[str, list]:
        return {f.name: getattr(self, f.name).tolist() for f in fields(self)}

    @classmethod
    def from_dict(cls, payload: Dict) -> "MeasurementSettings":
        return cls(**{f.name: payload[f.name] for f in fields(cls)})


@dataclass(frozen=True)
class LambdaPair:
    """The two 3-vectors through which tr(S rho) depends on the third party"""

    lambda0: np.ndarray
    lambda1: np.ndarray

    @property
    def total(self) -> np.ndarray:
        return self.lambda0 + self.lambda1

    @property
    def difference(self) -> np.ndarray:
        return self.lambda0 - self.lambda1


@dataclass(frozen=True)
class SvetlichnyResult:
    """
    Maximal Svetlichny expectation of a state

    floor is the value reached by explicit settings when known; it equals
    value on the coherence and numeric branches.
    """

    value: float
    measure: float
    branch: Branch
    certificate: Optional[MeasurementSettings] = None
    floor: Optional[float] = None

    @property
    def genuinely_nonlocal(self) -> bool:
        return self.value > CLASSICAL_BOUND

    def to_json(self) -> Dict:
        payload = {
            "value": float(self.value),
            "measure": float(self.measure),
            "branch": self.branch.value,
        }
        if self.floor is not None:
            payload["floor"] = float(self.floor)
        if self.certificate is not None:
            payload["certificate"] = self.certificate.to_dict()
        return payload


# =========================================================================== #
# Operator and expectation                                                    #
# =========================================================================== #


def pauli_vector_operator(v) -> np.ndarray:
    """v . sigma for a real 3-vector"""
    return np.tensordot(np.asarray(v, dtype=float), PAULIS[1:], axes=1)


def svetlichny_operator(s: MeasurementSettings) -> np.ndarray:
    """
    S = [AB - A'B'] [(C - C')D - (C + C')D'] - [A'B + AB'] [(C + C')D + (C - C')D']

    The sign of the last (C - C')D' term makes tr(S rho) equal
    <c + c', lambda0> + <c - c', lambda1> with the lambdas() vectors.
    """
    A, A_, B, B_, C, C_, D, D_ = (
        pauli_vector_operator(v)
        for v in (s.a, s.a_prime, s.b, s.b_prime, s.c, s.c_prime, s.d, s.d_prime)
    )
    plus, minus = C + C_, C - C_

    first = kron_all([A, B]) - kron_all([A_, B_])
    second = kron_all([A_, B]) + kron_all([A, B_])
    operator = np.kron(first, np.kron(minus, D) - np.kron(plus, D_)) - np.kron(
        second, np.kron(plus, D) + np.kron(minus, D_)
    )
    return 0.5 * (operator + operator.conj().T)


def expectation(rho: MatrixLike, s: MeasurementSettings) -> float:
    """tr(S rho) for the given settings"""
    value = np.trace(svetlichny_operator(s) @ _as_matrix(rho))
    return float(value.real)


# =========================================================================== #
# Lambda reduction                                                            #
# =========================================================================== #


def _correlations(tensor: Union[CorrelationTensor, np.ndarray]) -> np.ndarray:
    if isinstance(tensor, CorrelationTensor):
        return tensor.correlations
    t = np.asarray(tensor, dtype=float)
    return t[1:, 1:, 1:, 1:] if t.shape == (4, 4, 4, 4) else t


def lambda_vectors(T3: np.ndarray, a, a_prime, b, b_prime, d, d_prime) -> Tuple[np.ndarray, np.ndarray]:
    """Unchecked lambda contraction on the 3x3x3x3 correlation block"""
    # M[x, y, z] = T_{A_x B_y} D_z as a vector over the third party
    M = np.einsum(
        "xi,yj,ijkl,zl->xyzk",
        np.array([a, a_prime]),
        np.array([b, b_prime]),
        T3,
        np.array([d, d_prime]),
    )
    lambda0 = M[1, 1, 1] - M[0, 0, 1] - M[1, 0, 0] - M[0, 1, 0]
    lambda1 = M[0, 0, 0] - M[1, 1, 0] - M[1, 0, 1] - M[0, 1, 1]
    return lambda0, lambda1


def lambdas(
    tensor: Union[CorrelationTensor, np.ndarray], a, a_prime, b, b_prime, d, d_prime
) -> LambdaPair:
    """
    Contract the correlation tensor with the settings of parties 1, 2 and 4

    Args:
        tensor: CorrelationTensor (or its 3x3x3x3 full-correlation block)
        a, a_prime, b, b_prime, d, d_prime: Unit directions

    Returns:
        LambdaPair with
            lambda0 = T_a'b' d' - T_ab d' - T_a'b d - T_ab' d
            lambda1 = T_ab d - T_a'b' d - T_a'b d' - T_ab' d'

    Raises:
        NonUnitVector: If any direction is not unit norm
    """
    names = ("a", "a_prime", "b", "b_prime", "d", "d_prime")
    vectors = [_unit(v, name) for v, name in zip((a, a_prime, b, b_prime, d, d_prime), names)]
    lambda0, lambda1 = lambda_vectors(_correlations(tensor), *vectors)
    return LambdaPair(lambda0=lambda0, lambda1=lambda1)


def inner_max(p: LambdaPair) -> float:
    """
    Maximum over the third party's settings: |lambda0 + lambda1| + |lambda0 - lambda1|

    Equal to 2 sqrt(1/2 [L0 + L1 + sqrt((L0 + L1)^2 - 4 <lambda0, lambda1>^2)])
    with L_i = |lambda_i|^2, without the cancellation in the inner root.
    """
    return float(np.linalg.norm(p.total) + np.linalg.norm(p.difference))


def upper_bound(p: LambdaPair) -> float:
    """2 sqrt(|lambda0|^2 + |lambda1|^2); tight iff lambda0 and lambda1 are orthogonal"""
    return float(2.0 * np.sqrt(p.lambda0 @ p.lambda0 + p.lambda1 @ p.lambda1))


def optimal_c_pair(p: LambdaPair) -> Tuple[np.ndarray, np.ndarray]:
    """Directions (c, c') attaining inner_max; z is used where a combination vanishes"""

    def normalized(v: np.ndarray) -> np.ndarray:
        norm = np.linalg.norm(v)
        return v / norm if norm > 0 else Z_AXIS.copy()

    return normalized(p.total), normalized(p.difference)


def complete_settings(
    tensor: Union[CorrelationTensor, np.ndarray], a, a_prime, b, b_prime, d, d_prime
) -> MeasurementSettings:
    """Fill in the third party's optimal directions for given a, a', b, b', d, d'"""
    pair = lambdas(tensor, a, a_prime, b, b_prime, d, d_prime)
    c, c_prime = optimal_c_pair(pair)
    return MeasurementSettings(a, a_prime, b, b_prime, c, c_prime, d, d_prime)


# =========================================================================== #
# Closed forms for X-type states                                              #
# =========================================================================== #


def nonlocality_measure(value: float) -> float:
    """
    Normalised genuine nonlocality max(0, (S - 8) / (8 sqrt2 - 8))

    Raises:
        OutOfRange: If value exceeds 8 sqrt2 by more than 1e-6 or is negative
    """
    if value > S_MAX + MEASURE_OVERSHOOT:
        raise OutOfRange(f"Svetlichny value {value} exceeds the quantum maximum {S_MAX}")
    if value < -1e-9:
        raise OutOfRange(f"Svetlichny value must be non-negative, got {value}")
    value = min(value, S_MAX)
    return max(0.0, (value - CLASSICAL_BOUND) / (S_MAX - CLASSICAL_BOUND))


def xtype_branches(x: XTypeState) -> Tuple[float, float]:
    """(16 sqrt2 |rho_pair|, 4 sqrt2 |N|)"""
    return 16.0 * np.sqrt(2.0) * abs(x.pair_value), 4.0 * np.sqrt(2.0) * abs(x.signed_sum)


def attainable_value(x: XTypeState) -> float:
    """
    Value reached by explicit settings: max(16 sqrt2 |rho_pair|, 4 |N|)

    The coherence term comes from coherence_certificate(); the population
    term from aligning every observable with z.
    """
    return max(16.0 * np.sqrt(2.0) * abs(x.pair_value), 4.0 * abs(x.signed_sum))


def closed_form_result(pair_modulus: float, signed_sum: float) -> SvetlichnyResult:
    """
    Closed-form Svetlichny value max(16 sqrt2 |rho_pair|, 4 sqrt2 |N|)

    Ties go to the coherence branch. On the diagonal branch the value is an
    upper bound and floor carries the attainable 4 |N|.
    """
    coherence = 16.0 * np.sqrt(2.0) * abs(pair_modulus)
    diagonal = 4.0 * np.sqrt(2.0) * abs(signed_sum)
    if coherence >= diagonal:
        value, branch, floor = coherence, Branch.COHERENCE, coherence
    else:
        value, branch = diagonal, Branch.DIAGONAL
        floor = max(coherence, 4.0 * abs(signed_sum))
    value = min(value, S_MAX)
    return SvetlichnyResult(
        value=value,
        measure=nonlocality_measure(value),
        branch=branch,
        floor=floor,
    )


def svetlichny_xtype(x: XTypeState) -> SvetlichnyResult:
    """Closed-form Svetlichny value of an X-type state"""
    return closed_form_result(abs(x.pair_value), x.signed_sum)


def coherence_angles(pair_index: int, phase: float = 0.0, sign: int = 1) -> np.ndarray:
    """
    Angles (alpha1..alpha6, beta1..beta6) of the in-plane certificate

    Parties 1, 2 and 4 measure in the x-y plane with a quarter-turn between
    their two settings. The first party's azimuths absorb the coherence
    phase; every qubit set in the pair's row index is mirrored by
    theta -> pi - theta, which maps (x, y, z) to (x, -y, -z).
    """
    half = np.pi / 2
    alphas = np.array([half, half, half, half, half, half])
    betas = np.array([half, 0.0, half, 0.0, half, 0.0])
    alphas[1] += sign * phase
    betas[1] += sign * phase

    row = pair_index - 1
    # qubit -> (alpha slots, beta slots); qubit 3 is optimised analytically
    slots = {1: (0, 1), 2: (2, 3), 4: (4, 5)}
    for qubit, (polar, azimuth) in slots.items():
        if (row >> (4 - qubit)) & 1:
            for angles in (alphas, betas):
                angles[polar] = np.pi - angles[polar]
                angles[azimuth] = np.pi - angles[azimuth]
    return np.mod(np.concatenate([alphas, betas]), 2 * np.pi)


def settings_from_angles(tensor, angles: np.ndarray) -> MeasurementSettings:
    """Settings for a 12-angle vector with the third party completed optimally"""
    alphas, betas = angles[:6], angles[6:]
    a, b, d = direction(alphas[0::2], alphas[1::2])
    a_prime, b_prime, d_prime = direction(betas[0::2], betas[1::2])
    return complete_settings(tensor, a, a_prime, b, b_prime, d, d_prime)


def coherence_certificate(x: XTypeState) -> MeasurementSettings:
    """Explicit settings whose expectation on x is 16 sqrt2 |rho_pair|"""
    angles = coherence_angles(x.pair_index, float(np.angle(x.pair_value)))
    return settings_from_angles(pauli_tensor(x.to_matrix()), angles)


def diagonal_certificate(x: XTypeState) -> MeasurementSettings:
    """All observables along z, third party signed to give 4 |N|"""
    z = Z_AXIS
    return complete_settings(pauli_tensor(x.to_matrix()), z, z, z, z, z, z)
