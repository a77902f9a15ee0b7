"""
Four-Qubit States - Representation, validation and Pauli analysis
Density operators, correlation tensors, X-type states and multi-mode pure states

Basis convention: index b1b2b3b4 with qubit 1 as the most significant bit,
so tensor factors appear in qubit order in every Kronecker product.
"""

from dataclasses import dataclass, field
from functools import reduce
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
import structlog

from .config import settings
from .errors import (
    DimensionMismatch,
    InvalidDensityOperator,
    NotXType,
    OutOfRange,
    ParseError,
    UnknownMode,
    WrongKeepCount,
)

logger = structlog.get_logger()


QUBITS = 4
DIM = 2**QUBITS

HERMITICITY_TOLERANCE = 1e-12
TRACE_TOLERANCE = 1e-12
EIGENVALUE_FLOOR = -1e-10
NORM_TOLERANCE = 1e-12

# sigma_0 .. sigma_3, indexed [i, row, col]
PAULIS = np.array(
    [
        [[1, 0], [0, 1]],
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)
PAULIS.setflags(write=False)

# (-1)^popcount(k): the eigenvalues of sigma_3 x sigma_3 x sigma_3 x sigma_3
SIGN_PATTERN = np.array([(-1) ** bin(k).count("1") for k in range(DIM)], dtype=float)
SIGN_PATTERN.setflags(write=False)

MatrixLike = Union["DensityOperator", np.ndarray, Sequence[Sequence[complex]]]


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array)
    array.setflags(write=False)
    return array


# =========================================================================== #
# Density operators                                                           #
# =========================================================================== #


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of the density-operator checks"""

    hermiticity_defect: float
    trace_defect: float
    min_eigenvalue: float

    @property
    def hermitian(self) -> bool:
        return self.hermiticity_defect <= HERMITICITY_TOLERANCE

    @property
    def unit_trace(self) -> bool:
        return self.trace_defect <= TRACE_TOLERANCE

    @property
    def positive(self) -> bool:
        return self.min_eigenvalue >= EIGENVALUE_FLOOR

    @property
    def passed(self) -> bool:
        return self.hermitian and self.unit_trace and self.positive

    def failures(self) -> List[str]:
        issues = []
        if not self.hermitian:
            issues.append(f"hermiticity defect {self.hermiticity_defect:.3e}")
        if not self.unit_trace:
            issues.append(f"trace defect {self.trace_defect:.3e}")
        if not self.positive:
            issues.append(f"minimum eigenvalue {self.min_eigenvalue:.3e}")
        return issues


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """
    A 16x16 complex matrix over four qubits

    Construction only checks the shape; use checked() or validate() for the
    Hermitian / unit-trace / PSD invariants.
    """

    entries: np.ndarray

    def __post_init__(self):
        matrix = np.asarray(self.entries, dtype=complex)
        if matrix.shape != (DIM, DIM):
            raise DimensionMismatch(
                f"Expected a {DIM}x{DIM} matrix, got shape {matrix.shape}"
            )
        object.__setattr__(self, "entries", _frozen(matrix))

    @classmethod
    def checked(cls, entries) -> "DensityOperator":
        """Build and validate, raising InvalidDensityOperator on failure"""
        rho = entries if isinstance(entries, cls) else cls(entries)
        report = validate(rho)
        if not report.passed:
            logger.warning("density_operator_rejected", issues=report.failures())
            raise InvalidDensityOperator(
                "Invalid density operator: " + "; ".join(report.failures()),
                report=report,
            )
        return rho

    @classmethod
    def from_pure(cls, amplitudes: Sequence[complex]) -> "DensityOperator":
        psi = np.asarray(amplitudes, dtype=complex)
        if psi.shape != (DIM,):
            raise DimensionMismatch(f"Expected {DIM} amplitudes, got {psi.shape}")
        return cls(np.outer(psi, psi.conj()))

    @property
    def diagonal(self) -> np.ndarray:
        return np.real(np.diag(self.entries))

    def to_json(self) -> Dict:
        return {
            "dim": DIM,
            "re": np.real(self.entries).tolist(),
            "im": np.imag(self.entries).tolist(),
        }

    @classmethod
    def from_json(cls, payload: Dict) -> "DensityOperator":
        if not isinstance(payload, dict) or "re" not in payload:
            raise ParseError("Density operator JSON needs a 're' matrix")
        dim = payload.get("dim", DIM)
        if dim != DIM:
            raise DimensionMismatch(f"Expected dim {DIM}, got {dim}")
        try:
            real = np.asarray(payload["re"], dtype=float)
            imag = np.asarray(payload.get("im", np.zeros_like(real)), dtype=float)
        except (TypeError, ValueError) as e:
            raise ParseError(f"Non-numeric density operator entries: {e}") from e
        if real.shape != imag.shape:
            raise DimensionMismatch("Real and imaginary parts differ in shape")
        return cls(real + 1j * imag)


def _as_matrix(rho: MatrixLike) -> np.ndarray:
    if isinstance(rho, DensityOperator):
        return rho.entries
    matrix = np.asarray(rho, dtype=complex)
    if matrix.shape != (DIM, DIM):
        raise DimensionMismatch(f"Expected a {DIM}x{DIM} matrix, got shape {matrix.shape}")
    return matrix


def validate(rho: MatrixLike) -> ValidationReport:
    """
    Check Hermiticity, unit trace and positivity of a 16x16 matrix

    Args:
        rho: DensityOperator or any 16x16 array-like

    Returns:
        ValidationReport with the three defects

    Raises:
        DimensionMismatch: If the input is not 16x16
    """
    matrix = _as_matrix(rho)
    hermitian_part = 0.5 * (matrix + matrix.conj().T)
    return ValidationReport(
        hermiticity_defect=float(np.max(np.abs(matrix - matrix.conj().T))),
        trace_defect=float(abs(np.trace(matrix) - 1.0)),
        min_eigenvalue=float(np.linalg.eigvalsh(hermitian_part)[0]),
    )


# =========================================================================== #
# Pauli correlation tensor                                                    #
# =========================================================================== #


@dataclass(frozen=True, eq=False)
class CorrelationTensor:
    """
    Pauli coefficients t[i,j,k,l] = tr(rho sigma_i x sigma_j x sigma_k x sigma_l)

    block(i, j) is the 3x3 correlation matrix T_ij with rows indexed by the
    third qubit and columns by the fourth.
    """

    t: np.ndarray

    def __post_init__(self):
        tensor = np.asarray(self.t, dtype=float)
        if tensor.shape != (4, 4, 4, 4):
            raise DimensionMismatch(f"Expected a 4x4x4x4 tensor, got {tensor.shape}")
        object.__setattr__(self, "t", _frozen(tensor))

    @property
    def correlations(self) -> np.ndarray:
        """Full-correlation part t[i,j,k,l] with i,j,k,l in {1,2,3}"""
        return self.t[1:, 1:, 1:, 1:]

    def block(self, i: int, j: int) -> np.ndarray:
        if not (1 <= i <= 3 and 1 <= j <= 3):
            raise OutOfRange(f"Correlation block indices must be in 1..3, got ({i}, {j})")
        return self.t[i, j, 1:, 1:]

    def reconstruct(self) -> DensityOperator:
        """rho = (1/16) sum t_ijkl sigma_i x sigma_j x sigma_k x sigma_l"""
        p = PAULIS
        full = np.einsum("ijkl,iae,jbf,kcg,ldh->abcdefgh", self.t, p, p, p, p)
        return DensityOperator(full.reshape(DIM, DIM) / DIM)


def pauli_tensor(rho: MatrixLike) -> CorrelationTensor:
    """
    Expand a four-qubit operator in the Pauli basis

    Args:
        rho: Valid density operator

    Returns:
        CorrelationTensor with real coefficients

    Raises:
        InvalidDensityOperator: If a coefficient carries an imaginary part
            above 1e-12 (input not Hermitian)
    """
    matrix = _as_matrix(rho).reshape((2,) * (2 * QUBITS))
    p = PAULIS
    # tr(rho P) = sum_{r,c} rho[r,c] P[c,r]
    coefficients = np.einsum("abcdefgh,iea,jfb,kgc,lhd->ijkl", matrix, p, p, p, p)

    residue = float(np.max(np.abs(coefficients.imag)))
    if residue > HERMITICITY_TOLERANCE:
        raise InvalidDensityOperator(
            f"Pauli coefficients have imaginary residue {residue:.3e}; operator is not Hermitian"
        )
    return CorrelationTensor(coefficients.real)


# =========================================================================== #
# X-type states                                                               #
# =========================================================================== #


@dataclass(frozen=True, eq=False)
class XTypeState:
    """
    Diagonal plus a single anti-diagonal conjugate pair

    pair_index is the 1-based row i of the coherence rho_{i, 17-i}, i in 1..8.
    """

    diag: np.ndarray
    pair_index: int = 1
    pair_value: complex = 0j

    def __post_init__(self):
        diag = np.asarray(self.diag, dtype=float)
        if diag.shape != (DIM,):
            raise DimensionMismatch(f"Expected {DIM} diagonal entries, got {diag.shape}")
        if not 1 <= self.pair_index <= DIM // 2:
            raise OutOfRange(f"pair_index must be in 1..{DIM // 2}, got {self.pair_index}")
        if abs(diag.sum() - 1.0) > TRACE_TOLERANCE:
            raise InvalidDensityOperator(f"Diagonal sums to {diag.sum():.15f}, expected 1")
        if diag.min() < -TRACE_TOLERANCE:
            raise InvalidDensityOperator(f"Negative population {diag.min():.3e}")

        i, j = self.pair_index - 1, DIM - self.pair_index
        value = complex(self.pair_value)
        if abs(value) ** 2 > diag[i] * diag[j] + TRACE_TOLERANCE:
            raise InvalidDensityOperator(
                f"|rho_{{{i + 1},{j + 1}}}|^2 = {abs(value) ** 2:.6g} exceeds "
                f"rho_{{{i + 1},{i + 1}}} rho_{{{j + 1},{j + 1}}} = {diag[i] * diag[j]:.6g}"
            )
        object.__setattr__(self, "diag", _frozen(diag))
        object.__setattr__(self, "pair_value", value)

    @property
    def partner_index(self) -> int:
        return DIM + 1 - self.pair_index

    @property
    def signed_sum(self) -> float:
        """N = sum_k (-1)^popcount(k-1) rho_kk, i.e. <sigma_3 x4>"""
        return float(SIGN_PATTERN @ self.diag)

    def to_matrix(self) -> np.ndarray:
        matrix = np.diag(self.diag).astype(complex)
        i, j = self.pair_index - 1, self.partner_index - 1
        matrix[i, j] = self.pair_value
        matrix[j, i] = np.conj(self.pair_value)
        return matrix

    def to_density(self) -> DensityOperator:
        return DensityOperator(self.to_matrix())


def classify_xtype(rho: MatrixLike, tol: Optional[float] = None) -> XTypeState:
    """
    Recognise an X-type state with at most one anti-diagonal pair

    Args:
        rho: Valid density operator
        tol: Modulus below which an entry counts as zero (settings.XTYPE_TOLERANCE)

    Returns:
        XTypeState; a purely diagonal input reports pair 1 with value 0

    Raises:
        NotXType: Coherences off the anti-diagonal, or more than one pair
    """
    tol = settings.XTYPE_TOLERANCE if tol is None else tol
    if tol < 0:
        raise OutOfRange(f"Tolerance must be non-negative, got {tol}")

    matrix = _as_matrix(rho)
    rows = np.arange(DIM)
    off_pattern = ~np.eye(DIM, dtype=bool)
    off_pattern[rows, DIM - 1 - rows] = False

    stray = float(np.max(np.abs(matrix[off_pattern])))
    if stray > tol:
        logger.info("xtype_classification_failed", reason="off_pattern", max_modulus=stray)
        raise NotXType(f"Coherence of modulus {stray:.3e} outside the anti-diagonal")

    upper = rows[: DIM // 2]
    anti = matrix[upper, DIM - 1 - upper]
    active = np.flatnonzero(np.abs(anti) > tol)
    if len(active) > 1:
        logger.info(
            "xtype_classification_failed",
            reason="multiple_pairs",
            pairs=[int(k) + 1 for k in active],
        )
        raise NotXType(
            f"{len(active)} anti-diagonal pairs exceed tolerance: "
            f"rows {[int(k) + 1 for k in active]}"
        )

    if len(active) == 0:
        return XTypeState(diag=np.real(np.diag(matrix)), pair_index=1, pair_value=0j)

    index = int(active[0])
    return XTypeState(
        diag=np.real(np.diag(matrix)),
        pair_index=index + 1,
        pair_value=complex(anti[index]),
    )


# =========================================================================== #
# Multi-mode pure states                                                      #
# =========================================================================== #

MODE_KINDS = ("kruskal", "out", "in", "A", "B", "L", "R")


class ModeLabel(NamedTuple):
    kind: str
    index: int

    def __str__(self) -> str:
        return f"{self.kind}_{self.index}"

    @classmethod
    def parse(cls, text: Union[str, "ModeLabel"]) -> "ModeLabel":
        if isinstance(text, ModeLabel):
            return text
        kind, sep, index = str(text).rpartition("_")
        if not sep or kind not in MODE_KINDS or not index.isdigit():
            raise UnknownMode(f"Cannot parse mode label {text!r}")
        return cls(kind, int(index))


@dataclass(frozen=True, eq=False)
class ModeState:
    """Normalised pure state over labelled two-level modes, first label most significant"""

    amplitudes: np.ndarray
    modes: Tuple[ModeLabel, ...] = field(default_factory=tuple)

    def __post_init__(self):
        modes = tuple(ModeLabel.parse(m) for m in self.modes)
        amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if amplitudes.shape != (2 ** len(modes),):
            raise DimensionMismatch(
                f"{len(modes)} modes need {2 ** len(modes)} amplitudes, got {amplitudes.shape}"
            )
        if len(set(modes)) != len(modes):
            raise UnknownMode(f"Duplicate mode labels in {[str(m) for m in modes]}")
        norm = float(np.linalg.norm(amplitudes))
        if abs(norm - 1.0) > NORM_TOLERANCE:
            raise OutOfRange(f"Mode state has norm {norm:.15f}, expected 1")
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "amplitudes", _frozen(amplitudes))

    def position(self, label) -> int:
        label = ModeLabel.parse(label)
        try:
            return self.modes.index(label)
        except ValueError:
            raise UnknownMode(
                f"Mode {label} not in state modes {[str(m) for m in self.modes]}"
            ) from None

    def to_json(self) -> Dict:
        return {
            "modes": [str(m) for m in self.modes],
            "re": np.real(self.amplitudes).tolist(),
            "im": np.imag(self.amplitudes).tolist(),
        }

    @classmethod
    def from_json(cls, payload: Dict) -> "ModeState":
        if not isinstance(payload, dict) or not {"re", "modes"} <= payload.keys():
            raise ParseError("Mode state JSON needs 're' and 'modes'")
        try:
            real = np.asarray(payload["re"], dtype=float)
            imag = np.asarray(payload.get("im", np.zeros_like(real)), dtype=float)
        except (TypeError, ValueError) as e:
            raise ParseError(f"Non-numeric mode state amplitudes: {e}") from e
        return cls(real + 1j * imag, tuple(payload["modes"]))


def reduce_modes(psi: ModeState, keep: Iterable) -> np.ndarray:
    """
    Reduced density matrix over any subset of modes, in the listed order

    Args:
        psi: Pure multi-mode state
        keep: Mode labels to keep (strings or ModeLabel)

    Returns:
        2^k x 2^k complex matrix
    """
    keep_positions = [psi.position(label) for label in keep]
    if not keep_positions:
        raise WrongKeepCount("At least one mode must be kept")
    if len(set(keep_positions)) != len(keep_positions):
        raise WrongKeepCount("Kept modes must be distinct")

    traced = [k for k in range(len(psi.modes)) if k not in keep_positions]
    tensor = psi.amplitudes.reshape((2,) * len(psi.modes))
    grouped = np.transpose(tensor, keep_positions + traced).reshape(2 ** len(keep_positions), -1)
    return grouped @ grouped.conj().T


def partial_trace(psi: ModeState, keep: Sequence) -> DensityOperator:
    """
    Trace a multi-mode pure state down to four kept modes

    Raises:
        WrongKeepCount: Unless exactly four modes are kept
        UnknownMode: If a kept label is absent from the state
    """
    keep = list(keep)
    if len(keep) != QUBITS:
        raise WrongKeepCount(f"Exactly {QUBITS} modes must be kept, got {len(keep)}")
    return DensityOperator(reduce_modes(psi, keep))


# =========================================================================== #
# Constructors and channels                                                   #
# =========================================================================== #


def basis_vector(bits: Union[int, str], qubits: int = QUBITS) -> np.ndarray:
    index = int(bits, 2) if isinstance(bits, str) else int(bits)
    vector = np.zeros(2**qubits, dtype=complex)
    vector[index] = 1.0
    return vector


def ghz_amplitudes(alpha: float = 1 / np.sqrt(2)) -> np.ndarray:
    """alpha|0000> + sqrt(1 - alpha^2)|1111>"""
    if not 0.0 <= alpha <= 1.0:
        raise OutOfRange(f"alpha must be in [0, 1], got {alpha}")
    return alpha * basis_vector(0) + np.sqrt(1.0 - alpha**2) * basis_vector(DIM - 1)


def ghz_density(alpha: float = 1 / np.sqrt(2)) -> DensityOperator:
    return DensityOperator.from_pure(ghz_amplitudes(alpha))


def basis_density(bits: Union[int, str]) -> DensityOperator:
    return DensityOperator.from_pure(basis_vector(bits))


def maximally_mixed() -> DensityOperator:
    return DensityOperator(np.eye(DIM, dtype=complex) / DIM)


def random_pure_state(rng: np.random.Generator, qubits: int = QUBITS) -> np.ndarray:
    psi = rng.standard_normal(2**qubits) + 1j * rng.standard_normal(2**qubits)
    return psi / np.linalg.norm(psi)


def random_density_operator(
    rng: np.random.Generator, rank: Optional[int] = None
) -> DensityOperator:
    """Random mixture of `rank` random pure states (rank drawn in 1..16 if omitted)"""
    rank = int(rng.integers(1, DIM + 1)) if rank is None else rank
    weights = rng.dirichlet(np.ones(rank))
    states = [random_pure_state(rng) for _ in range(rank)]
    matrix = sum(w * np.outer(s, s.conj()) for w, s in zip(weights, states))
    matrix = 0.5 * (matrix + matrix.conj().T)
    return DensityOperator(matrix / np.trace(matrix).real)


def random_xtype_state(
    rng: np.random.Generator, pair_index: Optional[int] = None
) -> XTypeState:
    """Random populations with a random-phase coherence on one anti-diagonal pair"""
    diag = rng.dirichlet(np.ones(DIM))
    diag = diag / diag.sum()
    index = int(rng.integers(1, DIM // 2 + 1)) if pair_index is None else pair_index
    bound = np.sqrt(diag[index - 1] * diag[DIM - index])
    modulus = rng.uniform(0.0, 1.0) * bound
    phase = rng.uniform(0.0, 2 * np.pi)
    return XTypeState(diag=diag, pair_index=index, pair_value=modulus * np.exp(1j * phase))


def depolarize(rho: MatrixLike, visibility: float) -> DensityOperator:
    """visibility * rho + (1 - visibility) * I/16"""
    if not 0.0 <= visibility <= 1.0:
        raise OutOfRange(f"visibility must be in [0, 1], got {visibility}")
    matrix = _as_matrix(rho)
    return DensityOperator(visibility * matrix + (1.0 - visibility) * np.eye(DIM) / DIM)


def dephase(rho: MatrixLike, gamma: float) -> DensityOperator:
    """Scale every off-diagonal entry by (1 - gamma)"""
    if not 0.0 <= gamma <= 1.0:
        raise OutOfRange(f"dephasing must be in [0, 1], got {gamma}")
    matrix = _as_matrix(rho)
    damped = (1.0 - gamma) * matrix
    np.fill_diagonal(damped, np.diag(matrix))
    return DensityOperator(damped)


def kron_all(factors: Sequence[np.ndarray]) -> np.ndarray:
    return reduce(np.kron, factors)
