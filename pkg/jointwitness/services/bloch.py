"""Qubit states: Bloch vectors, 2x2 density matrices, rotations and embeddings.

A qubit state is rho = (sigma_0 + s . sigma) / 2 with |s| <= 1. Pure states of
higher dimension are reduced to an effective qubit on the plane spanned by the
state and one vector orthogonal to it; mixed states are projected onto any
two-dimensional subspace.
"""
import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from jointwitness.config import settings
from jointwitness.exceptions import InvalidInputError

logger = logging.getLogger(__name__)

SIGMA_0 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = np.stack([SIGMA_X, SIGMA_Y, SIGMA_Z])

# Below this sin(angle) the vector is treated as (anti)parallel to z
_PARALLEL_SIN = 1e-15


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array)
    array.flags.writeable = False
    return array


@dataclass(frozen=True)
class BlochVector:
    """Real 3-vector inside the unit ball.

    Norms up to 1 + bloch_tolerance are renormalized onto the sphere, larger
    ones are rejected.
    """
    x: float
    y: float
    z: float

    def __post_init__(self):
        components = (float(self.x), float(self.y), float(self.z))
        if not all(math.isfinite(c) for c in components):
            raise InvalidInputError(f"Bloch vector components must be finite, got {components}")

        norm = math.sqrt(sum(c * c for c in components))
        if norm > 1 + settings.bloch_tolerance:
            raise InvalidInputError(f"Bloch vector norm {norm:.15g} exceeds 1")
        if norm > 1:
            components = tuple(c / norm for c in components)

        for name, value in zip("xyz", components):
            object.__setattr__(self, name, value)

    @classmethod
    def from_array(cls, values) -> "BlochVector":
        values = np.asarray(values, dtype=float).ravel()
        if values.shape != (3,):
            raise InvalidInputError(f"Bloch vector needs 3 components, got {values.size}")
        return cls(*values)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.as_array()))

    def is_zero(self) -> bool:
        return self.x == 0.0 and self.y == 0.0 and self.z == 0.0


def validate_density_matrix(matrix, tolerance: Optional[float] = None) -> np.ndarray:
    """Check a square matrix is Hermitian, unit-trace and positive semidefinite."""
    tol = settings.bloch_tolerance if tolerance is None else tolerance
    rho = np.asarray(matrix, dtype=complex)

    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InvalidInputError(f"Density matrix must be square, got shape {rho.shape}")
    if not np.allclose(rho, rho.conj().T, rtol=0, atol=tol):
        raise InvalidInputError("Density matrix is not Hermitian")

    trace = np.trace(rho)
    if abs(trace - 1) > tol:
        raise InvalidInputError(f"Density matrix trace is {trace.real:.15g}, expected 1")

    min_eig = float(np.linalg.eigvalsh(rho).min())
    if min_eig < -tol:
        raise InvalidInputError(f"Density matrix has negative eigenvalue {min_eig:.3g}")

    return rho


@dataclass(frozen=True, eq=False)
class DensityMatrix2:
    """Validated 2x2 qubit density matrix."""
    matrix: np.ndarray

    def __post_init__(self):
        rho = validate_density_matrix(self.matrix)
        if rho.shape != (2, 2):
            raise InvalidInputError(f"Qubit density matrix must be 2x2, got {rho.shape}")
        object.__setattr__(self, "matrix", _frozen(rho))

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)


@dataclass(frozen=True, eq=False)
class Rotation3:
    """Proper rotation of Bloch vectors (the SU(2) choice of axes)."""
    matrix: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.matrix, dtype=float)
        if r.shape != (3, 3):
            raise InvalidInputError(f"Rotation must be 3x3, got {r.shape}")
        if not np.allclose(r.T @ r, np.eye(3), rtol=0, atol=1e-12):
            raise InvalidInputError("Rotation matrix is not orthogonal")
        if abs(np.linalg.det(r) - 1) > 1e-12:
            raise InvalidInputError("Rotation matrix must have determinant +1")
        object.__setattr__(self, "matrix", _frozen(r))

    @classmethod
    def identity(cls) -> "Rotation3":
        return cls(np.eye(3))

    def apply(self, s: BlochVector) -> BlochVector:
        return BlochVector.from_array(self.matrix @ s.as_array())

    def inverse(self) -> "Rotation3":
        return Rotation3(self.matrix.T)


@dataclass(frozen=True, eq=False)
class PureStateVector:
    """Unit vector of complex amplitudes in dimension d >= 2."""
    amplitudes: np.ndarray

    def __post_init__(self):
        psi = np.asarray(self.amplitudes, dtype=complex)
        if psi.ndim != 1:
            raise InvalidInputError(f"Pure state must be a vector, got shape {psi.shape}")
        if psi.size < 2:
            raise InvalidInputError(f"Pure state dimension must be at least 2, got {psi.size}")
        norm = np.linalg.norm(psi)
        if abs(norm - 1) > 1e-12:
            raise InvalidInputError(f"Pure state norm is {norm:.15g}, expected 1")
        object.__setattr__(self, "amplitudes", _frozen(psi))

    @classmethod
    def normalized(cls, values) -> "PureStateVector":
        """Build from unnormalized amplitudes."""
        psi = np.asarray(values, dtype=complex).ravel()
        norm = np.linalg.norm(psi)
        if norm == 0:
            raise InvalidInputError("Pure state amplitudes are all zero")
        return cls(psi / norm)

    @property
    def dim(self) -> int:
        return self.amplitudes.size


class QubitProjection(NamedTuple):
    bloch: BlochVector
    weight: float


def bloch_to_density(s: BlochVector) -> DensityMatrix2:
    return DensityMatrix2(0.5 * (SIGMA_0 + np.tensordot(s.as_array(), PAULI, axes=1)))


def density_to_bloch(rho) -> BlochVector:
    if not isinstance(rho, DensityMatrix2):
        rho = DensityMatrix2(rho)
    components = np.array([np.trace(rho.matrix @ sigma).real for sigma in PAULI])
    norm = np.linalg.norm(components)
    # rho was validated as PSD, so any excess is rounding
    if norm > 1:
        components /= norm
    return BlochVector.from_array(components)


def canonical_rotation(s: BlochVector) -> tuple[Rotation3, BlochVector]:
    """Rotation taking s onto +z, with the rotated vector (0, 0, |s|)."""
    norm = s.norm
    if norm == 0:
        return Rotation3.identity(), BlochVector(0.0, 0.0, 0.0)

    n = s.as_array() / norm
    z_hat = np.array([0.0, 0.0, 1.0])
    axis = np.cross(n, z_hat)
    sin_theta = float(np.linalg.norm(axis))
    cos_theta = float(n[2])

    if sin_theta < _PARALLEL_SIN:
        if cos_theta > 0:
            matrix = np.eye(3)
        else:
            # pi about x
            matrix = np.diag([1.0, -1.0, -1.0])
    else:
        k = axis / sin_theta
        cross_k = np.array([
            [0.0, -k[2], k[1]],
            [k[2], 0.0, -k[0]],
            [-k[1], k[0], 0.0],
        ])
        # Rodrigues
        matrix = np.eye(3) + sin_theta * cross_k + (1 - cos_theta) * (cross_k @ cross_k)

    return Rotation3(matrix), BlochVector(0.0, 0.0, norm)


def _orthonormal_pair(first: np.ndarray, second: np.ndarray) -> np.ndarray:
    if first.shape != second.shape:
        raise InvalidInputError(
            f"Basis vectors have different dimensions: {first.size} and {second.size}"
        )
    overlap = abs(np.vdot(first, second))
    if overlap > settings.orthogonality_tolerance:
        raise InvalidInputError(f"Basis vectors are not orthogonal (overlap {overlap:.3g})")
    for vector in (first, second):
        if abs(np.linalg.norm(vector) - 1) > settings.orthogonality_tolerance:
            raise InvalidInputError("Basis vectors must be normalized")
    return np.column_stack([first, second])


def default_orthogonal_complement(psi: PureStateVector) -> PureStateVector:
    """Gram-Schmidt of the first canonical basis vector not parallel to psi."""
    amplitudes = psi.amplitudes
    threshold = math.sqrt(settings.orthogonality_tolerance)
    for k in range(psi.dim):
        e_k = np.zeros(psi.dim, dtype=complex)
        e_k[k] = 1.0
        residual = e_k - np.vdot(amplitudes, e_k) * amplitudes
        if np.linalg.norm(residual) > threshold:
            return PureStateVector.normalized(residual)
    # Unreachable for d >= 2: psi cannot be parallel to every basis vector
    raise InvalidInputError("Could not construct a vector orthogonal to the state")


def embed_pure_state(
    psi: PureStateVector,
    psi_perp: Optional[PureStateVector] = None
) -> BlochVector:
    """Bloch vector of psi in the effective qubit basis {psi, psi_perp}.

    The effective sigma_z is |psi><psi| - |psi_perp><psi_perp|, so the result
    is always the north pole (0, 0, 1).
    """
    if psi_perp is None:
        psi_perp = default_orthogonal_complement(psi)

    basis = _orthonormal_pair(psi.amplitudes, psi_perp.amplitudes)
    rho = np.outer(psi.amplitudes, psi.amplitudes.conj())
    block = basis.conj().T @ rho @ basis
    # Hermitize away rounding before validation
    block = 0.5 * (block + block.conj().T)
    return density_to_bloch(block / np.trace(block).real)


def project_mixed_to_qubit(rho, basis_pair) -> QubitProjection:
    """Bloch vector of the renormalized 2x2 block of rho on a two-dimensional subspace.

    The weight is the trace of the block, i.e. the probability that the state
    lies in the subspace.
    """
    rho = validate_density_matrix(rho)
    first, second = (np.asarray(v, dtype=complex).ravel() for v in basis_pair)
    if first.size != rho.shape[0]:
        raise InvalidInputError(
            f"Basis vectors have dimension {first.size}, density matrix {rho.shape[0]}"
        )
    basis = _orthonormal_pair(first, second)

    block = basis.conj().T @ rho @ basis
    block = 0.5 * (block + block.conj().T)
    weight = float(np.trace(block).real)
    if weight < 1e-12:
        raise InvalidInputError("State has no support on the chosen two-dimensional subspace")
    if weight < 1 - settings.bloch_tolerance:
        logger.warning(f"Projected state carries weight {weight:.6g} of the full state")

    return QubitProjection(density_to_bloch(block / weight), min(weight, 1.0))


def spin_coherent_state(theta: float, phi: float) -> BlochVector:
    """SU(2) coherent state of a qubit, pointing along (theta, phi)."""
    return BlochVector(
        math.sin(theta) * math.cos(phi),
        math.sin(theta) * math.sin(phi),
        math.cos(theta),
    )


def glauber_coherent_state(alpha: complex, dim: int) -> PureStateVector:
    """Fock-basis coherent state |alpha>, truncated to dim levels and renormalized."""
    if dim < 2:
        raise InvalidInputError(f"Truncation dimension must be at least 2, got {dim}")
    amplitudes = np.empty(dim, dtype=complex)
    amplitudes[0] = 1.0
    for n in range(1, dim):
        amplitudes[n] = amplitudes[n - 1] * alpha / math.sqrt(n)
    return PureStateVector.normalized(amplitudes)


def random_bloch_vector(rng: np.random.Generator) -> BlochVector:
    """Uniform sample from the Bloch ball."""
    direction = rng.normal(size=3)
    direction /= np.linalg.norm(direction)
    return BlochVector.from_array(direction * rng.random() ** (1 / 3))


def random_pure_state(dim: int, rng: np.random.Generator) -> PureStateVector:
    """Haar-random pure state in dimension dim."""
    return PureStateVector.normalized(rng.normal(size=dim) + 1j * rng.normal(size=dim))
