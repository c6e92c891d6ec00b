"""Exact small-dimension linear algebra for qubit states and maps.

States live in the Bloch picture, rho = (1 + r . sigma) / 2, and maps are
handled in their real affine representation r -> Lambda r + tau.  The Choi
matrix built here is trace-normalized to 1, so a map is completely positive
iff the minimum Choi eigenvalue is >= 0 (up to tolerance).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SingularityError, ValidationError

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)

PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)

#: |det Lambda| at or below this is treated as singular, never pseudo-inverted.
SINGULARITY_THRESHOLD = 1e-12


def density_from_bloch(r) -> np.ndarray:
    """Density matrix (1 + r . sigma) / 2 for a Bloch vector ``r``."""
    r = np.asarray(r, dtype=float)
    rho = 0.5 * IDENTITY_2.copy()
    for component, sigma in zip(r, PAULIS):
        rho += 0.5 * component * sigma
    return rho


def bloch_from_density(rho) -> np.ndarray:
    """Bloch vector with components tr(rho sigma_i).

    Raises:
        ValidationError: if tr(rho) differs from 1 by more than 1e-10.
    """
    rho = np.asarray(rho, dtype=complex)
    trace = np.trace(rho)
    if abs(trace - 1.0) > 1e-10:
        raise ValidationError(f"density matrix must have unit trace, got {trace}")
    return np.array([np.trace(rho @ sigma).real for sigma in PAULIS])


def is_valid_state(rho, tol: float = 1e-12) -> bool:
    """True if ``rho`` is Hermitian, unit-trace and positive within ``tol``."""
    rho = np.asarray(rho, dtype=complex)
    if np.max(np.abs(rho - rho.conj().T)) > max(tol, 1e-12):
        return False
    if abs(np.trace(rho).real - 1.0) > 1e-10:
        return False
    return float(np.min(np.linalg.eigvalsh(rho))) >= -max(tol, 1e-12)


@dataclass(frozen=True)
class AffineRep:
    """Affine (Pauli-transfer) representation r -> matrix @ r + shift."""

    matrix: np.ndarray
    shift: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        object.__setattr__(self, "matrix", np.asarray(self.matrix, dtype=float))
        object.__setattr__(self, "shift", np.asarray(self.shift, dtype=float))
        if self.matrix.shape != (3, 3) or self.shift.shape != (3,):
            raise ValidationError("affine representation needs a 3x3 matrix and 3-vector")

    @classmethod
    def identity(cls) -> "AffineRep":
        return cls(np.eye(3), np.zeros(3))

    @classmethod
    def diagonal(cls, lam1: float, lam2: float, lam3: float, shift3: float = 0.0) -> "AffineRep":
        return cls(np.diag([lam1, lam2, lam3]), np.array([0.0, 0.0, shift3]))

    @property
    def is_unital(self) -> bool:
        return float(np.linalg.norm(self.shift)) <= 1e-12


def apply_affine(rep: AffineRep, r) -> np.ndarray:
    """Image of the Bloch vector ``r`` under the map."""
    return rep.matrix @ np.asarray(r, dtype=float) + rep.shift


def compose_affine(second: AffineRep, first: AffineRep) -> AffineRep:
    """Composition acting as ``second`` after ``first``."""
    return AffineRep(second.matrix @ first.matrix,
                     second.matrix @ first.shift + second.shift)


def invert_affine(rep: AffineRep) -> AffineRep:
    """Exact inverse of the affine action.

    Raises:
        SingularityError: if |det matrix| <= SINGULARITY_THRESHOLD.
    """
    det = float(np.linalg.det(rep.matrix))
    if abs(det) <= SINGULARITY_THRESHOLD:
        raise SingularityError(f"affine map is singular, det = {det:.3e}", value=det)
    inverse = np.linalg.inv(rep.matrix)
    return AffineRep(inverse, -inverse @ rep.shift)


def _apply_to_operator(rep: AffineRep, op: np.ndarray) -> np.ndarray:
    # Linear extension of the trace-preserving map to arbitrary 2x2 operators:
    # identity component picks up the shift, Pauli components transform by the matrix.
    a0 = 0.5 * np.trace(op)
    a = np.array([0.5 * np.trace(sigma @ op) for sigma in PAULIS])
    out = a0 * IDENTITY_2.copy()
    image = rep.matrix.astype(complex) @ a + a0 * rep.shift
    for component, sigma in zip(image, PAULIS):
        out += component * sigma
    return out


def choi_from_affine(rep: AffineRep) -> np.ndarray:
    """Trace-normalized Choi matrix of the map.

    Built by applying the channel to the four matrix units of the maximally
    entangled state construction; Hermitian by construction, trace 1 for
    trace-preserving maps.
    """
    choi = np.zeros((4, 4), dtype=complex)
    for k in range(2):
        for l in range(2):
            unit = np.zeros((2, 2), dtype=complex)
            unit[k, l] = 1.0
            choi += 0.5 * np.kron(_apply_to_operator(rep, unit), unit)
    return choi


def hermitian_eigenvalues(matrix) -> np.ndarray:
    """Ascending real eigenvalues of a 4x4 (or NxN) Hermitian matrix.

    The decomposition is residual-checked: ||V diag(w) V^dag - M|| must not
    exceed 1e-10.

    Raises:
        ValidationError: if the input is not Hermitian within 1e-10.
        SingularityError: if the residual check fails.
    """
    matrix = np.asarray(matrix, dtype=complex)
    deviation = float(np.max(np.abs(matrix - matrix.conj().T)))
    if deviation > 1e-10:
        raise ValidationError(f"matrix is not Hermitian, max deviation {deviation:.3e}")
    values, vectors = np.linalg.eigh(matrix)
    residual = float(np.max(np.abs(vectors @ np.diag(values) @ vectors.conj().T - matrix)))
    if residual > 1e-10:
        raise SingularityError(f"eigendecomposition residual {residual:.3e} too large",
                               value=residual)
    return values


def min_choi_eigenvalue(rep: AffineRep) -> float:
    """Smallest eigenvalue of the trace-normalized Choi matrix."""
    return float(hermitian_eigenvalues(choi_from_affine(rep))[0])


def trace_distance(rho1, rho2) -> float:
    """Trace distance tr|rho1 - rho2| / 2 between two valid qubit states.

    Raises:
        ValidationError: if either input is not a valid state.
    """
    for label, rho in (("first", rho1), ("second", rho2)):
        if not is_valid_state(rho):
            raise ValidationError(f"{label} argument is not a valid density matrix")
    delta = np.asarray(rho1, dtype=complex) - np.asarray(rho2, dtype=complex)
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(delta))))
