"""
Two-qubit linear algebra
------------------------
Fixed-size dense kernels for the 2x2 single-qubit and 4x4 two-qubit spaces:
Kronecker products, partial traces, Hermitian spectra and von Neumann entropy,
plus the validated DensityMatrix carrier and its JSON matrix payload.

Basis ordering: |1> = |e,e>, |2> = |e,g>, |3> = |g,e>, |4> = |g,g>, with the
excited level at index 0 of each qubit.
"""

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Union

import numpy as np
from scipy.special import xlogy

from core.exceptions import InvalidDensityMatrix, NegativeEigenvalue, NonHermitianInput

HERMITIAN_TOLERANCE = 1e-10
TRACE_TOLERANCE = 1e-10
POSITIVITY_TOLERANCE = 1e-8

IDENTITY2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
# sigma = |g><e| lowers the excited level
LOWERING = np.array([[0, 0], [1, 0]], dtype=complex)
RAISING = LOWERING.conj().T

# nonzero pattern of an X state: diagonal plus anti-diagonal
X_MASK = np.eye(4, dtype=bool) | np.fliplr(np.eye(4, dtype=bool))

MatrixLike = Union[np.ndarray, list]


class Subsystem(str, Enum):
    M = "M"
    N = "N"


def _as_matrix(m: MatrixLike, dim: int) -> np.ndarray:
    arr = np.asarray(m, dtype=complex)
    if arr.shape != (dim, dim):
        raise ValueError(f"Expected a {dim}x{dim} matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("Matrix entries must be finite")
    return arr


def kron(a: MatrixLike, b: MatrixLike) -> np.ndarray:
    """(a (x) b)[2i+k, 2j+l] = a[i, j] * b[k, l] for single-qubit operators."""
    return np.kron(_as_matrix(a, 2), _as_matrix(b, 2))


def partial_trace(rho: Union["DensityMatrix", MatrixLike], keep: Subsystem) -> np.ndarray:
    """
    Reduced state of one qubit.

    Args:
        rho: Two-qubit state (M is the first factor, N the second)
        keep: Subsystem whose reduced matrix is returned; the other one is traced out

    Returns:
        2x2 reduced density matrix
    """
    data = rho.data if isinstance(rho, DensityMatrix) else _as_matrix(rho, 4)
    tensor = data.reshape(2, 2, 2, 2)
    if Subsystem(keep) is Subsystem.M:
        return np.einsum("ikjk->ij", tensor)
    return np.einsum("kikj->ij", tensor)


def hermiticity_error(m: np.ndarray) -> float:
    return float(np.max(np.abs(m - m.conj().T)))


def hermitian_eigenvalues(m: MatrixLike) -> np.ndarray:
    """Ascending real spectrum of a Hermitian 2x2 or 4x4 matrix."""
    arr = np.asarray(m, dtype=complex)
    if arr.shape not in ((2, 2), (4, 4)):
        raise ValueError(f"Unsupported matrix shape {arr.shape}")
    error = hermiticity_error(arr)
    if error > HERMITIAN_TOLERANCE:
        raise NonHermitianInput(f"Matrix deviates from Hermitian by {error:.3e}")
    return np.linalg.eigvalsh(arr)


def entropy_of_spectrum(eigenvalues: np.ndarray) -> float:
    """-sum(l log2 l) with 0 log 0 = 0; eigenvalues in [-1e-8, 0) count as zero."""
    values = np.asarray(eigenvalues, dtype=float)
    if values.size and values.min() < -POSITIVITY_TOLERANCE:
        raise NegativeEigenvalue(f"Eigenvalue {values.min():.3e} below -{POSITIVITY_TOLERANCE}")
    values = np.clip(values, 0.0, None)
    return float(max(0.0, -np.sum(xlogy(values, values)) / np.log(2.0)))


def von_neumann_entropy(m: MatrixLike) -> float:
    """Entropy in bits of a Hermitian positive semidefinite matrix."""
    data = m.data if isinstance(m, DensityMatrix) else m
    return entropy_of_spectrum(hermitian_eigenvalues(data))


def binary_entropy(p: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """h(p) = -p log2 p - (1-p) log2 (1-p), vectorized, clipped to [0, 1]."""
    p = np.clip(np.asarray(p, dtype=float), 0.0, 1.0)
    q = 1.0 - p
    terms = -(xlogy(p, p) + xlogy(q, q)) / np.log(2.0)
    return terms if terms.ndim else float(terms)


def matrix_to_payload(m: np.ndarray) -> dict:
    """JSON matrix form {"re": [[...]], "im": [[...]]}, row-major."""
    m = np.asarray(m, dtype=complex)
    return {"re": m.real.tolist(), "im": m.imag.tolist()}


def matrix_from_payload(payload: dict) -> np.ndarray:
    try:
        re = np.asarray(payload["re"], dtype=float)
        im = np.asarray(payload.get("im", np.zeros_like(re)), dtype=float)
    except (KeyError, TypeError) as e:
        raise ValueError(f"Malformed matrix payload: {e}") from e
    if re.shape != im.shape:
        raise ValueError("Real and imaginary parts have different shapes")
    return re + 1j * im


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Validated two-qubit state: Hermitian, unit trace, positive semidefinite."""

    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        try:
            arr = _as_matrix(self.data, 4).copy()
        except ValueError as e:
            raise InvalidDensityMatrix(str(e)) from e
        error = hermiticity_error(arr)
        if error > HERMITIAN_TOLERANCE:
            raise NonHermitianInput(f"Density matrix deviates from Hermitian by {error:.3e}")
        trace = np.trace(arr)
        if abs(trace - 1.0) > TRACE_TOLERANCE:
            raise InvalidDensityMatrix(f"Trace {trace.real:.12g} differs from 1")
        smallest = float(np.linalg.eigvalsh(arr)[0])
        if smallest < -POSITIVITY_TOLERANCE:
            raise NegativeEigenvalue(f"Minimum eigenvalue {smallest:.3e} below -{POSITIVITY_TOLERANCE}")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @classmethod
    def werner(cls, a: float) -> "DensityMatrix":
        """(1-a) I/4 + a |Psi><Psi| with |Psi> = (|e,g> + |g,e>)/sqrt(2)."""
        if not 0.0 <= a <= 1.0:
            raise InvalidDensityMatrix(f"Werner weight a={a} outside [0, 1]")
        m = np.diag([1 - a, 1 + a, 1 + a, 1 - a]).astype(complex)
        m[1, 2] = m[2, 1] = 2 * a
        return cls(m / 4)

    @classmethod
    def maximally_mixed(cls) -> "DensityMatrix":
        return cls(np.eye(4, dtype=complex) / 4)

    @classmethod
    def basis_projector(cls, index: int) -> "DensityMatrix":
        """|k><k| for k in 1..4."""
        m = np.zeros((4, 4), dtype=complex)
        m[index - 1, index - 1] = 1.0
        return cls(m)

    @classmethod
    def random_x_state(cls, rng: np.random.Generator, real: bool = False) -> "DensityMatrix":
        """Random X state from two random positive 2x2 blocks on {|1>,|4>} and {|2>,|3>}."""
        m = np.zeros((4, 4), dtype=complex)
        for rows in ((0, 3), (1, 2)):
            b = rng.normal(size=(2, 2)) + (0.0 if real else 1j) * rng.normal(size=(2, 2))
            m[np.ix_(rows, rows)] = b @ b.conj().T
        m = m / np.trace(m).real
        return cls(0.5 * (m + m.conj().T))

    @classmethod
    def from_payload(cls, payload: dict) -> "DensityMatrix":
        return cls(matrix_from_payload(payload))

    def __getitem__(self, key):
        return self.data[key]

    def entry(self, i: int, j: int) -> complex:
        """1-indexed matrix element rho_ij."""
        return complex(self.data[i - 1, j - 1])

    @property
    def trace(self) -> float:
        return float(np.trace(self.data).real)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.data)

    def off_x_magnitude(self) -> float:
        return float(np.max(np.abs(self.data[~X_MASK])))

    def is_x_state(self, tol: float = 1e-10) -> bool:
        return self.off_x_magnitude() <= tol

    def to_payload(self) -> dict:
        return matrix_to_payload(self.data)

    def to_json(self) -> str:
        return json.dumps(self.to_payload(), indent=2)
