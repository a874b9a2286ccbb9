"""
Discord service
---------------
Total correlation, classical correlation and quantum discord of two-qubit
X states through the Pauli-coefficient pipeline, with a measurement on N.

    T = S(rho^M) + S(rho^N) + sum E_i log2 E_i
    C = S(rho^M) - min_{theta, phi} [p0 S(rho_0) + p1 S(rho_1)]
    Q = T - C

The minimization is a 61 x 121 (theta, phi) grid followed by a bounded
quasi-Newton polish. brute_force_discord is the structure-agnostic oracle:
explicit projectors over the full Bloch sphere on either qubit.
"""

import json
import logging
import math
from dataclasses import asdict, dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.optimize import minimize
from scipy.special import xlogy

from core.config import get_settings
from core.exceptions import NotXState
from core.linalg import (
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    X_MASK,
    DensityMatrix,
    Subsystem,
    binary_entropy,
    partial_trace,
    von_neumann_entropy,
)

logger = logging.getLogger(__name__)

X_STATE_TOLERANCE = 1e-10
CLAMP_TOLERANCE = 1e-9
ZERO_PROBABILITY = 1e-12
TIE_TOLERANCE = 1e-12


@dataclass(frozen=True)
class XStateCoeffs:
    alpha1: float
    alpha2: float
    alpha3: float
    alpha4: float
    alpha5: float

    def to_matrix(self) -> np.ndarray:
        """(1/4)[I x I + sum alpha_i s_i x s_i + alpha4 I x s_z + alpha5 s_z x I]."""
        eye = np.eye(2, dtype=complex)
        m = np.kron(eye, eye)
        m = m + self.alpha1 * np.kron(SIGMA_X, SIGMA_X)
        m = m + self.alpha2 * np.kron(SIGMA_Y, SIGMA_Y)
        m = m + self.alpha3 * np.kron(SIGMA_Z, SIGMA_Z)
        m = m + self.alpha4 * np.kron(eye, SIGMA_Z)
        m = m + self.alpha5 * np.kron(SIGMA_Z, eye)
        return m / 4.0

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)


@dataclass(frozen=True)
class MeasurementAngles:
    theta: float
    phi: float

    def __post_init__(self):
        if not 0.0 <= self.theta <= math.pi:
            raise ValueError(f"theta={self.theta} outside [0, pi]")
        if not 0.0 <= self.phi < 2.0 * math.pi:
            raise ValueError(f"phi={self.phi} outside [0, 2pi)")

    @property
    def epsilon(self) -> Tuple[float, float, float]:
        half = self.theta / 2.0
        return (
            math.sin(half) * math.cos(self.phi / 2.0),
            math.sin(half) * math.sin(self.phi / 2.0),
            math.cos(half),
        )

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)


@dataclass(frozen=True)
class ConditionalOutcome:
    q1: float
    q2: float
    q3: float
    chi: float
    probability: float

    @property
    def entropy(self) -> float:
        return float(binary_entropy((1.0 + self.chi) / 2.0))


@dataclass(frozen=True)
class CorrelationTriple:
    total: float
    classical: float
    discord: float
    argmin: Optional[MeasurementAngles] = None

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)


def _as_density(rho) -> DensityMatrix:
    return rho if isinstance(rho, DensityMatrix) else DensityMatrix(rho)


def _require_x_state(rho: DensityMatrix) -> None:
    off = rho.off_x_magnitude()
    if off > X_STATE_TOLERANCE:
        raise NotXState(f"Off-X entry of magnitude {off:.3e} exceeds {X_STATE_TOLERANCE}")


def normalize_phases(rho) -> DensityMatrix:
    """
    Local diagonal unitary making rho14 and rho23 real and non-negative.

    Correlations are invariant under local unitaries; the Pauli pipeline
    assumes real coherences.
    """
    rho = _as_density(rho)
    _require_x_state(rho)
    arg14 = np.angle(rho.entry(1, 4)) if abs(rho.entry(1, 4)) > 0 else 0.0
    arg23 = np.angle(rho.entry(2, 3)) if abs(rho.entry(2, 3)) > 0 else 0.0
    if arg14 == 0.0 and arg23 == 0.0:
        return rho
    a = -(arg14 + arg23) / 2.0
    b = -(arg14 - arg23) / 2.0
    u = np.diag(np.exp(1j * np.array([a + b, a, b, 0.0])))
    logger.debug(f"[DISCORD] Normalized coherence phases ({arg14:.6g}, {arg23:.6g})")
    m = u @ rho.data @ u.conj().T
    m[~X_MASK] = 0.0
    return DensityMatrix(0.5 * (m + m.conj().T))


def x_coeffs(rho) -> XStateCoeffs:
    rho = _as_density(rho)
    _require_x_state(rho)
    r = rho.data
    return XStateCoeffs(
        alpha1=float((r[0, 3] + r[1, 2] + r[2, 1] + r[3, 0]).real),
        alpha2=float((r[1, 2] + r[2, 1] - r[0, 3] - r[3, 0]).real),
        alpha3=float((r[0, 0] + r[3, 3] - r[1, 1] - r[2, 2]).real),
        alpha4=float((r[0, 0] + r[2, 2] - r[1, 1] - r[3, 3]).real),
        alpha5=float((r[0, 0] + r[1, 1] - r[2, 2] - r[3, 3]).real),
    )


def x_eigenvalues(c: XStateCoeffs) -> np.ndarray:
    """(E0, E1, E2, E3) from the Pauli coefficients; roundoff negatives clamp to 0."""
    outer = math.hypot(c.alpha4 + c.alpha5, c.alpha1 - c.alpha2)
    inner = math.hypot(c.alpha4 - c.alpha5, c.alpha1 + c.alpha2)
    values = np.array([
        (1.0 + c.alpha3) + outer,
        (1.0 + c.alpha3) - outer,
        (1.0 - c.alpha3) + inner,
        (1.0 - c.alpha3) - inner,
    ]) / 4.0
    return np.where((values < 0.0) & (values >= -CLAMP_TOLERANCE), 0.0, values)


def mutual_information(rho) -> float:
    rho = normalize_phases(rho)
    eigenvalues = np.clip(x_eigenvalues(x_coeffs(rho)), 0.0, None)
    total = (
        von_neumann_entropy(partial_trace(rho, Subsystem.M))
        + von_neumann_entropy(partial_trace(rho, Subsystem.N))
        + float(np.sum(xlogy(eigenvalues, eigenvalues))) / math.log(2.0)
    )
    return max(total, 0.0) if total > -CLAMP_TOLERANCE else total


def _objective_grid(c: XStateCoeffs, e1, e2, e3) -> np.ndarray:
    """p0 S(rho_0) + p1 S(rho_1), vectorized over direction arrays."""
    e1, e2, e3 = (np.asarray(e, dtype=float) for e in (e1, e2, e3))
    value = np.zeros(np.broadcast(e1, e2, e3).shape)
    for sign in (1.0, -1.0):
        denom = 1.0 + sign * c.alpha4 * e3
        probability = denom / 2.0
        live = probability >= ZERO_PROBABILITY
        safe = np.where(live, denom, 1.0)
        q1 = sign * c.alpha1 * e1 / safe
        q2 = sign * c.alpha2 * e2 / safe
        q3 = (c.alpha3 * sign * e3 + c.alpha5) / safe
        chi = np.minimum(np.sqrt(q1 ** 2 + q2 ** 2 + q3 ** 2), 1.0)
        value = value + np.where(live, probability * binary_entropy((1.0 + chi) / 2.0), 0.0)
    return value


def conditional_outcomes(c: XStateCoeffs, m: MeasurementAngles) -> Tuple[ConditionalOutcome, ConditionalOutcome]:
    """Bloch vectors and probabilities of M after outcomes k = 0, 1 on N."""
    e1, e2, e3 = m.epsilon
    outcomes = []
    for sign in (1.0, -1.0):
        denom = 1.0 + sign * c.alpha4 * e3
        if denom / 2.0 < ZERO_PROBABILITY:
            outcomes.append(ConditionalOutcome(0.0, 0.0, 0.0, 0.0, 0.0))
            continue
        q1 = sign * c.alpha1 * e1 / denom
        q2 = sign * c.alpha2 * e2 / denom
        q3 = (c.alpha3 * sign * e3 + c.alpha5) / denom
        outcomes.append(ConditionalOutcome(q1, q2, q3, math.sqrt(q1 * q1 + q2 * q2 + q3 * q3), denom / 2.0))
    return outcomes[0], outcomes[1]


def conditional_entropy_objective(c: XStateCoeffs, m: MeasurementAngles) -> float:
    e1, e2, e3 = m.epsilon
    return float(_objective_grid(c, e1, e2, e3))


def _angles_to_epsilon(theta, phi):
    half = np.asarray(theta) / 2.0
    phi = np.asarray(phi) / 2.0
    return np.sin(half) * np.cos(phi), np.sin(half) * np.sin(phi), np.cos(half)


def _minimize_objective(c: XStateCoeffs) -> Tuple[float, MeasurementAngles]:
    settings = get_settings()
    thetas = np.linspace(0.0, math.pi, settings.THETA_POINTS)
    phis = np.linspace(0.0, 2.0 * math.pi, settings.PHI_POINTS, endpoint=False)
    theta_grid, phi_grid = np.meshgrid(thetas, phis, indexing="ij")
    values = _objective_grid(c, *_angles_to_epsilon(theta_grid, phi_grid))

    # first grid point within the tie tolerance: smaller theta, then smaller phi
    flat = values.ravel()
    index = int(np.flatnonzero(flat <= flat.min() + TIE_TOLERANCE)[0])
    i, j = np.unravel_index(index, values.shape)
    best_value = float(values[i, j])
    best = (float(thetas[i]), float(phis[j]))

    def objective(x: np.ndarray) -> float:
        return float(_objective_grid(c, *_angles_to_epsilon(x[0], x[1])))

    result = minimize(
        objective,
        x0=np.array(best),
        method="L-BFGS-B",
        bounds=[(0.0, math.pi), (0.0, 2.0 * math.pi)],
        options={"ftol": settings.REFINE_TOLERANCE * 1e-3, "gtol": settings.REFINE_TOLERANCE},
    )
    if result.fun < best_value:
        logger.debug(f"[DISCORD] Refined objective {best_value:.12g} -> {result.fun:.12g}")
        best_value = float(result.fun)
        best = (float(result.x[0]), float(result.x[1]) % (2.0 * math.pi))
    return best_value, MeasurementAngles(theta=best[0], phi=best[1])


def classical_correlation(rho) -> Tuple[float, MeasurementAngles]:
    rho = normalize_phases(rho)
    minimum, angles = _minimize_objective(x_coeffs(rho))
    classical = von_neumann_entropy(partial_trace(rho, Subsystem.M)) - minimum
    if -CLAMP_TOLERANCE < classical < 0.0:
        classical = 0.0
    return classical, angles


def quantum_discord(rho) -> CorrelationTriple:
    rho = normalize_phases(rho)
    total = mutual_information(rho)
    classical, angles = classical_correlation(rho)
    # keep Q = T - C exact when roundoff would make it slightly negative
    if -CLAMP_TOLERANCE < total - classical < 0.0:
        classical = total
    return CorrelationTriple(total=total, classical=classical, discord=total - classical, argmin=angles)


# ---------------------------------------------------------------------------
# Brute-force oracle
# ---------------------------------------------------------------------------

def _projectors(theta: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """Rank-1 projectors (I + s n.sigma)/2 for s = +1, -1; shape (2, G, 2, 2)."""
    n = np.stack([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)], axis=-1)
    bloch = np.einsum("gk,kab->gab", n, np.stack([SIGMA_X, SIGMA_Y, SIGMA_Z]))
    eye = np.eye(2, dtype=complex)
    return np.stack([(eye + bloch) / 2.0, (eye - bloch) / 2.0])


def _measured_conditional_entropy(data: np.ndarray, theta: np.ndarray, phi: np.ndarray, side: Subsystem) -> np.ndarray:
    """sum_k p_k S(rho_k) of the unmeasured qubit after projective measurement on `side`."""
    tensor = data.reshape(2, 2, 2, 2)
    projectors = _projectors(np.ravel(theta), np.ravel(phi))
    if side is Subsystem.N:
        conditional = np.einsum("iajb,sgba->sgij", tensor, projectors)
    else:
        conditional = np.einsum("aibj,sgba->sgij", tensor, projectors)
    probability = np.real(np.einsum("sgii->sg", conditional))
    safe = np.where(probability >= ZERO_PROBABILITY, probability, 1.0)
    normalized = conditional / safe[..., None, None]
    normalized = 0.5 * (normalized + np.conj(np.swapaxes(normalized, -1, -2)))
    eigenvalues = np.clip(np.linalg.eigvalsh(normalized), 0.0, 1.0)
    entropy = -xlogy(eigenvalues, eigenvalues).sum(axis=-1) / math.log(2.0)
    weighted = np.where(probability >= ZERO_PROBABILITY, probability * entropy, 0.0)
    return weighted.sum(axis=0).reshape(np.shape(theta))


def conditional_entropy_scan(
    rho,
    resolution: Optional[int] = None,
    side: Subsystem = Subsystem.N,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Measured conditional entropy over a full-sphere grid.

    Returns:
        (thetas, phis, values) with values[i, j] at direction (thetas[i], phis[j])
    """
    rho = _as_density(rho)
    resolution = resolution or get_settings().BRUTE_FORCE_RESOLUTION
    thetas = np.linspace(0.0, math.pi, resolution)
    phis = np.linspace(0.0, 2.0 * math.pi, resolution, endpoint=False)
    theta_grid, phi_grid = np.meshgrid(thetas, phis, indexing="ij")
    values = _measured_conditional_entropy(rho.data, theta_grid, phi_grid, Subsystem(side))
    return thetas, phis, values


def brute_force_discord(
    rho,
    resolution: Optional[int] = None,
    side: Subsystem = Subsystem.N,
    polish: bool = True,
) -> float:
    """
    Discord of any two-qubit state with the measurement on `side`, by direct enumeration.

    Args:
        rho: Two-qubit state, X-shaped or not
        resolution: Grid points per angle (resolution^2 directions)
        side: Measured qubit
        polish: Refine the best grid direction with a bounded quasi-Newton search

    Returns:
        Q = T - C in bits
    """
    rho = _as_density(rho)
    side = Subsystem(side)
    thetas, phis, values = conditional_entropy_scan(rho, resolution, side)
    i, j = np.unravel_index(int(np.argmin(values)), values.shape)
    minimum = float(values[i, j])

    if polish:
        def objective(x: np.ndarray) -> float:
            return float(_measured_conditional_entropy(rho.data, np.array(x[0]), np.array(x[1]), side))

        result = minimize(
            objective,
            x0=np.array([thetas[i], phis[j]]),
            method="L-BFGS-B",
            bounds=[(0.0, math.pi), (0.0, 2.0 * math.pi)],
        )
        minimum = min(minimum, float(result.fun))

    unmeasured = Subsystem.M if side is Subsystem.N else Subsystem.N
    marginal_m = von_neumann_entropy(partial_trace(rho, Subsystem.M))
    marginal_n = von_neumann_entropy(partial_trace(rho, Subsystem.N))
    total = marginal_m + marginal_n - von_neumann_entropy(rho)
    classical = von_neumann_entropy(partial_trace(rho, unmeasured)) - minimum
    return max(total - classical, 0.0) if total - classical > -CLAMP_TOLERANCE else total - classical
