import numpy as np

from core.exceptions import NegativeRate
from core.linalg import IDENTITY2, LOWERING, SIGMA_X, SIGMA_Z, DensityMatrix, kron
from models.waveguide import Rates

# |Psi-> = (|e,g> - |g,e>)/sqrt(2), annihilated by the collective jump operator
DARK_STATE = np.array([0.0, 1.0, -1.0, 0.0], dtype=complex) / np.sqrt(2.0)


def jump_operator(xi: float) -> np.ndarray:
    """Collective decay c = -sqrt(xi) (sigma x I + I x sigma)."""
    if xi < 0:
        raise NegativeRate(f"Decay rate xi={xi} is negative")
    return -np.sqrt(xi) * (kron(LOWERING, IDENTITY2) + kron(IDENTITY2, LOWERING))


def driving_hamiltonian(r: Rates) -> np.ndarray:
    """H = (omega0 + delta)(n x I + I x n) + gamma (sigma^dag x sigma + sigma x sigma^dag)."""
    number = LOWERING.conj().T @ LOWERING
    raising = LOWERING.conj().T
    local = r.level_shift * (kron(number, IDENTITY2) + kron(IDENTITY2, number))
    exchange = r.gamma * (kron(raising, LOWERING) + kron(LOWERING, raising))
    return local + exchange


def feedback_operator(mu: float) -> np.ndarray:
    """F(mu) = mu (sx x sz + sz x sx) - (sx x I + I x sx)."""
    if abs(mu) > 1.0:
        raise ValueError(f"Feedback strength mu={mu} outside [-1, 1]")
    symmetric = kron(SIGMA_X, SIGMA_Z) + kron(SIGMA_Z, SIGMA_X)
    drive = kron(SIGMA_X, IDENTITY2) + kron(IDENTITY2, SIGMA_X)
    return mu * symmetric - drive


def dark_population(rho) -> float:
    """<Psi-| rho |Psi->, conserved by the collective decay and by both feedback schemes."""
    data = rho.data if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    return float(np.real(DARK_STATE.conj() @ data @ DARK_STATE))
