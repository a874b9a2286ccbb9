"""
Dynamics service
----------------
Fixed-step classical RK4 integration of a generator, trajectory recording,
long-horizon stationary search and Liouvillian null-space analysis.

For a linear generator with superoperator L the four RK4 stages collapse to
the step propagator P = I + hL + (hL)^2/2 + (hL)^3/6 + (hL)^4/24, which is
applied to the column-stacked state. Callables without a superoperator go
through the stage-by-stage rk4_step.
"""

import json
import logging
from dataclasses import asdict, dataclass, field
from typing import Callable, List, Optional, Union

import numpy as np
from scipy import linalg as sla

from core.config import get_settings
from core.exceptions import NoConvergence, NoNullVector, StepSizeUnstable
from core.linalg import DensityMatrix, matrix_to_payload
from models.generators import Generator, unvec, vec
from schemas.physics import IntegratorConfig, StationaryMethod

logger = logging.getLogger(__name__)

Rhs = Callable[[np.ndarray], np.ndarray]


@dataclass
class PositivityViolation:
    time: float
    min_eigenvalue: float


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # shape (n, 4, 4)
    max_trace_drift: float = 0.0
    max_hermiticity_correction: float = 0.0
    min_eigenvalue: float = 1.0
    violations: List[PositivityViolation] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.times)

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def density_matrix(self, index: int) -> DensityMatrix:
        return DensityMatrix(self.states[index])

    def entries(self, i: int, j: int) -> np.ndarray:
        """Time series of the 1-indexed entry rho_ij."""
        return self.states[:, i - 1, j - 1]

    def to_dict(self) -> dict:
        return {
            "times": self.times.tolist(),
            "states": [matrix_to_payload(s) for s in self.states],
            "max_trace_drift": self.max_trace_drift,
            "max_hermiticity_correction": self.max_hermiticity_correction,
            "min_eigenvalue": self.min_eigenvalue,
            "violations": [asdict(v) for v in self.violations],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


@dataclass
class StationaryResult:
    state: Optional[DensityMatrix]
    residual: float
    method: StationaryMethod
    null_space_dimension: Optional[int] = None
    time: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "state": self.state.to_payload() if self.state is not None else None,
            "residual": self.residual,
            "method": self.method.value,
            "null_space_dimension": self.null_space_dimension,
            "time": self.time,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def rk4_step(rho: np.ndarray, rhs: Rhs, dt: float) -> np.ndarray:
    k1 = rhs(rho)
    k2 = rhs(rho + 0.5 * dt * k1)
    k3 = rhs(rho + 0.5 * dt * k2)
    k4 = rhs(rho + dt * k3)
    return rho + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rk4_propagator(superoperator: np.ndarray, dt: float) -> np.ndarray:
    """One RK4 step of d vec/dt = L vec as a matrix."""
    h = dt * superoperator
    propagator = np.eye(h.shape[0], dtype=complex)
    term = np.eye(h.shape[0], dtype=complex)
    for k in range(1, 5):
        term = term @ h / k
        propagator = propagator + term
    return propagator


def _stepper(generator: Union[Generator, Rhs], dt: float) -> Callable[[np.ndarray], np.ndarray]:
    if isinstance(generator, Generator):
        propagator = rk4_propagator(generator.superoperator(), dt)
        return lambda rho: unvec(propagator @ vec(rho))
    return lambda rho: rk4_step(rho, generator, dt)


def _initial_array(rho0: Union[DensityMatrix, np.ndarray]) -> np.ndarray:
    data = rho0.data if isinstance(rho0, DensityMatrix) else np.asarray(rho0)
    return np.array(data, dtype=complex)


def integrate(
    rho0: Union[DensityMatrix, np.ndarray],
    generator: Union[Generator, Rhs],
    cfg: Optional[IntegratorConfig] = None,
) -> Trajectory:
    """
    Integrate d rho/dt = generator(rho) from t = 0 to cfg.t_max.

    Args:
        rho0: Initial state
        generator: Generator (propagator path) or a plain right-hand side callable
        cfg: Step, horizon and record stride

    Returns:
        Trajectory sampled every record_stride steps, final step included
    """
    settings = get_settings()
    cfg = cfg or IntegratorConfig(
        dt=settings.TIME_STEP, t_max=settings.TIME_HORIZON, record_stride=settings.RECORD_STRIDE
    )
    rho = _initial_array(rho0)
    if isinstance(generator, Generator):
        generator.check_state(rho)
    step = _stepper(generator, cfg.dt)
    n_steps = cfg.steps

    times, states = [], []
    trajectory = Trajectory(times=np.empty(0), states=np.empty((0, 4, 4), dtype=complex))

    def record(k: int, state: np.ndarray):
        t = k * cfg.dt
        times.append(t)
        states.append(state.copy())
        trajectory.max_trace_drift = max(trajectory.max_trace_drift, abs(np.trace(state) - 1.0))
        smallest = float(np.linalg.eigvalsh(state)[0])
        trajectory.min_eigenvalue = min(trajectory.min_eigenvalue, smallest)
        if smallest < -settings.POSITIVITY_TOLERANCE:
            trajectory.violations.append(PositivityViolation(time=t, min_eigenvalue=smallest))
            logger.warning(f"⚠️ [DYNAMICS] Positivity violation at t={t:.6g}: min eigenvalue {smallest:.3e}")

    record(0, rho)
    for k in range(1, n_steps + 1):
        rho = step(rho)
        hermitized = 0.5 * (rho + rho.conj().T)
        trajectory.max_hermiticity_correction = max(
            trajectory.max_hermiticity_correction, float(np.max(np.abs(rho - hermitized)))
        )
        rho = hermitized
        if np.max(np.abs(rho)) > settings.UNSTABLE_ENTRY:
            logger.error(f"❌ [DYNAMICS] Integration diverged at t={k * cfg.dt:.6g} with dt={cfg.dt}")
            raise StepSizeUnstable(f"Entry magnitude above {settings.UNSTABLE_ENTRY} at step {k} (dt={cfg.dt})")
        if k % cfg.record_stride == 0 or k == n_steps:
            record(k, rho)

    trajectory.times = np.array(times)
    trajectory.states = np.array(states)
    logger.debug(
        f"[DYNAMICS] {n_steps} steps, trace drift {trajectory.max_trace_drift:.3e}, "
        f"hermiticity correction {trajectory.max_hermiticity_correction:.3e}"
    )
    return trajectory


def stationary_from(
    rho0: Union[DensityMatrix, np.ndarray],
    generator: Generator,
    tol: Optional[float] = None,
    dt: Optional[float] = None,
    t_max: Optional[float] = None,
) -> StationaryResult:
    """
    Integrate until max |d rho/dt| < tol.

    The RK4 propagator shares its fixed points with the generator, so the
    larger default step changes the path but not the limit.
    """
    settings = get_settings()
    tol = settings.STATIONARY_TOLERANCE if tol is None else tol
    dt = settings.STATIONARY_TIME_STEP if dt is None else dt
    t_max = settings.STATIONARY_MAX_TIME if t_max is None else t_max
    interval = settings.STATIONARY_CHECK_INTERVAL

    rho = _initial_array(rho0)
    generator.check_state(rho)
    step = _stepper(generator, dt)

    best = generator.residual(rho)
    stalled = 0
    k = 0
    n_steps = int(round(t_max / dt))
    while best >= tol:
        if k >= n_steps:
            logger.warning(f"⚠️ [DYNAMICS] Stationary search hit t_max={t_max} with residual {best:.3e}")
            raise NoConvergence(f"Residual {best:.3e} above {tol} at t_max={t_max}")
        for _ in range(interval):
            rho = step(rho)
        rho = 0.5 * (rho + rho.conj().T)
        k += interval
        if np.max(np.abs(rho)) > settings.UNSTABLE_ENTRY:
            raise StepSizeUnstable(f"Stationary search diverged at t={k * dt:.6g} (dt={dt})")
        residual = generator.residual(rho)
        if residual < best:
            best = residual
            stalled = 0
        else:
            stalled += 1
            if stalled >= settings.STATIONARY_STALL_LIMIT:
                logger.warning(f"⚠️ [DYNAMICS] Residual stalled at {best:.3e} after t={k * dt:.6g}")
                raise NoConvergence(f"Residual stalled at {best:.3e} for {stalled} checks")

    logger.debug(f"[DYNAMICS] Stationary at t={k * dt:.6g}, residual {best:.3e}")
    return StationaryResult(
        state=DensityMatrix(rho),
        residual=best,
        method=StationaryMethod.LONG_TIME,
        time=k * dt,
    )


def null_space_steady(
    generator: Generator,
    threshold: Optional[float] = None,
    failure: Optional[float] = None,
) -> StationaryResult:
    """
    Null space of the superoperator restricted to the generator's support.

    A one-dimensional null space yields the normalized stationary state. For
    higher dimensions the stationary state depends on the initial condition
    and state is None; use stationary_from with the initial state instead.
    """
    settings = get_settings()
    threshold = settings.NULL_SPACE_THRESHOLD if threshold is None else threshold
    failure = settings.NULL_SPACE_FAILURE if failure is None else failure

    support = generator.support
    block = generator.superoperator()[np.ix_(support, support)]
    _, singular, vh = sla.svd(block)
    if singular.min() > failure:
        raise NoNullVector(f"Smallest singular value {singular.min():.3e} above {failure}")

    dimension = max(int(np.sum(singular < threshold)), 1)
    logger.debug(f"[DYNAMICS] Null space of {generator!r}: dimension {dimension}")
    if dimension > 1:
        return StationaryResult(
            state=None,
            residual=float(singular[-dimension:].max()),
            method=StationaryMethod.NULL_SPACE,
            null_space_dimension=dimension,
        )

    full = np.zeros(16, dtype=complex)
    full[support] = vh[-1].conj()
    m = unvec(full)
    m = m / np.trace(m)
    m = 0.5 * (m + m.conj().T)
    return StationaryResult(
        state=DensityMatrix(m),
        residual=generator.residual(m),
        method=StationaryMethod.NULL_SPACE,
        null_space_dimension=1,
    )
