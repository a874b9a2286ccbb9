"""
Analytic service
----------------
Closed-form Werner trajectories, stationary matrices and stationary
correlations under the two symmetric feedback schemes:

    F1 (mu = -1)   trajectories regrouped into decaying exponentials,
                   stationary matrix independent of xi
    F2 (mu = +1)   trajectories with complex decay constants,
                   xi-dependent stationary matrix

Every closed-form correlation record carries the numeric triple of the
same stationary matrix; the numeric value is authoritative.
"""

import json
import logging
import math
from dataclasses import asdict, dataclass
from typing import Optional, Union

import numpy as np
from scipy.special import xlogy

from core.exceptions import NegativeRate, SingularParameter
from core.linalg import DensityMatrix
from schemas.physics import WernerParams, XInitial
from services.discord_service import CorrelationTriple, quantum_discord

logger = logging.getLogger(__name__)

SINGULAR_TOLERANCE = 1e-12
IMAGINARY_TOLERANCE = 1e-10
AGREEMENT_TOLERANCE = 1e-6

TimeLike = Union[float, np.ndarray]


@dataclass
class XSectorEntries:
    """X-sector entries at one or many times; rho14/rho41 are None when not available in closed form."""

    t: np.ndarray
    rho11: np.ndarray
    rho22: np.ndarray
    rho33: np.ndarray
    rho23: np.ndarray
    rho32: np.ndarray
    rho44: np.ndarray
    rho14: Optional[np.ndarray] = None
    rho41: Optional[np.ndarray] = None

    def matrix(self, index: Optional[int] = None) -> np.ndarray:
        """4x4 matrix at t[index] (or at the only time); missing coherences are zero."""
        pick = (lambda v: v) if index is None else (lambda v: v[index])
        m = np.zeros((4, 4), dtype=complex)
        m[0, 0], m[1, 1], m[2, 2], m[3, 3] = (pick(v) for v in (self.rho11, self.rho22, self.rho33, self.rho44))
        m[1, 2], m[2, 1] = pick(self.rho23), pick(self.rho32)
        if self.rho14 is not None:
            m[0, 3], m[3, 0] = pick(self.rho14), pick(self.rho41)
        return m

    def max_diagonal_imaginary(self) -> float:
        return float(max(np.max(np.abs(np.imag(v))) for v in (self.rho11, self.rho22, self.rho33, self.rho44)))


@dataclass
class ClosedFormCorrelations:
    scheme: str
    a: float
    xi: Optional[float]
    total: float
    classical: float
    discord: float
    numeric: CorrelationTriple
    deviation: float
    agrees: bool

    @property
    def triple(self) -> CorrelationTriple:
        return CorrelationTriple(total=self.total, classical=self.classical, discord=self.discord)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)


def _check_time(t: TimeLike) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("Time must be non-negative")
    return t


def _check_xi(xi: float) -> None:
    if xi < 0 or not math.isfinite(xi):
        raise NegativeRate(f"Decay rate xi={xi} must be finite and non-negative")


def _guard(value: complex, name: str) -> complex:
    if abs(value) < SINGULAR_TOLERANCE:
        raise SingularParameter(f"Denominator {name} vanishes ({abs(value):.3e})")
    return value


def _warn_imaginary(entries: XSectorEntries, scheme: str) -> XSectorEntries:
    residue = entries.max_diagonal_imaginary()
    if residue > IMAGINARY_TOLERANCE:
        logger.warning(f"⚠️ [ANALYTIC] {scheme} diagonal carries imaginary residue {residue:.3e}")
    return entries


def _bits(x, y) -> np.ndarray:
    """x log2 y with 0 log 0 = 0."""
    return xlogy(x, y) / math.log(2.0)


# ---------------------------------------------------------------------------
# F1 (mu = -1)
# ---------------------------------------------------------------------------

def f1_trajectory(w: WernerParams, xi: float, t: TimeLike) -> XSectorEntries:
    """
    Werner evolution under F1; rho14 is not available in closed form.

    With K = 4 + xi the populations rho11 and u = rho22 + rho23 relax with
    rates 2K -/+ 4 sqrt(K), while rho22 - rho23 = (1 - a)/4 is conserved.
    The hyperbolic pairs are evaluated as e^{-2Kt} cosh(4 sqrt(K) t) =
    (e_slow + e_fast)/2 so that large t never overflows.
    """
    _check_xi(xi)
    t = _check_time(t)
    a = w.a
    k = 4.0 + xi
    root = math.sqrt(k)
    e_slow = np.exp((-2.0 * k + 4.0 * root) * t)
    e_fast = np.exp((-2.0 * k - 4.0 * root) * t)
    cosh_part = (e_slow + e_fast) / 2.0
    sinh_part = (e_slow - e_fast) / 2.0

    rho11 = (1.0 - a) / 4.0 * cosh_part + (1.0 + 3.0 * a) / (2.0 * root) * sinh_part
    u = (1.0 + 3.0 * a) / 4.0 * cosh_part + root * (1.0 - a) / 8.0 * sinh_part
    dark = (1.0 - a) / 4.0
    rho22 = (u + dark) / 2.0
    rho23 = (u - dark) / 2.0
    rho44 = 1.0 - rho11 - 2.0 * rho22

    as_complex = lambda v: np.asarray(v, dtype=complex)
    return _warn_imaginary(
        XSectorEntries(
            t=t,
            rho11=as_complex(rho11),
            rho22=as_complex(rho22),
            rho33=as_complex(rho22),
            rho23=as_complex(rho23),
            rho32=np.conj(as_complex(rho23)),
            rho44=as_complex(rho44),
        ),
        "F1",
    )


def f1_stationary(x0: Union[XInitial, WernerParams, DensityMatrix]) -> DensityMatrix:
    """Stationary matrix under F1 for any X initial state; independent of xi."""
    x0 = _as_x_initial(x0)
    k1, k2, k3 = x0.kappa1, x0.kappa2, x0.kappa3
    m = np.zeros((4, 4), dtype=complex)
    m[1, 1] = m[2, 2] = (k1 - k2) / 4.0
    m[1, 2] = m[2, 1] = (k2 - k1) / 4.0
    m[3, 3] = (2.0 * k1 + 2.0 * k2 + 4.0 * k3) / 4.0
    return DensityMatrix(m)


def f1_closed_form(a: float) -> CorrelationTriple:
    """Stationary T and C of a Werner state under F1 (C is the sigma_x-measurement value)."""
    delta = 4.0 * a * a + 8.0 * a + 20.0
    root = math.sqrt(2.0 * delta)
    total = 4.0 - _bits((7.0 + a) / 4.0, 7.0 + a) + _bits((3.0 + a) / 4.0, 3.0 + a)
    classical = (
        -1.0
        - _bits((1.0 - a) / 8.0, 1.0 - a)
        - _bits((7.0 + a) / 8.0, 7.0 + a)
        + _bits((8.0 + root) / 16.0, 8.0 + root)
        + _bits(max(8.0 - root, 0.0) / 16.0, max(8.0 - root, 0.0))
    )
    total, classical = float(total), float(classical)
    return CorrelationTriple(total=total, classical=classical, discord=total - classical)


def f1_correlations(w: WernerParams) -> ClosedFormCorrelations:
    closed = f1_closed_form(w.a)
    numeric = quantum_discord(f1_stationary(w))
    return _compare("F1", w.a, None, closed, numeric)


# ---------------------------------------------------------------------------
# F2 (mu = +1)
# ---------------------------------------------------------------------------

def f2_trajectory(w: WernerParams, xi: float, t: TimeLike) -> XSectorEntries:
    """Werner evolution under F2, coherences rho14/rho41 included."""
    _check_xi(xi)
    t = _check_time(t)
    a = w.a
    i = 1j

    d_a = _guard((-2.0 - 2.0 * i + xi) * (6.0 + 6.0 * i + xi), "(xi-2-2i)(xi+6+6i)")
    d_b = _guard(-24.0 + (4.0 + 4.0 * i) * xi + i * xi * xi, "-24+(4+4i)xi+i xi^2")
    d_c = _guard(8.0 + (-4.0 + xi) * xi, "8+(xi-4)xi")
    d_d = _guard((6.0 - 6.0 * i + xi) * (6.0 + 6.0 * i + xi) * (8.0 + xi), "(xi+6-6i)(xi+6+6i)(xi+8)")
    d_14 = _guard(2.0 * (xi - 2.0 - 2.0 * i), "2(xi-2-2i)")

    e_coherent = np.exp(-t * (4.0 + (1.0 + i) * xi))
    e_mixed = np.exp((-1.0 + i) * (2.0 + 2.0 * i + xi) * t)
    e_ground = np.exp(-2.0 * t * xi)
    e_block = np.exp(-2.0 * t * (8.0 + xi))

    term_a = 64.0 * xi * i * (a - 1.0) * e_coherent / d_a
    term_b = 64.0 * xi * (a - 1.0) * e_mixed / d_b
    term_c = (a - 1.0) * e_ground * (-32.0 - 8.0 * xi + xi ** 3) / d_c
    term_d = e_block * (
        -xi * (480.0 + xi * (184.0 + xi * (16.0 + xi)))
        + a * (9216.0 + xi * (4320.0 + xi * (696.0 + xi * (48.0 + xi))))
    ) / d_d
    term_g = (a - 1.0) * e_ground * (32.0 - 40.0 * xi + 8.0 * xi ** 2 + xi ** 3) / d_c
    transient = term_a + term_b - term_c + term_d

    rho11 = (1.0 - a) / 4.0 * e_ground
    rho22 = (8.0 * (20.0 + xi - 4.0 * a - a * xi) / (8.0 + xi) + transient) / 64.0
    rho23 = (8.0 * (-1.0 + a + (12.0 + 4.0 * a) / (8.0 + xi)) + transient) / 64.0
    rho44 = (8.0 * (3.0 + a) * (4.0 + xi) / (8.0 + xi) - term_a - term_b + term_g - term_d) / 32.0
    rho14 = (1.0 - i) * (1.0 - a) * math.sqrt(xi) * (e_ground - e_coherent) / d_14

    as_complex = lambda v: np.asarray(v, dtype=complex)
    return _warn_imaginary(
        XSectorEntries(
            t=t,
            rho11=as_complex(rho11),
            rho22=as_complex(rho22),
            rho33=as_complex(rho22),
            rho23=as_complex(rho23),
            rho32=np.conj(as_complex(rho23)),
            rho44=as_complex(rho44),
            rho14=as_complex(rho14),
            rho41=np.conj(as_complex(rho14)),
        ),
        "F2",
    )


def f2_stationary(w: WernerParams, xi: float) -> DensityMatrix:
    _check_xi(xi)
    a = w.a
    scale = 8.0 * (8.0 + xi)
    m = np.zeros((4, 4), dtype=complex)
    m[1, 1] = m[2, 2] = (20.0 + xi - a * (4.0 + xi)) / scale
    m[1, 2] = m[2, 1] = (4.0 - xi + a * (12.0 + xi)) / scale
    m[3, 3] = (3.0 + a) * (4.0 + xi) / (4.0 * (8.0 + xi))
    return DensityMatrix(m)


def f2_stationary_x(x0: Union[XInitial, WernerParams, DensityMatrix], xi: float) -> DensityMatrix:
    """Stationary matrix under F2 for any X initial state."""
    _check_xi(xi)
    x0 = _as_x_initial(x0)
    r11 = x0.rho11
    shift = r11 * (-48.0 + 24.0 * xi + xi * xi) / (16.0 * (12.0 + xi))
    populations = (x0.rho22 - shift) + (x0.rho33 - shift)
    coherences = (x0.rho23 - shift) + (np.conj(x0.rho23) - shift)
    ground = x0.rho44 + r11 * (48.0 + 32.0 * xi + xi * xi) / (8.0 * (12.0 + xi))
    scale = 4.0 * (8.0 + xi)

    m = np.zeros((4, 4), dtype=complex)
    m[1, 1] = m[2, 2] = ((12.0 + xi) * populations - (4.0 + xi) * coherences + 8.0 * ground) / scale
    m[1, 2] = m[2, 1] = (-(4.0 + xi) * populations + (12.0 + xi) * coherences + 8.0 * ground) / scale
    m[3, 3] = 2.0 * (4.0 + xi) * (populations + coherences + 2.0 * ground) / scale
    return DensityMatrix(m)


def f2_closed_form(a: float, xi: float) -> CorrelationTriple:
    """Stationary T and C of a Werner state under F2 (C is the sigma_z-measurement value)."""
    _check_xi(xi)
    d1 = 8.0 + xi
    d2 = 20.0 + xi - a * (4.0 + xi)
    d3 = (3.0 + a) * (4.0 + xi)
    d4 = 44.0 + 7.0 * xi + a * (4.0 + xi)
    d5 = 4.0 + 5.0 * xi + 3.0 * a * (4.0 + xi)

    total = -(
        2.0 * _bits(d2, d2 / (8.0 * d1))
        - 2.0 * _bits(d3, d3 / (4.0 * d1))
        + 2.0 * _bits(d4, d4 / (8.0 * d1))
        - 8.0 * _bits(3.0 + a, (3.0 + a) / d1)
        - 2.0 * d1 * _bits(1.0 - a, (1.0 - a) / 4.0)
    ) / (8.0 * d1)
    classical = -(_bits(d2, d2 / (8.0 * d1)) + _bits(d4, d4 / (8.0 * d1))) / (8.0 * d1) + (
        _bits(d4 + d5, d4 + d5)
        - 2.0 * _bits(d4, d4)
        + _bits(d4 - d5, d4 - d5)
        - 2.0 * d4
    ) / (16.0 * d1)
    total, classical = float(total), float(classical)
    return CorrelationTriple(total=total, classical=classical, discord=total - classical)


def f2_correlations(w: WernerParams, xi: float) -> ClosedFormCorrelations:
    closed = f2_closed_form(w.a, xi)
    numeric = quantum_discord(f2_stationary(w, xi))
    return _compare("F2", w.a, xi, closed, numeric)


# ---------------------------------------------------------------------------

def _as_x_initial(x0) -> XInitial:
    if isinstance(x0, XInitial):
        return x0
    if isinstance(x0, WernerParams):
        return XInitial.from_werner(x0.a)
    return XInitial.from_density_matrix(x0)


def _compare(
    scheme: str, a: float, xi: Optional[float], closed: CorrelationTriple, numeric: CorrelationTriple
) -> ClosedFormCorrelations:
    deviation = max(
        abs(closed.total - numeric.total),
        abs(closed.classical - numeric.classical),
        abs(closed.discord - numeric.discord),
    )
    agrees = deviation <= AGREEMENT_TOLERANCE
    if not agrees:
        logger.warning(
            f"⚠️ [ANALYTIC] {scheme} closed form deviates from numeric discord by {deviation:.3e} "
            f"(a={a}, xi={xi})"
        )
    return ClosedFormCorrelations(
        scheme=scheme,
        a=a,
        xi=xi,
        total=closed.total,
        classical=closed.classical,
        discord=closed.discord,
        numeric=numeric,
        deviation=deviation,
        agrees=agrees,
    )
