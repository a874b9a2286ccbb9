import logging
import math
from dataclasses import asdict, dataclass

from core.exceptions import NegativeRate, NonPositiveLength
from schemas.physics import WaveguideParams

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Rates:
    """Dynamical rates in units of the spontaneous rate (hbar = 1)."""

    xi: float
    gamma: float
    omega0: float
    delta: float = 0.0

    def __post_init__(self):
        for name, value in asdict(self).items():
            if not math.isfinite(value):
                raise NegativeRate(f"Rate {name}={value} is not finite")
        if self.xi < 0:
            raise NegativeRate(f"Decay rate xi={self.xi} is negative")

    @classmethod
    def from_xi(cls, xi: float, delta: float = 0.0) -> "Rates":
        """Rates for an explicit decay rate with cos(k_r d) = sin(k_r d), i.e. gamma = omega0 = xi/2."""
        return cls(xi=xi, gamma=xi / 2.0, omega0=xi / 2.0, delta=delta)

    @property
    def level_shift(self) -> float:
        return self.omega0 + self.delta


def derive_rates(p: WaveguideParams) -> Rates:
    """
    Decay rate and dipole-dipole coupling mediated by the plasmonic mode.

    xi = beta Xi exp(-d/2l) cos(k_r d), gamma = beta Xi exp(-d/2l) sin(k_r d) / 2,
    with omega0 tied to gamma and the Lamb shift taken from the parameters.

    d = 0 is accepted (coincident emitters, no propagation loss); only d < 0
    raises NonPositiveLength. The propagation length must be strictly positive.
    """
    if p.separation < 0:
        raise NonPositiveLength(f"Qubit separation d={p.separation} is negative")
    if p.propagation_length <= 0:
        raise NonPositiveLength(f"Propagation length l={p.propagation_length} must be positive")

    envelope = p.beta * p.spontaneous_rate * math.exp(-p.separation / (2.0 * p.propagation_length))
    xi = envelope * p.cos_krd
    gamma = envelope * p.sin_krd / 2.0
    if xi < 0:
        raise NegativeRate(f"cos(k_r d)={p.cos_krd} yields a negative decay rate")

    rates = Rates(xi=xi, gamma=gamma, omega0=gamma, delta=p.lamb_shift)
    logger.debug(f"[MODEL] Derived rates xi={rates.xi:.6f}, gamma={rates.gamma:.6f}")
    return rates


def default_rates() -> Rates:
    """Rates of the configured V-groove geometry (xi ~ 0.5453 with the stock settings)."""
    return derive_rates(WaveguideParams.from_settings())
