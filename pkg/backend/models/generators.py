"""
Time-evolution generators
-------------------------
Two realizations of d(rho)/dt for the coupled qubits:

FullGenerator      the feedback master equation
                   d rho/dt = -i[H + (c^dag F + F c)/2, rho] + D[c - iF] rho
                   (plain Lindblad decay when feedback is disabled)
AppendixGenerator  component ODEs on the eight X-sector entries
                   (rho11, rho22, rho33, rho23, rho32, rho44, rho14, rho41)

Both are linear maps on 4x4 matrices and expose an explicit 16x16
column-stacked superoperator, vec(A X B) = (B^T (x) A) vec(X).
"""

import logging
from abc import ABC, abstractmethod
from typing import Optional

import numpy as np

from core.exceptions import NegativeRate, NotXState
from core.linalg import X_MASK
from models.operators import driving_hamiltonian, feedback_operator, jump_operator
from models.waveguide import Rates
from schemas.physics import AppendixVariant, FeedbackSpec, GeneratorMode

logger = logging.getLogger(__name__)

X_TOLERANCE = 1e-12

# component order of the X-sector vector, 0-indexed matrix positions
X_COMPONENTS = ((0, 0), (1, 1), (2, 2), (1, 2), (2, 1), (3, 3), (0, 3), (3, 0))

# column-stacked vec index of every X entry
X_SUPPORT = np.array(sorted(i + 4 * j for i, j in X_COMPONENTS))


def vec(m: np.ndarray) -> np.ndarray:
    return np.asarray(m, dtype=complex).reshape(-1, order="F")


def unvec(v: np.ndarray) -> np.ndarray:
    return np.asarray(v, dtype=complex).reshape(4, 4, order="F")


class Generator(ABC):
    """Linear map rho -> d rho/dt with a cached 16x16 superoperator."""

    mode: GeneratorMode

    def __init__(self):
        self._superoperator: Optional[np.ndarray] = None

    @abstractmethod
    def __call__(self, rho: np.ndarray) -> np.ndarray:
        ...

    @property
    def support(self) -> np.ndarray:
        """vec indices the generator acts on; the complement is left at zero."""
        return np.arange(16)

    def check_state(self, rho: np.ndarray) -> None:
        """Raise if rho lies outside the domain of this generator."""

    def superoperator(self) -> np.ndarray:
        if self._superoperator is None:
            sup = np.zeros((16, 16), dtype=complex)
            for index in self.support:
                unit = np.zeros(16, dtype=complex)
                unit[index] = 1.0
                sup[:, index] = vec(self(unvec(unit)))
            self._superoperator = sup
        return self._superoperator

    def residual(self, rho: np.ndarray) -> float:
        """max |d rho/dt| entry."""
        return float(np.max(np.abs(self(rho))))


class FullGenerator(Generator):
    mode = GeneratorMode.FULL

    def __init__(self, rates: Rates, feedback: FeedbackSpec):
        super().__init__()
        self.rates = rates
        self.feedback = feedback

        c = jump_operator(rates.xi)
        hamiltonian = driving_hamiltonian(rates)
        if feedback.enabled:
            f = feedback_operator(feedback.mu)
            self.jump = c - 1j * f
            self.hamiltonian = hamiltonian + (c.conj().T @ f + f @ c) / 2.0
        else:
            self.jump = c
            self.hamiltonian = hamiltonian
        self._decay = self.jump.conj().T @ self.jump

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        h, l, k = self.hamiltonian, self.jump, self._decay
        return (
            -1j * (h @ rho - rho @ h)
            + l @ rho @ l.conj().T
            - 0.5 * (k @ rho + rho @ k)
        )

    def superoperator(self) -> np.ndarray:
        if self._superoperator is None:
            eye = np.eye(4, dtype=complex)
            h, l, k = self.hamiltonian, self.jump, self._decay
            self._superoperator = (
                -1j * (np.kron(eye, h) - np.kron(h.T, eye))
                + np.kron(l.conj(), l)
                - 0.5 * (np.kron(eye, k) + np.kron(k.T, eye))
            )
        return self._superoperator

    def __repr__(self) -> str:
        return f"FullGenerator(rates={self.rates}, feedback={self.feedback})"


class AppendixGenerator(Generator):
    """
    Matrix-element ODEs for general mu at gamma = omega0 = xi/2, delta = 0.

    The rho14/rho41 equations are taken from the full generator at the same
    rates, since the component set has none for them.
    """

    mode = GeneratorMode.APPENDIX

    def __init__(
        self,
        xi: float,
        mu: float,
        feedback_enabled: bool = True,
        variant: AppendixVariant = AppendixVariant.TRACE_PRESERVING,
    ):
        super().__init__()
        if xi < 0:
            raise NegativeRate(f"Decay rate xi={xi} is negative")
        feedback = FeedbackSpec(mu=mu, enabled=feedback_enabled)
        self.xi = xi
        self.feedback = feedback
        self.variant = AppendixVariant(variant)
        self._coherence = FullGenerator(Rates.from_xi(xi), feedback)

        self._p = mu - 1.0 if feedback_enabled else 0.0
        self._q = -(mu + 1.0) if feedback_enabled else 0.0
        self._s = np.sqrt(xi)
        if self.variant is AppendixVariant.PRINTED:
            logger.warning(f"⚠️ [MODEL] Printed appendix coefficients do not preserve the trace (mu={mu})")

    @property
    def support(self) -> np.ndarray:
        return X_SUPPORT

    def check_state(self, rho: np.ndarray) -> None:
        off = float(np.max(np.abs(np.asarray(rho)[~X_MASK])))
        if off > X_TOLERANCE:
            raise NotXState(f"Off-X entry of magnitude {off:.3e} exceeds {X_TOLERANCE}")

    @staticmethod
    def components(rho: np.ndarray) -> np.ndarray:
        rho = np.asarray(rho, dtype=complex)
        return np.array([rho[i, j] for i, j in X_COMPONENTS], dtype=complex)

    @staticmethod
    def assemble(v: np.ndarray) -> np.ndarray:
        m = np.zeros((4, 4), dtype=complex)
        for (i, j), value in zip(X_COMPONENTS, v):
            m[i, j] = value
        return m

    def rhs(self, v: np.ndarray) -> np.ndarray:
        """Derivative of the component vector (rho11, rho22, rho33, rho23, rho32, rho44, rho14, rho41)."""
        r11, r22, r33, r23, r32, r44, r14, r41 = v
        xi, p, q, s = self.xi, self._p, self._q, self._s
        printed = self.variant is AppendixVariant.PRINTED

        block = r22 + r33 + r23 + r32
        coherence = r14 + r41
        fill = (xi + p * p) * r11 + q * q * r44 + p * q * coherence
        half_loss = (p * p + q * q) / 2.0
        loss = xi + p * p + q * q
        # gamma = xi/2 exchange terms
        left = xi * (0.5 - 0.5j)
        right = xi * (0.5 + 0.5j)

        d11 = -2.0 * (xi + p * p) * r11 - p * q * coherence + (p if printed else p * p) * block
        d22 = (fill - half_loss * (r23 + r32) - left * (r23 + 1j * r32) - loss * r22
               - 1j * q * s * (r14 + r23 - r32 - r41))
        d33 = (fill - half_loss * (r23 + r32) - right * (r23 - 1j * r32) - loss * r33
               - 1j * q * s * (r14 - r23 + r32 - r41))
        d23 = (fill - half_loss * (r22 + r33) - left * (r22 + 1j * r33) - loss * r23
               - 1j * q * s * (r14 + r22 - r33 - r41))
        d32 = (fill - half_loss * (r22 + r33) - right * (r22 - 1j * r33) - loss * r32
               - 1j * q * s * (r14 - r22 + r33 - r41))
        if printed:
            leak = -2j * q * s * coherence
        else:
            leak = 2j * q * s * (r14 - r41)
        d44 = leak - p * q * coherence - 2.0 * q * q * r44 + (xi + q * q) * block

        full = self._coherence(self.assemble(v))
        return np.array([d11, d22, d33, d23, d32, d44, full[0, 3], full[3, 0]], dtype=complex)

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        self.check_state(rho)
        return self.assemble(self.rhs(self.components(rho)))

    def __repr__(self) -> str:
        return (
            f"AppendixGenerator(xi={self.xi}, mu={self.feedback.mu}, "
            f"feedback={self.feedback.enabled}, variant={self.variant.value})"
        )


def generator_full(r: Rates, f: FeedbackSpec) -> FullGenerator:
    return FullGenerator(r, f)


def generator_appendix(
    xi: float,
    mu: float,
    feedback_enabled: bool = True,
    variant: AppendixVariant = AppendixVariant.TRACE_PRESERVING,
) -> AppendixGenerator:
    return AppendixGenerator(xi, mu, feedback_enabled=feedback_enabled, variant=variant)


def build_generator(
    mode: GeneratorMode,
    rates: Rates,
    feedback: FeedbackSpec,
    variant: AppendixVariant = AppendixVariant.TRACE_PRESERVING,
) -> Generator:
    """Generator for a scenario; the appendix form only sees xi and the feedback setting."""
    if GeneratorMode(mode) is GeneratorMode.FULL:
        return FullGenerator(rates, feedback)
    return AppendixGenerator(rates.xi, feedback.mu, feedback_enabled=feedback.enabled, variant=variant)
