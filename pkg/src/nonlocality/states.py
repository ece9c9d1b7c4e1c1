"""Two-photon polarization states.

Basis order is fixed as (HH, HV, VH, VV) everywhere in the package.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

HH, HV, VH, VV = range(4)

NORM_TOL = 1e-12
STRUCT_TOL = 1e-10


class StateError(ValueError):
    """Invalid or degenerate state parameters."""


@dataclass(frozen=True)
class PureTwoQubit:
    """alpha|HH> + exp(i phi) beta|VV> with real, nonnegative amplitudes."""

    alpha: float
    beta: float
    phi: float = math.pi

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0:
            raise StateError(f"amplitudes must be nonnegative, got ({self.alpha}, {self.beta})")
        norm = self.alpha**2 + self.beta**2
        if abs(norm - 1.0) > NORM_TOL:
            raise StateError(f"alpha^2 + beta^2 = {norm!r}, expected 1")

    def vector(self) -> np.ndarray:
        return np.array([self.alpha, 0.0, 0.0, self.beta * np.exp(1j * self.phi)], dtype=complex)


class NoiseKind(str, enum.Enum):
    COLORED = "colored"
    WHITE = "white"


@dataclass(frozen=True)
class NoiseModel:
    visibility: float = 1.0
    kind: NoiseKind = NoiseKind.COLORED

    def __post_init__(self):
        if not 0.0 <= self.visibility <= 1.0:
            raise StateError(f"visibility must lie in [0, 1], got {self.visibility}")
        object.__setattr__(self, "kind", NoiseKind(self.kind))


class DensityMatrix:
    """Validated, read-only 4x4 two-qubit density matrix."""

    __slots__ = ("_m",)

    def __init__(self, entries, tol: float = STRUCT_TOL):
        m = np.array(entries, dtype=complex)
        if m.shape != (4, 4):
            raise StateError(f"density matrix must be 4x4, got {m.shape}")
        if np.max(np.abs(m - m.conj().T)) > tol:
            raise StateError("density matrix is not Hermitian")
        tr = np.trace(m).real
        if abs(tr - 1.0) > tol:
            raise StateError(f"trace is {tr!r}, expected 1")
        if np.linalg.eigvalsh(m).min() < -tol:
            raise StateError("density matrix is not positive semidefinite")
        m.setflags(write=False)
        self._m = m

    @property
    def entries(self) -> np.ndarray:
        return self._m

    def __array__(self, dtype=None, copy=None):
        return self._m if dtype is None else self._m.astype(dtype)

    def __getitem__(self, idx):
        return self._m[idx]

    def __repr__(self):
        return f"DensityMatrix({np.array2string(self._m, precision=4)})"

    @classmethod
    def maximally_mixed(cls) -> "DensityMatrix":
        return cls(np.eye(4) / 4)


def pure_state(p: PureTwoQubit) -> DensityMatrix:
    v = p.vector()
    return DensityMatrix(np.outer(v, v.conj()))


def apply_noise(p: PureTwoQubit, n: NoiseModel) -> DensityMatrix:
    """Degrade ``p`` to a mixed state with coherence factor ``n.visibility``.

    ``colored`` keeps the HH/VV populations and damps only their coherence;
    ``white`` mixes with the maximally mixed state.
    """
    v = n.visibility
    if n.kind is NoiseKind.WHITE:
        rho = v * np.asarray(pure_state(p)) + (1.0 - v) * np.eye(4) / 4
        return DensityMatrix(rho)
    rho = np.zeros((4, 4), dtype=complex)
    rho[HH, HH] = p.alpha**2
    rho[VV, VV] = p.beta**2
    coh = v * p.alpha * p.beta * np.exp(-1j * p.phi)
    rho[HH, VV] = coh
    rho[VV, HH] = np.conj(coh)
    return DensityMatrix(rho)


def purity(rho) -> float:
    m = np.asarray(rho)
    # Tr(rho^2) = sum |rho_ij|^2 for Hermitian rho
    return float(np.sum(np.abs(m) ** 2))


def gamma_of(p: PureTwoQubit) -> float:
    if p.beta == 0:
        raise StateError("entanglement degree undefined for beta = 0")
    return p.alpha / p.beta


def gamma_from_pump_angle(theta_p: float) -> float:
    """Entanglement degree set by the pump waveplate rotation ``theta_p``.

    The HH emission probability scales as cos^2(2 theta_p), so the amplitude
    ratio scales as cos(2 theta_p).
    """
    if not -1e-15 <= theta_p <= math.pi / 4 + 1e-15:
        raise StateError(f"pump angle must lie in [0, pi/4], got {theta_p}")
    return max(0.0, math.cos(2.0 * theta_p))


def state_from_gamma(gamma: float, phi: float = math.pi) -> PureTwoQubit:
    if gamma < 0:
        raise StateError(f"gamma must be nonnegative, got {gamma}")
    norm = math.sqrt(1.0 + gamma * gamma)
    return PureTwoQubit(gamma / norm, 1.0 / norm, phi)


def phi_minus() -> PureTwoQubit:
    return PureTwoQubit(1 / math.sqrt(2), 1 / math.sqrt(2), math.pi)
