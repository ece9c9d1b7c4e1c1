"""Ideal linear polarization analyzers and joint detection probabilities.

Angles are in radians with H = 0 and V = pi/2. An analyzer at ``theta``
passes ``cos(theta)|H> + sin(theta)|V>``; "block" is the orthogonal
outcome, i.e. a pass at ``theta + pi/2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels

ANGLE_TOL = 1e-6


def perp(theta: float) -> float:
    return theta + math.pi / 2


def reduce_angle(theta: float) -> float:
    """Canonical representative of ``theta`` modulo pi, in [0, pi)."""
    r = math.fmod(theta, math.pi)
    if r < 0:
        r += math.pi
    # fold values within rounding of pi back to 0
    if math.pi - r < 1e-12:
        r = 0.0
    return r


def same_angle(a: float, b: float, tol: float = ANGLE_TOL) -> bool:
    d = abs(reduce_angle(a) - reduce_angle(b))
    return min(d, math.pi - d) <= tol


@dataclass(frozen=True)
class AnalyzerSetting:
    theta_a: float
    theta_b: float

    def canonical(self) -> tuple[float, float]:
        return reduce_angle(self.theta_a), reduce_angle(self.theta_b)

    def matches(self, other: "AnalyzerSetting", tol: float = ANGLE_TOL) -> bool:
        return same_angle(self.theta_a, other.theta_a, tol) and same_angle(
            self.theta_b, other.theta_b, tol
        )

    @classmethod
    def from_degrees(cls, theta_a_deg: float, theta_b_deg: float) -> "AnalyzerSetting":
        return cls(math.radians(theta_a_deg), math.radians(theta_b_deg))


@dataclass(frozen=True)
class OutcomeProbs:
    pp: float
    pb: float
    bp: float
    bb: float

    @property
    def correlation(self) -> float:
        return self.pp - self.pb - self.bp + self.bb

    def as_tuple(self) -> tuple[float, float, float, float]:
        return self.pp, self.pb, self.bp, self.bb


def analyzer_vector(theta: float) -> np.ndarray:
    return np.array([math.cos(theta), math.sin(theta)])


def _real_part(rho) -> np.ndarray:
    return np.ascontiguousarray(np.asarray(rho).real, dtype=float)


def joint_prob(rho, s: AnalyzerSetting) -> float:
    """Tr[rho (|a><a| x |b><b|)] for the setting ``s``."""
    return float(joint_probs(rho, [s.theta_a], [s.theta_b])[0])


def joint_prob_trace(rho, s: AnalyzerSetting) -> float:
    """Same quantity as :func:`joint_prob`, by explicit Kronecker projector and trace."""
    pa = np.outer(analyzer_vector(s.theta_a), analyzer_vector(s.theta_a))
    pb = np.outer(analyzer_vector(s.theta_b), analyzer_vector(s.theta_b))
    return float(np.trace(np.asarray(rho) @ np.kron(pa, pb)).real)


def joint_probs(rho, theta_a, theta_b) -> np.ndarray:
    """Vectorized ``joint_prob`` over paired angle arrays (uses the fast kernel)."""
    ta = np.ascontiguousarray(theta_a, dtype=float)
    tb = np.ascontiguousarray(theta_b, dtype=float)
    return np.clip(kernels.joint_probs(_real_part(rho), ta, tb), 0.0, 1.0)


def outcome_probs(rho, s: AnalyzerSetting) -> OutcomeProbs:
    a, b = s.theta_a, s.theta_b
    ta = [a, a, perp(a), perp(a)]
    tb = [b, perp(b), b, perp(b)]
    pp, pb, bp, bb = joint_probs(rho, ta, tb)
    return OutcomeProbs(float(pp), float(pb), float(bp), float(bb))


def correlation(rho, s: AnalyzerSetting) -> float:
    return outcome_probs(rho, s).correlation


def correlation_table(rho, angles_a, angles_b) -> np.ndarray:
    """E(a_i, b_j) for every pair on two angle grids.

    Uses the reduced correlation tensor: with analyzer Bloch vectors
    (cos 2theta, sin 2theta) in the Z-X plane, E is bilinear in them.
    """
    m = np.asarray(rho)
    z = np.diag([1.0, -1.0])
    x = np.array([[0.0, 1.0], [1.0, 0.0]])
    paulis = (z, x)
    t = np.array([[np.trace(m @ np.kron(p, q)).real for q in paulis] for p in paulis])
    ua = np.stack([np.cos(2 * np.asarray(angles_a)), np.sin(2 * np.asarray(angles_a))], axis=-1)
    ub = np.stack([np.cos(2 * np.asarray(angles_b)), np.sin(2 * np.asarray(angles_b))], axis=-1)
    return ua @ t @ ub.T


def fringe(rho, theta_b: float, theta_a_grid) -> list[tuple[float, float]]:
    grid = np.atleast_1d(np.asarray(theta_a_grid, dtype=float))
    if grid.size == 0:
        raise ValueError("fringe grid is empty")
    probs = joint_probs(rho, grid, np.full_like(grid, theta_b))
    return [(float(a), float(p)) for a, p in zip(grid, probs)]


def visibility_of(series) -> float:
    """Fringe contrast (max - min) / (max + min).

    ``series`` is either plain values or (angle, value) pairs as returned by
    :func:`fringe`.
    """
    arr = np.asarray(series, dtype=float)
    if arr.ndim == 2:
        arr = arr[:, 1]
    if arr.size == 0:
        raise ValueError("empty series")
    hi, lo = float(arr.max()), float(arr.min())
    if hi + lo <= 0:
        raise ValueError("visibility undefined for an all-zero series")
    return (hi - lo) / (hi + lo)
