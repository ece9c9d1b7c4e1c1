"""CHSH test: S parameter, optimal analyzer settings, significance."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .measurement import AnalyzerSetting, correlation, correlation_table, reduce_angle

LOCAL_BOUND = 2.0
TSIRELSON = 2.0 * math.sqrt(2.0)
GRID_STEP = math.radians(7.5)


@dataclass(frozen=True)
class CHSHSettings:
    a: float
    a_prime: float
    b: float
    b_prime: float

    def __post_init__(self):
        if abs(reduce_angle(self.a) - reduce_angle(self.a_prime)) < 1e-12:
            raise ValueError("a and a' coincide modulo pi")
        if abs(reduce_angle(self.b) - reduce_angle(self.b_prime)) < 1e-12:
            raise ValueError("b and b' coincide modulo pi")

    def pairs(self) -> tuple[AnalyzerSetting, ...]:
        """(a,b), (a,b'), (a',b), (a',b') in the order S combines them."""
        return (
            AnalyzerSetting(self.a, self.b),
            AnalyzerSetting(self.a, self.b_prime),
            AnalyzerSetting(self.a_prime, self.b),
            AnalyzerSetting(self.a_prime, self.b_prime),
        )

    def as_tuple(self):
        return self.a, self.a_prime, self.b, self.b_prime

    @classmethod
    def from_degrees(cls, a, a_prime, b, b_prime) -> "CHSHSettings":
        return cls(*(math.radians(x) for x in (a, a_prime, b, b_prime)))

    def degrees(self):
        return tuple(math.degrees(x) for x in self.as_tuple())


def combine(e_ab, e_abp, e_apb, e_apbp):
    return abs(e_ab - e_abp) + abs(e_apb + e_apbp)


def chsh_s(rho, settings: CHSHSettings) -> float:
    return combine(*(correlation(rho, s) for s in settings.pairs()))


def _s_fast(rho_t, x):
    a, ap, b, bp = x
    e = correlation_table(rho_t, [a, ap], [b, bp])
    return combine(e[0, 0], e[0, 1], e[1, 0], e[1, 1])


def optimal_chsh_settings(rho, step: float = GRID_STEP, tol: float = 1e-5):
    """Maximize S: exhaustive grid over [0, pi)^4 then compass-search refinement.

    Returns (CHSHSettings, S). Grid ties go to the lexicographically first
    cell, so the result is deterministic.
    """
    rho = np.asarray(rho)
    n = int(round(math.pi / step))
    grid = np.arange(n) * (math.pi / n)
    table = np.ascontiguousarray(correlation_table(rho, grid, grid))
    i, ip, j, jp, _ = kernels.chsh_grid_max(table)
    x = np.array([grid[i], grid[ip], grid[j], grid[jp]], dtype=float)
    best = _s_fast(rho, x)
    h = step / 2
    while h >= tol:
        improved = False
        for k in range(4):
            for sign in (1.0, -1.0):
                trial = x.copy()
                trial[k] += sign * h
                val = _s_fast(rho, trial)
                if val > best + 1e-15:
                    x, best, improved = trial, val, True
                    break
        if not improved:
            h /= 2
    x = [reduce_angle(v) for v in x]
    settings = CHSHSettings(*x)
    return settings, chsh_s(rho, settings)


def coarse_chsh_max(rho, step: float = GRID_STEP) -> float:
    """Grid-only maximum of S, without refinement."""
    n = int(round(math.pi / step))
    grid = np.arange(n) * (math.pi / n)
    table = np.ascontiguousarray(correlation_table(np.asarray(rho), grid, grid))
    return kernels.chsh_grid_max(table)[4]


def sigma_violation(s) -> float:
    """(S - 2) / sigma_S for ``s = (value, sigma)``."""
    value, sigma = s
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    return (value - LOCAL_BOUND) / sigma
