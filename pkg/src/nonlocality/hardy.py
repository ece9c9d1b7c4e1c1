"""Hardy's ladder: angles, the inequality, ideal predictions, and the optimizer.

For a ladder of height K and entanglement degree gamma the analyzer angles
are ``theta_k = (-1)**k * arctan(gamma**(k + 1/2))``. The inequality

    P(theta_K, theta_K) <= P(theta_0, theta_0)
                           + sum_k [P(theta_k, theta_{k-1}+pi/2) + P(theta_{k-1}+pi/2, theta_k)]

holds for every local realistic model. Its left side is ``p_k`` and its
right side ``script_p``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .measurement import AnalyzerSetting, joint_probs, perp, reduce_angle
from .states import DensityMatrix, NoiseModel, apply_noise, pure_state, state_from_gamma

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


class Measured(NamedTuple):
    """A value with its one-standard-deviation uncertainty."""

    value: float
    sigma: float

    def __str__(self):
        return f"{self.value:.6g} +/- {self.sigma:.2g}"


@dataclass(frozen=True)
class LadderSpec:
    K: int
    gamma: float

    def __post_init__(self):
        if int(self.K) != self.K or self.K < 1:
            raise ValueError(f"ladder height K must be an integer >= 1, got {self.K}")
        if not 0.0 < self.gamma < 1.0:
            raise ValueError(f"gamma must lie strictly between 0 and 1, got {self.gamma}")


@dataclass(frozen=True)
class LadderResult:
    p_k: float
    script_p: float
    terms: tuple[float, ...]
    margin: float
    settings: tuple[AnalyzerSetting, ...]

    @property
    def violated(self) -> bool:
        return self.margin > 0


def _angles(K: int, gamma: float) -> np.ndarray:
    k = np.arange(K + 1)
    return np.where(k % 2 == 0, 1.0, -1.0) * np.arctan(gamma ** (k + 0.5))


def _settings(K: int, gamma: float) -> list[AnalyzerSetting]:
    th = _angles(K, gamma)
    out = [AnalyzerSetting(th[K], th[K]), AnalyzerSetting(th[0], th[0])]
    for k in range(1, K + 1):
        out.append(AnalyzerSetting(th[k], perp(th[k - 1])))
        out.append(AnalyzerSetting(perp(th[k - 1]), th[k]))
    return out


def ladder_angles(spec: LadderSpec) -> list[float]:
    return [float(t) for t in _angles(spec.K, spec.gamma)]


def ladder_settings(spec: LadderSpec) -> list[AnalyzerSetting]:
    """The 2K+2 settings; the first is (theta_K, theta_K), the rest feed ``script_p``."""
    return _settings(spec.K, spec.gamma)


def _assemble(probs, settings) -> LadderResult:
    probs = [float(p) for p in probs]
    p_k, terms = probs[0], tuple(probs[1:])
    script_p = math.fsum(terms)
    return LadderResult(p_k, script_p, terms, p_k - script_p, tuple(settings))


def _evaluate(rho, K: int, gamma: float) -> LadderResult:
    settings = _settings(K, gamma)
    ta = [s.theta_a for s in settings]
    tb = [s.theta_b for s in settings]
    return _assemble(joint_probs(rho, ta, tb), settings)


def evaluate_ladder(rho, spec: LadderSpec) -> LadderResult:
    return _evaluate(rho, spec.K, spec.gamma)


def ladder_state(gamma: float, phi: float = math.pi, noise: NoiseModel | None = None) -> DensityMatrix:
    p = state_from_gamma(gamma, phi)
    return pure_state(p) if noise is None else apply_noise(p, noise)


def pk_closed_form(K: int, gamma):
    """Ideal P_K for the pure phi = pi state; accepts gamma anywhere in [0, 1]."""
    g = np.asarray(gamma, dtype=float)
    g2k = g ** (2 * K)
    return g**2 * (1.0 - g2k) ** 2 / ((1.0 + g**2) * (1.0 + g2k * g) ** 2)


def pk_ideal(spec: LadderSpec) -> float:
    return float(pk_closed_form(spec.K, spec.gamma))


def ladder_curve(K: int, gammas, phi: float = math.pi, noise: NoiseModel | None = None) -> np.ndarray:
    """P_K(gamma) from the full ladder evaluation, endpoints 0 and 1 included."""
    out = []
    for g in np.asarray(gammas, dtype=float):
        out.append(_evaluate(ladder_state(float(g), phi, noise), K, float(g)).p_k)
    return np.array(out)


@dataclass
class OptimizeResult:
    gamma: float
    value: float
    objective: str
    method: str
    evaluations: int
    metadata: dict = field(default_factory=dict)


def _objective(K: int, objective: str, phi: float, noise: NoiseModel | None):
    if objective not in ("p_k", "margin"):
        raise ValueError(f"objective must be 'p_k' or 'margin', got {objective!r}")

    def f(g: float) -> float:
        res = _evaluate(ladder_state(g, phi, noise), K, g)
        return res.p_k if objective == "p_k" else res.margin

    return f


def _local_maxima(values: np.ndarray) -> int:
    """Count strict peaks (plateaus count once) in a sampled curve."""
    v = np.asarray(values)
    keep = np.concatenate([[True], np.diff(v) != 0])
    v = v[keep]
    if v.size < 3:
        return 1
    inner = (v[1:-1] > v[:-2]) & (v[1:-1] > v[2:])
    return int(inner.sum()) + int(v[0] > v[1]) + int(v[-1] > v[-2])


def golden_section_max(f, lo: float, hi: float, tol: float = 1e-7):
    """Maximize a unimodal ``f`` on [lo, hi]; equal values keep the lower side.

    Returns (x, f(x), number of evaluations).
    """
    a, b = lo, hi
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    n = 2
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
        n += 1
    x = c if fc >= fd else d
    return x, max(fc, fd), n


def optimize_gamma(
    K: int,
    noise: NoiseModel | None = None,
    objective: str = "p_k",
    phi: float = math.pi,
    tol: float = 1e-7,
    scan_points: int = 64,
) -> OptimizeResult:
    """Find the entanglement degree in (0, 1) that maximizes P_K or the margin.

    A uniform scan brackets the peak, then golden-section search refines it.
    When the scan shows more than one peak the search falls back to a dense
    grid and refines around its best cell; ``metadata['fallback']`` records it.
    """
    if int(K) != K or K < 1:
        raise ValueError(f"K must be an integer >= 1, got {K}")
    f = _objective(int(K), objective, phi, noise)
    grid = np.linspace(0.0, 1.0, scan_points + 2)[1:-1]
    vals = np.array([f(float(g)) for g in grid])
    evals = len(grid)
    peaks = _local_maxima(vals)
    meta = {"scan_points": scan_points, "peaks_in_scan": peaks, "fallback": False}
    if peaks > 1:
        meta["fallback"] = True
        grid = np.linspace(0.0, 1.0, 4003)[1:-1]
        vals = np.array([f(float(g)) for g in grid])
        evals += len(grid)
    i = int(np.argmax(vals))
    step = grid[1] - grid[0]
    lo = max(grid[i] - step, 1e-12)
    hi = min(grid[i] + step, 1.0 - 1e-12)
    x, fx, n = golden_section_max(f, lo, hi, tol)
    evals += n
    if vals[i] > fx:
        x, fx = float(grid[i]), float(vals[i])
    method = "dense-grid+golden-section" if meta["fallback"] else "scan+golden-section"
    return OptimizeResult(float(x), float(fx), objective, method, evals, meta)


def violation_sigma(p_k, script_p) -> float:
    """Distance of P_K above the bound in combined standard deviations.

    Both arguments are (value, sigma); the uncertainties are added in
    quadrature, treating them as independent.
    """
    pv, ps = p_k
    sv, ss = script_p
    if ps < 0 or ss < 0:
        raise ValueError("uncertainties must be nonnegative")
    combined = math.hypot(ps, ss)
    if combined == 0:
        raise ValueError("at least one uncertainty must be positive")
    return (pv - sv) / combined


def lhv_margins(K: int, gamma: float = 0.5) -> np.ndarray:
    """Inequality margin for every deterministic local assignment.

    Each site assigns pass/block to each analyzer axis; an analyzer at
    theta + pi/2 passes exactly what one at theta blocks. All 2**(2K+2)
    assignments are enumerated.
    """
    settings = _settings(K, gamma)

    def site_axes(angles):
        keys: list[float] = []
        index, flip = [], []
        for th in angles:
            r = reduce_angle(th)
            orient = r >= math.pi / 2 - 1e-12
            base = r - math.pi / 2 if orient else r
            for j, key in enumerate(keys):
                if abs(key - base) < 1e-9:
                    break
            else:
                keys.append(base)
                j = len(keys) - 1
            index.append(j)
            flip.append(orient)
        return len(keys), np.array(index), np.array(flip)

    na, ia, fa = site_axes([s.theta_a for s in settings])
    nb, ib, fb = site_axes([s.theta_b for s in settings])
    bits = np.array(list(itertools.product((0, 1), repeat=na + nb)), dtype=bool)
    a_bits, b_bits = bits[:, :na], bits[:, na:]
    pass_a = a_bits[:, ia] ^ fa
    pass_b = b_bits[:, ib] ^ fb
    p = (pass_a & pass_b).astype(float)
    return p[:, 0] - p[:, 1:].sum(axis=1)
