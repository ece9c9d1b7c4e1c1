"""Discretized mode-pair ensemble of the down-conversion source.

Each correlated (k1, k2) mode pair carries a weight and a phase. A filter
(aperture) keeps or loses each pair as a whole; the post-selected
polarization state is the weighted incoherent mixture of the per-pair pure
states, so any phase spread among the accepted pairs shows up as reduced
HH/VV coherence.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .states import DensityMatrix, PureTwoQubit

DEFAULT_MODES = 256


class SelectionError(ValueError):
    """No weight survives the aperture."""


@dataclass(frozen=True)
class ModePair:
    weight: float
    phase: float = 0.0

    def __post_init__(self):
        if not self.weight >= 0:
            raise ValueError(f"mode weight must be >= 0, got {self.weight}")


@dataclass(frozen=True)
class Aperture:
    acceptance: tuple[float, ...]

    def __post_init__(self):
        acc = tuple(float(a) for a in self.acceptance)
        if any(not 0.0 <= a <= 1.0 for a in acc):
            raise ValueError("aperture acceptance values must lie in [0, 1]")
        object.__setattr__(self, "acceptance", acc)

    @classmethod
    def open(cls, n: int) -> "Aperture":
        return cls((1.0,) * n)

    @classmethod
    def central(cls, n: int, fraction: float) -> "Aperture":
        """Accept the ``fraction`` of modes closest to the middle of the ensemble."""
        if not 0.0 < fraction <= 1.0:
            raise ValueError("fraction must lie in (0, 1]")
        keep = max(1, int(round(fraction * n)))
        start = (n - keep) // 2
        acc = [0.0] * n
        for i in range(start, start + keep):
            acc[i] = 1.0
        return cls(tuple(acc))

    def __len__(self):
        return len(self.acceptance)


def _arrays(modes, ap: Aperture | None):
    if len(modes) == 0:
        raise ValueError("empty mode ensemble")
    w = np.array([m.weight for m in modes], dtype=float)
    ph = np.array([m.phase for m in modes], dtype=float)
    if ap is None:
        a = np.ones_like(w)
    else:
        if len(ap) != len(modes):
            raise ValueError(f"aperture has {len(ap)} entries for {len(modes)} modes")
        a = np.array(ap.acceptance, dtype=float)
    return w, a, ph


def phase_ramp(n: int = DEFAULT_MODES, spread: float = 0.0, weights=None) -> list[ModePair]:
    """``n`` mode pairs with phases evenly spaced over [0, spread)."""
    if n < 1:
        raise ValueError("need at least one mode")
    phases = np.linspace(0.0, spread, n, endpoint=False)
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=float)
    return [ModePair(float(wi), float(p)) for wi, p in zip(w, phases)]


def collection_efficiency(modes, ap: Aperture) -> float:
    w, a, _ = _arrays(modes, ap)
    total = w.sum()
    if total <= 0:
        raise ValueError("total mode weight must be positive")
    return float(np.dot(w, a) / total)


def _collected_coherence(modes, ap) -> complex:
    w, a, ph = _arrays(modes, ap)
    kept = w * a
    norm = kept.sum()
    if norm <= 0:
        raise SelectionError("no mode weight passes the aperture")
    return complex(np.sum(kept * np.exp(1j * ph)) / norm)


def effective_visibility(modes, ap: Aperture) -> float:
    return min(1.0, abs(_collected_coherence(modes, ap)))


def collected_state(modes, ap: Aperture, p: PureTwoQubit) -> DensityMatrix:
    """Mixture of the accepted pairs' states; each pair adds its phase to ``p.phi``."""
    w, a, ph = _arrays(modes, ap)
    kept = w * a
    norm = kept.sum()
    if norm <= 0:
        raise SelectionError("no mode weight passes the aperture")
    rho = np.zeros((4, 4), dtype=complex)
    for wi, phase in zip(kept / norm, ph):
        if wi == 0:
            continue
        v = PureTwoQubit(p.alpha, p.beta, p.phi + phase).vector()
        rho += wi * np.outer(v, v.conj())
    return DensityMatrix(rho)


def load_modes_csv(path) -> list[ModePair]:
    """Two columns per row: weight, phase in radians. A non-numeric first row is a header."""
    rows = _read_numeric_rows(path, ncols=2)
    return [ModePair(w, ph) for w, ph in rows]


def load_aperture_csv(path) -> Aperture:
    rows = _read_numeric_rows(path, ncols=1)
    return Aperture(tuple(r[0] for r in rows))


def _read_numeric_rows(path, ncols: int) -> list[tuple[float, ...]]:
    out = []
    with Path(path).open(newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                vals = tuple(float(c) for c in row[:ncols])
            except ValueError:
                if lineno == 1 and not out:
                    continue
                raise ValueError(f"{path}:{lineno}: non-numeric value in {row!r}") from None
            if len(vals) != ncols or any(not math.isfinite(v) for v in vals):
                raise ValueError(f"{path}:{lineno}: expected {ncols} finite column(s)")
            out.append(vals)
    if not out:
        raise ValueError(f"{path}: no data rows")
    return out
