"""Counting experiments: Monte Carlo simulation, CSV I/O and count analysis.

Probabilities are estimated the way the experiment normalizes them: the
coincidence count at a setting divided by the sum of the HH and VV basis
coincidences taken over the same duration.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .bell import CHSHSettings, LOCAL_BOUND, combine
from .hardy import LadderResult, LadderSpec, Measured, ladder_settings, violation_sigma
from .measurement import AnalyzerSetting, joint_probs, perp

CSV_COLUMNS = ("theta_a_deg", "theta_b_deg", "duration_s", "count", "n_hh", "n_vv")
ANGLE_TOL = 1e-6


class DataError(ValueError):
    """Malformed, incomplete or inconsistent count data."""


class CoverageError(DataError):
    """Records do not cover the settings a test needs, exactly once each."""


@dataclass(frozen=True)
class ExperimentConfig:
    pair_rate: float = 4000.0
    duration: float = 60.0
    dqe_a: float = 1.0
    dqe_b: float = 1.0
    accidental_rate: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.pair_rate < 0 or self.duration < 0 or self.accidental_rate < 0:
            raise ValueError("rates and durations must be nonnegative")
        for name in ("dqe_a", "dqe_b"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")


@dataclass(frozen=True)
class CountRecord:
    theta_a: float
    theta_b: float
    duration: float
    count: int
    n_hh: int
    n_vv: int

    def __post_init__(self):
        for name in ("count", "n_hh", "n_vv"):
            v = getattr(self, name)
            if int(v) != v or v < 0:
                raise DataError(f"{name} must be a nonnegative integer, got {v!r}")
            object.__setattr__(self, name, int(v))
        if not self.duration >= 0:
            raise DataError(f"duration must be nonnegative, got {self.duration!r}")

    @property
    def setting(self) -> AnalyzerSetting:
        return AnalyzerSetting(self.theta_a, self.theta_b)


def _substream(seed: int, index: int) -> np.random.Generator:
    # per-setting streams depend only on (seed, index), never on evaluation order
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(index,)))


def expected_counts(rho, settings, cfg: ExperimentConfig) -> np.ndarray:
    """Mean coincidences for each setting: signal plus accidental background."""
    ta = [s.theta_a for s in settings]
    tb = [s.theta_b for s in settings]
    p = joint_probs(rho, ta, tb)
    signal = cfg.pair_rate * cfg.duration * cfg.dqe_a * cfg.dqe_b
    return signal * p + cfg.accidental_rate * cfg.duration


def simulate_counts(rho, settings, cfg: ExperimentConfig) -> list[CountRecord]:
    """Poisson coincidence counts per setting, each with its own HH/VV normalization."""
    settings = list(settings)
    mu = expected_counts(rho, settings, cfg)
    mu_norm = expected_counts(rho, [AnalyzerSetting(0.0, 0.0), AnalyzerSetting(math.pi / 2, math.pi / 2)], cfg)
    out = []
    for i, (s, m) in enumerate(zip(settings, mu)):
        rng = _substream(cfg.seed, i)
        n, nhh, nvv = rng.poisson([m, mu_norm[0], mu_norm[1]])
        out.append(CountRecord(s.theta_a, s.theta_b, cfg.duration, int(n), int(nhh), int(nvv)))
    return out


def exact_records(rho, settings, cfg: ExperimentConfig) -> list[CountRecord]:
    """Records holding the rounded expected counts (noise-free synthetic data)."""
    settings = list(settings)
    mu = np.rint(expected_counts(rho, settings, cfg))
    nhh, nvv = np.rint(
        expected_counts(rho, [AnalyzerSetting(0.0, 0.0), AnalyzerSetting(math.pi / 2, math.pi / 2)], cfg)
    )
    return [
        CountRecord(s.theta_a, s.theta_b, cfg.duration, int(m), int(nhh), int(nvv))
        for s, m in zip(settings, mu)
    ]


def estimate_probability(rec: CountRecord, accidental_rate: float = 0.0) -> Measured:
    """Normalized coincidence probability with first-order Poisson uncertainty.

    With ``accidental_rate`` > 0 the expected background is subtracted from
    every count (clipped at zero) before normalizing.
    """
    n, norm = float(rec.count), float(rec.n_hh + rec.n_vv)
    if accidental_rate:
        bg = accidental_rate * rec.duration
        n = max(n - bg, 0.0)
        norm = max(norm - 2 * bg, 0.0)
    if norm <= 0:
        raise DataError("normalization counts n_hh + n_vv are zero")
    p = n / norm
    if n == 0:
        return Measured(0.0, 1.0 / norm)
    return Measured(p, p * math.sqrt(1.0 / n + 1.0 / norm))


def bootstrap_probability(rec: CountRecord, n_resamples: int = 1000, seed: int = 0) -> Measured:
    """Parametric bootstrap of the normalized probability (cross-check mode)."""
    norm = rec.n_hh + rec.n_vv
    if norm <= 0:
        raise DataError("normalization counts n_hh + n_vv are zero")
    rng = np.random.default_rng(seed)
    num = rng.poisson(rec.count, n_resamples)
    den = rng.poisson(norm, n_resamples)
    den = np.where(den == 0, 1, den)
    ratio = num / den
    return Measured(rec.count / norm, float(ratio.std(ddof=1)))


def _match(records, wanted: list[AnalyzerSetting], tol: float = ANGLE_TOL) -> list[CountRecord]:
    hits: list[list[CountRecord]] = [[] for _ in wanted]
    for rec in records:
        for i, s in enumerate(wanted):
            if rec.setting.matches(s, tol):
                hits[i].append(rec)
    missing = [wanted[i] for i, h in enumerate(hits) if not h]
    dupes = [wanted[i] for i, h in enumerate(hits) if len(h) > 1]
    if missing or dupes:
        fmt = lambda ss: ", ".join(f"({math.degrees(s.theta_a):.6f}, {math.degrees(s.theta_b):.6f})" for s in ss)
        parts = []
        if missing:
            parts.append(f"missing settings (deg): {fmt(missing)}")
        if dupes:
            parts.append(f"duplicate settings (deg): {fmt(dupes)}")
        raise CoverageError("; ".join(parts))
    return [h[0] for h in hits]


@dataclass(frozen=True)
class LadderAnalysis:
    p_k: Measured
    script_p: Measured
    terms: tuple[Measured, ...]
    margin: float
    sigma: float
    result: LadderResult

    @property
    def violated(self) -> bool:
        return self.margin > 0


def analyze_ladder(records, spec: LadderSpec, accidental_rate: float = 0.0) -> LadderAnalysis:
    settings = ladder_settings(spec)
    matched = _match(records, settings)
    est = [estimate_probability(r, accidental_rate) for r in matched]
    p_k, terms = est[0], tuple(est[1:])
    script_p = Measured(math.fsum(t.value for t in terms), math.sqrt(sum(t.sigma**2 for t in terms)))
    margin = p_k.value - script_p.value
    result = LadderResult(p_k.value, script_p.value, tuple(t.value for t in terms), margin, tuple(settings))
    return LadderAnalysis(p_k, script_p, terms, margin, violation_sigma(p_k, script_p), result)


def chsh_record_settings(settings: CHSHSettings) -> list[AnalyzerSetting]:
    """The 16 analyzer settings: four outcome combinations for each of the four pairs."""
    out = []
    for s in settings.pairs():
        a, b = s.theta_a, s.theta_b
        out += [
            AnalyzerSetting(a, b),
            AnalyzerSetting(a, perp(b)),
            AnalyzerSetting(perp(a), b),
            AnalyzerSetting(perp(a), perp(b)),
        ]
    return out


@dataclass(frozen=True)
class CHSHAnalysis:
    correlations: tuple[Measured, ...]
    s: Measured
    sigma: float

    @property
    def violated(self) -> bool:
        return self.s.value > LOCAL_BOUND


def correlation_estimate(n_pp, n_pb, n_bp, n_bb) -> Measured:
    counts = np.array([n_pp, n_pb, n_bp, n_bb], dtype=float)
    total = counts.sum()
    if total <= 0:
        raise DataError("no coincidences recorded for a correlation")
    signs = np.array([1.0, -1.0, -1.0, 1.0])
    e = float(signs @ counts / total)
    # dE/dN_x = (s_x - E) / total, Poisson var(N_x) = N_x
    var = float(np.sum(counts * (signs - e) ** 2)) / total**2
    return Measured(e, math.sqrt(var))


def analyze_chsh(records, settings: CHSHSettings) -> CHSHAnalysis:
    matched = _match(records, chsh_record_settings(settings))
    corr = []
    for i in range(4):
        block = matched[4 * i: 4 * i + 4]
        corr.append(correlation_estimate(*(r.count for r in block)))
    s = combine(*(c.value for c in corr))
    sigma_s = math.sqrt(sum(c.sigma**2 for c in corr))
    viol = (s - LOCAL_BOUND) / sigma_s if sigma_s > 0 else math.copysign(math.inf, s - LOCAL_BOUND)
    return CHSHAnalysis(tuple(corr), Measured(s, sigma_s), viol)


def ingest_csv(path) -> list[CountRecord]:
    """Read count records; the header row is mandatory.

    Errors name the offending line. Extra columns are ignored.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty dataset") from None
        header = [h.strip() for h in header]
        missing = [c for c in CSV_COLUMNS if c not in header]
        if missing:
            raise DataError(f"{path}:1: missing column(s): {', '.join(missing)}")
        idx = {c: header.index(c) for c in CSV_COLUMNS}
        records = []
        for row in reader:
            lineno = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            try:
                vals = {c: row[i].strip() for c, i in idx.items()}
            except IndexError:
                raise DataError(f"{path}:{lineno}: expected {len(header)} columns, got {len(row)}") from None
            try:
                ta, tb, dur = (float(vals[c]) for c in CSV_COLUMNS[:3])
                ints = []
                for c in CSV_COLUMNS[3:]:
                    x = float(vals[c])
                    if not x.is_integer():
                        raise DataError(f"{c} must be an integer, got {vals[c]!r}")
                    ints.append(int(x))
                if not all(math.isfinite(v) for v in (ta, tb, dur)):
                    raise DataError("non-finite value")
                records.append(CountRecord(math.radians(ta), math.radians(tb), dur, *ints))
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from None
    if not records:
        raise DataError(f"{path}: empty dataset")
    return records


def write_csv(records, path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in records:
            w.writerow([repr(math.degrees(r.theta_a)), repr(math.degrees(r.theta_b)),
                        repr(float(r.duration)), r.count, r.n_hh, r.n_vv])


def with_duration(cfg: ExperimentConfig, duration: float) -> ExperimentConfig:
    return replace(cfg, duration=duration)


def ladder_duration(K: int) -> float:
    """Per-setting acquisition time used in the reference runs."""
    if K <= 5:
        return 60.0
    if K <= 10:
        return 120.0
    return 180.0
