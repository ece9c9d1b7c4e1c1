"""Command-line interface.

Angles are given in degrees on the command line and converted once here.
Exit status: 0 on success, 2 for bad input (flags or data files), 3 for an
internal failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, bell, hardy, kernels, measurement, source, stats
from .states import NoiseKind, NoiseModel, StateError, apply_noise, state_from_gamma

EXIT_OK, EXIT_INPUT, EXIT_INTERNAL = 0, 2, 3


class InputError(Exception):
    pass


@dataclass
class RunReport:
    command: str
    parameters: dict
    results: dict = field(default_factory=dict)
    violations: dict = field(default_factory=dict)
    table: list = field(default_factory=list)
    provenance: dict = field(default_factory=dict)
    timing_s: float = 0.0

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, default=_json_default)

    def to_text(self) -> str:
        lines = [f"# {self.command}"]
        for k, v in self.parameters.items():
            lines.append(f"  {k}: {v}")
        if self.results:
            lines.append("results:")
            for k, v in self.results.items():
                lines.append(f"  {k}: {_fmt(v)}")
        if self.violations:
            lines.append("violations:")
            for k, v in self.violations.items():
                lines.append(f"  {k}: {_fmt(v)}")
        if self.table:
            cols = list(self.table[0].keys())
            lines.append("  ".join(f"{c:>14}" for c in cols))
            for row in self.table:
                lines.append("  ".join(f"{_fmt(row[c]):>14}" for c in cols))
        prov = ", ".join(f"{k}={v}" for k, v in self.provenance.items())
        lines.append(f"[{prov}; {self.timing_s:.3f} s]")
        return "\n".join(lines)


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, hardy.Measured):
        return {"value": o.value, "sigma": o.sigma}
    raise TypeError(f"not serializable: {type(o).__name__}")


def _fmt(v):
    if isinstance(v, hardy.Measured):
        return f"{v.value:.6g} +/- {v.sigma:.2g}"
    if isinstance(v, dict) and set(v) == {"value", "sigma"}:
        return f"{v['value']:.6g} +/- {v['sigma']:.2g}"
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def _m(x: hardy.Measured) -> dict:
    return {"value": float(x.value), "sigma": float(x.sigma)}


def _noise(args) -> NoiseModel | None:
    if args.visibility >= 1.0:
        return None
    return NoiseModel(args.visibility, NoiseKind(args.noise))


def _state(args, gamma: float):
    p = state_from_gamma(gamma, math.radians(args.phi_deg))
    noise = _noise(args)
    return apply_noise(p, noise or NoiseModel(1.0))


def _cfg(args, duration: float) -> stats.ExperimentConfig:
    return stats.ExperimentConfig(
        pair_rate=args.pair_rate,
        duration=duration,
        dqe_a=args.dqe_a,
        dqe_b=args.dqe_b,
        accidental_rate=args.accidental_rate,
        seed=args.seed,
    )


def cmd_predict(args) -> RunReport:
    rho = _state(args, args.gamma)
    if args.theta_a_range:
        lo, hi, step = args.theta_a_range
        ta = list(np.arange(lo, hi + step / 2, step))
    else:
        ta = args.theta_a
    rows = []
    for b in args.theta_b:
        for a in ta:
            s = measurement.AnalyzerSetting.from_degrees(a, b)
            rows.append({
                "theta_a_deg": float(a),
                "theta_b_deg": float(b),
                "theta_a_rad": s.theta_a,
                "theta_b_rad": s.theta_b,
                "probability": measurement.joint_prob(rho, s),
            })
    report = RunReport("predict", _state_params(args, args.gamma), table=rows)
    if len(rows) > 1 and len(args.theta_b) == 1:
        try:
            report.results["fringe_visibility"] = measurement.visibility_of([r["probability"] for r in rows])
        except ValueError:
            pass
    if args.out:
        _write_table(args.out, rows)
    return report


def _state_params(args, gamma) -> dict:
    return {
        "gamma": gamma,
        "phi_deg": args.phi_deg,
        "phi_rad": math.radians(args.phi_deg),
        "visibility": args.visibility,
        "noise": args.noise,
    }


def cmd_ladder(args) -> RunReport:
    K = args.k
    gamma = args.gamma
    if gamma is None:
        gamma = hardy.optimize_gamma(K, _noise(args), phi=math.radians(args.phi_deg)).gamma
    spec = hardy.LadderSpec(K, gamma)
    rho = _state(args, gamma)
    params = {"K": K, **_state_params(args, gamma), "mode": args.mode}
    report = RunReport("ladder", params)
    exact = hardy.evaluate_ladder(rho, spec)
    report.results["angles_deg"] = [math.degrees(t) for t in hardy.ladder_angles(spec)]
    if args.mode == "analytic":
        report.results.update(p_k=exact.p_k, script_p=exact.script_p, margin=exact.margin,
                              violated=exact.violated)
        return report
    duration = args.duration_s if args.duration_s is not None else stats.ladder_duration(K)
    cfg = _cfg(args, duration)
    params.update(duration_s=duration, pair_rate=cfg.pair_rate, dqe_a=cfg.dqe_a, dqe_b=cfg.dqe_b,
                  accidental_rate=cfg.accidental_rate)
    records = stats.simulate_counts(rho, hardy.ladder_settings(spec), cfg)
    res = stats.analyze_ladder(records, spec, accidental_rate=args.accidental_rate if args.subtract_accidentals else 0.0)
    report.results.update(
        p_k=_m(res.p_k), script_p=_m(res.script_p), margin=res.margin, violated=res.violated,
        p_k_theory=exact.p_k, script_p_theory=exact.script_p,
    )
    report.violations["sigma"] = res.sigma
    report.table = [
        {"theta_a_deg": math.degrees(r.theta_a), "theta_b_deg": math.degrees(r.theta_b),
         "count": r.count, "n_hh": r.n_hh, "n_vv": r.n_vv}
        for r in records
    ]
    if args.out:
        stats.write_csv(records, args.out)
    return report


def cmd_optimize(args) -> RunReport:
    rows = []
    for K in args.k_list:
        r = hardy.optimize_gamma(K, _noise(args), objective=args.objective, phi=math.radians(args.phi_deg))
        rows.append({"K": K, "gamma_star": r.gamma, "value": r.value, "method": r.method})
    report = RunReport("optimize", {"K": args.k_list, "objective": args.objective,
                                    **_state_params(args, None)}, table=rows)
    if args.out:
        _write_table(args.out, rows)
    return report


def cmd_sweep(args) -> RunReport:
    gammas = np.linspace(0.0, 1.0, args.points)
    noise = _noise(args)
    phi = math.radians(args.phi_deg)
    curves = {K: hardy.ladder_curve(K, gammas, phi, noise) for K in args.k_list}
    rows = [{"gamma": float(g), **{f"P_{K}": float(curves[K][i]) for K in args.k_list}}
            for i, g in enumerate(gammas)]
    report = RunReport("sweep", {"K": args.k_list, "points": args.points, **_state_params(args, None)})
    for K in args.k_list:
        i = int(np.argmax(curves[K]))
        report.results[f"peak_P_{K}"] = {"gamma": float(gammas[i]), "P": float(curves[K][i])}
    if args.out:
        _write_table(args.out, rows)
    else:
        report.table = rows
    return report


def cmd_bell(args) -> RunReport:
    report = RunReport("bell", {**_state_params(args, args.gamma), "mode": args.mode})
    if args.s_value is not None:
        if args.s_sigma is None:
            raise InputError("--s-value requires --s-sigma")
        report.parameters.update(s_value=args.s_value, s_sigma=args.s_sigma)
        report.results["S"] = {"value": args.s_value, "sigma": args.s_sigma}
        report.violations["sigma"] = bell.sigma_violation((args.s_value, args.s_sigma))
        return report
    rho = _state(args, args.gamma)
    settings, s_opt = bell.optimal_chsh_settings(rho)
    report.results["settings_deg"] = list(settings.degrees())
    report.results["settings_rad"] = list(settings.as_tuple())
    if args.mode == "analytic":
        report.results["S"] = {"value": s_opt, "sigma": 0.0}
        report.results["violated"] = s_opt > bell.LOCAL_BOUND
        return report
    duration = args.duration_s if args.duration_s is not None else 180.0
    per_record = duration / 16 if args.time_split == "total" else duration
    cfg = _cfg(args, per_record)
    report.parameters.update(duration_s=duration, time_split=args.time_split, per_record_s=per_record)
    records = stats.simulate_counts(rho, stats.chsh_record_settings(settings), cfg)
    res = stats.analyze_chsh(records, settings)
    report.results["S"] = _m(res.s)
    report.results["S_theory"] = s_opt
    report.results["correlations"] = [_m(c) for c in res.correlations]
    report.results["violated"] = res.violated
    report.violations["sigma"] = res.sigma
    if args.out:
        stats.write_csv(records, args.out)
    return report


def cmd_analyze(args) -> RunReport:
    records = stats.ingest_csv(args.csv)
    report = RunReport("analyze", {"csv": str(args.csv), "test": args.test, "records": len(records)})
    bg = args.accidental_rate if args.subtract_accidentals else 0.0
    if args.test == "ladder":
        if args.k is None:
            raise InputError("--k is required for a ladder analysis")
        gamma = args.gamma if args.gamma is not None else infer_gamma(records)
        spec = hardy.LadderSpec(args.k, gamma)
        res = stats.analyze_ladder(records, spec, accidental_rate=bg)
        report.parameters.update(K=args.k, gamma=gamma)
        report.results.update(p_k=_m(res.p_k), script_p=_m(res.script_p), margin=res.margin)
        report.violations["sigma"] = res.sigma
        report.results["verdict"] = "violation" if res.violated else "no violation"
    else:
        if not args.chsh_deg:
            raise InputError("--chsh-deg a a' b b' is required for a CHSH analysis")
        settings = bell.CHSHSettings.from_degrees(*args.chsh_deg)
        res = stats.analyze_chsh(records, settings)
        report.parameters["settings_deg"] = list(args.chsh_deg)
        report.results["S"] = _m(res.s)
        report.results["correlations"] = [_m(c) for c in res.correlations]
        report.violations["sigma"] = res.sigma
        report.results["verdict"] = "violation" if res.violated else "no violation"
    return report


def infer_gamma(records) -> float:
    """Recover gamma from the two equal-angle ladder settings.

    The larger |theta| of the two is theta_0 = arctan(sqrt(gamma)).
    """
    equal = []
    for r in records:
        if measurement.same_angle(r.theta_a, r.theta_b):
            t = measurement.reduce_angle(r.theta_a)
            equal.append(min(t, math.pi - t))
    if len(equal) != 2:
        raise InputError("cannot infer gamma: expected exactly two equal-angle settings; pass --gamma")
    return math.tan(max(equal)) ** 2


def cmd_simulate_source(args) -> RunReport:
    if args.modes_csv:
        modes = source.load_modes_csv(args.modes_csv)
    else:
        modes = source.phase_ramp(args.modes, math.radians(args.spread_deg))
    if args.aperture_csv:
        ap = source.load_aperture_csv(args.aperture_csv)
    else:
        ap = source.Aperture.central(len(modes), args.accept_fraction)
    p = state_from_gamma(args.gamma, math.radians(args.phi_deg))
    rho = source.collected_state(modes, ap, p)
    v_eff = source.effective_visibility(modes, ap)
    params = {"modes": len(modes), "spread_deg": args.spread_deg, "accept_fraction": args.accept_fraction,
              "gamma": args.gamma, "phi_deg": args.phi_deg}
    report = RunReport("simulate-source", params)
    report.results.update(
        collection_efficiency=source.collection_efficiency(modes, ap),
        effective_visibility=v_eff,
        purity=float(np.sum(np.abs(np.asarray(rho)) ** 2)),
    )
    settings, s = bell.optimal_chsh_settings(rho)
    report.results["chsh_S"] = s
    return report


def _write_table(path, rows) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0].keys()), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--gamma", type=float, default=None, help="entanglement degree alpha/beta")
    p.add_argument("--phi-deg", type=float, default=180.0, help="HH/VV relative phase in degrees")
    p.add_argument("--visibility", type=float, default=1.0)
    p.add_argument("--noise", choices=[k.value for k in NoiseKind], default="colored")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--duration-s", type=float, default=None, help="acquisition time per setting")
    p.add_argument("--pair-rate", type=float, default=4000.0, help="coincidences per second")
    p.add_argument("--dqe-a", type=float, default=1.0)
    p.add_argument("--dqe-b", type=float, default=1.0)
    p.add_argument("--accidental-rate", type=float, default=0.0)
    p.add_argument("--subtract-accidentals", action="store_true")
    p.add_argument("--json", action="store_true", help="emit the report as JSON")
    p.add_argument("--out", type=Path, default=None, help="write CSV data to this path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nonlocality", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("predict", help="joint detection probabilities")
    _add_common(p)
    p.add_argument("--theta-a", type=float, nargs="+", default=[0.0])
    p.add_argument("--theta-b", type=float, nargs="+", default=[0.0])
    p.add_argument("--theta-a-range", type=float, nargs=3, metavar=("FROM", "TO", "STEP"))
    p.set_defaults(func=cmd_predict, default_gamma=1.0)

    p = sub.add_parser("ladder", help="evaluate or simulate Hardy's ladder inequality")
    _add_common(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--mode", choices=["analytic", "simulate"], default="analytic")
    p.set_defaults(func=cmd_ladder)

    p = sub.add_parser("optimize", help="optimal entanglement degree per ladder height")
    _add_common(p)
    p.add_argument("--k", dest="k_list", type=int, nargs="+", default=[1, 4, 5, 10, 20])
    p.add_argument("--objective", choices=["p_k", "margin"], default="p_k")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("sweep", help="P_K as a function of gamma (plot data)")
    _add_common(p)
    p.add_argument("--k", dest="k_list", type=int, nargs="+", default=[4, 5, 10, 20])
    p.add_argument("--points", type=int, default=201)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("bell", help="CHSH S parameter and its significance")
    _add_common(p)
    p.add_argument("--mode", choices=["analytic", "simulate"], default="analytic")
    p.add_argument("--time-split", choices=["per-setting", "total"], default="per-setting",
                   help="whether --duration-s is per record or shared by all 16 records")
    p.add_argument("--s-value", type=float, default=None, help="measured S for a summary significance")
    p.add_argument("--s-sigma", type=float, default=None)
    p.set_defaults(func=cmd_bell, default_gamma=1.0)

    p = sub.add_parser("analyze", help="analyze a count CSV")
    _add_common(p)
    p.add_argument("csv", type=Path)
    p.add_argument("--test", choices=["ladder", "chsh"], default="ladder")
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--chsh-deg", type=float, nargs=4, metavar=("A", "A_PRIME", "B", "B_PRIME"))
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("simulate-source", help="mode-ensemble collection model")
    _add_common(p)
    p.add_argument("--modes", type=int, default=source.DEFAULT_MODES)
    p.add_argument("--spread-deg", type=float, default=0.0, help="phase spread across the ensemble")
    p.add_argument("--accept-fraction", type=float, default=1.0)
    p.add_argument("--modes-csv", type=Path, default=None)
    p.add_argument("--aperture-csv", type=Path, default=None)
    p.set_defaults(func=cmd_simulate_source, default_gamma=1.0)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.gamma is None and hasattr(args, "default_gamma"):
        args.gamma = args.default_gamma
    t0 = time.perf_counter()
    try:
        report = args.func(args)
    except (InputError, StateError, stats.DataError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    report.timing_s = time.perf_counter() - t0
    report.provenance = {"version": __version__, "seed": args.seed, "backend": kernels.BACKEND}
    print(report.to_json() if args.json else report.to_text())
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
