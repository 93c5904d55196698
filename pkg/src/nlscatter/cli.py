"""Command-line experiment runner.

Exit codes: 0 all verdicts pass, 1 a verdict failed, 2 invalid input,
3 runtime error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from nlscatter import diagnostics as dg
from nlscatter.config import (
    ExperimentConfig,
    default_output_root,
    load_json,
    parse_experiment,
    parse_sweep,
)
from nlscatter.errors import ConfigError, InsufficientSamplesError, NLScatterError
from nlscatter.evolution import free_evolve, full_evolve, heisenberg_position
from nlscatter.lattice import GridSpec
from nlscatter.spectrum import flat_band_eigen_demo, spectrum_report
from nlscatter.symbols import FlatBand, certify_classes, symbol_from_dict

EXIT_PASS, EXIT_FAIL, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2, 3

log = logging.getLogger("nlscatter")


@dataclass
class RunResult:
    name: str
    verdicts: dict = field(default_factory=dict)  # name -> (ok, detail)
    series: dict = field(default_factory=dict)  # file stem -> TimeSeries
    sections: list = field(default_factory=list)  # report text blocks

    @property
    def ok(self) -> bool:
        return all(ok for ok, _ in self.verdicts.values())

    def verdict(self, name, ok, detail=""):
        self.verdicts[name] = (bool(ok), detail)
        log.info("%s: %s %s", name, "pass" if ok else "FAIL", detail)


# ---------------------------------------------------------------------------
# single experiment


def _fit_text(name, s):
    f = s.fit
    if f is None:
        return f"fit.{name} = none"
    return (f"fit.{name} = model={f.model} exponent={f.exponent!r} prefactor={f.prefactor!r} "
            f"r2={f.r2!r} window=[{f.window[0]!r}, {f.window[1]!r}]")


def run_experiment(cfg: ExperimentConfig) -> RunResult:
    res = RunResult(cfg.name)
    tol = cfg.tolerances
    phi = cfg.make_packet()
    sym, pot, p = cfg.symbol, cfg.potential, cfg.packet
    res.sections.append(certify_classes(sym, (p.eps, p.R)).to_text("class"))
    res.sections.append(spectrum_report(sym).to_text("spectrum"))
    direction = cfg.direction if cfg.direction in ("increasing", "decreasing") else None
    consts = None
    if direction:
        consts = dg.BoundConstants.from_symbol(sym, p.eps, p.R, direction, cfg.grid.dim, pot, cfg.N)
        res.sections.append(consts.to_text("constants"))
    times = cfg.times
    norm2 = phi.norm() ** 2

    for name in cfg.diagnostics:
        log.info("running %s", name)
        if name == "unitarity":
            worst = 0.0
            for t in times:
                worst = max(worst, abs(free_evolve(phi, sym, t).norm() / phi.norm() - 1))
                if pot is not None:
                    worst = max(worst, abs(full_evolve(phi, cfg.params, t).norm() / phi.norm() - 1))
            a, b = float(times[0]), float(times[-1])
            two = free_evolve(free_evolve(phi, sym, a), sym, b)
            one = free_evolve(phi, sym, a + b)
            group = float(np.sqrt(np.sum(np.abs(two.values - one.values) ** 2) * phi.grid.cell))
            res.verdict("unitarity", worst <= tol["unitarity"] and group <= tol["unitarity"],
                        f"norm_dev={worst:.3e} group_law={group:.3e}")

        elif name == "heisenberg":
            s = dg.heisenberg_norm_series(phi, sym, times)
            ident = [heisenberg_position(phi, sym, float(t)).norm for t in times]
            rel = float(np.max(np.abs(np.array(ident) - s.values) / s.values))
            quad = dg.quadratic_bound_check(phi, sym, times, consts)
            res.series["heisenberg_norm"] = s
            res.verdict("heisenberg", rel <= tol["heisenberg_rel"] and quad.ok,
                        f"identity_rel={rel:.3e} quadratic_margin={quad.worst_margin:.6g}")

        elif name == "cone_decay":
            s = dg.propagation_estimate_series(phi, sym, direction or "inf", p.eps, p.R,
                                               times, window=cfg.fit_window)
            res.series["cone_mass_inside"] = s
            res.sections.append(_fit_text("cone_mass_inside", s))
            ok = s.fit is not None and s.fit.exponent <= tol["cone_exponent_max"]
            res.verdict("cone_decay", ok, _exp_detail(s))

        elif name == "cook":
            s = dg.cook_integrand_series(phi, sym, pot, times, window=cfg.fit_window)
            res.series["cook_integrand"] = s
            res.sections.append(_fit_text("cook_integrand", s))
            if pot is None:
                ok = bool(np.all(np.abs(s.values) <= tol["zero"]))
                res.verdict("cook", ok, "free run: integrand identically zero")
            else:
                ok = s.fit is not None and abs(s.fit.exponent + pot.gamma) <= tol["cook_exponent_abs"]
                tail = ("convergent" if s.fit and dg.tail_converges(s.fit, tol["cook_exponent_abs"])
                        else "divergent")
                res.verdict("cook", ok, f"{_exp_detail(s)} expected={-pot.gamma:g} tail={tail}")

        elif name == "pairing":
            chk = dg.pairing_lower_check(phi, sym, pot, times, consts)
            s = dg.pairing_series(phi, sym, pot, times, window=cfg.fit_window)
            res.series["pairing"] = s
            res.sections.append(_fit_text("pairing", s))
            res.verdict("pairing", chk.ok, f"lower_bound_margin={chk.worst_margin:.6g} "
                                           f"at t={chk.worst_time:g}")

        elif name == "outside_mass":
            chk = dg.outside_mass_check(phi, sym, times, consts)
            res.verdict("outside_mass", chk.ok, f"margin={chk.worst_margin:.6g}")

        elif name == "lemma2":
            r = dg.lemma2_upper_check(phi, sym, pot, times, cfg.N, consts,
                                      calibration_window=cfg.calibration_window)
            res.sections.append(f"lemma2.c3 = {r.c3!r}\nlemma2.c4 = {r.c4!r}")
            res.verdict("lemma2", r.ok, f"margin={r.check.worst_margin:.6g} c4={r.c4:.6g}")

        elif name == "cauchy_gap":
            # gaps are indexed by t1, so they are fitted over their own range
            t1 = [a for a, _ in cfg.time_pairs]
            s = dg.cauchy_gap_series(phi, cfg.params, cfg.time_pairs, window=(t1[0], t1[-1]))
            res.series["cauchy_gap"] = s
            res.sections.append(_fit_text("cauchy_gap", s))
            if pot is None:
                ok = bool(np.all(s.values <= tol["zero"]))
                res.verdict("cauchy_gap", ok, "free run: gaps vanish")
            else:
                slope = dg.trend_slope(s, (s.times[0], s.times[-1]))
                if pot.gamma > 1:
                    ok = (s.fit is not None
                          and abs(s.fit.exponent - (1 - pot.gamma)) <= tol["cauchy_slope_abs"])
                else:
                    ok = slope >= tol["gap_shrink_slope"]
                res.verdict("cauchy_gap", ok, f"slope={slope:.4f} {_exp_detail(s)} "
                                              f"expected={1 - pot.gamma:g}")

        elif name == "divergence":
            s = dg.divergence_witness(phi, cfg.params, times, window=cfg.witness_window)
            res.series["divergence_integral"] = s
            res.sections.append(_fit_text("divergence_integral", s))
            g = pot.gamma
            if g == 1.0:
                win = cfg.witness_window or dg.default_window(times)
                chk = dg.log_lower_bound_check(s, pot.kappa, consts.c1, norm2, win,
                                               tol["log_bound_factor"])
                res.verdict("divergence", chk.ok, f"log_bound_margin={chk.worst_margin:.6g}")
            else:
                ok = s.fit is not None and abs(s.fit.exponent - (1 - g)) <= tol["witness_exponent_abs"]
                res.verdict("divergence", ok, f"{_exp_detail(s)} expected={1 - g:g}")
    return res


def _exp_detail(s):
    if s.fit is None:
        return "exponent=none"
    return f"exponent={s.fit.exponent:.4f} r2={s.fit.r2:.4f}"


def write_bundle(res: RunResult, out: Path, header: str = "") -> None:
    out.mkdir(parents=True, exist_ok=True)
    for stem, s in sorted(res.series.items()):
        dg.write_series_csv(s, out / f"{stem}.csv")
    lines = [header] if header else []
    lines += res.sections
    for name, (ok, detail) in res.verdicts.items():
        lines.append(f"verdict.{name} = {'pass' if ok else 'fail'}  {detail}".rstrip())
    lines.append(f"verdict.all = {'pass' if res.ok else 'fail'}")
    (out / "report.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")


def _out_dir(args, cfg_out, name) -> Path:
    if args.out:
        return Path(args.out)
    if cfg_out:
        return Path(cfg_out)
    return Path(default_output_root()) / name


# ---------------------------------------------------------------------------
# sweep


def _sweep_point(payload):
    raw_sweep, gamma = payload
    sweep = parse_sweep(raw_sweep)
    cfg = sweep.point(gamma)
    phi = cfg.make_packet()
    tol = cfg.tolerances
    cook = dg.cook_integrand_series(phi, cfg.symbol, cfg.potential, cfg.times,
                                    window=cfg.fit_window)
    gaps = dg.cauchy_gap_series(phi, cfg.params, cfg.time_pairs, window=cfg.fit_window)
    slope = dg.trend_slope(gaps, (gaps.times[0], gaps.times[-1]))
    exp_ = cook.fit.exponent if cook.fit else math.nan
    return {
        "gamma": gamma,
        "cook_exponent": exp_,
        "cook_ok": bool(cook.fit and abs(exp_ + gamma) <= tol["cook_exponent_abs"]),
        "tail": ("convergent" if cook.fit and dg.tail_converges(cook.fit, tol["cook_exponent_abs"])
                 else "divergent"),
        "gap_slope": slope,
        "gaps_shrink": slope < tol["gap_shrink_slope"],
        "series": {"cook_integrand": cook, "cauchy_gap": gaps},
    }


def run_sweep(raw: dict, workers: int):
    sweep = parse_sweep(raw)
    payloads = [(raw, g) for g in sweep.gammas]
    if workers <= 1 or len(payloads) == 1:
        rows = [_sweep_point(pl) for pl in payloads]
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            rows = list(ex.map(_sweep_point, payloads))
    return sweep, rows


def sweep_table(rows) -> tuple[str, bool]:
    head = "gamma  cook_exponent  tail        gap_slope  gaps_shrink  expected   ok"
    lines = [head]
    all_ok = True
    for r in rows:
        short = r["gamma"] > 1
        ok = (r["cook_ok"] and (r["tail"] == "convergent") == short
              and r["gaps_shrink"] == short)
        all_ok &= ok
        lines.append(f"{r['gamma']:<6g} {r['cook_exponent']:<14.4f} {r['tail']:<11s} "
                     f"{r['gap_slope']:<10.4f} {str(r['gaps_shrink']).lower():<12s} "
                     f"{'short' if short else 'long':<10s} {'pass' if ok else 'fail'}")
    return "\n".join(lines), all_ok


# ---------------------------------------------------------------------------
# subcommands


def _symbol_from_args(args):
    if args.rho is not None:
        return symbol_from_dict({"kind": "fractional", "rho": args.rho})
    if args.symbol:
        try:
            return symbol_from_dict(json.loads(args.symbol))
        except json.JSONDecodeError as exc:
            raise ConfigError("--symbol", f"invalid JSON: {exc}") from None
        except (KeyError, ValueError, TypeError) as exc:
            raise ConfigError("--symbol", str(exc)) from None
    if args.config:
        raw = load_json(args.config)
        try:
            return symbol_from_dict(raw["symbol"] if "symbol" in raw else raw)
        except (KeyError, ValueError, TypeError) as exc:
            raise ConfigError("symbol", str(exc)) from None
    raise ConfigError("--rho/--symbol/--config", "a symbol is required")


def cmd_check_symbol(args) -> int:
    sym = _symbol_from_args(args)
    rep = certify_classes(sym, tuple(args.sigma_range), k_max=args.k_max)
    print(rep.to_text("class"))
    return EXIT_PASS if rep.in_tilde_B else EXIT_FAIL


def cmd_spectrum(args) -> int:
    sym = _symbol_from_args(args)
    rep = spectrum_report(sym, tuple(args.sigma_range))
    print(rep.to_text("spectrum"))
    if isinstance(sym, FlatBand):
        demo = flat_band_eigen_demo(sym, GridSpec(1, args.points, args.half_length))
        print(f"flat_band.defect = {demo.defect!r}")
        print(f"flat_band.mode_count = {demo.mode_count}")
        print(f"flat_band.eigenvalue = {demo.eigenvalue!r}")
        return EXIT_PASS if demo.defect <= 1e-10 else EXIT_FAIL
    return EXIT_PASS


def _experiment(args, only=None) -> int:
    if not args.config:
        raise ConfigError("--config", "missing experiment config")
    raw = load_json(args.config)
    if only is not None:
        raw = dict(raw, diagnostics=only)
    cfg = parse_experiment(raw)
    out = _out_dir(args, cfg.output_dir, cfg.name)
    res = run_experiment(cfg)
    write_bundle(res, out, f"experiment = {cfg.name}")
    for name, (ok, detail) in res.verdicts.items():
        print(f"{name}: {'pass' if ok else 'FAIL'}  {detail}")
    print(f"report written to {out / 'report.txt'}")
    return EXIT_PASS if res.ok else EXIT_FAIL


def cmd_simulate(args) -> int:
    return _experiment(args)


def cmd_cook(args) -> int:
    return _experiment(args, only=["cook"])


def cmd_threshold_sweep(args) -> int:
    if not args.config:
        raise ConfigError("--config", "missing sweep config")
    raw = load_json(args.config)
    sweep, rows = run_sweep(raw, args.workers)
    out = _out_dir(args, sweep.output_dir, sweep.name)
    table, ok = sweep_table(rows)
    out.mkdir(parents=True, exist_ok=True)
    for r in rows:
        d = out / f"gamma_{r['gamma']:g}"
        d.mkdir(exist_ok=True)
        for stem, s in r["series"].items():
            dg.write_series_csv(s, d / f"{stem}.csv")
    (out / "report.txt").write_text(
        f"sweep = {sweep.name}\n{table}\nverdict.all = {'pass' if ok else 'fail'}\n",
        encoding="utf-8")
    print(table)
    return EXIT_PASS if ok else EXIT_FAIL


def cmd_replay(args) -> int:
    root = Path(args.directory)
    if not root.is_dir():
        raise ConfigError("directory", f"no such directory: {root}")
    files = sorted(root.rglob("*.csv"))
    if not files:
        raise ConfigError("directory", f"no series CSVs under {root}")
    same = True
    for f in files:
        s, _ = dg.read_series_csv(f)
        if s.fit is None:
            print(f"{f.relative_to(root)}: no fit")
            continue
        again = dg.refit(s).fit
        match = again == s.fit
        same &= match
        detail = "none" if again is None else f"{again.exponent!r}"
        print(f"{f.relative_to(root)}: {s.fit.model} exponent={detail} "
              f"{'identical' if match else 'DIFFERS'}")
    return EXIT_PASS if same else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="experiment or sweep JSON file")
    common.add_argument("--out", help="output directory (default: $%s/<name>)" % "NLSCATTER_OUT")
    common.add_argument("--workers", type=int, default=os.cpu_count() or 1,
                        help="worker processes for sweeps")
    common.add_argument("--verbose", action="store_true")

    sym = argparse.ArgumentParser(add_help=False)
    sym.add_argument("--rho", type=float, help="fractional symbol sigma**rho")
    sym.add_argument("--symbol", help='symbol as JSON, e.g. \'{"kind": "relativistic", "m": 1}\'')
    sym.add_argument("--sigma-range", type=float, nargs=2, default=(1e-2, 1e2),
                     metavar=("LO", "HI"))

    parser = argparse.ArgumentParser(prog="nlscatter", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("check-symbol", parents=[common, sym], help="class membership report")
    p.add_argument("--k-max", type=int, default=4)
    p.set_defaults(func=cmd_check_symbol)
    p = sub.add_parser("spectrum", parents=[common, sym], help="spectral interval and zero set")
    p.add_argument("--points", type=int, default=4096)
    p.add_argument("--half-length", type=float, default=200.0)
    p.set_defaults(func=cmd_spectrum)
    sub.add_parser("simulate", parents=[common], help="run every configured diagnostic"
                   ).set_defaults(func=cmd_simulate)
    sub.add_parser("cook", parents=[common], help="Cook integrand decay only"
                   ).set_defaults(func=cmd_cook)
    sub.add_parser("threshold-sweep", parents=[common], help="decay-exponent sweep"
                   ).set_defaults(func=cmd_threshold_sweep)
    p = sub.add_parser("replay", parents=[common], help="re-fit stored series")
    p.add_argument("directory")
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_PASS
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (NLScatterError, InsufficientSamplesError, ArithmeticError, ValueError,
            MemoryError, OSError) as exc:
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
