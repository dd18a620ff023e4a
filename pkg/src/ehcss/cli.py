"""Batch command-line interface.

Configuration is an INI file with sections ``[system]``, ``[point]``,
``[analytic]``, ``[sweep]``, ``[montecarlo]`` and ``[output]``; any key can
be overridden with ``--set section.key=value`` or one of the shortcut flags.
Precedence is flag > file > built-in default.

Exit status: 0 success, 1 validation failure, 2 configuration error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from ehcss import __version__, analytic, montecarlo
from ehcss.analytic import DF_FORMS, OutagePair, Protocol, ProtocolPoint, Relaying
from ehcss.channel import SystemParams
from ehcss.errors import BracketError, ConfigError, DomainError, QuadratureError
from ehcss.specialfn import QuadratureSpec
from ehcss.sweep import (Engine, SweepSpec, SweepVariable, compare_protocols,
                         find_alpha_crossing, optimize_beta, run_sweep)

EXIT_OK, EXIT_VALIDATION, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3

SWEEP_HEADER = ["x", "p_primary", "p_secondary", "p_primary_err", "p_secondary_err", "engine"]
COMPARE_HEADER = ["snr_db", "ts_p_primary", "ts_p_secondary", "ps_p_primary", "ps_p_secondary"]
EVAL_HEADER = ["engine", "p_primary", "p_secondary", "p_primary_err", "p_secondary_err"]
VALIDATE_HEADER = ["protocol", "relaying", "alpha", "beta",
                   "analytic_primary", "mc_primary", "err_primary", "tol_primary",
                   "analytic_secondary", "mc_secondary", "err_secondary", "tol_secondary",
                   "pass"]

DEFAULTS: dict[str, dict[str, str]] = {
    "system": {
        "snr_db": "40", "m": "1", "eta": "1", "v": "3",
        "d1": "1", "d2": "1", "d3": "0.5", "d4": "0.5",
        "Rp": "1", "Rs": "1", "T": "1", "noise_variances": "1,1,1,1",
    },
    "point": {"protocol": "TS", "relaying": "DF", "alpha": "0.7", "beta": "0.3"},
    "analytic": {"df_form": "factorized", "abs_tol": "1e-10", "rel_tol": "1e-8",
                 "max_subdivisions": "2048", "tail_cutoff_mass": "1e-13"},
    "sweep": {"mode": "sweep", "variable": "beta", "grid": "", "workers": "1"},
    "montecarlo": {"engine": "analytic", "trials": "1000000", "seed": "",
                   "workers": "1", "tol_floor": "0.005", "tol_sigma": "4",
                   "alphas": "0.3,0.5,0.7", "betas": "0.2,0.4,0.6"},
    "output": {"dir": ".", "prefix": "ehcss", "timing": "true"},
}

SHORTCUTS = {
    "protocol": "point.protocol", "relaying": "point.relaying",
    "alpha": "point.alpha", "beta": "point.beta",
    "m": "system.m", "snr_db": "system.snr_db", "eta": "system.eta",
    "engine": "montecarlo.engine", "trials": "montecarlo.trials", "seed": "montecarlo.seed",
    "variable": "sweep.variable", "grid": "sweep.grid", "mode": "sweep.mode",
    "df_form": "analytic.df_form", "out": "output.dir", "prefix": "output.prefix",
}


# -- configuration ---------------------------------------------------------

def parse_grid(text: str) -> tuple[float, ...]:
    """Comma list ``0.1,0.2`` or inclusive range ``start:stop:step``."""
    text = text.strip()
    if not text:
        return ()
    if ":" in text:
        try:
            start, stop, step = (float(s) for s in text.split(":"))
        except ValueError:
            raise ConfigError(f"bad range {text!r}; expected start:stop:step") from None
        if step <= 0 or stop < start:
            raise ConfigError(f"bad range {text!r}")
        n = int(round((stop - start) / step)) + 1
        return tuple(round(start + i * step, 12) for i in range(n))
    try:
        return tuple(float(s) for s in text.split(",") if s.strip())
    except ValueError:
        raise ConfigError(f"bad number list {text!r}") from None


def _float(section: str, key: str, raw: dict) -> float:
    try:
        return float(raw[section][key])
    except ValueError:
        raise ConfigError(f"[{section}] {key}: expected a number, got {raw[section][key]!r}") from None


def _int(section: str, key: str, raw: dict) -> int:
    value = _float(section, key, raw)
    if value != int(value):
        raise ConfigError(f"[{section}] {key}: expected an integer, got {raw[section][key]!r}")
    return int(value)


def _bool(section: str, key: str, raw: dict) -> bool:
    text = raw[section][key].strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"[{section}] {key}: expected a boolean, got {text!r}")


@dataclass
class RunConfig:
    """Resolved configuration; ``raw`` is the canonical string form echoed in records."""

    raw: dict[str, dict[str, str]]
    params: SystemParams
    point: ProtocolPoint
    quad: QuadratureSpec
    df_form: str
    engine: Engine
    trials: int
    seed: int | None
    workers: int
    tol_floor: float
    tol_sigma: float
    alphas: tuple[float, ...]
    betas: tuple[float, ...]
    sweep_mode: str
    sweep_variable: SweepVariable
    grid: tuple[float, ...]
    sweep_workers: int
    out_dir: Path
    prefix: str
    timing: bool = True
    extra: dict = field(default_factory=dict)

    def require_seed(self) -> int:
        if self.seed is None:
            raise ConfigError("[montecarlo] seed is required for Monte Carlo runs")
        return self.seed


def _read_file(path: Path) -> dict[str, dict[str, str]]:
    if not path.exists():
        raise ConfigError(f"config file {path} does not exist")
    if path.suffix == ".json":
        try:
            record = json.loads(path.read_text())
            cfg = record["config"] if "config" in record else record
            return {s: {k: str(v) for k, v in kv.items()} for s, kv in cfg.items()}
        except (ValueError, KeyError, AttributeError) as exc:
            raise ConfigError(f"{path}: not a result record ({exc})") from None
    parser = configparser.ConfigParser()
    parser.optionxform = str
    try:
        parser.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return {s: dict(parser[s]) for s in parser.sections()}


def resolve_raw(file_values: dict | None, overrides: Sequence[str] = ()) -> dict[str, dict[str, str]]:
    raw = {s: dict(kv) for s, kv in DEFAULTS.items()}
    for section, kv in (file_values or {}).items():
        if section not in raw:
            raise ConfigError(f"unknown config section [{section}]")
        for key, value in kv.items():
            if key not in raw[section]:
                raise ConfigError(f"unknown key {key!r} in [{section}]")
            raw[section][key] = str(value).strip()
    for item in overrides:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(f"override {item!r} must look like section.key=value")
        dotted, value = item.split("=", 1)
        section, key = dotted.strip().split(".", 1)
        if section not in raw or key not in raw[section]:
            raise ConfigError(f"unknown config key {dotted!r}")
        raw[section][key] = value.strip()
    return raw


def build_config(raw: dict[str, dict[str, str]]) -> RunConfig:
    """Validate the string-level config into typed objects.

    Any invalid value is reported as :class:`ConfigError` naming the field.
    """
    sys_raw = raw["system"]
    try:
        noise = parse_grid(sys_raw["noise_variances"])
        if len(noise) == 1:
            noise = noise * 4
        params = SystemParams(
            noise_variances=noise,
            **{k: _float("system", k, raw) for k in sys_raw if k != "noise_variances"})
    except DomainError as exc:
        raise ConfigError(f"[system] {exc}") from None
    try:
        point = ProtocolPoint(raw["point"]["protocol"], raw["point"]["relaying"],
                              _float("point", "alpha", raw), _float("point", "beta", raw))
    except DomainError as exc:
        raise ConfigError(f"[point] {exc}") from None
    try:
        quad = QuadratureSpec(_float("analytic", "abs_tol", raw), _float("analytic", "rel_tol", raw),
                              _int("analytic", "max_subdivisions", raw),
                              _float("analytic", "tail_cutoff_mass", raw))
    except DomainError as exc:
        raise ConfigError(f"[analytic] {exc}") from None
    df_form = raw["analytic"]["df_form"]
    if df_form not in DF_FORMS:
        raise ConfigError(f"[analytic] df_form must be one of {DF_FORMS}")
    mc = raw["montecarlo"]
    try:
        engine = Engine(mc["engine"])
        variable = SweepVariable(raw["sweep"]["variable"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    trials = _int("montecarlo", "trials", raw)
    if trials < 1:
        raise ConfigError("[montecarlo] trials must be positive")
    seed = _int("montecarlo", "seed", raw) if mc["seed"].strip() else None
    mode = raw["sweep"]["mode"]
    if mode not in ("sweep", "compare"):
        raise ConfigError("[sweep] mode must be 'sweep' or 'compare'")
    cfg = RunConfig(
        raw=raw, params=params, point=point, quad=quad, df_form=df_form, engine=engine,
        trials=trials, seed=seed, workers=_int("montecarlo", "workers", raw),
        tol_floor=_float("montecarlo", "tol_floor", raw),
        tol_sigma=_float("montecarlo", "tol_sigma", raw),
        alphas=parse_grid(mc["alphas"]), betas=parse_grid(mc["betas"]),
        sweep_mode=mode, sweep_variable=variable, grid=parse_grid(raw["sweep"]["grid"]),
        sweep_workers=_int("sweep", "workers", raw),
        out_dir=Path(raw["output"]["dir"]), prefix=raw["output"]["prefix"],
        timing=_bool("output", "timing", raw))
    if engine is not Engine.ANALYTIC:
        cfg.require_seed()
    return cfg


def load_config(path: str | Path | None = None, overrides: Sequence[str] = ()) -> RunConfig:
    file_values = _read_file(Path(path)) if path else None
    return build_config(resolve_raw(file_values, overrides))


# -- output ----------------------------------------------------------------

def _fmt(x) -> str:
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_csv(path: Path, header: list[str], rows: list[list]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    return path


def write_record(cfg: RunConfig, command: str, results, elapsed: float, csv_paths) -> Path:
    record = {
        "command": command,
        "version": __version__,
        "seed": cfg.seed,
        "config": cfg.raw,
        "results": results,
        "outputs": [p.name for p in csv_paths],
    }
    if cfg.timing:
        record["timing"] = {"elapsed_s": round(elapsed, 6)}
    path = cfg.out_dir / f"{cfg.prefix}_{command}.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(record, indent=2, sort_keys=True) + "\n")
    return path


# -- commands --------------------------------------------------------------

def cmd_eval(cfg: RunConfig) -> int:
    t0 = time.perf_counter()
    rows, results = [], {}
    if cfg.engine in (Engine.ANALYTIC, Engine.BOTH):
        pair = analytic.evaluate(cfg.point, cfg.params, quad=cfg.quad, df_form=cfg.df_form)
        rows.append(["analytic", pair.p_primary, pair.p_secondary, 0.0, 0.0])
        results["analytic"] = {"p_primary": pair.p_primary, "p_secondary": pair.p_secondary}
    if cfg.engine in (Engine.MONTECARLO, Engine.BOTH):
        prim, sec = montecarlo.estimate_outage(cfg.point, cfg.params, cfg.trials,
                                               cfg.require_seed(), workers=cfg.workers)
        rows.append(["montecarlo", prim.p_hat, sec.p_hat, prim.std_err, sec.std_err])
        results["montecarlo"] = {"p_primary": prim.p_hat, "p_secondary": sec.p_hat,
                                 "p_primary_err": prim.std_err, "p_secondary_err": sec.std_err,
                                 "trials": cfg.trials}
    path = write_csv(cfg.out_dir / f"{cfg.prefix}_eval.csv", EVAL_HEADER, rows)
    write_record(cfg, "eval", results, time.perf_counter() - t0, [path])
    print(f"{cfg.point.label}  alpha={cfg.point.alpha:g}  beta={cfg.point.beta:g}  "
          f"m={cfg.params.m:g}  snr={cfg.params.snr_db:g} dB")
    for engine, p1, p2, e1, e2 in rows:
        err = f"  (+/- {e1:.2g}, {e2:.2g})" if engine == "montecarlo" else ""
        print(f"  {engine:<10s} primary={p1:.6g}  secondary={p2:.6g}{err}")
    return EXIT_OK


def cmd_sweep(cfg: RunConfig) -> int:
    if not cfg.grid:
        raise ConfigError("[sweep] grid is empty")
    t0 = time.perf_counter()
    if cfg.sweep_mode == "compare":
        if cfg.sweep_variable is not SweepVariable.SNR_DB:
            raise ConfigError("compare mode sweeps snr_db")
        table = compare_protocols(cfg.point.alpha, cfg.point.beta, cfg.params, cfg.grid,
                                  quad=cfg.quad)
        rows = [[r.snr_db, *r.ts, *r.ps] for r in table]
        path = write_csv(cfg.out_dir / f"{cfg.prefix}_compare.csv", COMPARE_HEADER, rows)
        write_record(cfg, "sweep", {"compare": rows}, time.perf_counter() - t0, [path])
        print(f"AF comparison, alpha={cfg.point.alpha:g} beta={cfg.point.beta:g}")
        for r in rows:
            print("  snr={:>5g} dB  TS=({:.4g}, {:.4g})  PS=({:.4g}, {:.4g})".format(*r))
        return EXIT_OK

    try:
        spec = SweepSpec(cfg.sweep_variable, cfg.grid, cfg.point, cfg.params, cfg.engine,
                         trials=cfg.trials, seed=cfg.seed, df_form=cfg.df_form, quad=cfg.quad,
                         workers=cfg.sweep_workers)
    except DomainError as exc:
        raise ConfigError(f"[sweep] {exc}") from None
    rows = run_sweep(spec)
    paths, results = [], {}
    for engine in ("analytic", "montecarlo"):
        sel = [[r.x, r.p_primary, r.p_secondary, r.p_primary_err, r.p_secondary_err, r.engine]
               for r in rows if r.engine == engine]
        if sel:
            paths.append(write_csv(cfg.out_dir / f"{cfg.prefix}_sweep_{engine}.csv",
                                   SWEEP_HEADER, sel))
            results[engine] = sel
    write_record(cfg, "sweep", results, time.perf_counter() - t0, paths)
    print(f"{cfg.point.label} sweep over {cfg.sweep_variable.value} ({len(cfg.grid)} points)")
    for r in rows:
        print(f"  {r.engine:<10s} x={r.x:<8g} primary={r.p_primary:.6g}  "
              f"secondary={r.p_secondary:.6g}")
    return EXIT_OK


@dataclass(frozen=True)
class ValidationCell:
    point: ProtocolPoint
    analytic: OutagePair
    estimates: tuple[montecarlo.OutageEstimate, montecarlo.OutageEstimate]
    tolerances: tuple[float, float]

    @property
    def diffs(self) -> tuple[float, float]:
        return tuple(abs(a - e.p_hat) for a, e in zip(self.analytic, self.estimates))

    @property
    def passed(self) -> bool:
        return all(d <= t for d, t in zip(self.diffs, self.tolerances))


def run_validation(params: SystemParams, trials: int, seed: int, *,
                   alphas: Sequence[float] = (0.3, 0.5, 0.7),
                   betas: Sequence[float] = (0.2, 0.4, 0.6),
                   tol_floor: float = 0.005, tol_sigma: float = 4.0,
                   df_form: str = "factorized", quad: QuadratureSpec | None = None,
                   analytic_fn: Callable[..., OutagePair] | None = None,
                   workers: int = 1) -> list[ValidationCell]:
    """Compare analytic and simulated outage over all combos and an (alpha, beta) grid.

    A cell passes when both users satisfy
    ``|analytic - estimate| <= max(tol_floor, tol_sigma * std_err)``.
    """
    quad = quad or QuadratureSpec()
    analytic_fn = analytic_fn or analytic.evaluate
    cells = []
    for protocol in Protocol:
        for relaying in Relaying:
            for alpha in alphas:
                for beta in betas:
                    point = ProtocolPoint(protocol, relaying, alpha, beta)
                    pair = analytic_fn(point, params, quad=quad, df_form=df_form)
                    est = montecarlo.estimate_outage(point, params, trials, seed, workers=workers)
                    tols = tuple(max(tol_floor, tol_sigma * e.std_err) for e in est)
                    cells.append(ValidationCell(point, pair, est, tols))
    return cells


def _corrupted_evaluator(factor: float):
    # negative control: analytic engine sees a transmit power scaled by `factor`
    def fn(point, params, **kw):
        return analytic.evaluate(point, params.with_(snr_db=params.snr_db + 10 * math.log10(factor)),
                                 **kw)
    return fn


def cmd_validate(cfg: RunConfig, corrupt: float | None = None) -> int:
    seed = cfg.require_seed()
    t0 = time.perf_counter()
    cells = run_validation(cfg.params, cfg.trials, seed, alphas=cfg.alphas, betas=cfg.betas,
                           tol_floor=cfg.tol_floor, tol_sigma=cfg.tol_sigma, df_form=cfg.df_form,
                           quad=cfg.quad, workers=cfg.workers,
                           analytic_fn=_corrupted_evaluator(corrupt) if corrupt else None)
    rows = []
    for c in cells:
        (a1, a2), (e1, e2), (t1, t2) = c.analytic, c.estimates, c.tolerances
        rows.append([c.point.protocol.value, c.point.relaying.value, c.point.alpha, c.point.beta,
                     a1, e1.p_hat, e1.std_err, t1, a2, e2.p_hat, e2.std_err, t2, c.passed])
    path = write_csv(cfg.out_dir / f"{cfg.prefix}_validate.csv", VALIDATE_HEADER, rows)
    n_pass = sum(c.passed for c in cells)
    write_record(cfg, "validate", {"cells": len(cells), "passed": n_pass},
                 time.perf_counter() - t0, [path])
    print(f"analytic vs Monte Carlo, m={cfg.params.m:g}, {cfg.trials} trials, seed {seed}")
    for c in cells:
        (d1, d2), (t1, t2) = c.diffs, c.tolerances
        print(f"  {'PASS' if c.passed else 'FAIL'}  {c.point.label}  alpha={c.point.alpha:g} "
              f"beta={c.point.beta:g}  |d|=({d1:.2e}, {d2:.2e})  tol=({t1:.2e}, {t2:.2e})")
    print(f"{n_pass}/{len(cells)} cells pass")
    return EXIT_OK if n_pass == len(cells) else EXIT_VALIDATION


def cmd_crossing(cfg: RunConfig, tol: float) -> int:
    alpha = find_alpha_crossing(cfg.point.beta, cfg.point, cfg.params, tol,
                                df_form=cfg.df_form, quad=cfg.quad)
    print(f"{cfg.point.label} beta={cfg.point.beta:g}: alpha* = {alpha:.6f}")
    return EXIT_OK


def cmd_optimize(cfg: RunConfig, objective: str) -> int:
    best = optimize_beta(cfg.point, cfg.params, objective, df_form=cfg.df_form, quad=cfg.quad)
    flag = "  (boundary minimum)" if best.at_boundary else ""
    print(f"{cfg.point.label} alpha={cfg.point.alpha:g} objective={objective}: "
          f"beta* = {best.beta:.6f}, outage = {best.value:.6g}{flag}")
    return EXIT_OK


# -- entry point -------------------------------------------------------------

def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-c", "--config", help="INI config file or JSON result record")
    common.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                        help="override one config key (repeatable)")
    for name in SHORTCUTS:
        common.add_argument(f"--{name.replace('_', '-')}", dest=f"short_{name}",
                            help=f"shortcut for --set {SHORTCUTS[name]}=...")

    parser = argparse.ArgumentParser(prog="ehcss", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("eval", parents=[common], help="outage at a single operating point")
    sub.add_parser("sweep", parents=[common], help="sweep one variable and write CSV")
    p_val = sub.add_parser("validate", parents=[common],
                           help="analytic vs Monte Carlo over all combos and an (alpha, beta) grid")
    p_val.add_argument("--corrupt-analytic", type=float, default=None, help=argparse.SUPPRESS)
    p_cross = sub.add_parser("crossing", parents=[common],
                             help="alpha where primary and secondary outage are equal")
    p_cross.add_argument("--tol", type=float, default=1e-4)
    p_opt = sub.add_parser("optimize", parents=[common], help="outage-minimizing beta")
    p_opt.add_argument("--objective", default="max_of_both",
                       choices=("primary", "secondary", "max_of_both"))
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    overrides = list(args.set)
    for name, dotted in SHORTCUTS.items():
        value = getattr(args, f"short_{name}")
        if value is not None:
            overrides.append(f"{dotted}={value}")
    try:
        cfg = load_config(args.config, overrides)
        if args.command == "eval":
            return cmd_eval(cfg)
        if args.command == "sweep":
            return cmd_sweep(cfg)
        if args.command == "validate":
            return cmd_validate(cfg, args.corrupt_analytic)
        if args.command == "crossing":
            return cmd_crossing(cfg, args.tol)
        return cmd_optimize(cfg, args.objective)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (QuadratureError, BracketError, DomainError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
