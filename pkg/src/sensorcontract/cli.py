"""Batch command-line front end.

Commands::

    sensorcontract solve    CONFIG --omega W [--strict]
    sensorcontract sweep    CONFIG --grid-n N --out sweep.csv
    sensorcontract verify   CONFIG --omega W [--tol T] [--override p2=0.8]
    sensorcontract simulate CONFIG --omega W --episodes N --seed S [--out traj.csv]

Every written output gets a ``<out>.manifest.json`` sidecar recording how it
was produced. Exit codes: 0 ok, 1 certification failure, 2 usage or config
error, 3 regime violation under ``--strict``, 4 IO error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from dataclasses import asdict
from importlib import metadata

import yaml

from . import design, gametree, kernels, montecarlo
from .equilibrium import operator_eu, sensor_eu
from .model import BenefitSpec, ConfigError, GameConfig, validate_config

EXIT_OK, EXIT_CERT, EXIT_USAGE, EXIT_REGIME, EXIT_IO = 0, 1, 2, 3, 4
CONFIG_KEYS = ("b", "x_bar", "C", "delta", "benefit.family", "benefit.a", "benefit.shape")
PROFILE_KEYS = ("p1", "p2", "q1", "q2", "x1", "x2")
SIG = 12


class UsageError(Exception):
    pass


def version() -> str:
    try:
        return metadata.version("sensorcontract")
    except metadata.PackageNotFoundError:
        return "0+unknown"


def _num(v):
    """Round floats to 12 significant digits for serialization."""
    if isinstance(v, bool) or v is None:
        return v
    if isinstance(v, float):
        if not math.isfinite(v):
            return str(v)
        return float(f"{v:.{SIG}g}")
    if isinstance(v, int):
        return v
    if isinstance(v, dict):
        return {k: _num(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_num(x) for x in v]
    try:
        return _num(float(v))
    except (TypeError, ValueError):
        return v


def _cell(v):
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return f"{v:.{SIG}g}"
    return str(v)


def _flatten(data, prefix=""):
    out = {}
    for k, v in data.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        else:
            out[key] = v
    return out


def parse_assignments(items, allowed, flag):
    out = {}
    for item in items or ():
        key, sep, raw = item.partition("=")
        key = key.strip()
        if not sep or key not in allowed:
            raise UsageError(f"{flag} expects key=value with key in {', '.join(allowed)}; got {item!r}")
        out[key] = yaml.safe_load(raw)
    return out


def load_config(path, overrides=None) -> GameConfig:
    """Read a YAML config (flat dotted keys or a nested ``benefit`` table) and apply overrides."""
    try:
        with open(path) as fh:
            raw = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"config {path} must be a key-value mapping")
    flat = _flatten(raw)
    flat.update(overrides or {})
    unknown = sorted(set(flat) - set(CONFIG_KEYS))
    missing = [k for k in CONFIG_KEYS if k not in flat]
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    if missing:
        raise ConfigError(f"missing config keys: {', '.join(missing)}")
    try:
        spec = BenefitSpec(str(flat["benefit.family"]), float(flat["benefit.a"]), float(flat["benefit.shape"]))
        return GameConfig(float(flat["b"]), float(flat["x_bar"]), float(flat["C"]), float(flat["delta"]), spec)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _check_omega(omega):
    if omega is None:
        raise UsageError("--omega is required")
    if not 0 < omega <= 1:
        raise UsageError(f"--omega must lie in (0, 1], got {omega}")


def _regime(cfg, strict):
    report = validate_config(cfg)
    if not report.regime_ok:
        cost = cfg.b * cfg.x_bar
        bound = math.sqrt(cfg.C * cfg.benefit.value(cfg.x_bar))
        msg = f"regime violated: b*x_bar = {cost:.{SIG}g} <= sqrt(C*S(x_bar)) = {bound:.{SIG}g}"
        print(msg, file=sys.stderr)
        if strict:
            return msg
    return None


def _dump(data, fh):
    json.dump(_num(data), fh, indent=2, sort_keys=False)
    fh.write("\n")


def _contract_report(opt: design.OptimalContract) -> dict:
    row = opt.row()
    row["efforts"] = [opt.x1, opt.x2]
    row["case"] = opt.case.label if opt.case else None
    return row


def cmd_solve(args, cfg):
    _check_omega(args.omega)
    opt = design.optimal_contract_given_omega(cfg, args.omega)
    report = _contract_report(opt)
    report["value"] = opt.operator_value
    report["q"] = opt.profile.q1
    report["omega_objective"] = design.omega_objective(cfg, args.omega)
    return report, []


def cmd_sweep(args, cfg):
    sweep = design.optimal_omega(cfg, args.grid_n)
    header = ("omega", "h", "gamma", "x1", "x2", "p1", "p2", "q1", "q2",
              "operator_value", "sensor_value", "regime_ok", "ir_ok")
    outputs = []
    if args.out:
        with open(args.out, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for r in sweep.rows:
                row = r.optimum.row()
                w.writerow([_cell(row[k]) for k in header])
        outputs.append(args.out)
    print(f"argmax omega = {sweep.omega_star:.{SIG}g}", file=sys.stderr)
    return {"omega_star": sweep.omega_star, "increasing": sweep.increasing, "regime_ok": sweep.regime_ok,
            "rows": len(sweep.rows), "max_objective": sweep.rows[-1].objective if sweep.rows else None}, outputs


def cmd_verify(args, cfg):
    _check_omega(args.omega)
    opt = design.optimal_contract_given_omega(cfg, args.omega)
    override = parse_assignments(args.override, PROFILE_KEYS, "--override")
    profile = opt.profile
    for k, v in override.items():
        setattr(profile, k, float(v))
    report = gametree.check_equilibrium(cfg, opt.contract, profile, tol=args.tol)
    gaps = gametree.indifference_gaps(cfg, opt.contract, profile)
    out = {"omega": args.omega, "h": opt.contract.h, "gamma": opt.contract.gamma,
           "profile": {k: getattr(profile, k) for k in PROFILE_KEYS}, "overrides": override,
           **report.to_dict(), "indifference_gaps": asdict(gaps)}
    if not report.certified:
        worst = report.worst
        print(f"certification failed: {worst.player} stage {worst.stage} deviation {worst.plan} "
              f"gains {worst.gain:.{SIG}g} > tol {args.tol:g}", file=sys.stderr)
        for d in report.deviations:
            if d.gain > args.tol:
                print(f"  {d.player} stage {d.stage}: {d.plan} (+{d.gain:.{SIG}g})", file=sys.stderr)
    return out, [], (EXIT_OK if report.certified else EXIT_CERT)


def cmd_simulate(args, cfg):
    _check_omega(args.omega)
    if args.episodes is None or args.episodes < 1:
        raise UsageError("--episodes must be at least 1")
    opt = design.optimal_contract_given_omega(cfg, args.omega)
    strat = gametree.BehavioralStrategy.from_profile(opt.profile)
    spec = montecarlo.SimulationSpec(cfg, opt.contract, strat, args.episodes, args.seed)
    res = montecarlo.simulate(spec)
    exact = {"sensor": sensor_eu(cfg, opt.contract, opt.x1, opt.x2),
             "operator": operator_eu(cfg, opt.contract, opt.x1, opt.x2)}
    out = {"omega": args.omega, "episodes": res.episodes, "seed": args.seed, "backend": kernels.BACKEND,
           "frequencies": res.frequencies}
    for who in ("sensor", "operator"):
        mean, se = getattr(res, f"{who}_mean"), getattr(res, f"{who}_se")
        diff = abs(mean - exact[who])
        ok = diff <= 3 * se
        out[who] = {"mean": mean, "se": se, "exact": exact[who], "abs_diff": diff,
                    "within_3se": "PASS" if ok else "FAIL"}
        print(f"{who:8s} mean={mean:.{SIG}g} se={se:.4g} exact={exact[who]:.{SIG}g} "
              f"|diff|={diff:.3g} {'PASS' if ok else 'FAIL'}", file=sys.stderr)
    outputs = []
    if args.out:
        n = args.episodes if args.log_episodes is None else min(args.log_episodes, args.episodes)
        montecarlo.write_trajectory_csv(montecarlo.trajectory_log(spec, n), args.out)
        outputs.append(args.out)
    return out, outputs


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sensorcontract",
                                     description="Reputation contracts with stochastic verification.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {version()}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("config", help="YAML config with b, x_bar, C, delta, benefit.family, benefit.a, benefit.shape")
        p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config value")
        p.add_argument("--strict", action="store_true", help="exit 3 if the config is out of regime")
        p.add_argument("--json", metavar="PATH", help="write the JSON report here instead of stdout")
        return p

    p = common(sub.add_parser("solve", help="optimal contract for a given omega"))
    p.add_argument("--omega", type=float, required=True)

    p = common(sub.add_parser("sweep", help="operator value over an omega grid"))
    p.add_argument("--grid-n", type=int, default=101)
    p.add_argument("--out", help="sweep CSV path")

    p = common(sub.add_parser("verify", help="certify the equilibrium with the game-tree oracle"))
    p.add_argument("--omega", type=float, required=True)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--override", action="append", metavar="KEY=VALUE",
                   help=f"replace a profile value ({', '.join(PROFILE_KEYS)})")

    p = common(sub.add_parser("simulate", help="Monte Carlo play at the optimal contract"))
    p.add_argument("--omega", type=float, required=True)
    p.add_argument("--episodes", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="trajectory CSV path")
    p.add_argument("--log-episodes", type=int, help="log only the first N episodes to --out")
    return parser


COMMANDS = {"solve": cmd_solve, "sweep": cmd_sweep, "verify": cmd_verify, "simulate": cmd_simulate}


def _write_manifest(path, args, argv, overrides, outputs, wall):
    manifest = {
        "command": args.command,
        "argv": list(argv),
        "config_path": args.config,
        "overrides": overrides,
        "outputs": outputs,
        "seed": getattr(args, "seed", None),
        "version": version(),
        "backend": kernels.BACKEND,
        "wall_clock_s": wall,
    }
    with open(path + ".manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    start = time.perf_counter()
    try:
        overrides = parse_assignments(args.set, CONFIG_KEYS, "--set")
        cfg = load_config(args.config, overrides)
        bad = _regime(cfg, args.strict)
        if bad:
            return EXIT_REGIME
        result = COMMANDS[args.command](args, cfg)
    except (UsageError, ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    report, outputs, *rest = result
    code = rest[0] if rest else EXIT_OK
    try:
        if args.json:
            with open(args.json, "w") as fh:
                _dump(report, fh)
            outputs = outputs + [args.json]
        else:
            _dump(report, sys.stdout)
        wall = time.perf_counter() - start
        for path in outputs:
            _write_manifest(path, args, argv, overrides, outputs, wall)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return code


if __name__ == "__main__":
    sys.exit(main())
