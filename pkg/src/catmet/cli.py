"""Command-line interface: scans, optima, Husimi fields, and self-validation.

Every configuration key can come from a flat key=value config file
(--config) or a flag; flags win.  Exit codes: 0 success, 2 configuration
error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

from . import sweep
from .channels import NumericalFailureError, loss_channel
from .fisher import DegenerateStateError
from .hilbert import build_basis
from .measure import DegenerateWorkingPointError, NoWorkingPointError
from .states import CatParams, cat, default_husimi_grid, husimi_q, write_husimi_csv

_OBS_ALIASES = {"parity": "parity_b", "parity_b": "parity_b", "jz": "jz"}


def _parse_floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(tok) for tok in text.split(",") if tok.strip())
    except ValueError as exc:
        raise ValueError(f"expected comma-separated numbers, got {text!r}") from exc


def _parse_obs(text: str) -> tuple[str, ...]:
    kinds = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        if tok not in _OBS_ALIASES:
            raise ValueError(f"unknown observable {tok!r}; expected parity and/or jz")
        kinds.append(_OBS_ALIASES[tok])
    if not kinds:
        raise ValueError("observable list is empty")
    return tuple(kinds)


def _load_config_file(path: str) -> dict[str, str]:
    """Flat key = value lines; '#' starts a comment."""
    values: dict[str, str] = {}
    try:
        text = open(path, encoding="utf-8").read()
    except OSError as exc:
        raise ValueError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        values[key.strip().replace("-", "_")] = value.strip()
    return values


_CONVERTERS = {
    "n": int,
    "delta": float,
    "gamma": float,
    "eta": _parse_floats,
    "theta_min": float,
    "theta_max": float,
    "theta_step": float,
    "t_max": float,
    "t_step": float,
    "nm": int,
    "obs": _parse_obs,
    "threads": int,
    "out": str,
}


def _build_config(args: argparse.Namespace) -> sweep.SweepConfig:
    file_values: dict[str, object] = {}
    if args.config:
        for key, raw in _load_config_file(args.config).items():
            if key not in _CONVERTERS:
                raise ValueError(f"unknown config key {key!r}")
            file_values[key] = _CONVERTERS[key](raw)

    def pick(name: str, default):
        flag = getattr(args, name, None)
        if flag is not None:
            return flag
        if name in file_values:
            return file_values[name]
        return default

    config = sweep.SweepConfig(
        n=pick("n", 40),
        delta=pick("delta", 1.0),
        gamma=pick("gamma", 0.05),
        etas=tuple(pick("eta", sweep.DEFAULT_ETAS)),
        two_theta_min=pick("theta_min", 0.0),
        two_theta_max=pick("theta_max", 1.0),
        two_theta_step=pick("theta_step", 0.01),
        time_max=pick("t_max", 3.0),
        time_step=pick("t_step", 0.05),
        observables=tuple(pick("obs", ("parity_b", "jz"))),
        n_m=pick("nm", 1),
        threads=pick("threads", os.cpu_count() or 1),
        out=pick("out", None),
    )
    config.validate()
    return config


def _write_scan(config: sweep.SweepConfig, records, command: str,
                default_out: str, columns) -> None:
    out = config.out or default_out
    sweep.write_records_csv(out, records, config.n, columns)
    side = sweep.write_config_sidecar(out, config, command)
    failed = sum(1 for r in records if r.error)
    print(f"{command}: wrote {len(records)} rows to {out} (config: {side})")
    if failed:
        print(f"warning: {failed} grid points are error-marked")


def _cmd_theta_scan(config: sweep.SweepConfig) -> int:
    records = sweep.theta_scan(config)
    _write_scan(config, records, "theta-scan", "theta_scan.csv", sweep.SCAN_COLUMNS)
    for eta in config.etas:
        rows = [r for r in records if r.eta == eta and not r.error]
        if rows:
            best = min(rows, key=lambda r: r.delta_phi_qcrb)
            print(f"  eta={eta:g}: min delta_phi_qcrb={best.delta_phi_qcrb:.6g} "
                  f"at 2theta={2 * best.theta / math.pi:.4g}pi")
    return 0


def _cmd_time_scan(config: sweep.SweepConfig) -> int:
    records = sweep.time_scan(config)
    _write_scan(config, records, "time-scan", "time_scan.csv", sweep.TIME_COLUMNS)
    return 0


def _cmd_compare(config: sweep.SweepConfig) -> int:
    records = sweep.measurement_compare(config)
    _write_scan(config, records, "compare", "measurement_compare.csv", sweep.SCAN_COLUMNS)
    return 0


def _cmd_optimal_theta(config: sweep.SweepConfig) -> int:
    optima = sweep.optimal_theta(config)
    for opt in optima:
        print(f"eta={opt.eta:g}  2theta_opt = {2 * opt.theta_opt / math.pi:.4f}pi  "
              f"delta_phi = {opt.delta_phi_opt:.6g}")
    if config.out:
        sweep.write_optima_csv(config.out, optima, config.n)
        side = sweep.write_config_sidecar(config.out, config, "optimal-theta")
        print(f"optimal-theta: wrote {len(optima)} rows to {config.out} (config: {side})")
    return 0


def _cmd_husimi(config: sweep.SweepConfig) -> int:
    theta = config.two_theta_min * math.pi / 2.0
    eta = config.etas[0]
    state = cat(CatParams(theta, config.n))
    theta_s, varphi_s = default_husimi_grid()
    if eta < 1.0:
        rho = loss_channel(state.to_density(build_basis(config.n)), eta, eta)
        q = husimi_q(rho, theta_s, varphi_s)
    else:
        q = husimi_q(state, theta_s, varphi_s)
    out = config.out or "husimi.csv"
    write_husimi_csv(out, theta_s, varphi_s, q)
    side = sweep.write_config_sidecar(out, config, "husimi")
    print(f"husimi: cat state 2theta={config.two_theta_min:g}pi eta={eta:g}; "
          f"wrote {q.size} rows to {out} (config: {side})")
    return 0


def _cmd_validate(config: sweep.SweepConfig) -> int:
    results = sweep.oracle_suites()
    for res in results:
        status = "PASS" if res.passed else "FAIL"
        print(f"{status}  {res.name}: worst deviation {res.worst:.3g} (tolerance {res.tol:g})")
    return 0 if all(r.passed for r in results) else 3


_COMMANDS = {
    "theta-scan": _cmd_theta_scan,
    "time-scan": _cmd_time_scan,
    "compare": _cmd_compare,
    "optimal-theta": _cmd_optimal_theta,
    "husimi": _cmd_husimi,
    "validate": _cmd_validate,
}


def _make_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, help="initial total particle number (default 40)")
    common.add_argument("--delta", type=float, help="mode energy difference (default 1)")
    common.add_argument("--gamma", type=float, help="one-body damping rate (default 0.05)")
    common.add_argument("--eta", type=_parse_floats, metavar="E1,E2,...",
                        help="survival probabilities e^(-gamma T)")
    common.add_argument("--theta-min", type=float, dest="theta_min",
                        help="grid start, 2*theta in units of pi (default 0)")
    common.add_argument("--theta-max", type=float, dest="theta_max",
                        help="grid end, 2*theta in units of pi (default 1)")
    common.add_argument("--theta-step", type=float, dest="theta_step",
                        help="grid step, 2*theta in units of pi (default 0.01)")
    common.add_argument("--t-max", type=float, dest="t_max",
                        help="time-scan horizon (default 3)")
    common.add_argument("--t-step", type=float, dest="t_step",
                        help="time-scan step (default 0.05)")
    common.add_argument("--nm", type=int, help="measurement repetitions (default 1)")
    common.add_argument("--obs", type=_parse_obs, metavar="parity,jz",
                        help="observables for compare (default parity,jz)")
    common.add_argument("--out", help="output CSV path")
    common.add_argument("--threads", type=int, help="worker processes (default: all cores)")
    common.add_argument("--config", help="flat key=value config file; flags win")

    parser = argparse.ArgumentParser(
        prog="catmet",
        description="Phase-estimation precision of spin cat states under one-body loss")
    subs = parser.add_subparsers(dest="command", required=True)
    subs.add_parser("theta-scan", parents=[common],
                    help="QCRB precision versus input angle per eta")
    subs.add_parser("time-scan", parents=[common],
                    help="QCRB precision versus accumulation time")
    subs.add_parser("compare", parents=[common],
                    help="QCRB versus parity and Jz measurement precision")
    subs.add_parser("optimal-theta", parents=[common],
                    help="QCRB-optimal input angle per eta")
    subs.add_parser("husimi", parents=[common],
                    help="Husimi field of the cat state at --theta-min")
    subs.add_parser("validate", parents=[common],
                    help="run channel-vs-integrator and pure-QFI oracle suites")
    return parser


def main(argv=None) -> int:
    parser = _make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits itself on bad flags / --help
        return int(exc.code or 0)
    try:
        config = _build_config(args)
        return _COMMANDS[args.command](config)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NumericalFailureError, DegenerateStateError,
            DegenerateWorkingPointError, NoWorkingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
