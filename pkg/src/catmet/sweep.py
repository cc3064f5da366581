"""Parameter sweeps over input angle, loss, and time, with CSV/JSON output.

Every scan is total: each requested grid point yields exactly one record,
error-marked if its evaluation failed.  Output files are deterministic for a
given configuration (fixed grids, fixed column order, 12 significant digits,
no wall-clock content).
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .channels import LossModel, lindblad_evolve, loss_channel, phase_rotation, trace_distance
from .fisher import QfiResult, pure_qfi, qfi, rho_derivative
from .hilbert import build_basis
from .measure import Observable, best_working_point, golden_section_minimize
from .states import CatParams, cat

SCAN_KINDS = ("theta_scan", "time_scan", "measurement_compare", "husimi")

DEFAULT_ETAS = (1.0, 0.975, 0.95, 0.925, 0.9, 0.8)
# theta values used by the time scan, as 2*theta in units of pi
DEFAULT_TIME_TWO_THETAS = (0.0, 0.5, 0.625, 1.0)


@dataclass
class SweepConfig:
    n: int = 40
    delta: float = 1.0
    gamma: float = 0.05
    etas: tuple[float, ...] = DEFAULT_ETAS
    two_theta_min: float = 0.0   # units of pi
    two_theta_max: float = 1.0
    two_theta_step: float = 0.01
    time_max: float = 3.0
    time_step: float = 0.05
    time_two_thetas: tuple[float, ...] = DEFAULT_TIME_TWO_THETAS
    observables: tuple[str, ...] = ("parity_b", "jz")
    n_m: int = 1
    threads: int = 1
    out: str | None = None

    def validate(self) -> None:
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.n_m < 1:
            raise ValueError("n_m must be >= 1")
        if not self.etas:
            raise ValueError("eta list must be non-empty")
        for eta in self.etas:
            if not 0.0 < eta <= 1.0:
                raise ValueError(f"eta must lie in (0, 1], got {eta}")
        if self.two_theta_step <= 0 or self.time_step <= 0:
            raise ValueError("grid steps must be > 0")
        if self.two_theta_max < self.two_theta_min:
            raise ValueError("two_theta_max must be >= two_theta_min")
        if not (0.0 <= self.two_theta_min and self.two_theta_max <= 1.0):
            raise ValueError("two_theta grid must lie inside [0, 1] (units of pi)")
        if self.gamma < 0 or self.delta < 0 or self.time_max < 0:
            raise ValueError("gamma, delta and time_max must be >= 0")
        for kind in self.observables:
            if kind not in ("parity_b", "jz"):
                raise ValueError(f"unknown observable {kind!r}")

    def theta_grid(self) -> list[float]:
        """Polar angles (radians) from the 2*theta grid in units of pi."""
        span = self.two_theta_max - self.two_theta_min
        count = int(math.floor(span / self.two_theta_step + 1e-9)) + 1
        return [(self.two_theta_min + i * self.two_theta_step) * math.pi / 2.0
                for i in range(count)]

    def time_grid(self) -> list[float]:
        count = int(math.floor(self.time_max / self.time_step + 1e-9)) + 1
        return [i * self.time_step for i in range(count)]


@dataclass
class PrecisionRecord:
    theta: float
    eta: float
    t: float | None = None
    delta_phi_qcrb: float | None = None
    f_q: float | None = None
    delta_phi_parity: float | None = None
    phi_star_parity: float | None = None
    delta_phi_jz: float | None = None
    phi_star_jz: float | None = None
    error: str = ""


@dataclass(frozen=True)
class OptimalTheta:
    eta: float
    theta_opt: float
    delta_phi_opt: float


def _qcrb(n: int, theta: float, eta: float, n_m: int) -> QfiResult:
    state = cat(CatParams(theta, n))
    rho_l = loss_channel(state.to_density(build_basis(n)), eta, eta)
    return qfi(rho_l, rho_derivative(rho_l), n_m)


def _evaluate_point(args) -> PrecisionRecord:
    n, theta, eta, n_m, obs_kinds, t = args
    rec = PrecisionRecord(theta=theta, eta=eta, t=t)
    try:
        res = _qcrb(n, theta, eta, n_m)
        rec.f_q = res.f_q
        rec.delta_phi_qcrb = res.delta_phi_min
        if obs_kinds:
            state = cat(CatParams(theta, n))
            model = LossModel.from_eta(eta)
            for kind in obs_kinds:
                wp = best_working_point(state, model, Observable(kind, n_m))
                if kind == "parity_b":
                    rec.delta_phi_parity, rec.phi_star_parity = wp.delta_phi, wp.phi_star
                else:
                    rec.delta_phi_jz, rec.phi_star_jz = wp.delta_phi, wp.phi_star
    except Exception as exc:  # record and continue: scans are total
        rec.error = f"{type(exc).__name__}: {exc}"
    return rec


def _map_points(args_list, threads: int) -> list[PrecisionRecord]:
    if threads is None or threads < 1:
        threads = os.cpu_count() or 1
    if threads == 1 or len(args_list) <= 1:
        return [_evaluate_point(a) for a in args_list]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        chunk = max(1, len(args_list) // (threads * 4))
        return list(pool.map(_evaluate_point, args_list, chunksize=chunk))


def theta_scan(config: SweepConfig, observables: tuple[str, ...] = ()) -> list[PrecisionRecord]:
    """Precision versus input angle for each survival eta (QCRB by default)."""
    config.validate()
    args = [(config.n, theta, eta, config.n_m, tuple(observables), None)
            for eta in config.etas for theta in config.theta_grid()]
    records = _map_points(args, config.threads)
    records.sort(key=lambda r: (r.eta, r.theta))
    return records


def measurement_compare(config: SweepConfig) -> list[PrecisionRecord]:
    """QCRB plus the best parity / Jz working points on the same grid."""
    return theta_scan(config, observables=tuple(config.observables))


def time_scan(config: SweepConfig) -> list[PrecisionRecord]:
    """QCRB versus accumulation time at fixed damping rate."""
    config.validate()
    args = []
    for tt in config.time_two_thetas:
        theta = tt * math.pi / 2.0
        for t in config.time_grid():
            eta = math.exp(-config.gamma * t)
            args.append((config.n, theta, eta, config.n_m, (), t))
    records = _map_points(args, config.threads)
    records.sort(key=lambda r: (r.theta, r.t))
    return records


def optimal_theta(config: SweepConfig,
                  records: list[PrecisionRecord] | None = None) -> list[OptimalTheta]:
    """Per eta, the input angle minimizing the QCRB, refined off-grid.

    Golden-section refinement around the best grid point narrows the angle
    until the 2*theta bracket is below 1e-4 pi.
    """
    config.validate()
    if records is None:
        records = theta_scan(config)
    out = []
    for eta in config.etas:
        rows = [r for r in records if r.eta == eta and not r.error]
        if not rows:
            raise ValueError(f"no valid scan points for eta={eta}")
        best = min(rows, key=lambda r: r.delta_phi_qcrb)
        step = config.two_theta_step * math.pi / 2.0
        lo = max(0.0, best.theta - step)
        hi = min(math.pi / 2.0, best.theta + step)
        x, fx = golden_section_minimize(
            lambda th: _qcrb(config.n, th, eta, config.n_m).delta_phi_min,
            lo, hi, tol=1e-4 * math.pi / 2.0,
            seed=(best.theta, best.delta_phi_qcrb))
        out.append(OptimalTheta(eta, x, fx))
    return out


# --- oracle suites ---------------------------------------------------------

@dataclass(frozen=True)
class SuiteResult:
    name: str
    passed: bool
    worst: float
    tol: float


def channel_integrator_suite(ns: tuple[int, ...] = (4, 8, 12),
                             gamma_ts: tuple[float, ...] = (0.05, 0.1, 0.2),
                             delta_ts: tuple[float, ...] = (0.3, 1.0),
                             tol: float = 1e-6) -> list[SuiteResult]:
    """Trace distance between the Kraus channel and RK4 integration."""
    results = []
    for n in ns:
        basis = build_basis(n)
        rho0 = cat(CatParams(0.3 * math.pi, n, varphi=0.4)).to_density(basis)
        worst = 0.0
        for gamma_t in gamma_ts:
            for delta_t in delta_ts:
                model = LossModel.symmetric(gamma_t, time=1.0, delta=delta_t)
                via_channel = phase_rotation(
                    loss_channel(rho0, model.eta_a, model.eta_b), model.phi)
                via_rk4 = lindblad_evolve(rho0, model)
                worst = max(worst, trace_distance(via_channel, via_rk4))
        results.append(SuiteResult(f"channel-vs-rk4 n={n}", worst < tol, worst, tol))
    return results


def pure_qfi_suite(n: int = 40, count: int = 20, seed: int = 20240,
                   tol: float = 1e-8) -> list[SuiteResult]:
    """Spectral QFI on rank-1 states against the 4 Var(Jz) closed form."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(count):
        params = CatParams(float(rng.uniform(0.0, math.pi / 2.0)), n,
                           varphi=float(rng.uniform(0.0, 2.0 * math.pi)))
        state = cat(params)
        rho = state.to_density()
        res = qfi(rho, rho_derivative(rho))
        worst = max(worst, abs(res.f_q - pure_qfi(state)))
    return [SuiteResult(f"pure-qfi-oracle n={n}", worst < tol, worst, tol)]


def oracle_suites() -> list[SuiteResult]:
    return channel_integrator_suite() + pure_qfi_suite()


# --- serialization ---------------------------------------------------------

SCAN_COLUMNS = ("theta", "eta", "delta_phi_qcrb", "f_q",
                "delta_phi_parity", "phi_star_parity",
                "delta_phi_jz", "phi_star_jz", "sql", "hl", "error")
TIME_COLUMNS = ("theta", "t", "eta", "delta_phi_qcrb", "f_q", "sql", "hl", "error")
OPTIMUM_COLUMNS = ("eta", "theta_opt", "two_theta_opt_pi", "delta_phi_opt", "sql", "hl")


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    return f"{value:.12g}"


def write_records_csv(path, records: list[PrecisionRecord], n: int,
                      columns: tuple[str, ...] = SCAN_COLUMNS) -> None:
    sql = 1.0 / math.sqrt(n)
    hl = 1.0 / n
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for rec in records:
            row = {**dataclasses.asdict(rec), "sql": sql, "hl": hl}
            writer.writerow([_fmt(row[c]) for c in columns])


def write_optima_csv(path, optima: list[OptimalTheta], n: int) -> None:
    sql = 1.0 / math.sqrt(n)
    hl = 1.0 / n
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(OPTIMUM_COLUMNS)
        for opt in optima:
            writer.writerow([_fmt(opt.eta), _fmt(opt.theta_opt),
                             _fmt(2.0 * opt.theta_opt / math.pi),
                             _fmt(opt.delta_phi_opt), _fmt(sql), _fmt(hl)])


def sidecar_path(out_path) -> Path:
    out = Path(out_path)
    side = out.with_suffix(".json")
    if side == out:
        side = out.with_name(out.name + ".config.json")
    return side


def write_config_sidecar(out_path, config: SweepConfig, command: str) -> Path:
    """JSON sidecar carrying the full configuration for provenance."""
    side = sidecar_path(out_path)
    payload = {"command": command, "config": dataclasses.asdict(config)}
    side.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return side
