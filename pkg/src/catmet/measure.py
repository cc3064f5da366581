"""Readout simulation: parity and half-population-difference precision.

The measured signal is <O> on the state after loss, phase rotation, and the
pi/2 pulse; the error-propagation uncertainty for N_m repetitions is

    delta_phi(phi) = sqrt(Var O) / (sqrt(N_m) |d<O>/dphi|).

phase_uncertainty() runs that pipeline literally at one working point, with
the slope taken from the commutator identity
d<O>/dphi = Tr[O U' (-i[Jz, rho_out]) U].  The working-point search uses an
algebraically identical closed form: because the rotation is diagonal with
integer frequency spacing, <O>(phi) and <O^2>(phi) are trigonometric
polynomials of degree n_max whose coefficients are extracted once per state,
making the scan over phi essentially free.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .channels import loss_channel, phase_rotation, pi2_pulse, pi2_unitaries, LossModel
from .fisher import rho_derivative
from .hilbert import DensityMatrix, SectorBasis, build_basis
from .states import PureState

OBSERVABLE_KINDS = ("parity_b", "jz")

SLOPE_TOL = 1e-12
# Var O = <O^2> - <O>^2 cancels catastrophically where the observable is
# nearly deterministic.  Those points cluster around slope zeros, where
# delta_phi has a removable 0/0 singularity whose limit is also attained at
# nearby healthy points, so the working-point search marks them undefined
# rather than let the minimizer harvest downward cancellation noise.  The
# floor keeps the admitted variances accurate to ~1e-9 relative.
VAR_REL_FLOOR = 1e-7


class DegenerateWorkingPointError(RuntimeError):
    """The observable has no phase sensitivity at the requested phi."""


class NoWorkingPointError(RuntimeError):
    """Every scanned phi was degenerate."""


@dataclass(frozen=True)
class Observable:
    """Readout observable: parity of mode b, or Jz; n_m repetitions."""

    kind: str
    n_m: int = 1

    def __post_init__(self):
        if self.kind not in OBSERVABLE_KINDS:
            raise ValueError(f"kind must be one of {OBSERVABLE_KINDS}, got {self.kind!r}")
        if self.n_m < 1:
            raise ValueError("n_m must be >= 1")


@lru_cache(maxsize=None)
def _observable_diag(kind: str, n: int) -> np.ndarray:
    k = np.arange(n + 1)
    if kind == "parity_b":
        d = (-1.0) ** (n - k)
    else:
        d = (n - 2 * k) / 2.0
    d.setflags(write=False)
    return d


def _diag_trace(blocks: list[np.ndarray], kind: str, power: int = 1) -> float:
    total = 0.0
    for n, b in enumerate(blocks):
        d = _observable_diag(kind, n) ** power
        total += float((d * np.diagonal(b).real).sum())
    return total


def expectation(rho_f: DensityMatrix, obs: Observable) -> tuple[float, float]:
    """First and second moments of the observable; for parity, O^2 = 1."""
    mean = _diag_trace(rho_f.blocks, obs.kind, 1)
    second = _diag_trace(rho_f.blocks, obs.kind, 2)
    return mean, second


@dataclass(frozen=True)
class WorkingPoint:
    phi_star: float
    delta_phi: float
    mean_o: float
    var_o: float
    slope: float


def phase_uncertainty(state: PureState, model: LossModel, obs: Observable,
                      phi: float) -> float:
    """Error-propagation uncertainty of the full pipeline at one phi."""
    basis = build_basis(state.sector)
    rho_l = loss_channel(state.to_density(basis), model.eta_a, model.eta_b)
    rho_out = phase_rotation(rho_l, phi)
    rho_f = pi2_pulse(rho_out)
    mean, second = expectation(rho_f, obs)
    slope = _diag_trace(pi2_pulse(rho_derivative(rho_out)).blocks, obs.kind)
    if abs(slope) < SLOPE_TOL:
        raise DegenerateWorkingPointError(f"d<O>/dphi = {slope} at phi = {phi}")
    var = max(second - mean * mean, 0.0)
    return math.sqrt(var) / (math.sqrt(obs.n_m) * abs(slope))


class PhaseResponse:
    """Closed-form phi dependence of the pulsed observable's moments.

    With rho_out(phi)[i, j] = rho[i, j] e^{-i phi (j - i)} inside each sector
    and M = U O U', the moments are <O>(phi) = sum_q c_q e^{-i q phi} where
    c_q collects the offset-q diagonals of (M^T * rho); evaluation at any phi
    is then O(n_max) work.
    """

    def __init__(self, basis: SectorBasis, rho_loss: DensityMatrix, obs: Observable):
        n_max = basis.n_max
        self.n_m = obs.n_m
        self.freqs = np.arange(-n_max, n_max + 1)
        self._c1 = np.zeros(2 * n_max + 1, dtype=complex)
        self._c2 = np.zeros(2 * n_max + 1, dtype=complex)
        us = pi2_unitaries(n_max)
        for n in basis.sectors:
            block = rho_loss.blocks[n]
            if not block.any():
                continue
            d = _observable_diag(obs.kind, n)
            u = us[n]
            m1 = (u * d) @ u.conj().T
            m2 = (u * d**2) @ u.conj().T
            g1 = m1.T * block
            g2 = m2.T * block
            for q in range(-n, n + 1):
                self._c1[q + n_max] += np.trace(g1, offset=q)
                self._c2[q + n_max] += np.trace(g2, offset=q)

    def moments(self, phi) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(mean, second moment, d mean / d phi) at scalar or array phi."""
        e = np.exp(-1j * np.multiply.outer(np.asarray(phi, dtype=float), self.freqs))
        mean = (e @ self._c1).real
        second = (e @ self._c2).real
        slope = (e @ (-1j * self.freqs * self._c1)).real
        return mean, second, slope

    def delta_phi(self, phi) -> np.ndarray:
        mean, second, slope = self.moments(phi)
        var = second - mean * mean
        noise = VAR_REL_FLOOR * np.maximum(1.0, np.maximum(second, mean * mean))
        ok = (np.abs(slope) > SLOPE_TOL) & (var > noise)
        safe_slope = np.where(ok, slope, 1.0)
        out = np.sqrt(np.clip(var, 0.0, None)) / (math.sqrt(self.n_m) * np.abs(safe_slope))
        return np.where(ok, out, np.inf)


def phase_response(state: PureState, model: LossModel, obs: Observable) -> PhaseResponse:
    basis = build_basis(state.sector)
    rho_l = loss_channel(state.to_density(basis), model.eta_a, model.eta_b)
    return PhaseResponse(basis, rho_l, obs)


def golden_section_minimize(f, a: float, b: float, tol: float,
                            seed: tuple[float, float] | None = None) -> tuple[float, float]:
    """Golden-section search on [a, b]; returns the best point ever evaluated."""
    best = [math.inf, math.nan] if seed is None else [seed[1], seed[0]]

    def ev(x: float) -> float:
        v = f(x)
        if v < best[0]:
            best[0], best[1] = v, x
        return v

    ev(a)
    ev(b)
    ratio = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - ratio * (b - a)
    d = a + ratio * (b - a)
    fc, fd = ev(c), ev(d)
    while (b - a) > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - ratio * (b - a)
            fc = ev(c)
        else:
            a, c, fc = c, d, fd
            d = a + ratio * (b - a)
            fd = ev(d)
    return best[1], best[0]


def best_working_point(state: PureState, model: LossModel, obs: Observable,
                       grid_points: int = 720, phi_tol: float = 1e-10) -> WorkingPoint:
    """Minimize the pipeline uncertainty over phi in [0, 2 pi).

    A uniform grid scan (dense enough to resolve cos(n_max phi) fringes)
    brackets the minimum, then golden-section refinement narrows phi to
    phi_tol.
    """
    resp = phase_response(state, model, obs)
    phis = np.arange(grid_points) * (2.0 * math.pi / grid_points)
    vals = resp.delta_phi(phis)
    if not np.isfinite(vals).any():
        raise NoWorkingPointError("observable has no phase sensitivity anywhere on the grid")
    i = int(np.argmin(vals))
    h = 2.0 * math.pi / grid_points

    x, _ = golden_section_minimize(lambda p: float(resp.delta_phi(p)),
                                   phis[i] - h, phis[i] + h, phi_tol,
                                   seed=(float(phis[i]), float(vals[i])))
    phi_star = x % (2.0 * math.pi)
    mean, second, slope = (float(m) for m in resp.moments(x))
    var = max(second - mean * mean, 0.0)
    delta = math.sqrt(var) / (math.sqrt(obs.n_m) * abs(slope))
    return WorkingPoint(phi_star, delta, mean, var, slope)
