"""Phase accumulation under one-body loss, and the pi/2 readout pulse.

Two equivalent evolution paths are provided.  The production path composes
an exact amplitude-damping Kraus channel per mode with a diagonal phase
rotation; the dissipative and unitary parts commute because mode damping is
phase-covariant.  A fixed-step RK4 integrator of the full master equation

    d rho / dt = -i delta [Jz, rho] + gamma_a D[a] rho + gamma_b D[b] rho

serves as an independent oracle for the channel and as the extension point
for generators that do not commute with the rotation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .hilbert import DensityMatrix, SectorBasis


class NumericalFailureError(RuntimeError):
    """Integration produced non-finite values (step size too large)."""


@dataclass(frozen=True)
class LossModel:
    """Damping rates, mode energy difference, and accumulation time.

    The survival probability per mode over the accumulation time is
    eta = exp(-gamma * time); the accumulated phase is phi = delta * time.
    """

    gamma_a: float
    gamma_b: float
    delta: float = 1.0
    time: float = 0.0

    def __post_init__(self):
        if self.gamma_a < 0 or self.gamma_b < 0:
            raise ValueError("damping rates must be >= 0")
        if self.time < 0:
            raise ValueError("accumulation time must be >= 0")

    @property
    def eta_a(self) -> float:
        return math.exp(-self.gamma_a * self.time)

    @property
    def eta_b(self) -> float:
        return math.exp(-self.gamma_b * self.time)

    @property
    def phi(self) -> float:
        return self.delta * self.time

    @classmethod
    def symmetric(cls, gamma: float, time: float, delta: float = 1.0) -> "LossModel":
        return cls(gamma, gamma, delta, time)

    @classmethod
    def from_eta(cls, eta_a: float, eta_b: float | None = None,
                 delta: float = 1.0) -> "LossModel":
        """Model with unit accumulation time realizing the given survivals."""
        if eta_b is None:
            eta_b = eta_a
        for eta in (eta_a, eta_b):
            if not 0.0 < eta <= 1.0:
                raise ValueError(f"eta must lie in (0, 1], got {eta}")
        return cls(-math.log(eta_a), -math.log(eta_b), delta, 1.0)


def phase_rotation(rho: DensityMatrix, phi: float) -> DensityMatrix:
    """Conjugate by exp(-i phi Jz); diagonal, so applied as element phases."""
    out = DensityMatrix.zero(rho.basis)
    for n in rho.basis.sectors:
        u = np.exp(-1j * phi * rho.basis.jz_diagonal(n))
        out.blocks[n] = rho.blocks[n] * np.outer(u, u.conj())
    return out


@lru_cache(maxsize=None)
def _binom_table(n_max: int) -> np.ndarray:
    c = np.zeros((n_max + 1, n_max + 1))
    for n in range(n_max + 1):
        for l in range(n + 1):
            c[n, l] = math.comb(n, l)
    c.setflags(write=False)
    return c


def _mode_loss(basis: SectorBasis, blocks: list[np.ndarray], eta: float,
               mode: str) -> list[np.ndarray]:
    """Exact amplitude damping of one mode on block-diagonal rho.

    The Kraus family A_l = sqrt((1-eta)^l / l!) eta^(n/2) a^l acts on a
    number state as A_l |n> = sqrt(C(n,l) (1-eta)^l eta^(n-l)) |n-l>, so the
    l-loss branch is a shifted rank-1 reweighting of each sector block.
    """
    n_max = basis.n_max
    binom = _binom_table(n_max)
    out = [np.zeros_like(b) for b in blocks]
    for n in basis.sectors:
        rho = blocks[n]
        if not rho.any():
            continue
        for l in range(n + 1):
            if l > 0 and eta == 1.0:
                break
            if mode == "a":
                k = np.arange(l, n + 1)  # surviving rows have n_a = k - l
                w = np.sqrt(binom[k, l] * (1.0 - eta) ** l * eta ** (k - l))
                sub = rho[l:, l:]
            else:
                k = np.arange(0, n - l + 1)  # n_b = n - k loses l
                w = np.sqrt(binom[n - k, l] * (1.0 - eta) ** l * eta ** (n - k - l))
                sub = rho[: n - l + 1, : n - l + 1]
            out[n - l] += np.outer(w, w) * sub
    return out


def loss_channel(rho: DensityMatrix, eta_a: float, eta_b: float) -> DensityMatrix:
    """Time-integrated one-body loss with per-mode survival eta_a, eta_b."""
    for eta in (eta_a, eta_b):
        if not 0.0 < eta <= 1.0:
            raise ValueError(f"eta must lie in (0, 1], got {eta}")
    blocks = _mode_loss(rho.basis, rho.blocks, eta_a, "a")
    blocks = _mode_loss(rho.basis, blocks, eta_b, "b")
    return DensityMatrix(rho.basis, blocks)


@lru_cache(maxsize=None)
def _lindblad_tables(n_max: int):
    """Per-sector coefficient arrays for the master-equation right-hand side."""
    jz_diff, num_sum, feed_a, feed_b = [], [], [], []
    for n in range(n_max + 1):
        k = np.arange(n + 1)
        d = (n - 2 * k) / 2.0
        jz_diff.append(d[:, None] - d[None, :])
        na = k.astype(float)
        nb = (n - k).astype(float)
        num_sum.append((na[:, None] + na[None, :], nb[:, None] + nb[None, :]))
        if n < n_max:
            wa = np.sqrt(np.arange(1, n + 2, dtype=float))
            feed_a.append(np.outer(wa, wa))
            wb = np.sqrt(n + 1 - k.astype(float))
            feed_b.append(np.outer(wb, wb))
    return jz_diff, num_sum, feed_a, feed_b


def _lindblad_rhs(blocks: list[np.ndarray], model: LossModel, tables) -> list[np.ndarray]:
    jz_diff, num_sum, feed_a, feed_b = tables
    n_max = len(blocks) - 1
    out = []
    for n in range(n_max + 1):
        rho = blocks[n]
        d = -1j * model.delta * jz_diff[n] * rho
        na_sum, nb_sum = num_sum[n]
        d = d - 0.5 * model.gamma_a * na_sum * rho - 0.5 * model.gamma_b * nb_sum * rho
        if n < n_max:
            up = blocks[n + 1]
            d = d + model.gamma_a * feed_a[n] * up[1:, 1:]
            d = d + model.gamma_b * feed_b[n] * up[: n + 1, : n + 1]
        out.append(d)
    return out


def default_rk4_step(model: LossModel, n_max: int) -> float:
    """Step size keeping the per-step error well below 1e-9."""
    dt = 1e-3
    if model.delta > 0:
        dt = min(dt, 0.1 / (model.delta * n_max))
    for gamma in (model.gamma_a, model.gamma_b):
        if gamma > 0:
            dt = min(dt, 0.1 / (gamma * n_max))
    return dt


def lindblad_evolve(rho: DensityMatrix, model: LossModel,
                    dt: float | None = None) -> DensityMatrix:
    """Fixed-step RK4 integration of the master equation from t=0 to model.time."""
    if dt is None:
        dt = default_rk4_step(model, rho.basis.n_max)
    if dt <= 0:
        raise ValueError("dt must be > 0")
    if model.time == 0:
        return rho.copy()

    steps = max(1, math.ceil(model.time / dt))
    h = model.time / steps
    tables = _lindblad_tables(rho.basis.n_max)
    y = [b.copy() for b in rho.blocks]
    for _ in range(steps):
        k1 = _lindblad_rhs(y, model, tables)
        k2 = _lindblad_rhs([a + 0.5 * h * b for a, b in zip(y, k1)], model, tables)
        k3 = _lindblad_rhs([a + 0.5 * h * b for a, b in zip(y, k2)], model, tables)
        k4 = _lindblad_rhs([a + h * b for a, b in zip(y, k3)], model, tables)
        y = [a + (h / 6.0) * (b1 + 2.0 * b2 + 2.0 * b3 + b4)
             for a, b1, b2, b3, b4 in zip(y, k1, k2, k3, k4)]
        if not all(np.isfinite(b).all() for b in y):
            raise NumericalFailureError(
                f"non-finite values during RK4 integration; dt={h} is too large")
    return DensityMatrix(rho.basis, y)


@lru_cache(maxsize=None)
def pi2_unitaries(n_max: int) -> tuple[np.ndarray, ...]:
    """Per-sector U = exp(i (pi/2) Jx), via eigendecomposition of Jx."""
    from .hilbert import _operator_blocks

    us = []
    for jx in _operator_blocks(n_max, "jx"):
        w, v = np.linalg.eigh(jx)
        u = (v * np.exp(1j * (np.pi / 2.0) * w)) @ v.conj().T
        u.setflags(write=False)
        us.append(u)
    return tuple(us)


def pi2_pulse(rho: DensityMatrix) -> DensityMatrix:
    """Readout pulse: rho -> U' rho U with U = exp(i (pi/2) Jx)."""
    us = pi2_unitaries(rho.basis.n_max)
    out = DensityMatrix.zero(rho.basis)
    for n in rho.basis.sectors:
        u = us[n]
        out.blocks[n] = u.conj().T @ rho.blocks[n] @ u
    return out


def trace_distance(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """(1/2) ||rho - sigma||_1, summed over sector blocks."""
    if rho.basis != sigma.basis:
        raise ValueError("states built on different bases")
    total = 0.0
    for a, b in zip(rho.blocks, sigma.blocks):
        diff = a - b
        diff = 0.5 * (diff + diff.conj().T)
        total += np.abs(np.linalg.eigvalsh(diff)).sum()
    return 0.5 * float(total)
