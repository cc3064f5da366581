"""Spin coherent states, spin cat states, and the Husimi distribution."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .hilbert import DensityMatrix, SectorBasis, build_basis


@dataclass(frozen=True)
class CatParams:
    """Polar angle, particle number, and azimuthal angle of a cat/SCS state.

    theta is accepted on [0, pi]; a cat built at theta and at pi - theta is
    the same state, so [0, pi/2] covers all distinct cats.
    """

    theta: float
    n: int
    varphi: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.theta <= math.pi:
            raise ValueError(f"theta must lie in [0, pi], got {self.theta}")
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise ValueError(f"n must be an integer >= 1, got {self.n!r}")
        if not math.isfinite(self.varphi):
            raise ValueError("varphi must be finite")


@dataclass(frozen=True)
class PureState:
    """Normalized pure state supported on a single total-number sector."""

    sector: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex)
        if amp.shape != (self.sector + 1,):
            raise ValueError(f"expected {self.sector + 1} amplitudes, got shape {amp.shape}")
        norm = np.linalg.norm(amp)
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"amplitudes must be unit norm, got ||.|| = {norm}")
        amp = amp.copy()
        amp.setflags(write=False)
        object.__setattr__(self, "amplitudes", amp)

    def to_density(self, basis: SectorBasis | None = None) -> DensityMatrix:
        """Rank-1 density matrix of this state, embedded in the given basis."""
        if basis is None:
            basis = build_basis(self.sector)
        if basis.n_max < self.sector:
            raise ValueError(f"basis holds at most {basis.n_max} particles, state has {self.sector}")
        rho = DensityMatrix.zero(basis)
        rho.blocks[self.sector] = np.outer(self.amplitudes, self.amplitudes.conj())
        return rho


@lru_cache(maxsize=None)
def _sqrt_binom(n: int) -> np.ndarray:
    v = np.array([math.comb(n, k) for k in range(n + 1)], dtype=float)
    v = np.sqrt(v)
    v.setflags(write=False)
    return v


def _scs_amplitudes(n: int, theta: float, varphi: float) -> np.ndarray:
    # amplitude on |n_a=k, n_b=n-k>: sqrt(C(n,k)) cos^(n-k)(t/2) sin^k(t/2) e^{-ik varphi}
    k = np.arange(n + 1)
    amp = _sqrt_binom(n) * np.cos(theta / 2.0) ** (n - k) * np.sin(theta / 2.0) ** k
    return amp * np.exp(-1j * k * varphi)


def scs(params: CatParams) -> PureState:
    """Spin coherent state: every particle in the same single-particle mode."""
    amp = _scs_amplitudes(params.n, params.theta, params.varphi)
    return PureState(params.n, amp / np.linalg.norm(amp))


def cat(params: CatParams) -> PureState:
    """Even superposition of the spin coherent states at theta and pi - theta.

    The normalization comes from the actual vector norm, so near-degenerate
    angles (theta close to pi/2, where the branches coincide) stay exact.
    At theta = 0 this is the NOON/GHZ state, at theta = pi/2 a single SCS.
    """
    v = _scs_amplitudes(params.n, params.theta, params.varphi)
    v = v + _scs_amplitudes(params.n, math.pi - params.theta, params.varphi)
    return PureState(params.n, v / np.linalg.norm(v))


def default_husimi_grid() -> tuple[np.ndarray, np.ndarray]:
    """Equiangular plotting grid: 181 polar x 361 azimuthal samples."""
    return np.linspace(0.0, math.pi, 181), np.linspace(0.0, 2.0 * math.pi, 361)


def husimi_q(state: PureState | DensityMatrix, theta_s: np.ndarray,
             varphi_s: np.ndarray) -> np.ndarray:
    """Husimi distribution Q(theta_s, varphi_s) = <probe| rho |probe>.

    The probe at each grid point is the spin coherent state of the probed
    sector; for a block-diagonal mixed state the per-sector overlaps are
    summed.  Q is the bare overlap, bounded by [0, 1]; no solid-angle
    prefactor is applied.  Returns an array of shape (len(theta_s), len(varphi_s)).
    """
    theta_s = np.atleast_1d(np.asarray(theta_s, dtype=float))
    varphi_s = np.atleast_1d(np.asarray(varphi_s, dtype=float))
    if theta_s.size == 0 or varphi_s.size == 0:
        raise ValueError("husimi grid must be non-empty")

    tt, pp = np.meshgrid(theta_s, varphi_s, indexing="ij")
    tt = tt.ravel()
    pp = pp.ravel()
    q = np.zeros(tt.size)

    if isinstance(state, PureState):
        items = [(state.sector, None)]
    else:
        items = [(n, state.blocks[n]) for n in state.basis.sectors
                 if np.trace(state.blocks[n]).real > 1e-15]

    for n, block in items:
        k = np.arange(n + 1)
        probe = (_sqrt_binom(n)[None, :]
                 * np.cos(tt / 2.0)[:, None] ** (n - k)[None, :]
                 * np.sin(tt / 2.0)[:, None] ** k[None, :]
                 * np.exp(-1j * np.outer(pp, k)))
        if block is None:
            q += np.abs(probe.conj() @ state.amplitudes) ** 2
        else:
            q += np.einsum("gi,ij,gj->g", probe.conj(), block, probe).real
    return q.reshape(theta_s.size, varphi_s.size)


def write_husimi_csv(path, theta_s: np.ndarray, varphi_s: np.ndarray,
                     q: np.ndarray) -> None:
    """Serialize a Husimi field with columns theta_s,varphi_s,Q."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("theta_s,varphi_s,Q\n")
        for i, t in enumerate(theta_s):
            for j, p in enumerate(varphi_s):
                fh.write(f"{t:.12g},{p:.12g},{q[i, j]:.12g}\n")
