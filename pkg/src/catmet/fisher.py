"""Quantum Fisher information and the quantum Cramer-Rao bound.

For output states of the loss-plus-rotation pipeline all phase dependence is
unitary with generator Jz, so the phase derivative is the commutator
rho' = -i [Jz, rho].  The QFI is evaluated spectrally,

    F_Q = sum_{j,k : p_j + p_k > cutoff} 2 |<psi_k| rho' |psi_j>|^2 / (p_k + p_j),

from per-sector eigendecompositions; cross-sector pairs vanish because rho'
is block-diagonal.  The Cramer-Rao bound for N_m repetitions is
delta_phi_min = 1 / sqrt(N_m F_Q).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .hilbert import DensityMatrix
from .states import PureState

EIG_PAIR_CUTOFF = 1e-12


class DegenerateStateError(RuntimeError):
    """Every eigenvalue pair fell below the spectral cutoff."""


def hermitian_eig(block: np.ndarray, herm_tol: float = 1e-10) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and matching orthonormal eigenvector columns."""
    block = np.asarray(block)
    if block.ndim != 2 or block.shape[0] != block.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {block.shape}")
    dev = np.max(np.abs(block - block.conj().T)) if block.size else 0.0
    if dev > herm_tol:
        raise ValueError(f"matrix deviates from Hermitian by {dev}")
    values, vectors = np.linalg.eigh(block)
    return values[::-1], vectors[:, ::-1]


@dataclass(frozen=True)
class EigenDecomposition:
    """Per-sector spectra of a block-diagonal Hermitian operator."""

    values: tuple[np.ndarray, ...]
    vectors: tuple[np.ndarray, ...]


def decompose(rho: DensityMatrix) -> EigenDecomposition:
    values, vectors = [], []
    for b in rho.blocks:
        w, v = hermitian_eig(b)
        values.append(w)
        vectors.append(v)
    return EigenDecomposition(tuple(values), tuple(vectors))


def rho_derivative(rho_out: DensityMatrix) -> DensityMatrix:
    """Phase derivative -i [Jz, rho]; traceless Hermitian, block-diagonal."""
    out = DensityMatrix.zero(rho_out.basis)
    for n in rho_out.basis.sectors:
        d = rho_out.basis.jz_diagonal(n)
        out.blocks[n] = -1j * (d[:, None] - d[None, :]) * rho_out.blocks[n]
    return out


@dataclass(frozen=True)
class QfiResult:
    f_q: float
    delta_phi_min: float
    n_m: int


def qfi(rho_out: DensityMatrix, rho_prime: DensityMatrix, n_m: int = 1,
        cutoff: float = EIG_PAIR_CUTOFF) -> QfiResult:
    """Spectral QFI of rho_out with respect to the given phase derivative."""
    if rho_out.basis != rho_prime.basis:
        raise ValueError("rho and rho' built on different bases")
    if n_m < 1:
        raise ValueError("n_m must be >= 1")

    total = 0.0
    any_pair = False
    for n in rho_out.basis.sectors:
        block = rho_out.blocks[n]
        if not block.any():
            continue
        p, v = np.linalg.eigh(block)
        r = v.conj().T @ rho_prime.blocks[n] @ v
        denom = p[:, None] + p[None, :]
        mask = denom > cutoff
        if mask.any():
            any_pair = True
            total += float((2.0 * np.abs(r[mask]) ** 2 / denom[mask]).sum())
    if not any_pair:
        raise DegenerateStateError(f"no eigenvalue pair above cutoff {cutoff}")
    delta = 1.0 / math.sqrt(n_m * total) if total > 0 else math.inf
    return QfiResult(total, delta, n_m)


def pure_qfi(state: PureState) -> float:
    """Pure-state limit 4 Var(Jz), used as an independent oracle."""
    k = np.arange(state.sector + 1)
    d = (state.sector - 2 * k) / 2.0
    w = np.abs(state.amplitudes) ** 2
    mean = float(w @ d)
    second = float(w @ d**2)
    return 4.0 * (second - mean * mean)


def sld_blocks(rho_out: DensityMatrix, rho_prime: DensityMatrix,
               cutoff: float = EIG_PAIR_CUTOFF) -> list[np.ndarray]:
    """Materialized symmetric logarithmic derivative, for debugging.

    L = sum_{j,k : p_k + p_j > cutoff} 2 <psi_k|rho'|psi_j> / (p_k + p_j) |psi_k><psi_j|
    per sector; qfi() evaluates the same double sum without building L.
    """
    out = []
    for n in rho_out.basis.sectors:
        p, v = np.linalg.eigh(rho_out.blocks[n])
        r = v.conj().T @ rho_prime.blocks[n] @ v
        denom = p[:, None] + p[None, :]
        coeff = np.where(denom > cutoff, 2.0 / np.where(denom > cutoff, denom, 1.0), 0.0)
        out.append(v @ (coeff * r) @ v.conj().T)
    return out


def qfi_from_sld(rho_out: DensityMatrix, rho_prime: DensityMatrix,
                 cutoff: float = EIG_PAIR_CUTOFF) -> float:
    """F_Q = Tr[L rho L] with the materialized SLD; debug cross-check."""
    total = 0.0
    for block, l in zip(rho_out.blocks, sld_blocks(rho_out, rho_prime, cutoff)):
        total += float(np.trace(l @ block @ l).real)
    return total
