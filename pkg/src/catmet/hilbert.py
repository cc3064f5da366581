"""Two-mode bosonic Fock space organized as fixed-total-number sectors.

The truncated Hilbert space of two bosonic modes (a, b) with at most n_max
particles splits into sectors of fixed total number n = n_a + n_b.  Sector n
holds the n + 1 states |n_a, n_b> with n_a + n_b = n, ordered by n_a
ascending, so offset k inside sector n is the state |n_a=k, n_b=n-k>.

Collective (Schwinger) spin operators use the convention

    Jz = (b'b - a'a)/2,  Jx = (a'b + a b')/2,  Jy = (b'a - a'b)/(2i),

which satisfies [Jx, Jy] = i Jz.  Jz is diagonal with entries (n_b - n_a)/2,
matching a phase Hamiltonian delta * Jz.  With the Dicke labels J = n/2 and
m = (n_a - n_b)/2, offset k of sector n is |J, m = k - n/2>.

States with definite total number stay block-diagonal under every operation
in this package, so density matrices store one dense Hermitian block per
sector instead of one (n_max+1)(n_max+2)/2 square matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

OPERATOR_KINDS = ("a", "b", "jx", "jy", "jz", "num_a", "num_b", "parity_b")

APPLY_SIDES = ("left", "right", "sandwich")


@dataclass(frozen=True)
class SectorBasis:
    """Sector decomposition of the two-mode Fock space truncated at n_max."""

    n_max: int

    def __post_init__(self):
        if not isinstance(self.n_max, (int, np.integer)) or self.n_max < 1:
            raise ValueError(f"n_max must be an integer >= 1, got {self.n_max!r}")

    @property
    def size(self) -> int:
        """Total number of basis states over all sectors."""
        return (self.n_max + 1) * (self.n_max + 2) // 2

    @property
    def sectors(self) -> range:
        return range(self.n_max + 1)

    def sector_size(self, n: int) -> int:
        self._check_sector(n)
        return n + 1

    def occupations(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        """(n_a, n_b) occupation numbers along sector n, in basis order."""
        self._check_sector(n)
        n_a = np.arange(n + 1)
        return n_a, n - n_a

    def jz_diagonal(self, n: int) -> np.ndarray:
        """Diagonal of Jz = (n_b - n_a)/2 on sector n."""
        n_a, n_b = self.occupations(n)
        return (n_b - n_a) / 2.0

    def _check_sector(self, n: int) -> None:
        if not 0 <= n <= self.n_max:
            raise ValueError(f"sector {n} outside 0..{self.n_max}")


def build_basis(n_max: int) -> SectorBasis:
    """Create the sector basis for initial total particle number n_max."""
    return SectorBasis(int(n_max))


@lru_cache(maxsize=None)
def _operator_blocks(n_max: int, kind: str) -> tuple[np.ndarray, ...]:
    blocks = []
    for n in range(n_max + 1):
        k = np.arange(n + 1)
        if kind == "a":
            # <n_a-1, n_b| a |n_a, n_b> = sqrt(n_a): maps offset k -> k-1
            m = np.zeros((n, n + 1), dtype=complex)
            m[k[1:] - 1, k[1:]] = np.sqrt(k[1:])
        elif kind == "b":
            # <n_a, n_b-1| b |n_a, n_b> = sqrt(n_b): offset k unchanged
            m = np.zeros((n, n + 1), dtype=complex)
            if n > 0:
                m[k[:-1], k[:-1]] = np.sqrt(n - k[:-1])
        elif kind == "jx":
            m = np.zeros((n + 1, n + 1), dtype=complex)
            off = 0.5 * np.sqrt((k[:-1] + 1) * (n - k[:-1]))
            m[k[:-1] + 1, k[:-1]] = off
            m[k[:-1], k[:-1] + 1] = off
        elif kind == "jy":
            m = np.zeros((n + 1, n + 1), dtype=complex)
            off = 0.5 * np.sqrt((k[:-1] + 1) * (n - k[:-1]))
            m[k[:-1] + 1, k[:-1]] = 1j * off
            m[k[:-1], k[:-1] + 1] = -1j * off
        elif kind == "jz":
            m = np.diag((n - 2 * k) / 2.0).astype(complex)
        elif kind == "num_a":
            m = np.diag(k).astype(complex)
        elif kind == "num_b":
            m = np.diag(n - k).astype(complex)
        elif kind == "parity_b":
            m = np.diag((-1.0) ** (n - k)).astype(complex)
        else:  # pragma: no cover - guarded by build_operator
            raise ValueError(f"unknown operator kind {kind!r}")
        m.setflags(write=False)
        blocks.append(m)
    return tuple(blocks)


@dataclass(frozen=True)
class BlockOperator:
    """Linear operator stored sector by sector.

    sector_shift 0 means the operator preserves the total number and
    blocks[n] is (n+1) x (n+1); sector_shift 1 means it lowers the total
    number by one (mode annihilation) and blocks[n] maps sector n into
    sector n-1 with shape n x (n+1).
    """

    basis: SectorBasis
    kind: str
    sector_shift: int
    blocks: tuple[np.ndarray, ...] = field(repr=False)

    def block(self, n: int) -> np.ndarray:
        self.basis._check_sector(n)
        return self.blocks[n]


def build_operator(basis: SectorBasis, kind: str) -> BlockOperator:
    """Build one of the supported operators on the given basis."""
    if kind not in OPERATOR_KINDS:
        raise ValueError(f"unknown operator kind {kind!r}; expected one of {OPERATOR_KINDS}")
    shift = 1 if kind in ("a", "b") else 0
    return BlockOperator(basis, kind, shift, _operator_blocks(basis.n_max, kind))


@dataclass
class DensityMatrix:
    """Density operator block-diagonal in total particle number.

    blocks[n] is the dense complex (n+1) x (n+1) block on sector n.  The same
    container is reused for density-matrix-shaped intermediates (for example
    phase derivatives), which are Hermitian but not unit-trace.
    """

    basis: SectorBasis
    blocks: list[np.ndarray]

    def __post_init__(self):
        if len(self.blocks) != self.basis.n_max + 1:
            raise ValueError("one block per sector 0..n_max required")
        for n, b in enumerate(self.blocks):
            if b.shape != (n + 1, n + 1):
                raise ValueError(f"sector {n} block has shape {b.shape}, expected {(n + 1, n + 1)}")

    @classmethod
    def zero(cls, basis: SectorBasis) -> "DensityMatrix":
        return cls(basis, [np.zeros((n + 1, n + 1), dtype=complex) for n in basis.sectors])

    def copy(self) -> "DensityMatrix":
        return DensityMatrix(self.basis, [b.copy() for b in self.blocks])

    def trace(self) -> float:
        return float(sum(np.trace(b).real for b in self.blocks))

    def purity(self) -> float:
        return float(sum(np.vdot(b, b).real for b in self.blocks))

    def mean_total_number(self) -> float:
        return float(sum(n * np.trace(b).real for n, b in enumerate(self.blocks)))

    def min_eigenvalue(self) -> float:
        lows = []
        for b in self.blocks:
            h = 0.5 * (b + b.conj().T)
            lows.append(np.linalg.eigvalsh(h)[0])
        return float(min(lows))

    def check_physical(self, trace_tol: float = 1e-9, herm_tol: float = 1e-10,
                       eig_floor: float = -1e-10) -> None:
        """Raise ValueError unless trace, Hermiticity and positivity hold."""
        tr = self.trace()
        if abs(tr - 1.0) > trace_tol:
            raise ValueError(f"trace {tr} deviates from 1 by more than {trace_tol}")
        for n, b in enumerate(self.blocks):
            dev = np.max(np.abs(b - b.conj().T)) if b.size else 0.0
            if dev > herm_tol:
                raise ValueError(f"sector {n} block non-Hermitian by {dev}")
        low = self.min_eigenvalue()
        if low < eig_floor:
            raise ValueError(f"minimum eigenvalue {low} below {eig_floor}")

    def dump_csv(self, path) -> None:
        """Write nonzero entries as rows of sector,row,col,re,im."""
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("sector,row,col,re,im\n")
            for n, b in enumerate(self.blocks):
                rows, cols = np.nonzero(b)
                for i, j in zip(rows, cols):
                    v = b[i, j]
                    fh.write(f"{n},{i},{j},{v.real:.12g},{v.imag:.12g}\n")


def apply(op: BlockOperator, rho: DensityMatrix, side: str) -> DensityMatrix:
    """Apply a block operator to a density matrix from one or both sides.

    side "left" is op @ rho, "right" is rho @ op, "sandwich" is op rho op'.
    Left/right products with a number-lowering operator leave the
    block-diagonal representation, so only sector-preserving kinds are
    accepted there; sandwich products are always block-diagonal and map
    sector n to sector n - sector_shift.
    """
    if op.basis != rho.basis:
        raise ValueError("operator and state built on different bases")
    if side not in APPLY_SIDES:
        raise ValueError(f"side must be one of {APPLY_SIDES}, got {side!r}")
    if side in ("left", "right") and op.sector_shift:
        raise ValueError(f"side {side!r} with a sector-lowering operator is not block-diagonal")

    out = DensityMatrix.zero(rho.basis)
    for n in rho.basis.sectors:
        block = op.blocks[n]
        if side == "left":
            out.blocks[n] = block @ rho.blocks[n]
        elif side == "right":
            out.blocks[n] = rho.blocks[n] @ block
        elif op.sector_shift == 0:
            out.blocks[n] = block @ rho.blocks[n] @ block.conj().T
        elif n >= 1:
            out.blocks[n - 1] = block @ rho.blocks[n] @ block.conj().T
    return out
