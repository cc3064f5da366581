import numpy as np

from catmet.hilbert import DensityMatrix, SectorBasis


def random_density(basis: SectorBasis, rng: np.random.Generator) -> DensityMatrix:
    """Random physical block-diagonal state: PSD blocks with random weights."""
    weights = rng.random(basis.n_max + 1) + 0.05
    weights /= weights.sum()
    blocks = []
    for n in basis.sectors:
        a = rng.normal(size=(n + 1, n + 1)) + 1j * rng.normal(size=(n + 1, n + 1))
        h = a @ a.conj().T
        blocks.append(weights[n] * h / np.trace(h).real)
    return DensityMatrix(basis, blocks)
