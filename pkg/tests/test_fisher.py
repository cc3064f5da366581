import math

import numpy as np
import pytest
from conftest import random_density

from catmet.channels import loss_channel, phase_rotation
from catmet.fisher import (
    DegenerateStateError,
    decompose,
    hermitian_eig,
    pure_qfi,
    qfi,
    qfi_from_sld,
    rho_derivative,
)
from catmet.hilbert import DensityMatrix, build_basis
from catmet.states import CatParams, cat, scs


def lossy_cat(theta, n, eta, varphi=0.0):
    rho = cat(CatParams(theta, n, varphi=varphi)).to_density(build_basis(n))
    return loss_channel(rho, eta, eta)


def test_hermitian_eig_identity():
    vals, vecs = hermitian_eig(np.eye(4, dtype=complex))
    assert np.allclose(vals, 1.0)
    assert np.allclose(vecs @ vecs.conj().T, np.eye(4), atol=1e-12)


def test_hermitian_eig_descending():
    vals, _ = hermitian_eig(np.diag([3.0, 1.0, 2.0]).astype(complex))
    assert np.allclose(vals, [3.0, 2.0, 1.0])


def test_hermitian_eig_reconstruction_random():
    rng = np.random.default_rng(21)
    a = rng.normal(size=(10, 10)) + 1j * rng.normal(size=(10, 10))
    h = 0.5 * (a + a.conj().T)
    vals, vecs = hermitian_eig(h)
    assert np.max(np.abs(vecs @ np.diag(vals) @ vecs.conj().T - h)) < 1e-10
    assert np.max(np.abs(vecs.conj().T @ vecs - np.eye(10))) < 1e-10
    for j in range(10):
        assert np.linalg.norm(h @ vecs[:, j] - vals[j] * vecs[:, j]) < 1e-10


def test_hermitian_eig_rejects_non_hermitian():
    with pytest.raises(ValueError):
        hermitian_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_decompose_invariants():
    rho = random_density(build_basis(6), np.random.default_rng(22))
    dec = decompose(rho)
    total = sum(float(v.sum()) for v in dec.values)
    assert total == pytest.approx(rho.trace(), abs=1e-9)
    for n, (vals, vecs) in enumerate(zip(dec.values, dec.vectors)):
        assert np.all(np.diff(vals) <= 1e-14)
        recon = vecs @ np.diag(vals) @ vecs.conj().T
        assert np.max(np.abs(recon - rho.blocks[n])) < 1e-9


def test_rho_derivative_diagonal_is_zero():
    basis = build_basis(4)
    rho = DensityMatrix.zero(basis)
    rho.blocks[4][2, 2] = 1.0
    out = rho_derivative(rho)
    assert all(np.allclose(b, 0) for b in out.blocks)


def test_rho_derivative_noon_elements():
    n = 8
    rho = cat(CatParams(0.0, n)).to_density()
    out = rho_derivative(rho)
    # off-diagonal |0,n><n,0| element scales by -i(d_0 - d_n) = -i n
    assert out.blocks[n][0, n] == pytest.approx(-1j * n * rho.blocks[n][0, n])
    assert out.blocks[n][n, 0] == pytest.approx(1j * n * rho.blocks[n][n, 0])
    assert out.trace() == pytest.approx(0.0, abs=1e-14)


def test_rho_derivative_matches_finite_difference():
    rho_out = phase_rotation(lossy_cat(0.3 * math.pi, 10, 0.85), 0.7)
    analytic = rho_derivative(rho_out)
    h = 1e-5
    for n in rho_out.basis.sectors:
        fd = (phase_rotation(rho_out, h).blocks[n]
              - phase_rotation(rho_out, -h).blocks[n]) / (2 * h)
        assert np.max(np.abs(fd - analytic.blocks[n])) < 1e-8


def test_qfi_ghz_heisenberg_limit():
    rho = cat(CatParams(0.0, 40)).to_density()
    res = qfi(rho, rho_derivative(rho))
    assert res.f_q == pytest.approx(1600.0, abs=1e-8)
    assert res.delta_phi_min == pytest.approx(0.025, abs=1e-8)


def test_qfi_scs_standard_quantum_limit():
    rho = scs(CatParams(math.pi / 2, 40)).to_density()
    res = qfi(rho, rho_derivative(rho))
    assert res.f_q == pytest.approx(40.0, abs=1e-8)
    assert res.delta_phi_min == pytest.approx(1 / math.sqrt(40), abs=1e-8)


def test_qfi_zero_derivative():
    basis = build_basis(4)
    rho = DensityMatrix.zero(basis)
    rho.blocks[4][1, 1] = 0.5
    rho.blocks[2][0, 0] = 0.5
    res = qfi(rho, rho_derivative(rho))
    assert res.f_q == 0.0
    assert math.isinf(res.delta_phi_min)


def test_qfi_degenerate_state_error():
    basis = build_basis(3)
    zero = DensityMatrix.zero(basis)
    with pytest.raises(DegenerateStateError):
        qfi(zero, zero)


def test_qfi_n_m_scaling():
    rho = lossy_cat(0.4, 8, 0.9)
    one = qfi(rho, rho_derivative(rho), n_m=1)
    four = qfi(rho, rho_derivative(rho), n_m=4)
    assert four.f_q == one.f_q
    assert four.delta_phi_min == pytest.approx(one.delta_phi_min / 2, rel=1e-12)


def test_pure_qfi_limits():
    assert pure_qfi(cat(CatParams(0.0, 40))) == pytest.approx(1600.0, abs=1e-9)
    assert pure_qfi(scs(CatParams(math.pi / 2, 40))) == pytest.approx(40.0, abs=1e-9)


def test_pure_qfi_cat_branch_formula():
    # away from the equator the branch overlap sin^n(theta) is negligible and
    # F -> n^2 cos^2(theta) + n sin^2(theta)
    n, theta = 20, math.pi / 4
    want = n**2 * math.cos(theta) ** 2 + n * math.sin(theta) ** 2
    assert pure_qfi(cat(CatParams(theta, n))) == pytest.approx(want, rel=1e-3)


def test_qfi_matches_pure_state_oracle():
    rng = np.random.default_rng(23)
    for _ in range(8):
        params = CatParams(float(rng.uniform(0, math.pi / 2)), 16,
                           varphi=float(rng.uniform(0, 2 * math.pi)))
        state = cat(params)
        rho = state.to_density()
        res = qfi(rho, rho_derivative(rho))
        assert res.f_q == pytest.approx(pure_qfi(state), abs=1e-8)


def test_qfi_monotone_under_loss():
    for theta in (0.2 * math.pi, 0.35 * math.pi):
        last = math.inf
        for eta in (1.0, 0.95, 0.9, 0.8, 0.6):
            f = qfi(*(lambda r: (r, rho_derivative(r)))(lossy_cat(theta, 10, eta))).f_q
            assert f <= last + 1e-9
            last = f


def test_qfi_phi_independent():
    rho = lossy_cat(0.3 * math.pi, 10, 0.85)
    base = qfi(rho, rho_derivative(rho)).f_q
    for phi in (0.3, 1.0):
        rotated = phase_rotation(rho, phi)
        f = qfi(rotated, rho_derivative(rotated)).f_q
        assert f == pytest.approx(base, rel=1e-8)


def test_qfi_theta_mirror():
    a = lossy_cat(0.3, 9, 0.9)
    b = lossy_cat(math.pi - 0.3, 9, 0.9)
    fa = qfi(a, rho_derivative(a)).f_q
    fb = qfi(b, rho_derivative(b)).f_q
    assert fa == pytest.approx(fb, rel=1e-12)


def test_qfi_cutoff_stability():
    rho = lossy_cat(0.35 * math.pi, 12, 0.8)
    rp = rho_derivative(rho)
    values = [qfi(rho, rp, cutoff=c).f_q for c in (1e-14, 1e-12, 1e-10)]
    spread = (max(values) - min(values)) / max(values)
    assert spread < 1e-6


def test_sld_reproduces_qfi():
    rho = lossy_cat(0.3 * math.pi, 8, 0.85, varphi=0.3)
    rho = phase_rotation(rho, 0.4)
    rp = rho_derivative(rho)
    assert qfi_from_sld(rho, rp) == pytest.approx(qfi(rho, rp).f_q, abs=1e-8)
