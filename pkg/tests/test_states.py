import math

import numpy as np
import pytest
from conftest import random_density

from catmet.hilbert import build_basis, build_operator
from catmet.states import (
    CatParams,
    PureState,
    _scs_amplitudes,
    cat,
    default_husimi_grid,
    husimi_q,
    scs,
    write_husimi_csv,
)


def test_scs_pole_states():
    north = scs(CatParams(0.0, 4))
    assert np.allclose(north.amplitudes, [1, 0, 0, 0, 0], atol=1e-12)
    south = scs(CatParams(math.pi, 4))
    assert abs(south.amplitudes[4]) == pytest.approx(1.0, abs=1e-12)


def test_scs_equator_n2():
    state = scs(CatParams(math.pi / 2, 2))
    assert np.allclose(state.amplitudes, [0.5, 1 / math.sqrt(2), 0.5], atol=1e-12)


def test_scs_coefficients_normalized_by_construction():
    # binomial theorem: the raw coefficient vector is already unit norm
    for n in (3, 11, 25):
        for theta in np.linspace(0.0, math.pi, 17):
            amp = _scs_amplitudes(n, theta, 0.0)
            assert np.linalg.norm(amp) == pytest.approx(1.0, abs=1e-12)


def test_scs_azimuthal_phases():
    state = scs(CatParams(0.4 * math.pi, 5, varphi=0.7))
    ref = scs(CatParams(0.4 * math.pi, 5))
    k = np.arange(6)
    assert np.allclose(state.amplitudes, ref.amplitudes * np.exp(-1j * k * 0.7), atol=1e-12)


def test_cat_noon_limit():
    state = cat(CatParams(0.0, 4))
    want = np.zeros(5)
    want[0] = want[4] = 1 / math.sqrt(2)
    assert np.allclose(state.amplitudes, want, atol=1e-12)


def test_cat_degenerates_to_scs_at_equator():
    assert np.allclose(cat(CatParams(math.pi / 2, 4)).amplitudes,
                       scs(CatParams(math.pi / 2, 4)).amplitudes, atol=1e-12)


def test_cat_normalization_from_branch_overlap():
    # n=2, theta=pi/4: ||branch sum|| = sqrt(2 + 2 sin^2(pi/4)) = sqrt(3)
    v = _scs_amplitudes(2, math.pi / 4, 0.0) + _scs_amplitudes(2, 3 * math.pi / 4, 0.0)
    assert np.linalg.norm(v) == pytest.approx(math.sqrt(3), abs=1e-12)


@pytest.mark.parametrize("n", [2, 7, 14, 20])
def test_branch_overlap_closed_form(n):
    for theta in np.linspace(0.05, math.pi / 2, 9):
        lhs = np.vdot(_scs_amplitudes(n, theta, 0.0),
                      _scs_amplitudes(n, math.pi - theta, 0.0))
        assert lhs.real == pytest.approx(math.sin(theta) ** n, abs=1e-12)
        assert abs(lhs.imag) < 1e-12


def test_cat_theta_mirror_symmetry():
    for theta in (0.1, 0.8, 1.3):
        a = cat(CatParams(theta, 9)).amplitudes
        b = cat(CatParams(math.pi - theta, 9)).amplitudes
        assert np.allclose(a, b, atol=1e-15)


def test_cat_jz_expectation_zero():
    basis = build_basis(12)
    jz = build_operator(basis, "jz")
    for theta in np.linspace(0.0, math.pi / 2, 7):
        amp = cat(CatParams(theta, 12)).amplitudes
        val = amp.conj() @ jz.block(12) @ amp
        assert abs(val) < 1e-12


def test_cat_params_validation():
    with pytest.raises(ValueError):
        CatParams(-0.1, 4)
    with pytest.raises(ValueError):
        CatParams(3.5, 4)
    with pytest.raises(ValueError):
        CatParams(0.3, 0)
    with pytest.raises(ValueError):
        CatParams(0.3, 4, varphi=math.inf)


def test_pure_state_validation():
    with pytest.raises(ValueError):
        PureState(2, np.array([1.0, 0.0]))
    with pytest.raises(ValueError):
        PureState(1, np.array([1.0, 1.0]))


def test_to_density_embedding():
    state = cat(CatParams(0.3, 3))
    rho = state.to_density()
    assert rho.basis.n_max == 3
    assert rho.trace() == pytest.approx(1.0, abs=1e-12)
    big = state.to_density(build_basis(5))
    assert big.blocks[3][0, 0] == pytest.approx(abs(state.amplitudes[0]) ** 2)
    with pytest.raises(ValueError):
        state.to_density(build_basis(2))


def test_husimi_self_overlap_is_one():
    state = scs(CatParams(0.7, 10, varphi=1.1))
    q = husimi_q(state, np.array([0.7]), np.array([1.1]))
    assert q.shape == (1, 1)
    assert q[0, 0] == pytest.approx(1.0, abs=1e-12)


def test_husimi_noon_peaks_at_poles():
    state = cat(CatParams(0.0, 8))
    theta_s = np.linspace(0.0, math.pi, 61)
    varphi_s = np.linspace(0.0, 2 * math.pi, 31)
    q = husimi_q(state, theta_s, varphi_s)
    assert q[0, 0] == pytest.approx(0.5, abs=1e-12)
    assert q[-1, 0] == pytest.approx(0.5, abs=1e-12)
    assert q.max() == pytest.approx(0.5, abs=1e-12)


def test_husimi_scs_single_equatorial_peak():
    state = cat(CatParams(math.pi / 2, 8))
    theta_s = np.linspace(0.0, math.pi, 41)
    varphi_s = np.linspace(0.0, 2 * math.pi, 41)
    q = husimi_q(state, theta_s, varphi_s)
    i, j = np.unravel_index(np.argmax(q), q.shape)
    assert theta_s[i] == pytest.approx(math.pi / 2, abs=1e-12)
    assert varphi_s[j] in (0.0, 2 * math.pi)
    assert q[i, j] == pytest.approx(1.0, abs=1e-12)


def test_husimi_mixed_state_bounds_and_rank1_consistency():
    basis = build_basis(6)
    rho = random_density(basis, np.random.default_rng(8))
    theta_s = np.linspace(0.0, math.pi, 11)
    varphi_s = np.linspace(0.0, 2 * math.pi, 13)
    q = husimi_q(rho, theta_s, varphi_s)
    assert (q >= -1e-12).all() and (q <= 1 + 1e-12).all()

    state = cat(CatParams(0.9, 6))
    q_pure = husimi_q(state, theta_s, varphi_s)
    q_rank1 = husimi_q(state.to_density(basis), theta_s, varphi_s)
    assert np.allclose(q_pure, q_rank1, atol=1e-12)


def test_husimi_empty_grid():
    state = scs(CatParams(0.3, 4))
    with pytest.raises(ValueError):
        husimi_q(state, np.array([]), np.array([0.0]))


def test_default_grid_shape():
    theta_s, varphi_s = default_husimi_grid()
    assert theta_s.size == 181 and varphi_s.size == 361


def test_husimi_csv(tmp_path):
    state = scs(CatParams(0.4, 3))
    theta_s = np.linspace(0, math.pi, 5)
    varphi_s = np.linspace(0, 2 * math.pi, 4)
    q = husimi_q(state, theta_s, varphi_s)
    path = tmp_path / "q.csv"
    write_husimi_csv(path, theta_s, varphi_s, q)
    lines = path.read_text().splitlines()
    assert lines[0] == "theta_s,varphi_s,Q"
    assert len(lines) == 1 + 20
