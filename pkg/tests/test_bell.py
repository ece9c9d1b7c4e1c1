import math

import numpy as np
import pytest

from conftest import random_density_matrix
from nonlocality.bell import (
    TSIRELSON, CHSHSettings, chsh_s, coarse_chsh_max, optimal_chsh_settings, sigma_violation,
)
from nonlocality.measurement import AnalyzerSetting, correlation
from nonlocality.states import DensityMatrix, NoiseModel, PureTwoQubit, apply_noise, phi_minus, pure_state

D = math.radians


def planar_smax(rho):
    """Largest S over linear analyzers: 2 * Frobenius norm of the Z-X correlation block.

    The block is read off four correlation measurements at 0 and 45 degrees.
    """
    t = np.array([[correlation(rho, AnalyzerSetting(D(x), D(y))) for y in (0, 45)] for x in (0, 45)])
    s = np.linalg.svd(t, compute_uv=False)
    return 2 * math.sqrt(s[0] ** 2 + s[1] ** 2)


def test_mixed_state_zero():
    s = CHSHSettings.from_degrees(0, 45, 22.5, 67.5)
    assert chsh_s(DensityMatrix.maximally_mixed(), s) == pytest.approx(0, abs=1e-15)


def test_phi_minus_tsirelson(rho_phi_minus):
    s = CHSHSettings.from_degrees(0, 45, 157.5, 112.5)
    assert chsh_s(rho_phi_minus, s) == pytest.approx(2 * math.sqrt(2), abs=1e-12)


def test_settings_validation():
    with pytest.raises(ValueError):
        CHSHSettings(0.0, math.pi, 0.1, 0.2)


def test_optimal_phi_minus(rho_phi_minus):
    _, s = optimal_chsh_settings(rho_phi_minus)
    assert s == pytest.approx(TSIRELSON, abs=1e-6)


def test_separable_bound():
    _, s = optimal_chsh_settings(pure_state(PureTwoQubit(1.0, 0.0)))
    assert s <= 2 + 1e-12


def test_white_noise_law():
    for v in np.linspace(0.2, 1.0, 9):
        _, s = optimal_chsh_settings(apply_noise(phi_minus(), NoiseModel(v, "white")))
        assert s == pytest.approx(2 * math.sqrt(2) * v, abs=1e-6)
    _, s = optimal_chsh_settings(apply_noise(phi_minus(), NoiseModel(1 / math.sqrt(2), "white")))
    assert s == pytest.approx(2.0, abs=1e-6)


def test_colored_noise_law():
    # dephasing keeps the HH/VV correlation, so S_max = 2 sqrt(1 + V^2)
    for v in np.linspace(0.0, 1.0, 11):
        rho = apply_noise(phi_minus(), NoiseModel(v, "colored"))
        _, s = optimal_chsh_settings(rho)
        assert s == pytest.approx(planar_smax(rho), abs=1e-6)
        assert s == pytest.approx(2 * math.sqrt(1 + v * v), abs=1e-6)


def test_colored_at_phi_minus_settings():
    v = 0.6
    rho = apply_noise(phi_minus(), NoiseModel(v))
    s = CHSHSettings.from_degrees(0, 45, 157.5, 112.5)
    assert chsh_s(rho, s) == pytest.approx(math.sqrt(2) * (1 + v), abs=1e-12)


def test_paper_s_from_white_visibility():
    rho = apply_noise(phi_minus(), NoiseModel(0.9039, "white"))
    _, s = optimal_chsh_settings(rho)
    assert s == pytest.approx(2.5564, abs=5e-4)


def test_optimizer_matches_oracle_random_states():
    rng = np.random.default_rng(4)
    for _ in range(25):
        rho = random_density_matrix(rng)
        _, s = optimal_chsh_settings(rho)
        assert s == pytest.approx(planar_smax(rho), abs=1e-6)


def test_tsirelson_random_states():
    rng = np.random.default_rng(7)
    for _ in range(300):
        rho = random_density_matrix(rng)
        angles = rng.uniform(0, math.pi, 4)
        assert chsh_s(rho, CHSHSettings(*angles)) <= TSIRELSON + 1e-9
        assert coarse_chsh_max(rho) <= TSIRELSON + 1e-9


def test_pi_periodicity():
    rng = np.random.default_rng(8)
    rho = random_density_matrix(rng)
    base = rng.uniform(0, math.pi, 4)
    s0 = chsh_s(rho, CHSHSettings(*base))
    for k in range(4):
        shifted = base.copy()
        shifted[k] += math.pi
        assert chsh_s(rho, CHSHSettings(*shifted)) == pytest.approx(s0, abs=1e-12)


def test_optimal_deterministic(rho_phi_minus):
    assert optimal_chsh_settings(rho_phi_minus) == optimal_chsh_settings(rho_phi_minus)


def test_sigma_violation():
    assert sigma_violation((2.5564, 0.0026)) == pytest.approx(214.0, abs=0.05)
    assert sigma_violation((2.0, 0.1)) == 0
    assert sigma_violation((2.8284, 0.01)) == pytest.approx(82.84, abs=1e-9)
    with pytest.raises(ValueError):
        sigma_violation((2.5, 0.0))
