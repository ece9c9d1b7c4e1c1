import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import amplitude_prob
from nonlocality import hardy
from nonlocality.hardy import (
    LadderSpec, evaluate_ladder, ladder_angles, ladder_settings, ladder_state, lhv_margins,
    optimize_gamma, pk_ideal, violation_sigma,
)
from nonlocality.measurement import perp
from nonlocality.states import DensityMatrix, NoiseModel, state_from_gamma


def grid_oracle(K, step=1e-5):
    """Dense-grid maximum of P_K via the amplitude formula (independent of the ladder code)."""
    g = np.arange(step, 1.0, step)
    a, b = g / np.sqrt(1 + g * g), 1 / np.sqrt(1 + g * g)
    th = (-1) ** K * np.arctan(g ** (K + 0.5))
    p = (a * np.cos(th) ** 2 - b * np.sin(th) ** 2) ** 2
    i = int(np.argmax(p))
    return g[i], p[i]


def test_spec_validation():
    with pytest.raises(ValueError):
        LadderSpec(0, 0.5)
    with pytest.raises(ValueError):
        LadderSpec(2, 1.0)
    with pytest.raises(ValueError):
        LadderSpec(2, 0.0)


def test_angle_examples():
    assert hardy._angles(0, 1.0)[0] == pytest.approx(math.pi / 4)
    assert ladder_angles(LadderSpec(1, 0.25))[1] == pytest.approx(-math.atan(0.125), abs=1e-15)
    assert ladder_angles(LadderSpec(1, 0.25))[1] == pytest.approx(-0.12435, abs=1e-5)
    assert ladder_angles(LadderSpec(3, 0.5))[0] == pytest.approx(0.61548, abs=1e-5)


@given(st.integers(1, 30), st.floats(0.01, 0.99))
def test_angles_alternate_and_shrink(K, gamma):
    th = ladder_angles(LadderSpec(K, gamma))
    mags = [abs(t) for t in th]
    assert all(b < a for a, b in zip(mags, mags[1:]))
    assert all((t > 0) == (k % 2 == 0) for k, t in enumerate(th))


@pytest.mark.parametrize("K", [1, 4, 20, 37])
def test_setting_count(K):
    assert len(ladder_settings(LadderSpec(K, 0.5))) == 2 * K + 2


def test_setting_layout():
    spec = LadderSpec(2, 0.4)
    th = ladder_angles(spec)
    s = ladder_settings(spec)
    assert (s[0].theta_a, s[0].theta_b) == (th[2], th[2])
    assert (s[1].theta_a, s[1].theta_b) == (th[0], th[0])
    assert (s[2].theta_a, s[2].theta_b) == (th[1], perp(th[0]))
    assert (s[3].theta_a, s[3].theta_b) == (perp(th[0]), th[1])


@pytest.mark.parametrize("K", [1, 3, 5, 10, 25])
@pytest.mark.parametrize("gamma", [0.05, 0.3, 0.6, 0.95])
def test_ideal_terms_vanish_term_by_term(K, gamma):
    spec = LadderSpec(K, gamma)
    p = state_from_gamma(gamma)
    res = evaluate_ladder(ladder_state(gamma), spec)
    for s, t in zip(res.settings[1:], res.terms):
        assert t <= 1e-12
        assert amplitude_prob(p.alpha, p.beta, p.phi, s.theta_a, s.theta_b) <= 1e-12
    assert res.script_p <= 1e-12
    assert res.margin == pytest.approx(res.p_k, abs=1e-12)
    assert res.p_k > 0


def test_maximal_entanglement_no_violation():
    for K in (1, 5, 20):
        assert hardy.pk_closed_form(K, 1.0) == 0
        res = hardy._evaluate(ladder_state(1.0), K, 1.0)
        assert res.p_k == pytest.approx(0, abs=1e-15)


def test_white_noise_never_violates():
    rho = DensityMatrix.maximally_mixed()
    for K in (1, 4, 20):
        res = evaluate_ladder(rho, LadderSpec(K, 0.7))
        assert all(t == pytest.approx(0.25, abs=1e-15) for t in res.terms)
        assert res.margin == pytest.approx(0.25 - (2 * K + 1) / 4, abs=1e-12)


def test_result_invariants():
    rng = np.random.default_rng(5)
    from conftest import random_density_matrix

    for _ in range(30):
        rho = random_density_matrix(rng)
        res = evaluate_ladder(rho, LadderSpec(int(rng.integers(1, 12)), float(rng.uniform(0.01, 0.99))))
        assert res.script_p == pytest.approx(sum(res.terms), abs=1e-12)
        assert all(0 <= t <= 1 for t in (res.p_k, *res.terms))


def test_pk_ideal_endpoints():
    assert hardy.pk_closed_form(3, 0.0) == 0
    assert hardy.pk_closed_form(3, 1.0) == 0
    assert pk_ideal(LadderSpec(3, 1e-9)) == pytest.approx(0, abs=1e-17)


def test_pk_ideal_k1():
    spec = LadderSpec(1, 0.5)
    assert pk_ideal(spec) == pytest.approx(evaluate_ladder(ladder_state(0.5), spec).p_k, abs=1e-12)


def test_pk_ideal_randomized():
    rng = np.random.default_rng(11)
    for _ in range(100):
        spec = LadderSpec(int(rng.integers(1, 26)), float(rng.uniform(1e-3, 1 - 1e-3)))
        assert pk_ideal(spec) == pytest.approx(evaluate_ladder(ladder_state(spec.gamma), spec).p_k, abs=1e-10)


def test_optimize_k1_matches_grid_and_closed_form():
    r = optimize_gamma(1)
    g_grid, p_grid = grid_oracle(1)
    assert r.gamma == pytest.approx(g_grid, abs=1e-4)
    assert r.value == pytest.approx(0.09017, abs=1e-5)
    assert r.value == pytest.approx((5 * math.sqrt(5) - 11) / 2, abs=1e-12)
    assert r.value >= p_grid - 1e-12


def test_optimize_k20():
    r = optimize_gamma(20)
    assert 0.40 <= r.value <= 0.45
    assert r.gamma == pytest.approx(grid_oracle(20)[0], abs=1e-4)


def test_optimize_monotone_and_bounded():
    vals = [optimize_gamma(K).value for K in (1, 2, 4, 5, 10, 20, 60)]
    assert all(b > a for a, b in zip(vals, vals[1:]))
    assert max(vals) < 0.5


def test_optimize_deterministic():
    a = optimize_gamma(7, NoiseModel(0.95))
    b = optimize_gamma(7, NoiseModel(0.95))
    assert (a.gamma, a.value) == (b.gamma, b.value)


def test_optimize_margin_with_noise():
    noise = NoiseModel(0.97)
    r = optimize_gamma(5, noise, objective="margin")
    g = np.linspace(0.01, 0.99, 981)
    brute = [hardy._evaluate(ladder_state(x, noise=noise), 5, x).margin for x in g]
    assert r.value >= max(brute) - 1e-12
    assert r.gamma == pytest.approx(g[int(np.argmax(brute))], abs=2e-3)


def test_optimize_fallback_on_multimodal(monkeypatch):
    def bumpy(K, objective, phi, noise):
        return lambda g: math.exp(-((g - 0.2) / 0.02) ** 2) + 1.5 * math.exp(-((g - 0.8) / 0.02) ** 2)

    monkeypatch.setattr(hardy, "_objective", bumpy)
    r = optimize_gamma(3)
    assert r.metadata["fallback"]
    assert r.gamma == pytest.approx(0.8, abs=1e-6)


def test_golden_section_tie_prefers_lower():
    x, fx, _ = hardy.golden_section_max(lambda g: 1.0, 0.0, 1.0, 1e-6)
    assert x < 1e-5


def test_bad_objective():
    with pytest.raises(ValueError):
        optimize_gamma(2, objective="nope")


@pytest.mark.parametrize(
    "pk,script,expected,tol",
    [
        ((0.2586, 0.0041), (0.1213, 0.0022), 29.5, 0.05),
        ((0.3152, 0.0050), (0.1184, 0.0022), 36.0, 0.05),
        ((0.3402, 0.0045), (0.2288, 0.0015), 23.5, 0.05),
        ((0.4132, 0.0053), (0.2439, 0.0016), 30.6, 0.05),
    ],
)
def test_violation_sigma_published(pk, script, expected, tol):
    assert violation_sigma(pk, script) == pytest.approx(expected, abs=tol)


def test_violation_sigma_equal():
    assert violation_sigma((0.2, 0.01), (0.2, 0.02)) == 0


@pytest.mark.parametrize("K", [1, 2, 3])
def test_lhv_never_violates(K):
    for gamma in (0.2, 0.5, 0.9):
        m = lhv_margins(K, gamma)
        assert len(m) == 2 ** (2 * K + 2)
        assert m.max() <= 0


def test_lhv_zero_margin_reached():
    # the bound is tight: some local assignments sit exactly on it
    assert lhv_margins(2).max() == 0


def test_quantum_exceeds_every_local_assignment():
    spec = LadderSpec(3, 0.6)
    assert evaluate_ladder(ladder_state(0.6), spec).margin > lhv_margins(3, 0.6).max()


@settings(deadline=None, max_examples=30)
@given(st.floats(0.0, 0.3))
def test_phase_offset_reduces_pk_margin(offset):
    spec = LadderSpec(4, 0.68)
    ideal = evaluate_ladder(ladder_state(0.68), spec).margin
    tilted = evaluate_ladder(ladder_state(0.68, math.pi + offset), spec).margin
    assert tilted <= ideal + 1e-12
