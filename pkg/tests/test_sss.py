import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from sssanc.core import UNIT, ControllerState, Plant, ScalingKind, anc_step
from sssanc.errors import ConfigError, TrendFault
from sssanc.paths import preset_path
from sssanc.sss import (FullMsdOracle, SssState, full_matrix_msd_step, geometric_steps,
                        msd_trend_step, msd_trend_value, select_step, sss_iteration,
                        validate_candidates)

CANDS = (0.6, 0.3, 0.15, 0.075)


def trend_oracle(P, mu, xf, s2, g):
    """Element-by-element transcription of the diagonal trend recursion."""
    L = len(P)
    R = [v * v for v in xf]
    n2 = sum(R)
    cross = sum(R[j] * P[j] for j in range(L))
    q = mu * mu * g * g / (n2 * n2)
    return [(1 - 2 * mu * g * R[i] / n2) * P[i] + q * s2 * R[i] + 2 * q * R[i] * P[i] * R[i]
            + q * R[i] * cross for i in range(L)]


def full_oracle(P, mu, xf, s2, g):
    """Triple-loop transcription of the full covariance recursion."""
    L = len(xf)
    R = [[xf[i] * xf[j] for j in range(L)] for i in range(L)]
    n2 = sum(v * v for v in xf)
    RP = [[sum(R[i][k] * P[k][j] for k in range(L)) for j in range(L)] for i in range(L)]
    RPR = [[sum(RP[i][k] * R[k][j] for k in range(L)) for j in range(L)] for i in range(L)]
    tr = sum(RP[i][i] for i in range(L))
    q = mu * mu * g * g / n2 ** 2
    return np.array([[P[i][j] - 2 * mu * g * RP[i][j] / n2 + q * s2 * R[i][j]
                      + 2 * q * RPR[i][j] + q * R[i][j] * tr for j in range(L)]
                     for i in range(L)])


def test_hand_evaluated_single_tap():
    assert msd_trend_step([1.0], 0.5, [1.0], 1.0, 1.0)[0] == pytest.approx(1.0, abs=1e-15)
    P = full_matrix_msd_step([[1.0]], 0.5, [1.0], 1.0, 1.0)
    assert np.trace(P) == pytest.approx(1.0, abs=1e-15)


def test_zero_step_or_zero_scaling_leaves_trend():
    rng = np.random.default_rng(0)
    P = rng.uniform(0, 2, 16)
    xf = rng.standard_normal(16)
    assert np.array_equal(msd_trend_step(P, 0.0, xf, 0.3), P)
    assert np.array_equal(msd_trend_step(P, 0.6, xf, 0.3, g=0.0), P)
    M = np.diag(P)
    assert np.array_equal(full_matrix_msd_step(M, 0.0, xf, 0.3), M)


def test_silent_tick_skips_update():
    P = np.full(4, 2.0)
    assert np.array_equal(msd_trend_step(P, 0.6, np.zeros(4), 1.0, epsilon=1e-10), P)
    s = SssState(CANDS, 4)
    before = s.Pbar.copy()
    sel = s.selected.copy()
    sss_iteration(s, np.zeros(4), 1.0)
    assert np.array_equal(s.Pbar, before) and s.selected == sel


@settings(max_examples=60, deadline=None)
@given(arrays(float, 8, elements=st.floats(0, 10)), st.floats(0, 1.7),
       arrays(float, 8, elements=st.floats(-3, 3)), st.floats(0, 5), st.floats(0, 1))
def test_diagonal_recursion_matches_loop_oracle(P, mu, xf, s2, g):
    if np.sum(xf * xf) < 1e-6:
        return
    got = msd_trend_step(P, mu, xf, s2, g)
    want = trend_oracle(P.tolist(), mu, xf.tolist(), s2, g)
    np.testing.assert_allclose(got, want, rtol=1e-10, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 5), st.floats(0.01, 1.5), st.floats(0, 2), st.floats(0, 1),
       st.integers(0, 2**32 - 1))
def test_full_matrix_matches_loop_oracle(L, mu, s2, g, seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((L, L))
    P = A @ A.T
    xf = rng.standard_normal(L)
    np.testing.assert_allclose(full_matrix_msd_step(P, mu, xf, s2, g),
                               full_oracle(P.tolist(), mu, xf.tolist(), s2, g),
                               rtol=1e-10, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(arrays(float, 50, elements=st.floats(-3, 3)), arrays(float, 50, elements=st.floats(0, 2)),
       st.floats(0.01, 1.5), st.floats(0.1, 10), st.floats(0, 1))
def test_single_tap_diagonal_equals_full(xs, s2s, mu, rho, g):
    P = np.array([rho])
    M = np.array([[rho]])
    for x, s2 in zip(xs, s2s):
        if x * x <= 1e-10:
            continue
        P = msd_trend_step(P, mu, [x], s2, g)
        M = full_matrix_msd_step(M, mu, [x], s2, g)
        assert abs(msd_trend_value(P) - np.trace(M)) <= 1e-12 * max(1.0, abs(P[0]))


def test_trend_value():
    assert msd_trend_value(np.ones(16)) == 16
    assert msd_trend_value(np.zeros(7)) == 0
    P = np.random.default_rng(1).standard_normal(13)
    total = 0.0
    for v in P:
        total += v
    assert msd_trend_value(P) == pytest.approx(total, abs=1e-12)


def test_select_step_rules():
    assert select_step([0.5, 0.3, 0.4], [0.6, 0.3, 0.15]) == (0.3, 1)
    assert select_step([7.0], [0.2]) == (0.2, 0)
    assert select_step([1.0, 1.0, 1.0], [0.6, 0.3, 0.15]) == (0.15, 2)
    assert select_step([2.0, 1.0, 1.0, 3.0], CANDS)[1] == 2
    with pytest.raises(TrendFault):
        select_step([1.0, np.nan], [0.6, 0.3])
    mu, idx = select_step(np.array([[1.0, 0.5], [0.5, 1.0]]), [0.6, 0.3])
    assert idx.tolist() == [1, 0] and mu.tolist() == [0.3, 0.6]


def test_candidate_validation():
    assert validate_candidates(CANDS, 16) == CANDS
    for bad in ((0.6, 0.6), (0.3, 0.6), (2.0,), (0.0,), ()):
        with pytest.raises(ConfigError):
            validate_candidates(bad, 16)
    assert geometric_steps(0.4, 3, 0.6) == pytest.approx((0.4, 0.24, 0.144))
    assert geometric_steps(0.6, 4) == CANDS


def test_state_initialization_and_rho_warning():
    s = SssState(CANDS, 16, rho=2.5)
    assert np.all(s.Pbar == 2.5) and s.Pbar.shape == (4, 16)
    assert np.all(s.J == 40.0)
    assert s.selected == 3 and s.mu == 0.075
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        SssState(CANDS, 16, rho=0.1)
        SssState(CANDS, 16, rho=100)
    with pytest.warns(UserWarning):
        SssState(CANDS, 16, rho=1000)
    with pytest.raises(ConfigError):
        SssState(CANDS, 16, rho=0)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_trend_consistency_and_nonnegativity(seed):
    rng = np.random.default_rng(seed)
    s = SssState((0.5, 0.25, 0.1), 8, rho=rng.uniform(0.1, 100))
    for _ in range(50):
        sss_iteration(s, rng.standard_normal(8) * rng.uniform(0.01, 10), rng.uniform(0, 3),
                      rng.uniform(0, 1))
        assert np.array_equal(s.J, msd_trend_value(s.Pbar))
        assert np.all(s.Pbar >= 0)


def test_clamp_flag_keeps_trends_nonnegative():
    rng = np.random.default_rng(5)
    s = SssState(CANDS, 16, clamp=True)
    for _ in range(300):
        sss_iteration(s, rng.standard_normal(16), 1e-3)
        assert np.all(s.Pbar >= 0)


def test_batched_iteration_matches_single_rows():
    rng = np.random.default_rng(6)
    xs = rng.standard_normal((100, 3, 16))
    s2 = rng.uniform(0, 1, (100, 3))
    batch = SssState(CANDS, 16, batch_shape=(3,))
    singles = [SssState(CANDS, 16) for _ in range(3)]
    for m in range(100):
        mus = sss_iteration(batch, xs[m], s2[m])
        for r in range(3):
            assert sss_iteration(singles[r], xs[m, r], s2[m, r]) == mus[r]
    for r in range(3):
        assert np.array_equal(singles[r].Pbar, batch.Pbar[r])


def run(step, kind=UNIT, n=800, seed=0):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(n)
    plant = Plant(preset_path("primary"), preset_path("secondary"))
    st_ = ControllerState(16, 5, 5)
    es = [anc_step(plant, st_, preset_path("secondary_estimate"), x[m], 0.0, step, kind).e
          for m in range(n)]
    return np.array(es), st_.w


def test_single_candidate_equals_fixed_step():
    e1, w1 = run(SssState((0.3,), 16))
    e2, w2 = run(0.3)
    assert np.array_equal(e1, e2) and np.array_equal(w1, w2)


def test_unit_robust_scaling_equals_plain():
    # a huge kernel width makes the correntropy factor exactly 1.0
    e1, w1 = run(SssState(CANDS, 16), ScalingKind.mcc(1e300))
    e2, w2 = run(SssState(CANDS, 16), UNIT)
    assert np.array_equal(e1, e2) and np.array_equal(w1, w2)


def test_full_oracle_state():
    o = FullMsdOracle(CANDS, 4, rho=2.0)
    assert np.all(o.J == 8.0) and o.selected == 3
    for P in o.P:
        assert np.array_equal(P, P.T)
    assert o.step(np.zeros(4), 1.0) == 3
    rng = np.random.default_rng(7)
    s = SssState(CANDS, 1, rho=2.0)
    o = FullMsdOracle(CANDS, 1, rho=2.0)
    for _ in range(200):
        x = rng.standard_normal(1)
        s2 = rng.uniform(0, 1)
        sss_iteration(s, x, s2)
        assert o.step(x, s2) == s.selected
        np.testing.assert_allclose(o.J, s.J, rtol=1e-12, atol=1e-12)
