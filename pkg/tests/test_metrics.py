import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from sssanc.metrics import AnrTracker, anr_step, average_trials, true_msd

vec = arrays(float, 6, elements=st.floats(-100, 100))


def run_anr(e, d, beta=0.999):
    t = AnrTracker(beta)
    return np.array([anr_step(t, a, b) for a, b in zip(e, d)]), t


def test_anr_identical_streams_zero():
    d = np.random.default_rng(0).standard_normal(500)
    out, _ = run_anr(d, d)
    assert np.all(np.abs(out) < 1e-12)


def test_anr_proportional_streams():
    d = np.random.default_rng(1).standard_normal(5000)
    out, _ = run_anr(0.1 * d, d)
    assert out[-1] == pytest.approx(-20.0, abs=1e-9)


def test_anr_smoother_closed_form():
    beta = 0.99
    t = AnrTracker(beta)
    for m in range(200):
        anr_step(t, 0.7, 1.0)
        assert t.A_e == pytest.approx(0.7 * (1 - beta ** (m + 1)), rel=1e-12)
        assert t.A_e <= 0.7 and t.A_d <= 1.0


def test_anr_undefined_until_reference_nonzero():
    out, _ = run_anr([0.5, 0.5, 0.1], [0.0, 0.0, 1.0])
    assert math.isnan(out[0]) and math.isnan(out[1]) and math.isfinite(out[2])
    with pytest.raises(ValueError):
        AnrTracker(1.0)


@settings(max_examples=40, deadline=None)
@given(arrays(float, 30, elements=st.floats(-10, 10)), arrays(float, 30, elements=st.floats(0.1, 10)),
       st.floats(1e-3, 1e3))
def test_anr_scale_invariance(e, d, c):
    a, _ = run_anr(e, d, 0.9)
    b, _ = run_anr(c * e, c * d, 0.9)
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-9)


def test_true_msd_examples():
    assert true_msd([1.0, 2.0], [1.0, 2.0]) == 0
    assert true_msd([1.0, 0.0], [0.0, 1.0]) == 2.0
    rng = np.random.default_rng(2)
    w, u = rng.standard_normal(16), rng.standard_normal(16)
    total = 0.0
    for a, b in zip(w, u):
        total += (a - b) ** 2
    assert true_msd(w, u) == pytest.approx(total, rel=1e-14)
    with pytest.raises(ValueError):
        true_msd([1.0], [1.0, 2.0])


@given(vec, vec, vec)
def test_true_msd_symmetric_and_triangle(w, u, v):
    assert true_msd(w, u) == true_msd(u, w)
    lhs = math.sqrt(true_msd(w, u))
    assert lhs <= math.sqrt(true_msd(w, v)) + math.sqrt(true_msd(v, u)) + 1e-9


def test_average_trials():
    assert average_trials([[1.0, 2.0]]).mean.tolist() == [1.0, 2.0]
    r = average_trials([[0.0, 2.0], [2.0, 0.0]])
    assert r.mean.tolist() == [1.0, 1.0] and r.used == 2 and r.excluded == 0
    r = average_trials([[0.0], [4.0], [100.0]], diverged=[False, False, True])
    assert r.mean.tolist() == [2.0] and r.excluded == 1
    with pytest.raises(ValueError):
        average_trials([])
    with pytest.raises(ValueError):
        average_trials([[1.0]], diverged=[True])
    with pytest.raises(ValueError):
        average_trials([[1.0], [1.0, 2.0]])
