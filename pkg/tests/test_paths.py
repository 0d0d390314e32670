import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from sssanc.errors import ConfigError, DivergenceError
from sssanc.paths import DelayLine, FirPath, fir_batch, fir_step, pairwise_sum, preset_path

PRIMARY = [0.01, -0.05, 0.02, 0.75, -0.4, -0.5, -0.2, -0.05, 0.3, 0.005]
SECONDARY = [0.01, -0.01, 0.9, 0.02, -0.5]
ESTIMATE = [-0.0455, -0.0453, 0.8683, 0.0399, -0.518]

finite = st.floats(-10, 10, allow_nan=False)


def conv_oracle(c, x):
    """Direct double loop, zero prehistory, truncated to len(x)."""
    out = []
    for n in range(len(x)):
        acc = 0.0
        for i in range(len(c)):
            if n - i >= 0:
                acc += c[i] * x[n - i]
        out.append(acc)
    return np.array(out)


def stream(path, x):
    line = DelayLine(path.length)
    return np.array([fir_step(path, line, v) for v in x])


def test_fir_path_invariants():
    p = FirPath([1, 2, 3])
    assert p.length == 3 and p.coeffs == (1.0, 2.0, 3.0)
    with pytest.raises(ConfigError):
        FirPath([])
    with pytest.raises(ConfigError):
        FirPath([1.0, np.inf])


def test_identity_path_streams_input():
    assert stream(FirPath([1, 0, 0]), [3, 5, 7]).tolist() == [3, 5, 7]


def test_primary_impulse_response():
    p = preset_path("primary")
    x = np.zeros(14)
    x[0] = 1
    out = stream(p, x)
    assert out[:10].tolist() == PRIMARY
    assert np.all(out[10:] == 0)


def test_presets_are_published_values():
    assert list(preset_path("primary").coeffs) == PRIMARY
    assert list(preset_path("secondary").coeffs) == SECONDARY
    assert list(preset_path("secondary_estimate").coeffs) == ESTIMATE
    with pytest.raises(ConfigError):
        preset_path("tertiary")


def test_fir_batch_examples():
    assert fir_batch(FirPath([2]), [1, 2, 3]).tolist() == [2, 4, 6]
    x = np.zeros(5)
    x[0] = 1
    assert fir_batch(preset_path("secondary"), x).tolist() == SECONDARY


def test_fir_batch_matches_double_loop():
    rng = np.random.default_rng(1)
    x = rng.standard_normal(64)
    c = rng.standard_normal(8)
    np.testing.assert_allclose(fir_batch(FirPath(c), x), conv_oracle(c, x), rtol=0, atol=1e-12)


def test_non_finite_sample_rejected():
    p = FirPath([1.0, 0.5])
    line = DelayLine(2)
    with pytest.raises(DivergenceError):
        fir_step(p, line, np.nan)
    with pytest.raises(DivergenceError):
        fir_batch(p, [1.0, np.inf])


def test_delay_line_zero_prehistory_and_order():
    line = DelayLine(3)
    assert line.window.tolist() == [0, 0, 0]
    for v in (1, 2):
        line.push(v)
    assert line.window.tolist() == [2, 1, 0]
    for v in (3, 4, 5):
        line.push(v)
    assert line.window.tolist() == [5, 4, 3]


def test_delay_line_batch_reset_mask():
    line = DelayLine(2, (3,))
    line.push(np.array([1.0, 2.0, 3.0]))
    line.reset(np.array([False, True, False]))
    assert line.window[:, 0].tolist() == [1.0, 0.0, 3.0]


@given(arrays(float, st.integers(1, 40), elements=finite))
def test_pairwise_sum_close_to_sum(a):
    assert pairwise_sum(a) == pytest.approx(float(np.sum(a)), abs=1e-9)


@settings(max_examples=50, deadline=None)
@given(arrays(float, st.integers(1, 60), elements=finite),
       arrays(float, st.integers(1, 12), elements=finite))
def test_streaming_equals_batch_exactly(x, c):
    p = FirPath(c)
    assert np.array_equal(stream(p, x), fir_batch(p, x))


@settings(max_examples=50, deadline=None)
@given(arrays(float, 32, elements=finite), arrays(float, 32, elements=finite),
       arrays(float, st.integers(1, 10), elements=finite), finite, finite)
def test_linearity(x, y, c, a, b):
    p = FirPath(c)
    lhs = fir_batch(p, a * x + b * y)
    rhs = a * fir_batch(p, x) + b * fir_batch(p, y)
    scale = 1 + np.abs(c).sum() * (abs(a) * np.abs(x).max() + abs(b) * np.abs(y).max())
    np.testing.assert_allclose(lhs, rhs, rtol=0, atol=1e-12 * scale)


@given(arrays(float, st.integers(1, 10), elements=finite))
def test_impulse_recovers_coefficients(c):
    x = np.zeros(len(c) + 3)
    x[0] = 1
    out = fir_batch(FirPath(c), x)
    assert np.array_equal(out[: len(c)], c) and np.all(out[len(c):] == 0)


def test_batched_stream_rows_match_single_stream():
    rng = np.random.default_rng(3)
    X = rng.standard_normal((5, 40))
    p = FirPath(rng.standard_normal(7))
    line = DelayLine(7, (5,))
    out = np.stack([fir_step(p, line, X[:, n]) for n in range(40)], axis=1)
    for r in range(5):
        assert np.array_equal(out[r], fir_batch(p, X[r]))
