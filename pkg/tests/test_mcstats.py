import numpy as np
import pytest
from numpy.testing import assert_allclose

from vbcast.densemat import Operator, Rng
from vbcast.mcstats import MatrixSamplingEstimate, MatrixWelford, SamplingEstimate


def test_welford_matches_direct_formulas():
    rng = Rng(1)
    xs = rng.gen.standard_normal((500, 3, 3)) + 1j * rng.gen.standard_normal((500, 3, 3))
    acc = MatrixWelford((3, 3))
    # uneven chunking must not change the result
    for lo, hi in ((0, 7), (7, 200), (200, 201), (201, 500)):
        acc.update_batch(xs[lo:hi])
    assert acc.n == 500
    assert_allclose(acc.mean, xs.mean(axis=0), atol=1e-12)
    se_re, se_im = acc.stderr()
    assert_allclose(se_re, xs.real.std(axis=0, ddof=1) / np.sqrt(500), atol=1e-12)
    assert_allclose(se_im, xs.imag.std(axis=0, ddof=1) / np.sqrt(500), atol=1e-12)


def test_welford_empty_batch_is_noop():
    acc = MatrixWelford((2, 2))
    acc.update_batch(np.zeros((0, 2, 2), dtype=complex))
    assert acc.n == 0


def test_stderr_needs_two_samples():
    acc = MatrixWelford((2, 2))
    acc.update_batch(np.ones((1, 2, 2), dtype=complex))
    with pytest.raises(ValueError):
        acc.stderr()


def test_scalar_zscore():
    est = SamplingEstimate(mean=1.1, stderr=0.05, n=100, exact=1.0)
    assert est.zscore() == pytest.approx(2.0)
    exactish = SamplingEstimate(mean=1.0, stderr=0.0, n=100, exact=1.0)
    assert exactish.zscore() == 0.0
    broken = SamplingEstimate(mean=2.0, stderr=0.0, n=100, exact=1.0)
    assert broken.zscore() == np.inf
    with pytest.raises(ValueError):
        SamplingEstimate(mean=1.0, stderr=0.1, n=10).zscore()


def test_scalar_json():
    doc = SamplingEstimate(mean=0.5, stderr=0.1, n=9, exact=0.4).to_json()
    assert doc == {"mean": 0.5, "stderr": 0.1, "n": 9, "exact": 0.4}


def test_matrix_max_zscore():
    mean = Operator([[1.0, 0.0], [0.0, 1.0]])
    exact = Operator([[1.0, 0.0], [0.0, 0.9]])
    se = 0.02 * np.ones((2, 2))
    est = MatrixSamplingEstimate(mean=mean, stderr_re=se, stderr_im=se, n=50, exact=exact)
    assert est.max_zscore() == pytest.approx(5.0)
    with pytest.raises(ValueError):
        MatrixSamplingEstimate(mean=mean, stderr_re=se, stderr_im=se, n=50).max_zscore()


def test_matrix_zero_stderr_handling():
    mean = Operator([[1.0, 0.0], [0.0, 1.0]])
    se = np.zeros((2, 2))
    same = MatrixSamplingEstimate(mean=mean, stderr_re=se, stderr_im=se, n=5, exact=mean)
    assert same.max_zscore() == 0.0
    other = MatrixSamplingEstimate(
        mean=mean, stderr_re=se, stderr_im=se, n=5, exact=Operator(np.zeros((2, 2)))
    )
    assert other.max_zscore() == np.inf
