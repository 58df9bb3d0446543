"""Streaming Monte-Carlo statistics.

Welford-style accumulation of entrywise means and variances for complex
matrix samples, with pairwise chunk merging so accumulation order does not
matter beyond float roundoff.  Real and imaginary parts get separate
standard errors, since downstream gates check them separately.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .densemat import Operator


class MatrixWelford:
    """Entrywise running mean / variance over complex matrix samples."""

    def __init__(self, shape: tuple[int, int]):
        self.n = 0
        self.mean = np.zeros(shape, dtype=np.complex128)
        self.m2_re = np.zeros(shape)
        self.m2_im = np.zeros(shape)

    def update_batch(self, xs: np.ndarray):
        """Merge a batch of samples, shape (k, rows, cols)."""
        k = xs.shape[0]
        if k == 0:
            return
        bmean = xs.mean(axis=0)
        bm2_re = ((xs.real - bmean.real) ** 2).sum(axis=0)
        bm2_im = ((xs.imag - bmean.imag) ** 2).sum(axis=0)
        self._merge(k, bmean, bm2_re, bm2_im)

    def _merge(self, k, bmean, bm2_re, bm2_im):
        if self.n == 0:
            self.n, self.mean, self.m2_re, self.m2_im = k, bmean, bm2_re, bm2_im
            return
        total = self.n + k
        delta = bmean - self.mean
        factor = self.n * k / total
        self.mean = self.mean + delta * (k / total)
        self.m2_re = self.m2_re + bm2_re + delta.real**2 * factor
        self.m2_im = self.m2_im + bm2_im + delta.imag**2 * factor
        self.n = total

    def stderr(self) -> tuple[np.ndarray, np.ndarray]:
        """(re, im) standard errors of the mean; requires n >= 2."""
        if self.n < 2:
            raise ValueError("need at least 2 samples for a standard error")
        scale = 1.0 / (self.n * (self.n - 1))
        return np.sqrt(self.m2_re * scale), np.sqrt(self.m2_im * scale)


@dataclass(frozen=True)
class SamplingEstimate:
    """Scalar Monte-Carlo estimate with its standard error and exact reference."""

    mean: float
    stderr: float
    n: int
    exact: float | None = None

    def zscore(self) -> float:
        """|mean - exact| in units of stderr (0 when both deviations vanish)."""
        if self.exact is None:
            raise ValueError("no exact reference recorded")
        delta = abs(self.mean - self.exact)
        if self.stderr == 0.0:
            return 0.0 if delta < 1e-12 else np.inf
        return delta / self.stderr

    def to_json(self) -> dict:
        return {"mean": self.mean, "stderr": self.stderr, "n": self.n, "exact": self.exact}


@dataclass(frozen=True)
class MatrixSamplingEstimate:
    """Entrywise Monte-Carlo estimate of a matrix, with per-entry errors."""

    mean: Operator
    stderr_re: np.ndarray
    stderr_im: np.ndarray
    n: int
    exact: Operator | None = None

    def max_zscore(self) -> float:
        """Worst entrywise deviation from ``exact`` in standard-error units."""
        if self.exact is None:
            raise ValueError("no exact reference recorded")
        delta = self.mean.mat - self.exact.mat
        z_re = _z(np.abs(delta.real), self.stderr_re)
        z_im = _z(np.abs(delta.imag), self.stderr_im)
        return float(max(z_re.max(), z_im.max()))


def _z(delta: np.ndarray, stderr: np.ndarray) -> np.ndarray:
    z = np.zeros_like(delta)
    live = stderr > 0
    z[live] = delta[live] / stderr[live]
    z[~live & (delta > 1e-12)] = np.inf
    return z
