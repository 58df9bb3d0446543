"""Quasi-probability simulation of HPTP maps from CPTP decompositions.

An HPTP map written as  sum_i w_i E_i  with signed weights and physical
channels can be estimated by sampling channel i with probability
|w_i| / L, L = sum |w_i|, and reweighting outcomes by L * sign(w_i).
Estimates of  Tr[m(rho) (O1 (x) O2)]  are unbiased with standard
deviation bounded by L * ||O1 (x) O2||_inf per shot -- so L (the
"overhead") is the simulation cost of virtuality.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .densemat import Operator, Rng, kron
from .mcstats import SamplingEstimate
from .supermap import AffineDecomposition, SuperMap


@dataclass(frozen=True)
class QuasiSampler:
    """Signed mixture of channels reproducing a target HPTP map."""

    components: tuple[tuple[float, SuperMap], ...]
    target: SuperMap

    def __post_init__(self):
        if not self.components:
            raise ValueError("sampler needs at least one component")
        weights = np.array([w for w, _ in self.components])
        if np.abs(weights).sum() < 1e-14:
            raise ValueError("all-zero weights cannot represent a map")
        recon = np.zeros_like(self.target.choi.mat)
        for w, ch in self.components:
            if (ch.d_in, ch.d_out) != (self.target.d_in, self.target.d_out):
                raise ValueError("component dimensions do not match the target")
            if not (ch.is_cp(1e-8) and ch.is_tp(1e-8)):
                raise ValueError("components must be CPTP within 1e-8")
            recon = recon + w * ch.choi.mat
        err = float(np.abs(recon - self.target.choi.mat).max())
        if err > 1e-10:
            raise ValueError(f"weights do not reconstruct the target Choi (residual {err:.2e})")

    @property
    def l1_weight(self) -> float:
        return float(sum(abs(w) for w, _ in self.components))


def sampler_from_decomposition(dec: AffineDecomposition) -> QuasiSampler:
    """Sampler for lambda_plus * plus - lambda_minus * minus."""
    return QuasiSampler(
        components=(
            (float(dec.lambda_plus), dec.map_plus),
            (-float(dec.lambda_minus), dec.map_minus),
        ),
        target=dec.combined(),
    )


def overhead(s: QuasiSampler) -> float:
    """The l1 sampling overhead L."""
    return s.l1_weight


def _validate_obs(rho: Operator, o1: Operator, o2: Operator, d: int):
    if rho.rows != d or not rho.is_hermitian(1e-9) or abs(rho.trace() - 1.0) > 1e-9:
        raise ValueError("rho must be a unit-trace Hermitian d x d matrix")
    for o in (o1, o2):
        if o.rows != o.cols or not o.is_hermitian(1e-9):
            raise ValueError("observables must be Hermitian")


def estimate_expectation(
    s: QuasiSampler,
    rho: Operator,
    o1: Operator,
    o2: Operator,
    n: int,
    rng: Rng,
    shot_noise: bool = False,
) -> SamplingEstimate:
    """Unbiased estimate of Tr[target(rho) (O1 (x) O2)] from n channel draws.

    In the default mode each draw contributes the exact component
    expectation (sampling noise from the signed mixture only); with
    ``shot_noise`` each draw also samples an eigenvalue of the observable
    from the Born rule of the drawn channel's output.
    """
    if n < 2:
        raise ValueError("need at least 2 draws")
    d = s.target.d_in
    _validate_obs(rho, o1, o2, d)
    obs = kron(o1, o2).mat
    exact = float(np.real(np.trace(s.target.apply(rho).mat @ obs)))

    weights = np.array([w for w, _ in s.components])
    l1 = np.abs(weights).sum()
    probs = np.abs(weights) / l1
    signs = np.sign(weights)
    outs = [ch.apply(rho).mat for _, ch in s.components]

    if not shot_noise:
        vals = l1 * signs * np.array([np.real(np.trace(o @ obs)) for o in outs])
        draws = vals[rng.gen.choice(len(vals), size=n, p=probs)]
    else:
        evals, evecs = np.linalg.eigh(obs)
        # Joint distribution over (component, observable eigenvector).
        born = np.array(
            [np.real(np.einsum("ji,jk,ki->i", evecs.conj(), o, evecs)) for o in outs]
        )
        born = np.clip(born, 0.0, None)
        born /= born.sum(axis=1, keepdims=True)
        joint = (probs[:, np.newaxis] * born).reshape(-1)
        joint = joint / joint.sum()
        flat = rng.gen.choice(joint.size, size=n, p=joint)
        comp, eig = np.divmod(flat, evals.size)
        draws = l1 * signs[comp] * evals[eig]

    mean = float(draws.mean())
    stderr = float(draws.std(ddof=1) / np.sqrt(n))
    return SamplingEstimate(mean=mean, stderr=stderr, n=n, exact=exact)


def estimate_with_trace(
    s: QuasiSampler,
    rho: Operator,
    o1: Operator,
    o2: Operator,
    n: int,
    rng: Rng,
    n_checkpoints: int = 20,
    shot_noise: bool = False,
) -> tuple[SamplingEstimate, list[tuple[int, float, float]]]:
    """Like :func:`estimate_expectation`, also returning running (n, mean, stderr) rows."""
    if n < 2:
        raise ValueError("need at least 2 draws")
    d = s.target.d_in
    _validate_obs(rho, o1, o2, d)
    obs = kron(o1, o2).mat
    exact = float(np.real(np.trace(s.target.apply(rho).mat @ obs)))

    weights = np.array([w for w, _ in s.components])
    l1 = np.abs(weights).sum()
    probs = np.abs(weights) / l1
    signs = np.sign(weights)
    outs = [ch.apply(rho).mat for _, ch in s.components]
    vals = l1 * signs * np.array([np.real(np.trace(o @ obs)) for o in outs])
    if shot_noise:
        est = estimate_expectation(s, rho, o1, o2, n, rng, shot_noise=True)
        return est, [(n, est.mean, est.stderr)]
    draws = vals[rng.gen.choice(len(vals), size=n, p=probs)]

    marks = sorted({max(2, (n * (k + 1)) // n_checkpoints) for k in range(n_checkpoints)})
    csum = np.cumsum(draws)
    csum2 = np.cumsum(draws**2)
    rows = []
    for m in marks:
        mean = csum[m - 1] / m
        var = (csum2[m - 1] - m * mean**2) / (m - 1)
        rows.append((m, float(mean), float(np.sqrt(max(var, 0.0) / m))))
    final = SamplingEstimate(mean=rows[-1][1], stderr=rows[-1][2], n=n, exact=exact)
    return final, rows


def write_trace_csv(fp, rows: list[tuple[int, float, float]]):
    """CSV rows (n, running_mean, running_stderr)."""
    fp.write("n,running_mean,running_stderr\n")
    for m, mean, se in rows:
        fp.write(f"{m},{mean!r},{se!r}\n")
