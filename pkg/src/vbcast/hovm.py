"""Hermitian operator-valued measure over pure states and the induced map.

Over Haar-random pure states psi the pairs (M_psi, rho_psi) with

    rho_psi = (1/2) [ (d+2) psi - I ],      M_psi = d * rho_psi

form an operator-valued measure whose measure-and-prepare average

    M(rho) = Integral  Tr[M_psi rho] * (rho_psi (x) rho_psi)  d psi

is a virtual broadcaster up to depolarizing noise: the canonical B is the
affine combination  p * M + (1 - p) * M'  with  p = 4(d+1)/(d+2)^2  and M'
the fully depolarizing map to I/d (x) I/d.  The integral reduces to Haar
moment operators of order <= 3, so everything here is exact; Monte-Carlo
sampling of the same integral is provided for cross-checks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .densemat import DEFAULT_TOL, Operator, Rng, identity, kron, swap
from .mcstats import MatrixSamplingEstimate, MatrixWelford
from .supermap import SuperMap


def _check_pure(psi: Operator, d: int, tol: float = DEFAULT_TOL):
    if psi.rows != d or psi.cols != d:
        raise ValueError(f"psi must be {d}x{d}, got {psi.rows}x{psi.cols}")
    if not psi.is_hermitian(tol):
        raise ValueError("psi must be Hermitian")
    if abs(psi.trace() - 1.0) > tol or np.abs(psi.mat @ psi.mat - psi.mat).max() > tol:
        raise ValueError("psi must be a rank-1 projector")


def rho_psi(psi: Operator, d: int) -> Operator:
    """Virtual state (1/2)[(d+2) psi - I]; trace 1, one negative eigenvalue."""
    _check_pure(psi, d)
    return Operator(((d + 2) * psi.mat - np.eye(d)) / 2)


def m_psi(psi: Operator, d: int) -> Operator:
    """Measure density d * rho_psi; integrates to I over Haar psi."""
    return Operator(d * rho_psi(psi, d).mat)


@dataclass(frozen=True)
class MomentOperator:
    """A Haar moment  Integral psi^(x)k d psi  together with its order."""

    order: int
    operator: Operator


def moment_operator(d: int, order: int) -> MomentOperator:
    """Exact Haar moment operators for order 1, 2, 3.

    Order 2 is (I + S)/(d(d+1)); order 3 sums all six factor permutations
    of C^d (x) C^d (x) C^d divided by d(d+1)(d+2), assembled from SWAPs.
    """
    if order == 1:
        return MomentOperator(1, Operator(np.eye(d) / d))
    s = swap(d).mat
    if order == 2:
        return MomentOperator(2, Operator((np.eye(d * d) + s) / (d * (d + 1))))
    if order == 3:
        g12 = np.kron(s, np.eye(d))
        g23 = np.kron(np.eye(d), s)
        g13 = g12 @ g23 @ g12
        odd = g12 + g23 + g13
        even = g12 @ odd
        return MomentOperator(3, Operator((odd + even) / (d * (d + 1) * (d + 2))))
    raise ValueError(f"moment operators implemented for orders 1-3, got {order}")


def _embed_pair_13(op2: np.ndarray, d: int) -> np.ndarray:
    """Lift an operator on factors (1,2) of C^d(x)3 to factors (1,3)."""
    g23 = np.kron(np.eye(d), swap(d).mat)
    return g23 @ np.kron(op2, np.eye(d)) @ g23


def exact_mp_map(d: int) -> SuperMap:
    """The measure-and-prepare average, exactly, via moment operators.

    Its Jamiolkowski operator is the third Haar moment of (d+2)psi - I
    scaled by d/8, expanded into the order-0..3 moments.
    """
    a = d + 2
    eye3 = np.eye(d**3)
    mom2 = moment_operator(d, 2).operator.mat
    mom3 = moment_operator(d, 3).operator.mat

    j2 = np.kron(mom2, np.eye(d)) + np.kron(np.eye(d), mom2) + _embed_pair_13(mom2, d)
    j1 = 3.0 / d * eye3
    j = (d / 8.0) * (a**3 * mom3 - a**2 * j2 + a * j1 - eye3)
    return SuperMap.from_jamiolkowski(d, d * d, j)


def depolarizing_mp(d: int) -> SuperMap:
    """The fully depolarizing counterpart  rho -> Tr[rho] I/d (x) I/d."""
    flat = np.eye(d * d) / (d * d)

    def action(x: Operator) -> Operator:
        return Operator(np.trace(x.mat) * flat)

    return SuperMap.from_action(d, d * d, action)


def theorem3_weight(d: int) -> float:
    """Mixing weight p = 4(d+1)/(d+2)^2 in B = p M + (1-p) M'."""
    return 4.0 * (d + 1) / (d + 2) ** 2


def verify_theorem3(d: int) -> float:
    """Max-entry residual of  C(B) = p C(M) + (1-p) C(M')."""
    from .broadcast import canonical_b

    p = theorem3_weight(d)
    mix = p * exact_mp_map(d) + (1.0 - p) * depolarizing_mp(d)
    return (canonical_b(d).choi - mix.choi).absmax()


# ---------------------------------------------------------------------------
# finite measures


@dataclass(frozen=True)
class FiniteHOVM:
    """Finite operator-valued measure: effects summing to I, trace-1 preparations.

    Preparations may be virtual (non-positive) states; only hermiticity and
    unit trace are required.
    """

    effects: tuple[Operator, ...]
    preparations: tuple[Operator, ...]

    def __post_init__(self):
        if len(self.effects) != len(self.preparations):
            raise ValueError("effects and preparations must pair up")
        if not self.effects:
            raise ValueError("measure must have at least one outcome")
        d = self.effects[0].rows
        total = np.zeros((d, d), dtype=np.complex128)
        for e in self.effects:
            if not e.is_hermitian(1e-10):
                raise ValueError("effects must be Hermitian")
            total += e.mat
        if np.abs(total - np.eye(d)).max() > 1e-10:
            raise ValueError("effects must sum to the identity within 1e-10")
        for p in self.preparations:
            if not p.is_hermitian(1e-10) or abs(p.trace() - 1.0) > 1e-10:
                raise ValueError("preparations must be Hermitian with unit trace")

    @classmethod
    def from_pure_states(cls, d: int, psis: list[Operator]) -> "FiniteHOVM":
        """Equal-weight measure over pure states; valid iff they average to I/d."""
        effects = tuple(Operator(m_psi(psi, d).mat / len(psis)) for psi in psis)
        preps = tuple(kron(rho_psi(psi, d), rho_psi(psi, d)) for psi in psis)
        return cls(effects, preps)

    def weights(self, rho: Operator) -> np.ndarray:
        """Outcome weights Tr[effect_k rho]; sum to Tr[rho]."""
        return np.array([float(np.real(np.trace(e.mat @ rho.mat))) for e in self.effects])

    def as_supermap(self) -> SuperMap:
        """The induced measure-and-prepare map."""
        d = self.effects[0].rows
        d_out = self.preparations[0].rows

        def action(x: Operator) -> Operator:
            out = np.zeros((d_out, d_out), dtype=np.complex128)
            for e, p in zip(self.effects, self.preparations):
                out += np.trace(e.mat @ x.mat) * p.mat
            return Operator(out)

        return SuperMap.from_action(d, d_out, action)


# ---------------------------------------------------------------------------
# Monte-Carlo sampling of the measure-and-prepare integral


def _check_density(rho: Operator, d: int):
    if rho.rows != d or rho.cols != d:
        raise ValueError(f"rho must be {d}x{d}")
    if not rho.is_hermitian(1e-9) or abs(rho.trace() - 1.0) > 1e-9:
        raise ValueError("rho must be a unit-trace Hermitian matrix")


def _sample_chunk(rho: np.ndarray, d: int, count: int, rng: Rng) -> np.ndarray:
    """Draw `count` samples of Tr[M_psi rho] rho_psi (x) rho_psi, shape (count, d^2, d^2)."""
    a = d + 2
    v = rng.gen.standard_normal((count, d)) + 1j * rng.gen.standard_normal((count, d))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    overlap = np.einsum("ci,ij,cj->c", v.conj(), rho, v).real
    weight = (d / 2.0) * (a * overlap - 1.0)
    proj = np.einsum("ci,cj->cij", v, v.conj())
    rp = (a * proj - np.eye(d)[np.newaxis]) / 2.0
    pair = np.einsum("cij,ckl->cikjl", rp, rp).reshape(count, d * d, d * d)
    return weight[:, np.newaxis, np.newaxis] * pair


def mc_mp_apply(
    rho: Operator, d: int, n_samples: int, rng: Rng, chunk: int = 4096
) -> MatrixSamplingEstimate:
    """Monte-Carlo estimate of exact_mp_map(rho) from Haar samples.

    Returns the entrywise mean with Welford standard errors and the exact
    map output as reference.
    """
    _check_density(rho, d)
    if n_samples < 2:
        raise ValueError("need at least 2 samples")
    acc = MatrixWelford((d * d, d * d))
    left = n_samples
    while left > 0:
        take = min(chunk, left)
        acc.update_batch(_sample_chunk(rho.mat, d, take, rng))
        left -= take
    se_re, se_im = acc.stderr()
    return MatrixSamplingEstimate(
        mean=Operator(acc.mean),
        stderr_re=se_re,
        stderr_im=se_im,
        n=acc.n,
        exact=exact_mp_map(d).apply(rho),
    )


def sample_mp_blocks(
    rho: Operator, d: int, n_samples: int, n_blocks: int, rng: Rng
) -> list[tuple[int, MatrixSamplingEstimate]]:
    """Blockwise running estimates (for CSV traces); block index starts at 1."""
    _check_density(rho, d)
    if n_blocks < 1 or n_samples < 2 * n_blocks:
        raise ValueError("need at least 2 samples per block")
    exact = exact_mp_map(d).apply(rho)
    acc = MatrixWelford((d * d, d * d))
    per = n_samples // n_blocks
    out = []
    for b in range(1, n_blocks + 1):
        take = per if b < n_blocks else n_samples - per * (n_blocks - 1)
        acc.update_batch(_sample_chunk(rho.mat, d, take, rng))
        se_re, se_im = acc.stderr()
        out.append(
            (b, MatrixSamplingEstimate(Operator(acc.mean), se_re, se_im, acc.n, exact))
        )
    return out


def write_sampling_csv(fp, blocks: list[tuple[int, MatrixSamplingEstimate]]):
    """CSV rows (sample_block, entry_row, entry_col, re_mean, im_mean, re_stderr, im_stderr)."""
    fp.write("sample_block,entry_row,entry_col,re_mean,im_mean,re_stderr,im_stderr\n")
    for b, est in blocks:
        m = est.mean.mat
        for r in range(m.shape[0]):
            for c in range(m.shape[1]):
                fp.write(
                    f"{b},{r},{c},{float(m[r, c].real)!r},{float(m[r, c].imag)!r},"
                    f"{float(est.stderr_re[r, c])!r},{float(est.stderr_im[r, c])!r}\n"
                )
