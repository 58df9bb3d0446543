"""The virtual broadcasting map, its relatives, and its characterizing axioms.

The canonical broadcaster is the HPTP map

    B(rho) = (1/2) { rho (x) I , SWAP }

whose two marginals both reproduce rho.  This module constructs B, the
optimal-cloner and antisymmetric channels whose affine combination it is,
the decohered/classical variants, and the one-parameter commutator family
B_lambda.  ``check_axioms`` measures how far any candidate map is from the
four defining conditions (broadcasting, covariance, permutation symmetry,
classical consistency), and ``verify_uniqueness`` certifies numerically
that those conditions pin down B: the induced linear system on Hermitian
Choi unknowns has trivial nullspace and B solves the affine part.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import __version__
from .densemat import (
    Operator,
    Rng,
    antisym_projector,
    haar_unitary,
    identity,
    kron,
    partial_trace,
    random_density,
    random_pure,
    swap,
    sym_projector,
    trace_norm,
)
from .supermap import AffineDecomposition, SuperMap, omega


def _require_dim(d: int):
    if d < 2:
        raise ValueError(f"broadcasting maps need dimension >= 2, got {d}")


def canonical_b(d: int) -> SuperMap:
    """The virtual broadcasting map rho -> (1/2){rho (x) I, SWAP}."""
    return family_b_lambda(d, 0.0)


def family_b_lambda(d: int, lam: float) -> SuperMap:
    """Commutator deformation (1/2){rho (x) I, S} + i*lam*[rho (x) I, S].

    HPTP and trace-preserving for every real lam; permutation-symmetric
    only at lam = 0.
    """
    _require_dim(d)
    s = swap(d).mat
    eye = np.eye(d)

    def action(rho: Operator) -> Operator:
        a = np.kron(rho.mat, eye)
        return Operator((a @ s + s @ a) / 2 + 1j * lam * (a @ s - s @ a))

    return SuperMap.from_action(d, d * d, action)


def cloner(d: int) -> SuperMap:
    """Optimal universal cloning channel  rho -> 2/(d+1) P+ (I (x) rho) P+."""
    _require_dim(d)
    p = sym_projector(d).mat
    eye = np.eye(d)

    def action(rho: Operator) -> Operator:
        return Operator(2.0 / (d + 1) * (p @ np.kron(eye, rho.mat) @ p))

    return SuperMap.from_action(d, d * d, action)


def antisym(d: int) -> SuperMap:
    """Antisymmetric counterpart  rho -> 2/(d-1) P- (I (x) rho) P-."""
    _require_dim(d)
    p = antisym_projector(d).mat
    eye = np.eye(d)

    def action(rho: Operator) -> Operator:
        return Operator(2.0 / (d - 1) * (p @ np.kron(eye, rho.mat) @ p))

    return SuperMap.from_action(d, d * d, action)


def choi_projector(d: int, sign: int) -> Operator:
    """Sandwich operator (P_s (x) I)(I (x) Omega)(P_s (x) I) behind the Choi of B_s.

    These satisfy Bhat_s Bhat_s = (d + s)/2 * Bhat_s and Bhat_+ Bhat_- = 0,
    and the cloner Chois are 2/(d + s) * Bhat_s.
    """
    _require_dim(d)
    if sign not in (+1, -1):
        raise ValueError("sign must be +1 or -1")
    p = sym_projector(d) if sign > 0 else antisym_projector(d)
    pw = kron(p, identity(d)).mat
    mid = kron(identity(d), omega(d)).mat
    return Operator(pw @ mid @ pw)


def canonical_decomposition(d: int) -> AffineDecomposition:
    """B = (d+1)/2 * cloner - (d-1)/2 * antisym, both parts CPTP."""
    return AffineDecomposition((d + 1) / 2, (d - 1) / 2, cloner(d), antisym(d))


def _basis_or_identity(d: int, basis: Operator | None) -> np.ndarray:
    if basis is None:
        return np.eye(d, dtype=np.complex128)
    if basis.rows != d or basis.cols != d:
        raise ValueError(f"basis must be {d}x{d}, got {basis.rows}x{basis.cols}")
    if not basis.is_unitary():
        raise ValueError("basis must be unitary")
    return basis.mat


def decoherence(d: int, basis: Operator | None = None) -> SuperMap:
    """Full decoherence in the given orthonormal basis (columns of ``basis``)."""
    v = _basis_or_identity(d, basis)

    def action(rho: Operator) -> Operator:
        diag = np.diagonal(v.conj().T @ rho.mat @ v)
        return Operator(v @ np.diag(diag) @ v.conj().T)

    return SuperMap.from_action(d, d, action)


def classical_bcl(d: int, basis: Operator | None = None) -> SuperMap:
    """Classical broadcaster  |b_i><b_j| -> delta_ij |b_i b_i><b_i b_i|."""
    _require_dim(d)
    v = _basis_or_identity(d, basis)

    def action(rho: Operator) -> Operator:
        out = np.zeros((d * d, d * d), dtype=np.complex128)
        for i in range(d):
            w = np.kron(v[:, i], v[:, i])
            out += (v[:, i].conj() @ rho.mat @ v[:, i]) * np.outer(w, w.conj())
        return Operator(out)

    return SuperMap.from_action(d, d * d, action)


# ---------------------------------------------------------------------------
# axiom checking


@dataclass(frozen=True)
class AxiomReport:
    """Max-absolute-entry residuals of the four broadcasting axioms."""

    broadcasting: float
    covariance: float
    permutation: float
    classical: float
    n_states: int
    n_unitaries: int
    seed: int

    def max_residual(self) -> float:
        return max(self.broadcasting, self.covariance, self.permutation, self.classical)

    def passes(self, tol: float) -> bool:
        return self.max_residual() < tol

    def to_json(self) -> dict:
        return {
            "broadcasting": self.broadcasting,
            "covariance": self.covariance,
            "permutation": self.permutation,
            "classical": self.classical,
            "n_states": self.n_states,
            "n_unitaries": self.n_unitaries,
            "seed": self.seed,
            "version": __version__,
        }


def check_axioms(
    m: SuperMap, n_states: int = 100, n_unitaries: int = 20, rng: Rng | None = None
) -> AxiomReport:
    """Measure a candidate broadcaster against the four defining axioms.

    Broadcasting is the worst trace-norm distance between either marginal
    and the input over a sample of states (alternating full-rank and pure,
    since e.g. the optimal cloner's deficit peaks on pure inputs);
    covariance is sampled over Haar unitaries; permutation symmetry and
    classical consistency are evaluated exactly on the Choi operator.
    """
    if rng is None:
        rng = Rng(0)
    d = m.d_in
    if m.d_out != d * d:
        raise ValueError(f"broadcaster must map d -> d^2, got {m.d_in} -> {m.d_out}")

    # Broadcasting: both marginals reproduce the input.
    r_bcast = 0.0
    for k in range(n_states):
        rho = random_pure(d, rng) if k % 2 else random_density(d, rng)
        out = m.apply(rho)
        m1 = partial_trace(out, (d, d), keep="first")
        m2 = partial_trace(out, (d, d), keep="second")
        r_bcast = max(r_bcast, trace_norm(m1 - rho), trace_norm(m2 - rho))

    # Covariance:  m(U rho U+) = (U (x) U) m(rho) (U (x) U)+  on matrix units.
    r_cov = 0.0
    for _ in range(n_unitaries):
        u = haar_unitary(d, rng)
        pre = SuperMap.from_action(d, d, lambda x, u=u: u @ x @ u.dagger())
        uu = kron(u, u)
        post = SuperMap.from_action(d * d, d * d, lambda x, uu=uu: uu @ x @ uu.dagger())
        delta = m.compose(pre).choi - post.compose(m).choi
        r_cov = max(r_cov, delta.absmax())

    # Permutation symmetry, exactly on the Choi (SWAP conjugation of outputs).
    sw = kron(swap(d), identity(d)).mat
    r_perm = float(np.abs(sw @ m.choi.mat @ sw - m.choi.mat).max())

    # Classical consistency:  (D (x) D) . m . D = B_cl  in the computational basis.
    dec = decoherence(d)
    chained = dec.tensor(dec).compose(m).compose(dec)
    r_cl = (chained.choi - classical_bcl(d).choi).absmax()

    return AxiomReport(
        broadcasting=float(r_bcast),
        covariance=float(r_cov),
        permutation=r_perm,
        classical=float(r_cl),
        n_states=n_states,
        n_unitaries=n_unitaries,
        seed=rng.seed,
    )


# ---------------------------------------------------------------------------
# uniqueness certificate


@dataclass(frozen=True)
class UniquenessCertificate:
    """Numerical certificate that the axioms admit exactly one solution.

    The axioms are assembled as a real linear system over the d^6 real
    parameters of a Hermitian Choi operator.  ``nullity`` counts singular
    values below 1e-8 times the largest; ``singular_value_gap`` is the
    smallest retained singular value in units of that threshold, and
    ``candidate_residual`` is the violation of the affine system by the
    canonical map's Choi.
    """

    constraint_rows: int
    unknowns: int
    nullity: int
    candidate_residual: float
    singular_value_gap: float
    n_unitaries: int
    seed: int

    def to_json(self) -> dict:
        return {
            "constraint_rows": self.constraint_rows,
            "unknowns": self.unknowns,
            "nullity": self.nullity,
            "candidate_residual": self.candidate_residual,
            "singular_value_gap": self.singular_value_gap,
            "n_unitaries": self.n_unitaries,
            "seed": self.seed,
            "version": __version__,
        }


def _coeffs_from_hermitian(c: np.ndarray) -> np.ndarray:
    """Real coefficient vector of a Hermitian matrix: diagonal, Re(upper), Im(upper)."""
    iu = np.triu_indices(c.shape[0], k=1)
    return np.concatenate([np.real(np.diagonal(c)), c[iu].real, c[iu].imag])


def _hermitian_basis_stack(n: int) -> np.ndarray:
    """Basis matrices dual to :func:`_coeffs_from_hermitian`, shape (n^2, n, n)."""
    iu = np.triu_indices(n, k=1)
    k = iu[0].size
    stack = np.zeros((n * n, n, n), dtype=np.complex128)
    for i in range(n):
        stack[i, i, i] = 1.0
    for t in range(k):
        i, j = iu[0][t], iu[1][t]
        stack[n + t, i, j] = 1.0
        stack[n + t, j, i] = 1.0
        stack[n + k + t, i, j] = 1.0j
        stack[n + k + t, j, i] = -1.0j
    return stack


def verify_uniqueness(
    d: int,
    n_unitaries: int = 20,
    rng: Rng | None = None,
    include_permutation: bool = True,
    include_classical: bool = True,
) -> UniquenessCertificate:
    """Certify that broadcasting + covariance (+ permutation + classical) force B.

    Builds the full real linear system on Hermitian Choi unknowns --
    broadcasting marginals on a basis, SWAP-conjugation invariance,
    classical consistency in the computational basis, and covariance under
    ``n_unitaries`` sampled Haar unitaries -- then reports the nullity of
    its homogeneous part and the affine residual of the canonical map.
    The ``include_*`` switches allow dropping axiom groups to exhibit the
    extra solution families that appear without them.
    """
    _require_dim(d)
    if n_unitaries < 2:
        raise ValueError("need at least 2 Haar unitaries for a meaningful certificate")
    if rng is None:
        rng = Rng(0)

    n = d**3
    nparam = n * n
    stack = _hermitian_basis_stack(n)  # (nparam, n, n)

    blocks: list[np.ndarray] = []  # complex constraint outputs, shape (nparam, m)
    targets: list[np.ndarray] = []  # affine right-hand sides, shape (m,)

    # Broadcasting: Tr_S1[C] = Omega and Tr_S2[C] = Omega on (leftover (x) input).
    t6 = stack.reshape(nparam, d, d, d, d, d, d)
    om = omega(d).mat.reshape(-1)
    blocks.append(np.einsum("kpxypuv->kxyuv", t6).reshape(nparam, -1))
    targets.append(om)
    blocks.append(np.einsum("kxpyupv->kxyuv", t6).reshape(nparam, -1))
    targets.append(om)

    # Permutation symmetry: SWAP-conjugated Choi equals itself.
    if include_permutation:
        sw = np.kron(swap(d).mat, np.eye(d))
        perm = np.matmul(np.matmul(sw[None, :, :], stack), sw[None, :, :]) - stack
        blocks.append(perm.reshape(nparam, -1))
        targets.append(np.zeros(n * n))

    # Classical consistency: the diagonal of m(E_ii) matches the |ii><ii| pattern.
    # Off-diagonal entries of the decohered chain vanish identically, so only
    # these d*d^2 coordinates carry information.
    if include_classical:
        c4 = stack.reshape(nparam, d * d, d, d * d, d)
        cl_block = np.empty((nparam, d, d * d), dtype=np.complex128)
        tgt = np.zeros((d, d * d))
        for i in range(d):
            cl_block[:, i, :] = np.einsum("krr->kr", c4[:, :, i, :, i])
            tgt[i, i * d + i] = 1.0
        blocks.append(cl_block.reshape(nparam, -1))
        targets.append(tgt.reshape(-1))

    # Covariance under sampled Haar unitaries: (U (x) U (x) Ubar)-conjugation fixes C.
    for _ in range(n_unitaries):
        u = haar_unitary(d, rng).mat
        w = np.kron(np.kron(u, u), u.conj())
        cov = np.matmul(np.matmul(w[None, :, :], stack), w.conj().T[None, :, :]) - stack
        blocks.append(cov.reshape(nparam, -1))
        targets.append(np.zeros(n * n))

    # Stack real rows: [Re; Im] of every constraint coordinate, columns = unknowns.
    n_rows = 2 * sum(b.shape[1] for b in blocks)
    a = np.empty((n_rows, nparam))
    b_vec = np.empty(n_rows)
    at = 0
    for blk, tgt in zip(blocks, targets):
        m_out = blk.shape[1]
        a[at : at + m_out] = blk.real.T
        b_vec[at : at + m_out] = np.asarray(tgt).real
        at += m_out
        a[at : at + m_out] = blk.imag.T
        b_vec[at : at + m_out] = np.asarray(tgt).imag
        at += m_out

    svals = np.linalg.svd(a, compute_uv=False)
    threshold = 1e-8 * svals[0]
    nullity = int(np.sum(svals < threshold))
    kept = svals[svals >= threshold]
    gap = float(kept.min() / threshold) if kept.size else 0.0

    c_b = _coeffs_from_hermitian(canonical_b(d).choi.mat)
    residual = float(np.abs(a @ c_b - b_vec).max())

    return UniquenessCertificate(
        constraint_rows=n_rows,
        unknowns=nparam,
        nullity=nullity,
        candidate_residual=residual,
        singular_value_gap=gap,
        n_unitaries=n_unitaries,
        seed=rng.seed,
    )
