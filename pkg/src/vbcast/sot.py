"""States over time induced by the virtual broadcasting map.

A channel E: S1 -> S2 applied to the second output of a broadcaster b
yields the bipartite operator

    E * rho = (id (x) E)( b(rho) )

-- Hermitian, unit trace, generally non-positive -- whose marginals are
the input rho and the output E(rho).  With b the canonical broadcaster,
the construction is covariant, permutation-symmetric at E = id, reduces
to the classical joint distribution for classical channels, and respects
post-processing in both Schroedinger and Heisenberg pictures.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .densemat import Operator, Rng, haar_unitary, partial_trace, random_density, swap
from .supermap import SuperMap, apply_right, random_channel
from .broadcast import classical_bcl, decoherence


@dataclass(frozen=True)
class StateOverTime:
    """Bipartite operator over (input system, output system) plus its source."""

    operator: Operator
    d1: int
    d2: int
    channel: SuperMap
    input_state: Operator

    def marginals(self) -> tuple[Operator, Operator]:
        """(first-system, second-system) partial traces."""
        dims = (self.d1, self.d2)
        return (
            partial_trace(self.operator, dims, keep="first"),
            partial_trace(self.operator, dims, keep="second"),
        )


def star(e: SuperMap, rho: Operator, b: SuperMap) -> StateOverTime:
    """E * rho = (id (x) E)(b(rho)) for a broadcaster b: d -> d*d."""
    d = b.d_in
    if b.d_out != d * d:
        raise ValueError("broadcaster must map d -> d^2")
    if e.d_in != d:
        raise ValueError(f"channel input dim {e.d_in} does not match state dim {d}")
    if rho.rows != d or rho.cols != d:
        raise ValueError(f"rho must be {d}x{d}")
    op = apply_right(e, b.apply(rho), d_left=d)
    return StateOverTime(operator=op, d1=d, d2=e.d_out, channel=e, input_state=rho)


@dataclass(frozen=True)
class SotAxiomReport:
    """Max-absolute-entry residuals of the state-over-time axioms."""

    covariance: float
    permutation: float
    classical: float
    n_cases: int
    seed: int

    def max_residual(self) -> float:
        return max(self.covariance, self.permutation, self.classical)

    def passes(self, tol: float) -> bool:
        return self.max_residual() < tol


def check_sot_axioms(b: SuperMap, n_cases: int = 50, rng: Rng | None = None) -> SotAxiomReport:
    """Sample the covariance, permutation, and classicality axioms of *.

    Covariance conjugates channel and state by independent Haar unitaries;
    permutation symmetry is checked at E = id by SWAP conjugation; the
    classical case decoheres a random channel on both sides and compares
    against the classical star built from B_cl.
    """
    if rng is None:
        rng = Rng(0)
    d = b.d_in

    r_cov = 0.0
    r_perm = 0.0
    r_cl = 0.0
    dec = decoherence(d)
    bcl = classical_bcl(d)
    for _ in range(n_cases):
        rho = random_density(d, rng)
        u = haar_unitary(d, rng)
        v = haar_unitary(d, rng)
        e = random_channel(d, d, rng)

        # covariance: (U (x) V)(E * rho)(U (x) V)+ = (V E U+) * (U rho U+)
        ad_u = SuperMap.from_action(d, d, lambda x, u=u: u @ x @ u.dagger())
        ad_udag = SuperMap.from_action(d, d, lambda x, u=u: u.dagger() @ x @ u)
        ad_v = SuperMap.from_action(d, d, lambda x, v=v: v @ x @ v.dagger())
        uv = np.kron(u.mat, v.mat)
        lhs = uv @ star(e, rho, b).operator.mat @ uv.conj().T
        e_rot = ad_v.compose(e).compose(ad_udag)
        rhs = star(e_rot, ad_u.apply(rho), b).operator.mat
        r_cov = max(r_cov, float(np.abs(lhs - rhs).max()))

        # permutation symmetry at E = id
        ident = SuperMap.identity(d)
        t = star(ident, rho, b).operator.mat
        sw = swap(d).mat
        r_perm = max(r_perm, float(np.abs(sw @ t @ sw - t).max()))

        # classical consistency for decohered channels
        e_cl = dec.compose(e).compose(dec)
        lhs_cl = dec.tensor(dec).apply(star(e_cl, dec.apply(rho), b).operator)
        rhs_cl = apply_right(e_cl, bcl.apply(rho), d_left=d)
        r_cl = max(r_cl, float(np.abs(lhs_cl.mat - rhs_cl.mat).max()))

    return SotAxiomReport(
        covariance=r_cov, permutation=r_perm, classical=r_cl, n_cases=n_cases, seed=rng.seed
    )


@dataclass(frozen=True)
class PostprocessingResiduals:
    """Residuals of the two post-processing identities."""

    composition: float
    heisenberg: float


def _random_effect(d: int, rng: Rng) -> Operator:
    """Random Hermitian P with 0 <= P <= I, full spread."""
    from .densemat import random_hermitian

    h = random_hermitian(d, rng).mat
    vals = np.linalg.eigvalsh(h)
    lo, hi = vals[0], vals[-1]
    return Operator((h - lo * np.eye(d)) / (hi - lo))


def check_postprocessing_equivalence(
    b: SuperMap, n_cases: int = 50, rng: Rng | None = None, star_fn=None
) -> PostprocessingResiduals:
    """Check (F . E) * rho = (id (x) F)(E * rho) and its Heisenberg twin.

    The Heisenberg residual compares Tr_S2[(I (x) F*(P)) (E * rho)] with
    Tr_S2[(I (x) P) ((F.E) * rho)] over random binary effects P.  A custom
    ``star_fn(e, rho)`` may be supplied to probe broken constructions.
    """
    if rng is None:
        rng = Rng(0)
    d = b.d_in
    if star_fn is None:
        star_fn = lambda e, rho: star(e, rho, b).operator  # noqa: E731

    r_comp = 0.0
    r_heis = 0.0
    for _ in range(n_cases):
        rho = random_density(d, rng)
        e = random_channel(d, d, rng)
        f = random_channel(d, d, rng)
        p = _random_effect(d, rng)

        fe = f.compose(e)
        lhs = star_fn(fe, rho)
        mid = star_fn(e, rho)
        rhs = apply_right(f, mid, d_left=d)
        r_comp = max(r_comp, float(np.abs(lhs.mat - rhs.mat).max()))

        fstar_p = f.hs_adjoint().apply(p)
        heis = partial_trace(
            Operator(mid.mat @ np.kron(np.eye(d), fstar_p.mat)), (d, d), keep="first"
        )
        schro = partial_trace(
            Operator(lhs.mat @ np.kron(np.eye(d), p.mat)), (d, d), keep="first"
        )
        r_heis = max(r_heis, float(np.abs(heis.mat - schro.mat).max()))

    return PostprocessingResiduals(composition=r_comp, heisenberg=r_heis)
