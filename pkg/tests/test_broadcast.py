import numpy as np
import pytest
from numpy.testing import assert_allclose
from pytest import mark, raises

from vbcast.densemat import (
    Operator,
    Rng,
    basis_state,
    eigh,
    haar_unitary,
    identity,
    kron,
    partial_trace,
    random_density,
    random_pure,
    swap,
    trace_norm,
)
from vbcast.supermap import omega
from vbcast.broadcast import (
    antisym,
    canonical_b,
    canonical_decomposition,
    check_axioms,
    choi_projector,
    classical_bcl,
    cloner,
    decoherence,
    family_b_lambda,
    verify_uniqueness,
)


class TestCanonicalB:
    def test_qubit_ground_state(self):
        # B(|0><0|) = |00><00| + (|01><10| + |10><01|)/2, basis order 00,01,10,11
        out = canonical_b(2).apply(basis_state(2, 0))
        want = np.array(
            [
                [1.0, 0.0, 0.0, 0.0],
                [0.0, 0.0, 0.5, 0.0],
                [0.0, 0.5, 0.0, 0.0],
                [0.0, 0.0, 0.0, 0.0],
            ]
        )
        assert_allclose(out.mat, want, atol=1e-15)

    @mark.parametrize("d", range(2, 7))
    def test_both_marginals(self, d):
        b = canonical_b(d)
        rng = Rng(d)
        for _ in range(20):
            rho = random_density(d, rng)
            out = b.apply(rho)
            assert_allclose(partial_trace(out, (d, d), keep="first").mat, rho.mat, atol=1e-12)
            assert_allclose(partial_trace(out, (d, d), keep="second").mat, rho.mat, atol=1e-12)

    @mark.parametrize("d", (2, 3, 4))
    def test_action_is_anticommutator(self, d):
        b = canonical_b(d)
        rho = random_density(d, Rng(d + 50))
        a = kron(rho, identity(d)).mat
        s = swap(d).mat
        assert_allclose(b.apply(rho).mat, 0.5 * (a @ s + s @ a), atol=1e-13)

    @mark.parametrize("d", (2, 3))
    def test_choi_closed_form(self, d):
        # C(B) = (1/2){SWAP (x) I, I (x) Omega}
        s12 = np.kron(swap(d).mat, np.eye(d))
        om23 = np.kron(np.eye(d), omega(d).mat)
        assert_allclose(canonical_b(d).choi.mat, 0.5 * (s12 @ om23 + om23 @ s12), atol=1e-13)

    @mark.parametrize("d", (2, 3, 4))
    def test_hp_tp_not_cp(self, d):
        b = canonical_b(d)
        assert b.is_hp() and b.is_tp()
        assert not b.is_cp()

    def test_rejects_dim_one(self):
        with raises(ValueError):
            canonical_b(1)


class TestFamily:
    def test_lambda_zero_is_canonical(self):
        assert_allclose(family_b_lambda(3, 0.0).choi.mat, canonical_b(3).choi.mat)

    @mark.parametrize("lam", (-0.4, 0.3, 1.1))
    def test_trace_preserving_and_marginals(self, lam):
        d = 2
        m = family_b_lambda(d, lam)
        assert m.is_hp() and m.is_tp()
        rho = random_density(d, Rng(8))
        out = m.apply(rho)
        assert_allclose(partial_trace(out, (d, d), keep="first").mat, rho.mat, atol=1e-12)
        assert_allclose(partial_trace(out, (d, d), keep="second").mat, rho.mat, atol=1e-12)


class TestClonerAntisym:
    @mark.parametrize("d", (2, 3, 4, 5))
    def test_cptp(self, d):
        assert cloner(d).is_cp() and cloner(d).is_tp()
        assert antisym(d).is_cp() and antisym(d).is_tp()

    @mark.parametrize("d", (2, 3, 4, 5))
    def test_cloner_marginal_formula(self, d):
        # Tr_2[B+(psi)] = (I + (d+2) psi) / (2(d+1)) for pure psi
        psi = random_pure(d, Rng(d))
        marg = partial_trace(cloner(d).apply(psi), (d, d), keep="first")
        want = (identity(d) + (d + 2) * psi) * (1.0 / (2 * (d + 1)))
        assert_allclose(marg.mat, want.mat, atol=1e-12)

    @mark.parametrize("d", (2, 3, 4, 5))
    def test_cloner_broadcast_deficit(self, d):
        psi = random_pure(d, Rng(d + 9))
        marg = partial_trace(cloner(d).apply(psi), (d, d), keep="first")
        diff = marg - psi
        vals, _ = eigh(diff)
        assert np.abs(vals).max() == pytest.approx((d - 1) / (2 * (d + 1)), abs=1e-12)
        assert trace_norm(diff) == pytest.approx((d - 1) / (d + 1), abs=1e-12)

    def test_antisym_output_in_antisym_subspace(self):
        d = 3
        rho = random_density(d, Rng(4))
        out = antisym(d).apply(rho).mat
        s = swap(d).mat
        assert_allclose(s @ out @ s, out, atol=1e-13)
        assert_allclose(s @ out, -out, atol=1e-13)


class TestDecomposition:
    @mark.parametrize("d", (2, 3, 4))
    def test_combination_is_exact(self, d):
        dec = canonical_decomposition(d)
        assert dec.lambda_plus == pytest.approx((d + 1) / 2)
        assert dec.lambda_minus == pytest.approx((d - 1) / 2)
        assert_allclose(dec.combined().choi.mat, canonical_b(d).choi.mat, atol=1e-13)

    @mark.parametrize("d", (2, 3, 4))
    def test_choi_spectrum(self, d):
        vals, _ = eigh(canonical_b(d).choi)
        want = np.array(
            sorted([(d + 1) / 2] * d + [0.0] * (d**3 - 2 * d) + [-(d - 1) / 2] * d, reverse=True)
        )
        assert_allclose(vals, want, atol=1e-8)

    @mark.parametrize("d", (2, 3))
    def test_projector_identities(self, d):
        bp = choi_projector(d, +1)
        bm = choi_projector(d, -1)
        assert_allclose((bp @ bp).mat, ((d + 1) / 2 * bp).mat, atol=1e-12)
        assert_allclose((bm @ bm).mat, ((d - 1) / 2 * bm).mat, atol=1e-12)
        assert (bp @ bm).absmax() < 1e-12
        # rescaled projectors are exactly the cloner/antisymmetrizer Chois
        assert_allclose((2.0 / (d + 1) * bp).mat, cloner(d).choi.mat, atol=1e-12)
        assert_allclose((2.0 / (d - 1) * bm).mat, antisym(d).choi.mat, atol=1e-12)

    def test_choi_projector_bad_sign(self):
        with raises(ValueError):
            choi_projector(2, 0)


class TestDecoherence:
    def test_kills_off_diagonals(self):
        rho = random_density(3, Rng(2))
        out = decoherence(3).apply(rho)
        assert_allclose(out.mat, np.diag(np.diag(rho.mat)), atol=1e-14)

    def test_idempotent_self_adjoint(self):
        m = decoherence(4)
        assert_allclose(m.compose(m).choi.mat, m.choi.mat, atol=1e-13)
        assert_allclose(m.hs_adjoint().choi.mat, m.choi.mat, atol=1e-13)

    def test_rotated_basis(self):
        u = haar_unitary(3, Rng(5))
        m = decoherence(3, basis=u)
        rho = random_density(3, Rng(6))
        conj = u.dagger() @ rho @ u
        want = u.mat @ np.diag(np.diag(conj.mat)) @ u.dagger().mat
        assert_allclose(m.apply(rho).mat, want, atol=1e-13)

    def test_rejects_nonunitary_basis(self):
        with raises(ValueError):
            decoherence(2, basis=Operator([[1, 0], [0, 2]]))


class TestClassicalBcl:
    @mark.parametrize("d", (2, 3))
    def test_diagonal_copy(self, d):
        rho = random_density(d, Rng(d))
        out = classical_bcl(d).apply(rho)
        want = np.zeros((d * d, d * d), dtype=complex)
        for i in range(d):
            want[i * d + i, i * d + i] = rho.mat[i, i]
        assert_allclose(out.mat, want, atol=1e-14)

    def test_cptp(self):
        m = classical_bcl(3)
        assert m.is_cp() and m.is_tp()


class TestCheckAxioms:
    def test_canonical_passes(self):
        rep = check_axioms(canonical_b(3), n_states=30, n_unitaries=8, rng=Rng(0))
        assert rep.passes(1e-10)
        assert rep.max_residual() < 1e-12

    @mark.parametrize("lam", (0.3, 0.7))
    def test_family_fails_only_permutation(self, lam):
        rep = check_axioms(family_b_lambda(2, lam), n_states=30, n_unitaries=8, rng=Rng(1))
        assert rep.broadcasting < 1e-10
        assert rep.covariance < 1e-10
        assert rep.classical < 1e-10
        assert rep.permutation > 1e-2
        assert not rep.passes(1e-10)

    @mark.parametrize("d", (2, 3))
    def test_cloner_deficit_detected(self, d):
        # the optimal physical broadcaster misses by (d-1)/(d+1) on pure states
        rep = check_axioms(cloner(d), n_states=30, n_unitaries=4, rng=Rng(d))
        assert rep.broadcasting >= (d - 1) / (d + 1) - 1e-6

    def test_report_json(self):
        rep = check_axioms(canonical_b(2), n_states=5, n_unitaries=3, rng=Rng(2))
        doc = rep.to_json()
        for key in ("broadcasting", "covariance", "permutation", "classical", "version"):
            assert key in doc


class TestUniqueness:
    def test_qubit_certificate(self):
        cert = verify_uniqueness(2, n_unitaries=20, rng=Rng(0))
        assert cert.nullity == 0
        assert cert.candidate_residual < 1e-8
        assert cert.singular_value_gap >= 1e6
        assert cert.unknowns == 2**6

    def test_dropping_permutation_opens_a_direction(self):
        cert = verify_uniqueness(2, n_unitaries=20, rng=Rng(1), include_permutation=False)
        assert cert.nullity == 1

    def test_dropping_classical_opens_a_direction(self):
        cert = verify_uniqueness(2, n_unitaries=20, rng=Rng(2), include_classical=False)
        assert cert.nullity == 1

    def test_too_few_unitaries(self):
        with raises(ValueError):
            verify_uniqueness(2, n_unitaries=1, rng=Rng(0))

    def test_certificate_json(self):
        cert = verify_uniqueness(2, n_unitaries=8, rng=Rng(3))
        doc = cert.to_json()
        assert doc["nullity"] == 0
        assert "singular_value_gap" in doc and "version" in doc
