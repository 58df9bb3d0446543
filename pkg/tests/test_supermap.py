import numpy as np
import pytest
from numpy.testing import assert_allclose

from vbcast.densemat import Operator, Rng, identity, kron, random_density, random_hermitian, swap
from vbcast.supermap import (
    AffineDecomposition,
    SuperMap,
    apply_left,
    apply_right,
    omega,
    random_channel,
)


def test_omega():
    d = 3
    om = omega(d)
    assert om.trace() == pytest.approx(d)
    assert_allclose((om @ om).mat, (d * om).mat, atol=1e-13)
    assert np.linalg.matrix_rank(om.mat) == 1


def test_identity_map():
    d = 3
    m = SuperMap.identity(d)
    rho = random_density(d, Rng(0))
    assert_allclose(m.apply(rho).mat, rho.mat, atol=1e-14)
    assert_allclose(m.choi.mat, omega(d).mat)
    assert m.is_cp() and m.is_tp() and m.is_hp()


def test_identity_choi_spectrum():
    vals = np.linalg.eigvalsh(SuperMap.identity(2).choi.mat)
    assert_allclose(sorted(vals), [0.0, 0.0, 0.0, 2.0], atol=1e-13)


def test_jamiolkowski_of_identity_is_swap():
    for d in (2, 3):
        assert_allclose(SuperMap.identity(d).jamiolkowski().mat, swap(d).mat, atol=1e-13)


def test_from_action_roundtrip():
    d = 2
    u = np.array([[0, 1], [1, 0]], dtype=complex)
    m = SuperMap.from_action(d, d, lambda x: Operator(u @ x.mat @ u.conj().T))
    rho = random_density(d, Rng(1))
    assert_allclose(m.apply(rho).mat, u @ rho.mat @ u.conj().T, atol=1e-14)
    again = SuperMap.from_choi(d, d, m.choi)
    assert_allclose(again.choi.mat, m.choi.mat)


def test_jamiolkowski_roundtrip():
    m = random_channel(2, 3, Rng(5))
    back = SuperMap.from_jamiolkowski(2, 3, m.jamiolkowski())
    assert_allclose(back.choi.mat, m.choi.mat, atol=1e-13)


def test_apply_linearity():
    m = random_channel(3, 2, Rng(2))
    rng = Rng(3)
    a, b = random_hermitian(3, rng), random_hermitian(3, rng)
    lhs = m.apply(a + 2.0 * b)
    rhs = m.apply(a) + 2.0 * m.apply(b)
    assert_allclose(lhs.mat, rhs.mat, atol=1e-13)


def test_random_channel_is_cptp():
    for d_in, d_out in [(2, 2), (2, 4), (3, 2)]:
        m = random_channel(d_in, d_out, Rng(d_in * 7 + d_out))
        assert m.is_cp(), (d_in, d_out)
        assert m.is_tp(), (d_in, d_out)
        rho = random_density(d_in, Rng(0))
        out = m.apply(rho)
        assert out.is_psd()
        assert out.trace() == pytest.approx(1.0)


def test_compose_matches_sequential_apply():
    f = random_channel(2, 3, Rng(10))
    g = random_channel(3, 2, Rng(11))
    rho = random_density(2, Rng(12))
    assert_allclose(
        g.compose(f).apply(rho).mat,
        g.apply(f.apply(rho)).mat,
        atol=1e-13,
    )


def test_compose_dim_mismatch():
    f = random_channel(2, 3, Rng(0))
    with pytest.raises(ValueError):
        f.compose(f)


def test_tensor_on_product_states():
    f = random_channel(2, 2, Rng(20))
    g = random_channel(3, 3, Rng(21))
    a = random_density(2, Rng(22))
    b = random_density(3, Rng(23))
    assert_allclose(
        f.tensor(g).apply(kron(a, b)).mat,
        kron(f.apply(a), g.apply(b)).mat,
        atol=1e-13,
    )


def test_hs_adjoint_pairing():
    # <A, m(B)> == <m*(A), B> in the Hilbert-Schmidt inner product
    m = random_channel(3, 4, Rng(30))
    ma = m.hs_adjoint()
    rng = Rng(31)
    for _ in range(10):
        a = random_hermitian(4, rng)
        b = random_hermitian(3, rng)
        lhs = np.vdot(a.mat, m.apply(b).mat)
        rhs = np.vdot(ma.apply(a).mat, b.mat)
        assert abs(lhs - rhs) < 1e-12


def test_hs_adjoint_involution_and_unitality():
    m = random_channel(3, 3, Rng(32))
    assert_allclose(m.hs_adjoint().hs_adjoint().choi.mat, m.choi.mat, atol=1e-13)
    # adjoint of a TP map is unital
    assert_allclose(m.hs_adjoint().apply(identity(3)).mat, np.eye(3), atol=1e-12)


def test_apply_right_left_on_products():
    m = random_channel(2, 3, Rng(40))
    rng = Rng(41)
    x = random_hermitian(4, rng)
    y = random_hermitian(2, rng)
    assert_allclose(
        apply_right(m, kron(x, y), d_left=4).mat,
        kron(x, m.apply(y)).mat,
        atol=1e-13,
    )
    assert_allclose(
        apply_left(m, kron(y, x), d_right=4).mat,
        kron(m.apply(y), x).mat,
        atol=1e-13,
    )


def test_arithmetic_and_hp():
    f = random_channel(2, 2, Rng(50))
    g = random_channel(2, 2, Rng(51))
    h = 0.5 * f - 0.5 * g
    assert h.is_hp()
    rho = random_density(2, Rng(52))
    assert_allclose(
        h.apply(rho).mat,
        0.5 * f.apply(rho).mat - 0.5 * g.apply(rho).mat,
        atol=1e-13,
    )
    assert h.apply(rho).is_hermitian()


def test_arithmetic_dim_mismatch():
    with pytest.raises(ValueError):
        random_channel(2, 2, Rng(0)) + random_channel(3, 3, Rng(0))


def test_json_roundtrip():
    m = random_channel(2, 4, Rng(60))
    back = SuperMap.from_json(m.to_json())
    assert back.d_in == 2 and back.d_out == 4
    assert_allclose(back.choi.mat, m.choi.mat)


def test_choi_shape_validation():
    with pytest.raises(ValueError):
        SuperMap(2, 2, identity(5))


def test_affine_decomposition_combined():
    f = random_channel(2, 2, Rng(70))
    g = random_channel(2, 2, Rng(71))
    dec = AffineDecomposition(1.5, 0.5, f, g)
    got = dec.combined()
    want = 1.5 * f - 0.5 * g
    assert_allclose(got.choi.mat, want.choi.mat, atol=1e-14)
