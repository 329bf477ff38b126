import numpy as np
import pytest

import config
import map_calculus
from errors import CompositionMismatch, DimensionError, HermiticityError
from map_calculus import (
    Structure,
    SuperMap,
    ad_v,
    adjoint,
    apply,
    choi_distance,
    compose,
    from_action,
    from_kraus,
    identity_map,
    lambda_mu_map,
    pair,
    partial_transpose_output,
    pi_contract,
    random_cp_map,
    random_map,
    reduction_map,
    star_t,
    sum_maps,
    tensor,
    tilde_apply,
    transpose_conj,
    transpose_map,
)
from matrix_core import flip_operator, kron, matrix_unit, max_entangled_p
from utils import make_rng, random_complex

TOL = 1e-9


@pytest.fixture
def rng():
    return make_rng(7, 99)


def test_builtin_choi_matrices():
    assert np.array_equal(identity_map(2).choi, max_entangled_p(2))
    assert np.array_equal(transpose_map(2).choi, flip_operator(2))
    assert identity_map(2).structure is Structure.CP
    assert transpose_map(3).structure is Structure.COCP


def test_supermap_validates_shape():
    with pytest.raises(DimensionError):
        SuperMap(2, 3, np.eye(5))
    phi = SuperMap(2, 2, np.eye(4))
    with pytest.raises(ValueError):
        phi.choi[0, 0] = 2.0


def test_apply_builtin_maps(rng):
    a = random_complex(rng, (3, 3))
    assert np.allclose(apply(identity_map(3), a), a)
    assert np.allclose(apply(transpose_map(3), a), a.T)
    assert np.allclose(apply(reduction_map(3), a), np.trace(a) * np.eye(3) - a)
    with pytest.raises(DimensionError):
        apply(identity_map(3), np.eye(2))


def test_ad_v_conjugates(rng):
    v = random_complex(rng, (3, 2))
    a = random_complex(rng, (2, 2))
    phi = ad_v(v)
    assert (phi.in_dim, phi.out_dim) == (2, 3)
    assert np.allclose(apply(phi, a), v @ a @ v.conj().T)
    assert choi_distance(phi, from_action(lambda x: v @ x @ v.conj().T, 2, 3)) < TOL


def test_from_kraus_is_sum_of_ad(rng):
    ops = [random_complex(rng, (2, 2)) for _ in range(3)]
    phi = from_kraus(ops)
    a = random_complex(rng, (2, 2))
    assert np.allclose(apply(phi, a), sum(v @ a @ v.conj().T for v in ops))
    assert phi.structure is Structure.CP
    with pytest.raises(DimensionError):
        from_kraus([])


def test_lambda_mu_choi():
    phi = lambda_mu_map(3, 0.5)
    assert np.allclose(phi.choi, np.eye(9) - 0.5 * max_entangled_p(3))
    assert phi.structure is Structure.UNKNOWN


def test_sum_maps_rules():
    decomposable = sum_maps([(1.0, identity_map(2)), (2.0, transpose_map(2))])
    assert decomposable.structure is Structure.DECOMPOSABLE
    assert np.allclose(decomposable.choi, max_entangled_p(2) + 2 * flip_operator(2))
    with pytest.raises(ValueError):
        sum_maps([(-1.0, identity_map(2))])
    with pytest.raises(DimensionError):
        sum_maps([])
    with pytest.raises(DimensionError):
        sum_maps([(1.0, identity_map(2)), (1.0, identity_map(3))])


def test_structure_algebra():
    assert Structure.COCP.compose(Structure.COCP) is Structure.CP
    assert Structure.CP.compose(Structure.COCP) is Structure.COCP
    assert Structure.DECOMPOSABLE.compose(Structure.COCP) is Structure.DECOMPOSABLE
    assert Structure.UNKNOWN.compose(Structure.CP) is Structure.UNKNOWN
    assert Structure.CP.tensor(Structure.CP) is Structure.CP
    assert Structure.COCP.tensor(Structure.COCP) is Structure.COCP
    assert Structure.CP.tensor(Structure.COCP) is Structure.UNKNOWN


def test_compose_matches_nested_action(rng):
    phi = random_map(2, 3, rng)
    psi = random_map(4, 2, rng)
    a = random_complex(rng, (4, 4))
    composite = compose(phi, psi)
    assert (composite.in_dim, composite.out_dim) == (4, 3)
    assert np.allclose(apply(composite, a), apply(phi, apply(psi, a)))
    with pytest.raises(DimensionError):
        compose(psi, phi)
    with pytest.raises(ValueError):
        compose(phi, psi, method="unknown")


@pytest.mark.parametrize("n", [2, 3])
def test_compose_paths_agree(rng, n):
    for _ in range(20):
        phi = random_map(n, n, rng)
        psi = random_map(n, n, rng)
        direct = compose(phi, psi, method="direct")
        via_tensor = compose(phi, psi, method="tensor")
        assert choi_distance(direct, via_tensor) < TOL


def test_compose_cross_check(monkeypatch, rng):
    phi = random_map(2, 2, rng)
    psi = random_map(2, 2, rng)
    monkeypatch.setattr(config, "CHECK_COMPOSE", True)
    compose(phi, psi)
    monkeypatch.setattr(map_calculus, "_compose_via_tensor", lambda phi, psi: np.zeros((4, 4)))
    with pytest.raises(CompositionMismatch):
        compose(phi, psi)


def test_tensor_acts_on_products(rng):
    psi = random_map(2, 3, rng)
    phi = random_map(3, 2, rng)
    a = random_complex(rng, (2, 2))
    b = random_complex(rng, (3, 3))
    joint = tensor(psi, phi)
    assert (joint.in_dim, joint.out_dim) == (6, 6)
    assert np.allclose(apply(joint, kron(a, b)), kron(apply(psi, a), apply(phi, b)))


def test_transpose_tensor_transpose_is_full_transpose(rng):
    tt = tensor(transpose_map(2), transpose_map(2))
    x = random_complex(rng, (4, 4))
    assert np.allclose(apply(tt, x), x.T)
    assert tt.structure is Structure.COCP


def test_adjoint_trace_duality(rng):
    for phi in (random_map(3, 3, rng), random_map(2, 3, rng), SuperMap(2, 2, random_complex(rng, (4, 4)))):
        a = random_complex(rng, (phi.in_dim, phi.in_dim))
        b = random_complex(rng, (phi.out_dim, phi.out_dim))
        lhs = np.trace(apply(phi, a) @ b)
        rhs = np.trace(a @ apply(adjoint(phi), b))
        assert abs(lhs - rhs) < 1e-10
        assert choi_distance(adjoint(adjoint(phi)), phi) < 1e-10


def test_transpose_conj(rng):
    phi = random_map(3, 3, rng)
    a = random_complex(rng, (3, 3))
    assert np.allclose(apply(transpose_conj(phi), a), apply(phi, a.T).T)
    assert np.allclose(transpose_conj(phi).choi, phi.choi.T)


def test_star_t_fixes_identity_and_transpose():
    for phi in (identity_map(3), transpose_map(3)):
        assert choi_distance(star_t(phi), phi) < 1e-12


def test_ad_adjoint_is_ad_of_adjoint():
    assert choi_distance(adjoint(ad_v(matrix_unit(2, 1, 2))), ad_v(matrix_unit(1, 2, 2))) < 1e-12


def test_tilde_functional(rng):
    a = random_complex(rng, (2, 2))
    b = random_complex(rng, (2, 2))
    assert tilde_apply(identity_map(2), kron(a, b)) == pytest.approx(np.trace(a @ b.T))
    assert tilde_apply(transpose_map(2), max_entangled_p(2)) == pytest.approx(2.0)
    phi = random_cp_map(2, 2, rng)
    g = random_complex(rng, 4)
    assert tilde_apply(phi, np.outer(g, g.conj())).real >= -1e-12
    with pytest.raises(DimensionError):
        tilde_apply(phi, np.eye(2))


def test_pair(rng):
    assert pair(identity_map(2), identity_map(2)) == pytest.approx(4.0)
    assert pair(identity_map(2), transpose_map(2)) == pytest.approx(2.0)
    phi = random_map(3, 3, rng)
    psi = random_map(3, 3, rng)
    assert pair(phi, psi) == pytest.approx(np.trace(phi.choi @ psi.choi).real)
    with pytest.raises(HermiticityError):
        pair(SuperMap(2, 2, 1j * np.eye(4)), identity_map(2))


def test_pi_contract(rng):
    a = random_complex(rng, (3, 3))
    b = random_complex(rng, (3, 3))
    x = random_complex(rng, (9, 9))
    assert np.allclose(pi_contract(kron(a, b)), b.T @ a)
    assert np.allclose(pi_contract(kron(a, np.eye(3))), a)
    assert np.allclose(pi_contract(kron(np.eye(3), b)), b.T)
    assert np.trace(pi_contract(x)) == pytest.approx(np.trace(max_entangled_p(3) @ x))


def test_partial_transpose_output_is_choi_of_t_after_phi(rng):
    phi = random_map(2, 3, rng)
    assert np.allclose(partial_transpose_output(phi), compose(transpose_map(3), phi).choi)


def test_transpose_of_ad_v_is_ad_of_conjugate(rng):
    v = random_complex(rng, (3, 2))
    assert choi_distance(transpose_conj(ad_v(v)), ad_v(v.conj())) < 1e-12
    real = np.array([[1.0, 2.0], [0.0, -1.0]])
    assert choi_distance(transpose_conj(ad_v(real)), ad_v(real)) < 1e-12


@pytest.mark.parametrize("n", [2, 3])
def test_star_t_is_an_involution(rng, n):
    for _ in range(10):
        phi = random_map(n, n, rng)
        assert choi_distance(star_t(star_t(phi)), phi) < 1e-12


def test_compose_ad_is_ad_of_product(rng):
    v = random_complex(rng, (3, 2))
    w = random_complex(rng, (2, 4))
    assert choi_distance(compose(ad_v(v), ad_v(w)), ad_v(v @ w)) < 1e-10
    v = random_complex(rng, (3, 3))
    w = random_complex(rng, (3, 3))
    assert choi_distance(compose(ad_v(v), ad_v(w), method="tensor"), ad_v(v @ w)) < 1e-10


def test_pair_of_ad_maps(rng):
    for _ in range(10):
        v = random_complex(rng, (3, 3))
        w = random_complex(rng, (3, 3))
        expected = abs(np.trace(v.conj().T @ w)) ** 2
        assert pair(ad_v(v), ad_v(w)) == pytest.approx(expected, rel=1e-10)
