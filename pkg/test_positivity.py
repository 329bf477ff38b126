import numpy as np
import pytest

from errors import DimensionError
from map_calculus import (
    SuperMap,
    ad_v,
    apply,
    identity_map,
    lambda_mu_map,
    random_map,
    reduction_map,
    tensor,
    transpose_map,
)
from matrix_core import kron, matrix_unit, max_entangled_p
from positivity import (
    SearchConfig,
    VerdictStatus,
    block_positivity_min,
    check_star_t_symmetry,
    is_co_cp,
    is_cp,
    is_k_positive,
    is_positive_map,
    k_block_positivity_min,
    local_filter_from_vector,
    lowest,
    probe_positivity,
    random_sp_k,
    run_restarts,
)
from utils import make_rng, random_unit_vector

TOL = 1e-9
SYMMETRIC_V = np.array([[1.0, 2.0], [2.0, 3.0]])


def test_search_config_validation(monkeypatch):
    with pytest.raises(ValueError):
        SearchConfig(restarts=0)
    with pytest.raises(ValueError):
        SearchConfig(psd_tol=0.0)
    monkeypatch.setenv("POSMAP_SEED", "11")
    assert SearchConfig.from_env().seed == 11
    assert SearchConfig.from_env(seed=3, restarts=None).seed == 3


def test_lowest_prefers_first_index():
    assert lowest([(2.0, "a"), (1.0, "b"), (1.0, "c")]) == (1, (1.0, "b"))


def test_run_restarts_keeps_order():
    assert run_restarts(lambda i: (i * i,), 5, workers=3) == [(0,), (1,), (4,), (9,), (16,)]


def test_transpose_is_not_cp():
    verdict = is_cp(transpose_map(2))
    assert verdict.status is VerdictStatus.FALSIFIED
    assert verdict.value == pytest.approx(-1.0, abs=TOL)
    assert verdict.witness.reevaluate(transpose_map(2)) == pytest.approx(-1.0, abs=TOL)


def test_ad_v_is_cp():
    assert is_cp(ad_v(SYMMETRIC_V)).certified
    assert is_cp(identity_map(3)).certified


def test_co_cp():
    assert is_co_cp(transpose_map(2)).certified
    verdict = is_co_cp(identity_map(2))
    assert verdict.falsified
    assert verdict.value == pytest.approx(-1.0, abs=TOL)
    assert verdict.witness.reevaluate(identity_map(2)) == pytest.approx(-1.0, abs=TOL)


def test_structural_certificate(fast_cfg):
    verdict = is_positive_map(transpose_map(2), fast_cfg)
    assert verdict.certified
    assert verdict.stats['certificate'] == "COCP"


def test_untagged_transpose_has_no_counterexample(fast_cfg):
    plain = SuperMap(2, 2, transpose_map(2).choi)
    verdict = is_positive_map(plain, fast_cfg)
    assert verdict.status is VerdictStatus.NO_COUNTEREXAMPLE
    assert verdict.value >= -TOL


def test_non_positive_map_is_falsified(fast_cfg):
    phi = lambda_mu_map(2, 3.0)
    verdict = is_positive_map(phi, fast_cfg)
    assert verdict.falsified
    assert verdict.value == pytest.approx(-2.0, abs=1e-6)
    assert verdict.witness.reevaluate(phi) == pytest.approx(verdict.value, abs=TOL)


def test_block_minimum_of_partial_transpose(fast_cfg):
    phi = tensor(transpose_map(2), identity_map(2))
    block = block_positivity_min(phi, fast_cfg)
    assert block.value == pytest.approx(-0.5, abs=1e-6)
    z = np.kron(block.x, block.y)
    assert np.vdot(z, phi.choi @ z).real == pytest.approx(block.value, abs=TOL)


def test_probe_finds_p(fast_cfg):
    phi = tensor(transpose_map(2), identity_map(2))
    probe = probe_positivity(phi, fast_cfg)
    assert probe.min_eig == pytest.approx(-1.0, abs=TOL)
    assert np.allclose(probe.input, max_entangled_p(2))
    assert probe.probes == fast_cfg.samples + 1
    verdict = is_positive_map(phi, fast_cfg)
    assert verdict.falsified
    assert verdict.witness.kind == "input_matrix"


def test_block_search_is_deterministic():
    phi = tensor(transpose_map(2), identity_map(2))
    serial = block_positivity_min(phi, SearchConfig(seed=5, restarts=6, workers=1))
    threaded = block_positivity_min(phi, SearchConfig(seed=5, restarts=6, workers=3))
    assert serial.value == threaded.value
    assert np.array_equal(serial.x, threaded.x)


@pytest.mark.parametrize("mu,k,expected", [(1.0, 1, 0.0), (0.5, 2, 0.0), (1.0, 3, -2.0)])
def test_k_block_minimum_closed_form(mu, k, expected):
    phi = lambda_mu_map(3, mu)
    result = k_block_positivity_min(phi, k, SearchConfig(seed=0))
    assert result.value == pytest.approx(1.0 - mu * k, abs=1e-6)
    assert result.value == pytest.approx(expected, abs=1e-6)


def test_k_block_minimum_rejects_bad_k(fast_cfg):
    with pytest.raises(DimensionError):
        k_block_positivity_min(lambda_mu_map(3, 1.0), 4, fast_cfg)
    with pytest.raises(DimensionError):
        k_block_positivity_min(lambda_mu_map(3, 1.0), 0, fast_cfg)


def test_k_positivity(fast_cfg):
    phi = lambda_mu_map(3, 0.5)
    assert not is_k_positive(phi, 2, fast_cfg).falsified
    verdict = is_k_positive(phi, 3, fast_cfg)
    assert verdict.falsified
    assert verdict.value == pytest.approx(-0.5, abs=1e-9)
    assert verdict.witness.reevaluate(phi) == pytest.approx(-0.5, abs=1e-9)
    assert is_k_positive(identity_map(3), 2, fast_cfg).certified


def test_random_sp_k():
    phi = random_sp_k(2, 3, 3, terms=3, seed=4)
    assert phi.structure.name == "CP"
    assert is_cp(phi).certified
    assert np.array_equal(phi.choi, random_sp_k(2, 3, 3, terms=3, seed=4).choi)
    # one rank-one Choi term per Kraus operator
    assert np.linalg.matrix_rank(phi.choi, tol=1e-8) <= 3
    with pytest.raises(DimensionError):
        random_sp_k(4, 3, 3, terms=1, seed=0)


def test_local_filter_reproduces_projection():
    m = 3
    x = random_unit_vector(make_rng(1, 2), m * m)
    v = local_filter_from_vector(x)
    filtered = apply(ad_v(kron(np.eye(m), v)), max_entangled_p(m))
    assert np.allclose(filtered, np.outer(x, x.conj()))


def test_local_filter_needs_unit_vector():
    with pytest.raises(ValueError):
        local_filter_from_vector(np.zeros(4))
    with pytest.raises(DimensionError):
        local_filter_from_vector(np.ones(3) / np.sqrt(3))


@pytest.mark.parametrize("phi,expected", [
    (transpose_map(2), True),
    (ad_v(SYMMETRIC_V), True),
    (ad_v(matrix_unit(2, 1, 2)), False),
])
def test_star_t_symmetry(phi, expected):
    check = check_star_t_symmetry(phi)
    assert check.holds is expected
    assert check.consistent


def test_ad_e21_fails_on_flip():
    check = check_star_t_symmetry(ad_v(matrix_unit(2, 1, 2)))
    assert check.real and check.symmetric
    assert not check.flip_invariant
    assert not check.star_fixed


def test_block_search_is_monotone_in_restarts():
    phi = random_map(3, 3, make_rng(8, 8))
    values = [block_positivity_min(phi, SearchConfig(seed=2, restarts=r, max_iters=100)).value
              for r in (1, 4, 16)]
    assert values[0] >= values[1] >= values[2]


def test_k_block_value_does_not_increase_with_k():
    values = [k_block_positivity_min(lambda_mu_map(3, 1.0), k, SearchConfig(seed=0)).value for k in (1, 2, 3)]
    assert values[0] >= values[1] >= values[2]
    phi = random_map(3, 3, make_rng(9, 9))
    exact = k_block_positivity_min(phi, 3, SearchConfig(seed=0)).value
    for k in (1, 2):
        assert k_block_positivity_min(phi, k, SearchConfig(seed=0, restarts=10)).value >= exact - 1e-12


def test_reduction_map_is_not_falsified(fast_cfg):
    phi = reduction_map(2)
    block = block_positivity_min(phi, fast_cfg)
    assert block.value == pytest.approx(0.0, abs=1e-9)
    verdict = is_positive_map(phi, fast_cfg)
    assert verdict.status is VerdictStatus.NO_COUNTEREXAMPLE
    assert verdict.value >= -TOL


def test_co_cp_choi_data_is_not_a_positivity_certificate(fast_cfg):
    # only CP is read off raw Choi data; co-CP needs a structure tag
    plain = SuperMap(2, 2, reduction_map(2).choi)
    assert is_co_cp(plain).certified
    assert not is_cp(plain).certified
    assert is_positive_map(plain, fast_cfg).status is VerdictStatus.NO_COUNTEREXAMPLE
