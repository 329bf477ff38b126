#!/usr/bin/env python3
"""
Seeded verification suites for the Choi-matrix identities and the dual-cone
criteria. Each suite produces a per-trial pandas table and a pass/fail status.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional

import numpy as np
import pandas as pd

import config
from cones import (
    MembershipStatus,
    check_dual_conditions,
    cocp_cone,
    cp_cone,
    decide_generated_dual,
    dual_pair_min,
    generated_cone,
    sample_element,
    tensor_on_p_min,
    verify_composed_tensor,
    verify_cp_selfduality,
    verify_k_tensor,
)
from errors import HypothesisError
from map_calculus import (
    ad_v,
    adjoint,
    apply,
    compose,
    from_action,
    identity_map,
    lambda_mu_map,
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
from matrix_core import j_conjugate, kron, matrix_unit, max_entangled_p
from positivity import SearchConfig, check_star_t_symmetry, random_sp_k
from utils import make_rng, print_summary, random_complex, save_csv_report, save_report, summarize_trials, trials_frame

logger = logging.getLogger(__name__)

STREAM_SUITE = 8

IDENTITY_TOL = 1e-9
STRUCTURE_TOL = 1e-10
SELF_DUAL_TOL = 1e-12

STATUS_PASS = "pass"
STATUS_FAIL = "fail"
STATUS_INCONSISTENT = "inconsistent"


@dataclass
class SuiteReport:
    suite: str
    status: str
    trials: int
    tolerance: float
    max_residual: Optional[float] = None
    details: Dict[str, Any] = field(default_factory=dict)
    frame: pd.DataFrame = field(default_factory=pd.DataFrame, repr=False)

    @property
    def passed(self) -> bool:
        return self.status == STATUS_PASS


def _residual_report(suite: str, rows: List[Dict[str, Any]], tolerance: float,
                     details: Optional[Dict[str, Any]] = None) -> SuiteReport:
    frame = trials_frame(rows)
    residuals = frame.filter(regex=r'^r_')
    max_residual = float(residuals.to_numpy().max()) if not residuals.empty else 0.0
    status = STATUS_PASS if max_residual <= tolerance else STATUS_FAIL
    return SuiteReport(suite, status, len(rows), tolerance, max_residual, details or {}, frame)


def suite_choi_identities(dim: int, trials: int, cfg: SearchConfig) -> SuiteReport:
    """
    Tilde functional identities on random (phi, psi, x):

        phi~(a (x) b) = Tr(phi(a) b^t) = Tr(C_phi^t (a (x) b))
        phi~ = Tr o pi o (iota (x) phi^{*t})
        phi~(x) = Tr((iota (x) phi^t)(p) x)
        Tr(p x) = Tr(pi(x)), Tr(p (a (x) b)) = Tr(a b^t)
        (phi o psi)~(x) = Tr((psi* (x) phi^t)(p) x)
    """
    n = dim
    p = max_entangled_p(n)
    iota = identity_map(n)
    rows = []
    for trial in range(trials):
        rng = make_rng(cfg.seed, STREAM_SUITE, trial)
        phi = random_map(n, n, rng)
        psi = random_map(n, n, rng)
        a = random_complex(rng, (n, n))
        b = random_complex(rng, (n, n))
        x = random_complex(rng, (n * n, n * n))
        ab = kron(a, b)
        value = tilde_apply(phi, x)
        rows.append({
            'trial': trial,
            'r_product': abs(tilde_apply(phi, ab) - np.trace(apply(phi, a) @ b.T)),
            'r_density': abs(tilde_apply(phi, ab) - np.trace(phi.choi.T @ ab)),
            'r_pi_contract': abs(value - np.trace(pi_contract(apply(tensor(iota, star_t(phi)), x)))),
            'r_transpose_chain': abs(value - np.trace(apply(tensor(iota, transpose_conj(phi)), p) @ x)),
            'r_identity': max(abs(np.trace(p @ x) - np.trace(pi_contract(x))),
                              abs(np.trace(p @ ab) - np.trace(a @ b.T))),
            'r_composite': abs(tilde_apply(compose(phi, psi), x)
                               - np.trace(apply(tensor(adjoint(psi), transpose_conj(phi)), p) @ x)),
        })
    return _residual_report("eq1", rows, IDENTITY_TOL)


def suite_tensor_route(dim: int, trials: int, cfg: SearchConfig) -> SuiteReport:
    """C_{phi o psi} = (psi^{*t} (x) phi)(p), against both composition paths and a unit expansion"""
    n = dim
    p = max_entangled_p(n)
    rows = []
    for trial in range(trials):
        rng = make_rng(cfg.seed, STREAM_SUITE, trial)
        phi = random_map(n, n, rng)
        psi = random_map(n, n, rng)
        via_tensor = apply(tensor(star_t(psi), phi), p)
        direct = compose(phi, psi, method="direct").choi
        nested = from_action(lambda a: apply(phi, apply(psi, a)), n, n).choi
        rows.append({
            'trial': trial,
            'r_tensor_route': float(np.linalg.norm(via_tensor - direct)),
            'r_paths': float(np.linalg.norm(compose(phi, psi, method="tensor").choi - direct)),
            'r_action': float(np.linalg.norm(nested - direct)),
        })
    return _residual_report("lemma1", rows, IDENTITY_TOL)


def suite_adjoint(dim: int, trials: int, cfg: SearchConfig) -> SuiteReport:
    """C_{phi*} = J C_phi J, C_{phi^t} = C_phi^t and Tr(phi(a) b) = Tr(a phi*(b))"""
    n = dim
    rows = []
    for trial in range(trials):
        rng = make_rng(cfg.seed, STREAM_SUITE, trial)
        phi = random_map(n, n, rng)
        a = random_complex(rng, (n, n))
        b = random_complex(rng, (n, n))
        reversed_legs = phi.choi4.transpose(3, 2, 1, 0).reshape(n * n, n * n)
        conjugated = from_action(lambda x: apply(phi, x.T).T, n, n).choi
        rows.append({
            'trial': trial,
            'r_j_conjugate': float(np.linalg.norm(j_conjugate(phi.choi) - reversed_legs)),
            'r_transpose_conj': float(np.linalg.norm(transpose_conj(phi).choi - conjugated)),
            'r_duality': abs(np.trace(apply(phi, a) @ b) - np.trace(a @ apply(adjoint(phi), b))),
        })
    return _residual_report("adjoint", rows, STRUCTURE_TOL)


def suite_dual_conditions(dim: int, trials: int, cfg: SearchConfig) -> SuiteReport:
    """
    Dual-cone conditions on alternating CP / co-CP cones and random or CP
    candidates. The star_t-paired sample lets composite_cp of each psi be
    compared exactly with tensor_on_p of its partner.
    """
    n = dim
    cones = [cp_cone(n), cocp_cone(n)]
    rows = []
    inconsistent = 0
    for trial in range(trials):
        rng = make_rng(cfg.seed, STREAM_SUITE, trial)
        cone = cones[trial % 2]
        phi = random_cp_map(n, n, rng) if (trial // 2) % 2 else random_map(n, n, rng)
        report = check_dual_conditions(cone, phi, cfg, trials=config.SUITE_CONE_SAMPLES)
        frame = report.frame
        values_cp = frame['composite_cp'].to_numpy()
        values_p = frame['tensor_on_p'].to_numpy()
        # rows come in (psi, psi^{*t}) pairs
        partner = np.arange(len(values_cp)) ^ 1
        if report.inconsistencies:
            inconsistent += 1
        rows.append({
            'trial': trial,
            'cone': cone.name,
            'composite_cp': report.conditions['composite_cp']['status'],
            'probe_positive': report.conditions['probe_positive']['status'],
            'tensor_on_p': report.conditions['tensor_on_p']['status'],
            'min_tensor_on_p': report.conditions['tensor_on_p']['min_value'],
            'inconsistencies': len(report.inconsistencies),
            'r_partner': float(np.max(np.abs(values_cp - values_p[partner]))),
        })
    result = _residual_report("thm2", rows, IDENTITY_TOL, {'inconsistent_trials': inconsistent})
    if result.passed and inconsistent:
        result.status = STATUS_INCONSISTENT
    return result


def suite_composed_tensor(dim: int, trials: int, cfg: SearchConfig) -> SuiteReport:
    """
    (alpha o beta) (x) (gamma o delta) is positive for alpha in a self-dual
    cone, gamma in its dual and CP beta, delta
    """
    n = dim
    cones = [cp_cone(n), cocp_cone(n)]
    rows = []
    for trial in range(trials):
        rng = make_rng(cfg.seed, STREAM_SUITE, trial)
        cone = cones[trial % 2]
        alpha = sample_element(cone, cfg.seed, 2 * trial)
        gamma = sample_element(cone, cfg.seed, 2 * trial + 1)
        beta = random_cp_map(n, n, rng)
        delta = random_cp_map(n, n, rng)
        check = verify_composed_tensor(alpha, gamma, beta, delta, cfg, cone=cone,
                                       trials=config.SUITE_CONE_SAMPLES)
        rows.append({
            'trial': trial,
            'cone': cone.name,
            'verdict': check.verdict.status.value,
            'min_output_eig': check.min_output_eig,
            'best_block_value': float(check.stats.get('best_block_value', np.nan)),
        })
    frame = trials_frame(rows)
    failed = int((frame['verdict'] == "Falsified").sum()) if rows else 0
    status = STATUS_PASS if failed == 0 else STATUS_FAIL
    return SuiteReport("cor3", status, trials, cfg.psd_tol, None, {'falsified_trials': failed}, frame)


def suite_generated_dual(dim: int, trials: int, cfg: SearchConfig) -> SuiteReport:
    """
    Generated-cone decisions with known answers:
    (iota, Ad V) -> Member, (t, iota) -> NotMember, (t, reduction) -> consistent
    """
    n = dim
    iota = identity_map(n)
    t = transpose_map(n)
    reduction = reduction_map(n)
    rows = []

    cross = decide_generated_dual(t, iota, cfg, trials)
    witness = cross.witness
    replay = np.nan
    if witness is not None and witness.psi is not None:
        replay = abs(tensor_on_p_min(witness.psi, iota)[0] - witness.value)
    rows.append({'trial': 0, 'case': "t, identity", 'expected': MembershipStatus.NOT_MEMBER.value,
                 'status': cross.status.value, 'value': witness.value if witness else np.nan,
                 'r_witness_replay': replay})

    consistent = decide_generated_dual(t, reduction, cfg, trials)
    pair_min = dual_pair_min(generated_cone(t, cfg), reduction, cfg)
    rows.append({'trial': 1, 'case': "t, reduction", 'expected': MembershipStatus.CONSISTENT.value,
                 'status': consistent.status.value, 'value': pair_min.value, 'r_witness_replay': 0.0})

    for index in range(trials):
        rng = make_rng(cfg.seed, STREAM_SUITE, index)
        v = random_complex(rng, (n, n))
        member = decide_generated_dual(iota, ad_v(v), cfg, trials)
        rows.append({'trial': 2 + index, 'case': "identity, Ad V", 'expected': MembershipStatus.MEMBER.value,
                     'status': member.status.value, 'value': np.nan, 'r_witness_replay': 0.0})

    frame = trials_frame(rows)
    mismatches = int((frame['status'] != frame['expected']).sum())
    replay_ok = not np.isfinite(replay) or replay <= IDENTITY_TOL
    status = STATUS_PASS if mismatches == 0 and replay_ok and pair_min.value >= -cfg.psd_tol else STATUS_FAIL
    details = {'mismatches': mismatches, 'reduction_dual_pair_min': pair_min.value}
    max_residual = float(replay) if np.isfinite(replay) else None
    return SuiteReport("cor4-demo", status, len(rows), cfg.psd_tol, max_residual, details, frame)


def _symmetrized(phi):
    """(phi + phi* + phi^t + phi^{*t}) / 4, fixed by * and t"""
    return sum_maps([(0.25, image) for image in (phi, adjoint(phi), transpose_conj(phi), star_t(phi))])


def suite_symmetry(dim: int, trials: int, cfg: SearchConfig) -> SuiteReport:
    """
    Choi-level test of phi = phi* = phi^t on known cases and on random maps,
    half of them symmetrized, against the map equalities
    """
    n = dim
    known = [
        ("transpose", transpose_map(n), True),
        ("Ad e_21", ad_v(matrix_unit(2, 1, n)), False),
    ]
    if n == 2:
        known.insert(1, ("Ad [[1,2],[2,3]]", ad_v(np.array([[1.0, 2.0], [2.0, 3.0]])), True))
    rows = []
    for index, (name, phi, expected) in enumerate(known):
        check = check_star_t_symmetry(phi)
        rows.append({'trial': index, 'case': name, 'expected': expected, 'holds': check.holds,
                     'consistent': check.consistent})
    for trial in range(trials):
        rng = make_rng(cfg.seed, STREAM_SUITE, trial)
        phi = random_map(n, n, rng)
        if trial % 2 == 0:
            phi = _symmetrized(phi)
        check = check_star_t_symmetry(phi)
        rows.append({'trial': len(known) + trial, 'case': "random", 'expected': trial % 2 == 0,
                     'holds': check.holds, 'consistent': check.consistent})
    frame = trials_frame(rows)
    mismatches = int((frame['holds'] != frame['expected']).sum())
    inconsistent = int((~frame['consistent']).sum())
    status = STATUS_PASS if mismatches == 0 and inconsistent == 0 else STATUS_FAIL
    details = {'mismatches': mismatches, 'inconsistent': inconsistent}
    return SuiteReport("symmetry", status, len(rows), STRUCTURE_TOL, None, details, frame)


def suite_k_tensor(dim: int, trials: int, cfg: SearchConfig) -> SuiteReport:
    """
    Lambda_{1/2} (2-positive) tensored with random 2-superpositive maps is never falsified
    """
    n = dim
    k = min(2, n)
    psi = lambda_mu_map(n, 0.5)
    rows = []
    for trial in range(trials):
        phi = random_sp_k(k, n, n, terms=3, seed=cfg.seed + trial)
        try:
            check = verify_k_tensor(psi, phi, k, cfg)
        except HypothesisError as e:
            logger.error("trial %d: %s", trial, e)
            rows.append({'trial': trial, 'verdict': "hypothesis", 'min_output_eig': np.nan,
                         'best_block_value': np.nan})
            continue
        rows.append({
            'trial': trial,
            'verdict': check.verdict.status.value,
            'min_output_eig': check.min_output_eig,
            'best_block_value': float(check.stats.get('best_block_value', np.nan)),
        })
    frame = trials_frame(rows)
    failed = int((frame['verdict'].isin(["Falsified", "hypothesis"])).sum()) if rows else 0
    worst = float(frame['min_output_eig'].min()) if rows else 0.0
    status = STATUS_PASS if failed == 0 and (np.isnan(worst) or worst >= -cfg.psd_tol) else STATUS_FAIL
    return SuiteReport("kremark", status, trials, cfg.psd_tol, None,
                       {'k': k, 'falsified_trials': failed, 'min_output_eig': worst}, frame)


def suite_cp_selfdual(dim: int, trials: int, cfg: SearchConfig) -> SuiteReport:
    """Tr(C_phi C_psi) >= 0 on CP pairs; CP candidates never leave the dual of CP"""
    report = verify_cp_selfduality(dim, trials, cfg)
    status = STATUS_PASS if report.passed else STATUS_FAIL
    details = {'min_pair': report.min_pair, 'not_member_count': report.not_member_count}
    return SuiteReport("cp-selfdual", status, trials, SELF_DUAL_TOL, None, details, report.frame)


SUITES: Dict[str, Callable[[int, int, SearchConfig], SuiteReport]] = {
    "eq1": suite_choi_identities,
    "lemma1": suite_tensor_route,
    "adjoint": suite_adjoint,
    "thm2": suite_dual_conditions,
    "cor3": suite_composed_tensor,
    "cor4-demo": suite_generated_dual,
    "symmetry": suite_symmetry,
    "kremark": suite_k_tensor,
    "cp-selfdual": suite_cp_selfdual,
}


class SuiteRunner:
    def __init__(self, dim: int, trials: int, cfg: SearchConfig):
        if dim < 2:
            raise ValueError(f"suites need dim >= 2, got {dim}")
        if trials < 1:
            raise ValueError(f"trials must be >= 1, got {trials}")
        self.dim = dim
        self.trials = trials
        self.cfg = cfg
        self.results: Dict[str, SuiteReport] = {}

    def run(self, name: str) -> SuiteReport:
        """
        Run one suite by name

        Raises:
            KeyError: unknown suite name
        """
        suite = SUITES[name]
        logger.info("running suite %s (dim=%d, trials=%d, seed=%d)", name, self.dim, self.trials, self.cfg.seed)
        report = suite(self.dim, self.trials, self.cfg)
        self.results[name] = report
        return report

    def generate_report(self, name: str) -> Dict[str, Any]:
        report = self.results[name]
        return {
            'suite': report.suite,
            'status': report.status,
            'dim': self.dim,
            'trials': report.trials,
            'seed': self.cfg.seed,
            'tolerance': report.tolerance,
            'max_residual': report.max_residual,
            'details': report.details,
            'summary': summarize_trials(report.frame),
        }

    def save_report(self, name: str, filename: str = config.DEFAULT_REPORT_FILENAME) -> None:
        save_report(self.generate_report(name), filename)
        logger.info("report saved to %s", filename)

    def save_csv(self, name: str, filename: str = config.DEFAULT_CSV_FILENAME) -> None:
        save_csv_report(self.results[name].frame, filename)

    def print_summary(self, name: str) -> None:
        report = self.results[name]
        lines = {
            'Status': report.status,
            'Dimension': self.dim,
            'Trials': report.trials,
            'Seed': self.cfg.seed,
            'Tolerance': report.tolerance,
        }
        if report.max_residual is not None:
            lines['Max residual'] = report.max_residual
        lines.update({key: value for key, value in report.details.items()})
        print_summary(f"verify {name}", lines)
