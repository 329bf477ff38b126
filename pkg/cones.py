#!/usr/bin/env python3
"""
Symmetric mapping cones given by finite generator lists, and dual-cone
membership testing through psi (x) phi(p) >= 0
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

import config
from errors import ConeError, DimensionError, HypothesisError
from map_calculus import (
    CHOI_HERMITIAN_RTOL,
    SuperMap,
    ad_v,
    adjoint,
    apply,
    choi_distance,
    compose,
    identity_map,
    pair,
    random_cp_map,
    star_t,
    sum_maps,
    tensor,
    transpose_conj,
    transpose_map,
)
from matrix_core import bottom_eigenpair, max_entangled_p
from positivity import (
    SearchConfig,
    Verdict,
    check_star_t_symmetry,
    is_cp,
    is_k_positive,
    is_positive_map,
    lowest,
    probe_positivity,
    run_restarts,
)
from utils import make_rng, random_complex, summarize_trials, trials_frame

logger = logging.getLogger(__name__)

STREAM_CONE_SAMPLE = 5
STREAM_DUAL_PAIR = 6
STREAM_SELF_DUAL = 7

CLOSURE_TOL = 1e-10
MAX_SAMPLE_TERMS = 3
DUAL_CONDITIONS = ("composite_cp", "probe_positive", "tensor_on_p")


@dataclass(frozen=True)
class MappingCone:
    dim: int
    generators: Tuple[SuperMap, ...]
    symmetric: bool = True
    name: str = ""

    def __len__(self) -> int:
        return len(self.generators)


class MembershipStatus(Enum):
    NOT_MEMBER = "NotMember"
    CONSISTENT = "ConsistentWithMembership"
    MEMBER = "Member"


@dataclass(frozen=True)
class MembershipWitness:
    """A cone element psi with min eig of (psi (x) phi)(p) equal to value"""
    psi: Optional[SuperMap]
    value: float
    vector: Optional[np.ndarray] = None
    input: Optional[np.ndarray] = None
    trial: Optional[int] = None


@dataclass(frozen=True)
class MembershipReport:
    candidate: str
    status: MembershipStatus
    witness: Optional[MembershipWitness] = None
    stats: Dict[str, Any] = field(default_factory=dict)
    trials: int = 0


def _check_dims(cone: MappingCone, phi: SuperMap) -> None:
    if not phi.is_square or phi.in_dim != cone.dim:
        raise DimensionError(f"{phi!r} is not a map of M_{cone.dim}")


def make_symmetric_cone(generators: Sequence[SuperMap], cfg: Optional[SearchConfig] = None,
                        name: str = "") -> MappingCone:
    """
    Cone generated by the maps and their images under *, t and *t

    Raises:
        ConeError: empty list, mixed dimensions, or a generator shown not positive
    """
    generators = list(generators)
    if not generators:
        raise ConeError("a cone needs at least one generator")
    n = generators[0].in_dim
    for g in generators:
        if not g.is_square or g.in_dim != n:
            raise ConeError(f"generator {g!r} is not a map of M_{n}")

    cfg = cfg or SearchConfig.from_env()
    for g in generators:
        verdict = is_positive_map(g, cfg)
        if verdict.falsified:
            raise ConeError(f"generator {g!r} is not positive (value {verdict.value:.3e})")

    closed: List[SuperMap] = []
    for g in generators:
        base = g.label or "g"
        for image in (g,
                      adjoint(g).relabel(f"{base}*"),
                      transpose_conj(g).relabel(f"{base}^t"),
                      star_t(g).relabel(f"{base}^*t")):
            if all(choi_distance(image, kept) > CLOSURE_TOL for kept in closed):
                closed.append(image)
    logger.debug("symmetric closure of %d generators has %d elements", len(generators), len(closed))
    return MappingCone(dim=n, generators=tuple(closed), symmetric=True, name=name)


def cp_cone(n: int) -> MappingCone:
    """CP(H), generated by the identity map"""
    return make_symmetric_cone([identity_map(n)], name="CP")


def cocp_cone(n: int) -> MappingCone:
    """co-CP maps t o alpha, generated by the transpose"""
    return make_symmetric_cone([transpose_map(n)], name="co-CP")


def generated_cone(g: SuperMap, cfg: Optional[SearchConfig] = None) -> MappingCone:
    """
    Mapping cone generated by a single g = g* = g^t
    """
    symmetry = check_star_t_symmetry(g)
    if not symmetry:
        raise HypothesisError("psi = psi* = psi^t", f"{g!r} fails the Choi symmetry test {symmetry.deviations}")
    return make_symmetric_cone([g], cfg, name=f"cone({g.label or 'g'})")


def cone_element(g: SuperMap, u, v) -> SuperMap:
    """Ad u o g o Ad v"""
    return compose(ad_v(u), compose(g, ad_v(v))).relabel("cone_element")


def sample_element(cone: MappingCone, seed: int, index: int = 0) -> SuperMap:
    """
    Random nonnegative combination of 1-3 terms Ad u o g o Ad v with
    exponential weights; deterministic in (seed, index)
    """
    if not cone.generators:
        raise ConeError("cannot sample an empty cone")
    rng = make_rng(seed, STREAM_CONE_SAMPLE, index)
    n = cone.dim
    count = int(rng.integers(1, MAX_SAMPLE_TERMS + 1))
    terms = []
    for _ in range(count):
        g = cone.generators[int(rng.integers(len(cone.generators)))]
        u = random_complex(rng, (n, n))
        v = random_complex(rng, (n, n))
        u *= np.sqrt(n) / np.linalg.norm(u)
        v *= np.sqrt(n) / np.linalg.norm(v)
        terms.append((float(rng.exponential()), cone_element(g, u, v)))
    return sum_maps(terms).relabel("cone_sample")


def _dual_candidates(cone: MappingCone, trials: int, seed: int) -> List[SuperMap]:
    """Raw generators first, then samples up to `trials` elements"""
    psis = list(cone.generators)
    for index in range(max(0, trials - len(psis))):
        psis.append(sample_element(cone, seed, index))
    return psis


def tensor_on_p_min(psi: SuperMap, phi: SuperMap) -> Tuple[float, np.ndarray]:
    """Bottom eigenpair of (psi (x) phi)(p)"""
    return bottom_eigenpair(apply(tensor(psi, phi), max_entangled_p(psi.in_dim)), CHOI_HERMITIAN_RTOL)


def falsify_dual_membership(cone: MappingCone, phi: SuperMap, trials: int,
                            cfg: SearchConfig) -> MembershipReport:
    """
    Search for psi in the cone with (psi (x) phi)(p) not PSD

    Any such psi proves phi is outside the dual cone; otherwise the result is
    only consistent with membership.
    """
    _check_dims(cone, phi)
    psis = _dual_candidates(cone, trials, cfg.seed)
    results = run_restarts(lambda index: tensor_on_p_min(psis[index], phi), len(psis), cfg.workers)
    index, (value, vector) = lowest(results)
    stats = {'min_value': float(value), 'generators': len(cone.generators), 'tolerance': cfg.psd_tol}
    if value < -cfg.psd_tol:
        witness = MembershipWitness(psi=psis[index], value=float(value), vector=vector, trial=index)
        return MembershipReport(phi.label, MembershipStatus.NOT_MEMBER, witness, stats, len(psis))
    return MembershipReport(phi.label, MembershipStatus.CONSISTENT, None, stats, len(psis))


class DualPairMinimum(NamedTuple):
    value: float
    psi: SuperMap


def _conjugation_basis(n: int, side: str) -> np.ndarray:
    # L_b = I (x) E_b for Ad u on the output leg, E_b (x) I for Ad v entering through v^t
    eye = np.eye(n, dtype=complex)
    basis = []
    for r in range(n):
        for s in range(n):
            unit = np.zeros((n, n), dtype=complex)
            unit[r, s] = 1.0
            basis.append(np.kron(eye, unit) if side == "output" else np.kron(unit, eye))
    return np.array(basis)


def _pairing_form(a: np.ndarray, b: np.ndarray, basis: np.ndarray) -> np.ndarray:
    """Q with w* Q w = Tr(A M B M*) for M = sum_b w_b L_b"""
    return np.einsum('xy,byz,zw,axw->ab', a, basis, b, basis.conj(), optimize=True)


def dual_pair_min(cone: MappingCone, phi: SuperMap, cfg: SearchConfig) -> DualPairMinimum:
    """
    Heuristic minimum of Tr(C_phi C_psi) over psi = Ad u o g o Ad v

    u and v are scaled to |.|_F^2 = n so u = v = I reproduces g itself; the raw
    generators are always evaluated, so the result never exceeds pair(phi, g).
    Negative values prove phi is not in the dual cone.
    """
    _check_dims(cone, phi)
    n = cone.dim
    scale = np.sqrt(n)
    out_basis = _conjugation_basis(n, "output")
    in_basis = _conjugation_basis(n, "input")

    raw = [(pair(phi, g), g) for g in cone.generators]

    def restart(index: int):
        g = cone.generators[index % len(cone.generators)]
        rng = make_rng(cfg.seed, STREAM_DUAL_PAIR, index)
        v = random_complex(rng, (n, n))
        v *= scale / np.linalg.norm(v)
        previous = np.inf
        value = np.inf
        for _ in range(cfg.max_iters):
            inner = compose(g, ad_v(v)).choi
            _, w = bottom_eigenpair(_pairing_form(phi.choi, inner, out_basis), CHOI_HERMITIAN_RTOL)
            u = scale * w.reshape(n, n)
            outer = compose(ad_v(u), g).choi
            value, w = bottom_eigenpair(_pairing_form(phi.choi, outer, in_basis), CHOI_HERMITIAN_RTOL)
            value *= n
            v = (scale * w.reshape(n, n)).T
            if previous - value < cfg.conv_tol:
                break
            previous = value
        return float(value), g, u, v

    results = run_restarts(restart, cfg.restarts, cfg.workers)
    _, (value, g, u, v) = lowest(results)
    best_raw = min(raw, key=lambda item: item[0])
    if best_raw[0] <= value:
        return DualPairMinimum(float(best_raw[0]), best_raw[1])
    return DualPairMinimum(value, cone_element(g, u, v))


def decide_generated_dual(g: SuperMap, phi: SuperMap, cfg: SearchConfig,
                          trials: Optional[int] = None) -> MembershipReport:
    """
    For g = g* = g^t: phi is in the dual of the cone generated by g iff g (x) phi is positive

    The positivity verdict on g (x) phi is cross-checked against the dual
    membership search on the generated cone.
    """
    cone = generated_cone(g, cfg)
    _check_dims(cone, phi)
    verdict = is_positive_map(tensor(g, phi), cfg)
    cross = falsify_dual_membership(cone, phi, trials or config.DEFAULT_TRIALS, cfg)

    falsified = verdict.falsified
    not_member = cross.status is MembershipStatus.NOT_MEMBER
    stats = {
        'positivity': verdict.status.value,
        'dual_check': cross.status.value,
        'agree': falsified == not_member,
        'tolerance': cfg.psd_tol,
    }
    stats.update({f"positivity_{k}": v for k, v in verdict.stats.items()})
    if not stats['agree']:
        logger.warning("dual membership routes disagree for %r: positivity %s, dual %s",
                       phi, verdict.status.value, cross.status.value)

    if not_member:
        return MembershipReport(phi.label, MembershipStatus.NOT_MEMBER, cross.witness, stats, cross.trials)
    if falsified:
        witness = MembershipWitness(
            psi=g,
            value=float(verdict.value),
            vector=verdict.witness.vectors.get("y"),
            input=verdict.witness.vectors.get("input"),
        )
        return MembershipReport(phi.label, MembershipStatus.NOT_MEMBER, witness, stats, cross.trials)
    if verdict.certified:
        return MembershipReport(phi.label, MembershipStatus.MEMBER, None, stats, cross.trials)
    return MembershipReport(phi.label, MembershipStatus.CONSISTENT, None, stats, cross.trials)


@dataclass
class DualConditionsReport:
    conditions: Dict[str, Dict[str, Any]]
    inconsistencies: List[str]
    notes: List[str]
    trials: int
    frame: pd.DataFrame = field(repr=False)

    @property
    def consistent(self) -> bool:
        return not self.inconsistencies


def check_dual_conditions(cone: MappingCone, phi: SuperMap, cfg: SearchConfig,
                          trials: Optional[int] = None) -> DualConditionsReport:
    """
    Evaluate three equivalent descriptions of phi in the dual cone over a
    star_t-closed sample of psi:

        composite_cp   phi o psi is completely positive
        probe_positive psi (x) phi is positive on PSD probe inputs
        tensor_on_p    (psi (x) phi)(p) >= 0

    and report logical inconsistencies among the outcomes
    """
    if not cone.symmetric:
        raise HypothesisError("symmetric cone", f"cone {cone.name!r} is not symmetric")
    _check_dims(cone, phi)
    samples = _dual_candidates(cone, trials or config.DEFAULT_TRIALS, cfg.seed)
    psis: List[SuperMap] = []
    for psi in samples:
        psis.extend([psi, star_t(psi)])

    def evaluate(index: int):
        psi = psis[index]
        return {
            'trial': index,
            'psi': psi.label,
            'composite_cp': float(is_cp(compose(phi, psi), cfg.psd_tol).value),
            'probe_positive': float(probe_positivity(tensor(psi, phi), cfg).min_eig),
            'tensor_on_p': float(tensor_on_p_min(psi, phi)[0]),
        }

    rows = run_restarts(evaluate, len(psis), cfg.workers)
    frame = trials_frame(rows)
    conditions = {}
    for name in DUAL_CONDITIONS:
        column = frame[name]
        conditions[name] = {
            'status': 'falsified' if column.min() < -cfg.psd_tol else 'consistent',
            'min_value': float(column.min()),
            'witness_trial': int(column.values.argmin()),
        }

    falsified = {name: info['status'] == 'falsified' for name, info in conditions.items()}
    inconsistencies = []
    notes = []
    # composite_cp for psi is tensor_on_p for psi^{*t}; the sample is closed under star_t
    if falsified['composite_cp'] != falsified['tensor_on_p']:
        inconsistencies.append("composite_cp and tensor_on_p disagree on a star_t-closed sample")
    # p is the first probe input
    if falsified['tensor_on_p'] and not falsified['probe_positive']:
        inconsistencies.append("tensor_on_p falsified but probe_positive not")
    if falsified['probe_positive'] and not falsified['tensor_on_p']:
        notes.append("probe_positive falsified by a probe while tensor_on_p held on every sampled psi")
    for message in inconsistencies:
        logger.warning("dual conditions check for %r: %s", phi, message)
    return DualConditionsReport(conditions, inconsistencies, notes, len(psis), frame)


@dataclass(frozen=True)
class PositivityCheckReport:
    passed: bool
    verdict: Verdict
    min_output_eig: float
    stats: Dict[str, Any] = field(default_factory=dict)


def verify_composed_tensor(alpha: SuperMap, gamma: SuperMap, beta: SuperMap, delta: SuperMap,
                           cfg: SearchConfig, cone: Optional[MappingCone] = None,
                           trials: Optional[int] = None) -> PositivityCheckReport:
    """
    psi = alpha o beta, phi = gamma o delta with alpha in C, gamma in C°, and
    beta, delta CP; checks that psi (x) phi is never falsified as a positive map

    Raises:
        HypothesisError: naming the hypothesis that failed
    """
    n = alpha.in_dim
    if not (alpha.is_square and gamma.is_square and gamma.in_dim == n):
        raise HypothesisError("alpha, gamma in P(H)", f"{alpha!r} and {gamma!r} must be maps of one M_n")
    if beta.out_dim != n or delta.out_dim != n:
        raise HypothesisError("beta, delta into B(H)", f"{beta!r} and {delta!r} must map into M_{n}")
    if not is_cp(beta, cfg.psd_tol).certified:
        raise HypothesisError("beta completely positive", f"{beta!r} has a negative Choi eigenvalue")
    if not is_cp(delta, cfg.psd_tol).certified:
        raise HypothesisError("delta completely positive", f"{delta!r} has a negative Choi eigenvalue")
    if is_positive_map(alpha, cfg).falsified:
        raise HypothesisError("alpha in cone", f"{alpha!r} is not positive")
    if cone is not None:
        _check_dims(cone, alpha)
        dual = falsify_dual_membership(cone, gamma, trials or config.DEFAULT_TRIALS, cfg)
        if dual.status is MembershipStatus.NOT_MEMBER:
            raise HypothesisError("gamma in dual cone", f"witness value {dual.witness.value:.3e}")

    psi = compose(alpha, beta)
    phi = compose(gamma, delta)
    verdict = is_positive_map(tensor(psi, phi), cfg, always_search=True)
    min_eig = float(verdict.stats.get('min_output_eig', np.nan))
    return PositivityCheckReport(not verdict.falsified, verdict, min_eig, dict(verdict.stats))


def verify_k_tensor(psi: SuperMap, phi: SuperMap, k: int, cfg: SearchConfig) -> PositivityCheckReport:
    """
    psi k-positive and phi k-superpositive: psi (x) phi is positive, the
    k-superpositive maps being the dual cone of the k-positive ones
    """
    if is_k_positive(psi, k, cfg).falsified:
        raise HypothesisError("psi k-positive", f"{psi!r} is not {k}-positive")
    if not is_cp(phi, cfg.psd_tol).certified:
        raise HypothesisError("phi k-superpositive", f"{phi!r} is not even completely positive")
    verdict = is_positive_map(tensor(psi, phi), cfg, always_search=True)
    min_eig = float(verdict.stats.get('min_output_eig', np.nan))
    stats = dict(verdict.stats)
    stats['k'] = k
    return PositivityCheckReport(not verdict.falsified, verdict, min_eig, stats)


@dataclass
class SelfDualityReport:
    passed: bool
    min_pair: float
    not_member_count: int
    trials: int
    summary: Dict[str, Dict[str, float]]
    frame: pd.DataFrame = field(default_factory=pd.DataFrame, repr=False)


def verify_cp_selfduality(n: int, trials: int, cfg: SearchConfig, dual_trials: int = 5) -> SelfDualityReport:
    """
    Tr(C_phi C_psi) >= 0 for CP pairs, and CP candidates are never outside the dual of CP
    """
    cone = cp_cone(n)
    rows = []
    not_member = 0
    for index in range(trials):
        rng = make_rng(cfg.seed, STREAM_SELF_DUAL, index)
        phi = random_cp_map(n, n, rng, terms=int(rng.integers(1, 4)))
        psi = random_cp_map(n, n, rng, terms=int(rng.integers(1, 4)))
        report = falsify_dual_membership(cone, phi, dual_trials, cfg)
        if report.status is MembershipStatus.NOT_MEMBER:
            not_member += 1
        rows.append({'trial': index, 'pair': pair(phi, psi), 'dual_min': report.stats['min_value']})
    frame = trials_frame(rows)
    min_pair = float(frame['pair'].min()) if trials else 0.0
    return SelfDualityReport(
        passed=min_pair >= -1e-12 and not_member == 0,
        min_pair=min_pair,
        not_member_count=not_member,
        trials=trials,
        summary=summarize_trials(frame),
        frame=frame,
    )
