#!/usr/bin/env python3
"""
Positivity certification for linear maps of matrix algebras

Falsification is exact (a witness re-evaluates to the negative value);
confirmation is structural (CertifiedPositive) or empirical (NoCounterexample).
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, List, NamedTuple, Optional, Tuple

import numpy as np

import config
from errors import DimensionError
from map_calculus import (
    CHOI_HERMITIAN_RTOL,
    SuperMap,
    Structure,
    ad_v,
    adjoint,
    apply,
    choi_distance,
    partial_transpose_output,
    sum_maps,
    transpose_conj,
)
from matrix_core import (
    bottom_eigenpair,
    check_hermitian,
    flip_operator,
    hermitian_spectrum,
    max_entangled_p,
    tensor_root,
)
from utils import make_rng, random_complex, random_unit_vector

logger = logging.getLogger(__name__)

# Random stream identifiers (second coordinate of make_rng)
STREAM_BLOCK = 1
STREAM_PROBE = 2
STREAM_SCHMIDT = 3
STREAM_SP_K = 4

UNIT_NORM_TOL = 1e-10


@dataclass(frozen=True)
class SearchConfig:
    seed: int = 0
    restarts: int = config.DEFAULT_RESTARTS
    max_iters: int = config.DEFAULT_MAX_ITERS
    conv_tol: float = config.DEFAULT_CONV_TOL
    psd_tol: float = config.DEFAULT_PSD_TOL
    samples: int = config.DEFAULT_SAMPLES
    workers: int = config.DEFAULT_WORKERS

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError(f"restarts must be >= 1, got {self.restarts}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.conv_tol <= 0 or self.psd_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.samples < 0:
            raise ValueError(f"samples must be >= 0, got {self.samples}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")

    @classmethod
    def from_env(cls, **overrides) -> "SearchConfig":
        """Defaults from the environment (see config.py); keyword overrides win"""
        values = {'seed': config.get_default_seed()}
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


class VerdictStatus(Enum):
    FALSIFIED = "Falsified"
    NO_COUNTEREXAMPLE = "NoCounterexample"
    CERTIFIED_POSITIVE = "CertifiedPositive"


@dataclass(frozen=True)
class Witness:
    """
    Counterexample data. kind is one of choi_vector, pt_vector,
    product_vectors, schmidt_vector, input_matrix.
    """
    kind: str
    value: float
    vectors: Dict[str, np.ndarray] = field(default_factory=dict)

    def reevaluate(self, phi: SuperMap) -> float:
        if self.kind in ("choi_vector", "schmidt_vector"):
            z = self.vectors["z"]
            return float(np.real(np.vdot(z, phi.choi @ z)))
        if self.kind == "pt_vector":
            z = self.vectors["z"]
            return float(np.real(np.vdot(z, partial_transpose_output(phi) @ z)))
        if self.kind == "product_vectors":
            z = np.kron(self.vectors["x"], self.vectors["y"])
            return float(np.real(np.vdot(z, phi.choi @ z)))
        if self.kind == "input_matrix":
            y = self.vectors["y"]
            return float(np.real(np.vdot(y, apply(phi, self.vectors["input"]) @ y)))
        raise ValueError(f"unknown witness kind {self.kind!r}")


@dataclass(frozen=True)
class Verdict:
    status: VerdictStatus
    value: Optional[float] = None
    witness: Optional[Witness] = None
    stats: Dict[str, Any] = field(default_factory=dict)

    @property
    def falsified(self) -> bool:
        return self.status is VerdictStatus.FALSIFIED

    @property
    def certified(self) -> bool:
        return self.status is VerdictStatus.CERTIFIED_POSITIVE


class BlockMinimum(NamedTuple):
    value: float
    x: np.ndarray
    y: np.ndarray


class SchmidtMinimum(NamedTuple):
    value: float
    z: np.ndarray


class ProbeResult(NamedTuple):
    min_eig: float
    input: np.ndarray
    vector: np.ndarray
    probes: int


def run_restarts(task: Callable[[int], Tuple], count: int, workers: int = 1) -> List[Tuple]:
    """
    Evaluate task(0..count-1), in threads when workers > 1; results stay in index order
    """
    if workers > 1 and count > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            return list(executor.map(task, range(count)))
    return [task(index) for index in range(count)]


def lowest(results: List[Tuple]) -> Tuple[int, Tuple]:
    """Minimum by first field; ties go to the lowest index"""
    best_index = 0
    for index, result in enumerate(results):
        if result[0] < results[best_index][0]:
            best_index = index
    return best_index, results[best_index]


def _default_tol(tol: Optional[float]) -> float:
    return config.DEFAULT_PSD_TOL if tol is None else tol


def is_cp(phi: SuperMap, tol: Optional[float] = None) -> Verdict:
    """
    Complete positivity: C_phi >= -tol (equivalently the density matrix C_phi^t of phi~)
    """
    tol = _default_tol(tol)
    spectrum = hermitian_spectrum(phi.choi, CHOI_HERMITIAN_RTOL)
    value = spectrum.min_eigenvalue
    stats = {'min_eigenvalue': value, 'tolerance': tol, 'hermitian_deviation': spectrum.deviation}
    if value >= -tol:
        return Verdict(VerdictStatus.CERTIFIED_POSITIVE, value, None, stats)
    witness = Witness("choi_vector", value, {"z": spectrum.bottom_vector})
    return Verdict(VerdictStatus.FALSIFIED, value, witness, stats)


def is_co_cp(phi: SuperMap, tol: Optional[float] = None) -> Verdict:
    """t o phi completely positive: the output-leg partial transpose of C_phi is PSD"""
    tol = _default_tol(tol)
    spectrum = hermitian_spectrum(partial_transpose_output(phi), CHOI_HERMITIAN_RTOL)
    value = spectrum.min_eigenvalue
    stats = {'min_eigenvalue': value, 'tolerance': tol}
    if value >= -tol:
        return Verdict(VerdictStatus.CERTIFIED_POSITIVE, value, None, stats)
    return Verdict(VerdictStatus.FALSIFIED, value, Witness("pt_vector", value, {"z": spectrum.bottom_vector}), stats)


def block_positivity_min(phi: SuperMap, cfg: SearchConfig) -> BlockMinimum:
    """
    Heuristic minimum of <x (x) y| C_phi |x (x) y> over unit vectors

    Alternates exact bottom-eigenvector steps in x and y from seeded random
    starts. The value is attained, hence an upper bound on the true minimum.
    """
    check_hermitian(phi.choi, CHOI_HERMITIAN_RTOL)
    choi4 = phi.choi4

    def restart(index: int):
        rng = make_rng(cfg.seed, STREAM_BLOCK, index)
        y = random_unit_vector(rng, phi.out_dim)
        previous = np.inf
        value = np.inf
        x = None
        for _ in range(cfg.max_iters):
            mx = np.einsum('a,iajb,b->ij', y.conj(), choi4, y)
            _, x = bottom_eigenpair(mx, CHOI_HERMITIAN_RTOL)
            my = np.einsum('i,iajb,j->ab', x.conj(), choi4, x)
            value, y = bottom_eigenpair(my, CHOI_HERMITIAN_RTOL)
            if previous - value < cfg.conv_tol:
                break
            previous = value
        return value, x, y

    results = run_restarts(restart, cfg.restarts, cfg.workers)
    index, (value, x, y) = lowest(results)
    logger.debug("block minimum %.3e at restart %d of %d", value, index, cfg.restarts)
    return BlockMinimum(float(value), x, y)


def probe_positivity(phi: SuperMap, cfg: SearchConfig) -> ProbeResult:
    """
    Smallest output eigenvalue over PSD probe inputs: p (when the input algebra
    is a tensor square) followed by cfg.samples random rank-one projections
    """
    inputs = []
    try:
        inputs.append(max_entangled_p(tensor_root(phi.in_dim)))
    except DimensionError:
        pass
    for index in range(cfg.samples):
        g = random_unit_vector(make_rng(cfg.seed, STREAM_PROBE, index), phi.in_dim)
        inputs.append(np.outer(g, g.conj()))
    if not inputs:
        inputs.append(np.eye(phi.in_dim, dtype=complex))

    best = None
    for a in inputs:
        value, vector = bottom_eigenpair(apply(phi, a), CHOI_HERMITIAN_RTOL)
        if best is None or value < best[0]:
            best = (value, a, vector)
    return ProbeResult(float(best[0]), best[1], best[2], len(inputs))


def _structural_certificate(phi: SuperMap, tol: float) -> Optional[str]:
    if phi.structure.certified_positive:
        return phi.structure.name
    if is_cp(phi, tol).certified:
        return "CP"
    return None


def is_positive_map(phi: SuperMap, cfg: SearchConfig, always_search: bool = False) -> Verdict:
    """
    Positivity of phi

    Structural certificates (CP, co-CP or decomposable by construction, or a PSD
    Choi matrix) give CertifiedPositive. Otherwise PSD probe inputs and the
    block-positivity search look for a counterexample.
    """
    certificate = _structural_certificate(phi, cfg.psd_tol)
    stats: Dict[str, Any] = {'tolerance': cfg.psd_tol}
    if certificate is not None:
        stats['certificate'] = certificate
        if not always_search:
            return Verdict(VerdictStatus.CERTIFIED_POSITIVE, None, None, stats)

    probe = probe_positivity(phi, cfg)
    stats.update({'min_output_eig': probe.min_eig, 'probes': probe.probes})
    if certificate is None and probe.min_eig < -cfg.psd_tol:
        witness = Witness("input_matrix", probe.min_eig, {"input": probe.input, "y": probe.vector})
        return Verdict(VerdictStatus.FALSIFIED, probe.min_eig, witness, stats)

    block = block_positivity_min(phi, cfg)
    stats.update({'best_block_value': block.value, 'restarts': cfg.restarts})
    if certificate is not None:
        if min(block.value, probe.min_eig) < -cfg.psd_tol:
            logger.error("certified map %r has a negative search value %.3e", phi, min(block.value, probe.min_eig))
        return Verdict(VerdictStatus.CERTIFIED_POSITIVE, None, None, stats)
    if block.value < -cfg.psd_tol:
        witness = Witness("product_vectors", block.value, {
            "x": block.x,
            "y": block.y,
            "input": np.outer(block.x.conj(), block.x),
        })
        return Verdict(VerdictStatus.FALSIFIED, block.value, witness, stats)
    return Verdict(VerdictStatus.NO_COUNTEREXAMPLE, min(block.value, probe.min_eig), None, stats)


def k_block_positivity_min(phi: SuperMap, k: int, cfg: SearchConfig) -> SchmidtMinimum:
    """
    Heuristic minimum of <z| C_phi |z> over unit z of Schmidt rank <= k

    z = vec(X Y^t) with X: in_dim x k and Y: out_dim x k. Each half-step fixes one
    frame, orthonormalizes it, and takes the bottom eigenvector of the
    compressed Choi matrix. k = min dimension is the plain minimum eigenvalue.
    """
    k_in, n_out = phi.in_dim, phi.out_dim
    top = min(k_in, n_out)
    if not 1 <= k <= top:
        raise DimensionError(f"k must lie in 1..{top}, got {k}")
    check_hermitian(phi.choi, CHOI_HERMITIAN_RTOL)
    if k == top:
        value, z = bottom_eigenpair(phi.choi, CHOI_HERMITIAN_RTOL)
        return SchmidtMinimum(float(value), z)

    choi = phi.choi
    eye_in = np.eye(k_in, dtype=complex)
    eye_out = np.eye(n_out, dtype=complex)

    def restart(index: int):
        rng = make_rng(cfg.seed, STREAM_SCHMIDT, index)
        y = random_complex(rng, (n_out, k))
        previous = np.inf
        value = np.inf
        z = None
        for _ in range(cfg.max_iters):
            qy, _ = np.linalg.qr(y)
            lift = np.kron(eye_in, qy)
            _, vx = bottom_eigenpair(lift.conj().T @ choi @ lift, CHOI_HERMITIAN_RTOL)
            x = vx.reshape(k_in, k)
            qx, _ = np.linalg.qr(x)
            lift = np.kron(qx, eye_out)
            value, w = bottom_eigenpair(lift.conj().T @ choi @ lift, CHOI_HERMITIAN_RTOL)
            z = lift @ w
            y = w.reshape(k, n_out).T
            if previous - value < cfg.conv_tol:
                break
            previous = value
        return value, z

    results = run_restarts(restart, cfg.restarts, cfg.workers)
    _, (value, z) = lowest(results)
    return SchmidtMinimum(float(value), z)


def is_k_positive(phi: SuperMap, k: int, cfg: SearchConfig) -> Verdict:
    stats: Dict[str, Any] = {'k': k, 'tolerance': cfg.psd_tol}
    certificate = "CP" if phi.structure is Structure.CP else None
    if certificate is None and is_cp(phi, cfg.psd_tol).certified:
        certificate = "CP"
    if certificate is not None:
        stats['certificate'] = certificate
        return Verdict(VerdictStatus.CERTIFIED_POSITIVE, None, None, stats)
    result = k_block_positivity_min(phi, k, cfg)
    stats.update({'best_value': result.value, 'restarts': cfg.restarts})
    if result.value < -cfg.psd_tol:
        witness = Witness("schmidt_vector", result.value, {"z": result.z})
        return Verdict(VerdictStatus.FALSIFIED, result.value, witness, stats)
    return Verdict(VerdictStatus.NO_COUNTEREXAMPLE, result.value, None, stats)


def random_sp_k(k: int, in_dim: int, out_dim: int, terms: int, seed: int) -> SuperMap:
    """
    k-superpositive map sum_i Ad V_i with V_i = A_i B_i, A_i: out x k, B_i: k x in
    """
    if not 1 <= k <= min(in_dim, out_dim):
        raise DimensionError(f"k must lie in 1..{min(in_dim, out_dim)}, got {k}")
    if terms < 1:
        raise ValueError(f"terms must be >= 1, got {terms}")
    rng = make_rng(seed, STREAM_SP_K)
    maps = []
    for _ in range(terms):
        left = random_complex(rng, (out_dim, k))
        right = random_complex(rng, (k, in_dim))
        maps.append((1.0, ad_v(left @ right)))
    return sum_maps(maps).relabel(f"sp_{k}")


def local_filter_from_vector(x) -> np.ndarray:
    """
    v with (1 (x) v) u = x for u = sum_i e_i (x) e_i, so Ad(1 (x) v)(p) = |x><x|

    Writing x = sum_i e_i (x) x_i, column i of v is x_i.
    """
    x = np.asarray(x, dtype=complex).reshape(-1)
    m = tensor_root(x.size)
    norm = float(np.linalg.norm(x))
    if abs(norm - 1.0) > UNIT_NORM_TOL:
        raise ValueError(f"local filter needs a unit vector, got norm {norm:.6g}")
    return x.reshape(m, m).T.copy()


@dataclass(frozen=True)
class SymmetryCheck:
    holds: bool
    real: bool
    symmetric: bool
    flip_invariant: bool
    star_fixed: bool
    t_fixed: bool
    deviations: Dict[str, float]

    @property
    def consistent(self) -> bool:
        """Choi-level test agrees with the map equalities phi = phi* = phi^t"""
        return self.holds == (self.star_fixed and self.t_fixed)

    def __bool__(self) -> bool:
        return self.holds


def check_star_t_symmetry(phi: SuperMap, tol: float = 1e-10) -> SymmetryCheck:
    """
    phi = phi* = phi^t  iff  C_phi is real, symmetric and flip invariant
    """
    if not phi.is_square:
        raise DimensionError(f"symmetry check needs a map of one algebra, got {phi!r}")
    choi = phi.choi
    flip = flip_operator(phi.in_dim)
    deviations = {
        'imaginary': float(np.max(np.abs(choi.imag))),
        'symmetric': float(np.linalg.norm(choi - choi.T)),
        'flip': float(np.linalg.norm(choi - flip @ choi @ flip)),
        'adjoint': choi_distance(phi, adjoint(phi)),
        'transpose_conj': choi_distance(phi, transpose_conj(phi)),
    }
    real = deviations['imaginary'] <= tol
    symmetric = deviations['symmetric'] <= tol
    flip_invariant = deviations['flip'] <= tol
    result = SymmetryCheck(
        holds=real and symmetric and flip_invariant,
        real=real,
        symmetric=symmetric,
        flip_invariant=flip_invariant,
        star_fixed=deviations['adjoint'] <= tol,
        t_fixed=deviations['transpose_conj'] <= tol,
        deviations=deviations,
    )
    if not result.consistent:
        logger.warning("Choi-level and map-level symmetry tests disagree for %r: %s", phi, deviations)
    return result
