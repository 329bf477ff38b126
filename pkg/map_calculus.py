#!/usr/bin/env python3
"""
Linear maps B(K) -> B(H) represented by Choi matrices

C_phi = sum_{ij} e_{ij} (x) phi(e_{ij}), first leg the input K, second the
output H. Reshaped as C[i, a, j, b] = phi(e_ij)[a, b].
"""

import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, FrozenSet, Iterable, Sequence, Tuple

import numpy as np

import config
from errors import CompositionMismatch, DimensionError, HermiticityError
from matrix_core import (
    ComplexMatrix,
    as_matrix,
    check_hermitian,
    j_conjugate,
    kron,
    max_entangled_p,
    flip_operator,
    partial_transpose,
    tensor_root,
)
from utils import random_complex

logger = logging.getLogger(__name__)

CHOI_HERMITIAN_RTOL = 1e-10
COMPOSE_AGREEMENT_TOL = 1e-9
PAIR_IMAG_TOL = 1e-10


class Structure(Enum):
    """
    Provenance certificate: which positive cones the map is known to lie in
    by construction. CP and co-CP are the two parities of t.
    """
    CP = frozenset({0})
    COCP = frozenset({1})
    DECOMPOSABLE = frozenset({0, 1})
    UNKNOWN = frozenset()

    @property
    def certified_positive(self) -> bool:
        return self is not Structure.UNKNOWN

    @classmethod
    def _from_parities(cls, parities: FrozenSet[int]) -> "Structure":
        return cls(frozenset(parities))

    def compose(self, other: "Structure") -> "Structure":
        """Structure of (self map) o (other map)"""
        if not self.value or not other.value:
            return Structure.UNKNOWN
        return Structure._from_parities(frozenset((a + b) % 2 for a in self.value for b in other.value))

    def add(self, other: "Structure") -> "Structure":
        if not self.value or not other.value:
            return Structure.UNKNOWN
        return Structure._from_parities(self.value | other.value)

    def tensor(self, other: "Structure") -> "Structure":
        # t (x) t is the transpose of the product algebra; CP (x) co-CP is not positive in general
        if self in (Structure.CP, Structure.COCP) and self is other:
            return self
        return Structure.UNKNOWN


@dataclass(frozen=True)
class SuperMap:
    in_dim: int
    out_dim: int
    choi: ComplexMatrix = field(repr=False)
    structure: Structure = Structure.UNKNOWN
    label: str = ""

    def __post_init__(self):
        choi = as_matrix(self.choi)
        size = self.in_dim * self.out_dim
        if self.in_dim < 1 or self.out_dim < 1:
            raise DimensionError(f"map dimensions must be >= 1, got {self.in_dim}->{self.out_dim}")
        if choi.shape != (size, size):
            raise DimensionError(
                f"Choi matrix of a map M_{self.in_dim} -> M_{self.out_dim} must be {size}x{size}, got {choi.shape}"
            )
        choi = choi.copy()
        choi.setflags(write=False)
        object.__setattr__(self, 'choi', choi)

    @property
    def is_square(self) -> bool:
        return self.in_dim == self.out_dim

    @property
    def choi4(self) -> np.ndarray:
        """C[i, a, j, b] = phi(e_ij)[a, b]"""
        return self.choi.reshape(self.in_dim, self.out_dim, self.in_dim, self.out_dim)

    def relabel(self, label: str) -> "SuperMap":
        return replace(self, label=label)

    def __repr__(self) -> str:
        name = self.label or "SuperMap"
        return f"<{name}: M_{self.in_dim} -> M_{self.out_dim}, {self.structure.name}>"


def _make(in_dim: int, out_dim: int, choi, structure: Structure, label: str = "") -> SuperMap:
    return SuperMap(in_dim=in_dim, out_dim=out_dim, choi=choi, structure=structure, label=label)


def choi_distance(phi: SuperMap, psi: SuperMap) -> float:
    if phi.choi.shape != psi.choi.shape:
        raise DimensionError(f"cannot compare {phi!r} with {psi!r}")
    return float(np.linalg.norm(phi.choi - psi.choi))


def from_action(fn: Callable[[ComplexMatrix], ComplexMatrix], in_dim: int, out_dim: int,
                structure: Structure = Structure.UNKNOWN, label: str = "") -> SuperMap:
    """
    Build the Choi matrix of a linear callable by evaluating it on matrix units
    """
    choi4 = np.zeros((in_dim, out_dim, in_dim, out_dim), dtype=complex)
    for i in range(in_dim):
        for j in range(in_dim):
            unit = np.zeros((in_dim, in_dim), dtype=complex)
            unit[i, j] = 1.0
            image = as_matrix(fn(unit))
            if image.shape != (out_dim, out_dim):
                raise DimensionError(f"action returned shape {image.shape}, expected {(out_dim, out_dim)}")
            choi4[i, :, j, :] = image
    size = in_dim * out_dim
    return _make(in_dim, out_dim, choi4.reshape(size, size), structure, label)


def identity_map(n: int) -> SuperMap:
    """iota on M_n; C_iota = p"""
    return _make(n, n, max_entangled_p(n), Structure.CP, "identity")


def transpose_map(n: int) -> SuperMap:
    """t on M_n; C_t = F"""
    return _make(n, n, flip_operator(n), Structure.COCP, "transpose")


def ad_v(v) -> SuperMap:
    """
    Ad V: a -> V a V*, for V of shape (out_dim, in_dim)

    C = w w* with w_{(i,a)} = V[a, i]
    """
    v = as_matrix(v)
    out_dim, in_dim = v.shape
    w = v.T.reshape(in_dim * out_dim)
    return _make(in_dim, out_dim, np.outer(w, w.conj()), Structure.CP, "Ad V")


def from_kraus(ops: Sequence) -> SuperMap:
    """sum_i Ad V_i"""
    ops = list(ops)
    if not ops:
        raise DimensionError("at least one Kraus operator is required")
    return sum_maps([(1.0, ad_v(op)) for op in ops]).relabel("kraus")


def lambda_mu_map(n: int, mu: float) -> SuperMap:
    """a -> Tr(a) I - mu a; Choi I (x) I - mu p"""
    if n < 1:
        raise DimensionError(f"n must be >= 1, got {n}")
    choi = np.eye(n * n, dtype=complex) - mu * max_entangled_p(n)
    return _make(n, n, choi, Structure.UNKNOWN, f"lambda_{mu:g}")


def reduction_map(n: int) -> SuperMap:
    return lambda_mu_map(n, 1.0).relabel("reduction")


def sum_maps(terms: Iterable[Tuple[float, SuperMap]]) -> SuperMap:
    """
    Nonnegative combination sum_i w_i phi_i
    """
    terms = list(terms)
    if not terms:
        raise DimensionError("sum_maps needs at least one term")
    in_dim, out_dim = terms[0][1].in_dim, terms[0][1].out_dim
    choi = np.zeros_like(terms[0][1].choi)
    structure = None
    for weight, phi in terms:
        if weight < 0:
            raise ValueError(f"weights must be nonnegative, got {weight}")
        if (phi.in_dim, phi.out_dim) != (in_dim, out_dim):
            raise DimensionError(f"cannot add {phi!r} to maps M_{in_dim} -> M_{out_dim}")
        choi = choi + weight * phi.choi
        structure = phi.structure if structure is None else structure.add(phi.structure)
    return _make(in_dim, out_dim, choi, structure, "sum")


def apply(phi: SuperMap, a) -> ComplexMatrix:
    """phi(a) = Tr_first((a^t (x) I) C_phi)"""
    a = as_matrix(a)
    if a.shape != (phi.in_dim, phi.in_dim):
        raise DimensionError(f"{phi!r} cannot act on a matrix of shape {a.shape}")
    return np.einsum('ij,iajb->ab', a, phi.choi4)


def _compose_direct(phi: SuperMap, psi: SuperMap) -> np.ndarray:
    # (phi o psi)(e_ij) = sum_ab psi(e_ij)[a, b] phi(e_ab)
    choi4 = np.einsum('iajb,acbd->icjd', psi.choi4, phi.choi4)
    size = psi.in_dim * phi.out_dim
    return choi4.reshape(size, size)


def _compose_via_tensor(phi: SuperMap, psi: SuperMap) -> np.ndarray:
    # C_{phi o psi} = (psi^{*t} (x) phi)(p)
    if not (psi.is_square and phi.is_square):
        raise DimensionError("the tensor route needs maps of a single algebra B(H) -> B(H)")
    return apply(tensor(star_t(psi), phi), max_entangled_p(psi.in_dim))


def compose(phi: SuperMap, psi: SuperMap, method: str = "direct") -> SuperMap:
    """
    phi o psi

    Args:
        phi: Outer map
        psi: Inner map, out_dim(psi) == in_dim(phi)
        method: "direct" (unit expansion) or "tensor" ((psi^{*t} (x) phi)(p))
    """
    if psi.out_dim != phi.in_dim:
        raise DimensionError(f"cannot compose {phi!r} after {psi!r}")
    if method == "direct":
        choi = _compose_direct(phi, psi)
    elif method == "tensor":
        choi = _compose_via_tensor(phi, psi)
    else:
        raise ValueError(f"unknown composition method {method!r}")

    if config.CHECK_COMPOSE and psi.is_square and phi.is_square and psi.in_dim == phi.in_dim:
        other = _compose_via_tensor(phi, psi) if method == "direct" else _compose_direct(phi, psi)
        gap = float(np.linalg.norm(choi - other))
        if gap > COMPOSE_AGREEMENT_TOL:
            raise CompositionMismatch(f"composition paths disagree by {gap:.3e}")

    return _make(psi.in_dim, phi.out_dim, choi, phi.structure.compose(psi.structure), "composite")


def tensor(psi: SuperMap, phi: SuperMap) -> SuperMap:
    """
    psi (x) phi: B(K1 (x) K2) -> B(H1 (x) H2)

    Choi legs (in1, out1, in2, out2) are regrouped to (in1, in2, out1, out2).
    """
    k1, n1, k2, n2 = psi.in_dim, psi.out_dim, phi.in_dim, phi.out_dim
    joint = kron(psi.choi, phi.choi).reshape(k1, n1, k2, n2, k1, n1, k2, n2)
    size = k1 * k2 * n1 * n2
    choi = joint.transpose(0, 2, 1, 3, 4, 6, 5, 7).reshape(size, size)
    return _make(k1 * k2, n1 * n2, choi, psi.structure.tensor(phi.structure), "tensor")


def _choi_is_hermitian(phi: SuperMap) -> bool:
    try:
        check_hermitian(phi.choi, CHOI_HERMITIAN_RTOL)
    except HermiticityError:
        return False
    return True


def adjoint(phi: SuperMap) -> SuperMap:
    """
    phi* with Tr(phi(a) b) = Tr(a phi*(b))

    For Hermiticity-preserving maps of one algebra C_{phi*} = J C_phi J; otherwise
    the Choi legs are read in reverse order.
    """
    if phi.is_square and _choi_is_hermitian(phi):
        choi = j_conjugate(phi.choi)
    else:
        size = phi.in_dim * phi.out_dim
        choi = phi.choi4.transpose(3, 2, 1, 0).reshape(size, size)
    return _make(phi.out_dim, phi.in_dim, choi, phi.structure, "adjoint")


def transpose_conj(phi: SuperMap) -> SuperMap:
    """phi^t = t o phi o t; C_{phi^t} = C_phi^t"""
    return _make(phi.in_dim, phi.out_dim, phi.choi.T, phi.structure, "transpose_conj")


def star_t(phi: SuperMap) -> SuperMap:
    """phi^{*t}"""
    return transpose_conj(adjoint(phi)).relabel("star_t")


def tilde_apply(phi: SuperMap, x) -> complex:
    """phi~(x) = Tr(C_phi^t x)"""
    x = as_matrix(x)
    if x.shape != phi.choi.shape:
        raise DimensionError(f"tilde functional of {phi!r} needs shape {phi.choi.shape}, got {x.shape}")
    return complex(np.sum(phi.choi * x))


def pair(phi: SuperMap, psi: SuperMap) -> float:
    """Tr(C_phi C_psi), real for Hermitian Choi matrices"""
    if phi.choi.shape != psi.choi.shape:
        raise DimensionError(f"cannot pair {phi!r} with {psi!r}")
    value = complex(np.sum(phi.choi * psi.choi.T))
    if abs(value.imag) > PAIR_IMAG_TOL * (1.0 + abs(value.real)):
        raise HermiticityError(f"pairing has imaginary part {value.imag:.3e}", abs(value.imag))
    return value.real


def pi_contract(x) -> ComplexMatrix:
    """
    pi(a (x) b) = b^t a, extended linearly: pi(x)_{rs} = sum_m x_{(m,m),(s,r)}
    """
    x = as_matrix(x)
    if x.shape[0] != x.shape[1]:
        raise DimensionError(f"pi_contract needs a square matrix, got shape {x.shape}")
    n = tensor_root(x.shape[0])
    return np.einsum('mmsr->rs', x.reshape(n, n, n, n))


def partial_transpose_output(phi: SuperMap) -> ComplexMatrix:
    """(iota (x) t)(C_phi), the Choi matrix of t o phi"""
    return partial_transpose(phi.choi, "second", (phi.in_dim, phi.out_dim))


def random_map(in_dim: int, out_dim: int, rng: np.random.Generator) -> SuperMap:
    """
    Hermiticity-preserving map with a random Hermitian Choi matrix
    """
    size = in_dim * out_dim
    g = random_complex(rng, (size, size))
    return _make(in_dim, out_dim, 0.5 * (g + g.conj().T), Structure.UNKNOWN, "random")


def random_cp_map(in_dim: int, out_dim: int, rng: np.random.Generator, terms: int = 2) -> SuperMap:
    ops = [random_complex(rng, (out_dim, in_dim)) for _ in range(terms)]
    return from_kraus(ops).relabel("random_cp")
