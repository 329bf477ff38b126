#!/usr/bin/env python3
"""
Dense complex linear algebra on tensor products of matrix algebras

Composite index convention: (i, j) -> i * dim(second) + j, the first tensor
leg being the left factor. Matrix units are 1-based as in e_{ij}.
"""

import logging
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from errors import DimensionError, HermiticityError

logger = logging.getLogger(__name__)

# Dense complex matrix, square or rectangular
ComplexMatrix = np.ndarray

HERMITIAN_RTOL = 1e-12


def as_matrix(x) -> ComplexMatrix:
    arr = np.asarray(x, dtype=complex)
    if arr.ndim != 2:
        raise DimensionError(f"expected a matrix, got array of shape {arr.shape}")
    return arr


def tensor_root(dim: int) -> int:
    """
    m with m * m == dim, for operators on H (x) H
    """
    m = math.isqrt(dim)
    if m * m != dim:
        raise DimensionError(f"dimension {dim} is not a perfect tensor square")
    return m


def kron(a: ComplexMatrix, b: ComplexMatrix) -> ComplexMatrix:
    """(a (x) b)_{(i,j),(k,l)} = a_{ik} b_{jl}"""
    return np.kron(as_matrix(a), as_matrix(b))


def partial_trace(x: ComplexMatrix, leg: str, dims: Tuple[int, int]) -> ComplexMatrix:
    """
    Trace out one leg of an operator on K (x) H

    Args:
        x: Square matrix of size k*n
        leg: "first" (trace out K) or "second" (trace out H)
        dims: (k, n)

    Returns:
        n x n matrix for leg="first", k x k for leg="second"
    """
    x = as_matrix(x)
    k, n = dims
    if x.shape != (k * n, k * n):
        raise DimensionError(f"partial_trace: shape {x.shape} does not match dims {dims}")
    x4 = x.reshape(k, n, k, n)
    if leg == "first":
        return np.einsum('iaib->ab', x4)
    if leg == "second":
        return np.einsum('iaja->ij', x4)
    raise ValueError(f"leg must be 'first' or 'second', got {leg!r}")


def partial_transpose(x: ComplexMatrix, leg: str, dims: Tuple[int, int]) -> ComplexMatrix:
    """Transpose one tensor leg of an operator on K (x) H"""
    x = as_matrix(x)
    k, n = dims
    if x.shape != (k * n, k * n):
        raise DimensionError(f"partial_transpose: shape {x.shape} does not match dims {dims}")
    x4 = x.reshape(k, n, k, n)
    if leg == "first":
        return x4.transpose(2, 1, 0, 3).reshape(k * n, k * n)
    if leg == "second":
        return x4.transpose(0, 3, 2, 1).reshape(k * n, k * n)
    raise ValueError(f"leg must be 'first' or 'second', got {leg!r}")


def hermitian_deviation(x: ComplexMatrix) -> float:
    """max |x_ij - conj(x_ji)|"""
    x = as_matrix(x)
    if x.shape[0] != x.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {x.shape}")
    if x.size == 0:
        return 0.0
    return float(np.max(np.abs(x - x.conj().T)))


def check_hermitian(x: ComplexMatrix, rtol: float = HERMITIAN_RTOL) -> float:
    """
    Raise HermiticityError unless max |x - x*| <= rtol * (1 + max |x|)

    Returns:
        The observed deviation
    """
    x = as_matrix(x)
    deviation = hermitian_deviation(x)
    scale = 1.0 + (float(np.max(np.abs(x))) if x.size else 0.0)
    if deviation > rtol * scale:
        raise HermiticityError(
            f"matrix is not Hermitian: deviation {deviation:.3e} exceeds {rtol:.1e} x {scale:.3e}",
            deviation,
        )
    return deviation


def hermitize(x: ComplexMatrix) -> ComplexMatrix:
    x = as_matrix(x)
    return 0.5 * (x + x.conj().T)


@dataclass(frozen=True)
class HermitianSpectrum:
    eigenvalues: np.ndarray   # ascending, real
    eigenvectors: np.ndarray  # columns
    deviation: float          # Hermiticity deviation of the input before symmetrizing

    @property
    def min_eigenvalue(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def bottom_vector(self) -> np.ndarray:
        return self.eigenvectors[:, 0]


def hermitian_spectrum(x: ComplexMatrix, rtol: float = HERMITIAN_RTOL) -> HermitianSpectrum:
    """
    Spectrum of the Hermitian part of x after checking x is Hermitian within rtol
    """
    x = as_matrix(x)
    deviation = check_hermitian(x, rtol)
    if deviation > 0.0:
        logger.debug("symmetrizing input with Hermiticity deviation %.3e", deviation)
    eigenvalues, eigenvectors = np.linalg.eigh(hermitize(x))
    return HermitianSpectrum(eigenvalues=eigenvalues, eigenvectors=eigenvectors, deviation=deviation)


def hermitian_min_eig(x: ComplexMatrix, rtol: float = HERMITIAN_RTOL) -> float:
    return hermitian_spectrum(x, rtol).min_eigenvalue


def bottom_eigenpair(x: ComplexMatrix, rtol: float = HERMITIAN_RTOL) -> Tuple[float, np.ndarray]:
    spectrum = hermitian_spectrum(x, rtol)
    return spectrum.min_eigenvalue, spectrum.bottom_vector


def is_psd(x: ComplexMatrix, tol: float, rtol: float = HERMITIAN_RTOL) -> bool:
    return hermitian_min_eig(x, rtol) >= -tol


def matrix_unit(i: int, j: int, n: int) -> ComplexMatrix:
    """
    e_{ij} in M_n, 1-based: e_{ij} e_{kl} = delta_{jk} e_{il}
    """
    if not (1 <= i <= n and 1 <= j <= n):
        raise DimensionError(f"matrix unit indices ({i}, {j}) out of range for n={n}")
    unit = np.zeros((n, n), dtype=complex)
    unit[i - 1, j - 1] = 1.0
    return unit


def max_entangled_vector(n: int) -> np.ndarray:
    """u = sum_i e_i (x) e_i, unnormalized (|u|^2 = n)"""
    if n < 1:
        raise DimensionError(f"n must be >= 1, got {n}")
    return np.eye(n, dtype=complex).reshape(n * n)


def max_entangled_p(n: int) -> ComplexMatrix:
    """
    p = sum_{ij} e_{ij} (x) e_{ij} = |u><u|; p^2 = n p, Tr p = n
    """
    u = max_entangled_vector(n)
    return np.outer(u, u.conj())


def flip_operator(n: int) -> ComplexMatrix:
    """F = sum_{ij} e_{ij} (x) e_{ji}; F(x (x) y) = y (x) x"""
    if n < 1:
        raise DimensionError(f"n must be >= 1, got {n}")
    eye = np.eye(n, dtype=complex)
    return np.einsum('il,jk->ijkl', eye, eye).reshape(n * n, n * n)


def j_conjugate(x: ComplexMatrix) -> ComplexMatrix:
    """
    J x J for the conjugation J(z e_i (x) e_j) = conj(z) e_j (x) e_i

    (JxJ)_{(a,b),(c,d)} = conj(x_{(b,a),(d,c)}); equals F x F when x is real.
    """
    x = as_matrix(x)
    if x.shape[0] != x.shape[1]:
        raise DimensionError(f"j_conjugate needs a square matrix, got shape {x.shape}")
    n = tensor_root(x.shape[0])
    return x.reshape(n, n, n, n).transpose(1, 0, 3, 2).conj().reshape(n * n, n * n)
