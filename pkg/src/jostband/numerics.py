"""Dense complex L x L matrix kernel used by every other module.

Everything here is a pure function on immutable numpy arrays: products,
adjoints, guarded inverses, rank-revealing kernel bases and orthogonal
projectors.  Matrices are small (L <= a few dozen), so plain LAPACK via
numpy is the right tool; no sparsity, no in-place mutation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, InputError, SingularityError

# Relative singular-value threshold separating "zero" from "small".
DEFAULT_RANK_TOL = 1e-8

# Inverses are refused below this relative smallest singular value.
SINGULARITY_CUTOFF = 1e-12

ORTHONORMALITY_TOL = 1e-12


def as_matrix(m, dim: int | None = None) -> np.ndarray:
    """Coerce to a finite complex 2-D array, optionally enforcing a square size."""
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2:
        raise DimensionError(f"expected a matrix, got ndim={a.ndim}")
    if not np.all(np.isfinite(a.real)) or not np.all(np.isfinite(a.imag)):
        raise InputError("matrix has non-finite entries")
    if dim is not None and a.shape != (dim, dim):
        raise DimensionError(f"expected shape {(dim, dim)}, got {a.shape}")
    return a


def adjoint(m: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return np.conjugate(np.asarray(m)).T


def spectral_norm(m) -> float:
    a = np.atleast_2d(np.asarray(m, dtype=np.complex128))
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def hermitian_defect(m) -> float:
    a = as_matrix(m)
    return spectral_norm(a - adjoint(a))


def hermitian_part(m) -> np.ndarray:
    a = as_matrix(m)
    return 0.5 * (a + adjoint(a))


def identity(dim: int) -> np.ndarray:
    return np.eye(dim, dtype=np.complex128)


@dataclass(frozen=True, eq=False)
class SubspaceBasis:
    """Orthonormal basis of a subspace of C^L, stored as columns.

    ``vectors`` has shape (L, d) with d >= 0; pairwise inner products must
    equal the Kronecker delta within 1e-12.
    """

    vectors: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=np.complex128)
        if v.ndim != 2:
            raise DimensionError("basis vectors must form an (L, d) array")
        gram = adjoint(v) @ v
        if spectral_norm(gram - np.eye(v.shape[1])) > ORTHONORMALITY_TOL:
            raise InputError("basis vectors are not orthonormal within 1e-12")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "vectors", v)

    @property
    def ambient_dim(self) -> int:
        return self.vectors.shape[0]

    @property
    def count(self) -> int:
        return self.vectors.shape[1]


def kernel_basis(m, rank_tol: float = DEFAULT_RANK_TOL) -> SubspaceBasis:
    """Orthonormal basis of the numerical null space of a square matrix.

    A singular direction counts as null when its singular value is at most
    ``rank_tol`` times the largest one (or ``rank_tol`` itself for the zero
    matrix).
    """
    if rank_tol <= 0:
        raise InputError("rank_tol must be positive")
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise DimensionError("kernel_basis needs a square matrix")
    _, s, vh = np.linalg.svd(a)
    scale = s[0] if s.size and s[0] > 0.0 else 1.0
    null_mask = s <= rank_tol * scale
    vectors = adjoint(vh[null_mask, :])
    return SubspaceBasis(vectors)


def range_basis(m, rank_tol: float = DEFAULT_RANK_TOL) -> SubspaceBasis:
    """Orthonormal basis of the numerical column space (left singular vectors)."""
    if rank_tol <= 0:
        raise InputError("rank_tol must be positive")
    a = as_matrix(m)
    u, s, _ = np.linalg.svd(a)
    scale = s[0] if s.size and s[0] > 0.0 else 1.0
    keep = s > rank_tol * scale
    return SubspaceBasis(u[:, keep])


def orthogonal_projector(basis: SubspaceBasis) -> np.ndarray:
    """P = sum_i v_i v_i^*; satisfies P^2 = P = P^* within 1e-12."""
    v = basis.vectors
    if v.shape[1] == 0:
        return np.zeros((v.shape[0], v.shape[0]), dtype=np.complex128)
    return v @ adjoint(v)


def orthonormal_complement(basis: SubspaceBasis) -> SubspaceBasis:
    """Orthonormal basis of the orthogonal complement, via the complement projector."""
    dim = basis.ambient_dim
    comp = identity(dim) - orthogonal_projector(basis)
    # Range of the complement projector; its nonzero singular values are all 1.
    return range_basis(comp, rank_tol=0.5)


def singular_value_ratio(m) -> float:
    """sigma_min / sigma_max, the reciprocal condition number (0 for the zero matrix)."""
    a = as_matrix(m)
    s = np.linalg.svd(a, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0.0
    return float(s[-1] / s[0])


def inverse(m) -> np.ndarray:
    """Inverse of a square matrix, refusing numerically singular input.

    Raises SingularityError (carrying sigma_min/sigma_max) when the smallest
    singular value is at most 1e-12 times the largest.
    """
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise DimensionError("inverse needs a square matrix")
    if a.shape[0] == 0:
        return a.copy()
    ratio = singular_value_ratio(a)
    if ratio <= SINGULARITY_CUTOFF:
        raise SingularityError(ratio)
    return np.linalg.inv(a)


def is_invertible(m, cutoff: float = DEFAULT_RANK_TOL) -> bool:
    a = as_matrix(m)
    return a.shape[0] == 0 or singular_value_ratio(a) > cutoff
