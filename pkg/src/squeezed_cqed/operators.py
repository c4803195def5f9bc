"""Dense operator algebra on small tensor-product Hilbert spaces.

Basis conventions used throughout the package:

* atom factor: ``|g> = 0``, ``|e> = 1`` so that ``sigma_z = diag(-1, +1)``
* factor order for the full model: ``(atom, a_s, c)``
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from typing import Sequence

import numpy as np


class DimensionError(ValueError):
    """Raised for invalid or mismatched Hilbert-space dimensions."""


@dataclass(frozen=True)
class HilbertSpace:
    factor_dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.factor_dims)
        if not dims or any(d < 1 for d in dims):
            raise DimensionError(f"factor dimensions must be >= 1, got {self.factor_dims}")
        object.__setattr__(self, "factor_dims", dims)

    @property
    def dim(self) -> int:
        return int(np.prod(self.factor_dims))

    @property
    def n_factors(self) -> int:
        return len(self.factor_dims)

    def __len__(self):
        return len(self.factor_dims)


def _as_space(space) -> HilbertSpace:
    if isinstance(space, HilbertSpace):
        return space
    return HilbertSpace(tuple(space))


def _frozen(mat) -> np.ndarray:
    arr = np.array(mat, dtype=complex, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Operator:
    """Square complex matrix tagged with the space it acts on."""

    space: HilbertSpace
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        space = _as_space(self.space)
        mat = _frozen(self.matrix)
        if mat.shape != (space.dim, space.dim):
            raise DimensionError(
                f"matrix shape {mat.shape} does not match space dimension {space.dim}")
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "matrix", mat)

    @property
    def dim(self) -> int:
        return self.space.dim

    def dag(self) -> "Operator":
        return Operator(self.space, self.matrix.conj().T)

    def _check(self, other: "Operator"):
        if other.space != self.space:
            raise DimensionError(
                f"space mismatch: {self.space.factor_dims} vs {other.space.factor_dims}")

    def __add__(self, other):
        if isinstance(other, Operator):
            self._check(other)
            return Operator(self.space, self.matrix + other.matrix)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, Operator):
            self._check(other)
            return Operator(self.space, self.matrix - other.matrix)
        return NotImplemented

    def __neg__(self):
        return Operator(self.space, -self.matrix)

    def __mul__(self, scalar):
        if np.isscalar(scalar):
            return Operator(self.space, self.matrix * scalar)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return Operator(self.space, self.matrix / scalar)

    def __matmul__(self, other):
        if isinstance(other, Operator):
            self._check(other)
            return Operator(self.space, self.matrix @ other.matrix)
        return NotImplemented

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.matrix - self.matrix.conj().T), initial=0.0) <= tol)

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))


def commutator(a: Operator, b: Operator) -> Operator:
    return a @ b - b @ a


def identity(space) -> Operator:
    space = _as_space(space)
    return Operator(space, np.eye(space.dim))


def zero(space) -> Operator:
    space = _as_space(space)
    return Operator(space, np.zeros((space.dim, space.dim)))


@dataclass(frozen=True, eq=False)
class StateVector:
    space: HilbertSpace
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        space = _as_space(self.space)
        amps = _frozen(self.amplitudes).reshape(-1)
        if amps.shape != (space.dim,):
            raise DimensionError(f"state length {amps.size} != space dimension {space.dim}")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"state vector must have unit norm, got {norm!r}")
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "amplitudes", amps)

    def density_matrix(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())

    def overlap(self, other: "StateVector") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))


def fock_destroy(dim: int) -> Operator:
    """Truncated annihilation operator with <n-1|a|n> = sqrt(n)."""
    if int(dim) != dim or dim < 2:
        raise DimensionError(f"Fock truncation must be >= 2, got {dim}")
    dim = int(dim)
    return Operator(HilbertSpace((dim,)), np.diag(np.sqrt(np.arange(1, dim)), 1))


_ATOM_MATRICES = {
    "sigma_minus": [[0, 1], [0, 0]],
    "sigma_plus": [[0, 0], [1, 0]],
    "sigma_z": [[-1, 0], [0, 1]],
    "projector_e": [[0, 0], [0, 1]],
    "projector_g": [[1, 0], [0, 0]],
}


def atom_op(kind: str) -> Operator:
    """Two-level atom operator; ``kind`` is one of sigma_minus, sigma_plus,
    sigma_z, projector_e, projector_g."""
    try:
        mat = _ATOM_MATRICES[kind]
    except KeyError:
        raise ValueError(f"unknown atom operator {kind!r}") from None
    return Operator(HilbertSpace((2,)), mat)


def embed(op: Operator, slot: int, space) -> Operator:
    """Place a single-factor operator at position ``slot`` of ``space``."""
    space = _as_space(space)
    if not 0 <= slot < space.n_factors:
        raise DimensionError(f"slot {slot} out of range for {space.n_factors} factors")
    if op.dim != space.factor_dims[slot]:
        raise DimensionError(
            f"operator dimension {op.dim} != factor {slot} dimension {space.factor_dims[slot]}")
    mats = [np.eye(d) for d in space.factor_dims]
    mats[slot] = op.matrix
    return Operator(space, reduce(np.kron, mats))


def expectation(rho, op: Operator) -> complex:
    """tr(rho op). ``rho`` may be a DensityMatrix-like object or an array."""
    mat = getattr(rho, "matrix", rho)
    space = getattr(rho, "space", None)
    if space is not None and space != op.space:
        raise DimensionError("density matrix and operator live on different spaces")
    mat = np.asarray(mat)
    if mat.shape != op.matrix.shape:
        raise DimensionError(f"shape mismatch {mat.shape} vs {op.matrix.shape}")
    # tr(AB) without forming the product
    return complex(np.sum(mat * op.matrix.T))


_ATOM_LABELS = {"g": 0, "e": 1}


def basis_product_state(space, labels: Sequence) -> StateVector:
    """Product basis state; atom labels may be given as 'g'/'e'."""
    space = _as_space(space)
    if len(labels) != space.n_factors:
        raise DimensionError(f"need {space.n_factors} labels, got {len(labels)}")
    idx = []
    for lab, d in zip(labels, space.factor_dims):
        if isinstance(lab, str):
            if lab not in _ATOM_LABELS or d != 2:
                raise ValueError(f"label {lab!r} not valid for factor of dimension {d}")
            lab = _ATOM_LABELS[lab]
        if not 0 <= int(lab) < d:
            raise ValueError(f"label {lab} out of range for factor of dimension {d}")
        idx.append(int(lab))
    amps = np.zeros(space.dim, dtype=complex)
    amps[np.ravel_multi_index(idx, space.factor_dims)] = 1.0
    return StateVector(space, amps)


def number_diagonal(space, weights: Sequence[float]) -> np.ndarray:
    """Diagonal of sum_k weights[k] * n_k where n_k counts quanta in factor k.

    For the atom factor the count is the excited-state projector.
    """
    space = _as_space(space)
    grids = np.meshgrid(*[np.arange(d) for d in space.factor_dims], indexing="ij")
    total = sum(w * gr for w, gr in zip(weights, grids))
    return np.asarray(total, dtype=float).reshape(-1)
