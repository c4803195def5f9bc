"""Vectorised master-equation generators with explicit phase factors.

A generator is stored as  L(t) = sum_k exp(i w_k t) L_k  acting on
row-major vec(rho), with every L_k a CSR matrix.  With this convention
vec(A rho B) = (A kron B^T) vec(rho).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

_FREQ_DECIMALS = 9


def _csr(mat) -> sp.csr_matrix:
    m = sp.csr_matrix(np.asarray(mat, dtype=complex))
    m.eliminate_zeros()
    return m


def commutator_superop(h) -> sp.csr_matrix:
    """Superoperator of rho -> -i[H, rho]."""
    h = _csr(h)
    eye = sp.identity(h.shape[0], dtype=complex, format="csr")
    return (-1j * (sp.kron(h, eye) - sp.kron(eye, h.T))).tocsr()


def standard_dissipator_superop(o, rate: float) -> sp.csr_matrix:
    """rate * (o rho o^+ - {o^+ o, rho}/2)."""
    o = _csr(o)
    eye = sp.identity(o.shape[0], dtype=complex, format="csr")
    od_o = (o.conj().T @ o).tocsr()
    sup = sp.kron(o, o.conj()) - 0.5 * sp.kron(od_o, eye) - 0.5 * sp.kron(eye, od_o.T)
    return (rate * sup).tocsr()


def two_photon_dissipator_superop(o, coeff: complex) -> sp.csr_matrix:
    """-coeff * (o rho o - {o o, rho}/2)."""
    o = _csr(o)
    eye = sp.identity(o.shape[0], dtype=complex, format="csr")
    oo = (o @ o).tocsr()
    sup = sp.kron(o, o.T) - 0.5 * sp.kron(oo, eye) - 0.5 * sp.kron(eye, oo.T)
    return (-coeff * sup).tocsr()


@dataclass
class PhasedGenerator:
    freqs: np.ndarray            # (K,) float64
    mats: list                   # K CSR matrices
    dim: int                     # Hilbert-space dimension d (vector length d*d)

    def __post_init__(self):
        n = self.dim * self.dim
        self.freqs = np.asarray(self.freqs, dtype=float)
        if len(self.mats) != len(self.freqs):
            raise ValueError("one matrix per frequency required")
        for m in self.mats:
            if m.shape != (n, n):
                raise ValueError(f"superoperator shape {m.shape} != {(n, n)}")
        self._pack()

    def _pack(self):
        n = self.dim * self.dim
        k = len(self.mats)
        self.indptr = np.zeros((max(k, 1), n + 1), dtype=np.int64)
        idx, dat = [], []
        offset = 0
        for i, m in enumerate(self.mats):
            m.sort_indices()
            self.indptr[i] = m.indptr.astype(np.int64) + offset
            idx.append(m.indices.astype(np.int64))
            dat.append(m.data.astype(complex))
            offset += m.nnz
        self.indices = np.concatenate(idx) if idx else np.zeros(0, dtype=np.int64)
        self.data = np.concatenate(dat) if dat else np.zeros(0, dtype=complex)
        self.n_terms = k

    @property
    def nnz(self) -> int:
        return int(self.data.size)

    @property
    def is_static(self) -> bool:
        return bool(np.all(self.freqs == 0.0))

    def matrix_at(self, t: float) -> sp.csr_matrix:
        total = None
        for w, m in zip(self.freqs, self.mats):
            term = m if w == 0.0 else m * np.exp(1j * w * t)
            total = term if total is None else total + term
        if total is None:
            n = self.dim * self.dim
            return sp.csr_matrix((n, n), dtype=complex)
        return total.tocsr()

    def apply(self, t: float, y: np.ndarray) -> np.ndarray:
        out = np.zeros_like(y, dtype=complex)
        for w, m in zip(self.freqs, self.mats):
            if w == 0.0:
                out += m @ y
            else:
                out += np.exp(1j * w * t) * (m @ y)
        return out


def assemble(terms, dim: int) -> PhasedGenerator:
    """Merge (freq, superoperator) pairs with equal frequencies."""
    merged: dict[float, sp.csr_matrix] = {}
    for w, m in terms:
        key = round(float(w), _FREQ_DECIMALS)
        if key == 0.0:
            key = 0.0
        merged[key] = m if key not in merged else (merged[key] + m)
    freqs, mats = [], []
    for w in sorted(merged, key=lambda x: (x != 0.0, x)):
        m = merged[w].tocsr()
        m.eliminate_zeros()
        if m.nnz == 0 and w != 0.0:
            continue
        freqs.append(w)
        mats.append(m)
    if not mats:
        n = dim * dim
        freqs, mats = [0.0], [sp.csr_matrix((n, n), dtype=complex)]
    return PhasedGenerator(np.array(freqs), mats, dim)
