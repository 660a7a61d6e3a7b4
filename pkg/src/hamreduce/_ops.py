"""Low-level helpers for placing small operators on multi-qubit registers.

Qubit 0 is the most significant bit of a basis index throughout.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np
import scipy.sparse as sp


def embed_sparse(block: np.ndarray, support: Sequence[int], n: int) -> sp.csr_matrix:
    """Sparse ``2**n`` matrix acting as ``block`` on ``support`` and identity elsewhere."""
    support = list(support)
    k = len(support)
    dim = 1 << n
    block = np.asarray(block, dtype=complex)
    if k == 0:
        return sp.identity(dim, dtype=complex, format="csr") * block.reshape(-1)[0]
    rest = [q for q in range(n) if q not in support]
    rest_idx = np.zeros(1 << len(rest), dtype=np.int64)
    for pos, q in enumerate(rest):
        bit = (np.arange(1 << len(rest)) >> (len(rest) - 1 - pos)) & 1
        rest_idx |= bit.astype(np.int64) << (n - 1 - q)
    local = np.zeros(1 << k, dtype=np.int64)
    for pos, q in enumerate(support):
        bit = (np.arange(1 << k) >> (k - 1 - pos)) & 1
        local |= bit.astype(np.int64) << (n - 1 - q)
    bi, bj = np.nonzero(block)
    vals = block[bi, bj]
    rows = (rest_idx[:, None] | local[bi][None, :]).ravel()
    cols = (rest_idx[:, None] | local[bj][None, :]).ravel()
    data = np.broadcast_to(vals, (rest_idx.size, vals.size)).ravel()
    return sp.csr_matrix((data, (rows, cols)), shape=(dim, dim))


def apply_local(state: np.ndarray, mat: np.ndarray, qubits: Sequence[int], n: int) -> np.ndarray:
    """Apply a ``2**k`` matrix to ``qubits`` of an ``n``-qubit state vector."""
    k = len(qubits)
    if k == 0:
        return state * mat.reshape(-1)[0]
    psi = state.reshape((2,) * n)
    op = mat.reshape((2,) * (2 * k))
    out = np.tensordot(op, psi, axes=(list(range(k, 2 * k)), list(qubits)))
    # tensordot puts the acted-on axes first; move them back.
    out = np.moveaxis(out, list(range(k)), list(qubits))
    return out.reshape(-1)


def basis_index(bits: Sequence[int]) -> int:
    out = 0
    for b in bits:
        out = (out << 1) | int(b)
    return out


def ket(bits: Sequence[int]) -> np.ndarray:
    v = np.zeros(1 << len(bits), dtype=complex)
    v[basis_index(bits)] = 1.0
    return v


def projector(bits: Sequence[int]) -> np.ndarray:
    """``|bits><bits|`` as a dense matrix on ``len(bits)`` qubits."""
    v = ket(bits)
    return np.outer(v, v.conj())


def kron_all(mats: Sequence[np.ndarray]) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for m in mats:
        out = np.kron(out, m)
    return out


def sort_block(block: np.ndarray, qubits: Sequence[int]) -> tuple[np.ndarray, tuple[int, ...]]:
    """Permute a block acting on ``qubits`` (in the given order) to ascending qubit order."""
    qubits = list(qubits)
    k = len(qubits)
    if len(set(qubits)) != k:
        raise ValueError(f"repeated qubit in {qubits}")
    perm = sorted(range(k), key=lambda i: qubits[i])
    if perm == list(range(k)):
        return np.asarray(block), tuple(qubits)
    t = np.asarray(block).reshape((2,) * (2 * k))
    t = t.transpose(perm + [p + k for p in perm])
    return t.reshape(1 << k, 1 << k), tuple(qubits[i] for i in perm)
