"""Systematic polar encoding over a coset.

Given the systematic bits ``x_B`` (B is the bit-reversed image of the
information set A) and the frozen values ``u_{A^c}``, find the unique coset
member x that carries ``x_B`` on B. Two implementations are provided: an
explicit GF(2) linear-algebra route, kept as a reference, and an
O(N log N) back-substitution on the SC tree that is used in production.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from ._backend import kernels
from .polar_core import CodeSpec, _bitrev_cached

ALGEBRAIC_MAX_N = 4096


@dataclass(frozen=True)
class SystematicSpec:
    base: CodeSpec

    @cached_property
    def b_set(self) -> np.ndarray:
        """Systematic positions, ascending."""
        b = np.sort(_bitrev_cached(self.base.n)[self.base.info_array])
        b.flags.writeable = False
        return b

    @property
    def N(self) -> int:
        return self.base.N

    @property
    def K(self) -> int:
        return self.base.K


def _check(x_B, u_frozen, sspec):
    x_B = np.asarray(x_B)
    u_frozen = np.asarray(u_frozen)
    if x_B.ndim != 1 or x_B.size != sspec.K:
        raise ValueError(f"x_B must have K={sspec.K} bits")
    if u_frozen.ndim != 1 or u_frozen.size != sspec.N - sspec.K:
        raise ValueError(f"u_frozen must have N-K={sspec.N - sspec.K} bits")
    return x_B.astype(np.uint8) & 1, u_frozen.astype(np.uint8) & 1


# --- GF(2) helpers ---------------------------------------------------------

def generator_matrix(n: int) -> np.ndarray:
    """G_N = B_N F^{(x)n} as an explicit 0/1 matrix."""
    F = np.array([[1, 0], [1, 1]], dtype=np.uint8)
    G = np.ones((1, 1), dtype=np.uint8)
    for _ in range(n):
        G = np.kron(G, F)
    rev = _bitrev_cached(n)
    return np.ascontiguousarray(G[rev])


def gf2_inverse(M) -> np.ndarray:
    """Inverse of a square 0/1 matrix over GF(2) by Gauss-Jordan elimination.

    Raises ``np.linalg.LinAlgError`` if M is singular.
    """
    M = np.asarray(M, dtype=np.uint8) & 1
    k = M.shape[0]
    if M.ndim != 2 or M.shape[1] != k:
        raise ValueError("matrix must be square")
    aug = np.packbits(np.concatenate([M, np.eye(k, dtype=np.uint8)], axis=1), axis=1)
    for col in range(k):
        byte, mask = col >> 3, np.uint8(0x80 >> (col & 7))
        hits = np.flatnonzero(aug[col:, byte] & mask)
        if hits.size == 0:
            raise np.linalg.LinAlgError("matrix is singular over GF(2)")
        piv = col + hits[0]
        if piv != col:
            aug[[col, piv]] = aug[[piv, col]]
        rows = np.flatnonzero(aug[:, byte] & mask)
        rows = rows[rows != col]
        aug[rows] ^= aug[col]
    return np.unpackbits(aug, axis=1, count=2 * k)[:, k:]


@lru_cache(maxsize=8)
def _algebraic_parts(base: CodeSpec):
    G = generator_matrix(base.n)
    A, Ac = base.info_array, base.frozen_set
    B = SystematicSpec(base).b_set
    G_AB_inv = gf2_inverse(G[np.ix_(A, B)])
    return G, G_AB_inv, G[np.ix_(Ac, B)]


def _gf2_matvec(v, M):
    return (v.astype(np.int64) @ M.astype(np.int64) & 1).astype(np.uint8)


def systematic_encode(x_B, u_frozen, sspec: SystematicSpec):
    """Reference encoder: ``u_A = (x_B + u_{A^c} G_{A^c B}) G_{AB}^{-1}``, ``x = u G``.

    Rows of G_{AB} follow ascending A and columns ascending B. Limited to
    N <= ALGEBRAIC_MAX_N.
    """
    x_B, u_frozen = _check(x_B, u_frozen, sspec)
    base = sspec.base
    if base.N > ALGEBRAIC_MAX_N:
        raise ValueError(f"algebraic encoder limited to N <= {ALGEBRAIC_MAX_N}")
    G, G_AB_inv, G_AcB = _algebraic_parts(base)
    u_A = _gf2_matvec(x_B ^ _gf2_matvec(u_frozen, G_AcB), G_AB_inv)
    u = np.zeros(base.N, dtype=np.uint8)
    u[base.info_array] = u_A
    u[base.frozen_set] = u_frozen
    return u_A, _gf2_matvec(u, G)


def systematic_encode_fast(x_B, u_frozen, sspec: SystematicSpec):
    """Same contract as :func:`systematic_encode`, in O(N log N)."""
    x_B, u_frozen = _check(x_B, u_frozen, sspec)
    base = sspec.base
    perm = _bitrev_cached(base.n)
    x = np.zeros(base.N, dtype=np.uint8)
    x[sspec.b_set] = x_B
    uvals = np.zeros(base.N, dtype=np.uint8)
    uvals[base.frozen_set] = u_frozen
    # in tree order the systematic positions are exactly the information indices
    u, xr = kernels.sys_solve(x[perm], base.info_mask, uvals)
    return u[base.info_array], xr[perm]
