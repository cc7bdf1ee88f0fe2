"""Truncated symmetric Fock space over C^d in the occupation-number basis.

Basis states are occupation tuples ``(n_1, ..., n_d)`` with total number at
most ``n_max``, ordered by total number and then lexicographically
(ascending).  Every operator returned here is the compression ``P Op P`` onto
that subspace, as a dense complex ``numpy`` array; vectors are 1-D complex
arrays of length ``space.dim``.

The annihilation operator is *linear* in its test vector:
``a(f) = sum_j f_j a_j`` and ``[a(f), a*(g)] = sum_j f_j g_j``.
"""

from __future__ import annotations

import itertools
import math
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from bogofock.errors import DimensionError
from bogofock.linalg import as_matrix

__all__ = [
    "FockSpace",
    "fock_dimension",
    "vacuum",
    "create",
    "annihilate",
    "field",
    "number_op",
    "second_quantize",
]


def fock_dimension(d: int, n_max: int) -> int:
    return sum(math.comb(n + d - 1, d - 1) for n in range(n_max + 1))


def _compositions(n: int, d: int):
    """All d-tuples of nonnegative ints summing to n, lexicographically ascending."""
    for bars in itertools.combinations(range(n + d - 1), d - 1):
        edges = (-1,) + bars + (n + d - 1,)
        yield tuple(edges[i + 1] - edges[i] - 1 for i in range(d))


class FockSpace:
    """Occupation-number basis of the bosonic Fock space truncated at ``n_max``."""

    def __init__(self, d: int, n_max: int):
        if d < 1:
            raise ValueError("need at least one mode")
        if n_max < 0:
            raise ValueError("n_max must be nonnegative")
        self.d = int(d)
        self.n_max = int(n_max)
        basis = []
        self._sector_start = []
        for n in range(self.n_max + 1):
            self._sector_start.append(len(basis))
            basis.extend(sorted(_compositions(n, self.d)))
        self._sector_start.append(len(basis))
        self.basis: tuple[tuple[int, ...], ...] = tuple(basis)
        self.index: dict[tuple[int, ...], int] = {occ: i for i, occ in enumerate(basis)}
        self.numbers = np.array([sum(occ) for occ in basis], dtype=int)

    def __repr__(self):
        return f"FockSpace(d={self.d}, n_max={self.n_max})"

    @property
    def dim(self) -> int:
        return len(self.basis)

    def sector(self, n: int) -> slice:
        """Index range of the n-particle sector."""
        return slice(self._sector_start[n], self._sector_start[n + 1])

    def below(self, cap: int) -> slice:
        """Index range of all sectors with total number <= cap."""
        cap = min(cap, self.n_max)
        return slice(0, self._sector_start[cap + 1])

    def basis_vector(self, occupation) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[self.index[tuple(occupation)]] = 1.0
        return v

    def sector_norms(self, psi) -> np.ndarray:
        """``||psi^(n)||`` for n = 0..n_max."""
        psi = np.asarray(psi)
        return np.array([np.linalg.norm(psi[self.sector(n)]) for n in range(self.n_max + 1)])

    def check_vector(self, f) -> np.ndarray:
        f = np.asarray(f, dtype=complex).reshape(-1)
        if f.shape[0] != self.d:
            raise DimensionError(f"one-particle vector must have length {self.d}, got {f.shape[0]}")
        return f

    def check_matrix(self, m, name: str = "matrix") -> np.ndarray:
        m = as_matrix(m, name)
        if m.shape != (self.d, self.d):
            raise DimensionError(f"{name} must be {self.d}x{self.d}, got {m.shape}")
        return m

    @cached_property
    def lowering(self) -> tuple[sp.csr_matrix, ...]:
        """Sparse single-mode annihilators ``a_j``."""
        ops = []
        for j in range(self.d):
            rows, cols, vals = [], [], []
            for i, occ in enumerate(self.basis):
                if occ[j]:
                    lower = occ[:j] + (occ[j] - 1,) + occ[j + 1 :]
                    rows.append(self.index[lower])
                    cols.append(i)
                    vals.append(math.sqrt(occ[j]))
            ops.append(sp.csr_matrix((vals, (rows, cols)), shape=(self.dim, self.dim), dtype=complex))
        return tuple(ops)

    @cached_property
    def raising(self) -> tuple[sp.csr_matrix, ...]:
        """Sparse single-mode creators ``a_j^dagger`` (compressed)."""
        return tuple(a.T.tocsr() for a in self.lowering)

    def sparse_create(self, f) -> sp.csr_matrix:
        f = self.check_vector(f)
        out = sp.csr_matrix((self.dim, self.dim), dtype=complex)
        for fj, op in zip(f, self.raising):
            if fj != 0:
                out = out + fj * op
        return out

    def sparse_annihilate(self, f) -> sp.csr_matrix:
        f = self.check_vector(f)
        out = sp.csr_matrix((self.dim, self.dim), dtype=complex)
        for fj, op in zip(f, self.lowering):
            if fj != 0:
                out = out + fj * op
        return out


def vacuum(space: FockSpace) -> np.ndarray:
    return space.basis_vector((0,) * space.d)


def create(space: FockSpace, f) -> np.ndarray:
    """``a*(f) = sum_j f_j a_j^dagger``; states pushed above n_max are dropped."""
    return space.sparse_create(f).toarray()


def annihilate(space: FockSpace, f) -> np.ndarray:
    """``a(f) = sum_j f_j a_j`` (linear in f)."""
    return space.sparse_annihilate(f).toarray()


def field(space: FockSpace, f) -> np.ndarray:
    """``phi(f) = (a*(conj f) + a(f)) / sqrt 2``."""
    f = space.check_vector(f)
    return (space.sparse_create(f.conj()) + space.sparse_annihilate(f)).toarray() / math.sqrt(2.0)


def number_op(space: FockSpace) -> np.ndarray:
    return np.diag(space.numbers.astype(complex))


def second_quantize(space: FockSpace, m) -> np.ndarray:
    """Second quantization ``Gamma(M)``: acts as ``M^{(x)n}`` on the n-particle
    sector.

    Column by column, ``Gamma(M)|occ> = a*(M e_j) Gamma(M)|occ - e_j> / sqrt(n_j)``
    for the first occupied mode j.  This is also the normal-ordered
    exponential ``:exp(-N_{1-M}):``.
    """
    m = space.check_matrix(m, "M")
    out = np.zeros((space.dim, space.dim), dtype=complex)
    out[0, 0] = 1.0
    creators = [space.sparse_create(m[:, j]).tocsc() for j in range(space.d)]
    blocks = {}
    for i in range(1, space.dim):
        occ = space.basis[i]
        j = next(k for k, nk in enumerate(occ) if nk)
        prev = space.index[occ[:j] + (occ[j] - 1,) + occ[j + 1 :]]
        n = space.numbers[i]
        rows = space.sector(n - 1)
        if (j, n) not in blocks:
            blocks[j, n] = creators[j][:, rows].tocsr()
        col = blocks[j, n] @ out[rows, prev]
        out[:, i] = col / math.sqrt(occ[j])
    return out
