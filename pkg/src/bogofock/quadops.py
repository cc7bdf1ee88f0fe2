"""Quadratic operators on the truncated Fock space and their test batteries.

Coordinate forms (standard basis, conjugation as the involution):

* ``Delta^dagger_K = sum_ij K_ij a_i^dagger a_j^dagger``   (raises by 2)
* ``Delta_K        = sum_ij K_ij a_i a_j``                 (lowers by 2)
* ``N_S            = sum_ij S_ij a_i^dagger a_j``          (number preserving)

All three compress exactly onto the truncated space.  The generator of the
one-parameter unitary group is
``Delta(A) = (i/2)(Delta^dagger_T - Delta_{conj T}) - i N_{conj S}``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from bogofock.errors import DomainError, PreconditionError
from bogofock.fock import FockSpace, number_op
from bogofock.linalg import hs_norm, op_norm, svd_values
from bogofock.symplectic import SigmaGenerator

log = logging.getLogger(__name__)

__all__ = [
    "QuadraticSpec",
    "BatteryEntry",
    "delta_dagger",
    "delta_",
    "n_quadratic",
    "generator",
    "random_state",
    "norm_bound_battery",
    "commutator_battery",
    "vacuum_moment_series",
    "determinant_series",
    "ad_battery",
]

HERMITICITY_TOL = 1e-12


@dataclass(frozen=True)
class QuadraticSpec:
    kind: str  # "creation-pair" | "annihilation-pair" | "number"
    coefficient: np.ndarray

    def build(self, space: FockSpace) -> np.ndarray:
        builders = {"creation-pair": delta_dagger, "annihilation-pair": delta_, "number": n_quadratic}
        try:
            return builders[self.kind](space, self.coefficient)
        except KeyError:
            raise ValueError(f"unknown quadratic kind {self.kind!r}") from None


@dataclass(frozen=True)
class BatteryEntry:
    """One line of a battery report: ``value`` compared against ``bound``."""

    name: str
    value: float
    bound: float
    passed: bool

    @property
    def margin(self) -> float:
        return self.bound - self.value


def _pair_sum(left, right, k) -> sp.csr_matrix:
    d = len(left)
    out = sp.csr_matrix(left[0].shape, dtype=complex)
    for i in range(d):
        for j in range(d):
            if k[i, j] != 0:
                out = out + k[i, j] * (left[i] @ right[j])
    return out


def sparse_delta_dagger(space: FockSpace, k) -> sp.csr_matrix:
    k = space.check_matrix(k, "K")
    return _pair_sum(space.raising, space.raising, k)


def sparse_delta(space: FockSpace, k) -> sp.csr_matrix:
    k = space.check_matrix(k, "K")
    return _pair_sum(space.lowering, space.lowering, k)


def sparse_n_quadratic(space: FockSpace, s) -> sp.csr_matrix:
    s = space.check_matrix(s, "S")
    return _pair_sum(space.raising, space.lowering, s)


def delta_dagger(space: FockSpace, k) -> np.ndarray:
    """Creation-pair operator ``sum_ij K_ij a_i^dagger a_j^dagger``."""
    return sparse_delta_dagger(space, k).toarray()


def delta_(space: FockSpace, k) -> np.ndarray:
    """Annihilation-pair operator ``sum_ij K_ij a_i a_j``; adjoint of
    ``delta_dagger(K*)``."""
    return sparse_delta(space, k).toarray()


def n_quadratic(space: FockSpace, s) -> np.ndarray:
    """Number-type operator ``dGamma(S) = sum_ij S_ij a_i^dagger a_j``."""
    return sparse_n_quadratic(space, s).toarray()


def generator(space: FockSpace, g: SigmaGenerator, return_residual: bool = False):
    """Hermitian matrix of ``Delta(A)`` on the truncated space.

    The assembled matrix is symmetrized as ``(M + M*)/2``; the asymmetry
    before symmetrization is logged and optionally returned.
    """
    res = g.residuals()
    if not res.passes():
        raise PreconditionError(f"generator is not in sigma_2: residuals {tuple(res)}")
    m = (
        0.5j * (sparse_delta_dagger(space, g.T) - sparse_delta(space, g.T.conj()))
        - 1j * sparse_n_quadratic(space, g.S.conj())
    ).toarray()
    asym = float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0
    if asym > HERMITICITY_TOL:
        log.warning("generator Hermiticity residual %.3e exceeds %.0e", asym, HERMITICITY_TOL)
    else:
        log.debug("generator Hermiticity residual %.3e", asym)
    h = 0.5 * (m + m.conj().T)
    return (h, asym) if return_residual else h


def random_state(space: FockSpace, cap: int, rng: np.random.Generator) -> np.ndarray:
    """Normalized complex Gaussian vector supported on sectors <= cap."""
    psi = np.zeros(space.dim, dtype=complex)
    idx = space.below(cap)
    n = idx.stop
    psi[idx] = rng.normal(size=n) + 1j * rng.normal(size=n)
    return psi / np.linalg.norm(psi)


def norm_bound_battery(
    space: FockSpace, k, s, samples: int = 10, rng: np.random.Generator | None = None
) -> list[BatteryEntry]:
    """Relative-bound inequalities for the quadratic operators.

    For random states on sectors <= n_max - 2 checks
    ``||Dd_K psi|| <= sqrt6 ||K||_2 ||(N+1) psi||``,
    ``||D_K psi|| <= ||K||_2 ||N psi||``, ``||N_S psi|| <= ||S|| ||N psi||``
    and, for the generator built from the symmetric part of K and the
    anti-Hermitian part of S,
    ``||Delta(A) psi|| <= max(sqrt6 ||T||_2, ||S||) ||(N+1) psi||``.
    Returns the worst (smallest margin) entry of each family.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    k = space.check_matrix(k, "K")
    s = space.check_matrix(s, "S")
    g = SigmaGenerator((s - s.conj().T) / 2, (k + k.T) / 2)
    dd = sparse_delta_dagger(space, k)
    dl = sparse_delta(space, k)
    ns = sparse_n_quadratic(space, s)
    h = generator(space, g)
    num = space.numbers.astype(float)
    k2, sn = hs_norm(k), op_norm(s)
    alpha = max(math.sqrt(6.0) * hs_norm(g.T), op_norm(g.S))
    cap = max(space.n_max - 2, 0)
    worst: dict[str, BatteryEntry] = {}

    def record(name, value, bound):
        # relative slack absorbs roundoff when both sides vanish
        ok = value <= bound * (1 + 1e-12) + 1e-13
        e = BatteryEntry(name, value, bound, ok)
        prev = worst.get(name)
        if prev is None or (prev.passed and not ok) or (prev.passed == ok and e.margin < prev.margin):
            worst[name] = e

    for _ in range(samples):
        psi = random_state(space, cap, rng)
        n_psi = np.linalg.norm(num * psi)
        n1_psi = np.linalg.norm((num + 1) * psi)
        record("delta_dagger", np.linalg.norm(dd @ psi), math.sqrt(6.0) * k2 * n1_psi)
        record("delta", np.linalg.norm(dl @ psi), k2 * n_psi)
        record("n_quadratic", np.linalg.norm(ns @ psi), sn * n_psi)
        record("generator_alpha", np.linalg.norm(h @ psi), alpha * n1_psi)
    return list(worst.values())


def _commutator_residual(x, y, expected, cols) -> float:
    """``max`` column norm of ``([x, y] - expected)`` on the given columns."""
    xy = x @ y[:, cols] - y @ x[:, cols]
    diff = xy - expected[:, cols]
    return float(np.max(np.linalg.norm(diff.toarray() if sp.issparse(diff) else diff, axis=0)))


def commutator_battery(space: FockSpace, k, s, f, tol: float = 1e-10) -> list[BatteryEntry]:
    """Commutators of the quadratic operators with ladder operators.

    ``[Dd_K, a(f)] = -a*((K+K^T) f)``, ``[D_K, a*(f)] = a((K+K^T) f)``,
    ``[N_S, a(f)] = -a(S^T f)`` and ``[N_S, a*(f)] = a*(S f)``, checked on
    sectors <= n_max - 3.
    """
    k = space.check_matrix(k, "K")
    s = space.check_matrix(s, "S")
    f = space.check_vector(f)
    cols = np.arange(space.below(space.n_max - 3).stop)
    ksym = k + k.T
    dd = sparse_delta_dagger(space, k)
    dl = sparse_delta(space, k)
    ns = sparse_n_quadratic(space, s)
    af, adf = space.sparse_annihilate(f), space.sparse_create(f)
    checks = [
        ("u1", dd, af, -space.sparse_create(ksym @ f)),
        ("u2", dl, adf, space.sparse_annihilate(ksym @ f)),
        ("u3", ns, af, -space.sparse_annihilate(s.T @ f)),
        ("u4", ns, adf, space.sparse_create(s @ f)),
    ]
    out = []
    for name, x, y, expected in checks:
        r = _commutator_residual(x.toarray(), y.toarray(), expected.toarray(), cols) if cols.size else 0.0
        out.append(BatteryEntry(name, r, tol, r <= tol))
    return out


def determinant_series(k, orders: int) -> np.ndarray:
    """Taylor coefficients of ``det(1 - z K*K)^{-1/2}`` at z = 0 up to ``orders``.

    Product over singular values of the binomial series
    ``(1 - z l^2)^{-1/2} = sum_n C(2n, n) (l^2 / 4)^n z^n``.
    """
    coeffs = np.zeros(orders + 1)
    coeffs[0] = 1.0
    for lam in svd_values(k):
        x = lam**2 / 4.0
        factor = np.array([math.comb(2 * n, n) * x**n for n in range(orders + 1)])
        coeffs = np.convolve(coeffs, factor)[: orders + 1]
    return coeffs


def vacuum_moment_series(space: FockSpace, k, orders: int) -> np.ndarray:
    """``a_n = (||(Dd_K)^n Omega|| / (2^n n!))^2`` for n = 0..orders.

    K must be complex symmetric with ``||K|| < 1`` and ``n_max >= 2 orders``.
    The result is the Taylor series of ``det(1 - z K*K)^{-1/2}``; compare with
    :func:`determinant_series`.
    """
    k = space.check_matrix(k, "K")
    if op_norm(k) >= 1.0:
        raise DomainError("vacuum moment series needs ||K|| < 1")
    if np.max(np.abs(k - k.T)) > 1e-12:
        raise PreconditionError("vacuum moment series needs K = K^T")
    if space.n_max < 2 * orders:
        raise PreconditionError(f"n_max = {space.n_max} < 2 * orders = {2 * orders}")
    dd = sparse_delta_dagger(space, k)
    v = np.zeros(space.dim, dtype=complex)
    v[0] = 1.0
    out = [1.0]
    for n in range(1, orders + 1):
        v = dd @ v
        out.append((np.linalg.norm(v) / (2**n * math.factorial(n))) ** 2)
    return np.array(out)


def ad_battery(space: FockSpace, g: SigmaGenerator, f, k_max: int, tol: float = 1e-8) -> list[BatteryEntry]:
    """Iterated commutators of ``i Delta(A)`` with ladder operators.

    ``ad^k(a(f)) = a((A^k)_11 f) + a*((A^k)_21 f)`` and
    ``ad^k(a*(f)) = a((A^k)_12 f) + a*((A^k)_22 f)``, k = 1..k_max, checked on
    sectors <= n_max - 2 k_max - 1, where the truncated products are exact.
    """
    f = space.check_vector(f)
    cap = space.n_max - 2 * k_max - 1
    if cap < 0:
        raise PreconditionError(f"n_max = {space.n_max} too small for k_max = {k_max}")
    cols = np.arange(space.below(cap).stop)
    ih = 1j * generator(space, g)
    d = g.d
    a_hat = g.matrix
    power = np.eye(2 * d, dtype=complex)
    cur_a = space.sparse_annihilate(f).toarray()
    cur_ad = space.sparse_create(f).toarray()
    out = []
    for k in range(1, k_max + 1):
        # only the columns reachable from the test sectors matter; keep them
        # full to stay exact
        cur_a = ih @ cur_a - cur_a @ ih
        cur_ad = ih @ cur_ad - cur_ad @ ih
        power = power @ a_hat
        exp_a = space.sparse_annihilate(power[:d, :d] @ f) + space.sparse_create(power[d:, :d] @ f)
        exp_ad = space.sparse_annihilate(power[:d, d:] @ f) + space.sparse_create(power[d:, d:] @ f)
        ra = float(np.max(np.linalg.norm(cur_a[:, cols] - exp_a.toarray()[:, cols], axis=0)))
        rad = float(np.max(np.linalg.norm(cur_ad[:, cols] - exp_ad.toarray()[:, cols], axis=0)))
        out.append(BatteryEntry(f"ad{k}_a", ra, tol, ra <= tol))
        out.append(BatteryEntry(f"ad{k}_adag", rad, tol, rad <= tol))
    return out
