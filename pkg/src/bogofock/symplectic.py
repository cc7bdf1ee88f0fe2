"""Symplectic group elements, sigma_2 generators and the flow exp(t A).

Conventions: the antiunitary involution is entrywise complex conjugation in
the standard basis, so ``conj(X)`` plays the role of the barred operator and
the twisted transpose is the plain matrix transpose.  An element is stored
through its two blocks ``S`` and ``T``; the full matrix is
``[[S, conj(T)], [T, conj(S)]]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from bogofock.errors import DimensionError, InvariantViolation, PreconditionError
from bogofock.linalg import Tolerance, as_matrix, hs_norm, integrate, mat_exp, op_norm

__all__ = [
    "SymplecticElement",
    "SigmaGenerator",
    "FlowSample",
    "SymplecticResiduals",
    "SigmaResiduals",
    "is_symplectic",
    "is_sigma2",
    "inverse",
    "compose",
    "flow",
    "k_t",
    "k_t_derivative",
    "tau",
    "theta",
    "local_exponent",
    "commuting_flow",
    "hs_flow_bound",
    "k_properties",
]

DEFAULT_TOL = Tolerance(abs=1e-10)
THETA_TOL = Tolerance(abs=1e-10)


def _pair(s, t):
    s = as_matrix(s, "S")
    t = as_matrix(t, "T")
    if s.shape[0] != s.shape[1] or s.shape != t.shape:
        raise DimensionError(f"S and T must be square of equal size, got {s.shape} and {t.shape}")
    return s, t


def block_matrix(s, t) -> np.ndarray:
    """``[[S, conj T], [T, conj S]]`` as a 2d x 2d array."""
    return np.block([[s, t.conj()], [t, s.conj()]])


class SymplecticResiduals(NamedTuple):
    s1: float
    s2: float
    s3: float
    s4: float

    def passes(self, tol: Tolerance = DEFAULT_TOL) -> bool:
        return all(tol.accepts(r) for r in self)


class SigmaResiduals(NamedTuple):
    anti_hermitian: float
    symmetric: float

    def passes(self, tol: Tolerance = DEFAULT_TOL) -> bool:
        return all(tol.accepts(r) for r in self)


def _maxabs(x) -> float:
    return float(np.max(np.abs(x))) if x.size else 0.0


def is_symplectic(s, t, tol: Tolerance = DEFAULT_TOL) -> SymplecticResiduals:
    """Max-norm residuals of the four block relations of Sp.

    ``S*S - T*T = 1``, ``S^T T - T^T S = 0``, ``SS* - conj(TT*) = 1`` and
    ``TS* - conj(ST*) = 0``.  Use ``.passes(tol)`` on the result.
    """
    s, t = _pair(s, t)
    one = np.eye(s.shape[0])
    sh, th = s.conj().T, t.conj().T
    return SymplecticResiduals(
        _maxabs(sh @ s - th @ t - one),
        _maxabs(s.T @ t - t.T @ s),
        _maxabs(s @ sh - (t @ th).conj() - one),
        _maxabs(t @ sh - (s @ th).conj()),
    )


def is_sigma2(s, t, tol: Tolerance = DEFAULT_TOL) -> SigmaResiduals:
    """Residuals ``max|S* + S|`` and ``max|T^T - T|``."""
    s, t = _pair(s, t)
    return SigmaResiduals(_maxabs(s.conj().T + s), _maxabs(t.T - t))


@dataclass(frozen=True, eq=False)
class SymplecticElement:
    S: np.ndarray
    T: np.ndarray

    def __post_init__(self):
        s, t = _pair(self.S, self.T)
        object.__setattr__(self, "S", s)
        object.__setattr__(self, "T", t)

    @property
    def d(self) -> int:
        return self.S.shape[0]

    @property
    def matrix(self) -> np.ndarray:
        return block_matrix(self.S, self.T)

    @classmethod
    def identity(cls, d: int) -> "SymplecticElement":
        return cls(np.eye(d, dtype=complex), np.zeros((d, d), dtype=complex))

    @classmethod
    def from_matrix(cls, m) -> "SymplecticElement":
        m = as_matrix(m)
        d = m.shape[0] // 2
        return cls(m[:d, :d], m[d:, :d])

    def residuals(self) -> SymplecticResiduals:
        return is_symplectic(self.S, self.T)

    def validate(self, tol: Tolerance = DEFAULT_TOL) -> "SymplecticElement":
        res = self.residuals()
        if not res.passes(tol):
            raise PreconditionError(f"not a symplectic element: residuals {tuple(res)}")
        return self


@dataclass(frozen=True, eq=False)
class SigmaGenerator:
    """Generator ``A = [[S, conj T], [T, conj S]]`` with S anti-Hermitian and
    T complex symmetric."""

    S: np.ndarray
    T: np.ndarray

    def __post_init__(self):
        s, t = _pair(self.S, self.T)
        object.__setattr__(self, "S", s)
        object.__setattr__(self, "T", t)

    @property
    def d(self) -> int:
        return self.S.shape[0]

    @property
    def matrix(self) -> np.ndarray:
        return block_matrix(self.S, self.T)

    def residuals(self) -> SigmaResiduals:
        return is_sigma2(self.S, self.T)

    def validate(self, tol: Tolerance = DEFAULT_TOL) -> "SigmaGenerator":
        res = self.residuals()
        if not res.passes(tol):
            raise PreconditionError(f"not a sigma_2 generator: residuals {tuple(res)}")
        return self

    @classmethod
    def random(cls, d: int, rng: np.random.Generator, scale: float = 0.5) -> "SigmaGenerator":
        """Complex Gaussian S (anti-Hermitian part) and T (symmetric part)."""
        x = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        y = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        return cls(scale * (x - x.conj().T) / 2, scale * (y + y.T) / 2)


def compose(a: SymplecticElement, b: SymplecticElement) -> SymplecticElement:
    return SymplecticElement.from_matrix(a.matrix @ b.matrix)


def inverse(a: SymplecticElement) -> SymplecticElement:
    """``J A* J``: blocks ``S* , -T*; -T^T, S^T``."""
    return SymplecticElement(a.S.conj().T, -a.T.T)


@dataclass(frozen=True, eq=False)
class FlowSample:
    """The blocks of ``exp(t A)`` with ``K_t`` and ``tau(t)`` cached."""

    t: float
    block11: np.ndarray
    block12: np.ndarray
    block21: np.ndarray
    block22: np.ndarray
    K: np.ndarray
    tau: float
    generator: SigmaGenerator = field(repr=False)

    @property
    def matrix(self) -> np.ndarray:
        return np.block([[self.block11, self.block12], [self.block21, self.block22]])

    @property
    def element(self) -> SymplecticElement:
        return SymplecticElement(self.block11, self.block21)


def _tau_value(g: SigmaGenerator, k: np.ndarray) -> float:
    return 0.5 * float(np.trace(g.T.conj().T @ k).imag)


def _k_from_blocks(b11, b21) -> np.ndarray:
    try:
        # K = B21 B11^{-1}  <=>  B11^T K^T = B21^T
        return np.linalg.solve(b11.T, b21.T).T
    except np.linalg.LinAlgError as exc:
        raise InvariantViolation("block11 of exp(tA) is singular") from exc


def _sample(g: SigmaGenerator, t: float, e: np.ndarray) -> FlowSample:
    d = g.d
    b11, b12 = e[:d, :d], e[:d, d:]
    b21, b22 = e[d:, :d], e[d:, d:]
    k = _k_from_blocks(b11, b21)
    return FlowSample(float(t), b11, b12, b21, b22, k, _tau_value(g, k), g)


def flow(g: SigmaGenerator, t: float) -> FlowSample:
    """``exp(t A)`` for a sigma_2 generator."""
    return _sample(g, t, mat_exp(t * g.matrix))


def k_t(g: SigmaGenerator, t: float) -> np.ndarray:
    """``K_t = (e^{tA})_21 (e^{tA})_11^{-1}``."""
    return flow(g, t).K


def k_t_derivative(g: SigmaGenerator, t: float) -> np.ndarray:
    """Closed-form ``dK_t/dt``:
    ``(A e)_21 e11^{-1} - e21 e11^{-1} (A e)_11 e11^{-1}`` with ``e = e^{tA}``."""
    d = g.d
    e = mat_exp(t * g.matrix)
    ae = g.matrix @ e
    inv11 = np.linalg.inv(e[:d, :d])
    return ae[d:, :d] @ inv11 - e[d:, :d] @ inv11 @ ae[:d, :d] @ inv11


def tau(g: SigmaGenerator, s: float) -> float:
    """``tau(s) = 1/2 Im Tr(T* K_s)``."""
    return flow(g, s).tau


def theta(g: SigmaGenerator, t: float, tol: Tolerance = THETA_TOL) -> float:
    """Phase integral ``theta(t) = int_0^t tau(s) ds`` (adaptive Simpson)."""
    return integrate(lambda s: tau(g, s), 0.0, t, tol)


def local_exponent(g: SigmaGenerator, t: float, s: float, tol: Tolerance = THETA_TOL) -> float:
    """``rho(t, s) = theta(t) + theta(s) - theta(t + s)``."""
    return theta(g, t, tol) + theta(g, s, tol) - theta(g, t + s, tol)


def _cosh_sinh(m: np.ndarray):
    ep, em = mat_exp(m), mat_exp(-m)
    return (ep + em) / 2, (ep - em) / 2


def commuting_flow(s, t, time: float, tol: Tolerance = DEFAULT_TOL) -> FlowSample:
    """Closed-form flow for real, commuting S (antisymmetric) and T (symmetric).

    Blocks are ``e^{tS} cosh tT`` on the diagonal and ``e^{tS} sinh tT`` off
    it, and ``K_t = tanh tT``.
    """
    g = SigmaGenerator(s, t)
    s, t = g.S, g.T
    if not g.residuals().passes(tol):
        raise PreconditionError(f"(S, T) is not in sigma_2: {tuple(g.residuals())}")
    if not (tol.accepts(_maxabs(s.imag)) and tol.accepts(_maxabs(t.imag))):
        raise PreconditionError("commuting closed form needs real S and T")
    comm = _maxabs(s @ t - t @ s)
    if not tol.accepts(comm):
        raise PreconditionError(f"[S, T] = 0 violated: residual {comm!r}")
    es = mat_exp(time * s)
    ch, sh = _cosh_sinh(time * t)
    b11 = es @ ch
    b21 = es @ sh
    k = np.linalg.solve(ch, sh)  # tanh tT; cosh and sinh commute
    return FlowSample(float(time), b11, b21.conj(), b21, b11.conj(), k, _tau_value(g, k), g)


def hs_flow_bound(g: SigmaGenerator, t: float) -> tuple[float, float]:
    """Both sides of ``||e^{tA} - e^{t diag(S, conj S)}||_2 <= (||Tb||_2/||T||)(e^{|t| ||T||} - 1)``.

    ``Tb`` is the off-diagonal block matrix ``[[0, conj T], [T, 0]]``.
    """
    d = g.d
    z = np.zeros((d, d), dtype=complex)
    diag = np.block([[g.S, z], [z, g.S.conj()]])
    lhs = hs_norm(mat_exp(t * g.matrix) - mat_exp(t * diag))
    tn = op_norm(g.T)
    if tn == 0.0:
        return lhs, 0.0
    tb = math.sqrt(2.0) * hs_norm(g.T)
    return lhs, tb / tn * math.expm1(abs(t) * tn)


def k_properties(sample_or_element) -> dict:
    """Checks on a symplectic element: ``S`` invertible, ``||T S^{-1}|| < 1`` and
    symmetry of ``T S^{-1}`` and ``S^{-1} conj(T)``.

    Returns a dict of named values; ``k1_norm`` must be < 1, the rest ~ 0.
    """
    if isinstance(sample_or_element, FlowSample):
        s, t = sample_or_element.block11, sample_or_element.block21
    else:
        s, t = sample_or_element.S, sample_or_element.T
    cond = float(np.linalg.cond(s))
    if not math.isfinite(cond):
        return {"s_condition": cond, "k1_norm": math.inf, "k1_symmetry": math.inf, "k3_symmetry": math.inf}
    k1 = _k_from_blocks(s, t)
    k3 = np.linalg.solve(s, t.conj())
    return {
        "s_condition": cond,
        "k1_norm": op_norm(k1),
        "k1_symmetry": _maxabs(k1 - k1.T),
        "k3_symmetry": _maxabs(k3 - k3.T),
    }
