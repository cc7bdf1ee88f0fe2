"""Normal-ordered unitaries implementing Bogoliubov transformations, the
one-parameter family U_t, and numerical checks of the identities relating
U_t to the exponential of its generator.

For a symplectic element with blocks S, T set
``K1 = T S^{-1}``, ``K2 = 1 - (S^{-1})^T``, ``K3 = -S^{-1} conj(T)``; then

    U(A) = det(1 - K1* K1)^{1/4} exp(-Dd_{K1}/2) Gamma(1 - K2) exp(-D_{K3}/2)

where ``Gamma`` is second quantization (the normal-ordered exponential of the
number-type quadratic).  The first and last factors are nilpotent on the
truncated space, so the compressed product equals the compression of the
exact operator.

Residuals that compare against ``exp(it Delta(A))`` are *not* exact under
truncation; they are measured on low particle-number sectors and shrink as
``n_max`` grows.  Every :class:`ResidualReport` records ``n_max`` and the
sector cap used.
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from bogofock.errors import DomainError, PreconditionError
from bogofock.fock import FockSpace, second_quantize
from bogofock.linalg import Tolerance, integrate, log_det_one_minus, mat_exp, op_norm
from bogofock.quadops import generator, sparse_delta, sparse_delta_dagger
from bogofock.symplectic import (
    THETA_TOL,
    SigmaGenerator,
    SymplecticElement,
    commuting_flow,
    flow,
    local_exponent,
    theta,
)

__all__ = [
    "ResidualReport",
    "NormalOrderedUnitary",
    "normal_ordered_unitary",
    "bogoliubov_pair",
    "intertwining_residual",
    "one_param_unitary",
    "generator_exponential",
    "theorem_mM_residual",
    "cocycle_residual",
    "rho_cocycle_identity",
    "closed_form_vacuum_overlap",
    "vacuum_overlap_check",
    "derivative_residual",
    "determinant_limits",
    "number_identity_check",
    "moment_sum_check",
    "commuting_closed_form_check",
    "restricted_norm",
    "richardson_limit",
]

THEOREM_TOL = 1e-6


@dataclass(frozen=True)
class ResidualReport:
    name: str
    value: float
    tolerance: float
    sector_cap: int = -1
    n_max: int = -1
    detail: dict = field(default_factory=dict, compare=False)

    @property
    def passed(self) -> bool:
        return bool(self.value <= self.tolerance)

    def as_record(self) -> dict:
        return {
            "name": self.name,
            "residual": self.value,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "n_max": self.n_max,
            "sector_cap": self.sector_cap,
        }


@dataclass(frozen=True, eq=False)
class NormalOrderedUnitary:
    scalar: float
    K1: np.ndarray
    K2: np.ndarray
    K3: np.ndarray
    matrix: np.ndarray
    space: FockSpace = field(repr=False)

    @property
    def vacuum_amplitude(self) -> complex:
        return complex(self.matrix[0, 0])


def restricted_norm(m: np.ndarray, space: FockSpace, cap: int) -> float:
    """Operator norm of ``m`` restricted to states with total number <= cap."""
    cols = m[:, space.below(cap)]
    return op_norm(cols)


def _nilpotent_exp(x: sp.spmatrix, space: FockSpace) -> np.ndarray:
    """``sum_n x^n / n!`` for an x shifting particle number by +-2.

    The series terminates after ``n_max // 2`` terms on the truncated space.
    """
    out = np.eye(space.dim, dtype=complex)
    term = np.eye(space.dim, dtype=complex)
    for n in range(1, space.n_max // 2 + 1):
        term = (x @ term) / n
        out += term
    return out


def normal_ordered_unitary(space: FockSpace, a: SymplecticElement) -> NormalOrderedUnitary:
    """Compression of ``U(A)`` onto the truncated space.

    Raises DomainError if ``||T S^{-1}|| >= 1`` (impossible for valid A).
    """
    s = space.check_matrix(a.S, "S")
    t = space.check_matrix(a.T, "T")
    s_inv = np.linalg.inv(s)
    k1 = t @ s_inv
    k2 = np.eye(space.d) - s_inv.T
    k3 = -s_inv @ t.conj()
    scalar = math.exp(0.25 * log_det_one_minus(k1))
    left = _nilpotent_exp(-0.5 * sparse_delta_dagger(space, k1), space)
    middle = second_quantize(space, np.eye(space.d) - k2)
    right = _nilpotent_exp(-0.5 * sparse_delta(space, k3), space)
    return NormalOrderedUnitary(scalar, k1, k2, k3, scalar * (left @ middle @ right), space)


def bogoliubov_pair(space: FockSpace, a: SymplecticElement, f) -> tuple[np.ndarray, np.ndarray]:
    """``b(f) = a(Sf) + a*(Tf)`` and ``b*(f) = a(conj(T) f) + a*(conj(S) f)``."""
    f = space.check_vector(f)
    b = space.sparse_annihilate(a.S @ f) + space.sparse_create(a.T @ f)
    bd = space.sparse_annihilate(a.T.conj() @ f) + space.sparse_create(a.S.conj() @ f)
    return b.toarray(), bd.toarray()


def intertwining_residual(
    space: FockSpace, a: SymplecticElement, f, sector_cap: int, tol: float = 1e-8
) -> ResidualReport:
    """``max ||U a#(f) psi - b#(f) U psi|| / ||psi||`` over psi on sectors <= cap,
    for both ``a`` and ``a*``."""
    if sector_cap > space.n_max - 4:
        raise PreconditionError(f"sector_cap must be <= n_max - 4 = {space.n_max - 4}")
    f = space.check_vector(f)
    u = normal_ordered_unitary(space, a).matrix
    b, bd = bogoliubov_pair(space, a, f)
    low = space.below(sector_cap)
    af = space.sparse_annihilate(f).toarray()[:, low]
    adf = space.sparse_create(f).toarray()[:, low]
    u_low = u[:, low]
    r_a = op_norm(u @ af - b @ u_low)
    r_ad = op_norm(u @ adf - bd @ u_low)
    return ResidualReport(
        "intertwining", max(r_a, r_ad), tol, sector_cap, space.n_max, {"a": r_a, "a_dagger": r_ad}
    )


def one_param_unitary(space: FockSpace, g: SigmaGenerator, t: float) -> NormalOrderedUnitary:
    """``U_t = U(exp(t A))``."""
    return normal_ordered_unitary(space, flow(g, t).element)


def generator_exponential(space: FockSpace, g: SigmaGenerator, t: float) -> np.ndarray:
    """``exp(i t Delta(A))`` of the symmetrized truncated generator."""
    return mat_exp(1j * t * generator(space, g))


def theorem_mM_residual(
    space: FockSpace,
    g: SigmaGenerator,
    t: float,
    sector_cap: int,
    tol: float = THEOREM_TOL,
    with_phase: bool = True,
) -> ResidualReport:
    """``||(U_t - e^{i theta(t)} e^{it Delta}) P_cap||``.

    With ``with_phase=False`` the phase factor is dropped, which is how its
    necessity is demonstrated when theta(t) != 0.
    """
    if sector_cap > space.n_max - 6:
        raise PreconditionError(f"sector_cap must be <= n_max - 6 = {space.n_max - 6}")
    th = theta(g, t)
    u = one_param_unitary(space, g, t).matrix
    e = generator_exponential(space, g, t)
    phase = cmath.exp(1j * th) if with_phase else 1.0
    r = restricted_norm(u - phase * e, space, sector_cap)
    name = "theorem_mM" if with_phase else "theorem_mM_no_phase"
    return ResidualReport(name, r, tol, sector_cap, space.n_max, {"theta": th})


def cocycle_residual(
    space: FockSpace,
    g: SigmaGenerator,
    t: float,
    s: float,
    sector_cap: int,
    tol: float = THEOREM_TOL,
    quad_tol: float = 1e-9,
) -> list[ResidualReport]:
    """Projective group law of U_t and exact group law of the phase-corrected family.

    Returns three reports: ``U_t U_s - e^{i rho} U_{t+s}`` on low sectors,
    ``V_t V_s - V_{t+s}`` for ``V_t = e^{-i theta(t)} U_t``, and the gap between
    the vacuum-fitted phase of ``U_t U_s U_{t+s}^{-1}`` and ``rho(t, s)``.
    """
    th_t, th_s, th_ts = theta(g, t), theta(g, s), theta(g, t + s)
    rho = th_t + th_s - th_ts
    ut = one_param_unitary(space, g, t).matrix
    us = one_param_unitary(space, g, s).matrix
    uts = one_param_unitary(space, g, t + s).matrix
    prod = ut @ us
    r_cocycle = restricted_norm(prod - cmath.exp(1j * rho) * uts, space, sector_cap)
    vt = cmath.exp(-1j * th_t) * ut
    vs = cmath.exp(-1j * th_s) * us
    vts = cmath.exp(-1j * th_ts) * uts
    r_group = restricted_norm(vt @ vs - vts, space, sector_cap)
    fitted = cmath.phase(prod[0, 0] / uts[0, 0])
    r_fit = abs(cmath.phase(cmath.exp(1j * (fitted - rho))))
    return [
        ResidualReport("cocycle", r_cocycle, tol, sector_cap, space.n_max, {"rho": rho}),
        ResidualReport("phase_corrected_group_law", r_group, tol, sector_cap, space.n_max),
        ResidualReport("fitted_rho", r_fit, tol, sector_cap, space.n_max, {"fitted": fitted, "rho": rho}),
    ]


def rho_cocycle_identity(g: SigmaGenerator, t: float, s: float, u: float, tol: float = 1e-9) -> ResidualReport:
    """``rho(t,s) + rho(t+s,u) - rho(s,u) - rho(t,s+u)``."""
    r = (
        local_exponent(g, t, s)
        + local_exponent(g, t + s, u)
        - local_exponent(g, s, u)
        - local_exponent(g, t, s + u)
    )
    return ResidualReport("rho_two_cocycle", abs(r), tol)


def closed_form_vacuum_overlap(g: SigmaGenerator, t: float) -> complex:
    """``det(1 - K_t* K_t)^{1/4} e^{-i theta(t)}``."""
    k = flow(g, t).K
    return math.exp(0.25 * log_det_one_minus(k)) * cmath.exp(-1j * theta(g, t))


def vacuum_overlap_check(
    space: FockSpace, g: SigmaGenerator, t: float, tol: float = THEOREM_TOL
) -> ResidualReport:
    """``<Omega, e^{it Delta} Omega>`` against its closed form."""
    e = generator_exponential(space, g, t)
    lhs = complex(e[0, 0])
    rhs = closed_form_vacuum_overlap(g, t)
    return ResidualReport(
        "vacuum_overlap", abs(lhs - rhs), tol, 0, space.n_max, {"numeric": lhs, "closed_form": rhs}
    )


def derivative_residual(
    space: FockSpace,
    g: SigmaGenerator,
    t_list,
    sector_cap: int = 0,
    psi=None,
    ratio_tol: float = 0.2,
) -> ResidualReport:
    """``r(t) = ||(U_t - 1)/t psi - i Delta psi||`` along a sequence of halving t.

    The report value is the worst relative deviation of ``r(t_{k+1}) / r(t_k)``
    from ``t_{k+1} / t_k`` (first-order convergence); tolerance ``ratio_tol``.
    ``psi`` defaults to the vacuum.  When every r(t) is at roundoff level the
    derivative is exact and the value is 0.
    """
    if sector_cap > space.n_max - 6:
        raise PreconditionError(f"sector_cap must be <= n_max - 6 = {space.n_max - 6}")
    t_list = [float(x) for x in t_list]
    if psi is None:
        psi = np.zeros(space.dim, dtype=complex)
        psi[0] = 1.0
    psi = np.asarray(psi, dtype=complex)
    if np.any(psi[space.below(sector_cap).stop :]):
        raise PreconditionError("psi must be supported on sectors <= sector_cap")
    target = 1j * (generator(space, g) @ psi)
    rs = []
    for t in t_list:
        u = one_param_unitary(space, g, t).matrix
        rs.append(float(np.linalg.norm((u @ psi - psi) / t - target)))
    scale = max(1.0, float(np.linalg.norm(target)))
    if max(rs) <= 1e-12 * scale:
        worst = 0.0
    else:
        worst = max(abs((r1 / r0) / (t1 / t0) - 1.0) for r0, r1, t0, t1 in zip(rs, rs[1:], t_list, t_list[1:]))
    monotone = all(r1 < r0 for r0, r1 in zip(rs, rs[1:])) or worst == 0.0
    return ResidualReport(
        "derivative_order",
        worst if monotone else math.inf,
        ratio_tol,
        sector_cap,
        space.n_max,
        {"t": t_list, "r": rs},
    )


def richardson_limit(ts, values) -> float:
    """Value at t = 0 of the interpolating polynomial through (t_i, v_i) (Neville)."""
    ts = [float(x) for x in ts]
    p = [float(v) for v in values]
    n = len(ts)
    for level in range(1, n):
        for i in range(n - level):
            j = i + level
            p[i] = (ts[j] * p[i] - ts[i] * p[i + 1]) / (ts[j] - ts[i])
    return p[0]


def determinant_limits(g: SigmaGenerator, t_list, rel_tol: float = 1e-4) -> list[ResidualReport]:
    """Small-t limits of ``Tr log(1 - K_t*K_t) / t^2 -> -||T||_2^2`` and
    ``(det(1 - K_t*K_t)^{1/4} - 1) / t^2 -> -||T||_2^2 / 4``, by Richardson
    extrapolation over ``t_list``."""
    t_list = [float(x) for x in t_list]
    logdets = [log_det_one_minus(flow(g, t).K) for t in t_list]
    q1 = [ld / t**2 for ld, t in zip(logdets, t_list)]
    q2 = [math.expm1(0.25 * ld) / t**2 for ld, t in zip(logdets, t_list)]
    hs2 = float(np.sum(np.abs(g.T) ** 2))
    out = []
    for name, q, target in (("logdet_limit", q1, -hs2), ("det_quarter_limit", q2, -hs2 / 4)):
        lim = richardson_limit(t_list, q)
        if target == 0.0:
            err, tol = abs(lim), 1e-12
        else:
            err, tol = abs(lim - target) / abs(target), rel_tol
        out.append(ResidualReport(name, err, tol, detail={"limit": lim, "target": target, "quotients": q}))
    return out


def number_identity_check(space: FockSpace, t: float, tol: float = 1e-12) -> ResidualReport:
    """``:exp(tN):`` (as ``Gamma((1+t) 1)``) against ``exp(log(1+t) N)``,
    in max relative error over the diagonal and absolute error elsewhere."""
    if t < 0:
        raise DomainError("number identity is stated for t >= 0")
    lhs = second_quantize(space, (1.0 + t) * np.eye(space.d))
    rhs = np.exp(np.log1p(t) * space.numbers)
    diag = np.abs(np.diag(lhs) - rhs) / rhs
    off = np.abs(lhs - np.diag(np.diag(lhs)))
    r = float(max(diag.max(), (off / np.maximum.outer(rhs, rhs)).max()))
    return ResidualReport("number_identity", r, tol, n_max=space.n_max, detail={"t": t})


def moment_sum_check(space: FockSpace, psi, t: float, tol: float = 1e-10) -> ResidualReport:
    """``sum_n t^n/n! sum_{k_1..k_n} ||a_{k_1}...a_{k_n} psi||^2`` by brute force
    over index tuples, against ``sum_n (1+t)^n ||psi^(n)||^2``."""
    if t < 0:
        raise DomainError("moment sum is stated for t >= 0")
    psi = np.asarray(psi, dtype=complex)
    norms = space.sector_norms(psi)
    top = int(np.max(np.nonzero(norms)[0])) if np.any(norms) else 0
    if top >= space.n_max:
        raise PreconditionError("psi must be supported below n_max")
    lowering = space.lowering
    lhs = 0.0
    for n in range(top + 1):
        acc = 0.0
        for ks in itertools.product(range(space.d), repeat=n):
            v = psi
            for k in reversed(ks):
                v = lowering[k] @ v
            acc += float(np.vdot(v, v).real)
        lhs += t**n / math.factorial(n) * acc
    rhs = float(np.sum((1.0 + t) ** np.arange(space.n_max + 1) * norms**2))
    r = abs(lhs - rhs) / max(1.0, rhs)
    return ResidualReport("moment_sum", r, tol, n_max=space.n_max, detail={"lhs": lhs, "rhs": rhs})


def commuting_closed_form_check(
    space: FockSpace, s, t, time: float, sector_cap: int, tol: float = THEOREM_TOL
) -> list[ResidualReport]:
    """Closed form of ``exp(it Delta(A))`` for commuting real S, T:

        C exp(-Dd_{tanh tT}/2) Gamma(e^{t conj S} cosh^{-1} tT) exp(+D_{tanh tT}/2)

    with ``C = e^{-i int_0^t 1/2 Im Tr(T* tanh sT) ds} det(1 - |tanh tT|^2)^{1/4}``.
    Compared with the generator exponential through matrix elements between
    sectors <= cap, with the normal-ordered unitary ``e^{-i theta} U_t`` on
    sectors <= cap, and at the vacuum.  The unitary comparison is exact in
    exact arithmetic; it is restricted because the non-unitary outer factors
    have entries growing with n_max and amplify roundoff in high sectors.
    """
    sample = commuting_flow(s, t, time)
    g = sample.generator
    k = sample.K
    ch = (mat_exp(time * g.T) + mat_exp(-time * g.T)) / 2
    middle = mat_exp(time * g.S.conj()) @ np.linalg.inv(ch)
    th = integrate(lambda x: commuting_flow(g.S, g.T, x).tau, 0.0, time, THETA_TOL)
    c = cmath.exp(-1j * th) * math.exp(0.25 * log_det_one_minus(k))
    closed = c * (
        _nilpotent_exp(-0.5 * sparse_delta_dagger(space, k), space)
        @ second_quantize(space, middle)
        @ _nilpotent_exp(0.5 * sparse_delta(space, k), space)
    )
    e = generator_exponential(space, g, time)
    u = one_param_unitary(space, g, time).matrix
    low = space.below(sector_cap)
    diff = closed - e
    # Matrix elements between low sectors; the full columns also pick up
    # the reflection of the truncated exponential at the n_max boundary.
    block = float(np.max(np.abs(diff[low, low])))
    return [
        ResidualReport(
            "commuting_closed_form",
            block,
            tol,
            sector_cap,
            space.n_max,
            {"restricted_norm": restricted_norm(diff, space, sector_cap)},
        ),
        ResidualReport(
            "commuting_vs_normal_ordered",
            restricted_norm(closed - cmath.exp(-1j * theta(g, time)) * u, space, sector_cap),
            1e-9,
            sector_cap,
            space.n_max,
        ),
        ResidualReport("commuting_vacuum_overlap", float(abs(e[0, 0] - c)), tol, 0, space.n_max),
    ]
