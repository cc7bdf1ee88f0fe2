"""Verification suites run by the command-line front end.

Each suite returns :class:`Entry` records.  ``run_verify`` dispatches the
per-t suites over a thread pool and reassembles them in submission order, so
the result does not depend on scheduling.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from bogofock import bogoliubov as bg
from bogofock import quadops as qo
from bogofock.fock import FockSpace
from bogofock.linalg import hs_norm, op_norm
from bogofock.problem import ProblemFile
from bogofock.symplectic import (
    SigmaGenerator,
    SymplecticElement,
    flow,
    hs_flow_bound,
    is_sigma2,
    is_symplectic,
    k_properties,
    theta,
)

__all__ = [
    "DEFAULT_TOLERANCES",
    "DERIVATIVE_TS",
    "Entry",
    "RunConfig",
    "ConfigError",
    "default_n_max",
    "default_sector_cap",
    "run_check",
    "run_verify",
    "flow_rows",
]

DEFAULT_TOLERANCES = {
    "symplectic": 1e-9,
    "k_properties": 1e-9,
    "hs_bound": 1e-12,
    "intertwining": 1e-8,
    "theorem": 1e-6,
    "cocycle": 1e-6,
    "rho": 1e-9,
    "vacuum_overlap": 1e-6,
    "derivative": 0.2,
    "determinant": 1e-4,
    "number_identity": 1e-12,
    "moment_sum": 1e-10,
    "moment_series": 1e-8,
    "commutator": 1e-10,
    "ad": 1e-8,
    "commuting": 1e-6,
}

DERIVATIVE_TS = (0.1, 0.05, 0.025, 0.0125)
NUMBER_TS = (0.0, 0.5, 1.0, 3.0)
DEFAULT_VERIFY_GRID = (0.25, 0.5)
DEFAULT_FLOW_GRID = (0.0, 0.25, 0.5, 0.75, 1.0)
# Largest ||t A|| accepted; cosh overflows well before exp(700).
MAX_FLOW_NORM = 50.0

# Calibrated so the builtin demos pass at the default grid.
_N_MAX = {1: 100, 2: 40, 3: 16}
_CAP = {1: 4}


def default_n_max(d: int) -> int:
    return _N_MAX.get(d, 10)


def default_sector_cap(d: int) -> int:
    return _CAP.get(d, 2)


class ConfigError(ValueError):
    """Run configuration violates its invariants."""


@dataclass(frozen=True)
class RunConfig:
    n_max: int
    sector_cap: int
    t_grid: tuple[float, ...]
    tolerances: dict = field(default_factory=dict)
    seed: int = 0
    output_path: str | None = None

    def __post_init__(self):
        if not self.t_grid:
            raise ConfigError("t grid is empty")
        if not all(math.isfinite(t) for t in self.t_grid):
            raise ConfigError("t grid has non-finite values")
        if self.sector_cap < 0:
            raise ConfigError("sector cap must be nonnegative")
        if self.sector_cap + 6 > self.n_max:
            raise ConfigError(f"need sector_cap + 6 <= n_max, got {self.sector_cap} and {self.n_max}")
        unknown = set(self.tolerances) - set(DEFAULT_TOLERANCES)
        if unknown:
            raise ConfigError(f"unknown tolerance names: {', '.join(sorted(unknown))}")
        if any(not (v >= 0 and math.isfinite(v)) for v in self.tolerances.values()):
            raise ConfigError("tolerances must be finite and nonnegative")

    def tol(self, name: str) -> float:
        return float(self.tolerances.get(name, DEFAULT_TOLERANCES[name]))


@dataclass(frozen=True)
class Entry:
    suite: str
    name: str
    residual: float
    tolerance: float
    passed: bool
    t: float | None = None
    n_max: int = -1
    sector_cap: int = -1


def _from_report(suite: str, r: bg.ResidualReport, t=None) -> Entry:
    return Entry(suite, r.name, float(r.value), float(r.tolerance), bool(r.passed), t, r.n_max, r.sector_cap)


def _le(suite, name, value, tol, t=None, n_max=-1, cap=-1) -> Entry:
    value = float(value)
    return Entry(suite, name, value, float(tol), bool(value <= tol), t, n_max, cap)


def _symplectic_entries(s, t, tol, when=None) -> list[Entry]:
    res = is_symplectic(s, t)
    out = [_le("symplectic.is_symplectic", f"s{i + 1}", v, tol, when) for i, v in enumerate(res)]
    lem = k_properties(SymplecticElement(s, t))
    out.append(_le("symplectic.k_properties", "k1_norm_below_one", lem["k1_norm"], 1.0 - 1e-15, when))
    out.append(_le("symplectic.k_properties", "k1_symmetric", lem["k1_symmetry"], tol, when))
    out.append(_le("symplectic.k_properties", "k3_symmetric", lem["k3_symmetry"], tol, when))
    return out


def check_flow_norm(g: SigmaGenerator, ts) -> None:
    norm = op_norm(g.matrix)
    for t in ts:
        if abs(t) * norm > MAX_FLOW_NORM:
            raise ConfigError(f"||t A|| = {abs(t) * norm:.3g} > {MAX_FLOW_NORM:g} at t = {t:g}")


def run_check(problem: ProblemFile, tolerances: dict | None = None) -> list[Entry]:
    """Membership checks: symplectic relations and invertibility properties for
    an element; the generator conditions plus the same checks on ``exp(A)`` for
    a generator."""
    tol = RunConfig(6, 0, (1.0,), tolerances or {}).tol("symplectic")
    if problem.kind == "element":
        return _symplectic_entries(problem.S, problem.T, tol)
    res = is_sigma2(problem.S, problem.T)
    out = [
        _le("symplectic.is_sigma2", "s_anti_hermitian", res.anti_hermitian, tol),
        _le("symplectic.is_sigma2", "t_symmetric", res.symmetric, tol),
    ]
    if all(e.passed for e in out):
        sample = flow(SigmaGenerator(problem.S, problem.T), 1.0)
        out += _symplectic_entries(sample.block11, sample.block21, tol, 1.0)
    return out


def flow_rows(g: SigmaGenerator, ts) -> list[dict]:
    """Per-t flow summary: block norms, ``||K_t||``, ``||K_t||_2``, tau and theta."""
    rows = []
    for t in ts:
        smp = flow(g, t)
        rows.append(
            {
                "t": float(t),
                "norm_b11": op_norm(smp.block11),
                "norm_b12": op_norm(smp.block12),
                "norm_b21": op_norm(smp.block21),
                "norm_b22": op_norm(smp.block22),
                "k_norm": op_norm(smp.K),
                "k_hs": hs_norm(smp.K),
                "tau": smp.tau,
                "theta": theta(g, t),
            }
        )
    return rows


def _is_commuting_case(g: SigmaGenerator) -> bool:
    real = np.all(g.S.imag == 0) and np.all(g.T.imag == 0)
    return bool(real and np.allclose(g.S @ g.T, g.T @ g.S, atol=1e-14, rtol=0))


def _test_vector(d: int) -> np.ndarray:
    return np.ones(d, dtype=complex) / math.sqrt(d)


def _per_t(g: SigmaGenerator, space: FockSpace, cfg: RunConfig, t: float) -> list[Entry]:
    cap = cfg.sector_cap
    n = space.n_max
    smp = flow(g, t)
    out = _symplectic_entries(smp.block11, smp.block21, cfg.tol("symplectic"), t)
    lhs, rhs = hs_flow_bound(g, t)
    out.append(_le("symplectic.hs_flow_bound", "hs_flow_bound", max(0.0, lhs - rhs), cfg.tol("hs_bound"), t))
    r = bg.intertwining_residual(space, smp.element, _test_vector(g.d), cap, cfg.tol("intertwining"))
    out.append(_from_report("bogoliubov.intertwining_residual", r, t))
    r = bg.theorem_mM_residual(space, g, t, cap, cfg.tol("theorem"))
    out.append(_from_report("bogoliubov.theorem_mM_residual", r, t))
    th = r.detail["theta"]
    if abs(math.sin(th / 2)) * 2 > 100 * cfg.tol("theorem"):
        # dropping the phase must break the identity by a clear margin
        bare = bg.theorem_mM_residual(space, g, t, cap, cfg.tol("theorem"), with_phase=False)
        ratio = 10 * cfg.tol("theorem") / bare.value if bare.value > 0 else math.inf
        out.append(_le("bogoliubov.theorem_mM_residual", "phase_necessity", ratio, 1.0, t, n, cap))
    if np.all(g.T == 0):
        out.append(_le("symplectic.theta", "theta_zero", abs(th), cfg.tol("rho"), t))
    r = bg.vacuum_overlap_check(space, g, t, cfg.tol("vacuum_overlap"))
    out.append(_from_report("bogoliubov.vacuum_overlap_check", r, t))
    if _is_commuting_case(g):
        for r in bg.commuting_closed_form_check(space, g.S.real, g.T.real, t, cap, cfg.tol("commuting")):
            out.append(_from_report("bogoliubov.commuting_closed_form_check", r, t))
    return out


def _cocycle(g: SigmaGenerator, space: FockSpace, cfg: RunConfig) -> list[Entry]:
    grid = cfg.t_grid
    t, s = grid[0], grid[1] if len(grid) > 1 else grid[0]
    out = [
        _from_report("bogoliubov.cocycle_residual", r, t)
        for r in bg.cocycle_residual(space, g, t, s, cfg.sector_cap, cfg.tol("cocycle"))
    ]
    r = bg.rho_cocycle_identity(g, t, s, grid[-1], cfg.tol("rho"))
    out.append(_from_report("symplectic.local_exponent", r, t))
    return out


def _limits(g: SigmaGenerator, space: FockSpace, cfg: RunConfig) -> list[Entry]:
    out = [
        _from_report("bogoliubov.determinant_limits", r)
        for r in bg.determinant_limits(g, DERIVATIVE_TS, cfg.tol("determinant"))
    ]
    r = bg.derivative_residual(space, g, DERIVATIVE_TS, 0, None, cfg.tol("derivative"))
    out.append(_from_report("bogoliubov.derivative_residual", r))
    return out


def _identities(d: int, cfg: RunConfig) -> list[Entry]:
    small = FockSpace(d, min(cfg.n_max, 12))
    out = [
        _from_report("bogoliubov.number_identity_check", bg.number_identity_check(small, t, cfg.tol("number_identity")), t)
        for t in NUMBER_TS
    ]
    rng = np.random.default_rng(cfg.seed)
    cap = min(4, small.n_max - 1)
    for t in (0.5, 2.0):
        psi = qo.random_state(small, cap, rng)
        out.append(
            _from_report("bogoliubov.moment_sum_check", bg.moment_sum_check(small, psi, t, cfg.tol("moment_sum")), t)
        )
    return out


def _quadratic(g: SigmaGenerator, space: FockSpace, cfg: RunConfig) -> list[Entry]:
    rng = np.random.default_rng(cfg.seed + 1)
    d = g.d
    if np.any(g.T):
        k = g.T
    else:
        z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        k = 0.5 * (z + z.T) / op_norm(z + z.T)
    n, cap = space.n_max, space.n_max - 3
    out = []
    for e in qo.norm_bound_battery(space, k, g.S, samples=10, rng=rng):
        out.append(Entry("quadops.norm_bound_battery", e.name, float(e.value), float(e.bound), bool(e.passed), None, n))
    f = _test_vector(d)
    for e in qo.commutator_battery(space, k, g.S, f, cfg.tol("commutator")):
        out.append(Entry("quadops.commutator_battery", e.name, float(e.value), float(e.bound), bool(e.passed), None, n, cap))
    k_max = 3
    for e in qo.ad_battery(space, g, f, k_max, cfg.tol("ad")):
        out.append(Entry("quadops.ad_battery", e.name, float(e.value), float(e.bound), bool(e.passed), None, n, n - 2 * k_max - 1))
    # vacuum moments of a contraction built from the flow
    kt = flow(g, cfg.t_grid[0]).K
    orders = min(5, n // 2)
    got = qo.vacuum_moment_series(space, kt, orders)
    want = qo.determinant_series(kt, orders)
    scale = np.where(want != 0, np.abs(want), 1.0)
    err = float(np.max(np.abs(got - want) / scale))
    out.append(_le("quadops.vacuum_moment_series", "moment_series", err, cfg.tol("moment_series"), cfg.t_grid[0], n))
    return out


def _element_suites(a: SymplecticElement, space: FockSpace, cfg: RunConfig) -> list[Entry]:
    out = _symplectic_entries(a.S, a.T, cfg.tol("symplectic"))
    r = bg.intertwining_residual(space, a, _test_vector(a.d), cfg.sector_cap, cfg.tol("intertwining"))
    out.append(_from_report("bogoliubov.intertwining_residual", r))
    return out


def run_verify(problem: ProblemFile, cfg: RunConfig, workers: int | None = None) -> list[Entry]:
    """Full battery.  Exceptions raised by a suite propagate to the caller."""
    space = FockSpace(problem.d, cfg.n_max)
    if problem.kind == "element":
        a = problem.element().validate()
        return _element_suites(a, space, cfg)
    g = problem.generator().validate()
    check_flow_norm(g, cfg.t_grid + (sum(cfg.t_grid[:2]),))
    # warm the cached ladder operators before threads share the space
    space.lowering, space.raising
    jobs = [lambda t=t: _per_t(g, space, cfg, t) for t in cfg.t_grid]
    jobs += [
        lambda: _cocycle(g, space, cfg),
        lambda: _limits(g, space, cfg),
        lambda: _identities(g.d, cfg),
        lambda: _quadratic(g, space, cfg),
    ]
    workers = workers or min(4, os.cpu_count() or 1)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(lambda job: job(), jobs))
    return [e for block in results for e in block]

