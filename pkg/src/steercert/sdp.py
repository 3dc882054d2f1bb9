"""Semidefinite programs for steering and incompatibility robustness.

Every reported value comes with a certified duality gap: the primal side is
repaired into a rigorously feasible point (upper bound for minimization) and
the dual side into a rigorously feasible functional (lower bound), so the
interval [lower, upper] brackets the true optimum regardless of how sloppy
the interior-point solution was.
"""

from __future__ import annotations

import itertools
import os
import warnings
from dataclasses import dataclass, field

import cvxpy as cp
import numpy as np

from .errors import CapacityError, SolverFailure
from .quantum import Assemblage, MeasurementSet

MAX_STRATEGIES = 10 ** 5
GAP_TOL = 1e-6

# Solver settings tried in order until the certified gap closes.  Turning
# equilibration off helps on some larger instances where the default scaling
# stalls just short of the gap tolerance.
SOLVER_SETTINGS = [dict(), dict(equilibrate_enable=False)]


def default_solver() -> str:
    return os.environ.get("STEERCERT_SOLVER", "CLARABEL")


def enumerate_strategies(d: int, k: int):
    """All d^k deterministic outcome assignments x -> a, lexicographic."""
    if d ** k > MAX_STRATEGIES:
        raise CapacityError(
            f"d^k = {d}^{k} = {d ** k} deterministic strategies exceed the "
            f"cap of {MAX_STRATEGIES}; try a smaller (d, k)"
        )
    return list(itertools.product(range(d), repeat=k))


@dataclass
class SdpSolution:
    """Certified solve result.

    ``value`` is the midpoint of the certified bracket and ``gap`` its width,
    so the true optimum lies within gap/2 of value.  ``status`` is "optimal"
    only when the bracket is tighter than GAP_TOL.
    """

    value: float
    primal_witness: dict = field(repr=False, default_factory=dict)
    dual_witness: dict = field(repr=False, default_factory=dict)
    gap: float = np.inf
    status: str = "inaccurate"
    lower: float = -np.inf
    upper: float = np.inf

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "gap": self.gap,
            "status": self.status,
            "lower": self.lower,
            "upper": self.upper,
            "primal_blocks": len(self.primal_witness),
            "dual_blocks": len(self.dual_witness),
        }


def _psd_clamp(m: np.ndarray) -> np.ndarray:
    m = (m + m.conj().T) / 2
    w, v = np.linalg.eigh(m)
    return (v * np.clip(w, 0, None)) @ v.conj().T


# inaccurate solves are fine here: witnesses get repaired and the certified
# gap decides whether to retry, so the stock modeling-layer warning is noise
warnings.filterwarnings("ignore", message="Solution may be inaccurate")


def _solve(problem: cp.Problem, solver: str, opts: dict) -> None:
    try:
        with warnings.catch_warnings():
            warnings.filterwarnings(
                "ignore", message="Solution may be inaccurate"
            )
            problem.solve(solver=solver, **opts)
    except cp.error.SolverError as exc:
        raise SolverFailure(f"conic solver failed: {exc}") from exc
    if problem.value is None:
        raise SolverFailure(f"conic solver returned no value ({problem.status})")


# ---------------------------------------------------------------------------
# steering robustness


def _sr_primal_certified(sig, d, k, strategies, solver, opts):
    """Solve the LHS-weights primal and repair the witness into feasibility.

    Returns a rigorous upper bound on SR together with the repaired weights.
    """
    svars = [cp.Variable((d, d), hermitian=True) for _ in strategies]
    cons = [s >> 0 for s in svars]
    for x in range(k):
        for a in range(d):
            tot = sum(svars[i] for i, lam in enumerate(strategies) if lam[x] == a)
            cons.append(tot - sig[(a, x)] >> 0)
    prob = cp.Problem(
        cp.Minimize(cp.real(sum(cp.trace(s) for s in svars)) - 1), cons
    )
    _solve(prob, solver, opts)
    sv = [_psd_clamp(s.value) for s in svars]
    # after clamping, the worst remaining marginal violation is absorbed by
    # mixing a little identity into every weight
    eps = 0.0
    for x in range(k):
        for a in range(d):
            tot = sum(sv[i] for i, lam in enumerate(strategies) if lam[x] == a)
            eps = max(eps, float(np.linalg.eigvalsh(sig[(a, x)] - tot).max()))
    c = max(eps, 0.0) / d ** (k - 1)
    if c > 0:
        pad = c * np.eye(d)
        sv = [s + pad for s in sv]
    upper = sum(float(np.trace(s).real) for s in sv) - 1
    return upper, sv


def _sr_dual_certified(sig, d, k, strategies, solver, opts):
    """Solve the steering-functional dual and rescale into strict feasibility.

    The returned value is a rigorous lower bound on SR: the clamped F blocks
    are divided by the exact LHS maximum of the functional they define.
    """
    fvars = {
        (a, x): cp.Variable((d, d), hermitian=True)
        for x in range(k)
        for a in range(d)
    }
    cons = [f >> 0 for f in fvars.values()]
    for lam in strategies:
        cons.append(np.eye(d) - sum(fvars[(lam[x], x)] for x in range(k)) >> 0)
    obj = cp.Maximize(
        cp.real(sum(cp.trace(fvars[key] @ sig[key]) for key in fvars)) - 1
    )
    _solve(cp.Problem(obj, cons), solver, opts)
    fv = {key: _psd_clamp(f.value) for key, f in fvars.items()}
    lam_max = max(
        float(np.linalg.eigvalsh(sum(fv[(lam[x], x)] for x in range(k))).max())
        for lam in strategies
    )
    lam_max = max(lam_max, 1e-300)
    fv = {key: f / lam_max for key, f in fv.items()}
    lower = sum(float(np.trace(fv[key] @ sig[key]).real) for key in fv) - 1
    return lower, fv


def _assemblage_dict(assemblage: Assemblage):
    return {
        (a, x): assemblage.states[x][a].a
        for x in range(assemblage.k)
        for a in range(assemblage.d)
    }


def steering_robustness(assemblage: Assemblage, solver: str | None = None) -> SdpSolution:
    """Minimal noise weight t making the assemblage unsteerable.

    Primal: LHS weights sigma_lambda over the deterministic strategies with
    marginals dominating the assemblage.  Dual: steering functional F_{a|x}
    normalized over all deterministic LHS responses.  Both witnesses are
    repaired into rigorous feasibility before reporting.
    """
    solver = solver or default_solver()
    d, k = assemblage.d, assemblage.k
    strategies = enumerate_strategies(d, k)
    sig = _assemblage_dict(assemblage)
    upper, lower = np.inf, -np.inf
    primal_w, dual_w = None, None
    failure = None
    for opts in SOLVER_SETTINGS:
        try:
            u, pw = _sr_primal_certified(sig, d, k, strategies, solver, opts)
            lo, dw = _sr_dual_certified(sig, d, k, strategies, solver, opts)
        except SolverFailure as exc:
            failure = exc
            continue
        if u < upper:
            upper, primal_w = u, pw
        if lo > lower:
            lower, dual_w = lo, dw
        if upper - lower <= GAP_TOL:
            break
    if primal_w is None or dual_w is None:
        raise failure or SolverFailure("no solver settings produced a solution")
    gap = upper - lower
    return SdpSolution(
        value=(upper + lower) / 2,
        primal_witness={"lhs_weights": primal_w},
        dual_witness={"functional": dual_w},
        gap=gap,
        status="optimal" if gap <= GAP_TOL else "inaccurate",
        lower=lower,
        upper=upper,
    )


def lhs_membership(assemblage: Assemblage, solver: str | None = None):
    """Decide whether the assemblage admits a local-hidden-state model.

    Feasible: returns ("feasible", weights) with PSD sigma_lambda whose
    marginals reproduce the assemblage within 1e-7.  Infeasible: returns
    ("infeasible", functional) whose value on the assemblage exceeds 1 while
    being at most 1 on every LHS assemblage.
    """
    solver = solver or default_solver()
    d, k = assemblage.d, assemblage.k
    strategies = enumerate_strategies(d, k)
    sig = _assemblage_dict(assemblage)
    sol = steering_robustness(assemblage, solver=solver)
    if sol.lower > GAP_TOL:
        functional = sol.dual_witness["functional"]
        value = sum(
            float(np.trace(functional[key] @ sig[key]).real) for key in functional
        )
        return "infeasible", {"functional": functional, "value": value}
    # near-zero robustness: recover an exact decomposition by least squares
    svars = [cp.Variable((d, d), hermitian=True) for _ in strategies]
    cons = [s >> 0 for s in svars]
    resid = []
    for x in range(k):
        for a in range(d):
            tot = sum(svars[i] for i, lam in enumerate(strategies) if lam[x] == a)
            resid.append(cp.norm(tot - sig[(a, x)], "fro"))
    prob = cp.Problem(cp.Minimize(sum(resid)), cons)
    _solve(prob, solver, dict())
    weights = [_psd_clamp(s.value) for s in svars]
    return "feasible", {"weights": weights, "residual": float(prob.value)}


def sr_bisection_oracle(assemblage: Assemblage, tol: float = 1e-5,
                        solver: str | None = None) -> float:
    """Direct bisection on the noise weight t; independent of the primal SDP.

    At a trial t, feasibility of "the t-mixture is unsteerable" reduces to
    finding LHS weights of total trace 1 whose scaled marginals dominate the
    assemblage; maximizing the worst slack turns this into one SDP per step.
    """
    solver = solver or default_solver()
    d, k = assemblage.d, assemblage.k
    if d ** k > 10 ** 3:
        raise CapacityError(
            f"bisection oracle limited to d^k <= 1000, got {d ** k}"
        )
    strategies = enumerate_strategies(d, k)
    sig = _assemblage_dict(assemblage)

    def max_slack(t: float) -> float:
        svars = [cp.Variable((d, d), hermitian=True) for _ in strategies]
        s = cp.Variable()
        cons = [v >> 0 for v in svars]
        cons.append(cp.real(sum(cp.trace(v) for v in svars)) == 1)
        eye = np.eye(d)
        for x in range(k):
            for a in range(d):
                tot = sum(
                    svars[i] for i, lam in enumerate(strategies) if lam[x] == a
                )
                cons.append((1 + t) * tot - sig[(a, x)] - s * eye >> 0)
        prob = cp.Problem(cp.Maximize(s), cons)
        _solve(prob, solver, dict())
        return float(prob.value)

    lo, hi = 0.0, float(k)
    if max_slack(lo) >= 0:
        return 0.0
    while hi - lo > tol / 4:
        mid = (lo + hi) / 2
        if max_slack(mid) >= 0:
            hi = mid
        else:
            lo = mid
    return (lo + hi) / 2


# ---------------------------------------------------------------------------
# incompatibility robustness


def _eta_primal_certified(meas, n, d, k, strategies, solver, opts):
    """Maximize the shrink factor eta; repair the parent into feasibility.

    The clamped parent is renormalized so it sums to identity exactly, then
    the largest eta it still supports is found per constraint by bisection.
    Returns a rigorous lower bound on eta^g and the repaired parent.
    """
    gvars = [cp.Variable((n, n), hermitian=True) for _ in strategies]
    eta = cp.Variable()
    cons = [g >> 0 for g in gvars]
    cons.append(sum(gvars) == np.eye(n))
    marg_idx = {}
    for x in range(k):
        for a in range(d):
            idx = [i for i, lam in enumerate(strategies) if lam[x] == a]
            marg_idx[(a, x)] = idx
            cons.append(sum(gvars[i] for i in idx) - eta * meas[x][a] >> 0)
    _solve(cp.Problem(cp.Maximize(eta), cons), solver, opts)
    gv = [_psd_clamp(g.value) for g in gvars]
    total = sum(gv)
    w, v = np.linalg.eigh(total)
    if w[0] <= 0:
        raise SolverFailure("degenerate parent candidate: sum not positive")
    inv_sqrt = (v * (1 / np.sqrt(w))) @ v.conj().T
    gv = [inv_sqrt @ g @ inv_sqrt for g in gv]
    lower = np.inf
    for (a, x), idx in marg_idx.items():
        marg = sum(gv[i] for i in idx)
        lo_b, hi_b = 0.0, 1.5
        for _ in range(60):
            mid = (lo_b + hi_b) / 2
            if np.linalg.eigvalsh(marg - mid * meas[x][a]).min() >= 0:
                lo_b = mid
            else:
                hi_b = mid
        lower = min(lower, lo_b)
    return lower, gv


def _eta_dual_certified(meas, n, d, k, strategies, solver, opts):
    """Solve the dual (min Tr Z over dominating functionals); repair upward.

    After clamping the Y blocks, Z is shifted up until it dominates every
    strategy marginal and the normalization is rescaled, so Tr Z is a
    rigorous upper bound on eta^g.
    """
    yvars = {
        (a, x): cp.Variable((n, n), hermitian=True)
        for x in range(k)
        for a in range(d)
    }
    zvar = cp.Variable((n, n), hermitian=True)
    cons = [y >> 0 for y in yvars.values()]
    cons.append(
        cp.real(
            sum(cp.trace(yvars[(a, x)] @ meas[x][a])
                for x in range(k) for a in range(d))
        )
        == 1
    )
    for lam in strategies:
        cons.append(zvar - sum(yvars[(lam[x], x)] for x in range(k)) >> 0)
    _solve(cp.Problem(cp.Minimize(cp.real(cp.trace(zvar))), cons), solver, opts)
    yv = {key: _psd_clamp(y.value) for key, y in yvars.items()}
    beta = sum(
        float(np.trace(yv[(a, x)] @ meas[x][a]).real)
        for x in range(k)
        for a in range(d)
    )
    if beta <= 0:
        raise SolverFailure("degenerate dual candidate: zero normalization")
    zv = (zvar.value + zvar.value.conj().T) / 2
    shift = max(
        float(np.linalg.eigvalsh(sum(yv[(lam[x], x)] for x in range(k)) - zv).max())
        for lam in strategies
    )
    zv = zv + max(shift, 0.0) * np.eye(n)
    upper = float(np.trace(zv).real) / beta
    return upper, {"Y": yv, "Z": zv / beta}


def incompatibility_eta_g(measurements: MeasurementSet,
                          solver: str | None = None) -> SdpSolution:
    """Generalized incompatibility robustness eta^g of a measurement set.

    The largest eta for which a single parent measurement has marginals
    dominating eta times each child.  Certified by a repaired parent (lower
    bound) and a repaired dual functional (upper bound).
    """
    solver = solver or default_solver()
    n, d, k = measurements.dim, measurements.n_outcomes, measurements.k
    strategies = enumerate_strategies(d, k)
    meas = [p.arrays() for p in measurements.povms]
    upper, lower = np.inf, -np.inf
    parent, dual_w = None, None
    failure = None
    for opts in SOLVER_SETTINGS:
        try:
            lo, pw = _eta_primal_certified(meas, n, d, k, strategies, solver, opts)
            u, dw = _eta_dual_certified(meas, n, d, k, strategies, solver, opts)
        except SolverFailure as exc:
            failure = exc
            continue
        if lo > lower:
            lower, parent = lo, pw
        if u < upper:
            upper, dual_w = u, dw
        if upper - lower <= GAP_TOL:
            break
    if parent is None or dual_w is None:
        raise failure or SolverFailure("no solver settings produced a solution")
    gap = upper - lower
    upper = min(upper, 1.0)  # eta = 1 is always feasible, never exceeded
    return SdpSolution(
        value=min((upper + lower) / 2, 1.0),
        primal_witness={"parent": parent, "strategies": strategies},
        dual_witness=dual_w,
        gap=gap,
        status="optimal" if gap <= GAP_TOL else "inaccurate",
        lower=lower,
        upper=upper,
    )


def incompatibility_robustness(measurements: MeasurementSet,
                               solver: str | None = None) -> float:
    """IR = 1/eta^g - 1."""
    return 1.0 / incompatibility_eta_g(measurements, solver=solver).value - 1.0
