"""Dimension certificates and noise thresholds.

Converts a steering-robustness lower bound into a certified minimal Schmidt
number, provides the closed-form dimension witnesses and their sanity
inversions, the experimentally estimable robustness lower bound, and the
noise thresholds of the certificates on isotropic states.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import bounds
from .errors import DomainError
from .quantum import (
    BipartiteState,
    MeasurementSet,
    isotropic_state,
    make_assemblage,
    maximally_entangled,
    mub_measurements,
)
from .sdp import enumerate_strategies, steering_robustness

N_SCAN_CAP = 10 ** 4


@dataclass
class Certificate:
    """Audit trail of a Schmidt-number certification.

    ``certified_n`` is one more than the largest preparation dimension the
    robustness value excludes; ``witness_trace`` records which bound did the
    excluding for each ruled-out n.
    """

    sr_lower: float
    k: int
    per_n_ceilings: dict = field(default_factory=dict)
    certified_n: int = 1
    witness_trace: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "sr_lower": self.sr_lower,
            "k": self.k,
            "certified_n": self.certified_n,
            "per_n_ceilings": self.per_n_ceilings,
            "witness_trace": self.witness_trace,
        }


def certified_schmidt_number(sr_lower: float, k: int) -> Certificate:
    """Largest preparation dimension excluded by an SR value, plus one.

    Scans n upward against the best available ceiling for k measurements;
    stops at the first n that survives (ceilings are nondecreasing in n).
    """
    if sr_lower < 0 or k < 2:
        raise DomainError(f"need sr_lower >= 0 and k >= 2, got {sr_lower}, {k}")
    if sr_lower >= k - 1:
        warnings.warn(
            f"sr_lower={sr_lower} is at least k-1={k - 1}, the largest value "
            "any set of k measurements allows; input looks suspicious",
            stacklevel=2,
        )
    cert = Certificate(sr_lower=sr_lower, k=k)
    for n in range(1, N_SCAN_CAP + 1):
        b = bounds.h_best(k, n)
        cert.per_n_ceilings[n] = b.sr_ceiling
        if sr_lower > b.sr_ceiling:
            cert.witness_trace[n] = b.source
            cert.certified_n = n + 1
        else:
            break
    return cert


# ---------------------------------------------------------------------------
# closed-form witnesses (continuous minimal dimension from an SR value)


def witness_pairs(sr: float) -> float:
    """Minimal dimension compatible with SR from two measurements."""
    if not 0 <= sr < 1:
        raise DomainError(f"pair witness needs 0 <= sr < 1, got {sr}")
    return ((1 + sr) / (1 - sr)) ** 2


def witness_cloning(sr: float, k: int) -> float:
    """Minimal dimension from the cloning bound for k measurements."""
    if not 0 <= sr < k - 1:
        raise DomainError(f"cloning witness needs 0 <= sr < k-1, got {sr}")
    return 1 + 2 * k * sr / (k - sr - 1)


def witness_power_two(sr: float, r: int) -> float:
    """Minimal dimension from 2^r measurements; r = 1 is the pair case."""
    if r < 1:
        raise DomainError(f"need r >= 1, got {r}")
    t = (1 + sr) ** (1 / r)
    if not 0 <= sr or t >= 2:
        raise DomainError(f"power-two witness needs (1+sr)^(1/r) < 2, got {sr}")
    return (t / (2 - t)) ** 2


def witness_three(sr: float) -> float:
    """Minimal dimension from three measurements (recursive pair bound)."""
    if not 0 <= sr < 2:
        raise DomainError(f"three-measurement witness needs 0 <= sr < 2, got {sr}")
    s = sr
    return (
        (1 + s)
        * (17 + 5 * s + 3 * math.sqrt((1 + s) * (25 + s)))
        / (8 * (2 - s) ** 2)
    )


# ---------------------------------------------------------------------------
# experimental estimation chain


def lhs_norm(b: MeasurementSet) -> float:
    """Largest value of the coincidence functional on any LHS assemblage.

    Equals the maximum over deterministic strategies of the top eigenvalue
    of the summed elements (the optimal hidden state is that eigenvector).
    """
    strategies = enumerate_strategies(b.n_outcomes, b.k)
    ops = [p.arrays() for p in b.povms]
    return max(
        float(np.linalg.eigvalsh(sum(ops[x][s[x]] for x in range(b.k))).max())
        for s in strategies
    )


def sr_lower_from_correlations(state: BipartiteState, a: MeasurementSet,
                               b: MeasurementSet) -> float:
    """Steering-robustness lower bound from coincidence counts.

    Normalizes the summed coincidence probabilities by the LHS maximum of
    Bob's measurement choice; negative values are reported as-is.
    """
    if a.dim != state.dim_a or b.dim != state.dim_b or a.k != b.k:
        raise DomainError("mismatched dimensions or setting counts")
    lam = lhs_norm(b)
    rho = state.matrix.a
    total = 0.0
    for x in range(a.k):
        for i in range(min(a.n_outcomes, b.n_outcomes)):
            op = np.kron(a.element(i, x).a, b.element(i, x).a)
            total += float(np.trace(op @ rho).real)
    return total / lam - 1


# ---------------------------------------------------------------------------
# noise thresholds


@dataclass
class ThresholdResult:
    d: int
    k: int
    n: int
    v_star: float | None
    method: str
    line_fit: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "k": self.k,
            "n": self.n,
            "v_star": self.v_star,
            "method": self.method,
            "line_fit": self.line_fit,
        }


def _sr_at(d: int, k: int, v: float, solver=None) -> float:
    meas = mub_measurements(d, k)
    return steering_robustness(
        make_assemblage(isotropic_state(d, v), meas), solver=solver
    ).value


FIT_SAMPLES = (1.0, 0.97)
FIT_VALIDATE = 0.94
FIT_RESIDUAL_TOL = 1e-6


def noise_threshold(d: int, k: int, n: int, solver=None) -> ThresholdResult:
    """Smallest isotropic mixing v at which the n-certificate still fires.

    SR(v) is linear above the steering onset, so two samples fix the line
    and a third validates it; the crossing with the ceiling is then read
    off.  If the validation residual is too large the routine bisects
    instead, and the inverted threshold is always confirmed by one direct
    solve at v*.
    """
    ceiling = bounds.sr_ceiling(k, n)
    sr_one = _sr_at(d, k, 1.0, solver)
    if sr_one <= ceiling + 1e-6:
        return ThresholdResult(d, k, n, None, "sdp_scan",
                               {"sr_at_one": sr_one, "ceiling": ceiling})
    v1, v2 = FIT_SAMPLES
    s1, s2 = sr_one, _sr_at(d, k, v2, solver)
    slope = (s1 - s2) / (v1 - v2)
    intercept = s1 - slope * v1
    s3 = _sr_at(d, k, FIT_VALIDATE, solver)
    residual = abs(slope * FIT_VALIDATE + intercept - s3)
    fit = {"slope": slope, "intercept": intercept, "residual": residual,
           "ceiling": ceiling, "sr_at_one": sr_one}
    method = "sdp_scan"
    if residual <= FIT_RESIDUAL_TOL:
        v_star = (ceiling - intercept) / slope
        confirm = _sr_at(d, k, v_star, solver)
        fit["confirm_sr"] = confirm
        if abs(confirm - ceiling) <= 1e-3:
            return ThresholdResult(d, k, n, float(v_star), method, fit)
    # nonlinear region touched or confirmation failed: bisect on v
    method = "sdp_bisection"
    lo, hi = 0.0, 1.0
    while hi - lo > 1e-5:
        mid = (lo + hi) / 2
        if _sr_at(d, k, mid, solver) > ceiling:
            hi = mid
        else:
            lo = mid
    v_star = (lo + hi) / 2
    fit["confirm_sr"] = _sr_at(d, k, v_star, solver)
    return ThresholdResult(d, k, n, float(v_star), method, fit)


def noise_threshold_pairs(d: int, n: int) -> float:
    """Closed-form threshold for two MUBs on the isotropic family."""
    if d < 2 or not 1 <= n < d:
        raise DomainError(f"need d >= 2 and 1 <= n < d, got d={d}, n={n}")
    rd, rn = math.sqrt(d), math.sqrt(n)
    return ((d + rd - 1) * rn - 1) / ((d - 1) * (rn + 1))


# ---------------------------------------------------------------------------
# figure and table data


def fig3_data(d: int = 4, k_list=(2, 3, 4), v_grid=(0.7, 0.8, 0.9, 1.0),
              n_list=(2, 3), solver=None) -> dict:
    """SR-versus-noise lines for MUB setups plus the horizontal ceilings."""
    lines = {}
    for k in k_list:
        samples = [(v, _sr_at(d, k, v, solver)) for v in v_grid]
        positive = [(v, s) for v, s in samples if s > 1e-6]
        fit = {}
        if len(positive) >= 2:
            (va, sa), (vb, sb) = positive[0], positive[-1]
            slope = (sb - sa) / (vb - va)
            intercept = sa - slope * va
            residual = max(
                abs(slope * v + intercept - s) for v, s in positive
            )
            fit = {"slope": slope, "intercept": intercept, "residual": residual}
        lines[k] = {"samples": samples, "fit": fit}
    levels = {
        k: {n: bounds.sr_ceiling(k, n) for n in n_list} for k in k_list
    }
    return {"d": d, "lines": lines, "bound_levels": levels}


def constructible(d: int, k: int) -> bool:
    """Whether k MUBs are available in dimension d."""
    if d == 6:
        return 2 <= k <= 3
    return d in {2, 3, 4, 5, 7, 8, 9} and 2 <= k <= d + 1


def _map_cells(worker, cells, jobs: int):
    """Evaluate worker over cells, in input order regardless of completion."""
    if jobs <= 1 or len(cells) <= 1:
        return [worker(c) for c in cells]
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(worker, cells))


def table2_data(max_strategies: int = 4000, k_max: int = 8, d_max: int = 7,
                solver=None, jobs: int = 1):
    """SR of k MUBs on the maximally entangled state, per reachable cell.

    Cells beyond the strategy budget are emitted as capacity skips rather
    than errors.
    """
    cells = [
        (k, d)
        for k in range(2, k_max + 1)
        for d in range(2, d_max + 1)
        if constructible(d, k)
    ]

    def worker(cell):
        k, d = cell
        if d ** k > max_strategies:
            return {"k": k, "d": d, "skipped": "capacity"}
        meas = mub_measurements(d, k)
        sol = steering_robustness(
            make_assemblage(maximally_entangled(d), meas), solver=solver
        )
        return {"k": k, "d": d, "value": sol.value, "gap": sol.gap,
                "status": sol.status}

    return _map_cells(worker, cells, jobs)


def table3_data(k: int, max_strategies: int = 4000, d_max: int = 9,
                solver=None, jobs: int = 1):
    """Noise thresholds for all reachable (d, n) cells at a given k."""
    cells = []
    for d in range(2, d_max + 1):
        if not constructible(d, k):
            continue
        if d ** k > max_strategies:
            cells.append((d, None))
        else:
            cells.extend((d, n) for n in range(2, d))

    def worker(cell):
        d, n = cell
        if n is None:
            return {"k": k, "d": d, "skipped": "capacity"}
        res = noise_threshold(d, k, n, solver=solver)
        return {"k": k, "d": d, "n": n, "v_star": res.v_star,
                "method": res.method,
                "residual": res.line_fit.get("residual")}

    return _map_cells(worker, cells, jobs)


def rows_to_csv(rows, columns) -> str:
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(_csv_cell(row.get(c)) for c in columns))
    return "\n".join(lines) + "\n"


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.10g}"
    return str(value)


def rows_to_json(rows) -> str:
    return json.dumps(rows, indent=2, default=float) + "\n"
