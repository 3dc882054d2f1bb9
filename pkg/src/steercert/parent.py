"""Explicit parent-measurement constructions.

A parent of a measurement set is a single POVM whose coarse-grainings
dominate each child shrunk by a factor eta.  The pair ansatz is exact for
rank-one children; larger sets are handled by recursively pairing down to a
single parent and symmetrizing over cyclic orderings.
"""

from __future__ import annotations

import itertools

import numpy as np

from .bounds import h_pair, h_recursive
from .errors import InternalConsistencyError, ShapeError, ValidationError
from .linalg import PSD_FEASIBILITY_TOL, HermMatrix, psd_sqrt
from .quantum import MeasurementSet, Povm, _matrix_to_json

MARGINAL_SLACK_TOL = 1e-7


class ParentMeasurement:
    """POVM over a multi-outcome grid covering a measurement set.

    ``outcome_labels[i]`` is a length-k tuple giving, for each child setting
    x, the outcome that element i reports for it.  Construction verifies the
    POVM laws and the shrunk-marginal inequality at ``eta_guarantee``.
    """

    def __init__(self, outcome_labels, elements, eta_guarantee: float,
                 children: MeasurementSet):
        elements = [
            e if isinstance(e, HermMatrix) else HermMatrix(e) for e in elements
        ]
        if len(outcome_labels) != len(elements):
            raise ShapeError("labels and elements must align")
        dim = elements[0].dim
        total = np.zeros((dim, dim), dtype=complex)
        for e in elements:
            if e.dim != dim:
                raise ShapeError("parent elements must share one dimension")
            if np.linalg.eigvalsh(e.a).min() < -PSD_FEASIBILITY_TOL:
                raise ValidationError("parent element not PSD")
            total += e.a
        if np.abs(total - np.eye(dim)).max() > PSD_FEASIBILITY_TOL:
            raise ValidationError("parent elements do not sum to identity")
        self.outcome_labels = [tuple(l) for l in outcome_labels]
        self.elements = elements
        self.eta_guarantee = float(eta_guarantee)
        self.children = children
        ok, worst = verify_parent(self, children, self.eta_guarantee)
        if not ok:
            raise ValidationError(
                f"parent fails its marginal guarantee: worst slack {worst:.3e}"
            )

    def marginal(self, a: int, x: int) -> HermMatrix:
        acc = HermMatrix.zeros(self.elements[0].dim)
        for label, el in zip(self.outcome_labels, self.elements):
            if label[x] == a:
                acc = acc + el
        return acc

    def to_json(self) -> dict:
        return {
            "type": "parent_measurement",
            "eta_guarantee": self.eta_guarantee,
            "outcome_labels": [list(l) for l in self.outcome_labels],
            "elements": [_matrix_to_json(e.a) for e in self.elements],
        }


def verify_parent(parent, measurements: MeasurementSet, eta: float):
    """Check the POVM laws and all shrunk-marginal constraints.

    Returns (verdict, worst_slack) where worst_slack is the most negative
    eigenvalue across element positivity, the identity-sum deviation and
    the marginal inequalities; verdict passes at -1e-7.
    """
    elements = [e.a if isinstance(e, HermMatrix) else e for e in parent.elements]
    labels = parent.outcome_labels
    dim = elements[0].shape[0]
    worst = min(float(np.linalg.eigvalsh(e).min()) for e in elements)
    total = sum(elements)
    worst = min(worst, -float(np.abs(total - np.eye(dim)).max()))
    for x in range(measurements.k):
        child = measurements.povms[x]
        for a in range(child.n_outcomes):
            marg = sum(
                (el for label, el in zip(labels, elements) if label[x] == a),
                np.zeros((dim, dim), dtype=complex),
            )
            slack = float(
                np.linalg.eigvalsh(marg - eta * child.outcomes[a].a).min()
            )
            worst = min(worst, slack)
    return worst >= -MARGINAL_SLACK_TOL, worst


def _is_rank_one(el: HermMatrix) -> bool:
    w = np.linalg.eigvalsh(el.a)
    return w[:-1].max(initial=0.0) <= PSD_FEASIBILITY_TOL


def _pair_ansatz(a_ops, b_ops, n: int):
    """Unnormalized pair-parent elements for PSD children of dimension n.

    Symmetric combination of the anticommutator, trace-weighted linear
    terms, and the two conjugated products; exact for rank-one children.
    """
    sa = [psd_sqrt(HermMatrix(a)).a for a in a_ops]
    sb = [psd_sqrt(HermMatrix(b)).a for b in b_ops]
    rt = np.sqrt(n)
    out = {}
    for a, aa in enumerate(a_ops):
        for b, bb in enumerate(b_ops):
            anti = aa @ bb + bb @ aa
            lin = (np.trace(bb).real * aa + np.trace(aa).real * bb) / (2 * rt)
            conj = (sa[a] @ bb @ sa[a] + sb[b] @ aa @ sb[b]) * rt / 2
            out[(a, b)] = anti + lin + conj
    return out


def parent_pair_rank1(a: Povm, b: Povm) -> ParentMeasurement:
    """Explicit parent of two rank-one POVMs, guaranteed at h_pair(n).

    For rank-one children the unnormalized elements sum to (2 + 2 sqrt(n))
    times the identity; that identity is verified before normalizing and a
    failure beyond 1e-8 aborts the construction.
    """
    if a.dim != b.dim:
        raise ShapeError("children must share one dimension")
    n = a.dim
    for p in (a, b):
        for el in p.outcomes:
            if not _is_rank_one(el):
                raise ValidationError(
                    "pair construction requires rank-one POVM elements"
                )
    raw = _pair_ansatz([e.a for e in a.outcomes], [e.a for e in b.outcomes], n)
    norm = 2 + 2 * np.sqrt(n)
    total = sum(raw.values())
    defect = float(np.abs(total - norm * np.eye(n)).max())
    if defect > PSD_FEASIBILITY_TOL * norm:
        raise InternalConsistencyError(
            f"pair-parent normalization identity failed: deviation {defect:.3e}"
        )
    labels = sorted(raw.keys())
    return ParentMeasurement(
        labels,
        [raw[l] / norm for l in labels],
        h_pair(n),
        MeasurementSet([a, b]),
    )


def operator_inequality_check(a: Povm, b: Povm) -> float:
    """Worst slack of sum_b B_b^{1/2} A_a B_b^{1/2} >= A_a / n over a."""
    if a.dim != b.dim:
        raise ShapeError("children must share one dimension")
    n = a.dim
    sb = [psd_sqrt(el).a for el in b.outcomes]
    worst = np.inf
    for el in a.outcomes:
        lhs = sum(s @ el.a @ s for s in sb)
        worst = min(worst, float(np.linalg.eigvalsh(lhs - el.a / n).min()))
    return worst


def _merge(a_grid: dict, b_grid: dict, n: int) -> dict:
    """Pair two intermediate measurements; labels concatenate."""
    keys_a, keys_b = sorted(a_grid), sorted(b_grid)
    raw = _pair_ansatz([a_grid[k] for k in keys_a], [b_grid[k] for k in keys_b], n)
    norm = 2 + 2 * np.sqrt(n)
    return {
        keys_a[i] + keys_b[j]: op / norm for (i, j), op in raw.items()
    }


def _reduce_once(work, n: int):
    """One recursion level: pair off 2l extras (k = 2^r + l), else halve."""
    k = len(work)
    r = 1
    while 2 ** (r + 1) <= k:
        r += 1
    l = k - 2 ** r
    if l > 0:
        out = [_merge(work[2 * j], work[2 * j + 1], n) for j in range(l)]
        out.extend(work[2 * l:])
    else:
        out = [_merge(work[2 * j], work[2 * j + 1], n) for j in range(k // 2)]
    return out


def parent_recursive(measurements: MeasurementSet) -> ParentMeasurement:
    """Symmetrized recursive parent of k rank-one measurements.

    Builds one pairing tree per cyclic shift of the setting order, flattens
    each tree onto the full outcome grid, and averages the k terms.  The
    guarantee is h_recursive(k, n); the average is validated numerically at
    construction, so a silent shortfall is impossible.  The individual
    (pre-average) terms are kept in ``terms`` for inspection.
    """
    k, n, d = measurements.k, measurements.dim, measurements.n_outcomes
    if k < 2:
        raise ValidationError("recursion needs at least two measurements")
    for p in measurements.povms:
        for el in p.outcomes:
            if not _is_rank_one(el):
                raise ValidationError(
                    "recursive construction requires rank-one children"
                )
    if k == 2:
        parent = parent_pair_rank1(*measurements.povms)
        parent.terms = [dict(zip(parent.outcome_labels,
                                 (e.a for e in parent.elements)))]
        return parent
    meas = [p.arrays() for p in measurements.povms]
    terms = []
    for shift in range(k):
        work = []
        for x in range(k):
            xi = (shift + x) % k
            work.append(
                {((xi, a),): op for a, op in enumerate(meas[xi])}
            )
        while len(work) > 1:
            work = _reduce_once(work, n)
        # flatten the nested label to a full outcome assignment
        flat = {}
        for label, op in work[0].items():
            assign = dict(label)
            flat[tuple(assign[x] for x in range(k))] = op
        terms.append(flat)
    labels = list(itertools.product(range(d), repeat=k))
    avg = [sum(t[j] for t in terms) / k for j in labels]
    parent = ParentMeasurement(
        labels, avg, h_recursive(k, n), measurements
    )
    parent.terms = terms
    return parent
