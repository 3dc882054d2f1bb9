"""Closed-form lower bounds on the worst-case incompatibility of k
measurements in dimension n, and their conversion to steering-robustness
ceilings for n-preparable assemblages (sr = 1/eta - 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError

# exact worst-case value for three measurements on a qubit
QUBIT_TRIPLET_ETA = 0.5 * (1 + 1 / math.sqrt(3))

# tie-break priority when several bounds coincide (lower wins)
_SOURCE_PRIORITY = {
    "pair_exact": 0,
    "qubit_triplet_exact": 1,
    "recursive": 2,
    "cloning": 3,
}


@dataclass(frozen=True)
class BoundValue:
    k: int
    n: int
    eta_lower: float
    source: str
    sr_ceiling: float


def h_pair(n: int) -> float:
    """Exact worst-case incompatibility of a pair in dimension n."""
    if n < 1:
        raise DomainError(f"dimension n={n} must be at least 1")
    return 0.5 * (1 + 1 / math.sqrt(n))


def h_cloning(k: int, n: int) -> float:
    """Cloning-machine lower bound for k measurements in dimension n."""
    if k < 1 or n < 1:
        raise DomainError(f"need k >= 1 and n >= 1, got k={k}, n={n}")
    return (1 + 2 * (k - 1) / (n + 1)) / k


def h_recursive(k: int, n: int) -> float:
    """Recursive pairing lower bound; reduces to h_pair at k = 2."""
    if k < 2 or n < 1:
        raise DomainError(f"need k >= 2 and n >= 1, got k={k}, n={n}")
    r = int(math.floor(math.log2(k)))
    h = h_pair(n)
    return h ** r * (1 - 2 * (1 - h) * (1 - 2 ** r / k))


def h_best(k: int, n: int) -> BoundValue:
    """Best available lower bound, with the winning formula recorded.

    Candidates: the exact pair value (k = 2), the exact qubit-triplet value
    (k = 3, n = 2), the recursive construction, and the cloning machine.
    Ties go to the more fundamental source.
    """
    if k < 2 or n < 1:
        raise DomainError(f"need k >= 2 and n >= 1, got k={k}, n={n}")
    candidates = []
    if k == 2:
        candidates.append(("pair_exact", h_pair(n)))
    if k == 3 and n == 2:
        candidates.append(("qubit_triplet_exact", QUBIT_TRIPLET_ETA))
    candidates.append(("recursive", h_recursive(k, n)))
    candidates.append(("cloning", h_cloning(k, n)))
    source, eta = max(
        candidates, key=lambda c: (c[1], -_SOURCE_PRIORITY[c[0]])
    )
    return BoundValue(
        k=k, n=n, eta_lower=eta, source=source, sr_ceiling=1 / eta - 1
    )


def sr_ceiling(k: int, n: int) -> float:
    """Largest steering robustness an n-preparable assemblage can reach."""
    return h_best(k, n).sr_ceiling


def table1(k_max: int = 8, n_max: int = 6):
    """Grid of best ceilings for k = 2..k_max, n = 1..n_max."""
    if k_max > 32 or n_max > 32:
        raise DomainError("table limited to k_max, n_max <= 32")
    return [
        [h_best(k, n) for n in range(1, n_max + 1)] for k in range(2, k_max + 1)
    ]


def render_cell(value: float, decimals: int = 4) -> str:
    """4-decimal cell rendering, shortened when the value is exact.

    Values that are exactly a short decimal drop the padding (0.6000 -> 0.6,
    1.0000 -> 1); everything else keeps all 4 places (0.3820 stays 0.3820).
    """
    s = f"{value:.{decimals}f}"
    if abs(value - round(value, decimals)) < 1e-12 and "." in s:
        s = s.rstrip("0").rstrip(".")
    return s if s else "0"


def table1_csv(k_max: int = 8, n_max: int = 6) -> str:
    """CSV rendering with one row per cell and the winning source annotated."""
    lines = ["k,n,eta_lower,sr_ceiling,source"]
    for row in table1(k_max, n_max):
        for b in row:
            lines.append(
                f"{b.k},{b.n},{b.eta_lower:.12f},"
                f"{render_cell(b.sr_ceiling)},{b.source}"
            )
    return "\n".join(lines) + "\n"


def crossover_k(n: int) -> int:
    """Largest k (up to 64) where the recursive bound beats cloning."""
    if n < 2:
        raise DomainError(f"dimension n={n} must be at least 2")
    best = 2
    for k in range(2, 65):
        if h_recursive(k, n) > h_cloning(k, n):
            best = k
    return best
