"""States, measurements, and assemblages.

Provides mutually unbiased bases (computational basis first, deterministic
ordering), projective POVMs, maximally entangled and isotropic states, and
the conditional-state assemblages Bob is left with after Alice measures.
"""

from __future__ import annotations

import itertools
from functools import lru_cache

import numpy as np

from .errors import CapabilityError, DomainError, ShapeError, ValidationError
from .linalg import (
    PSD_FEASIBILITY_TOL,
    HermMatrix,
    kron,
    min_eig,
    partial_trace_first,
)

MUB_DIMS = {2, 3, 4, 5, 6, 7, 8, 9}


# ---------------------------------------------------------------------------
# measurement and state containers


class Povm:
    """A positive operator-valued measure: PSD elements summing to identity."""

    def __init__(self, outcomes):
        elements = [
            o if isinstance(o, HermMatrix) else HermMatrix(o) for o in outcomes
        ]
        if not elements:
            raise ValidationError("a POVM needs at least one outcome")
        dim = elements[0].dim
        total = np.zeros((dim, dim), dtype=complex)
        for el in elements:
            if el.dim != dim:
                raise ShapeError("POVM elements must share one dimension")
            if min_eig(el) < -PSD_FEASIBILITY_TOL:
                raise ValidationError(
                    f"POVM element not PSD (min eig {min_eig(el):.3e})"
                )
            total += el.a
        if np.abs(total - np.eye(dim)).max() > PSD_FEASIBILITY_TOL:
            raise ValidationError("POVM elements do not sum to identity")
        self.dim = dim
        self.outcomes = tuple(elements)

    @property
    def n_outcomes(self) -> int:
        return len(self.outcomes)

    def arrays(self):
        return [el.a for el in self.outcomes]


class MeasurementSet:
    """An indexed family of POVMs with uniform dimension and outcome count."""

    def __init__(self, povms):
        povms = list(povms)
        if not povms:
            raise ValidationError("a measurement set needs at least one POVM")
        dim = povms[0].dim
        d = povms[0].n_outcomes
        for p in povms:
            if p.dim != dim or p.n_outcomes != d:
                raise ValidationError(
                    "all POVMs must share dimension and outcome count"
                )
        self.povms = tuple(povms)
        self.dim = dim
        self.n_outcomes = d

    @property
    def k(self) -> int:
        return len(self.povms)

    def element(self, a: int, x: int) -> HermMatrix:
        return self.povms[x].outcomes[a]

    def subset(self, settings) -> "MeasurementSet":
        return MeasurementSet([self.povms[x] for x in settings])


class BipartiteState:
    """Unit-trace PSD state on a dimA x dimB tensor product."""

    def __init__(self, dim_a: int, dim_b: int, matrix):
        m = matrix if isinstance(matrix, HermMatrix) else HermMatrix(matrix)
        if m.dim != dim_a * dim_b:
            raise ShapeError(
                f"state dim {m.dim} does not match {dim_a} x {dim_b}"
            )
        if min_eig(m) < -PSD_FEASIBILITY_TOL:
            raise ValidationError(f"state not PSD (min eig {min_eig(m):.3e})")
        if abs(m.trace() - 1.0) > 1e-10:
            raise ValidationError(f"state trace {m.trace()} != 1")
        self.dim_a = dim_a
        self.dim_b = dim_b
        self.matrix = m


class Assemblage:
    """Subnormalized conditional states sigma_{a|x} on Bob's side.

    ``states[x][a]`` is the state Bob holds when Alice uses setting x and
    gets outcome a.  No-signalling requires every setting to have the same
    total, the reduced state ``rho_b``.
    """

    def __init__(self, states, rho_b=None):
        states = [
            [s if isinstance(s, HermMatrix) else HermMatrix(s) for s in row]
            for row in states
        ]
        if not states or not states[0]:
            raise ValidationError("empty assemblage")
        k, d = len(states), len(states[0])
        dim = states[0][0].dim
        totals = []
        for row in states:
            if len(row) != d:
                raise ValidationError("ragged assemblage")
            tot = np.zeros((dim, dim), dtype=complex)
            for s in row:
                if s.dim != dim:
                    raise ShapeError("assemblage members must share dimension")
                if min_eig(s) < -PSD_FEASIBILITY_TOL:
                    raise ValidationError(
                        f"conditional state not PSD (min eig {min_eig(s):.3e})"
                    )
                tot += s.a
            totals.append(tot)
        if rho_b is None:
            rho_b = HermMatrix(totals[0])
        elif not isinstance(rho_b, HermMatrix):
            rho_b = HermMatrix(rho_b)
        for tot in totals:
            if np.abs(tot - rho_b.a).max() > PSD_FEASIBILITY_TOL:
                raise ValidationError("no-signalling violated: totals differ")
        if abs(rho_b.trace() - 1.0) > PSD_FEASIBILITY_TOL:
            raise ValidationError(f"reduced state trace {rho_b.trace()} != 1")
        self.states = tuple(tuple(row) for row in states)
        self.reduced_state = rho_b
        self.k = k
        self.d = d
        self.dim = dim

    def state(self, a: int, x: int) -> HermMatrix:
        return self.states[x][a]


# ---------------------------------------------------------------------------
# mutually unbiased bases


def _mub_qubit():
    comp = np.eye(2, dtype=complex)
    xb = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
    yb = np.array([[1, 1], [1j, -1j]], dtype=complex) / np.sqrt(2)
    return [comp, xb, yb]


def _mub_odd_prime(d: int):
    # computational basis + the d quadratic-phase bases; valid for odd primes
    w = np.exp(2j * np.pi / d)
    bases = [np.eye(d, dtype=complex)]
    x = np.arange(d)
    for a in range(d):
        cols = [w ** ((a * x * x + b * x) % d) / np.sqrt(d) for b in range(d)]
        bases.append(np.column_stack(cols))
    return bases


def _mub_gf9():
    # GF(9) = GF(3)[t]/(t^2+1); element (a, b) is a + b*t, trace to GF(3) is 2a
    w = np.exp(2j * np.pi / 3)
    els = [(a, b) for a in range(3) for b in range(3)]

    def mul(u, v):
        return ((u[0] * v[0] - u[1] * v[1]) % 3, (u[0] * v[1] + u[1] * v[0]) % 3)

    def tr(u):
        return (2 * u[0]) % 3

    bases = [np.eye(9, dtype=complex)]
    for a in els:
        cols = []
        for b in els:
            col = np.empty(9, dtype=complex)
            for xi, x in enumerate(els):
                y0 = mul(a, mul(x, x))
                y = ((y0[0] + mul(b, x)[0]) % 3, (y0[1] + mul(b, x)[1]) % 3)
                col[xi] = w ** tr(y) / 3.0
            cols.append(col)
        bases.append(np.column_stack(cols))
    return bases


def _gr4_polymul(u, v, f):
    # multiplication in Z4[x]/(f); coefficient vectors, highest degree first
    r = np.polydiv(np.polymul(u, v), f)[1]
    r = np.array([int(round(c)) % 4 for c in r], dtype=int)
    n = len(f) - 1
    return np.pad(r, (n - len(r), 0))[-n:]


def _mub_even_prime_power(n: int):
    # Galois-ring GR(4,n) construction for d = 2^n; field table per degree
    q = 2 ** n
    f = np.array({2: [1, 1, 1], 3: [1, 0, 1, 1]}[n], dtype=int)

    # find a root of unity of order 2^n - 1 (deterministic search order)
    xi = None
    for cand in itertools.product(range(4), repeat=n):
        cand = np.array(cand, dtype=int)
        if not cand.any():
            continue
        p = np.zeros(n, dtype=int)
        p[-1] = 1
        order = None
        for power in range(1, 4 ** n):
            p = _gr4_polymul(p, cand, f)
            if not p[:-1].any():
                order = power if p[-1] == 1 else None
                break
        if order == q - 1:
            xi = cand
            break
    assert xi is not None, "no Teichmuller generator found"

    teich = [np.zeros(n, dtype=int)]
    p = np.zeros(n, dtype=int)
    p[-1] = 1
    for _ in range(q - 1):
        teich.append(p.copy())
        p = _gr4_polymul(p, xi, f)

    def two_adic(e):
        # unique e = a + 2b with a, b in the Teichmuller set
        for a in teich:
            for b in teich:
                if np.array_equal((a + 2 * b) % 4, e % 4):
                    return a, b
        raise AssertionError("2-adic decomposition failed")

    def frobenius(e):
        a, b = two_adic(e)
        return (_gr4_polymul(a, a, f) + 2 * _gr4_polymul(b, b, f)) % 4

    def trace(e):
        t = np.zeros(n, dtype=int)
        cur = e % 4
        for _ in range(n):
            t = (t + cur) % 4
            cur = frobenius(cur)
        assert not t[:-1].any()
        return int(t[-1])

    bases = [np.eye(q, dtype=complex)]
    for a in teich:
        cols = []
        for b in teich:
            col = np.empty(q, dtype=complex)
            for xi_idx, x in enumerate(teich):
                y = _gr4_polymul((a + 2 * b) % 4, x, f)
                col[xi_idx] = 1j ** trace(y) / np.sqrt(q)
            cols.append(col)
        bases.append(np.column_stack(cols))
    return bases


@lru_cache(maxsize=None)
def _mub_full(d: int):
    if d == 2:
        return tuple(_mub_qubit())
    if d in (3, 5, 7):
        return tuple(_mub_odd_prime(d))
    if d in (4, 8):
        return tuple(_mub_even_prime_power({4: 2, 8: 3}[d]))
    if d == 9:
        return tuple(_mub_gf9())
    if d == 6:
        # tensor products of the d=2 and d=3 constructions: 3 bases only
        b2, b3 = _mub_full(2), _mub_full(3)
        return tuple(np.kron(b2[j], b3[j]) for j in range(3))
    raise CapabilityError(f"no MUB construction available for d={d}")


def mub_bases(d: int, k: int):
    """First k mutually unbiased bases in dimension d, computational first.

    Each basis is a d x d unitary whose columns are the basis vectors.
    Supported: d in {2,3,4,5,7,8,9} with k <= d+1, and d=6 with k <= 3.
    """
    if k < 1:
        raise CapabilityError("k must be at least 1")
    if d not in MUB_DIMS:
        raise CapabilityError(f"no MUB construction available for d={d}")
    full = _mub_full(d)
    if k > len(full):
        if d == 6:
            raise CapabilityError("only 3 MUBs constructible for d=6")
        raise CapabilityError(f"at most {len(full)} MUBs constructible for d={d}")
    return [b.copy() for b in full[:k]]


def povm_from_basis(basis) -> Povm:
    """Rank-one projective measurement onto an orthonormal basis."""
    b = np.asarray(basis, dtype=complex)
    if b.ndim != 2 or b.shape[0] != b.shape[1]:
        raise ShapeError(f"basis must be a square matrix of columns, got {b.shape}")
    d = b.shape[0]
    if np.abs(b.conj().T @ b - np.eye(d)).max() > 1e-10:
        raise ValidationError("basis is not orthonormal")
    return Povm([np.outer(b[:, i], b[:, i].conj()) for i in range(d)])


def mub_measurements(d: int, k: int) -> MeasurementSet:
    """Projective measurements onto the first k MUBs in dimension d."""
    return MeasurementSet([povm_from_basis(b) for b in mub_bases(d, k)])


# ---------------------------------------------------------------------------
# states


def maximally_entangled(d: int) -> BipartiteState:
    """|phi_d> = sum_i |ii> / sqrt(d) as a density operator."""
    phi = np.zeros(d * d, dtype=complex)
    for i in range(d):
        phi[i * d + i] = 1 / np.sqrt(d)
    return BipartiteState(d, d, np.outer(phi, phi.conj()))


def isotropic_state(d: int, v: float) -> BipartiteState:
    """v-weighted mixture of |phi_d><phi_d| with white noise 1/d^2."""
    lo = -1.0 / (d * d - 1)
    if not lo - 1e-12 <= v <= 1 + 1e-12:
        raise DomainError(f"mixing parameter v={v} outside PSD range [{lo}, 1]")
    pure = maximally_entangled(d).matrix.a
    return BipartiteState(d, d, v * pure + (1 - v) * np.eye(d * d) / d ** 2)


def make_assemblage(state: BipartiteState, measurements: MeasurementSet) -> Assemblage:
    """sigma_{a|x} = Tr_A[(A_{a|x} (x) 1_B) rho_AB]."""
    if measurements.dim != state.dim_a:
        raise ShapeError(
            f"measurement dim {measurements.dim} != Alice's dim {state.dim_a}"
        )
    da, db = state.dim_a, state.dim_b
    rho = state.matrix.a
    eye_b = HermMatrix.identity(db)
    rows = []
    for povm in measurements.povms:
        row = []
        for el in povm.outcomes:
            op = kron(el, eye_b).a @ rho
            row.append(HermMatrix(op.reshape(da, db, da, db).trace(axis1=0, axis2=2)))
        rows.append(row)
    rho_b = partial_trace_first(state.matrix, da, db)
    return Assemblage(rows, rho_b)


def transpose_measurements(measurements: MeasurementSet) -> MeasurementSet:
    """Element-wise transpose in the computational basis (Bob's usual choice)."""
    return MeasurementSet(
        [Povm([el.a.T for el in p.outcomes]) for p in measurements.povms]
    )


# ---------------------------------------------------------------------------
# JSON serialization (complex entries as [re, im] pairs)


def _matrix_to_json(m: np.ndarray):
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def _matrix_from_json(rows) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in rows])


def povm_to_json(p: Povm) -> dict:
    return {
        "type": "povm",
        "dim": p.dim,
        "outcomes": [_matrix_to_json(el.a) for el in p.outcomes],
    }


def povm_from_json(obj: dict) -> Povm:
    return Povm([_matrix_from_json(m) for m in obj["outcomes"]])


def measurement_set_to_json(ms: MeasurementSet) -> dict:
    return {
        "type": "measurement_set",
        "dim": ms.dim,
        "settings": ms.k,
        "povms": [povm_to_json(p)["outcomes"] for p in ms.povms],
    }


def measurement_set_from_json(obj: dict) -> MeasurementSet:
    return MeasurementSet(
        [Povm([_matrix_from_json(m) for m in povm]) for povm in obj["povms"]]
    )


def assemblage_to_json(asm: Assemblage) -> dict:
    return {
        "type": "assemblage",
        "k": asm.k,
        "d": asm.d,
        "dim": asm.dim,
        "states": [[_matrix_to_json(s.a) for s in row] for row in asm.states],
        "reduced_state": _matrix_to_json(asm.reduced_state.a),
    }


def assemblage_from_json(obj: dict) -> Assemblage:
    states = [[_matrix_from_json(s) for s in row] for row in obj["states"]]
    return Assemblage(states, _matrix_from_json(obj["reduced_state"]))
