"""Complex Hermitian linear algebra kernel.

Dense-only; problem dimensions in this package never exceed a few hundred.
All functions are pure and all values immutable after construction.
"""

from __future__ import annotations

import numpy as np

from .errors import NotPsdError, ShapeError, SolverFailure

# Tolerance separating solver noise from genuine violations at desk scale.
PSD_FEASIBILITY_TOL = 1e-8
# Tolerance for exact algebraic identities evaluated in double precision.
ALGEBRAIC_TOL = 1e-10


class HermMatrix:
    """Dense complex Hermitian matrix.

    The constructor symmetrizes its input, (M + M†)/2, and records the
    pre-symmetrization deviation in ``herm_defect``.  The stored array is
    read-only, so instances are safe to share between threads.
    """

    __slots__ = ("_a", "herm_defect")

    def __init__(self, entries):
        a = np.array(entries, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ShapeError(f"expected a square matrix, got shape {a.shape}")
        self.herm_defect = float(np.abs(a - a.conj().T).max()) if a.size else 0.0
        h = (a + a.conj().T) / 2
        h.setflags(write=False)
        self._a = h

    @classmethod
    def identity(cls, dim: int) -> "HermMatrix":
        return cls(np.eye(dim))

    @classmethod
    def zeros(cls, dim: int) -> "HermMatrix":
        return cls(np.zeros((dim, dim)))

    @property
    def a(self) -> np.ndarray:
        """The underlying (read-only) complex ndarray."""
        return self._a

    @property
    def dim(self) -> int:
        return self._a.shape[0]

    def trace(self) -> float:
        return float(np.trace(self._a).real)

    def __add__(self, other):
        return HermMatrix(self._a + other._a)

    def __sub__(self, other):
        return HermMatrix(self._a - other._a)

    def __mul__(self, scalar):
        return HermMatrix(self._a * float(scalar))

    __rmul__ = __mul__

    def __neg__(self):
        return HermMatrix(-self._a)

    def __repr__(self):
        return f"HermMatrix(dim={self.dim})"


def herm_eig(m: HermMatrix):
    """Eigendecomposition M = V diag(e) V†, eigenvalues ascending."""
    try:
        w, v = np.linalg.eigh(m.a)
    except np.linalg.LinAlgError as exc:
        raise SolverFailure(f"eigendecomposition did not converge: {exc}") from exc
    recon = (v * w) @ v.conj().T
    resid = np.linalg.norm(recon - m.a) / max(np.linalg.norm(m.a), 1.0)
    if resid > 1e-10:
        raise SolverFailure("eigendecomposition residual too large", residual=resid)
    return w, v


def min_eig(m: HermMatrix) -> float:
    """Smallest eigenvalue of a Hermitian matrix."""
    return float(np.linalg.eigvalsh(m.a)[0])


def is_psd(m: HermMatrix, tol: float = PSD_FEASIBILITY_TOL) -> bool:
    return min_eig(m) >= -tol


def psd_sqrt(m: HermMatrix) -> HermMatrix:
    """Positive semidefinite square root.

    Eigenvalues below 1e-10 in magnitude are clamped to zero: this absorbs
    both harmless negative noise and the tiny positive noise whose square
    root would otherwise be amplified to ~1e-8.  Larger negative eigenvalues
    are an error, not silently fixed.
    """
    w, v = herm_eig(m)
    if w[0] < -ALGEBRAIC_TOL:
        raise NotPsdError(
            f"matrix is not PSD: min eigenvalue {w[0]:.3e}", min_eigenvalue=w[0]
        )
    w = np.where(w < ALGEBRAIC_TOL, 0.0, w)
    return HermMatrix((v * np.sqrt(w)) @ v.conj().T)


def kron(a: HermMatrix, b: HermMatrix) -> HermMatrix:
    """Kronecker (tensor) product."""
    return HermMatrix(np.kron(a.a, b.a))


def partial_trace_first(m: HermMatrix, dim_a: int, dim_b: int) -> HermMatrix:
    """Trace out the first tensor factor of a (dim_a * dim_b)-dim operator."""
    if m.dim != dim_a * dim_b:
        raise ShapeError(
            f"matrix dim {m.dim} does not factor as {dim_a} * {dim_b}"
        )
    t = m.a.reshape(dim_a, dim_b, dim_a, dim_b)
    return HermMatrix(np.trace(t, axis1=0, axis2=2))


def real_embed(m: HermMatrix) -> np.ndarray:
    """Real-symmetric embedding [[Re M, -Im M], [Im M, Re M]].

    The embedding is PSD iff M is; every eigenvalue of M appears twice.
    Used to express complex PSD constraints over a real cone.
    """
    re, im = m.a.real, m.a.imag
    return np.block([[re, -im], [im, re]])
