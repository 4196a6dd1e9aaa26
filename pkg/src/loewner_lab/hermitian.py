"""Dense Hermitian matrices: arithmetic, eigendecomposition, functional
calculus, and comparison in the positive-semidefinite (Loewner) order.

Everything downstream builds on this module.  Matrices are immutable value
objects; eigendecompositions are cached on the instance, so applying several
scalar functions to the same matrix costs one decomposition.

The eigensolver is a cyclic Jacobi iteration for complex Hermitian input.
It converges when the off-diagonal Frobenius norm drops below
``JACOBI_CONV_TOL`` times the input norm, within a fixed sweep budget.
Self-contained and highly accurate at the dimensions this package targets
(1 to 16); not tuned for anything larger.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, DomainViolation, NonConvergence, NotHermitian

# Construction-time symmetrization rejects asymmetry above this, relative to ||A||_F.
HERMITIAN_ASYM_TOL = 1e-12
# Jacobi convergence: off-diagonal Frobenius norm <= JACOBI_CONV_TOL * ||A||_F.
JACOBI_CONV_TOL = 1e-13
JACOBI_SWEEP_BUDGET = 64
# Eigenvalues within DOMAIN_CLAMP_TOL * ||A||_F of a closed domain boundary are
# clamped onto it before a scalar function is applied.
DOMAIN_CLAMP_TOL = 1e-12
# Default relative tolerance for PSD verdicts.
DEFAULT_PSD_TOL = 1e-9
# Two expressions count as equal when they differ by less than this, relative
# to max(1, |lhs|, |rhs|) in the appropriate norm.
EQUALITY_TOL = 1e-10


class Relation(enum.Enum):
    LESS_OR_EQUAL = "less-or-equal"
    GREATER_OR_EQUAL = "greater-or-equal"
    EQUAL = "equal"
    INCOMPARABLE = "incomparable"


class HermitianMatrix:
    """Immutable dense complex Hermitian matrix.

    Entries are symmetrized as (A + A*)/2 on construction.  ``strict=True``
    additionally rejects input whose asymmetry exceeds
    ``HERMITIAN_ASYM_TOL * ||A||_F``; use it for data read from files, where
    silent symmetrization would mask genuinely non-Hermitian input.
    """

    __slots__ = ("_entries", "_fro", "_eig", "_eigvals")

    def __init__(self, entries, *, strict: bool = False):
        arr = np.asarray(entries, dtype=np.complex128)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise DimensionMismatch(f"expected a square matrix, got shape {arr.shape}")
        if arr.shape[0] < 1:
            raise DimensionMismatch("dimension must be >= 1")
        if strict:
            fro = float(np.linalg.norm(arr))
            asym = float(np.linalg.norm(arr - arr.conj().T))
            if asym > HERMITIAN_ASYM_TOL * max(fro, 1e-300):
                raise NotHermitian(
                    f"asymmetry {asym:.3e} exceeds {HERMITIAN_ASYM_TOL:.0e} * ||A||_F"
                )
        herm = (arr + arr.conj().T) / 2.0
        herm.setflags(write=False)
        self._entries = herm
        self._fro = float(np.linalg.norm(herm))
        self._eig = None
        self._eigvals = None

    @property
    def dim(self) -> int:
        return self._entries.shape[0]

    @property
    def entries(self) -> np.ndarray:
        return self._entries

    @property
    def fro_norm(self) -> float:
        return self._fro

    # -- arithmetic (always re-wraps, so results stay Hermitian) -----------

    def __add__(self, other: "HermitianMatrix") -> "HermitianMatrix":
        self._check_dim(other)
        return HermitianMatrix(self._entries + other._entries)

    def __sub__(self, other: "HermitianMatrix") -> "HermitianMatrix":
        self._check_dim(other)
        return HermitianMatrix(self._entries - other._entries)

    def __mul__(self, scalar: float) -> "HermitianMatrix":
        return HermitianMatrix(self._entries * float(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> "HermitianMatrix":
        return HermitianMatrix(-self._entries)

    def shift(self, c: float) -> "HermitianMatrix":
        """self + c*I."""
        return HermitianMatrix(self._entries + float(c) * np.eye(self.dim))

    def _check_dim(self, other: "HermitianMatrix") -> None:
        if self.dim != other.dim:
            raise DimensionMismatch(f"dimensions differ: {self.dim} vs {other.dim}")

    @classmethod
    def identity(cls, dim: int) -> "HermitianMatrix":
        return cls(np.eye(dim))

    @classmethod
    def zero(cls, dim: int) -> "HermitianMatrix":
        return cls(np.zeros((dim, dim)))

    @classmethod
    def diagonal(cls, values) -> "HermitianMatrix":
        return cls(np.diag(np.asarray(values, dtype=float)))

    # -- file format --------------------------------------------------------

    def to_dict(self) -> dict:
        """JSON-ready object: {"dim", "re", "im"}; "im" dropped when real."""
        out = {"dim": self.dim, "re": [[float(v) for v in row] for row in self._entries.real]}
        if np.any(self._entries.imag != 0.0):
            out["im"] = [[float(v) for v in row] for row in self._entries.imag]
        return out

    @classmethod
    def from_dict(cls, obj: dict) -> "HermitianMatrix":
        if not isinstance(obj, dict) or "dim" not in obj or "re" not in obj:
            raise NotHermitian('matrix object must carry "dim" and "re" keys')
        dim = int(obj["dim"])
        re = np.asarray(obj["re"], dtype=float)
        if re.shape != (dim, dim):
            raise DimensionMismatch(f'"re" must be {dim}x{dim}, got {re.shape}')
        if "im" in obj and obj["im"] is not None:
            im = np.asarray(obj["im"], dtype=float)
            if im.shape != (dim, dim):
                raise DimensionMismatch(f'"im" must be {dim}x{dim}, got {im.shape}')
            arr = re + 1j * im
        else:
            arr = re.astype(np.complex128)
        return cls(arr, strict=True)


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues in ascending order and matching orthonormal column vectors."""

    eigenvalues: np.ndarray
    vectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.eigenvalues) @ self.vectors.conj().T


@dataclass(frozen=True)
class LoewnerVerdict:
    """Outcome of a PSD comparison of B - A.

    ``min_eigenvalue_of_difference`` is reported exactly as computed;
    ``tolerance_used`` is the effective (already scaled) tolerance.
    """

    relation: Relation
    min_eigenvalue_of_difference: float
    max_eigenvalue_of_difference: float
    tolerance_used: float

    @property
    def is_leq(self) -> bool:
        return self.relation in (Relation.LESS_OR_EQUAL, Relation.EQUAL)

    @property
    def is_geq(self) -> bool:
        return self.relation in (Relation.GREATER_OR_EQUAL, Relation.EQUAL)


# ---------------------------------------------------------------------------
# Jacobi eigensolver
# ---------------------------------------------------------------------------


def _jacobi(matrix: np.ndarray, want_vectors: bool):
    """Cyclic Jacobi sweeps on a complex Hermitian matrix.

    Returns (eigenvalues ascending, vectors or None).  Raises NonConvergence
    if the off-diagonal mass has not collapsed within the sweep budget.
    """
    n = matrix.shape[0]
    a = np.array(matrix, dtype=np.complex128, copy=True)
    v = np.eye(n, dtype=np.complex128) if want_vectors else None
    scale = float(np.linalg.norm(a))
    if n == 1 or scale == 0.0:
        lam = np.sort(np.diag(a).real.copy()) if n > 1 else np.array([a[0, 0].real])
        return lam, v
    threshold = JACOBI_CONV_TOL * scale
    # Elements this small cannot push the off-norm back above threshold.
    skip = threshold / (2.0 * n)

    for _ in range(JACOBI_SWEEP_BUDGET):
        off = _off_norm(a)
        if off <= threshold:
            lam = np.diag(a).real.copy()
            order = np.argsort(lam, kind="stable")
            lam = lam[order]
            if want_vectors:
                v = np.ascontiguousarray(v[:, order])
            return lam, v
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                beta = abs(apq)
                if beta <= skip:
                    continue
                phase = apq / beta
                tau = (a[q, q].real - a[p, p].real) / (2.0 * beta)
                if tau >= 0.0:
                    t = 1.0 / (tau + math.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                s_ph = s * phase
                # A <- A U with U acting on columns (p, q).
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - np.conj(s_ph) * col_q
                a[:, q] = s_ph * col_p + c * col_q
                # A <- U* A.
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s_ph * row_q
                a[q, :] = np.conj(s_ph) * row_p + c * row_q
                # Numerical hygiene: the rotation zeroes (p, q) exactly.
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                if want_vectors:
                    vp = v[:, p].copy()
                    vq = v[:, q].copy()
                    v[:, p] = c * vp - np.conj(s_ph) * vq
                    v[:, q] = s_ph * vp + c * vq
    raise NonConvergence(
        f"Jacobi sweeps exhausted ({JACOBI_SWEEP_BUDGET}) at dim {n}; "
        f"off-diagonal norm still above {threshold:.3e}"
    )


def _off_norm(a: np.ndarray) -> float:
    """Frobenius norm of the off-diagonal part, computed directly (a
    difference of squared norms would lose the small values that matter
    for convergence)."""
    off = a.copy()
    np.fill_diagonal(off, 0.0)
    return float(np.linalg.norm(off))


def eigendecompose(matrix: HermitianMatrix) -> EigenDecomposition:
    """Full eigendecomposition, cached on the matrix instance."""
    if matrix._eig is None:
        lam, vec = _jacobi(matrix.entries, want_vectors=True)
        lam.setflags(write=False)
        vec.setflags(write=False)
        matrix._eig = EigenDecomposition(eigenvalues=lam, vectors=vec)
        matrix._eigvals = lam
    return matrix._eig


def eigenvalues_of(matrix: HermitianMatrix) -> np.ndarray:
    """Eigenvalues only (ascending); skips vector tracking when possible."""
    if matrix._eigvals is None:
        lam, _ = _jacobi(matrix.entries, want_vectors=False)
        lam.setflags(write=False)
        matrix._eigvals = lam
    return matrix._eigvals


# ---------------------------------------------------------------------------
# Functional calculus and order comparison
# ---------------------------------------------------------------------------


def apply_scalar_function(matrix: HermitianMatrix, f) -> HermitianMatrix:
    """f(A) by the eigendecomposition route: V diag(f(lambda)) V*.

    Every eigenvalue must lie in f's declared domain; values within
    ``DOMAIN_CLAMP_TOL * ||A||_F`` of a closed boundary are clamped onto it
    first (instance generators intentionally touch boundaries, e.g. A = mI).
    Raises DomainViolation naming the offending eigenvalue otherwise.
    """
    dec = eigendecompose(matrix)
    window = DOMAIN_CLAMP_TOL * matrix.fro_norm
    vals = []
    for lam in dec.eigenvalues:
        t = f.domain.snap(float(lam), window)
        if t is None:
            raise DomainViolation(
                f"eigenvalue {lam!r} outside domain {f.domain} of {f.id}", value=float(lam)
            )
        vals.append(f(t))
    fd = np.asarray(vals, dtype=float)
    out = (dec.vectors * fd) @ dec.vectors.conj().T
    return HermitianMatrix(out)


_POS_PART = None


def positive_part(matrix: HermitianMatrix) -> HermitianMatrix:
    """Functional calculus of t -> max(t, 0); the result is PSD and >= A."""
    global _POS_PART
    if _POS_PART is None:
        from .functions import FunctionDescriptor, Interval

        _POS_PART = FunctionDescriptor(
            id="positive-part",
            domain=Interval.real_line(),
            classes=frozenset({"convex", "non-negative"}),
            eval_fn=lambda t: t if t > 0.0 else 0.0,
        )
    return apply_scalar_function(matrix, _POS_PART)


def spectral_bounds(matrix: HermitianMatrix) -> tuple[float, float]:
    lam = eigenvalues_of(matrix)
    return float(lam[0]), float(lam[-1])


def loewner_leq(a: HermitianMatrix, b: HermitianMatrix, tol: float = DEFAULT_PSD_TOL) -> LoewnerVerdict:
    """Compare A and B in the Loewner order via the spectrum of B - A.

    The effective tolerance is ``tol * max(1, ||A||_F + ||B||_F)``, so chains
    mixing terms of very different magnitude are judged consistently.
    """
    if a.dim != b.dim:
        raise DimensionMismatch(f"dimensions differ: {a.dim} vs {b.dim}")
    if tol < 0:
        raise ValueError("tol must be >= 0")
    diff = b - a
    lam = eigenvalues_of(diff)
    lo, hi = float(lam[0]), float(lam[-1])
    eff = tol * max(1.0, a.fro_norm + b.fro_norm)
    leq = lo >= -eff
    geq = hi <= eff
    if leq and geq:
        rel = Relation.EQUAL
    elif leq:
        rel = Relation.LESS_OR_EQUAL
    elif geq:
        rel = Relation.GREATER_OR_EQUAL
    else:
        rel = Relation.INCOMPARABLE
    return LoewnerVerdict(
        relation=rel,
        min_eigenvalue_of_difference=lo,
        max_eigenvalue_of_difference=hi,
        tolerance_used=eff,
    )
