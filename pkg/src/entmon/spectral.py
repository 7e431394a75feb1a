"""Hermitian linear algebra, entropy functionals and diagonalizing charts.

Matrices are plain complex ``numpy`` arrays. :func:`hermitian` is the single
ingestion point that checks and symmetrizes them; :class:`DensityState` adds
the trace/positivity contract on top.

Real coordinates on the space of Hermitian ``d x d`` matrices use a fixed
order: the ``d`` diagonal entries, then the real parts of the strict lower
triangle (row-major), then the imaginary parts of the strict lower triangle
(same order). See :func:`to_real_coords`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import DomainError, ValidationError

HERMITIAN_TOL = 1e-14
TRACE_TOL = 1e-12
DEGENERACY_TOL = 1e-10
ZERO_EIGENVALUE = 1e-15
RANK_RTOL = 1e-8
FULL_RANK_COND = 1e8


def hermitian(m, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Validate ``m`` as a Hermitian matrix and return a symmetrized copy.

    The asymmetry ``max |m - m^H|`` must not exceed ``tol * max(1, max|m|)``.
    """
    a = np.array(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise ValidationError(f"expected a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError("matrix has non-finite entries")
    scale = max(1.0, float(np.max(np.abs(a))))
    if np.max(np.abs(a - a.conj().T)) > tol * scale:
        raise ValidationError("matrix is not Hermitian")
    return (a + a.conj().T) / 2


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def numerical_rank(m: np.ndarray, rtol: float = RANK_RTOL) -> int:
    """Number of singular values above ``rtol`` times the largest one."""
    s = np.linalg.svd(np.atleast_2d(m), compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > rtol * s[0]))


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary from the QR decomposition of a Ginibre matrix."""
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * phases


def random_traceless_hermitian(d: int, rng: np.random.Generator) -> np.ndarray:
    a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    a = (a + a.conj().T) / 2
    return a - np.trace(a).real / d * np.eye(d)


# -- spectra -----------------------------------------------------------------


@dataclass(frozen=True)
class Spectrum:
    """Ascending eigenvalues and the matching orthonormal eigenvectors.

    ``eigenvectors[:, i]`` belongs to ``eigenvalues[i]``. Each eigenvector's
    phase is fixed so that its largest-magnitude entry is real and positive,
    which makes the decomposition deterministic for non-degenerate input.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T

    def min_gap(self) -> float:
        if self.eigenvalues.size < 2:
            return math.inf
        return float(np.min(np.diff(self.eigenvalues)))

    def is_nondegenerate(self, tol: float = DEGENERACY_TOL) -> bool:
        scale = max(1.0, float(np.max(np.abs(self.eigenvalues))))
        return self.min_gap() > tol * scale

    def apply(self, fn) -> np.ndarray:
        """Matrix function ``V diag(fn(eigenvalues)) V^H``."""
        v = self.eigenvectors
        return (v * fn(self.eigenvalues)) @ v.conj().T


def eigendecompose(m) -> Spectrum:
    a = hermitian(m)
    vals, vecs = np.linalg.eigh(a)
    idx = np.argmax(np.abs(vecs), axis=0)
    pivots = vecs[idx, np.arange(vecs.shape[1])]
    vecs = vecs * (np.abs(pivots) / pivots)
    vals.setflags(write=False)
    vecs.setflags(write=False)
    return Spectrum(vals, vecs)


# -- density states ----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DensityState:
    """Unit-trace positive semidefinite Hermitian matrix.

    Construction only enforces the density-matrix contract. Positive
    definiteness and a non-degenerate spectrum (membership in the open set
    of generic states) are checked by the operations that need them.
    """

    matrix: np.ndarray

    def __post_init__(self):
        a = hermitian(self.matrix)
        a.setflags(write=False)
        object.__setattr__(self, "matrix", a)
        tr = np.trace(a).real
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValidationError(f"trace is {tr!r}, expected 1")
        if self.spectrum.eigenvalues[0] < -TRACE_TOL:
            raise ValidationError("matrix is not positive semidefinite")

    @classmethod
    def from_spectrum(cls, eigenvalues: Sequence[float], basis: np.ndarray | None = None) -> DensityState:
        lam = np.asarray(eigenvalues, dtype=float)
        if basis is None:
            return cls(np.diag(lam).astype(complex))
        return cls((basis * lam) @ basis.conj().T)

    @classmethod
    def maximally_mixed(cls, d: int) -> DensityState:
        return cls(np.eye(d, dtype=complex) / d)

    @classmethod
    def from_json(cls, obj: dict) -> DensityState:
        """Parse ``{"dim", "re", "im"}`` or ``{"spectrum": ["1/2", ...]}``."""
        if "spectrum" in obj:
            try:
                vals = [float(Fraction(str(s))) for s in obj["spectrum"]]
            except (ValueError, ZeroDivisionError) as exc:
                raise ValidationError(f"bad spectrum entry: {exc}") from None
            return cls.from_spectrum(vals)
        try:
            d = int(obj["dim"])
            re = np.asarray(obj["re"], dtype=float)
            im = np.asarray(obj.get("im", np.zeros((d, d))), dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"bad matrix JSON: {exc}") from None
        if re.shape != (d, d) or im.shape != (d, d):
            raise ValidationError(f"matrix JSON does not match dim={d}")
        return cls(re + 1j * im)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @cached_property
    def spectrum(self) -> Spectrum:
        return eigendecompose(self.matrix)

    @property
    def is_positive_definite(self) -> bool:
        return bool(self.spectrum.eigenvalues[0] > ZERO_EIGENVALUE)

    def require_positive_definite(self, what: str = "operation") -> None:
        if not self.is_positive_definite:
            raise DomainError(f"{what} requires a positive definite state")

    def require_nondegenerate(self, tol: float = DEGENERACY_TOL) -> None:
        if not self.spectrum.is_nondegenerate(tol):
            raise DomainError(
                f"spectrum is degenerate (min gap {self.spectrum.min_gap():.3g} <= {tol:g})"
            )


def as_state(rho) -> DensityState:
    return rho if isinstance(rho, DensityState) else DensityState(rho)


# -- entropy functionals -----------------------------------------------------


def von_neumann_entropy(rho, base: float = math.e) -> float:
    """``-tr(rho log_base rho)``, with ``0 log 0 = 0``."""
    if not base > 1:
        raise ValidationError(f"logarithm base must exceed 1, got {base!r}")
    lam = as_state(rho).spectrum.eigenvalues
    lam = lam[lam > ZERO_EIGENVALUE]
    return float(-np.sum(lam * np.log(lam)) / math.log(base))


def matrix_log(rho) -> np.ndarray:
    """Natural matrix logarithm of a positive definite state."""
    state = as_state(rho)
    state.require_positive_definite("matrix logarithm")
    return state.spectrum.apply(np.log)


def entropy_gradient(rho) -> np.ndarray:
    """Gradient ``-1 - ln(rho)`` of the entropy w.r.t. the trace pairing."""
    state = as_state(rho)
    state.require_positive_definite("entropy gradient")
    return state.spectrum.apply(lambda lam: -1.0 - np.log(lam))


def _support_contained(rho: DensityState, sigma: DensityState) -> bool:
    s_vals = sigma.spectrum.eigenvalues
    rng = sigma.spectrum.eigenvectors[:, s_vals > 1e-12]
    r_vals = rho.spectrum.eigenvalues
    for i in np.flatnonzero(r_vals > 1e-12):
        phi = rho.spectrum.eigenvectors[:, i]
        if np.sum(np.abs(rng.conj().T @ phi) ** 2) < 1 - 1e-10:
            return False
    return True


def relative_entropy(rho, sigma) -> float:
    """``tr(rho ln rho) - tr(rho ln sigma)``; ``inf`` unless supp(rho) is in supp(sigma)."""
    rho, sigma = as_state(rho), as_state(sigma)
    if rho.dim != sigma.dim:
        raise ValidationError("states have different dimensions")
    if not _support_contained(rho, sigma):
        return math.inf
    s_vals = sigma.spectrum.eigenvalues
    log_s = np.where(s_vals > 1e-12, np.log(np.clip(s_vals, 1e-300, None)), 0.0)
    ln_sigma = (sigma.spectrum.eigenvectors * log_s) @ sigma.spectrum.eigenvectors.conj().T
    cross = float(np.trace(rho.matrix @ ln_sigma).real)
    return -von_neumann_entropy(rho) - cross


def purity(rho) -> float:
    a = as_state(rho).matrix
    return float(np.real(np.vdot(a, a)))


# -- real coordinates and charts ---------------------------------------------


def _lower_pairs(d: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(d) for j in range(i)]


def coordinate_basis(d: int) -> list[np.ndarray]:
    """Partial derivatives of the coordinate map ``x -> X`` (``d*d`` matrices)."""
    basis = []
    for i in range(d):
        e = np.zeros((d, d), dtype=complex)
        e[i, i] = 1
        basis.append(e)
    for i, j in _lower_pairs(d):
        e = np.zeros((d, d), dtype=complex)
        e[i, j] = e[j, i] = 1
        basis.append(e)
    for i, j in _lower_pairs(d):
        e = np.zeros((d, d), dtype=complex)
        e[i, j] = 1j
        e[j, i] = -1j
        basis.append(e)
    return basis


def to_real_coords(m) -> np.ndarray:
    a = hermitian(m)
    pairs = _lower_pairs(a.shape[0])
    diag = np.diag(a).real
    re = np.array([a[i, j].real for i, j in pairs])
    im = np.array([a[i, j].imag for i, j in pairs])
    return np.concatenate([diag, re, im])


def from_real_coords(x: Sequence[float], d: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (d * d,):
        raise ValidationError(f"expected {d * d} coordinates, got {x.shape}")
    return sum(c * b for c, b in zip(x, coordinate_basis(d)))


def hs_orthonormal_basis(d: int) -> list[np.ndarray]:
    """Basis of Hermitian matrices orthonormal for ``<A, B> = tr(A B)``."""
    r2 = math.sqrt(2)
    basis = coordinate_basis(d)
    return basis[:d] + [b / r2 for b in basis[d:]]


def eigenvalue_derivative_block(rho) -> np.ndarray:
    """``d x d^2`` matrix of eigenvalue derivatives w.r.t. the real coordinates.

    Row ``i`` is ``A -> <phi_i|A|phi_i>`` evaluated on each coordinate direction.
    """
    state = as_state(rho)
    v = state.spectrum.eigenvectors
    d = state.dim
    block = np.empty((d, d * d))
    for k, b in enumerate(coordinate_basis(d)):
        block[:, k] = np.real(np.einsum("ji,jk,ki->i", v.conj(), b, v))
    return block


@dataclass(frozen=True)
class ChartReport:
    """Outcome of :func:`build_chart`.

    ``selected_rows`` indexes rows of the stacked Jacobian ``[C; I]`` that
    survive the row selection: the ``d`` eigenvalue rows ``0..d-1`` and the
    identity rows ``d + k`` for every coordinate ``k`` not in
    ``deleted_coordinates``.
    """

    selected_rows: list[int]
    deleted_coordinates: list[int]
    jacobian_condition: float
    full_rank: bool
    eigenvalue_block_rank: int


def build_chart(rho, tol: float = DEGENERACY_TOL) -> ChartReport:
    """Eigenvalue chart Jacobian with greedy, condition-driven row deletion."""
    state = as_state(rho)
    state.require_nondegenerate(tol)
    d = state.dim
    n = d * d
    block = eigenvalue_derivative_block(state)

    # Deleting identity row k leaves column k of C as the only entry in that
    # column, so J is well conditioned iff C restricted to the deleted
    # columns is. Pick them greedily by the smallest singular value.
    deleted: list[int] = []
    for _ in range(d):
        best, best_score = -1, -1.0
        for k in range(n):
            if k in deleted:
                continue
            s = np.linalg.svd(block[:, deleted + [k]], compute_uv=False)
            if s[-1] > best_score + 1e-15:
                best, best_score = k, s[-1]
        deleted.append(best)
    deleted.sort()

    kept = [k for k in range(n) if k not in deleted]
    jac = np.vstack([block, np.eye(n)[kept]])
    cond = float(np.linalg.cond(jac))
    return ChartReport(
        selected_rows=list(range(d)) + [d + k for k in kept],
        deleted_coordinates=deleted,
        jacobian_condition=cond,
        full_rank=bool(np.isfinite(cond) and cond < FULL_RANK_COND),
        eigenvalue_block_rank=numerical_rank(block),
    )
