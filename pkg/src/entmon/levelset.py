"""Entropy on the eigenvalue chart and the real implicit curve of a level slice.

With all but two eigenvalues frozen, the level set ``F = c`` becomes a plane
curve ``lambda2(lambda1)``. This module evaluates it, differentiates it and
exposes the normal-direction ratio that the monodromy engine continues into
the complex plane.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from . import spectral
from .errors import (
    BranchPointError,
    DomainError,
    InternalConsistencyError,
    SingularConfigurationError,
    TrackingError,
    ValidationError,
)

log = logging.getLogger(__name__)

NEWTON_TOL = 1e-13
NEWTON_MAXITER = 50
BISECTION_HALF_WIDTH = 0.1


def _interior(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise ValidationError("expected a non-empty real vector")
    if np.any(x <= 0) or x.sum() >= 1:
        raise DomainError("point is not in the open probability simplex")
    return x


def F_full(x: Sequence[float]) -> float:
    """Shannon entropy (nats) of ``(x_1, ..., x_{d-1}, 1 - sum x)``."""
    x = _interior(x)
    last = 1.0 - x.sum()
    return float(-last * math.log(last) - np.sum(x * np.log(x)))


def grad_F(x: Sequence[float]) -> np.ndarray:
    x = _interior(x)
    return math.log(1.0 - x.sum()) - np.log(x)


def normal_projector(x: Sequence[float]) -> np.ndarray:
    """Orthogonal projector onto the normal line of the level set through ``x``."""
    g = grad_F(x)
    norm2 = float(g @ g)
    if norm2 <= 1e-24:
        raise SingularConfigurationError("gradient vanishes; normal space undefined")
    return np.outer(g, g) / norm2


def gauss_ratio(x: Sequence[float]) -> float:
    """``|dF/dx_1 / dF/dx_2|``, the square root of the projector diagonal ratio."""
    g = grad_F(x)
    if g.size < 2:
        raise ValidationError("need at least two free coordinates (d >= 3)")
    if abs(g[1]) <= 1e-12:
        raise SingularConfigurationError("second gradient component vanishes")
    return float(abs(g[0] / g[1]))


# -- level slices ------------------------------------------------------------


@dataclass(frozen=True)
class LevelSetSlice:
    """Entropy level ``c`` with eigenvalues ``3..d-1`` frozen to ``tail``.

    The two free eigenvalues ``lambda1, lambda2`` and the remainder
    ``u = w - lambda1 - lambda2`` share the mass ``w = 1 - sum(tail)``.
    """

    d: int
    c: float
    tail: tuple[float, ...] = ()
    w: float = field(init=False)
    tail_entropy: float = field(init=False)

    def __post_init__(self):
        tail = tuple(float(t) for t in self.tail)
        object.__setattr__(self, "tail", tail)
        if self.d < 3:
            raise ValidationError("level slices need d >= 3")
        if len(tail) != self.d - 3:
            raise ValidationError(f"d={self.d} needs {self.d - 3} tail eigenvalues, got {len(tail)}")
        if any(not 0 < t < 1 for t in tail):
            raise ValidationError("tail eigenvalues must lie in (0, 1)")
        w = 1.0 - sum(tail)
        if not 0 < w <= 1:
            raise ValidationError("tail eigenvalues leave no mass for the free pair")
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "tail_entropy", -sum(t * math.log(t) for t in tail))
        if not 0 < self.c < math.log(self.d):
            raise ValidationError(f"level c={self.c!r} outside (0, ln d)")
        lo, hi = self.level_range()
        if not lo < self.c < hi:
            raise ValidationError(
                f"level c={self.c!r} not attained on this slice (range ({lo:.6g}, {hi:.6g}))"
            )

    def level_range(self) -> tuple[float, float]:
        """Open interval of levels attained by the slice with lambda1 < lambda2."""
        w = self.w
        return self.tail_entropy - w * math.log(w), self.tail_entropy + w * math.log(3.0 / w)

    @classmethod
    def through(cls, point: Sequence[float], tail: Sequence[float] = ()) -> LevelSetSlice:
        """Slice whose level is the entropy at ``(lambda1, lambda2, *tail)``."""
        l1, l2 = (float(v) for v in point)
        tail = tuple(float(t) for t in tail)
        return cls(d=len(tail) + 3, c=F_full((l1, l2) + tail), tail=tail)

    @classmethod
    def from_json(cls, obj: dict) -> LevelSetSlice:
        try:
            tail = tuple(float(t) for t in obj.get("tail", ()))
            if "through" in obj:
                return cls.through(obj["through"], tail)
            d = int(obj.get("d", len(tail) + 3))
            return cls(d=d, c=float(obj["c"]), tail=tail)
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"bad slice JSON: {exc!r}") from None

    def to_dict(self) -> dict:
        return {"d": self.d, "c": self.c, "tail": list(self.tail), "w": self.w}

    def u(self, l1, l2):
        return self.w - l1 - l2

    def value(self, l1: float, l2: float) -> float:
        """Entropy of the full spectrum ``(l1, l2, tail, u)``."""
        u = self.u(l1, l2)
        if l1 <= 0 or l2 <= 0 or u <= 0:
            raise DomainError("slice point outside the open simplex")
        return -l1 * math.log(l1) - l2 * math.log(l2) - u * math.log(u) + self.tail_entropy

    def partials(self, l1: float, l2: float) -> tuple[float, float]:
        lu = math.log(self.u(l1, l2))
        return lu - math.log(l1), lu - math.log(l2)

    def hessian(self, l1: float, l2: float) -> np.ndarray:
        iu = 1.0 / self.u(l1, l2)
        return np.array([[-1.0 / l1 - iu, -iu], [-iu, -1.0 / l2 - iu]])

    def full_point(self, l1: float, l2: float) -> np.ndarray:
        """Chart coordinates ``(l1, l2, tail)`` of length ``d - 1``."""
        return np.array((l1, l2) + self.tail)

    def branch_locus(self, l1: float) -> float:
        """``lambda2`` where ``dF/dlambda2`` vanishes (``lambda2 = u``)."""
        return (self.w - l1) / 2

    def point_at(self, l1: float, branch: str = "lower") -> SlicePoint:
        """Level-set point above ``l1`` on the lower (``lambda2 < u``) or upper branch."""
        mid = self.branch_locus(l1)
        if not 0 < l1 < self.w:
            raise DomainError(f"lambda1={l1!r} outside (0, w)")
        lo, hi = (0.0, mid) if branch == "lower" else (mid, self.w - l1)
        g_mid = self.value(l1, mid) - self.c
        if g_mid <= 0:
            raise DomainError(f"level not reached above lambda1={l1!r}")
        l2 = _bisect(lambda t: self.value(l1, t) - self.c, lo, hi)
        l2 = solve_lambda2(l1, self, l2)
        return SlicePoint(l1, l2)


@dataclass(frozen=True)
class SlicePoint:
    lambda1: float
    lambda2: float

    def check_ordering(self, slice_: LevelSetSlice) -> bool:
        """Log a warning unless ``lambda1 < lambda2 < u``; return whether ordered."""
        u = slice_.u(self.lambda1, self.lambda2)
        ok = self.lambda1 < self.lambda2 < u
        if not ok:
            log.warning(
                "slice point (%r, %r, u=%r) is not in ascending order", self.lambda1, self.lambda2, u
            )
        return ok


def _bisect(fn, lo: float, hi: float, maxiter: int = 200) -> float:
    """Root of ``fn`` on the open interval ``(lo, hi)`` by bisection."""
    nudge = (hi - lo) * 1e-15
    a, b = lo + nudge, hi - nudge
    fa, fb = fn(a), fn(b)
    if fa == 0:
        return a
    if fb == 0:
        return b
    if (fa < 0) == (fb < 0):
        raise TrackingError("bisection bracket has no sign change")
    for _ in range(maxiter):
        m = 0.5 * (a + b)
        if m in (a, b):
            break
        fm = fn(m)
        if fm == 0:
            return m
        if (fm < 0) == (fa < 0):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)


def solve_lambda2(l1: float, slice_: LevelSetSlice, seed: float, tol: float = NEWTON_TOL) -> float:
    """Solve ``F(l1, lambda2) = c`` for ``lambda2`` on the seed's side of the branch locus.

    Newton from ``seed``; if it leaves the branch or stalls, fall back to
    bisection on ``[seed - 0.1, seed + 0.1]`` clipped to that branch.
    """
    mid = slice_.branch_locus(l1)
    if not 0 < l1 < slice_.w:
        raise DomainError(f"lambda1={l1!r} outside (0, w)")
    if seed == mid:
        raise BranchPointError("seed lies on the branch locus lambda2 = u")
    upper = seed > mid
    lo, hi = (mid, slice_.w - l1) if upper else (0.0, mid)
    if not lo < seed < hi:
        raise DomainError(f"seed {seed!r} outside the admissible interval ({lo!r}, {hi!r})")

    def resid(t):
        return slice_.value(l1, t) - slice_.c

    x = seed
    for _ in range(NEWTON_MAXITER):
        r = resid(x)
        if abs(r) <= tol:
            return x
        slope = slice_.partials(l1, x)[1]
        step = r / slope
        nxt = x - step
        if not lo < nxt < hi:
            break
        x = nxt

    a, b = max(lo, seed - BISECTION_HALF_WIDTH), min(hi, seed + BISECTION_HALF_WIDTH)
    try:
        x = _bisect(resid, a, b)
    except TrackingError:
        raise TrackingError(f"no level-set root for lambda1={l1!r} near seed {seed!r}") from None
    if abs(resid(x)) > tol:
        # Bisection converges in x; one Newton polish usually closes the gap.
        slope = slice_.partials(l1, x)[1]
        y = x - resid(x) / slope
        if lo < y < hi and abs(resid(y)) < abs(resid(x)):
            x = y
    if abs(resid(x)) > tol:
        raise TrackingError(f"residual {resid(x):.3g} above tolerance at lambda1={l1!r}")
    return x


class Lambda2Derivatives(NamedTuple):
    first: float
    second: float
    f_prime: float


def lambda2_derivatives(p: SlicePoint, slice_: LevelSetSlice) -> Lambda2Derivatives:
    """First and second derivative of ``lambda2(lambda1)`` and the derivative of the ratio.

    ``lambda2' = -f`` with ``f = dC/dl1 / dC/dl2``; twice differentiating the
    level equation gives ``lambda2'' = -(v^T H v) / dC/dl2`` with
    ``v = (1, lambda2')``; finally ``f' = -lambda2''``.
    """
    p.check_ordering(slice_)
    d1c, d2c = slice_.partials(p.lambda1, p.lambda2)
    if abs(d2c) <= 1e-12:
        raise BranchPointError("dF/dlambda2 vanishes; implicit function undefined")
    first = -d1c / d2c
    v = np.array([1.0, first])
    curv = float(v @ slice_.hessian(p.lambda1, p.lambda2) @ v)
    if not curv < 0:
        raise InternalConsistencyError(f"v^T H v = {curv!r} is not negative")
    second = -curv / d2c
    return Lambda2Derivatives(first, second, -second)


# -- d = 2 ---------------------------------------------------------------------


def binary_entropy(p: float) -> float:
    if p <= 0 or p >= 1:
        return 0.0
    return -p * math.log(p) - (1 - p) * math.log(1 - p)


def binary_entropy_root(c: float) -> float:
    """Smaller eigenvalue ``p <= 1/2`` of a qubit state with entropy ``c``."""
    if not 0 < c <= math.log(2) + 1e-15:
        raise ValidationError(f"qubit entropy must lie in (0, ln 2], got {c!r}")
    if c >= math.log(2):
        return 0.5
    return _bisect(lambda p: binary_entropy(p) - c, 0.0, 0.5)


def d2_witness(c: float, n_samples: int, seed: int = 0) -> float:
    """Largest purity deviation among random qubit states at entropy ``c``.

    Every state is ``U diag(p, 1-p) U^H`` for a Haar-random ``U``; the
    returned value is ``max |tr(rho^2) - (p^2 + (1-p)^2)|``.
    """
    p = binary_entropy_root(c)
    target = p * p + (1 - p) * (1 - p)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_samples):
        u = spectral.random_unitary(2, rng)
        rho = spectral.DensityState.from_spectrum([p, 1 - p], u)
        worst = max(worst, abs(spectral.purity(rho) - target))
    return worst


# -- additional constraints --------------------------------------------------


def constraint_tangent_rank(rho, grad_h) -> int:
    """Rank of the eigenvalue pushforward restricted to the complement of ``grad_h``.

    Spans the Hilbert-Schmidt orthogonal complement of ``grad_h`` in the
    Hermitian matrices and maps each element ``X`` to
    ``(<phi_i|X|phi_i>)_i`` in the eigenbasis of ``rho``.
    """
    state = spectral.as_state(rho)
    state.require_nondegenerate()
    g = spectral.hermitian(grad_h)
    d = state.dim
    if g.shape != (d, d):
        raise ValidationError("constraint gradient has the wrong dimension")
    basis = spectral.hs_orthonormal_basis(d)
    coeffs = np.array([np.trace(b @ g).real for b in basis])
    if np.linalg.norm(coeffs) == 0.0:
        complement = np.eye(d * d)
    else:
        complement = np.linalg.svd(coeffs[None, :])[2][1:]
    v = state.spectrum.eigenvectors
    push = np.array([np.real(np.einsum("ji,jk,ki->i", v.conj(), b, v)) for b in basis]).T
    return spectral.numerical_rank(push @ complement.T)


def relent_constraint(sigma, rho_tilde) -> tuple[np.ndarray, float]:
    """``ln(sigma)`` (the gradient of ``tr(rho ln sigma)``) and ``||[rho_tilde, ln sigma]||_F``."""
    ln_sigma = spectral.matrix_log(sigma)
    rt = spectral.as_state(rho_tilde).matrix
    return ln_sigma, float(np.linalg.norm(spectral.commutator(rt, ln_sigma)))
