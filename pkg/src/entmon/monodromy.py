"""Analytic continuation of a level-slice curve around closed complex loops.

The real curve ``lambda2(lambda1)`` of a :class:`~entmon.levelset.LevelSetSlice`
is continued along a closed path of ``lambda1`` in the complex plane. The
three logarithms ``ln lambda1``, ``ln lambda2`` and ``ln u`` are carried as
continuous lifts ``L1, L2, L3`` so the level equation

    -u L3 - lambda1 L1 - lambda2 L2 + tail_entropy = c

stays analytic along the whole path. After each loop the engine records the
continued ratio ``f = (L1 - L3) / (L2 - L3)``; the lifts' imaginary parts
count how often ``z = lambda1/u`` and ``y = lambda2/u`` wound around 0.
"""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from itertools import combinations
from typing import Callable, Sequence

import numpy as np

from .errors import (
    ConfigurationError,
    InconsistentLiftError,
    InternalConsistencyError,
    NearSingularityError,
    TrackingError,
    ValidationError,
)
from .levelset import LevelSetSlice, gauss_ratio, solve_lambda2

log = logging.getLogger(__name__)

TWO_PI_I = 2j * math.pi

NEWTON_TOL = 1e-12
MAX_RATIO = 0.5
MIN_STEP = 1e-9
CORRECTOR_MAXITER = 8
STEPS_PER_UNIT_ARC = 1000
EXCLUSION_FACTOR = 1e-3
RETURN_TOL = 1e-8
LATTICE_TOL = 1e-8
SEPARATION = 1e-6
K_MAX = 12
GUARD_DENOMINATOR = 10**4
GUARD_TOL = 1e-9
GUARD_ATTEMPTS = 20


# -- paths ---------------------------------------------------------------------


@dataclass(frozen=True)
class PathSpec:
    """A path for ``lambda1`` parameterized over ``s`` in ``[0, 1]``.

    Circles start at ``center + radius * exp(i start_angle)`` and run once
    around, counter-clockwise for ``orientation = +1``. Polylines visit their
    vertices in order, returning to the first one when ``closed``.
    """

    kind: str
    center: complex = 0j
    radius: float = 0.0
    orientation: int = 1
    start_angle: float = 0.0
    vertices: tuple[complex, ...] = ()
    closed: bool = True
    steps_per_unit_arc: int = STEPS_PER_UNIT_ARC

    def __post_init__(self):
        if self.kind == "circle":
            if not self.radius >= 0:
                raise ValidationError("circle radius must be non-negative")
            if self.orientation not in (1, -1):
                raise ValidationError("orientation must be +1 or -1")
        elif self.kind == "polyline":
            if not self.vertices:
                raise ValidationError("polyline needs at least one vertex")
            object.__setattr__(self, "vertices", tuple(complex(v) for v in self.vertices))
        else:
            raise ValidationError(f"unknown path kind {self.kind!r}")
        if self.steps_per_unit_arc < 1:
            raise ValidationError("steps_per_unit_arc must be positive")

    @classmethod
    def circle(cls, center: complex, radius: float, orientation: int = 1,
               start_angle: float = 0.0, **kw) -> PathSpec:
        return cls("circle", center=complex(center), radius=float(radius),
                   orientation=orientation, start_angle=float(start_angle), **kw)

    @classmethod
    def polyline(cls, vertices: Sequence[complex], closed: bool = True, **kw) -> PathSpec:
        return cls("polyline", vertices=tuple(vertices), closed=closed, **kw)

    @classmethod
    def around_origin(cls, xi1: float, **kw) -> PathSpec:
        """Origin-centred circle through the real point ``xi1``."""
        return cls.circle(0j, abs(xi1), start_angle=0.0 if xi1 > 0 else math.pi, **kw)

    @property
    def _nodes(self) -> tuple[complex, ...]:
        v = self.vertices
        return v + (v[0],) if self.closed and len(v) > 1 else v

    @property
    def length(self) -> float:
        if self.kind == "circle":
            return 2 * math.pi * self.radius
        nodes = self._nodes
        return float(sum(abs(b - a) for a, b in zip(nodes, nodes[1:])))

    @property
    def is_closed(self) -> bool:
        return abs(self.point(1.0) - self.point(0.0)) <= 1e-14 * max(1.0, abs(self.point(0.0)))

    def point(self, s: float) -> complex:
        if self.kind == "circle":
            if s == 1.0:
                s = 0.0
            angle = self.start_angle + 2 * math.pi * self.orientation * s
            return self.center + self.radius * cmath.exp(1j * angle)
        nodes = self._nodes
        if len(nodes) == 1 or self.length == 0.0:
            return nodes[0]
        if s >= 1.0:
            return nodes[-1]
        target = s * self.length
        for a, b in zip(nodes, nodes[1:]):
            seg = abs(b - a)
            if target <= seg and seg > 0:
                return a + (b - a) * (target / seg)
            target -= seg
        return nodes[-1]

    def reversed(self) -> PathSpec:
        if self.kind == "circle":
            return replace(self, orientation=-self.orientation)
        return replace(self, vertices=tuple(reversed(self._nodes)), closed=False)

    def distance_to(self, p: complex) -> float:
        if self.kind == "circle":
            return abs(abs(p - self.center) - self.radius)
        nodes = self._nodes
        if len(nodes) == 1:
            return abs(p - nodes[0])
        best = math.inf
        for a, b in zip(nodes, nodes[1:]):
            ab = b - a
            t = 0.0 if ab == 0 else min(1.0, max(0.0, ((p - a) * ab.conjugate()).real / abs(ab) ** 2))
            best = min(best, abs(p - (a + t * ab)))
        return best

    def to_dict(self) -> dict:
        if self.kind == "circle":
            return {"kind": "circle", "center": self.center, "radius": self.radius,
                    "orientation": self.orientation, "start_angle": self.start_angle,
                    "steps_per_unit_arc": self.steps_per_unit_arc}
        return {"kind": "polyline", "vertices": list(self.vertices), "closed": self.closed,
                "steps_per_unit_arc": self.steps_per_unit_arc}


# -- lifted states -------------------------------------------------------------


def lift_log(prev_log: complex, new: complex, old: complex, max_ratio: float = MAX_RATIO) -> complex | None:
    """Continue ``prev_log = log(old)`` to ``new``; ``None`` if the step is too long.

    The result is the principal logarithm of ``new`` shifted by the multiple
    of ``2 pi i`` that keeps it within ``|arg(new/old)|`` of ``prev_log``.
    """
    ratio = new / old
    if abs(ratio - 1) > max_ratio:
        return None
    principal = cmath.log(new)
    target = prev_log.imag + cmath.phase(ratio)
    k = round((target - principal.imag) / (2 * math.pi))
    return complex(principal.real, principal.imag + 2 * math.pi * k)


@dataclass(frozen=True)
class LogLiftState:
    """A point on the lifted level curve.

    ``L1, L2, L3`` are branches of ``ln lambda1``, ``ln lambda2`` and
    ``ln(w - lambda1 - lambda2)`` chosen by continuity along the path.
    """

    lambda1: complex
    lambda2: complex
    L1: complex
    L2: complex
    L3: complex

    @classmethod
    def from_real(cls, slice_: LevelSetSlice, lambda1: float, lambda2: float) -> LogLiftState:
        u = slice_.u(lambda1, lambda2)
        if lambda1 <= 0 or lambda2 <= 0 or u <= 0:
            raise ValidationError("real start point must lie in the open simplex")
        return cls(complex(lambda1), complex(lambda2),
                   complex(math.log(lambda1)), complex(math.log(lambda2)), complex(math.log(u)))

    def u(self, slice_: LevelSetSlice) -> complex:
        return slice_.w - self.lambda1 - self.lambda2

    def residual(self, slice_: LevelSetSlice) -> float:
        u = self.u(slice_)
        r = -u * self.L3 - self.lambda1 * self.L1 - self.lambda2 * self.L2 + slice_.tail_entropy - slice_.c
        return abs(r)

    @property
    def log_z(self) -> complex:
        return self.L1 - self.L3

    @property
    def log_y(self) -> complex:
        return self.L2 - self.L3

    @property
    def f_value(self) -> complex:
        return self.log_z / self.log_y

    def lift_error(self, slice_: LevelSetSlice) -> float:
        """Largest relative mismatch between ``exp(L_j)`` and its argument."""
        pairs = ((self.L1, self.lambda1), (self.L2, self.lambda2), (self.L3, self.u(slice_)))
        return max(abs(cmath.exp(L) - v) / abs(v) for L, v in pairs)

    def distance(self, other: LogLiftState) -> float:
        return max(abs(a - b) for a, b in zip(
            (self.lambda1, self.lambda2, self.L1, self.L2, self.L3),
            (other.lambda1, other.lambda2, other.L1, other.L2, other.L3)))


def _corrector(slice_: LevelSetSlice, prev: LogLiftState, l1: complex, L1: complex,
               l2: complex, tol: float) -> LogLiftState | None:
    """Newton on ``lambda2`` with ``lambda1`` fixed; lifts anchored at ``prev``."""
    u_prev = prev.u(slice_)
    last_step = math.inf
    for _ in range(CORRECTOR_MAXITER + 1):
        u = slice_.w - l1 - l2
        if l2 == 0 or u == 0:
            return None
        L2 = lift_log(prev.L2, l2, prev.lambda2)
        L3 = lift_log(prev.L3, u, u_prev)
        if L2 is None or L3 is None:
            return None
        r = -u * L3 - l1 * L1 - l2 * L2 + slice_.tail_entropy - slice_.c
        if abs(r) <= tol:
            return LogLiftState(l1, l2, L1, L2, L3)
        deriv = L3 - L2
        if deriv == 0:
            return None
        step = r / deriv
        size = abs(step)
        # Newton must contract, otherwise we are outside the basin of this sheet.
        if size > 0.5 * last_step and size > 1e-14 * max(1.0, abs(l2)):
            return None
        last_step = size
        l2 = l2 - step
    return None


def track(path: PathSpec, start: LogLiftState, slice_: LevelSetSlice,
          tol: float = NEWTON_TOL, max_ratio: float = MAX_RATIO) -> tuple[LogLiftState, list[LogLiftState]]:
    """Continue ``start`` along ``path`` by Euler prediction and Newton correction.

    Returns the end state and the trace of accepted states, ``trace[0]``
    being ``start``. The step length adapts by halving on rejection and
    doubling on success, never exceeding the base resolution set by
    ``path.steps_per_unit_arc``.
    """
    p0 = path.point(0.0)
    if abs(p0 - start.lambda1) > 1e-12 * max(1.0, abs(p0)):
        raise ConfigurationError(f"path starts at {p0!r} but the state sits at {start.lambda1!r}")
    trace = [start]
    length = path.length
    if length == 0.0:
        return start, trace

    h_max = 1.0 / max(16, math.ceil(path.steps_per_unit_arc * length))
    h = h_max
    s = 0.0
    state = start
    while s < 1.0:
        h = min(h, 1.0 - s)
        s_new = 1.0 if s + h >= 1.0 - 1e-15 else s + h
        nxt = _step(slice_, state, path.point(s_new), tol, max_ratio)
        if nxt is None:
            h *= 0.5
            if h < MIN_STEP:
                raise NearSingularityError(
                    f"step underflow at s={s:.9f}, lambda1={state.lambda1!r}, lambda2={state.lambda2!r}"
                )
            continue
        state = nxt
        trace.append(state)
        s = s_new
        h = min(2 * h, h_max)
    return state, trace


def _step(slice_: LevelSetSlice, state: LogLiftState, l1: complex, tol: float,
          max_ratio: float) -> LogLiftState | None:
    L1 = lift_log(state.L1, l1, state.lambda1, max_ratio)
    if L1 is None:
        return None
    denom = state.L3 - state.L2
    if denom == 0:
        return None
    slope = -(state.L3 - state.L1) / denom
    l2 = state.lambda2 + slope * (l1 - state.lambda1)
    u_pred = slice_.w - l1 - l2
    if abs(l2 / state.lambda2 - 1) > max_ratio or abs(u_pred / state.u(slice_) - 1) > max_ratio:
        return None
    return _corrector(slice_, state, l1, L1, l2, tol)


def windings(trace: Sequence[LogLiftState]) -> tuple[int, int]:
    """Winding numbers of ``z = lambda1/u`` and ``y = lambda2/u`` around 0."""
    if not trace:
        raise ValidationError("empty trace")
    a, b = trace[0], trace[-1]
    out = []
    for name, delta in (("z", b.log_z - a.log_z), ("y", b.log_y - a.log_y)):
        turns = delta.imag / (2 * math.pi)
        k = round(turns)
        if abs(turns - k) >= 0.01 or abs(delta.real) >= 0.01 * 2 * math.pi:
            raise InconsistentLiftError(f"image of {name} is not closed ({turns:.4f} turns)")
        out.append(int(k))
    return out[0], out[1]


# -- singular points -------------------------------------------------------------


def _newton_roots(g: Callable[[complex], complex], dg: Callable[[complex], complex],
                  starts: Sequence[complex], tol: float = 1e-10) -> list[complex]:
    found: list[complex] = []
    for x in starts:
        try:
            for _ in range(80):
                d = dg(x)
                if d == 0:
                    break
                step = g(x) / d
                x = x - step
                if abs(step) < 1e-15 * max(1.0, abs(x)):
                    break
            if not cmath.isfinite(x) or abs(g(x)) > tol:
                continue
        except (ValueError, ZeroDivisionError, OverflowError):
            continue
        found.append(x)
    return found


def _dedupe(points: Sequence[complex], tol: float) -> list[complex]:
    out: list[complex] = []
    for p in points:
        if all(abs(p - q) > tol for q in out):
            out.append(p)
    return out


def branch_points(w: float, level: float, grid: int = 25) -> list[complex]:
    """Roots of ``-x ln x - (w - x) ln((w - x)/2) = level`` plus ``0`` and ``w``.

    ``level`` is the slice level minus the frozen tail entropy. Newton starts
    from a ``grid x grid`` lattice over ``[-2w, 2w]^2`` with principal
    logarithms; roots are kept when the residual is at most ``1e-10`` and
    merged at distance ``1e-8``.
    """

    def g(x):
        m = (w - x) / 2
        return -x * cmath.log(x) - 2 * m * cmath.log(m) - level

    def dg(x):
        return cmath.log((w - x) / 2) - cmath.log(x)

    roots = _newton_roots(g, dg, _grid_starts(w, grid))
    # Double roots (the uniform point at the top level) stall Newton on g;
    # polish them on dg, whose root is simple there.
    polished = []
    for r in roots:
        if abs(dg(r)) < 1e-5:
            cand = _newton_roots(dg, lambda x: -1 / (w - x) - 1 / x, [r], tol=1e-14)
            if cand and abs(g(cand[0])) <= abs(g(r)) + 1e-15:
                r = cand[0]
        polished.append(r)
    return _finish([0j, complex(w)] + polished)


def _grid_starts(w: float, grid: int) -> list[complex]:
    axis = np.linspace(-2 * w, 2 * w, grid)
    starts = [complex(a, b) for a in axis for b in axis]
    return [z for z in starts if abs(z) > 1e-9 and abs(w - z) > 1e-9]


def _finish(points: list[complex]) -> list[complex]:
    points = [complex(p.real, 0.0) if abs(p.imag) < 1e-12 else p for p in points]
    pts = _dedupe(points, 1e-8)
    return sorted(pts, key=lambda z: (round(z.real, 9), round(z.imag, 9)))


def find_branch_points(slice_: LevelSetSlice, grid: int = 25) -> list[complex]:
    """Best-effort branch points of ``lambda2(lambda1)`` together with ``0`` and ``w``.

    Branch points solve ``F(lambda1, lambda2 = u) = c``, i.e. the level
    equation on the locus where ``dF/dlambda2`` vanishes. Only principal
    logarithms are used, so points living on other sheets are missed.
    """
    return branch_points(slice_.w, slice_.c - slice_.tail_entropy, grid)


def find_singular_points(slice_: LevelSetSlice, grid: int = 25) -> list[complex]:
    """``lambda1`` values where the level curve meets ``lambda2 = 0`` or ``u = 0``.

    Both cases reduce to ``-x ln x - (w - x) ln(w - x) = c - tail_entropy``.
    """
    w, level = slice_.w, slice_.c - slice_.tail_entropy

    def g(x):
        return -x * cmath.log(x) - (w - x) * cmath.log(w - x) - level

    def dg(x):
        return cmath.log(w - x) - cmath.log(x)

    return _finish(_newton_roots(g, dg, _grid_starts(w, grid)))


def branch_residual(slice_: LevelSetSlice, x: complex) -> float:
    """``|F(x, (w - x)/2) - c|`` with principal logarithms."""
    m = (slice_.w - x) / 2
    return abs(-x * cmath.log(x) - 2 * m * cmath.log(m) + slice_.tail_entropy - slice_.c)


# -- number-theoretic checks ---------------------------------------------------------


def rational_guard(f0: float, w: float = 1.0) -> tuple[bool, float]:
    """Reject start ratios that are numerically rational.

    ``ok`` is ``False`` when ``f0`` is within ``1e-9`` of a fraction with
    denominator at most ``10**4``; the suggested shift of the start point is
    then ``1e-3 * w`` (and ``0.0`` otherwise).
    """
    best = Fraction(f0).limit_denominator(GUARD_DENOMINATOR)
    ok = abs(f0 - float(best)) > GUARD_TOL
    return ok, 0.0 if ok else EXCLUSION_FACTOR * w


def _pairwise_distinct(values: Sequence[complex], rel: float) -> bool:
    for a, b in combinations(values, 2):
        if abs(a - b) <= rel * max(abs(a), abs(b)):
            return False
    return True


def lemma_infinity_check(a: float, b: float, k: int, m: Sequence[int] | Callable[[int], int],
                         N: int) -> bool:
    """Are ``(a + 2 pi i k n) / (b + 2 pi i m(n))`` pairwise distinct for ``|n| <= N``?

    ``m`` is either a callable or a list of ``2N + 1`` integers for
    ``n = -N, ..., N``.
    """
    if a == 0 or b == 0 or k < 1:
        raise ValidationError("need nonzero a, b and positive k")
    ns = range(-N, N + 1)
    if callable(m):
        ms = [int(m(n)) for n in ns]
    else:
        ms = [int(v) for v in m]
        if len(ms) != len(ns):
            raise ValidationError(f"m must list {len(ns)} values, got {len(ms)}")
    if rational_guard(a / b)[0] is False:
        log.info("a/b = %r is numerically rational; collisions are possible", a / b)
    values = [(a + TWO_PI_I * k * n) / (b + TWO_PI_I * mn) for n, mn in zip(ns, ms)]
    return _pairwise_distinct(values, 1e-12)


# -- monodromy runs ------------------------------------------------------------------


@dataclass(frozen=True)
class BranchRecord:
    """State after ``loops`` traversals of the path (batch ``batch_index``).

    Winding numbers are only defined when ``lambda2`` has returned to its
    start value, because only then are the images of ``z`` and ``y``
    closed; otherwise they are ``None``.
    """

    batch_index: int
    loops: int
    f_value: complex
    lambda2_end: complex
    lambda2_returned: bool
    winding_z: int | None = None
    winding_y: int | None = None
    lattice_value: complex | None = None

    def to_dict(self) -> dict:
        return {
            "batch_index": self.batch_index,
            "loops": self.loops,
            "f_value": self.f_value,
            "lambda2_end": self.lambda2_end,
            "lambda2_returned": self.lambda2_returned,
            "winding_z": self.winding_z,
            "winding_y": self.winding_y,
            "lattice_value": self.lattice_value,
        }


@dataclass
class BranchLedger:
    """Everything measured by :func:`run_monodromy`."""

    slice: LevelSetSlice
    path: PathSpec
    xi1_requested: float
    xi1: float
    lambda2_start: float
    ln_z0: float
    ln_y0: float
    guard_shifts: int
    period: int | None = None
    loops_tracked: int = 0
    records: list[BranchRecord] = field(default_factory=list)
    trace: list[LogLiftState] = field(default_factory=list, repr=False)

    @property
    def f0(self) -> float:
        return self.ln_z0 / self.ln_y0

    def f_values(self) -> list[complex]:
        return [complex(self.f0)] + [r.f_value for r in self.records]

    def n_distinct(self, separation: float = SEPARATION) -> int:
        kept: list[complex] = []
        for v in self.f_values():
            if all(abs(v - q) > separation for q in kept):
                kept.append(v)
        return len(kept)

    def min_separation(self) -> float:
        vals = self.f_values()
        if len(vals) < 2:
            return math.inf
        return min(abs(a - b) for a, b in combinations(vals, 2))

    def distinct(self, separation: float = SEPARATION) -> bool:
        return self.min_separation() > separation

    def lattice_checked(self) -> int:
        return sum(r.lambda2_returned for r in self.records)

    def hypothesis_holds(self) -> bool:
        """Irrationality of the start ratio, the premise for distinct lattice values."""
        return rational_guard(self.f0, self.slice.w)[0]

    def lattice_distinct(self) -> bool | None:
        """Distinctness of lattice values over returned records with distinct ``k_z``."""
        pairs = {(r.winding_z, r.winding_y) for r in self.records if r.lambda2_returned}
        pairs.add((0, 0))
        if len(pairs) < 2 or len({p[0] for p in pairs}) < len(pairs):
            return None
        values = [(self.ln_z0 + TWO_PI_I * kz) / (self.ln_y0 + TWO_PI_I * ky) for kz, ky in pairs]
        return _pairwise_distinct(values, 1e-12)

    def to_dict(self) -> dict:
        return {
            "slice": self.slice.to_dict(),
            "path": self.path.to_dict(),
            "xi1_requested": self.xi1_requested,
            "xi1": self.xi1,
            "lambda2_start": self.lambda2_start,
            "ln_z0": self.ln_z0,
            "ln_y0": self.ln_y0,
            "f0": self.f0,
            "guard_shifts": self.guard_shifts,
            "period": self.period,
            "loops_tracked": self.loops_tracked,
            "records": [r.to_dict() for r in self.records],
            "verdicts": {
                "lattice_checked": self.lattice_checked(),
                "lattice_ok": True,
                "lattice_distinct": self.lattice_distinct(),
                "irrational_start_ratio": self.hypothesis_holds(),
                "n_f_values": len(self.f_values()),
                "n_distinct": self.n_distinct(),
                "min_separation": self.min_separation(),
                "distinct": self.distinct(),
            },
        }


def guarded_start(slice_: LevelSetSlice, xi1: float, lambda2_seed: float | None = None
                  ) -> tuple[float, float, int]:
    """Real start ``(xi1', lambda2)`` whose ratio passes :func:`rational_guard`.

    Shifts ``xi1`` by ``1e-3 * w`` at most 20 times; returns the number of
    shifts taken as the third element.
    """
    if lambda2_seed is None:
        l2 = slice_.point_at(xi1, "lower").lambda2
    else:
        l2 = solve_lambda2(xi1, slice_, lambda2_seed)
    x = xi1
    for shifts in range(GUARD_ATTEMPTS + 1):
        ok, shift = rational_guard(gauss_ratio(slice_.full_point(x, l2)), slice_.w)
        if ok:
            return x, l2, shifts
        if shifts == GUARD_ATTEMPTS:
            break
        x += shift
        try:
            l2 = solve_lambda2(x, slice_, l2)
        except TrackingError as exc:
            raise ConfigurationError(f"shifted start left the level set: {exc}") from None
    raise ConfigurationError(f"no irrational start ratio within {GUARD_ATTEMPTS} shifts of {xi1!r}")


def run_monodromy(slice_: LevelSetSlice, xi1: float, path: PathSpec | None = None,
                  n_batches: int = 5, *, lambda2_seed: float | None = None,
                  k_max: int = K_MAX, exclusion_radius: float | None = None,
                  lattice_tol: float = LATTICE_TOL, newton_tol: float = NEWTON_TOL,
                  keep_trace: bool = False) -> BranchLedger:
    """Loop the continuation and log the branch values of the ratio ``f``.

    First the path is repeated up to ``k_max`` times to find the period
    after which ``lambda2`` returns. Then ``n_batches`` batches of that many
    loops (single loops if no period was found) are recorded. Every record
    with a returned ``lambda2`` must satisfy the lattice identity
    ``f = (ln z0 + 2 pi i k_z) / (ln y0 + 2 pi i k_y)``; a violation raises
    :class:`InternalConsistencyError`.
    """
    if n_batches < 0:
        raise ValidationError("n_batches must be non-negative")
    x, l2, shifts = guarded_start(slice_, xi1, lambda2_seed)
    if path is None:
        path = PathSpec.around_origin(x)
    if not path.is_closed:
        raise ConfigurationError("monodromy needs a closed path")

    radius = EXCLUSION_FACTOR * slice_.w if exclusion_radius is None else exclusion_radius
    for p in find_branch_points(slice_) + find_singular_points(slice_):
        dist = path.distance_to(p)
        if dist <= radius:
            raise ConfigurationError(f"path passes within {dist:.3g} of singular point {p!r}")

    start = LogLiftState.from_real(slice_, x, l2)
    ledger = BranchLedger(
        slice=slice_, path=path, xi1_requested=xi1, xi1=x, lambda2_start=l2,
        ln_z0=start.log_z.real, ln_y0=start.log_y.real, guard_shifts=shifts,
    )
    if keep_trace:
        ledger.trace.append(start)
    if n_batches == 0:
        return ledger

    ends: list[LogLiftState] = []
    state = start

    def loop_once():
        nonlocal state
        state, tr = track(path, state, slice_, tol=newton_tol)
        ends.append(state)
        if keep_trace:
            ledger.trace.extend(tr[1:])

    for n in range(1, k_max + 1):
        loop_once()
        if abs(state.lambda2 - start.lambda2) < RETURN_TOL:
            ledger.period = n
            break
    per_batch = ledger.period or 1
    while len(ends) < n_batches * per_batch:
        loop_once()
    ledger.loops_tracked = len(ends)

    for b in range(1, n_batches + 1):
        end = ends[b * per_batch - 1]
        returned = abs(end.lambda2 - start.lambda2) < RETURN_TOL
        kz = ky = lattice = None
        if returned:
            kz, ky = windings([start, end])
            lattice = (ledger.ln_z0 + TWO_PI_I * kz) / (ledger.ln_y0 + TWO_PI_I * ky)
            err = abs(end.f_value - lattice)
            if err > lattice_tol:
                raise InternalConsistencyError(
                    f"batch {b}: f = {end.f_value!r} misses lattice value {lattice!r} by {err:.3g}"
                )
        ledger.records.append(BranchRecord(
            batch_index=b, loops=b * per_batch, f_value=end.f_value, lambda2_end=end.lambda2,
            lambda2_returned=returned, winding_z=kz, winding_y=ky, lattice_value=lattice,
        ))
    return ledger
