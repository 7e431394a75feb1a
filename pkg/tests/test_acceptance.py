"""End-to-end acceptance criteria.

Each test prints a single ``PASS``/``FAIL`` line summarising what it measured
and then asserts. Run with ``pytest tests/test_acceptance.py -s`` (or ``-v``)
to see the lines; they are written with output capturing disabled so they
also show up in a plain ``pytest`` run.
"""

import math
import time

import numpy as np
import pytest

from entmon import classifier, levelset, monodromy, spectral
from entmon.errors import DomainError
from entmon.levelset import LevelSetSlice
from entmon.monodromy import PathSpec

SLICE = LevelSetSlice.through((0.2, 0.3))


@pytest.fixture
def report(capsys):
    def emit(number, title, checks, detail=""):
        ok = all(checks.values())
        failed = [name for name, passed in checks.items() if not passed]
        line = f"{'PASS' if ok else 'FAIL'} [{number}] {title}"
        if detail:
            line += f" -- {detail}"
        if failed:
            line += f" (failed: {', '.join(failed)})"
        with capsys.disabled():
            print("\n" + line)
        assert ok, line

    return emit


def real_branch_points(slice_):
    pts = [p.real for p in monodromy.find_branch_points(slice_) if p.imag == 0 and 0 < p.real < slice_.w]
    return min(pts), max(pts)


def ordered_interval(slice_):
    """lambda1-range of the lower branch where lambda1 < lambda2 < u.

    The ratio is taken in absolute value, so it equals -lambda2' only
    where both gradient components are positive, i.e. in ascending order.
    """
    lo, hi = real_branch_points(slice_)
    a, b = lo + 1e-9, hi - 1e-9
    gap = lambda x: slice_.point_at(x, "lower").lambda2 - x  # noqa: E731
    for _ in range(80):
        m = 0.5 * (a + b)
        a, b = (m, b) if gap(m) > 0 else (a, m)
    return lo, a


def test_1_branch_lattice(report):
    t0 = time.perf_counter()
    led = monodromy.run_monodromy(SLICE, 0.2, n_batches=5, lambda2_seed=0.3)
    elapsed = time.perf_counter() - t0
    returned = [r for r in led.records if r.lambda2_returned]
    lattice_ok = all(abs(r.f_value - r.lattice_value) <= 1e-8 for r in returned)

    # The origin circle never brings lambda2 back, so the identity above is
    # checked on zero records; exercise it on a loop where lambda2 does return.
    lo, _ = real_branch_points(SLICE)
    loop = monodromy.run_monodromy(SLICE, lo + 0.02, PathSpec.circle(lo, 0.02), 3, lambda2_seed=0.3)
    loop_ok = loop.lattice_checked() == 3 and all(
        abs(r.f_value - r.lattice_value) <= 1e-8 for r in loop.records)

    report(1, "branch-lattice reproduction", {
        "lattice identity on returned records": lattice_ok,
        ">= 6 distinct f-values": led.n_distinct() >= 6,
        "separation > 1e-6": led.min_separation() > 1e-6,
        "runtime < 10 s": elapsed < 10,
        "lattice identity on returning loop": loop_ok,
    }, f"{led.n_distinct()} distinct f-values, min separation {led.min_separation():.3g}, "
       f"{len(returned)} returned records on the default path, "
       f"{loop.lattice_checked()} lattice checks on a branch-point loop (period {loop.period}), "
       f"{elapsed:.2f} s")


def test_2_lemma_infinity(report):
    t0 = time.perf_counter()
    distinct = monodromy.lemma_infinity_check(math.log(2), math.log(3), 1, [0] * 101, 50)
    # a/b = 3/2 rational: choosing m(n) = (b/a) k n makes every quotient equal a/b
    a, b, k = 3 * math.log(2), 2 * math.log(2), 3
    collide = not monodromy.lemma_infinity_check(a, b, k, lambda n: (b / a) * k * n, 50)
    elapsed = time.perf_counter() - t0
    report(2, "lemma-infinity distinctness", {
        "101 distinct values": distinct,
        "collisions for rational a/b": collide,
        "runtime < 1 s": elapsed < 1,
    }, f"{elapsed * 1e3:.1f} ms")


def test_3_classifier(report):
    t0 = time.perf_counter()
    one = classifier.classify(["1/2", "1/2"], "2")
    dyadic = classifier.classify(["1/2", "1/4", "1/4"], "2")
    thirds = classifier.classify(["1/3", "1/3", "1/3"], "2")
    nat = classifier.classify(["1/2", "1/2"], "e")
    zeros = [classifier.classify(["1", "0", "0"], b).verdict for b in ("e", "2", "3", "5/2")]
    elapsed = time.perf_counter() - t0
    report(3, "entropy classifier", {
        "(1/2,1/2) base 2 rational 1": one.verdict == "rational" and one.value == 1,
        "(1/2,1/4,1/4) base 2 rational 3/2": dyadic.verdict == "rational" and dyadic.value == classifier.Fraction(3, 2),
        "|3/2 - float| <= 1e-12": abs(1.5 - dyadic.numeric_check) <= 1e-12,
        "(1/3,1/3,1/3) base 2 transcendental": thirds.verdict == "transcendental",
        "(1/2,1/2) base e transcendental": nat.verdict == "transcendental",
        "pure state zero in every base": all(v == "zero" for v in zeros),
        "runtime < 1 s": elapsed < 1,
    }, f"{elapsed * 1e3:.1f} ms")


def test_4_second_derivative(report):
    rng = np.random.default_rng(10)
    slices = [LevelSetSlice.through(p) for p in ((0.2, 0.3), (0.15, 0.25), (0.1, 0.35))]
    arcs = [ordered_interval(s) for s in slices]
    t0 = time.perf_counter()
    # f' blows up at the branch points, so stay on the inner part of the ordered arc
    h = 1e-6
    checks = {"negative definite Hessian": True, "|lambda2''| > 1e-6": True, "f' matches FD": True}
    worst = 0.0
    for i in range(50):
        s = slices[i % 3]
        lo, hi = arcs[i % 3]
        margin = 0.1 * (hi - lo)
        l1 = rng.uniform(lo + margin, hi - margin)
        pt = s.point_at(l1, "lower")
        der = levelset.lambda2_derivatives(pt, s)
        if not np.all(np.linalg.eigvalsh(s.hessian(pt.lambda1, pt.lambda2)) < 0):
            checks["negative definite Hessian"] = False
        if not abs(der.second) > 1e-6:
            checks["|lambda2''| > 1e-6"] = False
        ratio = []
        for x in (l1 - h, l1 + h):
            l2 = levelset.solve_lambda2(x, s, pt.lambda2)
            ratio.append(levelset.gauss_ratio(s.full_point(x, l2)))
        err = abs((ratio[1] - ratio[0]) / (2 * h) - der.f_prime)
        worst = max(worst, err)
    checks["f' matches FD"] = worst <= 1e-5
    elapsed = time.perf_counter() - t0
    checks["runtime < 1 s"] = elapsed < 1
    report(4, "nonvanishing f' via concavity", checks,
           f"50 points on 3 levels, worst |f' - FD| = {worst:.2g}, {elapsed * 1e3:.0f} ms")


def test_5_slope_identity(report):
    lo, hi = ordered_interval(SLICE)
    h = 1e-5
    worst = 0.0
    seed = 0.3
    for l1 in np.linspace(lo + 0.01, hi - 1e-3, 100):
        seed = levelset.solve_lambda2(l1, SLICE, seed)
        plus = levelset.solve_lambda2(l1 + h, SLICE, seed)
        minus = levelset.solve_lambda2(l1 - h, SLICE, seed)
        slope = (plus - minus) / (2 * h)
        worst = max(worst, abs(levelset.gauss_ratio(SLICE.full_point(l1, seed)) + slope))
    report(5, "slope identity lambda2' = -f", {"within 1e-6": worst <= 1e-6},
           f"100 ordered points on ({lo + 0.01:.4f}, {hi - 1e-3:.4f}), worst deviation {worst:.2g}")


def test_6_qubit_witness(report):
    dev = levelset.d2_witness(0.5, 200, seed=0)
    report(6, "d=2 purity witness", {"deviation <= 1e-10": dev <= 1e-10},
           f"200 states at c = 0.5, max deviation {dev:.2g}")


def test_7_rank_dichotomy(report):
    rho = np.diag([0.2, 0.3, 0.5])
    off = np.diag([1.0, 2.0, 3.0]) + 0.05 * (np.ones((3, 3)) - np.eye(3))
    rank_off = levelset.constraint_tangent_rank(rho, off)
    rank_diag = levelset.constraint_tangent_rank(rho, np.diag([1.0, 2.0, 3.0]))
    rho_t = rho.astype(complex)
    rho_t[0, 1] = rho_t[1, 0] = 0.05
    ln_sigma, norm = levelset.relent_constraint(np.diag([0.5, 0.3, 0.2]), rho_t)
    rank_rel = levelset.constraint_tangent_rank(rho_t, ln_sigma)
    _, norm_mixed = levelset.relent_constraint(np.eye(3) / 3, rho_t)
    report(7, "constraint tangent-rank dichotomy", {
        "non-commuting rank 3": rank_off == 3,
        "commuting rank < 3": rank_diag < 3,
        "relative-entropy commutator > 0": norm > 0,
        "relative-entropy rank 3": rank_rel == 3,
        "maximally mixed sigma commutes": norm_mixed == 0,
    }, f"ranks {rank_off}/{rank_diag}/{rank_rel}, commutator {norm:.3g}")


def test_8_chart(report):
    rng = np.random.default_rng(8)
    worst_cond, ok_rank = 0.0, True
    for _ in range(50):
        lam = rng.dirichlet(np.ones(3)) * 0.94 + 0.02
        rho = spectral.DensityState.from_spectrum(lam, spectral.random_unitary(3, rng))
        chart = spectral.build_chart(rho)
        ok_rank &= chart.full_rank and chart.eigenvalue_block_rank == 3
        worst_cond = max(worst_cond, chart.jacobian_condition)
    rejected = 0
    for degenerate in (np.eye(3) / 3, np.diag([0.25, 0.25, 0.5])):
        try:
            spectral.build_chart(degenerate)
        except DomainError:
            rejected += 1
    report(8, "diagonalizing chart", {
        "full rank, block rank 3": ok_rank,
        "condition < 1e8": worst_cond < 1e8,
        "degenerate inputs rejected": rejected == 2,
    }, f"50 random states, worst condition {worst_cond:.3g}")


def test_9_tracking_soundness(report):
    l2 = levelset.solve_lambda2(0.28, SLICE, 0.2)
    start = monodromy.LogLiftState.from_real(SLICE, 0.28, l2)
    end, trivial = monodromy.track(PathSpec.circle(0.3, 0.02, start_angle=math.pi), start, SLICE)
    trivial_err = end.distance(start)

    start = monodromy.LogLiftState.from_real(SLICE, 0.2, 0.3)
    path = PathSpec.around_origin(0.2)
    mid, forward = monodromy.track(path, start, SLICE)
    back, backward = monodromy.track(path.reversed(), mid, SLICE)
    reversal_err = back.distance(start)

    residual = max(s.residual(SLICE) for tr in (trivial, forward, backward) for s in tr)
    report(9, "tracking soundness", {
        "trivial loop returns": trivial_err <= 1e-9,
        "reversal is identity": reversal_err <= 1e-9,
        "residual <= 1e-11": residual <= 1e-11,
    }, f"trivial-loop error {trivial_err:.2g}, reversal error {reversal_err:.2g}, "
       f"max residual {residual:.2g}")
