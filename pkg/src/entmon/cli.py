"""Command-line front end.

Exit codes: 0 on success (and passing checks), 2 for invalid input, 3 for
numerical or tracking failures and failed checks.
"""

from __future__ import annotations

import argparse
import cmath
import csv
import io
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import classifier, levelset, monodromy, spectral
from .errors import (
    ConfigurationError,
    DomainError,
    EntmonError,
    InternalConsistencyError,
    TrackingError,
    UnsupportedInputError,
    ValidationError,
)
from .report import dumps, write_trace_csv

log = logging.getLogger("entmon")

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NUMERIC = 3
WITNESS_TOL = 1e-10


@dataclass
class RunConfig:
    subcommand: str
    out: Path | None = None
    seed: int = 0
    tol_newton: float = monodromy.NEWTON_TOL
    tol_lattice: float = monodromy.LATTICE_TOL
    exclusion_radius: float | None = None
    inputs: list[Path] = field(default_factory=list)

    def __post_init__(self):
        for name in ("tol_newton", "tol_lattice", "exclusion_radius"):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise ValidationError(f"--{name.replace('_', '-')} must be positive")
        for p in self.inputs:
            if not p.exists():
                raise ValidationError(f"input file {p} does not exist")


# -- argument parsing helpers ----------------------------------------------------------


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise ValidationError(f"expected comma-separated numbers, got {text!r}") from None


def _load_json(text: str) -> dict:
    """Inline JSON or a path to a JSON file."""
    src = text
    if not text.lstrip().startswith(("{", "[")):
        path = Path(text)
        if not path.exists():
            raise ValidationError(f"{text!r} is neither JSON nor an existing file")
        src = path.read_text()
    try:
        return json.loads(src)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"invalid JSON: {exc}") from None


def parse_matrix(text: str) -> np.ndarray:
    """``diag:a,b,c``, ``identity/d``, inline JSON or a JSON file."""
    text = text.strip()
    if text.startswith("diag:"):
        return np.diag(_floats(text[5:])).astype(complex)
    if text.startswith("identity/"):
        try:
            d = int(text.split("/", 1)[1])
        except ValueError:
            raise ValidationError(f"bad identity spec {text!r}") from None
        return np.eye(d, dtype=complex) / d
    obj = _load_json(text)
    if "spectrum" in obj:
        return spectral.DensityState.from_json(obj).matrix
    try:
        d = int(obj["dim"])
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj.get("im", np.zeros((d, d))), dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"bad matrix JSON: {exc!r}") from None
    if re.shape != (d, d) or im.shape != (d, d):
        raise ValidationError("matrix JSON does not match its dim")
    return re + 1j * im


def perturb_offdiag(m: np.ndarray) -> np.ndarray:
    """Add a real symmetric off-diagonal term small enough to keep ``m`` positive."""
    d = m.shape[0]
    lam_min = float(np.linalg.eigvalsh(m)[0])
    eps = 0.25 * lam_min / max(d - 1, 1)
    return m + eps * (np.ones((d, d)) - np.eye(d))


def _slice_from_args(args) -> tuple[levelset.LevelSetSlice, float | None, float | None]:
    """Slice plus the requested start ``xi1`` and ``lambda2`` seed (if implied)."""
    tail = _floats(args.tail) if args.tail else []
    if args.slice:
        obj = _load_json(args.slice)
        sl = levelset.LevelSetSlice.from_json(obj)
        if "through" in obj:
            return sl, float(obj["through"][0]), float(obj["through"][1])
        return sl, obj.get("xi1"), None
    if args.through:
        pt = _floats(args.through)
        if len(pt) != 2:
            raise ValidationError("--through takes two numbers lambda1,lambda2")
        return levelset.LevelSetSlice.through(pt, tail), pt[0], pt[1]
    if args.c is not None:
        return levelset.LevelSetSlice(d=len(tail) + 3, c=args.c, tail=tuple(tail)), None, None
    raise ValidationError("give a level slice with --through, --c or --slice")


def _emit(cfg: RunConfig, report: dict) -> None:
    text = dumps(report)
    if cfg.out is None:
        sys.stdout.write(text)
    else:
        cfg.out.write_text(text)


# -- subcommands -------------------------------------------------------------------------


def cmd_classify(cfg: RunConfig, args) -> int:
    if args.input:
        obj = _load_json(args.input)
        spectrum, base = obj.get("spectrum"), str(obj.get("base", args.base))
        if spectrum is None:
            raise ValidationError("input JSON lacks 'spectrum'")
    elif args.spectrum:
        spectrum, base = [s for s in args.spectrum.split(",") if s.strip()], args.base
    else:
        raise ValidationError("give --spectrum or --input")
    result = classifier.classify(spectrum, base)
    _emit(cfg, {"command": "classify", "spectrum": [str(s).strip() for s in spectrum],
                **result.to_dict()})
    return EXIT_OK


def _path_from_args(args, xi1: float) -> monodromy.PathSpec | None:
    kw = {"steps_per_unit_arc": args.steps_per_unit_arc}
    if args.polyline:
        try:
            verts = [complex(t.strip().replace(" ", "")) for t in args.polyline.split(",") if t.strip()]
        except ValueError:
            raise ValidationError(f"bad polyline {args.polyline!r}") from None
        return monodromy.PathSpec.polyline(verts, **kw)
    if args.center is not None:
        try:
            center = complex(args.center.replace(" ", ""))
        except ValueError:
            raise ValidationError(f"bad center {args.center!r}") from None
        offset = xi1 - center
        return monodromy.PathSpec.circle(center, abs(offset), orientation=args.orientation,
                                         start_angle=cmath.phase(offset), **kw)
    if args.orientation != 1:
        return monodromy.PathSpec.around_origin(xi1, **kw).reversed()
    return None


def cmd_monodromy(cfg: RunConfig, args) -> int:
    sl, xi1, seed = _slice_from_args(args)
    if args.xi1 is not None:
        xi1, seed = args.xi1, args.lambda2_seed
    if xi1 is None:
        raise ValidationError("no start point: give --xi1 (or --through)")
    xi1 = float(xi1)
    path = _path_from_args(args, xi1)
    ledger = monodromy.run_monodromy(
        sl, xi1, path, args.batches, lambda2_seed=seed, k_max=args.k_max,
        exclusion_radius=cfg.exclusion_radius, lattice_tol=cfg.tol_lattice,
        newton_tol=cfg.tol_newton, keep_trace=bool(args.trace),
    )
    if args.trace:
        with open(args.trace, "w", newline="") as fh:
            write_trace_csv(fh, ledger.trace, sl)
    report = {"command": "monodromy", **ledger.to_dict()}
    _emit(cfg, report)
    return EXIT_OK if ledger.distinct() else EXIT_NUMERIC


def cmd_levelset(cfg: RunConfig, args) -> int:
    sl, _, _ = _slice_from_args(args)
    lo, hi = _floats(args.range)
    if args.points < 1:
        raise ValidationError("--points must be positive")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["lambda1", "lambda2", "grad1", "grad2", "gauss_ratio",
                     "dlambda2", "d2lambda2", "f_prime"])
    for l1 in np.linspace(lo, hi, args.points):
        pt = sl.point_at(float(l1), args.branch)
        g = levelset.grad_F(sl.full_point(pt.lambda1, pt.lambda2))
        der = levelset.lambda2_derivatives(pt, sl)
        ratio = levelset.gauss_ratio(sl.full_point(pt.lambda1, pt.lambda2))
        writer.writerow([format(v, ".17g") for v in
                         (pt.lambda1, pt.lambda2, g[0], g[1], ratio, der.first, der.second, der.f_prime)])
    if cfg.out is None:
        sys.stdout.write(buf.getvalue())
    else:
        cfg.out.write_text(buf.getvalue())
    return EXIT_OK


def cmd_witness_d2(cfg: RunConfig, args) -> int:
    dev = levelset.d2_witness(args.c, args.samples, seed=cfg.seed)
    p = levelset.binary_entropy_root(args.c)
    ok = dev <= WITNESS_TOL
    _emit(cfg, {"command": "witness-d2", "c": args.c, "samples": args.samples, "seed": cfg.seed,
                "eigenvalue": p, "purity": p * p + (1 - p) ** 2,
                "max_deviation": dev, "tolerance": WITNESS_TOL, "pass": ok})
    return EXIT_OK if ok else EXIT_NUMERIC


def cmd_tangent_rank(cfg: RunConfig, args) -> int:
    rho_m = parse_matrix(args.rho)
    if args.perturb == "offdiag":
        rho_m = perturb_offdiag(rho_m)
    rho = spectral.DensityState(rho_m)
    report = {"command": "tangent-rank", "dim": rho.dim, "perturb": args.perturb}
    if args.sigma:
        grad_h, norm = levelset.relent_constraint(spectral.DensityState(parse_matrix(args.sigma)), rho)
        report["constraint"] = "relative-entropy"
    elif args.grad_h:
        grad_h = spectral.hermitian(parse_matrix(args.grad_h))
        norm = float(np.linalg.norm(spectral.commutator(rho.matrix, grad_h)))
        report["constraint"] = "gradient"
    else:
        raise ValidationError("give --sigma or --grad-h")
    report["rank"] = levelset.constraint_tangent_rank(rho, grad_h)
    report["commutator_norm"] = norm
    _emit(cfg, report)
    return EXIT_OK


def cmd_chart(cfg: RunConfig, args) -> int:
    rho = spectral.DensityState(parse_matrix(args.rho))
    chart = spectral.build_chart(rho)
    _emit(cfg, {"command": "chart", "dim": rho.dim,
                "eigenvalues": list(rho.spectrum.eigenvalues),
                "selected_rows": chart.selected_rows,
                "deleted_coordinates": chart.deleted_coordinates,
                "jacobian_condition": chart.jacobian_condition,
                "full_rank": chart.full_rank,
                "eigenvalue_block_rank": chart.eigenvalue_block_rank})
    return EXIT_OK if chart.full_rank else EXIT_NUMERIC


# -- parser ------------------------------------------------------------------------------


def _global_options(parser: argparse.ArgumentParser, suppress: bool) -> None:
    def default(v):
        return argparse.SUPPRESS if suppress else v

    parser.add_argument("--out", type=Path, default=default(None), help="write the report here")
    parser.add_argument("--seed", type=int, default=default(0))
    parser.add_argument("--tol-newton", type=float, default=default(monodromy.NEWTON_TOL))
    parser.add_argument("--tol-lattice", type=float, default=default(monodromy.LATTICE_TOL))
    parser.add_argument("--exclusion-radius", type=float, default=default(None))


def _slice_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--through", help="lambda1,lambda2 fixing the level and start point")
    p.add_argument("--c", type=float, help="entropy level in nats")
    p.add_argument("--tail", help="frozen eigenvalues xi_3..xi_{d-1}, comma separated")
    p.add_argument("--slice", help="slice JSON (inline or file)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="entmon", description=__doc__.splitlines()[0])
    _global_options(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_options(common, suppress=True)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("classify", parents=[common], help="zero/rational/transcendental entropy")
    p.add_argument("--spectrum", help="comma-separated exact rationals, e.g. 1/2,1/4,1/4")
    p.add_argument("--base", default="e", help="'e' or a rational > 1")
    p.add_argument("--input", help="JSON with 'spectrum' and optional 'base'")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("monodromy", parents=[common], help="continue the level curve around loops")
    _slice_options(p)
    p.add_argument("--xi1", type=float)
    p.add_argument("--lambda2-seed", type=float)
    p.add_argument("--batches", type=int, default=5)
    p.add_argument("--k-max", type=int, default=monodromy.K_MAX)
    p.add_argument("--center", help="circle centre (complex, e.g. 0.1+0.05j)")
    p.add_argument("--orientation", type=int, choices=(1, -1), default=1)
    p.add_argument("--polyline", help="comma-separated complex vertices of a closed loop")
    p.add_argument("--steps-per-unit-arc", type=int, default=monodromy.STEPS_PER_UNIT_ARC)
    p.add_argument("--trace", help="CSV file for the full continuation trace")
    p.set_defaults(func=cmd_monodromy)

    p = sub.add_parser("levelset", parents=[common], help="sample the real level curve to CSV")
    _slice_options(p)
    p.add_argument("--range", required=True, help="lambda1 interval lo,hi")
    p.add_argument("--points", type=int, default=50)
    p.add_argument("--branch", choices=("lower", "upper"), default="lower")
    p.set_defaults(func=cmd_levelset)

    p = sub.add_parser("witness-d2", parents=[common], help="qubit purity witness")
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--samples", type=int, default=200)
    p.set_defaults(func=cmd_witness_d2)

    p = sub.add_parser("tangent-rank", parents=[common], help="constraint tangent-space rank")
    p.add_argument("--rho", required=True)
    p.add_argument("--sigma", help="reference state; the constraint gradient is ln(sigma)")
    p.add_argument("--grad-h", help="explicit constraint gradient")
    p.add_argument("--perturb", choices=("none", "offdiag"), default="none")
    p.set_defaults(func=cmd_tangent_rank)

    p = sub.add_parser("chart", parents=[common], help="diagonalizing chart Jacobian")
    p.add_argument("--rho", required=True)
    p.set_defaults(func=cmd_chart)
    return parser


def _configure_logging() -> None:
    level = os.environ.get("ENTMON_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def main(argv: list[str] | None = None) -> int:
    _configure_logging()
    args = build_parser().parse_args(argv)
    try:
        inputs = [Path(v) for v in (getattr(args, "input", None),) if v]
        cfg = RunConfig(args.subcommand, out=args.out, seed=args.seed, tol_newton=args.tol_newton,
                        tol_lattice=args.tol_lattice, exclusion_radius=args.exclusion_radius,
                        inputs=inputs)
        return args.func(cfg, args)
    except (ValidationError, DomainError, UnsupportedInputError) as exc:
        print(f"entmon: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ConfigurationError, TrackingError, InternalConsistencyError) as exc:
        print(f"entmon: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except EntmonError as exc:  # pragma: no cover
        print(f"entmon: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
