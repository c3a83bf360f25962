"""Command-line interface: ``hetdiff {regime,simulate,density,verify}``.

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 numerical or
resource error.  Every file written is paired with a ``.manifest.json`` that
records the full argument list, so a run can be reproduced exactly.
"""

import argparse
import csv
import dataclasses
import json
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .densities import bessel_density, het_density, killed_density, skew_density
from .errors import DomainError, NumericalError, ResourceError, UnsupportedError
from .model import ModelParams, SkewSpec, classify_regime
from .quadrature import integrate
from .rng import fresh_seed
from .simulate import CONSTRUCTIONS, SimConfig, simulate_het, valid_constructions
from .verify import SUITES, run_suite

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


@dataclass
class RunManifest:
    """What was run, with which seed, and where the output went."""

    command: str
    params: dict
    master_seed: int | None
    version: str = __version__
    wall_time: float = 0.0
    outputs: list = field(default_factory=list)
    argv: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    def write(self, path):
        Path(path).write_text(json.dumps(dataclasses.asdict(self), indent=2) + "\n", encoding="utf-8")


def _manifest_path(out):
    return str(out) + ".manifest.json"


_FLAG_NAMES = {"lam": "lambda"}


def _argv(command, params):
    argv = [command]
    for k, v in params.items():
        if v is None or v is False:
            continue
        flag = "--" + _FLAG_NAMES.get(k, k.replace("_", "-"))
        argv += [flag] if v is True else [flag, str(v)]
    return argv


# ---------------------------------------------------------------------------
# regime


def cmd_regime(args, out=sys.stdout):
    params = ModelParams(args.alpha, args.lam)
    reg = params.regime
    print(f"alpha  = {params.alpha:g}", file=out)
    print(f"lambda = {params.lam:g}", file=out)
    print(f"delta  = {params.delta:.12g}", file=out)
    print(f"nu     = {params.nu:.12g}", file=out)
    print(f"regime = {reg.value}", file=out)
    print(f"at 0:    {reg.behaviour}", file=out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# simulate


def _write_paths_csv(fh, grid):
    # repr gives the shortest round-trip decimal form and is the fastest formatter
    fh.write("path_id,t,x\n")
    t_mid = [f",{t!r}," for t in grid.times.tolist()]
    for i in range(grid.n_paths):
        pid = str(i)
        xs = map(repr, grid.values[i].tolist())
        fh.write("".join([pid + tm + x + "\n" for tm, x in zip(t_mid, xs)]))
    return grid.times.size * grid.n_paths


def cmd_simulate(args, out=sys.stdout):
    params = ModelParams(args.alpha, args.lam)
    construction = args.construction or "auto"
    valid = valid_constructions(params.delta, args.theta)
    if construction != "auto" and construction not in valid:
        raise UsageError(
            f"construction {construction!r} is not available for delta={params.delta:g} "
            f"({params.regime.value}); valid constructions: {', '.join(valid)}"
        )
    seed = fresh_seed() if args.seed is None else args.seed
    cfg = SimConfig(horizon=args.t, steps=args.steps, paths=args.paths, seed=seed,
                    thin=args.thin, threads=args.threads, zero_band=args.zero_band)
    t0 = time.perf_counter()
    grid = simulate_het(args.x0, params, args.theta, cfg, construction=construction)
    chosen = construction if construction != "auto" else valid[0]
    if args.out in (None, "-"):
        _write_paths_csv(out, grid)
        outputs = []
    else:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            _write_paths_csv(fh, grid)
        outputs = [str(args.out)]
    wall = time.perf_counter() - t0
    record = dict(alpha=params.alpha, lam=params.lam, theta=args.theta, x0=args.x0, t=args.t,
                  steps=args.steps, paths=args.paths, seed=seed, construction=chosen,
                  thin=args.thin, zero_band=args.zero_band)
    argv = _argv("simulate", {**record, "out": args.out})
    manifest = RunManifest(
        "simulate", {**record, "delta": params.delta, "regime": params.regime.value}, seed,
        wall_time=wall, outputs=outputs, argv=argv,
        summary={"paths": grid.n_paths, "grid_points": int(grid.times.size),
                 "absorbed": int(np.count_nonzero(grid.absorbed_at >= 0))},
    )
    if outputs:
        manifest.outputs.append(_manifest_path(args.out))
        manifest.write(_manifest_path(args.out))
    else:
        print(json.dumps(dataclasses.asdict(manifest)), file=sys.stderr)
    return EXIT_OK


# ---------------------------------------------------------------------------
# density


def _parse_grid(text):
    try:
        lo, hi, n = text.split(":")
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError as exc:
        raise UsageError(f"--ygrid must look like LO:HI:N, got {text!r}") from exc
    if n < 2 or not hi > lo:
        raise UsageError("--ygrid needs HI > LO and N >= 2")
    return np.linspace(lo, hi, n)


def _density_function(args):
    fam, t, x = args.family, args.t, args.x
    need = {"bessel": ("delta",), "killed": ("delta",), "skew": ("delta",), "het": ("alpha", "lam")}[fam]
    missing = [k for k in need if getattr(args, k) is None]
    if missing:
        raise UsageError(f"family {fam!r} needs --{', --'.join(m.replace('lam', 'lambda') for m in missing)}")
    if fam == "bessel":
        if not args.delta > 0 or x < 0:
            raise UsageError("bessel family needs delta > 0 and x >= 0")
        return (lambda y: bessel_density(t, x, y, args.delta)), (0.0, math.inf), [x]
    if fam == "killed":
        if args.delta >= 2 or x <= 0:
            raise UsageError("killed family needs delta < 2 and x > 0")
        return (lambda y: killed_density(t, x, y, args.delta)), (0.0, math.inf), [x]
    if fam == "skew":
        if not 0 < args.delta < 2:
            raise UsageError("skew family needs 0 < delta < 2")
        return (lambda y: skew_density(t, x, y, args.delta, args.theta)), (-math.inf, math.inf), [0.0, x]
    params = ModelParams(args.alpha, args.lam)

    def het(y):
        y = np.asarray(y, dtype=float)
        out = np.zeros_like(y)
        nz = y != 0
        out[nz] = het_density(t, x, y[nz], params, args.theta)
        return out

    return het, (-math.inf, math.inf), [0.0, x]


def cmd_density(args, out=sys.stdout):
    f, (lo, hi), points = _density_function(args)
    y = _parse_grid(args.ygrid)
    a, b = max(y[0], lo), min(y[-1], hi)
    skipped = 0
    if args.family == "het":
        keep = y != 0
        skipped = int(np.count_nonzero(~keep))
        y = y[keep]
    elif lo == 0.0:
        keep = y >= 0
        skipped = int(np.count_nonzero(~keep))
        y = y[keep]
    p = np.asarray(f(y), dtype=float)
    mass = integrate(f, a, b, points=[q for q in points if a < q < b])
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["y", "p"])
    for yi, pi in zip(y, p):
        w.writerow([repr(float(yi)), repr(float(pi))])
    note = f"# normalization over [{a:g}, {b:g}] = {mass:.12g}"
    if skipped:
        note += f"; {skipped} grid point(s) outside the support or at y=0 omitted"
    out.write(note + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify


_SUITE_KW = {
    "exit": ("delta", "theta"),
    "skew": ("delta", "theta"),
    "trap": ("alpha", "lam", "x0"),
    "balance": ("alpha", "lam", "theta"),
}


def cmd_verify(args, out=sys.stdout):
    seed = fresh_seed() if args.seed is None else args.seed
    base = SimConfig(steps=args.steps, paths=args.paths or 10_000, seed=seed, threads=args.threads)
    kw = {}
    if args.suite != "all":
        kw = {k: getattr(args, k) for k in _SUITE_KW.get(args.suite, ()) if getattr(args, k) is not None}
        if args.suite == "trap" and args.paths is not None:
            kw["paths"] = args.paths
    t0 = time.perf_counter()
    reports = run_suite(args.suite, base, **kw)
    wall = time.perf_counter() - t0
    outputs = []
    outdir = Path(args.out) if args.out else None
    if outdir:
        outdir.mkdir(parents=True, exist_ok=True)
    for r in reports:
        line = r.to_json()
        print(line, file=out)
        if outdir:
            path = outdir / f"{r.test_name}.json"
            path.write_text(line + "\n", encoding="utf-8")
            outputs.append(str(path))
    failed = [r.test_name for r in reports if r.passed is False and not r.diagnostic]
    if outdir:
        record = {"suite": args.suite, "paths": args.paths, "steps": args.steps, "seed": seed, **kw}
        man = outdir / "verify.manifest.json"
        RunManifest("verify", record, seed, wall_time=wall, outputs=outputs + [str(man)],
                    argv=_argv("verify", {**record, "out": args.out}),
                    summary={"failed": failed, "reports": len(reports)}).write(man)
    return EXIT_FAIL if failed else EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def build_parser():
    fmt = argparse.ArgumentDefaultsHelpFormatter
    p = argparse.ArgumentParser(
        prog="hetdiff",
        description="Heterogeneous diffusions through (skew) Bessel processes: "
                    "regimes, path simulation, transition densities and statistical checks.",
    )
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def model_flags(parser, required):
        parser.add_argument("--alpha", type=float, required=required, default=None,
                            help="heterogeneity exponent in (0, 1)")
        parser.add_argument("--lambda", dest="lam", metavar="LAMBDA", type=float, required=required,
                            default=None, help="drift weight in [0, 1]")

    r = sub.add_parser("regime", help="dimension, index and regime for (alpha, lambda)", formatter_class=fmt)
    model_flags(r, True)

    s = sub.add_parser("simulate", help="simulate paths of X and write CSV path_id,t,x", formatter_class=fmt)
    model_flags(s, True)
    s.add_argument("--theta", type=float, default=0.0, help="skewness in [-1, 1]")
    s.add_argument("--x0", type=float, default=1.0, help="start point")
    s.add_argument("--t", type=float, default=1.0, help="horizon")
    s.add_argument("--steps", type=_positive_int, default=4096, help="time steps on [0, t]")
    s.add_argument("--paths", type=_positive_int, default=100, help="number of paths")
    s.add_argument("--seed", type=int, default=None, help="master seed (drawn from entropy if absent)")
    s.add_argument("--out", default=None, help="CSV file (stdout if absent)")
    s.add_argument("--construction", choices=CONSTRUCTIONS, default=None,
                   help="path construction (None picks one by regime)")
    s.add_argument("--thin", type=_positive_int, default=1, help="keep every k-th grid point")
    s.add_argument("--threads", type=_positive_int, default=None,
                   help="worker cap (env HETDIFF_THREADS, else CPU count); output does not depend on it")
    s.add_argument("--zero-band", type=float, default=None,
                   help="numerical zero threshold (None means 1e-9 * max(1, |x0|))")

    d = sub.add_parser("density", help="tabulate a transition density as CSV y,p", formatter_class=fmt)
    d.add_argument("--family", choices=("bessel", "killed", "skew", "het"), required=True,
                   help="which transition density")
    d.add_argument("--delta", type=float, default=None, help="dimension (bessel, killed, skew)")
    d.add_argument("--theta", type=float, default=0.0, help="skewness (skew, het)")
    model_flags(d, False)
    d.add_argument("--t", type=float, default=1.0, help="elapsed time")
    d.add_argument("--x", type=float, default=1.0, help="start point")
    d.add_argument("--ygrid", default="-5:5:201",
                   help="evaluation grid LO:HI:N (write --ygrid=LO:HI:N when LO is negative)")

    v = sub.add_parser("verify", help="run statistical checks and print one JSON report per test",
                       formatter_class=fmt)
    v.add_argument("--suite", choices=(*SUITES, "all"), default="all", help="which checks to run")
    v.add_argument("--paths", type=_positive_int, default=None,
                   help="paths per simulation; unset means 10000, or 1000 for the trap suite")
    v.add_argument("--steps", type=_positive_int, default=4096, help="time steps per unit horizon")
    v.add_argument("--seed", type=int, default=None, help="master seed (drawn from entropy if absent)")
    v.add_argument("--threads", type=_positive_int, default=None, help="worker cap; output does not depend on it")
    model_flags(v, False)
    v.add_argument("--delta", type=float, default=None, help="dimension (exit, skew suites)")
    v.add_argument("--theta", type=float, default=None, help="skewness (exit, skew, balance suites)")
    v.add_argument("--x0", type=float, default=None, help="start point (trap suite)")
    v.add_argument("--out", default=None, help="directory for per-test JSON files and a manifest")
    return p


_COMMANDS = {"regime": cmd_regime, "simulate": cmd_simulate, "density": cmd_density, "verify": cmd_verify}


def main(argv=None, out=None):
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return _COMMANDS[args.command](args, out=out)
    except (UsageError, DomainError, UnsupportedError) as exc:
        print(f"hetdiff {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericalError, ResourceError) as exc:
        print(f"hetdiff {args.command}: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
