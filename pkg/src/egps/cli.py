"""Command line interface: ``egps solve | sweep | flattop | nondim | reduce``.

Exit codes: 0 ground state found (or report printed), 1 bad input,
2 no ground state (spreading), 3 iteration cap reached.
"""
from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from . import _backend
from .analysis import eta_indicator, flat_top_estimate, phase_sweep, sweep_axes
from .errors import DomainError, NumericalError, PreconditionError
from .gflow import (Classification, SolverConfig, default_initial_gaussian, make_solver,
                    run_to_convergence)
from .grid import TensorGrid
from .model import Harmonic, ModelParams, PhysicalParams, nondimensionalize, reduce_dimension
from .radial import RadialGrid
from .records import (ConfigError, RunRecord, fmt, model_to_dict, parse_config,
                      parse_potential, result_summary, write_field_dump, write_sweep_csv)

EXIT_OK, EXIT_BAD_INPUT, EXIT_SPREADING, EXIT_MAX_ITER = 0, 1, 2, 3
EXIT_CODES = {
    Classification.GROUND_STATE: EXIT_OK,
    Classification.SPREADING: EXIT_SPREADING,
    Classification.MAX_ITERATIONS: EXIT_MAX_ITER,
}

DEFAULTS = {
    "dim": 3, "radial": False, "beta": 0.0, "lambda": 0.0, "c": 1.0, "R": 1.0, "M": 2048,
    "n": "128", "extent": None, "potential": "zero", "harmonic": None, "tau": 1e-2,
    "tol": None, "metric": None, "max_iter": 100_000, "width": None, "theta": 0.99,
    "linear_tol": 1e-10, "spread_window": 200,
}


def _ints(text):
    return tuple(int(x) for x in str(text).split(","))


def _floats(text):
    return tuple(float(x) for x in str(text).split(","))


def _extents(text, dim):
    vals = _floats(text)
    if len(vals) == 1:
        return ((-vals[0], vals[0]),) * dim
    if len(vals) == 2:
        return ((vals[0], vals[1]),) * dim
    if len(vals) == 2 * dim:
        return tuple((vals[2 * i], vals[2 * i + 1]) for i in range(dim))
    raise DomainError(f"extent needs 1, 2 or {2 * dim} numbers")


def _default_extent(pot, dim):
    """``[-1, 1]`` per axis, widened for a harmonic trap to eight oscillator lengths."""
    if isinstance(pot, Harmonic):
        pairs = []
        for g in pot.gammas(dim):
            half = 8.0 / g ** 0.5 if g > 0 else 1.0
            pairs += [-max(half, 1.0), max(half, 1.0)]
        return ",".join(repr(x) for x in pairs)
    return "1"


def build_run(opts: dict):
    """Turn merged options into ``(model, grid, config, width)``."""
    dim = int(opts["dim"])
    pot = parse_potential(opts["potential"])
    if opts.get("harmonic") is not None:
        pot = Harmonic(_floats(opts["harmonic"]))
    m = ModelParams(dim, float(opts["beta"]), float(opts["lambda"]), float(opts["c"]), pot)
    if opts["radial"]:
        grid = RadialGrid(dim, float(opts["R"]), int(opts["M"]))
        base = SolverConfig.radial
    else:
        counts = _ints(opts["n"])
        extent = opts.get("extent")
        if extent is None:
            extent = _default_extent(pot, dim)
        grid = TensorGrid(dim, _extents(extent, dim),
                          counts if len(counts) > 1 else counts * dim)
        base = SolverConfig.tensor
    kw = {"time_step": float(opts["tau"]), "max_iterations": int(opts["max_iter"]),
          "linear_tolerance": float(opts["linear_tol"]),
          "spread_window": int(opts["spread_window"])}
    if opts.get("tol") is not None:
        kw["stop_tolerance"] = float(opts["tol"])
    if opts.get("metric") is not None:
        kw["stop_metric"] = opts["metric"]
    return m, grid, base(**kw), opts.get("width")


def execute(m, grid, config, width, theta=0.99):
    """Run one solve; returns ``(result, summary)``."""
    initial = default_initial_gaussian(grid, m.c, width)
    t0 = time.perf_counter()
    result = run_to_convergence(initial, m, config, make_solver(grid, config))
    wall = time.perf_counter() - t0
    eta = eta_indicator(result.field, theta) if result.converged else None
    return result, result_summary(result, eta, theta, wall, _backend.BACKEND)


def _merge_solve_options(args) -> dict:
    opts = dict(DEFAULTS)
    if args.config:
        path = Path(args.config)
        opts.update(parse_config(path.read_text(), str(path)))
    for key in DEFAULTS:
        value = getattr(args, key.replace("-", "_"), None)
        if value is not None and value is not False:
            opts[key] = value
    return opts


def cmd_solve(args) -> int:
    theta = args.theta if args.theta is not None else 0.99
    if args.from_record:
        rec = RunRecord.from_json(Path(args.from_record).read_text())
        m, grid, config, width = (rec.model_params(), rec.make_grid(), rec.solver_config(),
                                  rec.initial_width)
        theta = rec.result.get("theta") or theta
    else:
        opts = _merge_solve_options(args)
        m, grid, config, width = build_run(opts)
        theta = opts["theta"]
    result, summary = execute(m, grid, config, width, theta)
    rec = RunRecord(model=model_to_dict(m), grid=grid.spec(), config=config.to_dict(),
                    result=summary, initial_width=width)
    text = rec.to_json()
    if args.record:
        Path(args.record).write_text(text)
    else:
        sys.stdout.write(text)
    if args.dump_field:
        with open(args.dump_field, "w") as fh:
            write_field_dump(result.field, m.c, fh)
    print(f"{result.classification.value}: E={fmt(result.energy)} "
          f"mu={fmt(result.chemical_potential)} peak={fmt(result.peak_value)} "
          f"iterations={result.iterations}", file=sys.stderr)
    return EXIT_CODES[result.classification]


def cmd_sweep(args) -> int:
    b0, b1 = _floats(args.beta_range)
    l0, l1 = _floats(args.lambda_range)
    res = _ints(args.resolution)
    betas, lambdas = sweep_axes((b0, b1), (l0, l1), res if len(res) > 1 else res[0])
    grid = RadialGrid(3, args.R, args.M)
    config = SolverConfig.radial(stop_tolerance=args.tol, time_step=args.tau,
                                 max_iterations=args.max_iter)
    if args.workers < 1:
        raise DomainError("worker count must be at least 1")
    cells = phase_sweep(None, None, theta=args.theta, eta_threshold=args.threshold,
                        config=config, grid=grid, workers=args.workers,
                        warm_start=not args.no_warm_start, betas=betas, lambdas=lambdas)
    meta = {"theta": fmt(args.theta), "threshold": fmt(args.threshold),
            "grid": f"radial d=3 R={fmt(args.R)} M={args.M}", "tol": fmt(args.tol)}
    if args.output:
        with open(args.output, "w", newline="") as fh:
            write_sweep_csv(cells, fh, meta)
    else:
        write_sweep_csv(cells, sys.stdout, meta)
    return EXIT_OK


def cmd_flattop(args) -> int:
    m = ModelParams(3, args.beta, args.lam, args.c)
    est = flat_top_estimate(m)
    print(f"a={fmt(est.plateau_value)}")
    print(f"E_app_min={fmt(est.approx_energy)}")
    print(f"support_volume={fmt(est.support_volume)}")
    if args.compare:
        rec = RunRecord.from_json(Path(args.compare).read_text())
        r = rec.result
        if r["classification"] != Classification.GROUND_STATE.value:
            raise PreconditionError(f"record classification is {r['classification']}")
        peak, en = r["peak_value"], r["energy"]
        print(f"e_a={fmt(abs(peak - est.plateau_value) / abs(peak))}")
        print(f"e_E={fmt(abs(en - est.approx_energy) / abs(en))}")
    return EXIT_OK


def cmd_nondim(args) -> int:
    p = PhysicalParams(args.mass, args.scattering_length, args.particles, args.length_scale,
                       args.lhy_constant, args.c)
    beta, lam = nondimensionalize(p)
    print(f"beta={fmt(beta)}")
    print(f"lambda={fmt(lam)}")
    return EXIT_OK


def cmd_reduce(args) -> int:
    gam = _floats(args.gamma) if args.gamma else (0.0,)
    m = ModelParams(3, args.beta, args.lam, 1.0, Harmonic(gam))
    red = reduce_dimension(m, args.sigma, args.case)
    print(f"beta_{red.target_dimension}={fmt(red.beta_reduced)}")
    print(f"lambda_{red.target_dimension}={fmt(red.lambda_reduced)}")
    print(f"C={fmt(red.phase_constant)}")
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    """Usage errors are bad input (exit 1); exit 2 means "no ground state"."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_BAD_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="egps", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="compute one ground state")
    s.add_argument("--config", help="flat 'key = value' file; flags override it")
    s.add_argument("--from-record", help="re-run the setup stored in a run record")
    s.add_argument("--dim", type=int)
    s.add_argument("--radial", action="store_true", default=None)
    s.add_argument("--beta", type=float)
    s.add_argument("--lambda", dest="lambda", type=float)
    s.add_argument("--c", type=float)
    s.add_argument("--R", type=float)
    s.add_argument("--M", type=int)
    s.add_argument("--n", help="interior nodes per axis, e.g. 256 or 128,128,256")
    s.add_argument("--extent", help="half-width, or a,b, or per-axis a,b pairs "
                   "(default 1, or eight oscillator lengths for a harmonic trap)")
    s.add_argument("--potential", help="zero | harmonic:g[,g,g] | lattice:V0,k | power:coef,exp")
    s.add_argument("--harmonic", help="shorthand for --potential harmonic:...")
    s.add_argument("--tau", type=float)
    s.add_argument("--tol", type=float)
    s.add_argument("--metric", choices=["max_diff", "l2_diff"])
    s.add_argument("--max-iter", dest="max_iter", type=int)
    s.add_argument("--linear-tol", dest="linear_tol", type=float)
    s.add_argument("--spread-window", dest="spread_window", type=int)
    s.add_argument("--width", type=float, help="initial Gaussian width")
    s.add_argument("--theta", type=float)
    s.add_argument("--record", help="write the run record here instead of stdout")
    s.add_argument("--dump-field", help="write the converged field as CSV")
    s.set_defaults(func=cmd_solve)

    w = sub.add_parser("sweep", help="(beta, lambda) phase diagram of the 3D free-space problem")
    w.add_argument("--beta-range", default="-25,-1")
    w.add_argument("--lambda-range", default="0.002,1")
    w.add_argument("--resolution", default="8", help="points per axis, or nb,nl")
    w.add_argument("--theta", type=float, default=0.99)
    w.add_argument("--threshold", type=float, default=0.62)
    w.add_argument("--R", type=float, default=1.0)
    w.add_argument("--M", type=int, default=8192)
    w.add_argument("--tau", type=float, default=1e-2)
    w.add_argument("--tol", type=float, default=1e-10)
    w.add_argument("--max-iter", dest="max_iter", type=int, default=100_000)
    w.add_argument("--workers", type=int, default=1)
    w.add_argument("--no-warm-start", action="store_true")
    w.add_argument("--output", "-o")
    w.set_defaults(func=cmd_sweep)

    f = sub.add_parser("flattop", help="flat-top droplet estimate")
    f.add_argument("--beta", type=float, required=True)
    f.add_argument("--lambda", dest="lam", type=float, required=True)
    f.add_argument("--c", type=float, default=1.0)
    f.add_argument("--compare", help="run record to compare against")
    f.set_defaults(func=cmd_flattop)

    n = sub.add_parser("nondim", help="dimensionless beta and lambda from physical inputs")
    n.add_argument("--mass", type=float, required=True)
    n.add_argument("--scattering-length", type=float, required=True)
    n.add_argument("--particles", type=float, required=True)
    n.add_argument("--length-scale", type=float, required=True)
    n.add_argument("--lhy-constant", type=float, required=True)
    n.add_argument("--c", type=float, default=1.0)
    n.set_defaults(func=cmd_nondim)

    r = sub.add_parser("reduce", help="coefficients of the disk (2D) or cigar (1D) model")
    r.add_argument("--beta", type=float, required=True)
    r.add_argument("--lambda", dest="lam", type=float, required=True)
    r.add_argument("--sigma", type=float, required=True)
    r.add_argument("--case", choices=["disk", "cigar"], required=True)
    r.add_argument("--gamma", help="trap frequencies gx,gy,gz (or one value)")
    r.set_defaults(func=cmd_reduce)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, DomainError, PreconditionError, NumericalError, ValueError,
            OSError, KeyError) as exc:
        print(f"egps {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
