"""Command-line interface: simulate, pseudo, fit, lps, predict, density.

Exit codes: 0 success, 1 usage or parameter error, 2 data validation
error (bad CSV, bad draw file, unreadable or unwritable path), 3 internal
invariant violation in the sampler.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from ._rng import make_rng
from .data import (
    DataError,
    MixtureSimConfig,
    pseudo_observations,
    read_matrix,
    read_sample,
    simulate_mixture,
    write_matrix,
    write_sample,
)
from .drawfile import DrawFileError, DrawHeader, read_draws, write_draws
from .evaluation import density_grid, lps, lps_parametric, predictive_sample
from .parametric import CopulaFamily, ParametricCopula, fit_mle, sample as sample_copula, tau_to_param
from .partition import Family
from .sampler import SamplerConfig, SamplerError, run_chain

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3

MODELS = {"negbinc": Family.NEGBINOMIAL, "bernsteincbp": Family.BINOMIAL}
MODEL_NAMES = {v: k for k, v in MODELS.items()}

# stream ids under the run seed, so commands never share random numbers
STREAM_SIMULATE, STREAM_PREDICT = 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _floats(text: str, n: int, name: str):
    try:
        vals = tuple(float(t) for t in text.split(","))
    except ValueError:
        raise UsageError(f"{name} must be {n} comma-separated numbers") from None
    if len(vals) != n:
        raise UsageError(f"{name} must be {n} comma-separated numbers")
    return vals


def _model_label(family: Family, rotated: bool) -> str:
    return ("rot-" if rotated else "") + MODEL_NAMES[family]


def _parametric(family: str, param, tau, rotated: bool) -> ParametricCopula:
    if (param is None) == (tau is None):
        raise UsageError("give exactly one of --param and --tau")
    if tau is not None:
        p = tau_to_param(family, tau)
    else:
        p = param
    return ParametricCopula(family, p, rotated)


def cmd_simulate(args) -> int:
    rng = make_rng(args.seed, STREAM_SIMULATE)
    if args.family == "mixture":
        cfg = MixtureSimConfig(
            weight=args.weight,
            gamma=args.gamma,
            rho=args.rho,
            means=_floats(args.means, 4, "--means"),
            sds=_floats(args.sds, 4, "--sds"),
        )
        raw, cop = simulate_mixture(cfg, args.n, rng)
        write_sample(args.out, cop)
        if args.raw_out:
            write_matrix(args.raw_out, raw, header=("x1", "x2"))
    else:
        cop = _parametric(args.family, args.param, args.tau, args.rotated)
        write_sample(args.out, sample_copula(cop, args.n, rng))
    return EXIT_OK


def cmd_pseudo(args) -> int:
    raw = read_matrix(args.input)
    if raw.shape[1] != 2:
        raise DataError(f"{args.input}: expected two columns, got {raw.shape[1]}")
    write_sample(args.out, pseudo_observations(raw))
    return EXIT_OK


def cmd_fit(args) -> int:
    data = read_sample(args.data)
    family = MODELS[args.model]
    config = SamplerConfig(
        family=family,
        rotated=args.rotated,
        concentration=args.concentration,
        theta_prior=args.theta_prior,
        iterations=args.iterations,
        burnin=args.burnin,
        thin=args.thin,
        seed=args.seed,
    )
    progress = None
    if args.verbose:
        every = max(1, config.iterations // 20)

        def progress(it, state):
            if (it + 1) % every == 0:
                print(f"iteration {it + 1}/{config.iterations}: theta={state.theta:.4g} "
                      f"occupied={state.occupied()}", file=sys.stderr)

    result = run_chain(data, config, progress=progress)
    header = DrawHeader(
        family=family,
        rotated=args.rotated,
        concentration=args.concentration,
        seed=args.seed,
        config=config.as_dict(),
    )
    write_draws(args.out, result.draws, header)
    log = result.summary()
    log["model"] = _model_label(family, args.rotated)
    log["data"] = str(args.data)
    log["n_train"] = int(data.shape[0])
    text = json.dumps(log, indent=2, sort_keys=True)
    if args.log:
        with open(args.log, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return EXIT_OK


def cmd_lps(args) -> int:
    test = read_sample(args.test)
    reports = []
    for path in args.draws or []:
        header, draws = read_draws(path)
        label = f"{_model_label(header.family, header.rotated)}:{path}"
        reports.append(lps(draws, header.family, test, header.rotated, model=label))
    families = args.family or []
    if (args.param is not None or args.tau is not None) and len(families) != 1:
        raise UsageError("--param/--tau need exactly one --family")
    if families and args.train is None and args.param is None and args.tau is None:
        raise UsageError("parametric models need --train (maximum likelihood) or --param/--tau")
    train = read_sample(args.train) if args.train else None
    for fam in families:
        if fam not in CopulaFamily._value2member_map_:
            raise UsageError(f"unknown copula family {fam!r}")
        if train is not None:
            cop = fit_mle(fam, train, rotated=args.rotated)
        else:
            cop = _parametric(fam, args.param, args.tau, args.rotated)
        reports.append(lps_parametric(cop, test))
    if not reports:
        raise UsageError("nothing to score: give --draws and/or --family")
    reports.sort(key=lambda r: r.mean, reverse=True)
    lines = ["model,lps_mean,lps_total,n_test,n_draws"]
    for r in reports:
        lines.append(f"{r.model},{r.mean:.17g},{r.total:.17g},{r.n_test},{r.n_draws}")
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_predict(args) -> int:
    header, draws = read_draws(args.draws)
    rng = make_rng(args.seed, STREAM_PREDICT)
    out = predictive_sample(draws, header.family, args.m, rng, header.rotated, header.concentration)
    write_sample(args.out, out)
    return EXIT_OK


def cmd_density(args) -> int:
    header, draws = read_draws(args.draws)
    grid = density_grid(draws, header.family, args.resolution, header.rotated)
    names = [f"v{k}" for k in range(args.resolution)]
    write_matrix(args.out, grid, header=names)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gpucopula", description="Random GPU copulas under a Dirichlet process prior.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="simulate a copula sample")
    s.add_argument("--family", required=True, choices=[f.value for f in CopulaFamily] + ["mixture"])
    s.add_argument("--tau", type=float, help="Kendall's tau (parametric families)")
    s.add_argument("--param", type=float, help="copula parameter (parametric families)")
    s.add_argument("--rotated", action="store_true", help="rotate by 180 degrees")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--weight", type=float, default=0.5, help="mixture weight of the Clayton component")
    s.add_argument("--gamma", type=float, default=6.0, help="Clayton parameter of the mixture")
    s.add_argument("--rho", type=float, default=0.6, help="Gaussian correlation of the mixture")
    s.add_argument("--means", default="0,0,0,2", help="mu11,mu12,mu21,mu22")
    s.add_argument("--sds", default="1,1,1,1", help="sd11,sd12,sd21,sd22")
    s.add_argument("--raw-out", help="also write the raw mixture data here")
    s.add_argument("-o", "--out", required=True)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("pseudo", help="rank-transform a two-column CSV into pseudo-observations")
    s.add_argument("input")
    s.add_argument("-o", "--out", required=True)
    s.set_defaults(func=cmd_pseudo)

    s = sub.add_parser("fit", help="run the slice sampler and write a draw file")
    s.add_argument("data")
    s.add_argument("--model", choices=sorted(MODELS), default="negbinc")
    s.add_argument("--rotated", action="store_true", help="evaluate kernels at (1-u, 1-v); lower-tail dependence for negbinc")
    s.add_argument("--iterations", type=int, default=20_000)
    s.add_argument("--burnin", type=int, default=10_000)
    s.add_argument("--thin", type=int, default=1)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--concentration", type=float, default=1.0, help="DP concentration M")
    s.add_argument("--theta-prior", default=None,
                   help="e.g. gamma:2,0.1  lognormal:2,1  flat:1,50  geometric:0.95")
    s.add_argument("-o", "--out", required=True, help="draw file")
    s.add_argument("--log", help="write the JSON run log here instead of stdout")
    s.add_argument("-v", "--verbose", action="store_true")
    s.set_defaults(func=cmd_fit)

    s = sub.add_parser("lps", help="log predictive scores on a test sample")
    s.add_argument("test")
    s.add_argument("--draws", action="append", help="draw file (repeatable)")
    s.add_argument("--family", action="append", help="parametric family (repeatable)")
    s.add_argument("--train", help="fit parametric families by maximum likelihood on this sample")
    s.add_argument("--param", type=float)
    s.add_argument("--tau", type=float)
    s.add_argument("--rotated", action="store_true", help="rotate the parametric families")
    s.add_argument("-o", "--out")
    s.set_defaults(func=cmd_lps)

    s = sub.add_parser("predict", help="sample from the posterior predictive")
    s.add_argument("draws")
    s.add_argument("--m", "--n", dest="m", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("-o", "--out", required=True)
    s.set_defaults(func=cmd_predict)

    s = sub.add_parser("density", help="posterior-mean density on a grid of cell centres")
    s.add_argument("draws")
    s.add_argument("--resolution", type=int, default=100)
    s.add_argument("-o", "--out", required=True)
    s.set_defaults(func=cmd_density)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits on --help, --version and usage errors
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"gpucopula {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, DrawFileError, OSError) as exc:
        print(f"gpucopula {args.command}: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except SamplerError as exc:
        print(f"gpucopula {args.command}: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except ValueError as exc:
        print(f"gpucopula {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
