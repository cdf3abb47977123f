"""Shared helpers for the table reproductions."""

from __future__ import annotations

import time

from gpucopula.evaluation import lps
from gpucopula.partition import Family
from gpucopula.sampler import SamplerConfig, run_chain

MODELS = (("NegBinC", Family.NEGBINOMIAL), ("BernsteinCBP", Family.BINOMIAL))


def fit_and_score(train, test, family, rotated, iterations, burnin, seed):
    cfg = SamplerConfig(family=family, rotated=rotated, iterations=iterations, burnin=burnin, seed=seed)
    t0 = time.perf_counter()
    res = run_chain(train, cfg)
    rep = lps(res.draws, family, test, rotated)
    return rep.mean, time.perf_counter() - t0


def add_run_args(parser):
    parser.add_argument("--iterations", type=int, default=20_000)
    parser.add_argument("--burnin", type=int, default=10_000)
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("-o", "--out", help="also write the table as CSV here")


def emit(rows, header, out):
    lines = [",".join(header)] + [",".join(str(c) for c in r) for r in rows]
    if out:
        with open(out, "w") as fh:
            fh.write("\n".join(lines) + "\n")
