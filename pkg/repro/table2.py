"""Experiment II: per-point LPS on the two Clayton/Gaussian copula mixtures.

Mixture 1 has second-component means (0, 2), mixture 2 has (-2, 2); all
sds are one, gamma=6, rho=0.6 and the weight defaults to 0.5. Both
mixtures show lower-tail dependence, so NegBinC is fitted rotated.

    python repro/table2.py
    python repro/table2.py --weight 0.3 --iterations 4000 --burnin 2000
"""

import argparse

from gpucopula._rng import make_rng
from gpucopula.data import MixtureSimConfig, simulate_mixture, split

from _common import MODELS, add_run_args, emit, fit_and_score

MIXTURES = {"mixture 1": (0.0, 0.0, 0.0, 2.0), "mixture 2": (0.0, 0.0, -2.0, 2.0)}
PAPER = {"mixture 1": (0.6081, 0.3874), "mixture 2": (0.6693, 0.5248)}


def main():
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--weight", type=float, default=0.5)
    add_run_args(p)
    args = p.parse_args()

    rows = []
    print(f"{'data':10} {'model':13} {'LPS':>8} {'paper':>7} {'secs':>6}")
    for k, (name, means) in enumerate(MIXTURES.items()):
        cfg = MixtureSimConfig(weight=args.weight, means=means)
        _, x = simulate_mixture(cfg, 2 * args.n, make_rng(args.seed, 10 + k))
        train, test = split(x, args.n)
        for i, (label, family) in enumerate(MODELS):
            score, secs = fit_and_score(train, test, family, label == "NegBinC", args.iterations, args.burnin, args.seed)
            ref = PAPER[name][i]
            print(f"{name:10} {label:13} {score:8.4f} {ref:7.4f} {secs:6.1f}", flush=True)
            rows.append((name, label, f"{score:.6f}", ref))
    emit(rows, ("data", "model", "lps_mean", "paper"), args.out)


if __name__ == "__main__":
    main()
