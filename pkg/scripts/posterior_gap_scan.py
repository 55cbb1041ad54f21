"""How far an overconfident ideal model's posterior intervals miss, by bin count and noise level.

Uses exact Gaussian bin probabilities for y | mu ~ N(mu, noise^2), with no
training, so it isolates the effect of bin quantization: with few bins the
posterior interval can only widen by whole bins, and a x3 overconfident model
can land near the target coverage by accident.

    python scripts/posterior_gap_scan.py --bins 10 --factor 3
"""

import argparse
import math

import numpy as np

from calint.binning import build_bins
from calint.calibrate import coverage_at_temperature
from calint.synth import TaskSpec, generate_task

_erf = np.vectorize(math.erf)


def gaussian_logits(mu, sigma, edges):
    cdf = lambda v: 0.5 * (1 + _erf(v / math.sqrt(2)))
    hi = cdf((edges[None, 1:] - mu[:, None]) / sigma)
    lo = cdf((edges[None, :-1] - mu[:, None]) / sigma)
    return np.log(np.maximum(hi - lo, 1e-300))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--bins", type=int, default=10)
    ap.add_argument("--factor", type=float, default=3.0)
    ap.add_argument("--noise", default="0.25,0.5,1.0,1.5,2.0,3.0")
    ap.add_argument("--seeds", type=int, default=3)
    ap.add_argument("--alphas", default="0.66,0.8,0.9")
    args = ap.parse_args()
    alphas = [float(a) for a in args.alphas.split(",")]

    print(f"posterior test calibration error [pp], M={args.bins}, logits x{args.factor:g}")
    print("noise  seed  " + "  ".join(f"{a:>6g}" for a in alphas) + "     min")
    for noise in (float(v) for v in args.noise.split(",")):
        for seed in range(args.seeds):
            task = generate_task(TaskSpec(seed=seed, noise_std=noise, n_train=20000, n_val=10, n_test=5000))
            scheme = build_bins(task.y_train, args.bins)
            mu = task.x_test @ task.true_weights + task.true_bias
            z = args.factor * gaussian_logits(mu, max(noise, 1e-9), scheme.edges)
            errs = [abs(coverage_at_temperature(z, task.y_test, scheme, a, 1.0) - a) * 100 for a in alphas]
            print(f"{noise:5g}  {seed:4d}  " + "  ".join(f"{e:6.2f}" for e in errs) + f"  {min(errs):6.2f}")


if __name__ == "__main__":
    main()
