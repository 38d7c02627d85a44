"""Ensemble averages and time averages disagree for multiplicative growth.

Under geometric Brownian motion the ensemble average grows at the drift mu while a
typical trajectory grows at mu - sigma^2 / 2. Whoever averages over an ensemble
overestimates what a single trajectory experiences.
"""
import numpy as np

from _common import figure, parser
from probweight import GbmConfig, gbm_simulate


def main():
    p = parser(__doc__.splitlines()[0])
    p.add_argument("--mu", type=float, default=0.05)
    p.add_argument("--sigma", type=float, default=0.2)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()
    print(f"{'horizon':>8s}{'ensemble':>10s}{'median':>10s}{'theory':>18s}")
    theory = f"{args.mu:.3f} / {args.mu - args.sigma ** 2 / 2:.3f}"
    last = None
    for horizon in (1.0, 10.0, 100.0):
        cfg = GbmConfig(drift=args.mu, volatility=args.sigma, horizon=horizon,
                        trajectories=10_000, seed=args.seed)
        last = gbm_simulate(cfg)
        print(f"{horizon:8.0f}{last.ensemble_mean_growth:10.4f}{last.median_time_growth:10.4f}{theory:>18s}")

    def draw(ax):
        ax.hist(last.log_growth, bins=80, density=True, color="tab:blue", alpha=0.7)
        ax.axvline(args.mu - args.sigma ** 2 / 2, color="k", label="time-average growth")
        ax.axvline(args.mu, color="tab:red", label="ensemble growth")
        ax.set_xlabel("per-trajectory log growth rate, horizon 100")
        ax.legend(fontsize=7)

    figure(args.out, "ergodicity.png", draw)


if __name__ == "__main__":
    main()
