"""A decision maker who sees one finite series and hedges against counting noise.

Each run draws a single series, bins it, estimates the counting uncertainty from an
ensemble of independent series, and forms cautious weights. The resulting CDF map
is noisy, so the inverse-S shape shows up in most runs rather than every run.
"""
import numpy as np

from _common import figure, parser
from probweight import DistributionSpec, SimConfig, simulate_dm


def main():
    p = parser(__doc__.splitlines()[0])
    p.add_argument("--seeds", type=int, default=20)
    p.add_argument("--T", type=int, default=100)
    p.add_argument("--ensemble", type=int, default=1000)
    args = p.parse_args()
    specs = {"gaussian(0,2)": DistributionSpec.gaussian(0, 2),
             "t(0,1,1.5)": DistributionSpec.student_t(0, 1, 1.5)}
    shown = {}
    print(f"{'spec':16s}{'inverse-S':>11s}{'mean fw(0.1)':>14s}{'mean fw(0.9)':>14s}")
    for name, spec in specs.items():
        hits, lows, highs = 0, [], []
        for seed in range(args.seeds):
            sim = simulate_dm(SimConfig(spec, series_length=args.T, ensemble_size=args.ensemble, seed=seed))
            c = sim.cdf_map()
            hits += c.is_inverse_s(0.1, 0.9)
            lows.append(float(c.interpolate(0.1)))
            highs.append(float(c.interpolate(0.9)))
            if seed == 0:
                shown[name] = c
        print(f"{name:16s}{hits:>7d}/{args.seeds:<3d}{np.mean(lows):14.4f}{np.mean(highs):14.4f}")

    def draw(ax):
        for name, c in shown.items():
            ax.plot(c.fp, c.fw, marker=".", label=f"{name}, seed 0")
        ax.plot([0, 1], [0, 1], color="grey", lw=0.5)
        ax.set_xlabel("fp")
        ax.set_ylabel("fw")
        ax.legend(fontsize=7)

    figure(args.out, "dm_simulation.png", draw)


if __name__ == "__main__":
    main()
