"""Fit the four weighting forms to one noisy weighting curve and compare them.

The data are generated from a one-parameter form plus Gaussian noise. The two
power-law forms and the Gaussian map fit with residuals of the same order, so a good
fit alone cannot single out a mechanism. The t map bends too sharply near the
endpoints and fits this shape visibly worse.
"""
import numpy as np

from _common import figure, parser
from probweight import Dataset, FitFailure, WeightingModel, compare_fits


def main():
    p = parser(__doc__.splitlines()[0])
    p.add_argument("--gamma", type=float, default=0.60)
    p.add_argument("--noise", type=float, default=0.01)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()
    fp = np.linspace(0.05, 0.95, 11)
    truth = WeightingModel.create("tk", args.gamma)
    fw = np.clip(truth(fp) + args.noise * np.random.default_rng(args.seed).standard_normal(fp.size), 0, 1)
    data = Dataset(fp, fw)
    results = compare_fits(data)
    print(f"data: {truth.label} + N(0, {args.noise}) on {fp.size} points")
    print(f"{'model':11s}{'parameters':40s}{'rss':>12s}")
    for r in results:
        if isinstance(r, FitFailure):
            print(f"{r.kind.value:11s}failed: {r.error}")
            continue
        params = ", ".join(f"{k}={v:.3f}±{r.std_errors[k]:.3f}" if r.std_errors else f"{k}={v:.3f}"
                           for k, v in r.params.items())
        print(f"{r.kind.value:11s}{params:40s}{r.rss:12.3e}")

    def draw(ax):
        ax.plot(fp, fw, "ko", ms=4, label="data")
        for r in results:
            if not isinstance(r, FitFailure):
                ax.plot(r.predicted.fp, r.predicted.fw, label=r.model.label)
        ax.plot([0, 1], [0, 1], color="grey", lw=0.5)
        ax.set_xlabel("fp")
        ax.set_ylabel("fw")
        ax.legend(fontsize=7)

    figure(args.out, "fit_models.png", draw)


if __name__ == "__main__":
    main()
