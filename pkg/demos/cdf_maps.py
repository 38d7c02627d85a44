"""Mapping one CDF onto another produces the inverse-S shape of probability weighting.

A decision maker who models the world with a wider distribution than an observer
assigns more probability to rare events and less to common ones. Plotting the
decision maker's CDF against the observer's CDF gives the familiar weighting curve,
and the four standard parametric forms all describe it.
"""
import numpy as np

from _common import figure, parser
from probweight import DistributionSpec, WeightingModel, numeric_cdf_map
from probweight.weightmap import default_grid

LEVELS = (0.01, 0.05, 0.1, 0.5, 0.9, 0.95, 0.99)
MODELS = (("tk", 0.65), ("lattimore", 0.67, 0.58), ("gauss", 0.23, 1.64), ("tmap", 1.27, 0.40))


def main():
    args = parser(__doc__.splitlines()[0]).parse_args()
    do = DistributionSpec.gaussian(0, 1)
    pairs = {
        "gaussian(0,1) -> gaussian(0,2)": DistributionSpec.gaussian(0, 2),
        "gaussian(0,1) -> t(0,1,1.5)": DistributionSpec.student_t(0, 1, 1.5),
        "gaussian(0,1) -> gaussian(0.5,1.5)": DistributionSpec.gaussian(0.5, 1.5),
    }
    curves = {name: numeric_cdf_map(do, dm, default_grid(do, dm)) for name, dm in pairs.items()}
    print("fw at selected fp levels")
    print(f"{'':36s}" + "".join(f"{q:>8.2f}" for q in LEVELS))
    for name, c in curves.items():
        print(f"{name:36s}" + "".join(f"{float(c.interpolate(q)):8.4f}" for q in LEVELS))
    models = [WeightingModel.create(*m) for m in MODELS]
    for m in models:
        print(f"{m.label:36s}" + "".join(f"{float(m(q)):8.4f}" for q in LEVELS))

    def draw(ax):
        fp = np.linspace(0, 1, 401)
        for name, c in curves.items():
            ax.plot(c.fp, c.fw, label=name)
        for m in models:
            ax.plot(fp, m(fp), ls="--", lw=1, label=m.label)
        ax.plot([0, 1], [0, 1], color="grey", lw=0.5)
        ax.set_xlabel("fp")
        ax.set_ylabel("fw")
        ax.legend(fontsize=7)

    figure(args.out, "cdf_maps.png", draw)


if __name__ == "__main__":
    main()
