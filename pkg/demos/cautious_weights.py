"""Adding the estimation uncertainty to a density estimate yields inverse-S weights.

With T observations in bins of width dx, the count in a bin is uncertain by about
sqrt(p / (T dx)). A cautious decision maker adds that uncertainty and renormalizes.
Rare events gain relative weight and common ones lose it. Fat tails amplify the effect.
"""
from _common import figure, parser
from probweight import DistributionSpec, analytic_cdf_map

TDX = (1.0, 10.0, 100.0)


def main():
    p = parser(__doc__.splitlines()[0])
    p.add_argument("--points", type=int, default=20_001)
    args = p.parse_args()
    specs = {"gaussian(0,1)": DistributionSpec.gaussian(0, 1),
             "t(0,1,2)": DistributionSpec.student_t(0, 1, 2)}
    curves = {}
    print(f"{'spec':16s}{'T dx':>8s}{'fw(0.05)':>10s}{'fw(0.95)':>10s}{'max|fw-fp|':>12s}")
    for name, spec in specs.items():
        for tdx in TDX:
            c = analytic_cdf_map(spec, tdx)
            curves[(name, tdx)] = c
            print(f"{name:16s}{tdx:8.0f}{float(c.interpolate(0.05)):10.4f}"
                  f"{float(c.interpolate(0.95)):10.4f}{c.max_deviation():12.4f}")
    print("more data (larger T dx) shrinks the correction; fat tails enlarge it")

    def draw(ax):
        for (name, tdx), c in curves.items():
            ax.plot(c.fp, c.fw, label=f"{name}, T dx={tdx:g}")
        ax.plot([0, 1], [0, 1], color="grey", lw=0.5)
        ax.set_xlabel("fp")
        ax.set_ylabel("fw")
        ax.legend(fontsize=7)

    figure(args.out, "cautious_weights.png", draw)


if __name__ == "__main__":
    main()
