"""Punctuality trade-off for dataset 101_1: excess travel time and the
variability ratio as tau rises, beside the reference values."""
from ttvou.datasets import TRADEOFF_101_1, dataset_row
from ttvou.quantile_models import lognormal_from_moments
from ttvou.scenarios import tradeoff_table


def main():
    row = dataset_row("101_1")
    model = lognormal_from_moments(row.mean, row.std)
    rows = tradeoff_table(model, 2.0, 1.0, [t for t, _, _ in TRADEOFF_101_1])
    print(f"{'tau':>5}  {'ETT':>22} {'ref':>6}  {'TTVR':>22} {'ref':>7}")
    for r, (_, ett, ttvr) in zip(rows, TRADEOFF_101_1):
        tau, e, v = r.formatted()
        print(f"{tau:>5}  {e:>22} {ett:6.2f}  {v:>22} {ttvr:7.4f}")


if __name__ == "__main__":
    main()
