"""Six-route replica: lognormal routes with mean cost/alpha and the reference
CoV, costed under the three planning scenarios.

Prints the reliability and unreliability costs next to the reference ones,
the unreliability share of the METT cost, and the route rankings.  Also
scans beta/alpha to show why 0.4 was chosen.
"""
import argparse

from ttvou.datasets import ROUTES, ROUTE_PREFS, route_models
from ttvou.risk_measures import SchedulingPreferences
from ttvou.scenarios import Scenario, compare_routes


def table(prefs):
    comp = compare_routes(route_models(prefs.alpha), prefs)
    print(f"{'route':8} {'rel':>7} {'pub':>6} {'err%':>6} {'unrel':>7} {'pub':>6} {'err%':>6} {'share':>7}")
    for row, r in zip(ROUTES, comp.routes):
        c = r.costs[Scenario.METT]
        print(f"{r.name:8} {c.reliability:7.3f} {row.reliability:6.2f} {100 * (c.reliability / row.reliability - 1):6.2f} "
              f"{c.unreliability:7.3f} {row.unreliability:6.2f} {100 * (c.unreliability / row.unreliability - 1):6.2f} "
              f"{c.percents[2]:7.4f}")
    for s in Scenario:
        print(f"{s.value:5} best {comp.best[s]}, worst {comp.worst[s]}")


def scan():
    # the Path 1 reliability cost pins beta/alpha once tau is fixed
    print("\nbeta/alpha  max |err| over all 12 reference costs")
    for ratio in (0.30, 0.35, 0.40, 0.45, 0.50):
        a = ROUTE_PREFS[0]
        prefs = SchedulingPreferences.from_tau(a, ratio * a, 0.8)
        comp = compare_routes(route_models(a), prefs)
        worst = 0.0
        for row, r in zip(ROUTES, comp.routes):
            c = r.costs[Scenario.METT]
            worst = max(worst, abs(c.reliability / row.reliability - 1), abs(c.unreliability / row.unreliability - 1))
        print(f"{ratio:9.2f}  {100 * worst:6.2f}%")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--no-scan", action="store_true")
    args = ap.parse_args()
    table(SchedulingPreferences.from_gamma(*ROUTE_PREFS))
    if not args.no_scan:
        scan()


if __name__ == "__main__":
    main()
