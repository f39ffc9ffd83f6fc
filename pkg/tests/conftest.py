import sys
from collections import defaultdict
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ttvou import (BurrXII, Interpolation, SchedulingPreferences, UniformTest, empirical_from_samples,
                   lognormal_from_moments)

COVS = (0.2, 0.41, 0.64, 0.79, 0.94, 1.10)


def standard_suite():
    """The (name, model) pairs every verifier check is expected to pass on."""
    rng = np.random.default_rng(7)
    models = [("uniform", UniformTest.from_moments(10.0, 1.0))]
    models += [(f"logn-{c}", lognormal_from_moments(10.0, 10.0 * c)) for c in COVS]
    models.append(("burr-3-2", BurrXII(3.0, 2.0, 10.0)))
    models.append(("empirical", empirical_from_samples(rng.lognormal(2.3, 0.3, 2000))))
    return models


def identity_suite():
    """(name, model, prefs) pairs for the exact-identity properties."""
    rng = np.random.default_rng(11)
    prefs = [SchedulingPreferences.from_gamma(2.0, 1.0, 4.0),
             SchedulingPreferences.from_tau(1.5, 0.6, 0.9)]
    models = standard_suite()
    models.append(("burr-4-1.5", BurrXII(4.0, 1.5, 5.0)))
    models.append(("empirical-step", empirical_from_samples(rng.gamma(3.0, 4.0, 500), Interpolation.STEP)))
    return [(f"{n}@{p.tau:g}", m, p) for n, m in models for p in prefs]


@pytest.fixture
def uniform_point():
    return UniformTest.from_moments(10.0, 1.0), SchedulingPreferences.from_gamma(2.0, 1.0, 4.0)


# ---------------------------------------------------------------------------
# one PASS/FAIL line per acceptance criterion

_outcomes = defaultdict(list)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "call" or rep.failed:
        _outcomes[marker.args[0]].append(rep.passed)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_outcomes):
        ok = all(_outcomes[n])
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}")
