import numpy as np
import pytest

from cfcp import (
    SynthClassification,
    SynthRegression,
    attach_counterfactuals,
    make_rng,
    split,
)


@pytest.fixture(scope="session")
def reg_splits():
    """Small regression problem with oracle counterfactuals: (train, cal, test, scm)."""
    scm = SynthRegression()
    ds = attach_counterfactuals(scm.generate(1500, make_rng(7, "data")), scm)
    return (*split(ds, 600, 400, 500, make_rng(7, "split")), scm)


@pytest.fixture(scope="session")
def clf_splits():
    rng = make_rng(11, "data")
    scm = SynthClassification.sample(rng.child("scm"))
    ds = attach_counterfactuals(scm.generate(1500, rng), scm)
    return (*split(ds, 600, 400, 500, make_rng(11, "split")), scm)


def random_probs(rng, n, K):
    z = rng.normal(0.0, 2.0, (n, K))
    p = np.exp(z - z.max(axis=1, keepdims=True))
    return p / p.sum(axis=1, keepdims=True)


_ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture(scope="session")
def acceptance_log(request):
    """Collects one line per acceptance criterion for the terminal summary."""
    return request.config.stash.setdefault(_ACCEPTANCE_KEY, [])


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
        terminalreporter.write_line(line)
