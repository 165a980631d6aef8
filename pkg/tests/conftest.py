import sys
from pathlib import Path

import numpy as np
import pytest

from eagga.data import Dataset

sys.path.insert(0, str(Path(__file__).parent))


def make_synthetic(n=500, p=10, seed=20240801) -> Dataset:
    """The reference synthetic task: y depends monotonically on feature 0,
    features 1 and 2 interact multiplicatively, the rest is noise.

    The interacting pair is mean-shifted so its product term carries a
    marginal signal the screening detectors can see; the centered product
    keeps the interaction itself essential for full accuracy.
    """
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, p))
    X[:, 1] += 0.7
    X[:, 2] += 0.7
    latent = 1.5 * X[:, 0] + 2.2 * (X[:, 1] * X[:, 2] - 0.49)
    y = (rng.random(n) < 1.0 / (1.0 + np.exp(-latent))).astype(int)
    return Dataset(X, y, tuple(f"x{i}" for i in range(1, p + 1)))


@pytest.fixture(scope="session")
def synthetic_ds() -> Dataset:
    return make_synthetic()


def random_structure(p, rng):
    """Arbitrary valid structure for property harnesses."""
    from eagga.groupstruct import Group, Monotonicity, build
    n_sel = int(rng.integers(0, p + 1))
    selected = rng.choice(p, size=n_sel, replace=False)
    groups = {}
    for f in selected:
        groups.setdefault(int(rng.integers(0, max(1, n_sel))), set()).add(int(f))
    glist = [
        Group(frozenset(m),
              Monotonicity.INCREASING if rng.random() < 0.5 else Monotonicity.UNCONSTRAINED)
        for m in groups.values()
    ]
    return build(set(range(p)) - set(int(f) for f in selected), glist)
