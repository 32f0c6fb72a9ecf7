import numpy as np
import pytest

from lcentropy import families as F


@pytest.fixture
def rng():
    return np.random.default_rng(42)


# (family, params) grid spanning small and moderate sigma, used by several
# identity and bound suites
def family_grid():
    grid = []
    for p in (0.9, 0.7, 0.5, 0.3, 0.1, 0.02):
        grid.append(("geometric", {"p": p}))
    for lam in (0.5, 1.0, 4.0, 25.0, 100.0, 2500.0):
        grid.append(("poisson", {"lam": lam}))
    for m, p in ((1, 0.5), (10, 0.3), (100, 0.5), (1000, 0.7)):
        grid.append(("binomial", {"m": m, "p": p}))
    for r, p in ((1.0, 0.4), (2.0, 0.5), (2.0, 0.05), (5.0, 0.2)):
        grid.append(("negative_binomial", {"r": r, "p": p}))
    for b in (0.2, 0.5, 0.9, 0.99):
        grid.append(("two_sided_geometric", {"beta": b}))
    for m in (1, 2, 7, 100):
        grid.append(("uniform", {"m": m}))
    for p in (0.5, 0.07):
        grid.append(("bernoulli", {"p": p}))
    grid.append(("delta", {"k": -3}))
    return grid


@pytest.fixture(scope="session")
def family_instances():
    return [(name, params, F.from_family(name, params)) for name, params in family_grid()]
