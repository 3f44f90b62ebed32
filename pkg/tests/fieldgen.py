"""Random test data shared by the test modules."""

import numpy as np
from hypothesis import strategies as st

from ccf.core_fields import Field, Symmetry, make_grid


def random_even_monotone(rng, grid, rough=False):
    """Sum of random bumps and ramps, or a random staircase with ``rough``."""
    x = np.abs(grid.x)
    if rough:
        o = grid.origin
        inc = rng.exponential(size=o) * (rng.random(o) < 0.3)
        half = np.concatenate([[0.0], np.cumsum(inc)])
        half = half[-1] - half
        half /= max(half.max(), 1e-300)
        v = np.concatenate([half[:0:-1], half])
        return Field(grid, rng.uniform(0.5, 5) * v, Symmetry.EVEN_MONOTONE)
    v = np.zeros_like(x)
    for _ in range(rng.integers(1, 4)):
        a, w = rng.uniform(0.2, 3), rng.uniform(0.2, 2)
        if rng.random() < 0.5:
            v += a * np.exp(-((x / w) ** 2))
        else:
            v += a * np.clip(1 - x / (2 * w), 0, None) ** rng.uniform(1, 3)
    return Field(grid, v, Symmetry.EVEN_MONOTONE)


def random_fields(count, n=2049, L=8.0, seed=0):
    rng = np.random.default_rng(seed)
    grid = make_grid("line", n, L)
    return [random_even_monotone(rng, grid, rough=(i % 4 == 3)) for i in range(count)]


bump_params = st.lists(
    st.tuples(st.floats(0.1, 4.0), st.floats(0.2, 2.0)), min_size=1, max_size=3
)


def bumps_field(params, grid):
    x = grid.x
    v = sum(a * np.exp(-((x / w) ** 2)) for a, w in params)
    return Field(grid, v, Symmetry.EVEN_MONOTONE, lambda y: sum(a * np.exp(-((y / w) ** 2)) for a, w in params))
