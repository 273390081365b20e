import itertools

import numpy as np
import pytest

from discrit.geometry import Deployment, Region


def line_deployment(xs, side=1000.0, y=None):
    """Collinear nodes at the given x offsets inside a square region."""
    y = side / 2 if y is None else y
    pos = np.array([[x, y] for x in xs], dtype=float)
    return Deployment(pos, "uniform-iid", Region(side, side), 0)


def enumerate_hello_p(pos, params):
    """Exact per-pair Hello success probabilities by exhausting the
    transmit patterns of the other nodes (deterministic fading only)."""
    n = len(pos)
    d = np.sqrt(((pos[:, None, :] - pos[None, :, :]) ** 2).sum(-1))
    with np.errstate(divide="ignore"):
        g = np.where(np.eye(n, dtype=bool), 0.0, params.p_t / d ** params.eta)
    p = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            others = [k for k in range(n) if k not in (i, j)]
            total = 0.0
            for bits in itertools.product((0, 1), repeat=len(others)):
                prob = 1.0
                interference = 0.0
                for k, b in zip(others, bits):
                    prob *= params.alpha if b else (1.0 - params.alpha)
                    if b:
                        interference += g[k, j]
                ok = g[i, j] >= params.beta * (params.sigma2 + interference)
                total += prob * ok
            p[i, j] = (1.0 - params.alpha) * total
    return p


@pytest.fixture
def unit_region():
    return Region(1.0, 1.0)


@pytest.fixture
def km_region():
    return Region(1000.0, 1000.0)
