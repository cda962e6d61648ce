import numpy as np

from pltvsar.datasets.panel import PanelData


def ring_weights(n):
    """Row-standardized ring contiguity; every location has two neighbors."""
    values = np.zeros((n, n))
    for i in range(n):
        values[i, (i - 1) % n] = 1.0
        values[i, (i + 1) % n] = 1.0
    return values / values.sum(axis=1, keepdims=True)


def random_panel(n, t_len, p=4, seed=0):
    rng = np.random.default_rng(seed)
    size = n * t_len
    x = np.column_stack([np.ones(size), rng.standard_normal((size, p - 1))])
    y = rng.standard_normal(size)
    names = ("intercept",) + tuple("x{}".format(j + 2) for j in range(p - 1))
    return PanelData(y=y, x=x, n=n, t_len=t_len, column_names=names)
