import numpy as np
import pytest

from avsq.panel import Panel


def make_panel(D, Y=None, weight=None, groups=None):
    """Build a Panel directly from dose (and optionally outcome) matrices."""
    D = np.asarray(D, dtype=float)
    G, T = D.shape
    Y = np.zeros_like(D) if Y is None else np.asarray(Y, dtype=float)
    w = np.ones(G) if weight is None else np.asarray(weight, dtype=float)
    g = np.arange(G) if groups is None else np.asarray(groups)
    return Panel(
        groups=g,
        period_labels=np.arange(1, T + 1),
        outcome=Y,
        treatment=D,
        weight=w,
    )


@pytest.fixture
def make():
    return make_panel
