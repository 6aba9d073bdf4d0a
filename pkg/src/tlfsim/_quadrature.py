"""Vectorized panel Gauss-Legendre quadrature for oscillatory integrands."""
from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=16)
def _leggauss(order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


def panel_nodes(edges: np.ndarray, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes/weights over consecutive panels given by edges."""
    x, w = _leggauss(order)
    mid = (edges[1:] + edges[:-1]) / 2.0
    half = (edges[1:] - edges[:-1]) / 2.0
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def oscillation_edges(lo: float, hi: float, freq: float, min_panels: int = 16,
                      max_panels: int = 40000) -> np.ndarray:
    """Panel edges over [lo, hi] resolving a phase slope |freq| (rad per unit).

    Panels are sized so each spans at most ~pi/2 of phase, with a floor of
    min_panels for non-oscillatory structure.
    """
    span = hi - lo
    n = int(np.ceil(span * abs(freq) / (np.pi / 2.0))) + min_panels
    n = min(n, max_panels)
    return np.linspace(lo, hi, n + 1)
