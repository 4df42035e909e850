"""Shared test oracles: finite differences, quadrature, and flood fill.

These helpers are deliberately independent of the library's computation
paths so they can serve as oracles for it.
"""

from __future__ import annotations

import numpy as np
import pytest


def fd_gradient(f, x, step=1e-5):
    """Central-difference gradient of a scalar function of a vector."""
    x = np.asarray(x, dtype=float)
    out = np.empty(x.size)
    for l in range(x.size):
        e = np.zeros_like(x)
        e[l] = step
        out[l] = (f(x + e) - f(x - e)) / (2 * step)
    return out


def fd_jacobian(f, x, step=1e-5):
    """Central-difference Jacobian of a vector function of a vector."""
    x = np.asarray(x, dtype=float)
    cols = []
    for l in range(x.size):
        e = np.zeros_like(x)
        e[l] = step
        cols.append((np.asarray(f(x + e)) - np.asarray(f(x - e))) / (2 * step))
    return np.stack(cols, axis=-1)


def flood_fill_components(mask: np.ndarray) -> int:
    """Count face-adjacent connected components by breadth-first search."""
    mask = np.atleast_2d(mask)
    visited = np.zeros_like(mask, dtype=bool)
    count = 0
    for start in zip(*np.nonzero(mask)):
        if visited[start]:
            continue
        count += 1
        stack = [start]
        visited[start] = True
        while stack:
            cell = stack.pop()
            for axis in range(mask.ndim):
                for delta in (-1, 1):
                    nb = list(cell)
                    nb[axis] += delta
                    nb = tuple(nb)
                    if (0 <= nb[axis] < mask.shape[axis] and mask[nb]
                            and not visited[nb]):
                        visited[nb] = True
                        stack.append(nb)
    return count


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
