"""Small numerical helpers: compensated summation and quadrature nodes.

Phase totals mix contributions spanning ~12 orders of magnitude, so every
place the engine sums phases, actions, or weighted Lagrangian samples uses
Kahan-Neumaier compensated accumulation instead of a bare running sum.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Iterable

import numpy as np


class NeumaierSum:
    """Compensated accumulator (Kahan summation with Neumaier's correction).

    Keeps a running total plus a separate compensation term so that adding
    values of wildly different magnitude loses at most one rounding error
    overall instead of one per addition.
    """

    __slots__ = ("_total", "_comp")

    def __init__(self, value: float = 0.0):
        self._total = float(value)
        self._comp = 0.0

    def add(self, value: float) -> "NeumaierSum":
        value = float(value)
        t = self._total + value
        if abs(self._total) >= abs(value):
            self._comp += (self._total - t) + value
        else:
            self._comp += (value - t) + self._total
        self._total = t
        return self

    def extend(self, values: Iterable[float]) -> "NeumaierSum":
        for value in values:
            self.add(value)
        return self

    @property
    def value(self) -> float:
        return self._total + self._comp


def csum(values: Iterable[float]) -> float:
    """Compensated sum of an iterable of floats."""
    return NeumaierSum().extend(values).value


@lru_cache(maxsize=None)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [-1, 1], cached per order.

    Order n integrates polynomials up to degree 2n-1 exactly; the smooth
    (quadratic-Lagrangian, trigonometric-rotation) integrands here converge
    spectrally, so the default engine order leaves a wide safety margin.
    """
    if n < 1:
        raise ValueError(f"quadrature order must be >= 1, got {n}")
    x, w = np.polynomial.legendre.leggauss(int(n))
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def two_sum(a: float, b: float) -> tuple[float, float]:
    """Error-free transform: returns (s, e) with s = fl(a+b) and s+e = a+b."""
    s = a + b
    bb = s - a
    e = (a - (s - bb)) + (b - bb)
    return s, e
