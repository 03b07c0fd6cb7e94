"""
Compensated summation helpers.

The MA/AR recurrences subtract long convolutions of similar magnitude, and
the grid sweeps must not depend on evaluation order, so sums go through
error-free transformations instead of naive accumulation.
"""
import math
from typing import Iterable

import numpy as np


class KahanSummation:
    """
    Incremental compensated (Neumaier) summation.

    Keeps a running correction term so that the result does not drift with
    the number of terms added.
    """

    def __init__(self):
        self.sum = 0.0
        self.carry = 0.0

    def add(self, value: float) -> None:
        total = self.sum + value
        if abs(self.sum) >= abs(value):
            self.carry += (self.sum - total) + value
        else:
            self.carry += (value - total) + self.sum
        self.sum = total

    @property
    def value(self) -> float:
        return self.sum + self.carry


def compensated_cumsum(values: Iterable[float]) -> np.ndarray:
    """Running compensated sums S_1, S_2, ... of the input"""
    acc = KahanSummation()
    out = []
    for v in values:
        acc.add(float(v))
        out.append(acc.value)
    return np.asarray(out, dtype=float)


def exact_dot(x: np.ndarray, y: np.ndarray) -> float:
    """Dot product with the sum of (rounded) products correctly rounded"""
    if len(x) == 0:
        return 0.0
    return math.fsum(np.multiply(x, y))
