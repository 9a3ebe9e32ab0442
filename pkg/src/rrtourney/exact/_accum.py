"""Compensated accumulation for float enumeration results."""

import numpy as np


class ArrayAccumulator:
    """Elementwise Neumaier summation of a stream of equally shaped arrays."""

    def __init__(self, shape):
        self.total = np.zeros(shape, dtype=np.float64)
        self.comp = np.zeros(shape, dtype=np.float64)

    def add(self, x: np.ndarray) -> None:
        t = self.total + x
        big = np.abs(self.total) >= np.abs(x)
        self.comp += np.where(big, (self.total - t) + x, (x - t) + self.total)
        self.total = t

    def result(self) -> np.ndarray:
        return self.total + self.comp
