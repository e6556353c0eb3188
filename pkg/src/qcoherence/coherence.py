"""l1-norm of coherence in the computational basis."""

from __future__ import annotations

import math
from typing import Iterable

import numpy as np

from .errors import ArgumentError
from .qmatrix import QubitState


def offdiag_l1(m: np.ndarray) -> float:
    """Sum of moduli of the off-diagonal entries of a raw square matrix.

    Diagonal entries are zeroed before a single row-major sum, so a
    diagonal matrix gives exactly 0.0.
    """
    a = np.abs(m)
    np.fill_diagonal(a, 0.0)
    return float(a.sum())


def c_l1(rho: QubitState) -> float:
    rho.require_valid()
    return offdiag_l1(rho.matrix)


def c_l1_pow(rho: QubitState, p: float) -> float:
    if not p >= 1:
        raise ArgumentError(f"power must be >= 1, got {p}")
    return c_l1(rho) ** p


def c_l1_product_identity(values: Iterable[float]) -> float:
    """Coherence of a tensor product whose factors have coherences ``values``.

    The off-diagonal mass of ``rho (x) sigma`` is ``(1 + C(rho)) (1 + C(sigma)) - 1``
    because every entry of a product is a product of entries, and the
    diagonal moduli of each factor sum to one.
    """
    values = [float(v) for v in values]
    if any(not v >= 0 for v in values):
        raise ArgumentError(f"coherences must be non-negative, got {values}")
    return math.prod(1.0 + v for v in values) - 1.0
