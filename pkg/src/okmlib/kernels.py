"""Kernel functions, Gram matrices, and the kernel-induced squared distance.

Supported kernels:

    rbf         exp(-||x - y||^2 / sigma^2)
    polynomial  (<x, y> + 1)^degree     (degree may be fractional)
    linear      <x, y>

The induced squared distance K(x,x) + K(y,y) - 2 K(x,y) is clamped below
at zero: fractional polynomial degrees are not Mercer kernels, so tiny
negative values can occur and would otherwise poison downstream
comparisons and square roots.
"""

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, DomainError, InvalidSpec
from .linalg import SymMatrix


class KernelKind(enum.Enum):
    RBF = "rbf"
    POLYNOMIAL = "poly"
    LINEAR = "linear"


@dataclass(frozen=True)
class KernelSpec:
    """Kernel choice plus its parameter (sigma for rbf, degree for poly).

    Fields not used by the chosen kind are ignored.
    """

    kind: KernelKind
    sigma: float = 1.0
    degree: float = 1.0

    def __post_init__(self):
        if self.kind == KernelKind.RBF and not (np.isfinite(self.sigma) and self.sigma > 0):
            raise InvalidSpec(f"rbf kernel needs sigma > 0, got {self.sigma}")
        if self.kind == KernelKind.POLYNOMIAL and not (np.isfinite(self.degree) and self.degree > 0):
            raise InvalidSpec(f"polynomial kernel needs degree > 0, got {self.degree}")


@dataclass(frozen=True)
class GramMatrix:
    """Pairwise kernel evaluations K(i, j) = K(x_i, x_j) for one dataset."""

    spec: KernelSpec
    matrix: SymMatrix

    @property
    def n(self):
        return self.matrix.n


def _check_pair(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 1 or y.ndim != 1:
        raise DimensionMismatch("kernel arguments must be 1-D vectors")
    if x.shape[0] != y.shape[0]:
        raise DimensionMismatch(f"vector lengths differ: {x.shape[0]} vs {y.shape[0]}")
    if x.shape[0] < 1:
        raise DimensionMismatch("vectors must have at least one component")
    return x, y


def kernel_eval(spec: KernelSpec, x, y) -> float:
    """Evaluate the kernel on a pair of vectors."""
    x, y = _check_pair(x, y)
    if spec.kind == KernelKind.RBF:
        d2 = float(np.sum((x - y) ** 2))
        return float(np.exp(-d2 / (spec.sigma * spec.sigma)))
    if spec.kind == KernelKind.POLYNOMIAL:
        base = float(np.dot(x, y)) + 1.0
        if base < 0.0 and not float(spec.degree).is_integer():
            raise DomainError(
                f"polynomial base {base:.6g} < 0 with non-integer degree {spec.degree}"
            )
        return float(base ** spec.degree)
    return float(np.dot(x, y))


def gram(spec: KernelSpec, data) -> GramMatrix:
    """Build the n x n Gram matrix for a dataset.

    Only the upper triangle is evaluated; the lower one is mirrored, so
    the result is symmetric by construction.  `data` may be a DataMatrix
    or a plain (n, p) array.
    """
    values = np.asarray(getattr(data, "values", data), dtype=float)
    if values.ndim != 2 or values.shape[0] < 1:
        raise ValueError(f"expected an (n, p) data array, got shape {values.shape}")
    n = values.shape[0]
    k = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            k[i, j] = kernel_eval(spec, values[i], values[j])
            k[j, i] = k[i, j]
    return GramMatrix(spec=spec, matrix=SymMatrix(k))


def kernel_distance_sq(spec: KernelSpec, x, y) -> float:
    """Squared distance induced by the kernel, clamped below at 0."""
    kxx = kernel_eval(spec, x, x)
    kyy = kernel_eval(spec, y, y)
    kxy = kernel_eval(spec, x, y)
    return max(0.0, kxx + kyy - 2.0 * kxy)
