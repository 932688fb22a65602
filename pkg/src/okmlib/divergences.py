"""One dissimilarity interface over three measures.

    squared euclidean   sum_j (x_j - y_j)^2
    i-divergence        sum_j [x_j ln(x_j / y_j) - x_j + y_j]   (x, y >= 0)
    kernel-induced      K(x,x) + K(y,y) - 2 K(x,y)

The I-divergence is the generalized (Bregman) form whose centroid is the
arithmetic mean, so the clustering prototype update stays valid for it.
Both arguments are clamped below at `epsilon` componentwise before
evaluation, which makes zeros safe; genuinely negative components are an
error.  Note the I-divergence is not symmetric in (x, y): callers pass
the data point first and the model point second.
"""

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InvalidSpec, NegativeInput
from .kernels import KernelSpec, kernel_distance_sq


class DissimilarityKind(enum.Enum):
    SQUARED_EUCLIDEAN = "euclidean"
    I_DIVERGENCE = "idiv"
    KERNEL_INDUCED = "kernel"


@dataclass(frozen=True)
class Dissimilarity:
    kind: DissimilarityKind
    kernel: KernelSpec | None = None
    epsilon: float = 1e-10

    def __post_init__(self):
        if self.kind == DissimilarityKind.KERNEL_INDUCED and self.kernel is None:
            raise InvalidSpec("kernel-induced dissimilarity needs a KernelSpec")
        if not (np.isfinite(self.epsilon) and self.epsilon > 0):
            raise InvalidSpec(f"epsilon must be positive, got {self.epsilon}")


def dissim(d: Dissimilarity, x, y) -> float:
    """Dissimilarity between two vectors; always >= 0."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise DimensionMismatch(f"incompatible vector shapes: {x.shape} vs {y.shape}")

    if d.kind == DissimilarityKind.SQUARED_EUCLIDEAN:
        return float(np.sum((x - y) ** 2))

    if d.kind == DissimilarityKind.I_DIVERGENCE:
        if np.any(x < 0) or np.any(y < 0):
            raise NegativeInput("i-divergence requires nonnegative components")
        xt = np.maximum(x, d.epsilon)
        yt = np.maximum(y, d.epsilon)
        return max(0.0, float(np.sum(xt * np.log(xt / yt) - xt + yt)))

    return kernel_distance_sq(d.kernel, x, y)
