"""Estimate the number of clusters from the Gram-matrix spectrum.

A Gram matrix over g well-separated groups is close to block structure:
its centered (mean-removed) spectrum carries one significant direction
per group boundary, so the estimate is 1 + the number of significant
centered eigenvalues.  Centering matters because smooth kernels (e.g. a
wide-bandwidth rbf) produce a dominant near-constant component whose
eigenvalue says nothing about group structure and would otherwise drown
every gap heuristic.

Two significance policies:

    ratio     count eigenvalues >= tau * largest
    eigengap  cut at the largest multiplicative gap, with everything
              below 1% of the largest treated as noise floor

Both ignore non-positive eigenvalues (possible with non-Mercer kernels).
"""

import enum
from dataclasses import dataclass

import numpy as np

from .errors import InvalidSpec
from .kernels import GramMatrix
from .linalg import SymMatrix, sorted_eigenvalues

GAP_NOISE_FLOOR = 0.01


class PolicyKind(enum.Enum):
    RATIO_THRESHOLD = "ratio"
    LARGEST_EIGENGAP = "eigengap"


@dataclass(frozen=True)
class SignificancePolicy:
    kind: PolicyKind
    tau: float = 0.05
    max_k: int | None = None

    def __post_init__(self):
        if self.kind == PolicyKind.RATIO_THRESHOLD and not (0.0 < self.tau < 1.0):
            raise InvalidSpec(f"tau must be in (0, 1), got {self.tau}")
        if self.max_k is not None and self.max_k < 1:
            raise InvalidSpec(f"max_k must be >= 1, got {self.max_k}")


@dataclass(frozen=True)
class SpectrumReport:
    eigenvalues: np.ndarray
    centered_eigenvalues: np.ndarray
    estimated_k: int
    policy: SignificancePolicy


def significant_count(eigenvalues, policy: SignificancePolicy) -> int:
    """How many leading values of a descending spectrum are significant."""
    lam = np.asarray(eigenvalues, dtype=float)
    if lam.size == 0 or lam[0] <= 0:
        return 0

    if policy.kind == PolicyKind.RATIO_THRESHOLD:
        return int(np.sum(lam >= policy.tau * lam[0]))

    if lam.size == 1:
        return 1
    floored = np.maximum(lam, GAP_NOISE_FLOOR * lam[0])
    gaps = np.log(floored[:-1] / floored[1:])
    return int(np.argmax(gaps)) + 1


def _centered(matrix: SymMatrix) -> SymMatrix:
    k = matrix.values
    row_means = k.mean(axis=1, keepdims=True)
    grand_mean = k.mean()
    c = k - row_means - row_means.T + grand_mean
    return SymMatrix((c + c.T) / 2.0)


def estimate_k(g: GramMatrix, policy: SignificancePolicy) -> SpectrumReport:
    """Estimate the cluster count for the dataset behind a Gram matrix.

    Returns the full descending spectrum (raw and centered) so a human
    can second-guess the mechanical estimate.
    """
    n = g.n
    if n < 2:
        raise ValueError(f"need at least 2 points to estimate k, got {n}")

    raw = sorted_eigenvalues(g.matrix)
    centered = sorted_eigenvalues(_centered(g.matrix))

    count = significant_count(centered, policy)
    cap = n if policy.max_k is None else min(policy.max_k, n)
    estimated = max(1, min(1 + count, cap))
    return SpectrumReport(eigenvalues=raw, centered_eigenvalues=centered,
                          estimated_k=estimated, policy=policy)
