"""Dense symmetric matrices and a cyclic Jacobi eigensolver.

The solver rotates away off-diagonal mass sweep by sweep until the
off-diagonal Frobenius norm drops below a tolerance.  It is exact enough
for the few-hundred-row Gram matrices this package works with and keeps
the whole spectrum, which the model-selection step needs.
"""

from dataclasses import dataclass

import numpy as np

from .errors import NoConvergence

SYMMETRY_TOL = 1e-12


@dataclass(frozen=True)
class SymMatrix:
    """An n x n real symmetric matrix (validated at construction)."""

    values: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.values, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {a.shape}")
        if a.shape[0] < 1:
            raise ValueError("matrix must have at least one row")
        if not np.all(np.isfinite(a)):
            raise ValueError("matrix entries must be finite")
        asym = np.max(np.abs(a - a.T)) if a.shape[0] > 1 else 0.0
        if asym > SYMMETRY_TOL:
            raise ValueError(f"matrix is not symmetric (max asymmetry {asym:.3e})")
        object.__setattr__(self, "values", a)

    @property
    def n(self):
        return self.values.shape[0]

    def trace(self):
        return float(np.trace(self.values))


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues sorted descending with the matching orthonormal columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def _offdiagonal_norm(a):
    # Frobenius norm of the strictly off-diagonal part.
    return float(np.sqrt(2.0 * np.sum(np.tril(a, -1) ** 2)))


def jacobi_eigen(a: SymMatrix, tol: float = 1e-10, max_sweeps: int = 100) -> EigenDecomposition:
    """Full eigendecomposition by cyclic Jacobi rotations.

    Sweeps over all (p, q) pairs in row order, zeroing each pivot with a
    Givens rotation.  Stops once the off-diagonal Frobenius norm is at
    most `tol`; raises NoConvergence if `max_sweeps` sweeps were not
    enough.  Ties in the descending eigenvalue sort are broken by the
    diagonal index, so results are deterministic.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if max_sweeps < 1:
        raise ValueError("max_sweeps must be at least 1")

    n = a.n
    m = a.values.copy()
    v = np.eye(n)
    # Pivots below this cannot by themselves keep the off-norm above tol.
    skip = tol / (n * n) if n > 1 else 0.0

    converged = n == 1
    for _ in range(max_sweeps):
        if _offdiagonal_norm(m) <= tol:
            converged = True
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = m[p, q]
                if abs(apq) <= skip:
                    continue
                theta = (m[q, q] - m[p, p]) / (2.0 * apq)
                if theta != 0.0:
                    t = np.sign(theta) / (abs(theta) + np.sqrt(1.0 + theta * theta))
                else:
                    t = 1.0
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                rp = m[p, :].copy()
                rq = m[q, :].copy()
                m[p, :] = c * rp - s * rq
                m[q, :] = s * rp + c * rq
                cp = m[:, p].copy()
                cq = m[:, q].copy()
                m[:, p] = c * cp - s * cq
                m[:, q] = s * cp + c * cq
                m[p, q] = 0.0
                m[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    if not converged and _offdiagonal_norm(m) > tol:
        raise NoConvergence(
            f"off-diagonal norm {_offdiagonal_norm(m):.3e} > {tol:.3e} after {max_sweeps} sweeps"
        )

    lam = np.diag(m).copy()
    order = sorted(range(n), key=lambda i: (-lam[i], i))
    return EigenDecomposition(eigenvalues=lam[order], eigenvectors=v[:, order])


def sorted_eigenvalues(a: SymMatrix) -> np.ndarray:
    """Descending eigenvalues of `a` (Jacobi with default tolerances)."""
    return jacobi_eigen(a, tol=1e-10, max_sweeps=100).eigenvalues
