"""Overlapping k-means: points may belong to several clusters at once.

Each point is matched against its *image*, the componentwise mean of the
prototypes of every cluster it belongs to, and the criterion

    J = sum_i  dissim(x_i, image(x_i))

is minimized by alternating two steps:

  * assignment: clusters sorted by prototype dissimilarity; starting
    from the nearest, further clusters are added greedily while the
    image keeps improving.  From the second iteration on, a point keeps
    its previous cluster set whenever that set beats the fresh greedy
    one, which makes the per-point criterion non-increasing.
  * prototype update: each cluster moves to the weighted mean of its
    members' residual targets (weight 1/|A_i|^2, residual |A_i| x_i
    minus the other assigned prototypes), updated sequentially in
    cluster order using the freshest values.  For squared Euclidean
    this is the exact coordinate minimizer, so J never increases; for
    the other measures a revert-and-stop safeguard handles the rare
    non-monotone step.

Empty clusters keep their previous prototype.  Runs are deterministic
in the seed: initial prototypes are k distinct data rows sampled
uniformly without replacement.
"""

from dataclasses import dataclass

import numpy as np

from .dataio import DataMatrix
from .divergences import Dissimilarity, DissimilarityKind, dissim
from .errors import EmptyAssignment, InsufficientData, InvalidSpec

_REL_TOL_GUARD = 1e-12


@dataclass(frozen=True)
class OkmConfig:
    k: int
    dissimilarity: Dissimilarity
    max_iter: int = 100
    rel_tol: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise InvalidSpec(f"k must be >= 1, got {self.k}")
        if self.max_iter < 1:
            raise InvalidSpec(f"max_iter must be >= 1, got {self.max_iter}")
        if not (np.isfinite(self.rel_tol) and self.rel_tol > 0):
            raise InvalidSpec(f"rel_tol must be positive, got {self.rel_tol}")


@dataclass(frozen=True)
class Covering:
    """k possibly-overlapping clusters over n points, plus the final J."""

    k: int
    assignments: tuple
    prototypes: np.ndarray
    objective: float
    n_iter: int

    def __post_init__(self):
        if self.objective < 0:
            raise ValueError(f"objective must be nonnegative, got {self.objective}")
        sets = tuple(frozenset(a) for a in self.assignments)
        for i, assigned in enumerate(sets):
            if not assigned:
                raise EmptyAssignment(f"point {i} has no cluster")
            if any(not (0 <= c < self.k) for c in assigned):
                raise ValueError(f"point {i} references a cluster outside 0..{self.k - 1}")
        object.__setattr__(self, "assignments", sets)


def image(assigned, prototypes) -> np.ndarray:
    """Mean of the prototypes of the clusters in `assigned`."""
    ids = sorted(assigned)
    if not ids:
        raise EmptyAssignment("image of an empty cluster set is undefined")
    return prototypes[ids].mean(axis=0)


def assign_point(x, prototypes, d: Dissimilarity, previous=None) -> frozenset:
    """Greedy cluster-set choice for one point at fixed prototypes.

    Scans clusters in order of increasing prototype dissimilarity (ties
    by id), growing the set while the image dissimilarity improves and
    stopping at the first candidate that does not.  If `previous` beats
    the greedy result it is returned unchanged.
    """
    k = len(prototypes)
    order = sorted(range(k), key=lambda c: (dissim(d, x, prototypes[c]), c))
    chosen = [order[0]]
    best = dissim(d, x, image(chosen, prototypes))
    for c in order[1:]:
        candidate = chosen + [c]
        dist = dissim(d, x, image(candidate, prototypes))
        if dist < best:
            chosen = candidate
            best = dist
        else:
            break
    if previous is not None:
        if dissim(d, x, image(previous, prototypes)) < best:
            return frozenset(previous)
    return frozenset(chosen)


def _update_prototypes(assignments, prototypes, values, nonneg=False):
    k = len(prototypes)
    new = prototypes.copy()
    for c in range(k):
        members = [i for i, assigned in enumerate(assignments) if c in assigned]
        if not members:
            continue
        num = np.zeros(values.shape[1])
        den = 0.0
        for i in members:
            ids = sorted(assignments[i])
            a = len(ids)
            residual = a * values[i] - sum(new[other] for other in ids if other != c)
            num += residual / (a * a)
            den += 1.0 / (a * a)
        moved = num / den
        if nonneg:
            moved = np.maximum(moved, 0.0)
        new[c] = moved
    return new


def update_prototypes(cov: Covering, data) -> np.ndarray:
    """Recompute all k prototypes for fixed assignments."""
    values = np.asarray(getattr(data, "values", data), dtype=float)
    return _update_prototypes(cov.assignments, cov.prototypes, values)


def _objective(assignments, prototypes, values, d):
    return sum(dissim(d, values[i], image(assignments[i], prototypes))
               for i in range(len(values)))


def objective(cov: Covering, d: Dissimilarity, data) -> float:
    """Recompute J for a covering from scratch."""
    values = np.asarray(getattr(data, "values", data), dtype=float)
    return _objective(cov.assignments, cov.prototypes, values, d)


def run_okm(data, config: OkmConfig, on_iteration=None) -> Covering:
    """One clustering run: initialize, alternate assign/update, stop.

    Stops when assignments repeat, the relative improvement of J falls
    below `rel_tol`, `max_iter` is reached, or J increases (the state
    then reverts to the previous iteration).  `on_iteration(i, J)`, if
    given, is called after each completed iteration.
    """
    values = np.asarray(getattr(data, "values", data), dtype=float)
    n = len(values)
    if n < config.k:
        raise InsufficientData(f"{n} points cannot seed {config.k} clusters")
    d = config.dissimilarity
    nonneg = d.kind == DissimilarityKind.I_DIVERGENCE

    rng = np.random.default_rng(config.seed)
    idx = rng.choice(n, size=config.k, replace=False)
    prototypes = values[idx].copy()

    assignments = None
    current_j = None
    iterations = 0
    for _ in range(config.max_iter):
        new_assignments = [
            assign_point(values[i], prototypes, d,
                         None if assignments is None else assignments[i])
            for i in range(n)
        ]
        new_prototypes = _update_prototypes(new_assignments, prototypes, values, nonneg)
        new_j = _objective(new_assignments, new_prototypes, values, d)
        if current_j is not None and new_j > current_j:
            break  # safeguard: keep the previous (better) state
        unchanged = assignments is not None and new_assignments == assignments
        improvement = None if current_j is None else (current_j - new_j) / max(current_j, _REL_TOL_GUARD)
        assignments, prototypes, current_j = new_assignments, new_prototypes, new_j
        iterations += 1
        if on_iteration is not None:
            on_iteration(iterations, current_j)
        if unchanged or (improvement is not None and improvement < config.rel_tol):
            break

    return Covering(k=config.k, assignments=tuple(assignments), prototypes=prototypes,
                    objective=current_j, n_iter=iterations)
