"""Pair-based validation of overlapping clusterings.

Two points are a linked pair when they share at least one cluster.  With
NCILP / NILP / NTLP the counts of correctly-identified, identified, and
true linked pairs:

    precision = NCILP / NILP
    recall    = NCILP / NTLP
    f_measure = harmonic mean of precision and recall

Degenerate denominators: an empty predicted pair set scores precision 1
against an empty true pair set (perfect agreement) and 0 otherwise, and
symmetrically for recall, so the metrics are total.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class LabeledCovering:
    """Ground truth: one non-empty set of category ids per point."""

    label_sets: tuple

    def __post_init__(self):
        sets = tuple(frozenset(s) for s in self.label_sets)
        if any(len(s) == 0 for s in sets):
            raise ValueError("every point needs at least one label")
        object.__setattr__(self, "label_sets", sets)

    @property
    def n(self):
        return len(self.label_sets)


@dataclass(frozen=True)
class PairMetrics:
    ncilp: int
    nilp: int
    ntlp: int
    precision: float
    recall: float
    f_measure: float


def _membership_sets(c):
    if hasattr(c, "label_sets"):
        return c.label_sets
    if hasattr(c, "assignments"):
        return c.assignments
    return tuple(frozenset(s) for s in c)


def linked_pairs(c) -> set:
    """All unordered index pairs (i, j), i < j, sharing a cluster.

    Accepts a Covering, a LabeledCovering, or any sequence of sets.
    """
    sets = _membership_sets(c)
    n = len(sets)
    pairs = set()
    for i in range(n):
        si = sets[i]
        for j in range(i + 1, n):
            if si & sets[j]:
                pairs.add((i, j))
    return pairs


def pair_metrics(predicted, truth) -> PairMetrics:
    """Precision / recall / F over linked pairs of `predicted` vs `truth`."""
    pred_sets = _membership_sets(predicted)
    true_sets = _membership_sets(truth)
    if len(pred_sets) != len(true_sets):
        raise ValueError(
            f"point counts differ: predicted {len(pred_sets)}, truth {len(true_sets)}"
        )

    identified = linked_pairs(pred_sets)
    true_pairs = linked_pairs(true_sets)
    ncilp = len(identified & true_pairs)
    nilp = len(identified)
    ntlp = len(true_pairs)

    if nilp > 0:
        precision = ncilp / nilp
    else:
        precision = 1.0 if ntlp == 0 else 0.0
    if ntlp > 0:
        recall = ncilp / ntlp
    else:
        recall = 1.0 if nilp == 0 else 0.0
    if precision + recall > 0:
        f_measure = 2.0 * precision * recall / (precision + recall)
    else:
        f_measure = 0.0
    return PairMetrics(ncilp=ncilp, nilp=nilp, ntlp=ntlp,
                       precision=precision, recall=recall, f_measure=f_measure)
