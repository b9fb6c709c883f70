"""Seeded stratified train/test partition."""

from __future__ import annotations

import math

import numpy as np

from ..errors import DomainError, EmptyInputError
from ..rng import as_generator
from .schema import Dataset


def stratified_split_indices(labels, test_fraction: float, seed) -> tuple[np.ndarray, np.ndarray]:
    """Sorted (train, test) index arrays preserving class proportions.

    Each class sends ``round(n_c * test_fraction)`` members to test, clamped so
    that a class with at least two members lands on both sides.
    """
    labels = np.asarray(labels)
    if labels.size == 0:
        raise EmptyInputError("cannot split an empty dataset")
    if not 0 <= test_fraction < 1:
        raise DomainError(f"test_fraction must lie in [0, 1), got {test_fraction}")
    rng = as_generator(seed)
    train, test = [], []
    for c in np.unique(labels):
        members = np.flatnonzero(labels == c)
        rng.shuffle(members)
        n_c = members.size
        n_test = math.floor(n_c * test_fraction + 0.5)
        if test_fraction > 0 and n_c >= 2:
            n_test = min(max(n_test, 1), n_c - 1)
        test.extend(members[:n_test])
        train.extend(members[n_test:])
    return np.sort(np.array(train, dtype=np.intp)), np.sort(np.array(test, dtype=np.intp))


def stratified_split(dataset: Dataset, test_fraction: float, seed) -> tuple[Dataset, Dataset]:
    tr, te = stratified_split_indices(dataset.labels, test_fraction, seed)
    return dataset.subset(tr), dataset.subset(te)
