"""Clustered boundary data: start or end locations with multiplicities."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["BoundaryData", "cluster_points", "as_boundary"]


@dataclass(frozen=True)
class BoundaryData:
    """Distinct locations ``values`` (strictly increasing) with ``mults``.

    Represents the diagonal matrix in which ``values[i]`` is repeated
    ``mults[i]`` times.
    """

    values: tuple
    mults: tuple

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        mults = tuple(int(m) for m in self.mults)
        if len(values) != len(mults) or not values:
            raise ValueError("values and mults must be non-empty and of equal length")
        if any(m < 1 for m in mults):
            raise ValueError("multiplicities must be positive integers")
        if not all(np.isfinite(values)):
            raise ValueError("cluster values must be finite")
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ValueError("cluster values must be strictly increasing")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "mults", mults)

    @classmethod
    def from_clusters(cls, clusters) -> "BoundaryData":
        """Build from ``[(value, mult), ...]``."""
        clusters = list(clusters)
        return cls(tuple(v for v, _ in clusters), tuple(m for _, m in clusters))

    @classmethod
    def distinct(cls, values) -> "BoundaryData":
        """All multiplicities one; values are sorted."""
        v = np.sort(np.asarray(values, dtype=float).ravel())
        return cls(tuple(v), (1,) * v.size)

    @classmethod
    def scalar(cls, value: float, n: int) -> "BoundaryData":
        """``value * I_n``."""
        return cls((value,), (n,))

    @property
    def n(self) -> int:
        return sum(self.mults)

    @property
    def p(self) -> int:
        return len(self.values)

    @property
    def points(self) -> np.ndarray:
        """The diagonal of the matrix, with repetitions."""
        return np.repeat(np.asarray(self.values), self.mults)

    @property
    def is_distinct(self) -> bool:
        return all(m == 1 for m in self.mults)

    def trace(self, power: int = 1) -> float:
        return float(sum(m * v**power for v, m in zip(self.values, self.mults)))

    def shifted(self, c: float) -> "BoundaryData":
        return BoundaryData(tuple(v + c for v in self.values), self.mults)

    def scaled(self, s: float) -> "BoundaryData":
        if s <= 0:
            raise ValueError("scale must be positive to keep the ordering")
        return BoundaryData(tuple(v * s for v in self.values), self.mults)

    def rows(self):
        """Row labels ``(cluster index, derivative order)`` in block order."""
        return [(i, r) for i, m in enumerate(self.mults) for r in range(m)]


def cluster_points(values, tol: float = 1e-8) -> BoundaryData:
    """Group nearly coincident points into clusters.

    Sorted values are scanned left to right; a value joins the running cluster
    when it lies within ``tol * max(1, diameter)`` of the cluster mean, where
    the diameter is ``max - min`` of the input. Each cluster is represented by
    the mean of its members.
    """
    if tol < 0:
        raise ValueError("tol must be non-negative")
    x = np.sort(np.asarray(values, dtype=float).ravel())
    if x.size == 0:
        raise ValueError("need at least one value")
    thresh = tol * max(1.0, float(x[-1] - x[0]))
    groups = [[x[0]]]
    for v in x[1:]:
        if abs(v - np.mean(groups[-1])) <= thresh:
            groups[-1].append(v)
        else:
            groups.append([v])
    return BoundaryData(tuple(float(np.mean(g)) for g in groups), tuple(len(g) for g in groups))


def as_boundary(data, tol: float = 1e-8) -> BoundaryData:
    """Pass ``BoundaryData`` through; cluster anything else."""
    if isinstance(data, BoundaryData):
        return data
    return cluster_points(data, tol)
