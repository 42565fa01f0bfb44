"""Shannon measures in bits on :class:`JointDistribution` values."""

from __future__ import annotations

import math
from collections.abc import Iterable
from dataclasses import dataclass

from .dist_core import JointDistribution, marginal
from .errors import EmptySelection, InconsistentMeasure, OverlappingGroups

# Values in (-NEGATIVE_SLACK, 0) are rounding noise and reported as 0.
NEGATIVE_SLACK = 1e-12


@dataclass(frozen=True)
class InfoQuery:
    x: frozenset[str]
    y: frozenset[str]
    given: frozenset[str] = frozenset()

    def __post_init__(self):
        for field in ("x", "y", "given"):
            object.__setattr__(self, field, frozenset(getattr(self, field)))
        if not self.x or not self.y:
            raise EmptySelection("both groups of an information query must be non-empty")
        if self.x & self.y or self.x & self.given or self.y & self.given:
            raise OverlappingGroups(f"groups overlap: {sorted(self.x)} / {sorted(self.y)} / {sorted(self.given)}")

    def evaluate(self, dist: JointDistribution) -> float:
        return conditional_mutual_information(dist, self.x, self.y, self.given)


def clamp(value: float) -> float:
    if value < -NEGATIVE_SLACK:
        raise InconsistentMeasure(f"information measure evaluated to {value!r}")
    return max(value, 0.0)


def _entropy_raw(dist: JointDistribution, names: set[str]) -> float:
    if not names:
        return 0.0
    h = 0.0
    for _, p in marginal(dist, names).support():
        q = float(p)
        h -= q * math.log2(q)
    return h


def entropy(dist: JointDistribution, names: Iterable[str]) -> float:
    names = set(names)
    if not names:
        raise EmptySelection("entropy needs at least one variable")
    return clamp(_entropy_raw(dist, names))


def _disjoint(*groups: set[str]):
    seen: set[str] = set()
    for g in groups:
        if seen & g:
            raise OverlappingGroups(f"variable(s) {sorted(seen & g)} appear in more than one group")
        seen |= g


def mutual_information(dist: JointDistribution, x: Iterable[str], y: Iterable[str]) -> float:
    return conditional_mutual_information(dist, x, y, ())


def conditional_mutual_information(dist: JointDistribution, x: Iterable[str], y: Iterable[str], given: Iterable[str] = ()) -> float:
    """I(x : y | given) = H(x,g) + H(y,g) - H(x,y,g) - H(g)."""
    x, y, g = set(x), set(y), set(given)
    if not x or not y:
        raise EmptySelection("mutual information needs two non-empty groups")
    _disjoint(x, y, g)
    for n in x | y | g:
        dist.position(n)
    value = _entropy_raw(dist, x | g) + _entropy_raw(dist, y | g) - _entropy_raw(dist, x | y | g) - _entropy_raw(dist, g)
    return clamp(value)
