"""Capped dyadic A-like gropes as labeled rooted forests."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from types import MappingProxyType
from typing import Any, Dict, FrozenSet, List, Mapping, Optional, Tuple

from errors import GropeTowerError, ValidationError
from trees import Bracket, Height, UnrootedTree, degree, is_right_normed, is_shape, parse_bracket, unroot, validate_label, y_tree

logger = logging.getLogger(__name__)


class GropeKind(str, Enum):
    """Starting-surface kind; recorded for reports only"""

    DISK = "disk"
    ANNULUS = "annulus"


@dataclass(frozen=True)
class CappedGrope:
    """
    For every surface label i, the rooted trees of the gropes attached to the
    0th stage A_i^0. A leaf labeled j is a cap meeting A_j^0 once.

    Leaf labels must be keys of ``bodies`` or declared ``external`` surfaces.
    """

    bodies: Mapping[str, Tuple[Bracket, ...]]
    kind: GropeKind = GropeKind.DISK
    external: FrozenSet[str] = frozenset()

    def __post_init__(self):
        frozen = {validate_label(k): tuple(v) for k, v in sorted(self.bodies.items())}
        object.__setattr__(self, "bodies", MappingProxyType(frozen))
        object.__setattr__(self, "kind", GropeKind(self.kind))
        object.__setattr__(self, "external", frozenset(self.external))
        if not frozen:
            raise ValidationError("A grope needs at least one surface")
        known = set(frozen) | set(self.external)
        for surface, forest in frozen.items():
            if not forest:
                raise ValidationError(f"Surface {surface!r} has an empty forest")
            for b in forest:
                if not b.is_labeled:
                    raise ValidationError(f"Bracket {b} on {surface!r} has anonymous leaves")
                stray = set(b.leaves) - known
                if stray:
                    raise ValidationError(f"Caps of {b} on {surface!r} hit undeclared surfaces {sorted(stray)}")

    @property
    def surfaces(self) -> FrozenSet[str]:
        return frozenset(self.bodies) | self.external

    def brackets(self) -> List[Tuple[str, Bracket]]:
        return [(surface, b) for surface, forest in self.bodies.items() for b in forest]

    def trees(self) -> List[Tuple[str, UnrootedTree]]:
        """Each body unrooted, its root becoming a leaf labeled by the owning surface"""
        return [(surface, unroot(b, surface)) for surface, b in self.brackets()]

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "CappedGrope":
        """
        Read ``{"bodies": {"1": ["(2,(3,3))", ...]}, "kind": "disk"}``.

        When ``external`` is absent every cap label that is not a body key is
        taken as an external surface.
        """
        try:
            bodies = {str(k): tuple(parse_bracket(text) for text in v) for k, v in data["bodies"].items()}
            kind = GropeKind(data.get("kind", "disk"))
        except (KeyError, TypeError, AttributeError) as e:
            raise ValidationError(f"Malformed grope: {e}") from None
        except ValueError as e:
            if isinstance(e, GropeTowerError):
                raise
            raise ValidationError(f"Malformed grope: {e}") from None
        if "external" in data:
            external = frozenset(data["external"])
        else:
            external = frozenset(label for forest in bodies.values() for b in forest for label in b.leaves) - set(bodies)
            if external:
                logger.debug("inferred external surfaces %s", sorted(external))
        return cls(bodies, kind, external)

    def to_json(self) -> Dict[str, Any]:
        return {
            "bodies": {k: [b.key for b in forest] for k, forest in self.bodies.items()},
            "kind": self.kind.value,
            "external": sorted(self.external),
        }


def grope_class(g: CappedGrope) -> Tuple[Dict[str, int], int]:
    """Per-surface class (least degree in its forest) and the overall minimum"""
    per_surface = {surface: min(degree(b) for b in forest) for surface, forest in g.bodies.items()}
    return per_surface, min(per_surface.values())


def _candidate_height(d: int) -> Optional[Height]:
    n = d.bit_length() - 1
    if d >= 2 and d == 2 ** n:
        return Height(n)
    if d >= 3 and d % 3 == 0:
        m = d // 3
        k = m.bit_length() - 1
        if m == 2 ** k:
            return Height(k + 1, True)
    return None


def is_symmetric_height(g: CappedGrope) -> Optional[Height]:
    """The height h with every tree of shape Y^h exactly, or None"""
    brackets = [b for _, b in g.brackets()]
    h = _candidate_height(degree(brackets[0]))
    if h is None:
        return None
    shape = y_tree(h)
    if all(is_shape(b, shape) for b in brackets):
        return h
    return None


def is_half_grope(g: CappedGrope) -> bool:
    """Every tree simple with its root at an end: the brackets are right-normed"""
    return all(is_right_normed(b) for _, b in g.brackets())
