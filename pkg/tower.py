"""
Whitney tower data models.

A RawTower is an ingestion format (disk forest plus the list of unpaired
intersection points); everything downstream works on the SplitTower, the
multiset of punctured trees of its split subtowers.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import total_ordering
from typing import Any, Dict, FrozenSet, List, Optional, Sequence, Tuple, Union

from errors import GropeTowerError, ValidationError
from rewrite import normalize_simple
from trees import (
    Bracket,
    EdgeRef,
    Height,
    PuncturedTree,
    UnrootedTree,
    decompose_at_edge,
    leaf,
    pair,
    parse_bracket,
    parse_punctured,
    unrooted_product,
    validate_label,
)

logger = logging.getLogger(__name__)


@total_ordering
@dataclass(frozen=True)
class OrderValue:
    """A finite order n >= 0, or unbounded (no unpaired points)"""

    value: Optional[int] = None

    @classmethod
    def finite(cls, n: int) -> "OrderValue":
        if n < 0:
            raise ValidationError(f"Order must be non-negative, got {n}")
        return cls(n)

    @property
    def is_unbounded(self) -> bool:
        return self.value is None

    def __lt__(self, other: "OrderValue") -> bool:
        if not isinstance(other, OrderValue):
            return NotImplemented
        if self.value is None:
            return False
        return other.value is None or self.value < other.value

    def to_json(self) -> Union[int, str]:
        return "unbounded" if self.value is None else self.value

    def __str__(self) -> str:
        return "unbounded" if self.value is None else str(self.value)


UNBOUNDED = OrderValue()


def order_of_point(a: Bracket, b: Bracket) -> int:
    """Order of a point between surfaces of orders n and m: n + m + 1"""
    return a.trivalent_count + b.trivalent_count + 1


def _as_bracket(value: Any) -> Bracket:
    """Disk entries are bracket text or nested two-element lists of ids"""
    if isinstance(value, str):
        return parse_bracket(value)
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return pair(_as_bracket(value[0]), _as_bracket(value[1]))
    raise ValidationError(f"Cannot read {value!r} as a bracket of ids")


@dataclass(frozen=True)
class RawTower:
    """
    Surfaces, Whitney disks indexed by brackets over surface labels and disk
    ids, and the unpaired intersection points as pairs of ids. ``framed`` is
    an attestation carried along, never computed.
    """

    surfaces: FrozenSet[str]
    disks: Tuple[Tuple[str, Bracket], ...] = ()
    points: Tuple[Tuple[str, str], ...] = ()
    framed: bool = True

    def __post_init__(self):
        for label in self.surfaces:
            validate_label(label)
        for disk_id, b in self.disks:
            validate_label(disk_id)
            if disk_id in self.surfaces:
                raise ValidationError(f"Disk id {disk_id!r} collides with a surface label")
            if b.is_leaf:
                raise ValidationError(f"Disk {disk_id!r} must pair two sheets, got {b}")

    @property
    def disk_map(self) -> Dict[str, Bracket]:
        return dict(self.disks)

    def resolve(self, ident: str) -> Bracket:
        """Expand an id into a bracket over surface labels"""
        return self._resolve(ident, self.disk_map, ())

    def _resolve(self, ident: str, disks: Dict[str, Bracket], stack: Tuple[str, ...]) -> Bracket:
        if ident in self.surfaces:
            return leaf(ident)
        if ident not in disks:
            raise ValidationError(f"Unresolved id {ident!r}")
        if ident in stack:
            raise ValidationError(f"Cyclic disk reference: {' -> '.join(stack + (ident,))}")
        return self._expand(disks[ident], disks, stack + (ident,))

    def _expand(self, b: Bracket, disks: Dict[str, Bracket], stack: Tuple[str, ...]) -> Bracket:
        if b.is_leaf:
            return self._resolve(b.label, disks, stack)
        return pair(self._expand(b.left, disks, stack), self._expand(b.right, disks, stack))

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "RawTower":
        try:
            surfaces = frozenset(data["surfaces"])
            disks = tuple(sorted((str(k), _as_bracket(v)) for k, v in data.get("disks", {}).items()))
            points = tuple((str(a), str(b)) for a, b in data.get("points", []))
        except (KeyError, TypeError, ValueError) as e:
            if isinstance(e, GropeTowerError):
                raise
            raise ValidationError(f"Malformed raw tower: {e}") from None
        return cls(surfaces, disks, points, bool(data.get("framed", True)))

    def to_json(self) -> Dict[str, Any]:
        return {
            "surfaces": sorted(self.surfaces),
            "disks": {k: b.key for k, b in self.disks},
            "points": [list(p) for p in self.points],
            "framed": self.framed,
        }


@dataclass(frozen=True)
class SplitTower:
    """Surface labels plus the punctured trees of the split subtowers"""

    surfaces: FrozenSet[str]
    trees: Tuple[PuncturedTree, ...] = ()

    def __post_init__(self):
        for label in self.surfaces:
            validate_label(label)
        for tp in self.trees:
            stray = set(tp.tree.leaf_labels) - self.surfaces
            if stray:
                raise ValidationError(f"Tree {tp} uses labels {sorted(stray)} outside the surfaces")

    def unpunctured(self) -> List[UnrootedTree]:
        return [tp.tree for tp in self.trees]

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "SplitTower":
        try:
            trees = []
            for entry in data.get("trees", []):
                text = entry["tree"] if isinstance(entry, dict) else entry
                tp = parse_punctured(text)
                if isinstance(entry, dict) and "puncture" in entry:
                    tp = PuncturedTree(tp.tree, int(entry["puncture"]))
                trees.append(tp)
            surfaces = data.get("surfaces")
            if surfaces is None:
                surfaces = sorted({label for tp in trees for label in tp.tree.leaf_labels})
            return cls(frozenset(surfaces), tuple(trees))
        except (KeyError, TypeError) as e:
            raise ValidationError(f"Malformed split tower: {e}") from None
        except ValueError as e:
            if isinstance(e, GropeTowerError):
                raise
            raise ValidationError(f"Malformed split tower: {e}") from None

    def to_json(self) -> Dict[str, Any]:
        return {
            "surfaces": sorted(self.surfaces),
            "trees": [{"tree": tp.key, "puncture": tp.puncture, "unrooted": tp.tree.canonical_key} for tp in self.trees],
        }


def extract_split(raw: RawTower) -> SplitTower:
    """One punctured tree per unpaired point: the unrooted product of its two sheets"""
    trees = []
    for a, b in raw.points:
        tp = unrooted_product(raw.resolve(a), raw.resolve(b))
        logger.debug("point %s x %s -> %s (order %d)", a, b, tp, tp.degree)
        trees.append(tp)
    return SplitTower(raw.surfaces, tuple(trees))


def tower_order(T: SplitTower) -> OrderValue:
    """min over trees of degree - 1; unbounded when there are no unpaired points"""
    if not T.trees:
        return UNBOUNDED
    return OrderValue.finite(min(tp.degree for tp in T.trees) - 1)


def simple_tower(T: SplitTower) -> SplitTower:
    """Replace every tree by its simple IHX normal forms; punctures go to edge 0"""
    trees = []
    for tree in T.unpunctured():
        for simple in normalize_simple(tree):
            trees.append(PuncturedTree(simple, 0))
    return SplitTower(T.surfaces, tuple(trees))


# -- Height --------------------------------------------------------------------

@dataclass
class TreeHeightReport:
    tree: str
    degree: int
    ok: bool
    puncture: Optional[EdgeRef] = None
    sides: Tuple[str, str] = ("", "")
    kind: str = ""
    reason: str = ""

    def to_json(self) -> Dict[str, Any]:
        return {
            "tree": self.tree,
            "degree": self.degree,
            "ok": self.ok,
            "puncture": self.puncture,
            "sides": list(self.sides),
            "kind": self.kind,
            "reason": self.reason,
        }


@dataclass
class HeightReport:
    height: Height
    ok: bool
    trees: List[TreeHeightReport] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok

    def to_json(self) -> Dict[str, Any]:
        return {"height": str(self.height), "ok": self.ok, "trees": [t.to_json() for t in self.trees]}


def min_height_degree(h: Height) -> int:
    """Smallest admissible tree degree: 2^n - 1, or 2^n + 2^(n-1) - 1 for n.5"""
    return 2 ** h.n + 2 ** (h.n - 1) - 1 if h.half else 2 ** h.n - 1


def _sibling_pairs(a: Bracket, b: Bracket) -> List[Tuple[int, int]]:
    pairs = [(a.trivalent_count, b.trivalent_count)]
    stack = [a, b]
    while stack:
        node = stack.pop()
        if not node.is_leaf:
            x, y = node.children
            pairs.append((x.trivalent_count, y.trivalent_count))
            stack.extend((x, y))
    return pairs


def _pair_allowed(p: int, q: int, h: Height) -> bool:
    """Whitney disks of tower order may only meet surfaces of the same order"""
    bound = 2 ** h.n - 1 if h.half else 2 ** h.n - 2
    top, lower = 2 ** h.n - 1, 2 ** (h.n - 1) - 1
    for mine, other in ((p, q), (q, p)):
        if mine == 0 or mine > bound or mine == other:
            continue
        if h.half and {mine, other} == {top, lower}:
            continue
        return False
    return True


def _kind(a: Bracket, b: Bracket, h: Height) -> str:
    if not h.half:
        return "standard"
    top, lower = 2 ** h.n - 1, 2 ** (h.n - 1) - 1
    pairs = _sibling_pairs(a, b)
    if (top, top) in pairs:
        return "top-top"
    if (top, lower) in pairs or (lower, top) in pairs:
        return "top-lower"
    return "standard"


def check_tree_height(tp: PuncturedTree, h: Height) -> TreeHeightReport:
    """
    Check one punctured tree against height ``h``, over every puncture position.

    The current puncture is tried first, then the other edges in index order.
    """
    tree = tp.tree
    report = TreeHeightReport(tree.canonical_key, tree.degree, False)
    if tree.degree < min_height_degree(h):
        report.reason = f"degree {tree.degree} < {min_height_degree(h)}"
        return report
    order = [tp.puncture] + [e for e in range(len(tree.edges)) if e != tp.puncture]
    for e in order:
        a, b = decompose_at_edge(tree, e)
        if all(_pair_allowed(p, q, h) for p, q in _sibling_pairs(a, b)):
            report.ok = True
            report.puncture = e
            report.sides = (a.key, b.key)
            report.kind = _kind(a, b, h)
            return report
    report.reason = "no puncture position keeps Whitney disks meeting same-order surfaces"
    return report


def check_height(T: SplitTower, h: Union[Height, str, float, int]) -> HeightReport:
    """Height predicate with a per-tree report"""
    h = Height.parse(h)
    reports = [check_tree_height(tp, h) for tp in T.trees]
    return HeightReport(h, all(r.ok for r in reports), reports)
