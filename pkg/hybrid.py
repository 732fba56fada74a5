"""
Grope subtowers as tagged trees, the two elementary moves between gropes and
Whitney towers, and the conversion drivers built from them.

A HybridTree is a rooted binary tree whose trivalent vertices are tagged
Grope (a surface stage) or Tower (a Whitney disk in a split subtower on a cap).
Nodes are numbered in bracket preorder; a puncture on node ``i`` marks the
edge above ``i`` (node 0's edge is the root link).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from types import MappingProxyType
from typing import Any, Dict, FrozenSet, List, Mapping, Optional, Sequence, Tuple, Union

from errors import PreconditionError, ValidationError
from grope import CappedGrope
from tower import SplitTower
from trees import (
    Bracket,
    PuncturedTree,
    UnrootedTree,
    parse_bracket,
    place_puncture_at_leaf,
    reroot_at_leaf,
    unroot,
)

logger = logging.getLogger(__name__)

# Preference value choosing the leaf at the end of the punctured edge.
PUNCTURED_LEAF = "@puncture"


class Tag(str, Enum):
    GROPE = "G"
    TOWER = "T"


@dataclass(frozen=True)
class CapComponent:
    """A maximal Tower/leaf region: the split subtower supported by one cap"""

    boundary: int
    nodes: Tuple[int, ...]
    puncture: int
    tower_count: int


@dataclass(frozen=True)
class HybridTree:
    bracket: Bracket
    tags: Tuple[Optional[Tag], ...]
    punctures: FrozenSet[int]

    def __post_init__(self):
        try:
            object.__setattr__(self, "tags", tuple(None if t is None else Tag(t) for t in self.tags))
        except ValueError as e:
            raise ValidationError(str(e)) from None
        object.__setattr__(self, "punctures", frozenset(self.punctures))
        nodes = self._nodes
        if len(self.tags) != len(nodes):
            raise ValidationError(f"Expected {len(nodes)} tags, got {len(self.tags)}")
        for i, node in enumerate(nodes):
            if node.is_leaf != (self.tags[i] is None):
                raise ValidationError(f"Node {i}: leaves carry no tag and pair nodes need one")
        for i in self.grope_nodes:
            parent = self._parent[i]
            if parent is not None and self.tags[parent] is not Tag.GROPE:
                raise ValidationError(f"Grope node {i} hangs below a Tower node")
        if not all(0 <= p < len(nodes) for p in self.punctures):
            raise ValidationError(f"Puncture out of range: {sorted(self.punctures)}")
        # cap_components checks one puncture per component
        placed = {c.puncture for c in self.cap_components}
        if placed != self.punctures:
            raise ValidationError(f"Punctures {sorted(self.punctures - placed)} lie on Grope edges")

    # structure

    @cached_property
    def _index(self) -> Tuple[List[Bracket], List[Optional[int]], List[Tuple[int, ...]]]:
        nodes: List[Bracket] = []
        parent: List[Optional[int]] = []
        children: List[Tuple[int, ...]] = []

        def visit(node: Bracket, par: Optional[int]) -> int:
            i = len(nodes)
            nodes.append(node)
            parent.append(par)
            children.append(())
            if not node.is_leaf:
                children[i] = tuple(visit(c, i) for c in node.children)
            return i

        visit(self.bracket, None)
        return nodes, parent, children

    @property
    def _nodes(self) -> List[Bracket]:
        return self._index[0]

    @property
    def _parent(self) -> List[Optional[int]]:
        return self._index[1]

    @property
    def _children(self) -> List[Tuple[int, ...]]:
        return self._index[2]

    def subtree(self, i: int) -> Tuple[int, ...]:
        out = [i]
        for c in self._children[i]:
            out.extend(self.subtree(c))
        return tuple(out)

    @property
    def grope_nodes(self) -> Tuple[int, ...]:
        return tuple(i for i, t in enumerate(self.tags) if t is Tag.GROPE)

    @property
    def tower_nodes(self) -> Tuple[int, ...]:
        return tuple(i for i, t in enumerate(self.tags) if t is Tag.TOWER)

    @cached_property
    def cap_components(self) -> Tuple[CapComponent, ...]:
        out = []
        for i, tag in enumerate(self.tags):
            if tag is Tag.GROPE:
                continue
            parent = self._parent[i]
            if parent is not None and self.tags[parent] is not Tag.GROPE:
                continue
            nodes = self.subtree(i)
            inside = [p for p in self.punctures if p in nodes]
            if len(inside) != 1:
                raise ValidationError(f"Cap component at node {i} holds {len(inside)} punctures, expected 1")
            towers = sum(1 for n in nodes if self.tags[n] is Tag.TOWER)
            out.append(CapComponent(i, nodes, inside[0], towers))
        return tuple(out)

    def component(self, boundary: int) -> CapComponent:
        for c in self.cap_components:
            if c.boundary == boundary:
                return c
        raise PreconditionError(f"Node {boundary} is not the boundary of a cap component")

    def dual_pairs(self) -> List[Tuple[int, int]]:
        """Children pairs of Grope nodes: the dual caps or dual sub-gropes of each stage"""
        return [self._children[i] for i in self.grope_nodes]

    # construction and views

    @classmethod
    def from_bracket(cls, b: Bracket, tag: Union[Tag, str] = Tag.GROPE, puncture: int = 0) -> "HybridTree":
        """All-Grope (punctures on the leaf edges) or all-Tower (one puncture) tree over ``b``"""
        if Tag(tag) is Tag.GROPE:
            return cls.all_grope(b)
        return cls.all_tower(b, puncture)

    @classmethod
    def all_grope(cls, b: Bracket) -> "HybridTree":
        """Every trivalent vertex a surface stage; one order-0 cap per leaf"""
        nodes = b.preorder()
        tags = tuple(None if n.is_leaf else Tag.GROPE for n in nodes)
        return cls(b, tags, frozenset(i for i, n in enumerate(nodes) if n.is_leaf))

    @classmethod
    def all_tower(cls, b: Bracket, puncture: int = 0) -> "HybridTree":
        """A class-1 grope subtower: a single split subtower on the one cap"""
        tags = tuple(None if n.is_leaf else Tag.TOWER for n in b.preorder())
        return cls(b, tags, frozenset({puncture}))

    def to_unrooted(self, root_label: str) -> UnrootedTree:
        return unroot(self.bracket, root_label)

    def to_json(self) -> Dict[str, Any]:
        return {
            "tree": self.bracket.key,
            "tags": [t.value for t in self.tags if t is not None],
            "punctures": sorted(self.punctures),
        }

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "HybridTree":
        try:
            b = parse_bracket(data["tree"])
            pair_tags = list(data["tags"])
            tags: List[Optional[str]] = []
            for node in b.preorder():
                tags.append(None if node.is_leaf else pair_tags.pop(0))
            if pair_tags:
                raise ValidationError("Too many tags for the tree")
            return cls(b, tuple(tags), frozenset(int(p) for p in data["punctures"]))
        except (KeyError, IndexError, TypeError) as e:
            raise ValidationError(f"Malformed hybrid tree: {e}") from None


def hybrid_class(t: HybridTree) -> int:
    """Class of the underlying grope: Grope node count + 1"""
    return len(t.grope_nodes) + 1


def hybrid_order(t: HybridTree) -> int:
    """Sum over dual pairs at Grope nodes; a cap contributes its Tower node count"""
    towers = {c.boundary: c.tower_count for c in t.cap_components}

    def order_at(i: int) -> int:
        if t.tags[i] is Tag.GROPE:
            return sum(order_at(c) for c in t._children[i])
        return towers[i]

    return order_at(0)


def _retag(t: HybridTree, node: int, tag: Tag, punctures: FrozenSet[int]) -> HybridTree:
    tags = list(t.tags)
    tags[node] = tag
    return HybridTree(t.bracket, tuple(tags), punctures)


def cap_tube_move(t: HybridTree, cap: int) -> HybridTree:
    """
    Tube the cap along a Whitney disk boundary: decrease order, increase class.

    The Tower node at the top of the cap component becomes a surface stage and
    the component splits in two. A puncture sitting on the boundary edge is
    first moved onto the edge below it.
    """
    component = t.component(cap)
    if t.tags[cap] is not Tag.TOWER:
        raise PreconditionError(f"Cap component at node {cap} has no Tower node")
    first, second = t._children[cap]
    puncture = component.puncture
    if puncture == cap:
        logger.debug("moving puncture off boundary edge %d onto %d", cap, first)
        puncture = first
    lost = second if puncture in t.subtree(first) else first
    punctures = (t.punctures - {component.puncture}) | {puncture, lost}
    return _retag(t, cap, Tag.GROPE, punctures)


def cap_surgery_move(t: HybridTree, v: int) -> HybridTree:
    """
    Surger a cap into the stage below: decrease class, increase order.

    ``v`` must be a Grope node whose children both start cap components. The
    surgered cap's puncture is brought to its boundary edge and disappears; its
    point gets paired by the new Whitney disk.
    """
    if t.tags[v] is not Tag.GROPE or any(t.tags[c] is Tag.GROPE for c in t._children[v]):
        raise PreconditionError(f"Node {v} is not a topmost Grope node")
    c1, c2 = (t.component(c) for c in t._children[v])
    if c1.puncture == c1.boundary:
        surgered = c1
    elif c2.puncture == c2.boundary:
        surgered = c2
    else:
        logger.debug("moving puncture %d onto boundary edge %d", c1.puncture, c1.boundary)
        surgered = c1
    return _retag(t, v, Tag.TOWER, t.punctures - {surgered.puncture})


@dataclass(frozen=True)
class GropeSubtower:
    """Hybrid trees grouped by the surface owning their 0th stage"""

    surfaces: FrozenSet[str]
    forest: Mapping[str, Tuple[HybridTree, ...]]

    def __post_init__(self):
        object.__setattr__(self, "forest", MappingProxyType({k: tuple(v) for k, v in sorted(self.forest.items())}))
        for surface, trees in self.forest.items():
            for h in trees:
                stray = set(h.bracket.leaves) - self.surfaces
                if stray:
                    raise ValidationError(f"Hybrid tree on {surface!r} uses labels {sorted(stray)} outside the surfaces")

    def class_by_surface(self) -> Dict[str, int]:
        return {s: min(hybrid_class(h) for h in trees) for s, trees in self.forest.items() if trees}

    def order_by_surface(self) -> Dict[str, int]:
        return {s: min(hybrid_order(h) for h in trees) for s, trees in self.forest.items() if trees}

    @property
    def grope_class(self) -> int:
        return min(self.class_by_surface().values())

    @property
    def order(self) -> int:
        return min(self.order_by_surface().values())


# -- Drivers -------------------------------------------------------------------

def _preferred_leaf(tp: PuncturedTree, choice: Union[None, int, str]) -> int:
    tree = tp.tree
    if choice is None:
        label = min(tree.leaf_labels)
        return tree.leaf_vertices(label)[0]
    if choice == PUNCTURED_LEAF:
        ends = [v for v in tree.edges[tp.puncture] if len(tree.adjacency[v]) == 1]
        if not ends:
            raise ValidationError(f"Punctured edge of {tp} has no leaf end")
        return min(ends)
    if isinstance(choice, int):
        if not 0 <= choice < len(tree.labels) or len(tree.adjacency[choice]) != 1:
            raise ValidationError(f"Preferred vertex {choice} is not a leaf of {tree}")
        return choice
    vertices = tree.leaf_vertices(str(choice))
    if not vertices:
        raise ValidationError(f"Preferred label {choice!r} does not occur in {tree}")
    return vertices[0]


def _all_towers_to_gropes(h: HybridTree, moves: Optional[List[Dict[str, Any]]], index: int) -> HybridTree:
    while True:
        pending = [c.boundary for c in h.cap_components if h.tags[c.boundary] is Tag.TOWER]
        if not pending:
            return h
        h = cap_tube_move(h, pending[0])
        if moves is not None:
            moves.append({"tree": index, "move": "tube", "node": pending[0]})


def _all_gropes_to_towers(h: HybridTree, moves: Optional[List[Dict[str, Any]]], index: int) -> HybridTree:
    while True:
        topmost = [
            v for v in h.grope_nodes if not any(h.tags[c] is Tag.GROPE for c in h._children[v])
        ]
        if not topmost:
            return h
        h = cap_surgery_move(h, topmost[0])
        if moves is not None:
            moves.append({"tree": index, "move": "surgery", "node": topmost[0]})


def tower_to_grope(
    T: SplitTower,
    prefer: Optional[Sequence[Union[None, int, str]]] = None,
    moves: Optional[List[Dict[str, Any]]] = None,
) -> CappedGrope:
    """
    Convert an order n-1 split tower into class n capped gropes.

    Args:
        T: the split tower
        prefer: per tree, the leaf sent to the root (vertex index, label, or
            ``PUNCTURED_LEAF``); default is the least label
        moves: optional list receiving every tube move made

    Returns:
        The capped grope; each tree of T reappears as a body of the surface
        labeling its preferred leaf
    """
    if prefer is not None and len(prefer) != len(T.trees):
        raise ValidationError(f"Expected {len(T.trees)} preferences, got {len(prefer)}")
    forest: Dict[str, List[HybridTree]] = {}
    for index, tp in enumerate(T.trees):
        v = _preferred_leaf(tp, None if prefer is None else prefer[index])
        owner, b = reroot_at_leaf(tp.tree, v)
        (w,) = tp.tree.adjacency[v]
        node = tp.tree.branch_edges(w, v).index(tp.puncture)
        forest.setdefault(owner, []).append(HybridTree.all_tower(b, node))
    subtower = GropeSubtower(T.surfaces, forest)
    logger.debug("class-1 grope subtower of order %s", subtower.order if forest else "unbounded")

    bodies: Dict[str, List[Bracket]] = {}
    index = 0
    for owner, trees in subtower.forest.items():
        for h in trees:
            done = _all_towers_to_gropes(h, moves, index)
            bodies.setdefault(owner, []).append(done.bracket)
            index += 1
    return CappedGrope(bodies, external=T.surfaces - set(bodies))


def grope_to_tower(g: CappedGrope, moves: Optional[List[Dict[str, Any]]] = None) -> SplitTower:
    """
    Convert class n capped gropes into an order n-1 split tower.

    Every body is surgered down to a single split subtower and unrooted with
    its surface as the root label; the puncture goes on the root-leaf edge.
    """
    subtower = GropeSubtower(g.surfaces, {s: [HybridTree.all_grope(b) for b in forest] for s, forest in g.bodies.items()})
    trees = []
    index = 0
    for surface, hybrids in subtower.forest.items():
        for h in hybrids:
            done = _all_gropes_to_towers(h, moves, index)
            tree = done.to_unrooted(surface)
            trees.append(place_puncture_at_leaf(tree, surface, done.bracket))
            index += 1
    return SplitTower(g.surfaces, tuple(trees))
