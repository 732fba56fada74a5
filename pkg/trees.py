"""
Tree algebra for gropes and Whitney towers.

Brackets are non-associative commutative bracketings of surface labels; they
double as rooted unitrivalent trees. Unrooted trees are stored in a canonical
vertex numbering so that edge indices (EdgeRefs) are stable across
serialization: vertex 0 is the univalent vertex of the lexicographically least
rerooting, and edges are numbered in depth-first order of its canonical text.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import networkx as nx
import pyparsing as pp

from errors import BracketSyntaxError, InvalidEdgeError, NotUnivalentError, ValidationError

logger = logging.getLogger(__name__)

LABEL_PATTERN = re.compile(r"[A-Za-z0-9_]+")
ANONYMOUS = "*"

EdgeRef = int


def validate_label(token: str) -> str:
    """Return the token unchanged if it is a legal surface label"""
    if not isinstance(token, str) or not LABEL_PATTERN.fullmatch(token):
        raise ValidationError(f"Invalid label {token!r}: expected [A-Za-z0-9_]+")
    return token


def _child_order(b: "Bracket") -> Tuple[bool, str]:
    # leaves sort before pairs so right-normed brackets render as (a,(b,...))
    return (not b.is_leaf, b.key)


@dataclass(frozen=True, eq=False)
class Bracket:
    """
    A leaf carrying a label, or an unordered pair of brackets.

    A leaf with ``label=None`` is anonymous; those only appear inside shapes
    (see ``y_tree``). Equality and hashing go through the canonical key, so
    ``(1,2)`` equals ``(2,1)``.
    """

    label: Optional[str] = None
    left: Optional["Bracket"] = None
    right: Optional["Bracket"] = None

    def __post_init__(self):
        if (self.left is None) != (self.right is None):
            raise ValidationError("A bracket pair needs exactly two children")
        if self.left is not None and self.label is not None:
            raise ValidationError("Pair nodes carry no label")
        if self.label is not None:
            validate_label(self.label)

    @property
    def is_leaf(self) -> bool:
        return self.left is None

    @cached_property
    def children(self) -> Tuple["Bracket", "Bracket"]:
        """The two children in canonical order: leaves first, then by key"""
        if self.is_leaf:
            raise ValidationError("A leaf has no children")
        a, b = self.left, self.right
        if _child_order(b) < _child_order(a):
            a, b = b, a
        return (a, b)

    @cached_property
    def key(self) -> str:
        if self.is_leaf:
            return self.label if self.label is not None else ANONYMOUS
        a, b = self.children
        return f"({a.key},{b.key})"

    @cached_property
    def shape_key(self) -> str:
        if self.is_leaf:
            return ANONYMOUS
        a, b = sorted((self.left.shape_key, self.right.shape_key), key=lambda k: (k != ANONYMOUS, k))
        return f"({a},{b})"

    @cached_property
    def trivalent_count(self) -> int:
        if self.is_leaf:
            return 0
        return 1 + self.left.trivalent_count + self.right.trivalent_count

    @property
    def leaf_count(self) -> int:
        return self.trivalent_count + 1

    @cached_property
    def leaves(self) -> Tuple[Optional[str], ...]:
        """Leaf labels in canonical left-to-right order"""
        if self.is_leaf:
            return (self.label,)
        a, b = self.children
        return a.leaves + b.leaves

    @property
    def is_labeled(self) -> bool:
        return all(label is not None for label in self.leaves)

    def preorder(self) -> List["Bracket"]:
        """All nodes, parent before children, children in canonical order"""
        nodes = [self]
        if not self.is_leaf:
            for child in self.children:
                nodes.extend(child.preorder())
        return nodes

    def __eq__(self, other) -> bool:
        if not isinstance(other, Bracket):
            return NotImplemented
        return self.key == other.key

    def __hash__(self) -> int:
        return hash(("bracket", self.key))

    def __str__(self) -> str:
        return self.key

    def __repr__(self) -> str:
        return f"Bracket({self.key!r})"


# A bracket whose leaves are anonymous.
Shape = Bracket


def leaf(label: str) -> Bracket:
    return Bracket(label=validate_label(label))


def pair(a: Bracket, b: Bracket) -> Bracket:
    return Bracket(left=a, right=b)


def rooted_product(a: Bracket, b: Bracket) -> Bracket:
    """Glue two rooted trees under a new root; degrees add"""
    return pair(a, b)


def is_right_normed(b: Bracket) -> bool:
    """True when some child of every pair node is a leaf (a comb hanging from the root)"""
    while not b.is_leaf:
        first, second = b.children
        if not first.is_leaf:
            return False
        b = second
    return True


# -- Parsing ------------------------------------------------------------------

def _build_grammar():
    label_token = pp.Word(pp.alphanums + "_")
    label = label_token.copy().set_parse_action(lambda toks: leaf(toks[0]))
    bracket = pp.Forward()
    node = pp.Suppress("(") - bracket - pp.Suppress(",") - bracket - pp.Suppress(")")
    node.set_parse_action(lambda toks: pair(toks[0], toks[1]))
    bracket <<= label | node
    punctured = pp.Suppress(pp.Literal("p(")) - bracket - pp.Suppress(",") - bracket - pp.Suppress(")")
    rooted_at = label_token + pp.Suppress(":") - bracket
    return bracket, punctured, rooted_at


_BRACKET, _PUNCTURED, _ROOTED_AT = _build_grammar()


def _parse(grammar, text: str):
    try:
        return grammar.parse_string(text, parse_all=True)
    except pp.ParseBaseException as exc:
        raise BracketSyntaxError(text, exc.loc, exc.msg) from None


def parse_bracket(text: str) -> Bracket:
    """
    Parse bracket text.

    Args:
        text: ``label`` or ``(bracket,bracket)``, whitespace ignored

    Returns:
        The parsed Bracket

    Raises:
        BracketSyntaxError: with the byte offset of the first offending character
    """
    return _parse(_BRACKET, text)[0]


def render_bracket(b: Bracket) -> str:
    return b.key


def parse_punctured(text: str) -> "PuncturedTree":
    """Parse ``p(A,B)``: the unrooted product of A and B punctured at the gluing edge"""
    a, b = _parse(_PUNCTURED, text)
    return unrooted_product(a, b)


def render_punctured(tp: "PuncturedTree") -> str:
    return tp.key


def parse_tree(text: str) -> "UnrootedTree":
    """
    Parse an unrooted tree.

    Accepted forms are ``label:bracket`` (the bracket unrooted with its root
    becoming a leaf with that label, the canonical key format), ``p(A,B)`` and
    a bare pair ``(A,B)``, both read as the unrooted product of A and B.
    """
    stripped = text.strip()
    if stripped.startswith("p("):
        return parse_punctured(text).tree
    if stripped.startswith("("):
        b = parse_bracket(text)
        return unrooted_product(b.left, b.right).tree
    if ":" in stripped:
        root_label, b = _parse(_ROOTED_AT, text)
        return unroot(b, root_label)
    raise BracketSyntaxError(text, len(text), "expected an unrooted tree (label:bracket, p(A,B) or (A,B))")


# -- Unrooted trees -------------------------------------------------------------

def _grow(labels: List[Optional[str]], edges: List[Tuple[int, int]], parent: Optional[int], b: Bracket) -> int:
    v = len(labels)
    labels.append(b.label if b.is_leaf else None)
    if parent is not None:
        edges.append((parent, v))
    if not b.is_leaf:
        for child in b.children:
            _grow(labels, edges, v, child)
    return v


def _layout(root_label: str, b: Bracket) -> "UnrootedTree":
    labels: List[Optional[str]] = [root_label]
    edges: List[Tuple[int, int]] = []
    _grow(labels, edges, 0, b)
    return UnrootedTree(tuple(labels), tuple(edges))


def _rerooting_key(root_label: str, b: Bracket) -> str:
    return f"{root_label}:{b.key}"


@dataclass(frozen=True, eq=False)
class UnrootedTree:
    """
    A labeled unitrivalent tree.

    Univalent vertices carry labels, trivalent vertices carry ``None``. Use
    ``from_edges`` or ``unroot`` to obtain the canonical numbering that edge
    indices refer to.
    """

    labels: Tuple[Optional[str], ...]
    edges: Tuple[Tuple[int, int], ...]

    def __post_init__(self):
        n = len(self.labels)
        if n < 2 or len(self.edges) != n - 1:
            raise ValidationError("An unrooted tree needs at least one edge and exactly n-1 edges")
        if not nx.is_tree(self.graph):
            raise ValidationError("Edges do not form a tree")
        for v, label in enumerate(self.labels):
            valence = len(self.adjacency[v])
            if valence == 1:
                if label is None:
                    raise ValidationError(f"Univalent vertex {v} has no label")
                validate_label(label)
            elif valence == 3:
                if label is not None:
                    raise ValidationError(f"Trivalent vertex {v} carries a label")
            else:
                raise ValidationError(f"Vertex {v} has valence {valence}; trees must be unitrivalent")

    @classmethod
    def from_edges(cls, labels: Sequence[Optional[str]], edges: Sequence[Sequence[int]]) -> "UnrootedTree":
        """Validate an arbitrary numbering and return the canonical tree"""
        raw = cls(tuple(labels), tuple((int(u), int(v)) for u, v in edges))
        return raw.canonical()

    @classmethod
    def from_bracket_pair(cls, a: Bracket, b: Bracket) -> "UnrootedTree":
        return unrooted_product(a, b).tree

    @cached_property
    def graph(self) -> nx.Graph:
        g = nx.Graph()
        for v, label in enumerate(self.labels):
            g.add_node(v, label=label)
        for u, v in self.edges:
            if u == v or not (0 <= u < len(self.labels)) or not (0 <= v < len(self.labels)):
                raise ValidationError(f"Invalid edge ({u}, {v})")
            g.add_edge(u, v)
        return g

    @cached_property
    def adjacency(self) -> Tuple[Tuple[int, ...], ...]:
        return tuple(tuple(sorted(self.graph.neighbors(v))) for v in range(len(self.labels)))

    @cached_property
    def _edge_lookup(self) -> Dict[Tuple[int, int], int]:
        lookup = {}
        for i, (u, v) in enumerate(self.edges):
            lookup[(u, v)] = i
            lookup[(v, u)] = i
        return lookup

    @cached_property
    def _branch_cache(self) -> Dict[Tuple[int, int], Bracket]:
        return {}

    @property
    def univalent(self) -> Tuple[int, ...]:
        return tuple(v for v, nbrs in enumerate(self.adjacency) if len(nbrs) == 1)

    @property
    def trivalent(self) -> Tuple[int, ...]:
        return tuple(v for v, nbrs in enumerate(self.adjacency) if len(nbrs) == 3)

    @property
    def degree(self) -> int:
        return len(self.labels) // 2

    @cached_property
    def leaf_labels(self) -> Tuple[str, ...]:
        """Leaf-label multiset as a sorted tuple"""
        return tuple(sorted(label for label in self.labels if label is not None))

    def edge_index(self, u: int, v: int) -> EdgeRef:
        try:
            return self._edge_lookup[(u, v)]
        except KeyError:
            raise InvalidEdgeError(f"No edge between vertices {u} and {v}") from None

    def check_edge(self, e: EdgeRef) -> Tuple[int, int]:
        if not isinstance(e, int) or not 0 <= e < len(self.edges):
            raise InvalidEdgeError(f"Edge index {e!r} out of range 0..{len(self.edges) - 1}")
        return self.edges[e]

    def branch(self, node: int, parent: int) -> Bracket:
        """The rooted tree hanging off ``node`` on the side away from ``parent``"""
        cache = self._branch_cache
        if (node, parent) not in cache:
            if self.labels[node] is not None:
                result = leaf(self.labels[node])
            else:
                x, y = (w for w in self.adjacency[node] if w != parent)
                result = pair(self.branch(x, node), self.branch(y, node))
            cache[(node, parent)] = result
        return cache[(node, parent)]

    def branch_edges(self, node: int, parent: int) -> List[EdgeRef]:
        """Edge indices of ``branch(node, parent)`` in bracket preorder, the edge to ``parent`` first"""
        out = [self.edge_index(parent, node)]
        if self.labels[node] is None:
            kids = [w for w in self.adjacency[node] if w != parent]
            kids.sort(key=lambda w: _child_order(self.branch(w, node)))
            for w in kids:
                out.extend(self.branch_edges(w, node))
        return out

    def rerootings(self) -> List[Tuple[int, str, Bracket]]:
        """(leaf vertex, its label, rooted tree seen from it) for every leaf"""
        out = []
        for v in self.univalent:
            (w,) = self.adjacency[v]
            out.append((v, self.labels[v], self.branch(w, v)))
        return out

    @cached_property
    def canonical_key(self) -> str:
        return min(_rerooting_key(label, b) for _, label, b in self.rerootings())

    def canonical(self) -> "UnrootedTree":
        _, label, b = min(self.rerootings(), key=lambda r: _rerooting_key(r[1], r[2]))
        return _layout(label, b)

    def leaf_vertices(self, label: str) -> Tuple[int, ...]:
        return tuple(v for v in self.univalent if self.labels[v] == label)

    def __eq__(self, other) -> bool:
        if not isinstance(other, UnrootedTree):
            return NotImplemented
        return self.canonical_key == other.canonical_key

    def __hash__(self) -> int:
        return hash(("unrooted", self.canonical_key))

    def __str__(self) -> str:
        return self.canonical_key

    def __repr__(self) -> str:
        return f"UnrootedTree({self.canonical_key!r})"


@dataclass(frozen=True, eq=False)
class PuncturedTree:
    """An unrooted tree with a marked edge: the tree of an unpaired intersection point"""

    tree: UnrootedTree
    puncture: EdgeRef

    def __post_init__(self):
        self.tree.check_edge(self.puncture)

    @cached_property
    def sides(self) -> Tuple[Bracket, Bracket]:
        return decompose_at_edge(self.tree, self.puncture)

    @cached_property
    def key(self) -> str:
        a, b = self.sides
        return f"p({a.key},{b.key})"

    @property
    def degree(self) -> int:
        return self.tree.degree

    def __eq__(self, other) -> bool:
        if not isinstance(other, PuncturedTree):
            return NotImplemented
        return self.key == other.key

    def __hash__(self) -> int:
        return hash(("punctured", self.key))

    def __str__(self) -> str:
        return self.key

    def __repr__(self) -> str:
        return f"PuncturedTree({self.key!r}, puncture={self.puncture})"


# -- Operations ------------------------------------------------------------------

def canonical_key(x: Union[Bracket, UnrootedTree, PuncturedTree]) -> str:
    """Equal keys exactly for isomorphic inputs (rooted, unrooted or punctured)"""
    if isinstance(x, Bracket):
        return x.key
    if isinstance(x, UnrootedTree):
        return x.canonical_key
    if isinstance(x, PuncturedTree):
        return x.key
    raise TypeError(f"No canonical key for {type(x).__name__}")


def degree(x: Union[Bracket, UnrootedTree, PuncturedTree]) -> int:
    """Vassiliev degree: half the vertex count (a bracket's root counts as a vertex)"""
    if isinstance(x, Bracket):
        return x.trivalent_count + 1
    if isinstance(x, UnrootedTree):
        return x.degree
    if isinstance(x, PuncturedTree):
        return x.tree.degree
    raise TypeError(f"No degree for {type(x).__name__}")


def order_of(b: Bracket) -> int:
    """Order of the surface indexed by ``b``: 0 for a 0th stage, else its Whitney disk order"""
    return b.trivalent_count


def unroot(b: Bracket, root_label: str) -> UnrootedTree:
    """Turn the root of ``b`` into a leaf labeled ``root_label``"""
    validate_label(root_label)
    if not b.is_labeled:
        raise ValidationError("Anonymous leaves are only allowed inside shapes")
    labels: List[Optional[str]] = [root_label]
    edges: List[Tuple[int, int]] = []
    _grow(labels, edges, 0, b)
    return UnrootedTree.from_edges(labels, edges)


def decompose_at_edge(t: UnrootedTree, e: EdgeRef) -> Tuple[Bracket, Bracket]:
    """Cut edge ``e``; the two halves are returned as brackets in canonical order"""
    u, v = t.check_edge(e)
    a, b = t.branch(u, v), t.branch(v, u)
    if _child_order(b) < _child_order(a):
        a, b = b, a
    return (a, b)


def _find_edge(t: UnrootedTree, a: Bracket, b: Bracket) -> EdgeRef:
    wanted = sorted((a.key, b.key))
    for e in range(len(t.edges)):
        if sorted(x.key for x in decompose_at_edge(t, e)) == wanted:
            return e
    raise ValidationError(f"No edge of {t} splits it into {a} and {b}")


def unrooted_product(a: Bracket, b: Bracket) -> PuncturedTree:
    """Identify the roots of ``a`` and ``b`` to a point on a new edge, punctured there"""
    if not (a.is_labeled and b.is_labeled):
        raise ValidationError("Anonymous leaves are only allowed inside shapes")
    labels: List[Optional[str]] = []
    edges: List[Tuple[int, int]] = []
    ua = _grow(labels, edges, None, a)
    ub = _grow(labels, edges, None, b)
    edges.append((ua, ub))
    tree = UnrootedTree.from_edges(labels, edges)
    return PuncturedTree(tree, _find_edge(tree, a, b))


def place_puncture_at_leaf(t: UnrootedTree, label: str, rest: Optional[Bracket] = None) -> PuncturedTree:
    """Puncture the edge of a ``label`` leaf (whose far side is ``rest`` when given)"""
    for v in t.leaf_vertices(label):
        (w,) = t.adjacency[v]
        if rest is None or t.branch(w, v) == rest:
            return PuncturedTree(t, t.edge_index(v, w))
    raise NotUnivalentError(f"No {label!r} leaf of {t} matches")


def adjacent_edges(t: UnrootedTree, e: EdgeRef) -> Tuple[EdgeRef, ...]:
    """Edges sharing an endpoint with ``e``"""
    u, v = t.check_edge(e)
    out = {t.edge_index(x, w) for x in (u, v) for w in t.adjacency[x]}
    out.discard(e)
    return tuple(sorted(out))


def puncture_path(tp: PuncturedTree, e: EdgeRef) -> List[EdgeRef]:
    """The chain of adjacent edges a puncture walks through to reach ``e``"""
    target = tp.tree.check_edge(e)
    start = tp.tree.edges[tp.puncture]
    best: Optional[List[int]] = None
    for a in start:
        for b in target:
            vertices = nx.shortest_path(tp.tree.graph, a, b)
            walk = [tp.puncture]
            for x, y in zip(vertices, vertices[1:]):
                walk.append(tp.tree.edge_index(x, y))
            walk.append(e)
            walk = [edge for i, edge in enumerate(walk) if i == 0 or edge != walk[i - 1]]
            if best is None or len(walk) < len(best):
                best = walk
    return best


def move_puncture(tp: PuncturedTree, e: EdgeRef) -> PuncturedTree:
    """Move the puncture to edge ``e`` through adjacent edges; the tree is unchanged"""
    path = puncture_path(tp, e)
    logger.debug("moving puncture of %s along edges %s", tp.tree, path)
    return PuncturedTree(tp.tree, e)


def reroot_at_leaf(t: UnrootedTree, v: int) -> Tuple[str, Bracket]:
    """
    View ``t`` as a rooted tree hanging from leaf ``v``.

    Returns:
        (label of v, the bracket whose root replaces v); the label names the
        surface that owns the resulting grope branch
    """
    if not isinstance(v, int) or not 0 <= v < len(t.labels) or len(t.adjacency[v]) != 1:
        raise NotUnivalentError(f"Vertex {v!r} is not a univalent vertex of {t}")
    (w,) = t.adjacency[v]
    return t.labels[v], t.branch(w, v)


class SimplicityCheck(NamedTuple):
    simple: bool
    spine: Tuple[int, ...]

    def __bool__(self) -> bool:
        return self.simple

    @property
    def trivalent_spine(self) -> Tuple[int, ...]:
        return self.spine[1:-1]


def is_simple(t: UnrootedTree) -> SimplicityCheck:
    """
    Decide whether one path contains every trivalent vertex.

    The witness spine is a maximal leaf-to-leaf path through all trivalent
    vertices, oriented to be lexicographically least.
    """
    trivalent = set(t.trivalent)
    for v in trivalent:
        if sum(1 for w in t.adjacency[v] if w in trivalent) > 2:
            return SimplicityCheck(False, ())
    if not trivalent:
        return SimplicityCheck(True, (0, 1))
    ends = sorted(v for v in trivalent if sum(1 for w in t.adjacency[v] if w in trivalent) <= 1)
    if len(ends) == 1:
        v = ends[0]
        first, second = sorted(w for w in t.adjacency[v] if w not in trivalent)[:2]
        return SimplicityCheck(True, (first, v, second))
    core = nx.shortest_path(t.graph, ends[0], ends[1])
    head = min(w for w in t.adjacency[core[0]] if w not in trivalent)
    tail = min(w for w in t.adjacency[core[-1]] if w not in trivalent)
    spine = tuple([head] + core + [tail])
    return SimplicityCheck(True, min(spine, tuple(reversed(spine))))


# -- Heights and shapes ------------------------------------------------------------

@dataclass(frozen=True, order=True)
class Height:
    """Height n (``half=False``) or n.5 (``half=True``), n >= 1"""

    n: int
    half: bool = False

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 1:
            raise ValidationError(f"Height must be at least 1, got {self.n!r}")

    @classmethod
    def parse(cls, value: Union["Height", str, float, int]) -> "Height":
        if isinstance(value, Height):
            return value
        text = str(value).strip()
        if text.endswith(".5"):
            return cls(int(text[:-2]), True)
        if text.endswith(".0"):
            text = text[:-2]
        try:
            return cls(int(text))
        except ValueError:
            raise ValidationError(f"Invalid height {value!r}: expected n or n.5") from None

    @property
    def value(self) -> float:
        return self.n + (0.5 if self.half else 0.0)

    @property
    def class_value(self) -> int:
        """Degree of the Y tree of this height: 2^n, or 3*2^(n-1) for n.5"""
        return 3 * 2 ** (self.n - 1) if self.half else 2 ** self.n

    def __str__(self) -> str:
        return f"{self.n}.5" if self.half else str(self.n)


def _y(n: int) -> Shape:
    if n == 0:
        return Bracket()
    sub = _y(n - 1)
    return pair(sub, sub)


def y_shape(n: int) -> Shape:
    """Y^n for any n >= 0; Y^0 is the rooted chord"""
    if n < 0:
        raise ValidationError(f"Y^n needs n >= 0, got {n}")
    return _y(n)


def y_tree(h: Union[Height, str, float, int]) -> Shape:
    """Y^n, or Y^(n.5) = Y^(n-1) * Y^n, as an anonymous shape"""
    h = Height.parse(h)
    if h.half:
        return rooted_product(_y(h.n - 1), _y(h.n))
    return _y(h.n)


def is_shape(b: Bracket, s: Shape) -> bool:
    """Match ignoring labels"""
    return b.shape_key == s.shape_key
