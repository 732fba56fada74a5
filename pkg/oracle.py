"""
Brute-force generators and checkers for property tests.

Enumeration builds trees from nested tuples with its own sorted-string keys and
never goes through the canonical forms it is used to check.
"""

from __future__ import annotations

import logging
import random
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations, combinations_with_replacement
from typing import Dict, FrozenSet, List, Optional, Sequence, Set, Tuple, Union

import networkx as nx
from networkx.algorithms.isomorphism import categorical_node_match

from errors import BudgetExhausted, PreconditionError, ValidationError
from grope import CappedGrope
from rewrite import ihx_rewrite, ihx_sites
from tower import SplitTower
from trees import Bracket, PuncturedTree, UnrootedTree, leaf, pair, unrooted_product

logger = logging.getLogger(__name__)

Nested = Union[str, Tuple["Nested", "Nested"]]


def double_factorial(n: int) -> int:
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


def _join(a: str, b: str) -> str:
    x, y = sorted((a, b))
    return f"[{x}|{y}]"


@lru_cache(maxsize=None)
def _rooted(labels: Tuple[str, ...]) -> Dict[str, Nested]:
    """Every rooted binary tree on the multiset ``labels``, keyed by a sorted-string form"""
    if len(labels) == 1:
        return {labels[0]: labels[0]}
    out: Dict[str, Nested] = {}
    rest = range(1, len(labels))
    # the first label stays on the left so each split is produced once
    for r in range(len(labels) - 1):
        for chosen in combinations(rest, r):
            left = (labels[0],) + tuple(labels[i] for i in chosen)
            right = tuple(labels[i] for i in rest if i not in chosen)
            for ka, a in _rooted(left).items():
                for kb, b in _rooted(right).items():
                    out.setdefault(_join(ka, kb), (a, b))
    return out


def _to_bracket(x: Nested) -> Bracket:
    if isinstance(x, str):
        return leaf(x)
    return pair(_to_bracket(x[0]), _to_bracket(x[1]))


def _to_graph(root_label: Optional[str], x: Nested) -> nx.Graph:
    g = nx.Graph()

    def grow(node: Nested, parent: Optional[int]) -> None:
        v = g.number_of_nodes()
        g.add_node(v, label=node if isinstance(node, str) else None)
        if parent is not None:
            g.add_edge(parent, v)
        if not isinstance(node, str):
            grow(node[0], v)
            grow(node[1], v)

    if root_label is not None:
        g.add_node(0, label=root_label)
        grow(x, 0)
    else:
        grow(x, None)
    return g


def _graph_key(g: nx.Graph) -> str:
    """Least sorted-string form over all rootings at a leaf"""

    def key(v: int, parent: int) -> str:
        label = g.nodes[v]["label"]
        if label is not None:
            return label
        a, b = (key(w, v) for w in g.neighbors(v) if w != parent)
        return _join(a, b)

    forms = []
    for v in g.nodes:
        if g.degree(v) == 1:
            (w,) = g.neighbors(v)
            forms.append(f"{g.nodes[v]['label']}:{key(w, v)}")
    return min(forms)


def _sorted_labels(leaves: Sequence[str]) -> Tuple[str, ...]:
    if not leaves:
        raise ValidationError("Need at least one leaf label")
    return tuple(sorted(leaves))


def enumerate_brackets(leaves: Sequence[str]) -> List[Bracket]:
    """All brackets on the leaf multiset up to isomorphism; (2L-3)!! of them for distinct labels"""
    labels = _sorted_labels(leaves)
    return [_to_bracket(x) for _, x in sorted(_rooted(labels).items())]


def enumerate_unrooted(leaves: Sequence[str]) -> List[UnrootedTree]:
    """All unrooted trees on the leaf multiset up to isomorphism; (2L-5)!! for distinct labels"""
    labels = _sorted_labels(leaves)
    if len(labels) < 2:
        raise ValidationError("An unrooted tree needs at least two leaves")
    seen: Dict[str, nx.Graph] = {}
    for x in _rooted(labels[1:]).values():
        g = _to_graph(labels[0], x)
        seen.setdefault(_graph_key(g), g)
    out = []
    for _, g in sorted(seen.items()):
        edges = sorted(g.edges)
        out.append(UnrootedTree.from_edges([g.nodes[v]["label"] for v in range(g.number_of_nodes())], edges))
    return out


def brute_force_isomorphic(a: Union[UnrootedTree, Bracket], b: Union[UnrootedTree, Bracket]) -> bool:
    """Label-preserving graph isomorphism; brackets get a marked root"""
    match = categorical_node_match("label", None)

    def graph(x: Union[UnrootedTree, Bracket]) -> nx.Graph:
        if isinstance(x, UnrootedTree):
            return x.graph
        return _to_graph("^root", _nested(x))

    return nx.is_isomorphic(graph(a), graph(b), node_match=match)


def _nested(b: Bracket) -> Nested:
    if b.is_leaf:
        return b.label
    return (_nested(b.left), _nested(b.right))


@dataclass
class Corpus:
    """Every tree of bounded degree over a label alphabet, deduplicated by canonical key"""

    max_degree: int
    alphabet: Tuple[str, ...] = ("1", "2", "3")
    rooted: List[Bracket] = field(default_factory=list)
    unrooted: List[UnrootedTree] = field(default_factory=list)

    @classmethod
    def build(cls, max_degree: int, alphabet: Sequence[str] = ("1", "2", "3")) -> "Corpus":
        corpus = cls(max_degree, tuple(alphabet))
        rooted: Dict[str, Bracket] = {}
        unrooted: Dict[str, UnrootedTree] = {}
        for size in range(1, max_degree + 2):
            for labels in combinations_with_replacement(corpus.alphabet, size):
                if size <= max_degree:
                    for b in enumerate_brackets(labels):
                        rooted.setdefault(b.key, b)
                if size >= 2:
                    for t in enumerate_unrooted(labels):
                        unrooted.setdefault(t.canonical_key, t)
        corpus.rooted = [rooted[k] for k in sorted(rooted)]
        corpus.unrooted = [unrooted[k] for k in sorted(unrooted)]
        logger.debug("corpus up to degree %d: %d rooted, %d unrooted", max_degree, len(corpus.rooted), len(corpus.unrooted))
        return corpus


MAX_REACHABILITY_DEGREE = 6


def ihx_reachability(t: UnrootedTree, budget: int = 20000) -> FrozenSet[UnrootedTree]:
    """
    Breadth-first closure of ``t`` under IHX: both outputs of every rewrite
    are successors.

    Raises:
        BudgetExhausted: more than ``budget`` trees visited; ``partial`` holds them
    """
    if t.degree > MAX_REACHABILITY_DEGREE:
        raise PreconditionError(f"Reachability is limited to degree {MAX_REACHABILITY_DEGREE}, got {t.degree}")
    seen: Set[UnrootedTree] = {t}
    queue = deque([t])
    while queue:
        current = queue.popleft()
        for site in ihx_sites(current):
            for out in ihx_rewrite(current, site):
                if out not in seen:
                    if len(seen) >= budget:
                        raise BudgetExhausted(f"IHX closure of {t} exceeds {budget} trees", partial=frozenset(seen))
                    seen.add(out)
                    queue.append(out)
    return frozenset(seen)


# -- Random inputs ----------------------------------------------------------------

def _labels(n: int) -> List[str]:
    return [str(i) for i in range(1, n + 1)]


def random_bracket(rng: random.Random, n_leaves: int, labels: Sequence[str]) -> Bracket:
    """Merge random pairs from a pool of random leaves until one bracket is left"""
    if n_leaves < 1:
        raise ValidationError("A bracket needs at least one leaf")
    pool = [leaf(rng.choice(labels)) for _ in range(n_leaves)]
    while len(pool) > 1:
        a = pool.pop(rng.randrange(len(pool)))
        b = pool.pop(rng.randrange(len(pool)))
        pool.append(pair(a, b))
    return pool[0]


def random_punctured(rng: random.Random, degree: int, labels: Sequence[str]) -> PuncturedTree:
    """A random tree of the given degree with the puncture on a random edge"""
    split = rng.randint(1, degree)
    tp = unrooted_product(random_bracket(rng, split, labels), random_bracket(rng, degree + 1 - split, labels))
    return PuncturedTree(tp.tree, rng.randrange(len(tp.tree.edges)))


def random_split_tower(
    rng: random.Random, min_degree: int, max_degree: Optional[int] = None, n_trees: int = 3, n_surfaces: int = 4
) -> SplitTower:
    """Random tower whose least tree degree is exactly ``min_degree``"""
    max_degree = max(min_degree, max_degree or min_degree)
    labels = _labels(n_surfaces)
    degrees = [min_degree] + [rng.randint(min_degree, max_degree) for _ in range(n_trees - 1)]
    return SplitTower(frozenset(labels), tuple(random_punctured(rng, d, labels) for d in degrees))


def random_grope(
    rng: random.Random, grope_class: int, max_degree: Optional[int] = None, n_surfaces: int = 3, max_forest: int = 2
) -> CappedGrope:
    """Random capped grope whose overall class is exactly ``grope_class``"""
    max_degree = max(grope_class, max_degree or grope_class)
    labels = _labels(n_surfaces)
    bodies: Dict[str, List[Bracket]] = {}
    for i, surface in enumerate(labels):
        count = rng.randint(1, max_forest)
        degrees = [rng.randint(grope_class, max_degree) for _ in range(count)]
        if i == 0:
            degrees[0] = grope_class
        bodies[surface] = [random_bracket(rng, d, labels) for d in degrees]
    return CappedGrope(bodies)
