"""IHX rewriting of unitrivalent trees and normalization to simple trees."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import networkx as nx

from errors import InvalidSiteError
from trees import (
    Bracket,
    EdgeRef,
    UnrootedTree,
    is_simple,
    parse_bracket,
    parse_tree,
    pair,
    unroot,
    unrooted_product,
)

logger = logging.getLogger(__name__)

# Root label used when a rooted Jacobi step is replayed on the unrooted view.
REPLAY_ROOT = "_root"


@dataclass(frozen=True)
class IhxSite:
    """
    An internal edge together with the grouping {I,J | K,L} of the four
    branches around it. Branches are named by their anchor edges: ``near``
    holds the two edges leaving the first endpoint of ``inner_edge``, ``far``
    the two leaving the second.
    """

    inner_edge: EdgeRef
    near: Tuple[EdgeRef, EdgeRef]
    far: Tuple[EdgeRef, EdgeRef]

    def to_json(self) -> Dict[str, Any]:
        return {"inner_edge": self.inner_edge, "grouping": [list(self.near), list(self.far)]}


@dataclass(frozen=True)
class RewriteStep:
    """One IHX step: the rewritten tree, the site, and both outputs (canonical keys)"""

    tree: str
    site: IhxSite
    outputs: Tuple[str, str]

    def to_json(self) -> Dict[str, Any]:
        return {"tree": self.tree, "site": self.site.to_json(), "outputs": list(self.outputs)}


@dataclass
class RewriteTrace:
    """Ordered record of rewrite steps; ``output`` lists the final trees"""

    steps: List[RewriteStep] = field(default_factory=list)
    outputs: List[str] = field(default_factory=list)

    def to_json(self) -> Dict[str, Any]:
        return {
            "steps": [
                {**step.to_json(), "output_index": i} for i, step in enumerate(self.steps)
            ],
            "outputs": list(self.outputs),
        }


def _site_for(t: UnrootedTree, e: EdgeRef) -> Optional[IhxSite]:
    u, v = t.edges[e]
    if len(t.adjacency[u]) != 3 or len(t.adjacency[v]) != 3:
        return None
    near = tuple(sorted(t.edge_index(u, w) for w in t.adjacency[u] if w != v))
    far = tuple(sorted(t.edge_index(v, w) for w in t.adjacency[v] if w != u))
    return IhxSite(e, near, far)


def ihx_sites(t: UnrootedTree) -> List[IhxSite]:
    """One site per internal edge, in edge order"""
    sites = []
    for e in range(len(t.edges)):
        site = _site_for(t, e)
        if site is not None:
            sites.append(site)
    return sites


def ihx_site_for_edge(t: UnrootedTree, e: EdgeRef) -> IhxSite:
    t.check_edge(e)
    site = _site_for(t, e)
    if site is None:
        raise InvalidSiteError(f"Edge {e} of {t} is not internal (both ends must be trivalent)")
    return site


def _branches(t: UnrootedTree, s: IhxSite) -> Tuple[Bracket, Bracket, Bracket, Bracket]:
    if not 0 <= s.inner_edge < len(t.edges) or _site_for(t, s.inner_edge) != s:
        raise InvalidSiteError(f"{s} is not a site of {t}")
    u, v = t.edges[s.inner_edge]
    out = []
    for endpoint, anchors in ((u, s.near), (v, s.far)):
        for anchor in anchors:
            a, b = t.edges[anchor]
            beyond = b if a == endpoint else a
            out.append(t.branch(beyond, endpoint))
    return tuple(out)


def ihx_rewrite(t: UnrootedTree, s: IhxSite) -> Tuple[UnrootedTree, UnrootedTree]:
    """
    Replace the tree {I,J | K,L} by the two trees {J,K | I,L} and {I,K | J,L}.

    Both outputs keep the degree and leaf-label multiset of ``t``; no signs are
    tracked, so one tree becomes two.
    """
    i, j, k, l = _branches(t, s)
    first = unrooted_product(pair(j, k), pair(i, l)).tree
    second = unrooted_product(pair(i, k), pair(j, l)).tree
    for out in (first, second):
        assert out.degree == t.degree and out.leaf_labels == t.leaf_labels
    return first, second


def _longest_chain(t: UnrootedTree) -> Tuple[int, ...]:
    """Vertices of the lexicographically least maximal leaf-to-leaf path (by edge indices)"""
    best_key: Optional[Tuple[int, Tuple[int, ...]]] = None
    best: Tuple[int, ...] = ()
    leaves = t.univalent
    for a in leaves:
        for b in leaves:
            if a >= b:
                continue
            for path in (_path(t, a, b), _path(t, b, a)):
                edge_seq = tuple(t.edge_index(x, y) for x, y in zip(path, path[1:]))
                key = (-len(edge_seq), edge_seq)
                if best_key is None or key < best_key:
                    best_key, best = key, tuple(path)
    return best


def _path(t: UnrootedTree, a: int, b: int) -> List[int]:
    return nx.shortest_path(t.graph, a, b)


def _simplifying_site(t: UnrootedTree) -> IhxSite:
    chain = _longest_chain(t)
    on_chain = set(chain)
    candidates = []
    for v0 in chain[1:-1]:
        for v1 in t.adjacency[v0]:
            if v1 not in on_chain and len(t.adjacency[v1]) == 3:
                candidates.append(t.edge_index(v0, v1))
    # the output pair does not depend on which endpoint is the near side
    return _site_for(t, min(candidates))


def normalize_simple(t: UnrootedTree, trace: Optional[RewriteTrace] = None) -> List[UnrootedTree]:
    """
    Rewrite ``t`` into a multiset of simple trees by IHX steps.

    Each step picks the least maximal chain and the first off-chain trivalent
    vertex adjacent to it; both outputs of the step have a longer maximal
    chain, so the worklist empties. Duplicates are kept; the result is sorted
    by canonical key.
    """
    done: List[UnrootedTree] = []
    work = [t.canonical()]
    while work:
        current = work.pop()
        if is_simple(current):
            done.append(current)
            continue
        site = _simplifying_site(current)
        outputs = ihx_rewrite(current, site)
        logger.debug("IHX at edge %d of %s -> %s, %s", site.inner_edge, current, *outputs)
        if trace is not None:
            trace.steps.append(RewriteStep(current.canonical_key, site, tuple(o.canonical_key for o in outputs)))
        work.extend(reversed(outputs))
    done.sort(key=lambda tree: tree.canonical_key)
    if trace is not None:
        trace.outputs = [tree.canonical_key for tree in done]
    return done


@dataclass(frozen=True)
class JacobiStep:
    """((A1,A2),B) rewritten to (A1,(A2,B)) and (A2,(A1,B))"""

    before: str
    outputs: Tuple[str, str]

    def to_json(self) -> Dict[str, Any]:
        return {"before": self.before, "outputs": list(self.outputs)}


def _right_normed(x: Bracket, y: Bracket, steps: Optional[List[JacobiStep]]) -> List[Bracket]:
    # (x, y) with x to be brought down to a leaf
    if x.is_leaf:
        return [pair(x, rest) for rest in normalize_right_normed(y, steps)]
    a1, a2 = x.children
    first, second = (a1, pair(a2, y)), (a2, pair(a1, y))
    if steps is not None:
        steps.append(JacobiStep(pair(x, y).key, (pair(*first).key, pair(*second).key)))
    return _right_normed(*first, steps) + _right_normed(*second, steps)


def normalize_right_normed(b: Bracket, steps: Optional[List[JacobiStep]] = None) -> List[Bracket]:
    """
    Rewrite ``b`` into right-normed brackets by Jacobi steps.

    The smaller child of a pair is pushed down until it is a leaf; every step
    is an IHX rewrite of the unrooted view around the edge below the root.
    """
    if b.is_leaf:
        return [b]
    x, y = b.left, b.right
    if (y.leaf_count, not y.is_leaf, y.key) < (x.leaf_count, not x.is_leaf, x.key):
        x, y = y, x
    return _right_normed(x, y, steps)


def replay_jacobi_steps(steps: List[JacobiStep]) -> bool:
    """Check every recorded Jacobi step against an IHX rewrite of its unrooted view"""
    for step in steps:
        before = unroot(parse_bracket(step.before), REPLAY_ROOT)
        wanted = sorted(unroot(parse_bracket(o), REPLAY_ROOT).canonical_key for o in step.outputs)
        if not any(
            sorted(out.canonical_key for out in ihx_rewrite(before, site)) == wanted
            for site in ihx_sites(before)
        ):
            logger.warning("Jacobi step %s does not replay as an IHX rewrite", step.before)
            return False
    return True


def replay_trace(trace: RewriteTrace) -> bool:
    """Re-run every recorded IHX step of ``normalize_simple`` and compare outputs"""
    for step in trace.steps:
        tree = parse_tree(step.tree)
        try:
            outputs = ihx_rewrite(tree, step.site)
        except InvalidSiteError:
            return False
        if tuple(o.canonical_key for o in outputs) != step.outputs:
            return False
    return True
