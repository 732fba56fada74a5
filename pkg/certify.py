"""
Certificate pipelines: tower height from symmetric gropes, half-grope
conversion and k-slice root selection.

Every certificate serializes to JSON and ``verify_certificate`` re-checks it
from the serialized data alone.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

from errors import GropeTowerError, PreconditionError, ValidationError
from grope import CappedGrope, grope_class, is_half_grope, is_symmetric_height
from hybrid import grope_to_tower
from rewrite import JacobiStep, normalize_right_normed, normalize_simple, replay_jacobi_steps
from tower import HeightReport, SplitTower, check_height, tower_order
from trees import (
    Bracket,
    Height,
    UnrootedTree,
    decompose_at_edge,
    degree,
    is_shape,
    is_simple,
    pair,
    parse_tree,
    reroot_at_leaf,
    y_tree,
)

logger = logging.getLogger(__name__)


# -- Height ------------------------------------------------------------------------

@dataclass
class HeightCertificate:
    height: Height
    grope: CappedGrope
    tower: SplitTower
    report: HeightReport
    stronger_condition: bool

    KIND = "height"

    @property
    def order(self) -> int:
        return tower_order(self.tower).value

    def to_json(self) -> Dict[str, Any]:
        return {
            "kind": self.KIND,
            "height": str(self.height),
            "grope": self.grope.to_json(),
            "tower": self.tower.to_json(),
            "order": self.order,
            "stronger_condition": self.stronger_condition,
            "witnesses": [r.to_json() for r in self.report.trees],
        }


def _stronger(tower: SplitTower, h: Height) -> bool:
    # the non-root side of every punctured edge is exactly Y^h
    shape = y_tree(h)
    for tp in tower.trees:
        a, b = decompose_at_edge(tp.tree, tp.puncture)
        rest = b if a.is_leaf else a
        if not is_shape(rest, shape):
            return False
    return True


def certify_height(g: CappedGrope) -> HeightCertificate:
    """
    Turn a symmetric grope of height h into a tower of the same height.

    Raises:
        PreconditionError: the trees of ``g`` are not all Y^h for one h
    """
    h = is_symmetric_height(g)
    if h is None:
        raise PreconditionError("Grope is not symmetric of any height")
    tower = grope_to_tower(g)
    report = check_height(tower, h)
    if not report.ok:
        raise GropeTowerError(f"Tower built from a height-{h} grope fails the height check")
    logger.info("height %s certified: tower order %s", h, tower_order(tower))
    return HeightCertificate(h, g, tower, report, _stronger(tower, h))


# -- Half-gropes -------------------------------------------------------------------

@dataclass
class HalfGropeCertificate:
    source: CappedGrope
    result: CappedGrope
    steps: List[JacobiStep] = field(default_factory=list)

    KIND = "half-grope"

    def to_json(self) -> Dict[str, Any]:
        return {
            "kind": self.KIND,
            "source": self.source.to_json(),
            "result": self.result.to_json(),
            "class": grope_class(self.result)[0],
            "steps": [s.to_json() for s in self.steps],
        }


def to_half_gropes(g: CappedGrope, steps: Optional[List[JacobiStep]] = None) -> CappedGrope:
    """Replace every bracket by its right-normed Jacobi expansion; surface ownership is kept"""
    bodies = {
        surface: tuple(out for b in forest for out in normalize_right_normed(b, steps))
        for surface, forest in g.bodies.items()
    }
    return CappedGrope(bodies, g.kind, g.external)


def certify_half_grope(g: CappedGrope) -> HalfGropeCertificate:
    steps: List[JacobiStep] = []
    result = to_half_gropes(g, steps)
    logger.info("half-grope conversion: %d Jacobi steps", len(steps))
    return HalfGropeCertificate(g, result, steps)


# -- k-slice -----------------------------------------------------------------------

@dataclass(frozen=True)
class KSliceRoot:
    """
    A rerooting of a simple tree at a leaf ``position`` trivalent vertices
    along its spine. The root and the first trivalent vertex form the class-2
    bottom; ``branches`` are the two first-stage subtrees.
    """

    tree: str
    leaf: int
    label: str
    position: int
    spine_length: int
    branches: Tuple[Bracket, Bracket]

    @property
    def bracket(self) -> Bracket:
        return pair(*self.branches)

    @property
    def branch_degrees(self) -> Tuple[int, int]:
        return tuple(degree(b) for b in self.branches)

    def to_json(self) -> Dict[str, Any]:
        return {
            "tree": self.tree,
            "leaf": self.leaf,
            "label": self.label,
            "position": self.position,
            "spine_length": self.spine_length,
            "branches": [b.key for b in self.branches],
            "branch_degrees": list(self.branch_degrees),
        }


def admissible_positions(m: int, k: int) -> List[int]:
    """Spine positions p with k <= p <= m + 1 - k"""
    return list(range(k, m + 2 - k))


def select_k_slice_roots(trees: Sequence[UnrootedTree], k: int) -> List[KSliceRoot]:
    """
    Pick, for each simple tree, a leaf at least k trivalent vertices away from
    both spine ends; the median admissible position is used (lower on ties).

    Raises:
        PreconditionError: a tree is not simple or has degree below 2k
    """
    if k < 1:
        raise ValidationError(f"k must be positive, got {k}")
    roots = []
    for t in trees:
        check = is_simple(t)
        if not check:
            raise PreconditionError(f"Tree {t} is not simple")
        if t.degree < 2 * k:
            raise PreconditionError(f"Tree {t} has degree {t.degree} < 2k = {2 * k}")
        spine = check.spine
        m = len(spine) - 2
        positions = admissible_positions(m, k)
        p = positions[(len(positions) - 1) // 2]
        v = spine[p]
        off = min(w for w in t.adjacency[v] if w not in (spine[p - 1], spine[p + 1]))
        branches = (t.branch(spine[p - 1], v), t.branch(spine[p + 1], v))
        roots.append(KSliceRoot(t.canonical_key, off, t.labels[off], p, m, branches))
        logger.debug("k=%d root of %s at spine position %d of %d", k, t, p, m)
    return roots


@dataclass
class KSliceEntry:
    source: str
    roots: List[KSliceRoot]

    def to_json(self) -> Dict[str, Any]:
        return {"source": self.source, "roots": [r.to_json() for r in self.roots]}


@dataclass
class KSliceCertificate:
    k: int
    grope: CappedGrope
    entries: List[KSliceEntry]
    result: CappedGrope

    KIND = "k-slice"
    REMARK = "The same tree-level data certifies k-cobordism of the link; not checked separately."

    def to_json(self) -> Dict[str, Any]:
        return {
            "kind": self.KIND,
            "k": self.k,
            "grope": self.grope.to_json(),
            "entries": [e.to_json() for e in self.entries],
            "result": self.result.to_json(),
            "remark": self.REMARK,
        }


def certify_k_slice(g: CappedGrope, k: int) -> KSliceCertificate:
    """
    Class 2k gropes to embedded class k gropes on a class-2 bottom.

    Pipeline: grope_to_tower, forget punctures, normalize_simple per tree,
    select_k_slice_roots, reroot.
    """
    if k < 1:
        raise ValidationError(f"k must be positive, got {k}")
    _, cls = grope_class(g)
    if cls < 2 * k:
        raise PreconditionError(f"Grope class {cls} < 2k = {2 * k}")
    tower = grope_to_tower(g)
    entries = []
    bodies: Dict[str, List[Bracket]] = {}
    for tp in tower.trees:
        roots = select_k_slice_roots(normalize_simple(tp.tree), k)
        entries.append(KSliceEntry(tp.key, roots))
        for r in roots:
            bodies.setdefault(r.label, []).append(r.bracket)
    result = CappedGrope(bodies, g.kind, g.surfaces - set(bodies))
    logger.info("k-slice certificate for k=%d: %d simple trees", k, sum(len(e.roots) for e in entries))
    return KSliceCertificate(k, g, entries, result)


# -- Verification --------------------------------------------------------------------

@dataclass
class VerificationResult:
    kind: str
    problems: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.problems

    def __bool__(self) -> bool:
        return self.ok

    def to_json(self) -> Dict[str, Any]:
        return {"kind": self.kind, "ok": self.ok, "problems": list(self.problems)}


def _verify_height(data: Dict[str, Any], problems: List[str]) -> None:
    h = Height.parse(data["height"])
    grope = CappedGrope.from_json(data["grope"])
    tower = SplitTower.from_json(data["tower"])
    if is_symmetric_height(grope) != h:
        problems.append(f"grope is not symmetric of height {h}")
    expected = sorted(tp.key for tp in grope_to_tower(grope).trees)
    if sorted(tp.key for tp in tower.trees) != expected:
        problems.append("tower trees differ from the converted grope")
    if not check_height(tower, h).ok:
        problems.append(f"tower fails the height {h} check")
    order = tower_order(tower)
    if order.value != h.class_value - 1 or data.get("order") != order.value:
        problems.append(f"tower order {order} does not match {h.class_value - 1}")
    if bool(data.get("stronger_condition")) != _stronger(tower, h):
        problems.append("stronger_condition flag does not match the trees")


def _verify_half_grope(data: Dict[str, Any], problems: List[str]) -> None:
    source = CappedGrope.from_json(data["source"])
    result = CappedGrope.from_json(data["result"])
    if not is_half_grope(result):
        problems.append("result is not a half-grope")
    if grope_class(source)[0] != grope_class(result)[0]:
        problems.append("per-surface class changed")
    for surface, forest in result.bodies.items():
        allowed = {tuple(sorted(b.leaves)) for b in source.bodies.get(surface, ())}
        for b in forest:
            if tuple(sorted(b.leaves)) not in allowed:
                problems.append(f"{b} on {surface!r} has no source bracket with its leaves")
    steps = [JacobiStep(s["before"], tuple(s["outputs"])) for s in data.get("steps", [])]
    if not replay_jacobi_steps(steps):
        problems.append("recorded Jacobi steps do not replay")


def _verify_k_slice(data: Dict[str, Any], problems: List[str]) -> None:
    k = int(data["k"])
    grope = CappedGrope.from_json(data["grope"])
    if grope_class(grope)[1] < 2 * k:
        problems.append(f"grope class below 2k = {2 * k}")
    for entry in data["entries"]:
        for root in entry["roots"]:
            t = parse_tree(root["tree"])
            check = is_simple(t)
            if not check:
                problems.append(f"{root['tree']} is not simple")
                continue
            m = len(check.spine) - 2
            p = int(root["position"])
            if not k <= p <= m + 1 - k:
                problems.append(f"position {p} outside [{k}, {m + 1 - k}] for {root['tree']}")
            label, b = reroot_at_leaf(t, int(root["leaf"]))
            if label != root["label"] or b.is_leaf:
                problems.append(f"leaf {root['leaf']} of {root['tree']} does not match")
                continue
            degrees = sorted(degree(x) for x in b.children)
            if degrees != sorted(root["branch_degrees"]) or sorted(x.key for x in b.children) != sorted(root["branches"]):
                problems.append(f"branches of {root['tree']} do not match the rerooting")
            if min(degrees) < k:
                problems.append(f"branch degree {min(degrees)} < k for {root['tree']}")


_VERIFIERS = {
    HeightCertificate.KIND: _verify_height,
    HalfGropeCertificate.KIND: _verify_half_grope,
    KSliceCertificate.KIND: _verify_k_slice,
}


def verify_certificate(payload: Dict[str, Any]) -> VerificationResult:
    """Re-check a serialized certificate of any kind"""
    kind = payload.get("kind") if isinstance(payload, dict) else None
    if kind not in _VERIFIERS:
        raise ValidationError(f"Unknown certificate kind {kind!r}")
    result = VerificationResult(kind)
    try:
        _VERIFIERS[kind](payload, result.problems)
    except (KeyError, TypeError, ValueError) as e:
        result.problems.append(f"malformed certificate: {e}")
    for problem in result.problems:
        logger.warning("certificate check failed: %s", problem)
    return result
