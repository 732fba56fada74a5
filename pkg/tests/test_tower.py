"""
Whitney tower models.

Claims:
  - point order is n + m + 1 and equals the degree of its tree
  - raw towers resolve disk ids and reject cycles
  - tower order is the least degree minus one, unbounded when empty
  - the height check follows the same-order rule and ignores where the
    puncture starts
"""

import random

import pytest

from errors import BracketSyntaxError, ValidationError
from oracle import random_bracket
from tower import (
    UNBOUNDED,
    OrderValue,
    RawTower,
    SplitTower,
    check_height,
    check_tree_height,
    extract_split,
    min_height_degree,
    order_of_point,
    simple_tower,
    tower_order,
)
from trees import Height, PuncturedTree, is_simple, leaf, parse_bracket, parse_punctured, unroot, unrooted_product


def _tower(*texts: str) -> SplitTower:
    return SplitTower.from_json({"trees": [{"tree": t} for t in texts]})


def test_order_of_point():
    assert order_of_point(leaf("a"), leaf("b")) == 1
    assert order_of_point(parse_bracket("(a,b)"), parse_bracket("(c,d)")) == 3


def test_order_of_point_matches_degree():
    rng = random.Random(3)
    for _ in range(200):
        a = random_bracket(rng, rng.randint(1, 4), ["a", "b"])
        b = random_bracket(rng, rng.randint(1, 4), ["a", "b"])
        assert order_of_point(a, b) == unrooted_product(a, b).degree


def test_order_value_ordering():
    assert OrderValue.finite(2) < OrderValue.finite(3) < UNBOUNDED
    assert not UNBOUNDED < OrderValue.finite(100)
    assert UNBOUNDED.to_json() == "unbounded"
    with pytest.raises(ValidationError):
        OrderValue.finite(-1)


def test_extract_split_resolves_disks():
    raw = RawTower.from_json(
        {"surfaces": ["a", "b", "c", "d"], "disks": {"W1": ["a", "b"], "W2": ["W1", "c"]}, "points": [["W2", "d"]]}
    )
    tower = extract_split(raw)
    assert len(tower.trees) == 1
    assert tower.trees[0].key == "p(d,(c,(a,b)))"
    assert tower_order(tower) == OrderValue.finite(2)


def test_extract_split_single_disk():
    raw = RawTower.from_json({"surfaces": ["a", "b", "c"], "disks": {"W1": "(a,b)"}, "points": [["W1", "c"]]})
    tower = extract_split(raw)
    assert tower.trees[0].degree == 2


def test_extract_split_without_points():
    tower = extract_split(RawTower.from_json({"surfaces": ["a", "b"], "points": []}))
    assert tower.trees == ()
    assert tower_order(tower) == UNBOUNDED


def test_extract_split_chord():
    tower = extract_split(RawTower.from_json({"surfaces": ["a", "b"], "points": [["a", "b"]]}))
    assert [tp.key for tp in tower.trees] == ["p(a,b)"]
    assert tower_order(tower) == OrderValue.finite(0)


def test_extract_split_keeps_point_count():
    raw = RawTower.from_json(
        {"surfaces": ["a", "b"], "disks": {"W": ["a", "b"]}, "points": [["W", "a"], ["a", "b"], ["W", "W"]]}
    )
    tower = extract_split(raw)
    assert len(tower.trees) == 3
    assert [tp.degree for tp in tower.trees] == [2, 1, 3]


@pytest.mark.parametrize(
    "payload",
    [
        {"surfaces": ["a"], "disks": {"W1": ["W2", "a"], "W2": ["W1", "a"]}, "points": [["W1", "a"]]},
        {"surfaces": ["a"], "points": [["X", "a"]]},
        {"surfaces": ["a"], "disks": {"a": ["a", "a"]}, "points": []},
        {"points": []},
    ],
)
def test_raw_tower_errors(payload):
    with pytest.raises(ValidationError):
        extract_split(RawTower.from_json(payload))


def test_split_tower_rejects_stray_labels():
    tp = parse_punctured("p(a,b)")
    with pytest.raises(ValidationError):
        SplitTower(frozenset({"a"}), (tp,))


def test_split_tower_json():
    tower = _tower("p((a,b),(c,d))")
    assert tower.surfaces == frozenset("abcd")
    payload = tower.to_json()
    assert payload["trees"][0]["tree"] == "p((a,b),(c,d))"
    assert SplitTower.from_json(payload).trees == tower.trees


@pytest.mark.parametrize(
    "payload",
    [
        {"trees": [{"tree": "p(1,2)", "puncture": "x"}]},
        {"trees": [{"tree": "p(1,2)", "puncture": None}]},
        {"trees": [{"puncture": 0}]},
        {"trees": [{"tree": "p(1,2)"}], "surfaces": 5},
    ],
)
def test_malformed_split_tower(payload):
    with pytest.raises(ValidationError, match="Malformed split tower"):
        SplitTower.from_json(payload)


def test_split_tower_keeps_syntax_offset():
    with pytest.raises(BracketSyntaxError) as info:
        SplitTower.from_json({"trees": [{"tree": "p(1,"}]})
    assert info.value.offset == 4


def test_tower_order():
    assert tower_order(_tower("p(a,b)")) == OrderValue.finite(0)
    assert tower_order(_tower("p((a,b),(c,d))")) == OrderValue.finite(2)
    assert tower_order(_tower("p((a,b),(c,d))", "p(a,(b,c))")) == OrderValue.finite(1)
    assert tower_order(SplitTower(frozenset())) == UNBOUNDED


def test_min_height_degree():
    assert min_height_degree(Height(1)) == 1
    assert min_height_degree(Height(2)) == 3
    assert min_height_degree(Height(3)) == 7
    assert min_height_degree(Height(1, True)) == 2
    assert min_height_degree(Height(2, True)) == 5


def test_height_two_of_balanced_tree():
    report = check_height(_tower("p((a,b),(c,d))"), 2)
    assert report.ok
    assert report.trees[0].kind == "standard"


def test_chord_has_height_one_only():
    assert check_height(_tower("p(a,b)"), 1)
    report = check_height(_tower("p(a,b)"), 2)
    assert not report
    assert "degree" in report.trees[0].reason


def test_degree_seven_comb_fails_height_three():
    comb = unroot(parse_bracket("(2,(3,(4,(5,(6,(7,8))))))"), "1")
    assert is_simple(comb)
    assert comb.degree == 7
    report = check_tree_height(PuncturedTree(comb, 0), Height(3))
    assert not report.ok
    assert report.reason


def test_every_degree_three_tree_has_height_two():
    assert check_height(_tower("p(a,(b,(c,d)))"), 2)


def test_degree_five_comb_fails_height_two():
    assert check_height(_tower("p(a,(b,(c,(d,e))))"), 2)
    report = check_height(_tower("p(a,(b,(c,(d,(e,f)))))"), 2)
    assert not report
    assert "same-order" in report.trees[0].reason


def test_half_heights():
    report = check_height(_tower("p(r,(a,(b,c)))"), "1.5")
    assert report.ok
    assert report.trees[0].kind == "top-lower"
    top_top = check_height(_tower("p((a,b),(c,(d,e)))"), "1.5")
    assert top_top.ok


def test_height_ignores_puncture_position():
    for text in ["p((a,b),(c,d))", "p(a,(b,(c,d)))", "p(r,((a,b),(c,d)))", "p(r,(a,(b,c)))"]:
        tp = parse_punctured(text)
        for h in ["1", "1.5", "2", "2.5"]:
            expected = check_tree_height(tp, Height.parse(h)).ok
            for e in range(len(tp.tree.edges)):
                assert check_tree_height(PuncturedTree(tp.tree, e), Height.parse(h)).ok == expected


def test_height_implies_order_bound():
    for text in ["p((a,b),(c,d))", "p(r,((a,b),(c,d)))", "p(a,b)"]:
        tower = _tower(text)
        for n in (1, 2, 3):
            if check_height(tower, n):
                assert tower_order(tower) >= OrderValue.finite(2 ** n - 2)


def test_simple_tower():
    tower = _tower("p(((1,2),(3,4)),(5,6))", "p(1,2)")
    simple = simple_tower(tower)
    assert all(is_simple(tp.tree) for tp in simple.trees)
    assert len(simple.trees) >= 3
    assert tower_order(simple) == tower_order(tower)
