"""
Tree algebra.

Claims:
  - bracket text renders canonically (leaves first, then by key)
  - syntax errors carry byte offsets
  - canonical keys agree with brute-force isomorphism
  - cutting at any edge and gluing back is exact
  - simplicity, rerooting and puncture helpers behave as documented
"""

import random

import pytest

from errors import BracketSyntaxError, InvalidEdgeError, NotUnivalentError, ValidationError
from oracle import Corpus, brute_force_isomorphic, random_bracket
from trees import (
    Height,
    PuncturedTree,
    UnrootedTree,
    adjacent_edges,
    canonical_key,
    decompose_at_edge,
    degree,
    is_right_normed,
    is_shape,
    is_simple,
    leaf,
    move_puncture,
    order_of,
    parse_bracket,
    parse_punctured,
    parse_tree,
    place_puncture_at_leaf,
    puncture_path,
    render_bracket,
    render_punctured,
    reroot_at_leaf,
    unroot,
    unrooted_product,
    y_shape,
    y_tree,
)


def _h_tree() -> PuncturedTree:
    return unrooted_product(parse_bracket("(1,2)"), parse_bracket("(3,4)"))


@pytest.mark.parametrize(
    "text, key",
    [
        ("1", "1"),
        ("(2,1)", "(1,2)"),
        ("((3,4),(1,2))", "((1,2),(3,4))"),
        ("((2,3),1)", "(1,(2,3))"),
        (" ( a , ( b , c ) ) ", "(a,(b,c))"),
    ],
)
def test_canonical_rendering(text, key):
    assert render_bracket(parse_bracket(text)) == key


def test_render_then_parse_gives_back_the_tree():
    rng = random.Random(3)
    for n in range(1, 9):
        b = random_bracket(rng, n, ["1", "2", "3", "4"])
        text = render_bracket(b)
        assert parse_bracket(text) == b
        assert render_bracket(parse_bracket(text)) == text
    for text in ("p(1,2)", "p(1,(2,3))", "p((1,2),(3,4))", "p(4,((1,2),3))"):
        tp = parse_punctured(text)
        again = parse_punctured(render_punctured(tp))
        assert again == tp
        assert render_punctured(again) == render_punctured(tp)


def test_commutative_equality():
    assert parse_bracket("((1,2),3)") == parse_bracket("(3,(2,1))")
    assert parse_bracket("((1,2),3)") != parse_bracket("((1,3),2)")


@pytest.mark.parametrize("text", ["(1,2", "(1,,2)", "", "(1;2)", "((1,2)"])
def test_syntax_errors(text):
    with pytest.raises(BracketSyntaxError) as info:
        parse_bracket(text)
    assert 0 <= info.value.offset <= len(text.encode())


def test_syntax_error_offset_is_in_bytes():
    err = BracketSyntaxError("(→,1", 2)
    assert err.offset == 4
    assert "offset 4" in str(err)


def test_missing_close_paren_offset():
    with pytest.raises(BracketSyntaxError) as info:
        parse_bracket("(1,2")
    assert info.value.offset == 4


def test_degree():
    assert degree(parse_bracket("((1,2),(3,4))")) == 4
    assert degree(leaf("1")) == 1
    assert degree(_h_tree()) == 3
    assert order_of(parse_bracket("((1,2),3)")) == 2


def test_degree_law_for_products():
    rng = random.Random(7)
    for _ in range(100):
        a = random_bracket(rng, rng.randint(1, 5), ["1", "2", "3"])
        b = random_bracket(rng, rng.randint(1, 5), ["1", "2", "3"])
        assert unrooted_product(a, b).degree == degree(a) + degree(b) - 1


def test_unroot_canonical_key():
    t = unroot(parse_bracket("(2,(3,4))"), "1")
    assert t.canonical_key == "1:(2,(3,4))"
    assert canonical_key(t) == canonical_key(_h_tree().tree)


def test_canonical_numbering_is_stable():
    t = parse_tree("1:(2,(3,4))")
    again = parse_tree(t.canonical_key)
    assert t.labels == again.labels
    assert t.edges == again.edges
    assert t.labels[0] == "1"


def test_parse_tree_forms_agree():
    forms = ["p((1,2),(3,4))", "((1,2),(3,4))", "1:(2,(3,4))", "3:(4,(1,2))"]
    keys = {parse_tree(text).canonical_key for text in forms}
    assert len(keys) == 1


def test_from_bracket_pair():
    assert UnrootedTree.from_bracket_pair(parse_bracket("(1,2)"), parse_bracket("(3,4)")) == _h_tree().tree


def test_invalid_trees_rejected():
    with pytest.raises(ValidationError):
        UnrootedTree.from_edges(["a", "b", "c"], [(0, 1), (1, 2)])
    with pytest.raises(ValidationError):
        UnrootedTree.from_edges(["a", "b"], [(0, 1), (0, 1)])
    with pytest.raises(ValidationError):
        leaf("bad label")


def test_canonical_key_matches_isomorphism():
    corpus = Corpus.build(5, ("1", "2"))
    trees = corpus.unrooted
    assert trees
    for i, a in enumerate(trees):
        for b in trees[i:]:
            same = a.canonical_key == b.canonical_key
            assert same == brute_force_isomorphic(a, b)


def test_decompose_recompose_is_exact():
    corpus = Corpus.build(5, ("1", "2"))
    for t in corpus.unrooted:
        for e in range(len(t.edges)):
            a, b = decompose_at_edge(t, e)
            assert degree(a) + degree(b) - 1 == t.degree
            assert unrooted_product(a, b).tree == t


def test_decompose_h_tree():
    tp = _h_tree()
    assert [b.key for b in tp.sides] == ["(1,2)", "(3,4)"]
    tree = tp.tree
    (v,) = tree.leaf_vertices("1")
    (w,) = tree.adjacency[v]
    sides = decompose_at_edge(tree, tree.edge_index(v, w))
    assert [b.key for b in sides] == ["1", "(2,(3,4))"]


def test_reroot_at_leaf():
    tree = _h_tree().tree
    (v,) = tree.leaf_vertices("1")
    label, b = reroot_at_leaf(tree, v)
    assert (label, b.key) == ("1", "(2,(3,4))")
    inner = tree.trivalent[0]
    with pytest.raises(NotUnivalentError):
        reroot_at_leaf(tree, inner)


def test_punctured_key_and_parse():
    tp = parse_punctured("p((3,4),(2,1))")
    assert tp.key == "p((1,2),(3,4))"
    assert tp == _h_tree()


def test_invalid_edge():
    with pytest.raises(InvalidEdgeError):
        decompose_at_edge(_h_tree().tree, 99)


def test_adjacent_edges_and_puncture_path():
    tp = _h_tree()
    tree = tp.tree
    neighbours = adjacent_edges(tree, tp.puncture)
    assert len(neighbours) == 4
    (v,) = tree.leaf_vertices("4")
    target = tree.edge_index(v, tree.adjacency[v][0])
    path = puncture_path(tp, target)
    assert path[0] == tp.puncture and path[-1] == target
    for a, b in zip(path, path[1:]):
        assert b in adjacent_edges(tree, a)
    moved = move_puncture(tp, target)
    assert moved.tree == tree
    assert moved.key == "p(4,(3,(1,2)))"


def test_place_puncture_at_leaf():
    b = parse_bracket("(2,(1,3))")
    tree = unroot(b, "1")
    tp = place_puncture_at_leaf(tree, "1", b)
    assert tp.key == "p(1,(2,(1,3)))"
    with pytest.raises(NotUnivalentError):
        place_puncture_at_leaf(tree, "9")


def test_simplicity():
    assert is_simple(_h_tree().tree)
    chord = parse_tree("1:2")
    assert is_simple(chord).spine == (0, 1)
    three_pairs = unrooted_product(parse_bracket("((1,2),(3,4))"), parse_bracket("(5,6)")).tree
    check = is_simple(three_pairs)
    assert not check
    assert three_pairs.degree == 5


def test_degree_four_trees_are_simple():
    for t in Corpus.build(4, ("1", "2")).unrooted:
        if t.degree <= 4:
            assert is_simple(t)


def test_simple_spine_covers_trivalent_vertices():
    t = unroot(parse_bracket("(2,(3,(4,5)))"), "1")
    check = is_simple(t)
    assert set(check.trivalent_spine) == set(t.trivalent)
    assert check.spine == min(check.spine, tuple(reversed(check.spine)))


def test_right_normed():
    assert is_right_normed(parse_bracket("(1,(2,(3,4)))"))
    assert not is_right_normed(parse_bracket("((1,2),(3,4))"))
    assert is_right_normed(leaf("1"))


@pytest.mark.parametrize(
    "text, expected",
    [("1", Height(1)), ("2.5", Height(2, True)), (1.5, Height(1, True)), ("3.0", Height(3))],
)
def test_height_parse(text, expected):
    assert Height.parse(text) == expected


def test_height_rejects_zero():
    with pytest.raises(ValidationError):
        Height.parse("0")
    with pytest.raises(ValidationError):
        Height.parse("two")


def test_y_shapes():
    assert y_shape(0).shape_key == "*"
    assert y_tree(1).shape_key == "(*,*)"
    assert y_tree(2).shape_key == "((*,*),(*,*))"
    assert y_tree("1.5").shape_key == "(*,(*,*))"
    assert degree(y_tree("2.5")) == Height(2, True).class_value == 6
    assert is_shape(parse_bracket("((a,b),(c,d))"), y_tree(2))
    assert not is_shape(parse_bracket("(a,(b,(c,d)))"), y_tree(2))
