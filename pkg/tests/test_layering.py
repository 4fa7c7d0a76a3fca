"""Entry/body labellings: derivation, checking, loops, measures, search."""

import pytest

from conftest import all_valid_labellings, corpus, sl_system
from starexpr.bisim import minimize
from starexpr.errors import LayeringError, LimitExceededError
from starexpr.layering import (
    Labelling, check_well_layered, labelling_doc, labelling_from_doc,
    loops_around, measures, search_labelling, syntactic_labelling,
)
from starexpr.semantics import TICK, load_system, export_system, reachable
from starexpr.syntax import parse, print_expr
from starexpr.theory import parse_selector

SL = parse_selector("sl")


def reach_with_labelling(text, cfg=SL):
    e = parse(text, cfg)
    sys_, root = reachable(cfg, e)
    return sys_, root, syntactic_labelling(cfg, e, sys_)


# ---------------------------------------------------------------------------
# the syntactic labelling


def test_self_loop_from_accepting_body_is_entry():
    sys_, root, lab = reach_with_labelling("a *{u+v} b")
    assert lab.entry == {(root, "a", root)}


def test_entry_into_terminating_remainder():
    sys_, root, lab = reach_with_labelling("(a;b) *{u+v} c")
    other = next(x for x in sys_.states if x != root)
    assert lab.entry == {(root, "a", other)}
    # the return leg stays body
    assert (other, "b", root) in set(sys_.state_transitions()) - lab.entry


def test_branching_only_expressions_have_no_entry():
    sys_, root, lab = reach_with_labelling("(a + b) ; c")
    assert lab.entry == frozenset()


def test_non_terminating_body_gives_no_entry():
    # the inner remainder loops forever, so the outer entry rule cannot fire
    sys_, root, lab = reach_with_labelling("((a *{u} b) ; c) *{u + v} d")
    assert all(src != root or dst == root for src, _, dst in lab.entry)


def test_labelling_requires_provenance():
    sys_, root, _ = reach_with_labelling("a *{u+v} b")
    imported = load_system(export_system(sys_))
    with pytest.raises(LayeringError):
        syntactic_labelling(SL, parse("a *{u+v} b", SL), imported)


def test_syntactic_labelling_well_layered_on_corpus(cfg):
    for e in corpus(cfg.selector(), count=40):
        sys_, _ = reachable(cfg, e)
        lab = syntactic_labelling(cfg, e, sys_)
        verdict = check_well_layered(sys_, lab)
        assert verdict.ok, (print_expr(e), verdict.describe())


# ---------------------------------------------------------------------------
# the checker


def test_body_self_loop_violates_condition_1():
    sys_ = sl_system({"x": [("a", "x")]})
    verdict = check_well_layered(sys_, Labelling(frozenset()))
    assert not verdict.ok and verdict.condition == 1


def test_entry_without_body_return_violates_condition_2():
    sys_ = sl_system({"x": [("a", "y")], "y": [("b", TICK)]})
    verdict = check_well_layered(sys_, Labelling(frozenset({("x", "a", "y")})))
    assert not verdict.ok and verdict.condition == 2
    assert verdict.witness == ("x", "y")


def test_loops_around_cycle_violates_condition_3():
    # bodies are acyclic and every entry returns, yet x and y loop around
    # to each other through the two detour states
    sys_ = sl_system({
        "x": [("a", "p")],
        "y": [("b", "q")],
        "p": [("c", "x"), ("d", "y")],
        "q": [("e", "x"), ("f", "y")],
    })
    lab = Labelling(frozenset({("x", "a", "p"), ("y", "b", "q")}))
    verdict = check_well_layered(sys_, lab)
    assert not verdict.ok and verdict.condition == 3


def test_accepting_loop_target_violates_condition_4():
    sys_ = sl_system({
        "x": [("a", "y")],
        "y": [("b", "x"), ("t", TICK)],
    })
    lab = Labelling(frozenset({("x", "a", "y")}))
    verdict = check_well_layered(sys_, lab)
    assert not verdict.ok and verdict.condition == 4
    assert verdict.witness == ("x", "y")


def test_entry_self_loops_are_permitted():
    sys_ = sl_system({"x": [("a", "x"), ("b", TICK)]})
    assert check_well_layered(sys_, Labelling(frozenset({("x", "a", "x")}))).ok


def test_foreign_entry_rejected():
    sys_ = sl_system({"x": [("a", TICK)]})
    with pytest.raises(ValueError):
        check_well_layered(sys_, Labelling(frozenset({("x", "a", "x")})))


# ---------------------------------------------------------------------------
# loops-around and measures


def test_loops_around_examples():
    sys_, root, lab = reach_with_labelling("(a;b) *{u+v} c")
    other = next(x for x in sys_.states if x != root)
    assert loops_around(sys_, lab) == {(root, other)}

    sys_, root, lab = reach_with_labelling("a *{u+v} b")
    assert loops_around(sys_, lab) == frozenset()

    sys_, root, lab = reach_with_labelling("(a + b) ; c")
    assert loops_around(sys_, lab) == frozenset()


def test_measures_examples():
    sys_, root, lab = reach_with_labelling("a *{u+v} b")
    assert measures(sys_, lab)[root] == (0, 0)

    chart = sl_system({
        "x": [("a", "x'"), ("b", TICK)],
        "x'": [("c", "x'"), ("d", TICK)],
    })
    lab = Labelling(frozenset({("x'", "c", "x'")}))
    m = measures(chart, lab)
    assert m["x"][1] == 1 and m["x'"][1] == 0

    chain = sl_system({"x": [("a", "y")], "y": [("b", "z")], "z": [("c", TICK)]})
    m = measures(chain, Labelling(frozenset()))
    assert m["x"][1] == 2


def test_measures_reject_cycles():
    sys_ = sl_system({"x": [("a", "y")], "y": [("b", "x")]})
    with pytest.raises(LayeringError):
        measures(sys_, Labelling(frozenset()))


def test_measures_decrease_along_edges(cfg):
    for e in corpus(cfg.selector(), count=30):
        sys_, _ = reachable(cfg, e)
        lab = syntactic_labelling(cfg, e, sys_)
        meas = measures(sys_, lab)
        body = set(sys_.state_transitions()) - lab.entry
        for x, _, y in body:
            assert meas[y][1] < meas[x][1]
        for x, y in loops_around(sys_, lab):
            assert meas[y][0] < meas[x][0]


# ---------------------------------------------------------------------------
# search


def test_search_state_loop_forced_entry():
    sys_ = sl_system({"x": [("a", "x")]})
    lab = search_labelling(sys_)
    assert lab == Labelling(frozenset({("x", "a", "x")}))
    # and that is the only valid labelling of the two
    assert all_valid_labellings(sys_) == [lab]


def test_search_minimized_star():
    sys_, root = reachable(SL, parse("a *{u+v} b", SL))
    msys, _ = minimize(sys_)
    lab = search_labelling(msys)
    assert lab is not None and check_well_layered(msys, lab).ok


def test_search_exhausts_to_none():
    # both states accept and sit on a two-cycle: every labelling fails
    sys_ = sl_system({
        "x": [("a", "y"), ("t", TICK)],
        "y": [("b", "x"), ("t", TICK)],
    })
    assert all_valid_labellings(sys_) == []
    assert search_labelling(sys_) is None


def test_search_prefers_fewer_entry_transitions():
    sys_, root, syn = reach_with_labelling("(a;b) *{u+v} c")
    lab = search_labelling(sys_)
    assert check_well_layered(sys_, lab).ok
    assert len(lab.entry) <= len(syn.entry)


def test_search_transition_guard():
    sys_ = sl_system({
        f"s{i}": [(a, f"s{(i + 1) % 5}") for a in "abcde"] for i in range(5)
    })
    with pytest.raises(LimitExceededError):
        search_labelling(sys_)


def test_search_succeeds_on_minimized_corpus(cfg):
    for e in corpus(cfg.selector(), count=25):
        sys_, _ = reachable(cfg, e)
        msys, _ = minimize(sys_)
        if len(msys.states) > 8 or len(msys.state_transitions()) > 20:
            continue
        lab = search_labelling(msys)
        assert lab is not None, print_expr(e)
        assert check_well_layered(msys, lab).ok


def test_labelling_documents_round_trip():
    sys_, root, lab = reach_with_labelling("(a;b) *{u+v} c")
    doc = labelling_doc(lab)
    assert doc == {"entry": [[root, "a", "s1"]]}
    assert labelling_from_doc(doc, sys_) == lab
