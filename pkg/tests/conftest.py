"""Shared helpers: theory configs, corpora, oracles, small system builders."""

from __future__ import annotations

import itertools
import random
from functools import lru_cache

import pytest

from starexpr import gen
from starexpr.bisim import brute_bisim, disjoint_union
from starexpr.layering import Labelling, check_well_layered
from starexpr.semantics import State, System, TICK
from starexpr.syntax import parse
from starexpr.theory import TheoryConfig, mval_sl, parse_selector

ALL_SELECTORS = gen.STANDARD_CONFIGS  # sl, ga x2, ca, gc, smod:nat, smod:bool

CURATED = {
    "sl": ["a", "0", "a + b", "(a + b) ; c", "a *{u + v} b", "(a ; b) *{u + v} c",
           "(a + b) *{u + v} c", "(a *{u + v} b) *{u + v} c", "a *{v} b", "a *{u} b",
           "a *{0} b", "(a + a) *{u + v} b"],
    "ca": ["a", "a (+1/2) b", "a *{u (+1/2) v} b", "(a (+1/3) b) ; c",
           "a *{(u (+1/2) v) (+3/4) 0} b"],
    "ga": ["a", "a +[p] b", "a *{u +[p] v} b", "(a +[!p] b) ; c"],
    "gc": ["a", "a +[p] b", "a (+1/2) b", "a *{u (+1/3) (u +[p] v)} b",
           "a *{(u (+1/2) v) +[p] (v (+1/4) 0)} b"],
    "smod": ["a", "a (+) b", "2 . a", "a *{u (+) v} b", "a *{(2 . u) (+) v} b",
             "1 . a (+) 0"],
}


def curated_for(cfg: TheoryConfig):
    texts = CURATED[cfg.kind]
    if cfg.kind in ("ga", "gc") and not cfg.tests:
        texts = [t for t in texts if "[" not in t]
    if cfg.kind == "smod" and cfg.semiring.name == "bool":
        texts = [t for t in texts if "2 ." not in t]
    return [parse(t, cfg) for t in texts]


@lru_cache(maxsize=None)
def corpus(selector: str, count: int = 60, size: int = 8, seed: int = 77):
    cfg = parse_selector(selector)
    return tuple(curated_for(cfg)) + tuple(gen.corpus(cfg, count, size, seed))


@pytest.fixture(params=ALL_SELECTORS)
def cfg(request) -> TheoryConfig:
    return parse_selector(request.param)


@pytest.fixture
def sl() -> TheoryConfig:
    return parse_selector("sl")


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20240817)


def sl_system(edges, root=None) -> System:
    """Build a nondeterministic system from {state: [(action, 'state' | TICK)]}."""
    cfg = parse_selector("sl")
    states = tuple(edges)
    beta = {
        x: mval_sl(cfg, [(a, TICK if t is TICK else State(t)) for a, t in pairs])
        for x, pairs in edges.items()
    }
    return System(cfg, states, beta, root=root)


def brute_bisimilar(sys1, x1, sys2, x2) -> bool:
    """Independent equivalence oracle: enumerate partitions on the union."""
    union, left, right = disjoint_union(sys1, sys2)
    part = brute_bisim(union)
    return part[left[x1]] == part[right[x2]]


def all_valid_labellings(sys: System, limit: int | None = None):
    """Every well-layered labelling at pair granularity, by ascending entry
    pair count; independent of the search implementation."""
    pairs = sorted({(x, y) for x, _, y in sys.state_transitions()})
    triples = sys.state_transitions()
    found = []
    for k in range(len(pairs) + 1):
        for chosen in itertools.combinations(pairs, k):
            entry = frozenset(t for t in triples if (t[0], t[2]) in set(chosen))
            lab = Labelling(entry)
            if check_well_layered(sys, lab).ok:
                found.append(lab)
                if limit is not None and len(found) >= limit:
                    return found
    return found
