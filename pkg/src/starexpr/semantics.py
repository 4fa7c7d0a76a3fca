"""Small-step semantics and finite transition systems.

A system's transition function sends each state to a branching value over
pairs (action, target), where a target is either another state or the
acceptance marker tick.  Expressions carry a syntactic system structure via
`step`; `reachable` carves out the finite subsystem generated by one
expression, interning expressions as states.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .errors import DocumentError
from .syntax import Act, Expr, Seq, Star, TOp, print_expr
from .theory import (
    MVal, SOp, SVar, TheoryConfig, element_sort_key, eta, eval_term, mval_map,
    mval_ca, mval_ga, mval_gc, mval_sl, mval_smod, parse_selector, supp,
)


class Tick:
    """The acceptance target."""

    __slots__ = ()
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "✓"

    def sort_key(self):
        return ()


TICK = Tick()


@dataclass(frozen=True)
class State:
    """A state reference inside a transition value."""

    sid: str

    def sort_key(self):
        return (self.sid,)

    def __repr__(self):
        return f"State({self.sid})"


Target = Tick | State


# ---------------------------------------------------------------------------
# the step function


def step(cfg: TheoryConfig, e: Expr) -> MVal:
    """One transition step: a branching value over (action, tick-or-Expr).

    Branching operators evaluate into the free algebra; sequencing pushes
    the continuation into every target; the loop former ties its body's
    accepting branches back to itself through the loop term.
    """
    return _step(cfg, e)


@lru_cache(maxsize=1 << 17)
def _step(cfg: TheoryConfig, e: Expr) -> MVal:
    if isinstance(e, Act):
        return eta(cfg, (e.name, TICK))
    if isinstance(e, TOp):
        term = SOp(e.sym, tuple(SVar(i) for i in range(len(e.args))))
        env = {i: _step(cfg, child) for i, child in enumerate(e.args)}
        return eval_term(cfg, term, env)
    if isinstance(e, Seq):
        return mval_map(_push(e.right), _step(cfg, e.left))
    if isinstance(e, Star):
        env = {
            "u": mval_map(_push(e), _step(cfg, e.body)),
            "v": _step(cfg, e.exit),
        }
        return eval_term(cfg, e.loop, env)
    raise TypeError(f"not an expression: {e!r}")


def _push(cont: Expr):
    """Relabel (a, tick) to (a, cont) and (a, f) to (a, f;cont)."""

    def f(pair):
        action, tgt = pair
        if tgt is TICK:
            return (action, cont)
        return (action, Seq(tgt, cont))

    return f


# ---------------------------------------------------------------------------
# finite systems


@dataclass
class System:
    """A finite system: ordered states and a total transition map.

    ``exprs`` carries expression provenance when the system was built by
    `reachable`; imported or minimized systems have none.  Treat instances
    as immutable after construction.
    """

    cfg: TheoryConfig
    states: tuple[str, ...]
    beta: dict[str, MVal]
    root: str | None = None
    exprs: dict[str, Expr] | None = None

    def actions(self) -> tuple[str, ...]:
        seen = set()
        for m in self.beta.values():
            seen.update(a for a, _ in supp(m))
        return tuple(sorted(seen))

    def accepts(self, x: str) -> bool:
        return any(tgt is TICK for _, tgt in supp(self.beta[x]))

    def state_transitions(self) -> list[tuple[str, str, str]]:
        """All state-to-state transitions (src, action, dst), canonically
        ordered; tick transitions are not included."""
        index = {x: i for i, x in enumerate(self.states)}
        triples = []
        for x in self.states:
            for a, tgt in supp(self.beta[x]):
                if tgt is not TICK:
                    triples.append((x, a, tgt.sid))
        triples.sort(key=lambda t: (index[t[0]], t[1], index[t[2]]))
        return triples


def _sorted_support(m: MVal):
    return sorted(supp(m), key=element_sort_key)


def reachable(cfg: TheoryConfig, e: Expr) -> tuple[System, str]:
    """The smallest subsystem of the syntactic system containing e.

    States are interned expressions (structural equality); ids are assigned
    in breadth-first discovery order, so they are stable within a run.
    """
    intern: dict[Expr, str] = {e: "s0"}
    order: list[Expr] = [e]
    steps: dict[Expr, MVal] = {}
    queue = deque([e])
    while queue:
        x = queue.popleft()
        m = _step(cfg, x)
        steps[x] = m
        for _, tgt in sorted(supp(m), key=element_sort_key):
            if tgt is not TICK and tgt not in intern:
                intern[tgt] = f"s{len(intern)}"
                order.append(tgt)
                queue.append(tgt)

    def relabel(pair):
        action, tgt = pair
        if tgt is TICK:
            return (action, TICK)
        return (action, State(intern[tgt]))

    states = tuple(intern[x] for x in order)
    beta = {intern[x]: mval_map(relabel, steps[x]) for x in order}
    exprs = {intern[x]: x for x in order}
    return System(cfg, states, beta, root="s0", exprs=exprs), "s0"


# ---------------------------------------------------------------------------
# documents


def _target_doc(tgt: Target) -> str:
    return "✓" if tgt is TICK else tgt.sid


def _mvalue_doc(cfg: TheoryConfig, m: MVal):
    kind = cfg.kind
    if kind == "sl":
        pairs = _sorted_support(m)
        return [[a, _target_doc(t)] for a, t in pairs]
    if kind == "ga":
        return {
            atom: (None if entry is None else [entry[0], _target_doc(entry[1])])
            for atom, entry in zip(cfg.atoms, m.data)
        }
    if kind == "ca":
        return [{"p": str(mass), "a": e[0], "t": _target_doc(e[1])} for e, mass in m.data]
    if kind == "gc":
        return {
            atom: [{"p": str(mass), "a": e[0], "t": _target_doc(e[1])} for e, mass in dist]
            for atom, dist in zip(cfg.atoms, m.data)
        }
    sr = cfg.semiring
    return [{"w": sr.format(w), "a": e[0], "t": _target_doc(e[1])} for e, w in m.data]


def export_system(sys: System) -> dict:
    """The JSON-compatible system document."""
    doc = {
        "theory": sys.cfg.selector(),
        "states": list(sys.states),
    }
    if sys.root is not None:
        doc["root"] = sys.root
    doc["beta"] = {x: _mvalue_doc(sys.cfg, sys.beta[x]) for x in sys.states}
    return doc


def _parse_target(raw, states: set[str]) -> Target:
    if raw == "✓":
        return TICK
    if not isinstance(raw, str) or raw not in states:
        raise DocumentError(f"dangling state reference: {raw!r}")
    return State(raw)


def _parse_pair(raw, states) -> tuple:
    if (not isinstance(raw, (list, tuple)) or len(raw) != 2
            or not isinstance(raw[0], str)):
        raise DocumentError(f"expected [action, target], got {raw!r}")
    return (raw[0], _parse_target(raw[1], states))


def _parse_mvalue(cfg: TheoryConfig, raw, states: set[str]) -> MVal:
    kind = cfg.kind
    if kind == "sl":
        if not isinstance(raw, list):
            raise DocumentError(f"sl value must be a list, got {raw!r}")
        pairs = [_parse_pair(item, states) for item in raw]
        if len(set(pairs)) != len(pairs):
            raise DocumentError("duplicate transition pair")
        return mval_sl(cfg, pairs)
    if kind == "ga":
        if not isinstance(raw, dict) or set(raw) != set(cfg.atoms):
            raise DocumentError(f"ga value must map every atom of {list(cfg.atoms)}")
        return mval_ga(cfg, tuple(
            None if raw[atom] is None else _parse_pair(raw[atom], states)
            for atom in cfg.atoms))
    if kind == "ca":
        return mval_ca(cfg, _parse_dist(raw, states))
    if kind == "gc":
        if not isinstance(raw, dict) or set(raw) != set(cfg.atoms):
            raise DocumentError(f"gc value must map every atom of {list(cfg.atoms)}")
        return mval_gc(cfg, tuple(_parse_dist(raw[atom], states) for atom in cfg.atoms))
    if not isinstance(raw, list):
        raise DocumentError(f"smod value must be a list, got {raw!r}")
    sr = cfg.semiring
    acc = {}
    for item in raw:
        if not isinstance(item, dict) or set(item) != {"w", "a", "t"}:
            raise DocumentError(f"expected {{'w','a','t'}} entry, got {item!r}")
        try:
            w = sr.parse(item["w"])
        except (ValueError, TypeError) as exc:
            raise DocumentError(f"bad weight {item['w']!r}: {exc}") from None
        if w == sr.zero:
            raise DocumentError(f"zero weight present: {item!r}")
        pair = (item["a"], _parse_target(item["t"], states))
        if pair in acc:
            raise DocumentError(f"duplicate weighted pair: {item!r}")
        acc[pair] = w
    return mval_smod(cfg, acc)


def _parse_dist(raw, states) -> dict:
    if not isinstance(raw, list):
        raise DocumentError(f"distribution must be a list, got {raw!r}")
    acc: dict = {}
    total = Fraction(0)
    for item in raw:
        if not isinstance(item, dict) or set(item) != {"p", "a", "t"}:
            raise DocumentError(f"expected {{'p','a','t'}} entry, got {item!r}")
        try:
            mass = Fraction(item["p"])
        except (ValueError, ZeroDivisionError, TypeError):
            raise DocumentError(f"bad probability {item['p']!r}") from None
        if mass <= 0:
            raise DocumentError(f"masses must be positive, got {item!r}")
        pair = (item["a"], _parse_target(item["t"], states))
        if pair in acc:
            raise DocumentError(f"duplicate weighted pair: {item!r}")
        acc[pair] = mass
        total += mass
    if total > 1:
        raise DocumentError(f"total mass {total} exceeds 1")
    return acc


def load_system(doc) -> System:
    """Parse and validate a system document."""
    if not isinstance(doc, dict):
        raise DocumentError("system document must be an object")
    missing = {"theory", "states", "beta"} - set(doc)
    if missing:
        raise DocumentError(f"missing keys: {sorted(missing)}")
    try:
        cfg = parse_selector(doc["theory"])
    except (ValueError, TypeError, AttributeError) as exc:
        raise DocumentError(f"bad theory selector: {exc}") from None
    raw_states = doc["states"]
    if (not isinstance(raw_states, list)
            or not all(isinstance(s, str) and s and s != "✓" for s in raw_states)
            or len(set(raw_states)) != len(raw_states)):
        raise DocumentError("states must be a list of distinct nonempty ids")
    states = tuple(raw_states)
    state_set = set(states)
    raw_beta = doc["beta"]
    if not isinstance(raw_beta, dict) or set(raw_beta) != state_set:
        raise DocumentError("beta must be total on the declared states")
    beta = {x: _parse_mvalue(cfg, raw_beta[x], state_set) for x in states}
    root = doc.get("root")
    if root is not None and root not in state_set:
        raise DocumentError(f"root {root!r} is not a state")
    return System(cfg, states, beta, root=root)


# ---------------------------------------------------------------------------
# DOT rendering


def _dot_quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _edge_label(cfg: TheoryConfig, m: MVal, pair) -> str:
    action, tgt = pair
    kind = cfg.kind
    if kind == "sl":
        return action
    if kind == "ga":
        atoms = [a for a, e in zip(cfg.atoms, m.data) if e == pair]
        return f"{action} [{','.join(atoms)}]"
    if kind == "ca":
        mass = dict(m.data)[pair]
        return f"{action} {mass}"
    if kind == "gc":
        parts = []
        for atom, dist in zip(cfg.atoms, m.data):
            for e, mass in dist:
                if e == pair:
                    parts.append(f"{atom}:{mass}")
        return f"{action} [{','.join(parts)}]"
    return f"{action} w={cfg.semiring.format(dict(m.data)[pair])}"


def export_dot(sys: System) -> str:
    """GraphViz text: one labelled edge per support element; tick drawn as a
    distinguished terminal node."""
    lines = ["digraph system {", "  rankdir=LR;"]
    if sys.root is not None:
        lines.append("  __start [shape=point];")
    has_tick = any(sys.accepts(x) for x in sys.states)
    if has_tick:
        lines.append('  "✓" [shape=doublecircle];')
    for x in sys.states:
        shape = "circle"
        lines.append(f"  {_dot_quote(x)} [shape={shape}];")
    if sys.root is not None:
        lines.append(f"  __start -> {_dot_quote(sys.root)};")
    for x in sys.states:
        m = sys.beta[x]
        for pair in _sorted_support(m):
            label = _edge_label(sys.cfg, m, pair)
            tgt = "✓" if pair[1] is TICK else pair[1].sid
            lines.append(
                f"  {_dot_quote(x)} -> {_dot_quote(tgt)} [label={_dot_quote(label)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def step_doc(cfg: TheoryConfig, m: MVal) -> object:
    """Render a step value with expression targets as printed text."""

    def relabel(pair):
        action, tgt = pair
        if tgt is TICK:
            return (action, TICK)
        return (action, State(print_expr(tgt)))

    return _mvalue_doc(cfg, mval_map(relabel, m))
