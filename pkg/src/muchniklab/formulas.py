"""Propositional formulas: parsing, printing, algebra semantics, validity.

Connectives are evaluated over a finite distributive lattice in one of two
readings:

* ``brouwer``: disjunction is lattice meet, conjunction is join, the arrow
  is the Brouwer arrow, negation is ``a -> 1``; a formula is true when it
  evaluates to the bottom element everywhere.
* ``heyting``: the usual reading (conjunction meet, disjunction join,
  Heyting arrow); true means top everywhere.

The two are mutually dual: the Heyting value in L equals the Brouwer value
in dual(L), element for element.
"""

from __future__ import annotations

import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from . import budgets
from .budgets import SearchBudget
from .errors import (
    FormulaSyntaxError,
    UnboundVariable,
    ValuationBudgetExceeded,
)
from .lattices import DistLattice, downset_lattice
from .posets import Poset, enumerate_posets


class Formula:
    """Base class of the propositional AST."""

    __slots__ = ()

    def __str__(self) -> str:
        return print_formula(self)


@dataclass(frozen=True)
class Var(Formula):
    name: str


@dataclass(frozen=True)
class Const(Formula):
    value: bool  # True is verum, False is falsum


@dataclass(frozen=True)
class Not(Formula):
    sub: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Imp(Formula):
    left: Formula
    right: Formula


BOT = Const(False)
TOP = Const(True)


def variables(phi: Formula) -> list[str]:
    """Variable names, sorted."""
    out: set[str] = set()

    def walk(f: Formula) -> None:
        if isinstance(f, Var):
            out.add(f.name)
        elif isinstance(f, Not):
            walk(f.sub)
        elif isinstance(f, (And, Or, Imp)):
            walk(f.left)
            walk(f.right)

    walk(phi)
    return sorted(out)


def subformulas(phi: Formula) -> list[Formula]:
    """All subformulas, deduplicated, in postorder."""
    seen: dict[Formula, None] = {}

    def walk(f: Formula) -> None:
        if f in seen:
            return
        if isinstance(f, Not):
            walk(f.sub)
        elif isinstance(f, (And, Or, Imp)):
            walk(f.left)
            walk(f.right)
        seen[f] = None

    walk(phi)
    return list(seen)


def is_positive(phi: Formula) -> bool:
    """True when the formula avoids negation and falsum."""
    return not any(
        isinstance(f, Not) or f == BOT for f in subformulas(phi)
    )


# -- parser ---------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<imp>->|→)|(?P<and>[&∧])|(?P<or>[|∨])"
    r"|(?P<not>[~¬])|(?P<lp>\()|(?P<rp>\))"
    r"|(?P<bot>bot\b|⊥)|(?P<top>top\b|⊤)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            rest = text[pos:].lstrip()
            if not rest:
                break
            at = len(text) - len(rest)
            raise FormulaSyntaxError(f"unexpected character {rest[0]!r}", at)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text: str, paper_signature: bool):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0
        self.paper_signature = paper_signature

    def peek(self) -> Optional[tuple[str, str, int]]:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self) -> tuple[str, str, int]:
        tok = self.peek()
        if tok is None:
            raise FormulaSyntaxError("unexpected end of input", len(self.text))
        self.pos += 1
        return tok

    def parse(self) -> Formula:
        phi = self.imp()
        tok = self.peek()
        if tok is not None:
            raise FormulaSyntaxError(f"unexpected token {tok[1]!r}", tok[2])
        return phi

    def imp(self) -> Formula:
        left = self.disj()
        tok = self.peek()
        if tok and tok[0] == "imp":
            self.next()
            return Imp(left, self.imp())
        return left

    def disj(self) -> Formula:
        out = self.conj()
        while True:
            tok = self.peek()
            if tok and tok[0] == "or":
                self.next()
                out = Or(out, self.conj())
            else:
                return out

    def conj(self) -> Formula:
        out = self.neg()
        while True:
            tok = self.peek()
            if tok and tok[0] == "and":
                self.next()
                out = And(out, self.neg())
            else:
                return out

    def neg(self) -> Formula:
        tok = self.peek()
        if tok and tok[0] == "not":
            self.next()
            return Not(self.neg())
        return self.atom()

    def atom(self) -> Formula:
        tok = self.next()
        kind, text, at = tok
        if kind == "ident":
            return Var(text)
        if kind in ("bot", "top"):
            if self.paper_signature:
                raise FormulaSyntaxError(
                    f"constant {text!r} rejected under the restricted signature", at
                )
            return BOT if kind == "bot" else TOP
        if kind == "lp":
            phi = self.imp()
            closing = self.next()
            if closing[0] != "rp":
                raise FormulaSyntaxError("expected ')'", closing[2])
            return phi
        raise FormulaSyntaxError(f"unexpected token {text!r}", at)


def parse(text: str, paper_signature: bool = False) -> Formula:
    """Parse formula text; precedence ~ > & > | > ->, arrow right-associative."""
    return _Parser(text, paper_signature).parse()


def print_formula(phi: Formula) -> str:
    """Minimal-parenthesis printer; round-trips with parse."""

    def go(f: Formula, level: int) -> str:
        if isinstance(f, Var):
            return f.name
        if isinstance(f, Const):
            return "top" if f.value else "bot"
        if isinstance(f, Not):
            return "~" + go(f.sub, 4)
        if isinstance(f, And):
            s = f"{go(f.left, 3)} & {go(f.right, 4)}"
            return f"({s})" if level > 3 else s
        if isinstance(f, Or):
            s = f"{go(f.left, 2)} | {go(f.right, 3)}"
            return f"({s})" if level > 2 else s
        if isinstance(f, Imp):
            s = f"{go(f.left, 2)} -> {go(f.right, 1)}"
            return f"({s})" if level > 1 else s
        raise TypeError(f"not a formula: {f!r}")

    return go(phi, 1)


# -- evaluation -----------------------------------------------------------

_SEMANTICS = ("brouwer", "heyting")


def _ops_for(lat: DistLattice, semantics: str):
    if semantics == "brouwer":
        return {
            "and": lat.join,
            "or": lat.meet,
            "imp": lat.brouwer_arrow,
            "neg": lat.brouwer_neg,
            "bot": lat.top,
            "top": lat.bot,
            "truth": lat.bot,
        }
    if semantics == "heyting":
        return {
            "and": lat.meet,
            "or": lat.join,
            "imp": lat.heyting_arrow,
            "neg": lat.heyting_neg,
            "bot": lat.bot,
            "top": lat.top,
            "truth": lat.top,
        }
    raise ValueError(f"semantics must be one of {_SEMANTICS}, got {semantics!r}")


def evaluate(
    phi: Formula, lat: DistLattice, valuation: dict[str, int], semantics: str
) -> int:
    """Value of the formula polynomial at one valuation (element index)."""
    ops = _ops_for(lat, semantics)

    def go(f: Formula) -> int:
        if isinstance(f, Var):
            try:
                return valuation[f.name]
            except KeyError:
                raise UnboundVariable(f"no value for variable {f.name!r}") from None
        if isinstance(f, Const):
            return ops["top"] if f.value else ops["bot"]
        if isinstance(f, Not):
            return ops["neg"](go(f.sub))
        if isinstance(f, And):
            return ops["and"](go(f.left), go(f.right))
        if isinstance(f, Or):
            return ops["or"](go(f.left), go(f.right))
        if isinstance(f, Imp):
            return ops["imp"](go(f.left), go(f.right))
        raise TypeError(f"not a formula: {f!r}")

    return go(phi)


def eval_brouwer(phi: Formula, lat: DistLattice, valuation: dict[str, int]) -> int:
    return evaluate(phi, lat, valuation, "brouwer")


def eval_heyting(phi: Formula, lat: DistLattice, valuation: dict[str, int]) -> int:
    return evaluate(phi, lat, valuation, "heyting")


@dataclass(frozen=True)
class ValidityResult:
    status: str  # valid | invalid | unknown
    witness: Optional[dict[str, int]] = None
    value: Optional[int] = None
    checked: int = 0

    @property
    def ok(self) -> bool:
        return self.status == "valid"


# compiled node: (kind, payload); postorder program with explicit operand slots
def _compile(phi: Formula, varpos: dict[str, int]):
    prog: list[tuple] = []
    slot_of: dict[Formula, int] = {}
    varsets: list[tuple[int, ...]] = []

    def walk(f: Formula) -> int:
        if f in slot_of:
            return slot_of[f]
        if isinstance(f, Var):
            prog.append(("var", varpos[f.name], None))
            vs: tuple[int, ...] = (varpos[f.name],)
        elif isinstance(f, Const):
            prog.append(("const", f.value, None))
            vs = ()
        elif isinstance(f, Not):
            s = walk(f.sub)
            prog.append(("neg", s, None))
            vs = varsets[s]
        else:
            li = walk(f.left)
            ri = walk(f.right)
            kind = {And: "and", Or: "or", Imp: "imp"}[type(f)]
            prog.append((kind, li, ri))
            vs = tuple(sorted(set(varsets[li]) | set(varsets[ri])))
        slot = len(prog) - 1
        slot_of[f] = slot
        varsets.append(vs)
        return slot

    walk(phi)
    return prog, varsets


def _tables_for(lat: DistLattice, semantics: str):
    t = lat.tables()
    if semantics == "brouwer":
        return {
            "and": t["join"],
            "or": t["meet"],
            "imp": t["brouwer_arrow"],
            "bot": lat.top,
            "top": lat.bot,
            "truth": lat.bot,
            "negtarget": lat.top,
        }
    return {
        "and": t["meet"],
        "or": t["join"],
        "imp": t["heyting_arrow"],
        "bot": lat.bot,
        "top": lat.top,
        "truth": lat.top,
        "negtarget": lat.bot,
    }


def _eval_chunk(prog, tabs, n_elems, kvars, start, stop):
    idx = np.arange(start, stop, dtype=np.int64)
    digits = []
    for k in range(kvars):
        scale = n_elems ** (kvars - 1 - k)
        digits.append((idx // scale) % n_elems)
    slots: list[np.ndarray] = []
    imp = tabs["imp"]
    for kind, a, b in prog:
        if kind == "var":
            slots.append(digits[a])
        elif kind == "const":
            val = tabs["top"] if a else tabs["bot"]
            slots.append(np.full(stop - start, val, dtype=np.int64))
        elif kind == "neg":
            slots.append(imp[slots[a], tabs["negtarget"]])
        else:
            slots.append(tabs[kind][slots[a], slots[b]])
    return slots[-1], digits


def is_valid(
    phi: Formula,
    lat: DistLattice,
    semantics: str = "heyting",
    max_valuations: Optional[int] = None,
    threads: int = 1,
    sample: Optional[int] = None,
    seed: int = 0,
) -> ValidityResult:
    """Exhaustively check the formula over all valuations.

    The witness, when one exists, is the first counter-valuation in
    lexicographic element order over name-sorted variables (independent of
    the thread count).  With ``sample`` set the check draws that many
    valuations instead and can only answer ``invalid`` or ``unknown``.
    """
    names = variables(phi)
    kvars = len(names)
    n = lat.n
    total = n**kvars
    if max_valuations is None:
        max_valuations = budgets.MAX_VALUATIONS
    varpos = {name: k for k, name in enumerate(names)}
    if sample is not None and total > max_valuations:
        rng = np.random.default_rng(seed)
        ops = _ops_for(lat, semantics)
        for _ in range(sample):
            valuation = {name: int(rng.integers(n)) for name in names}
            v = evaluate(phi, lat, valuation, semantics)
            if v != ops["truth"]:
                return ValidityResult("invalid", valuation, v, sample)
        return ValidityResult("unknown", checked=sample)
    if total > max_valuations:
        raise ValuationBudgetExceeded(
            f"{total} valuations exceed budget {max_valuations}"
        )
    if kvars == 0:
        ops = _ops_for(lat, semantics)
        v = evaluate(phi, lat, {}, semantics)
        if v != ops["truth"]:
            return ValidityResult("invalid", {}, v, 1)
        return ValidityResult("valid", checked=1)

    if total <= 64 or lat.n > budgets.MAX_TABLE:
        return _is_valid_scalar(phi, lat, semantics, names, total)

    prog, _ = _compile(phi, varpos)
    tabs = _tables_for(lat, semantics)
    truth = tabs["truth"]
    chunk = 1 << 18

    def scan(start: int, stop: int) -> Optional[tuple[int, int]]:
        vals, _ = _eval_chunk(prog, tabs, n, kvars, start, stop)
        bad = vals != truth
        if bad.any():
            off = int(np.argmax(bad))
            return start + off, int(vals[off])
        return None

    hit: Optional[tuple[int, int]] = None
    starts = list(range(0, total, chunk))
    if threads <= 1:
        for s in starts:
            hit = scan(s, min(s + chunk, total))
            if hit:
                break
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for wave_at in range(0, len(starts), threads):
                wave = starts[wave_at : wave_at + threads]
                results = list(
                    pool.map(lambda s: scan(s, min(s + chunk, total)), wave)
                )
                found = [r for r in results if r is not None]
                if found:
                    hit = min(found)
                    break
    if hit is None:
        return ValidityResult("valid", checked=total)
    flat, value = hit
    witness = {}
    for k, name in enumerate(names):
        scale = n ** (kvars - 1 - k)
        witness[name] = (flat // scale) % n
    return ValidityResult("invalid", witness, value, flat + 1)


def _is_valid_scalar(phi, lat, semantics, names, total):
    ops = _ops_for(lat, semantics)
    n = lat.n
    kvars = len(names)
    varpos = {name: k for k, name in enumerate(names)}
    prog, varsets = _compile(phi, varpos)
    # cache per subformula on the values of its own variables; skip nodes
    # whose key space would dwarf the lattice
    cacheable = [n ** len(varsets[si]) <= (1 << 16) for si in range(len(prog))]
    memo: list[dict] = [dict() for _ in prog]
    truth = ops["truth"]
    for flat in range(total):
        digits = []
        for k in range(kvars):
            scale = n ** (kvars - 1 - k)
            digits.append((flat // scale) % n)
        slots = []
        for si, (kind, a, b) in enumerate(prog):
            key = tuple(digits[k] for k in varsets[si]) if cacheable[si] else None
            cached = memo[si].get(key) if key is not None else None
            if cached is None:
                if kind == "var":
                    cached = digits[a]
                elif kind == "const":
                    cached = ops["top"] if a else ops["bot"]
                elif kind == "neg":
                    cached = ops["neg"](slots[a])
                else:
                    cached = ops[kind](slots[a], slots[b])
                if key is not None:
                    memo[si][key] = cached
            slots.append(cached)
        if slots[-1] != truth:
            witness = {name: digits[k] for k, name in enumerate(names)}
            return ValidityResult("invalid", witness, slots[-1], flat + 1)
    return ValidityResult("valid", checked=total)


def batch_validity(
    lat: DistLattice,
    formulas: Sequence[Formula],
    semantics: str = "heyting",
    max_valuations: Optional[int] = None,
    chunk: int = 1 << 15,
) -> dict[Formula, ValidityResult]:
    """Exhaustive validity for many formulas over one algebra.

    Shares subformula value arrays across the batch (the corpus is closed
    under subformulas, so each formula costs one table operation per chunk).
    Witnesses are the same lexicographically-first counter-valuations that
    ``is_valid`` reports.  Formulas whose valuation grid exceeds the budget
    come back ``unknown``.
    """
    if max_valuations is None:
        max_valuations = budgets.MAX_VALUATIONS
    out: dict[Formula, ValidityResult] = {}
    groups: dict[tuple, list[Formula]] = {}
    for phi in formulas:
        if phi in out:
            continue
        groups.setdefault(tuple(variables(phi)), []).append(phi)
        out[phi] = None  # type: ignore[assignment]
    n = lat.n
    tabs = _tables_for(lat, semantics)
    for names, phis in groups.items():
        kvars = len(names)
        total = n**kvars
        if total > max_valuations:
            for phi in phis:
                out[phi] = ValidityResult("unknown")
            continue
        varpos = {name: k for k, name in enumerate(names)}
        state: dict[Formula, list] = {phi: [True, None, None] for phi in phis}
        open_phis = list(state)
        start = 0
        while start < total and open_phis:
            stop = min(start + chunk, total)
            _batch_scan(lat, tabs, open_phis, state, varpos, n, kvars, start, stop)
            # settled formulas drop out; later chunks only evaluate survivors
            open_phis = [phi for phi in open_phis if state[phi][0]]
            start = stop
        for phi in phis:
            ok, flat, value = state[phi]
            if ok:
                out[phi] = ValidityResult("valid", checked=total)
            else:
                witness = {}
                for k, name in enumerate(names):
                    scale = n ** (kvars - 1 - k)
                    witness[name] = (flat // scale) % n
                out[phi] = ValidityResult("invalid", witness, value, flat + 1)
    return out


def _batch_scan(lat, tabs, phis, state, varpos, n, kvars, start, stop):
    """One chunk of the shared-subformula batch scan."""
    nodes: dict[Formula, int] = {}
    prog: list[tuple] = []
    parents: list[int] = []

    def slot(f: Formula) -> int:
        got = nodes.get(f)
        if got is not None:
            parents[got] += 1
            return got
        if isinstance(f, Var):
            prog.append(("var", varpos[f.name], None))
        elif isinstance(f, Const):
            prog.append(("const", f.value, None))
        elif isinstance(f, Not):
            prog.append(("neg", slot(f.sub), None))
        else:
            kind = {And: "and", Or: "or", Imp: "imp"}[type(f)]
            prog.append((kind, slot(f.left), slot(f.right)))
        nodes[f] = idx = len(prog) - 1
        parents.append(1)
        return idx

    target_refs: dict[int, list] = {}
    for phi in phis:
        target_refs.setdefault(slot(phi), []).append(state[phi])
    idx64 = np.arange(start, stop, dtype=np.int64)
    digits = []
    for k in range(kvars):
        scale = n ** (kvars - 1 - k)
        digits.append(((idx64 // scale) % n).astype(np.int32))
    live = [0] * len(prog)
    arrays: list[Optional[np.ndarray]] = [None] * len(prog)

    def release(i: int) -> None:
        live[i] -= 1
        if live[i] == 0:
            arrays[i] = None

    truth = tabs["truth"]
    imp = tabs["imp"]
    for i, (kind, a, b) in enumerate(prog):
        if kind == "var":
            arr = digits[a]
        elif kind == "const":
            val = tabs["top"] if a else tabs["bot"]
            arr = np.full(stop - start, val, dtype=np.int32)
        elif kind == "neg":
            arr = imp[arrays[a], tabs["negtarget"]]
            release(a)
        else:
            arr = tabs[kind][arrays[a], arrays[b]]
            release(a)
            release(b)
        arrays[i] = arr
        live[i] = parents[i]
        refs = target_refs.get(i)
        if refs:
            bad = arr != truth
            hit = bad.any()
            for st in refs:
                if hit and st[0]:
                    off = int(np.argmax(bad))
                    st[0] = False
                    st[1] = start + off
                    st[2] = int(arr[off])
                release(i)


# -- countermodel search ----------------------------------------------------


@dataclass(frozen=True)
class Countermodel:
    """A family member refuting a formula, with the refuting valuation."""

    kind: str  # tower | poset
    level: Optional[int]
    poset: Optional[Poset]
    algebra: DistLattice
    witness: dict[str, int]
    value: int

    def describe(self) -> dict:
        out: dict = {"kind": self.kind, "witness": dict(self.witness)}
        if self.kind == "tower":
            out["level"] = self.level
        else:
            out["poset"] = self.poset.to_json()
        out["algebra_size"] = self.algebra.n
        return out


def countermodel_family(budget: SearchBudget) -> Iterable[tuple[str, object]]:
    """Deterministic search order: tower levels, then posets by size."""
    from .tower import jaskowski_algebra

    for level in range(1, budget.tower_max_level + 1):
        yield "tower", (level, jaskowski_algebra(level).algebra)
    count = 0
    for npts in range(1, budget.max_poset_points + 1):
        for p in enumerate_posets(npts):
            count += 1
            if count > budget.max_posets:
                return
            yield "poset", (count, p)


def find_countermodel(
    phi: Formula,
    semantics: str = "heyting",
    budget: Optional[SearchBudget] = None,
    threads: int = 1,
) -> Optional[Countermodel]:
    """First refuting member of the tower-then-posets family, or None.

    Members whose valuation grid would blow the budget are skipped, so an
    absent result means exhaustion, never validity.
    """
    if budget is None:
        budget = budgets.DEFAULT_SEARCH_BUDGET
    kvars = len(variables(phi))
    for kind, payload in countermodel_family(budget):
        if kind == "tower":
            level, lat = payload
            p = None
        else:
            _, p = payload
            lat = downset_lattice(p)
        if lat.n > budget.max_elements:
            continue
        if lat.n**kvars > budget.max_valuations:
            continue
        res = is_valid(
            phi, lat, semantics, max_valuations=budget.max_valuations, threads=threads
        )
        if res.status == "invalid":
            return Countermodel(kind, level if kind == "tower" else None, p, lat,
                                res.witness, res.value)
    return None


# -- corpus -------------------------------------------------------------------


def generate_corpus(
    max_connectives: int = 4, variable_names: Sequence[str] = ("p", "q")
) -> list[Formula]:
    """All formulas over the given variables with at most ``max_connectives``
    connective occurrences, one representative per commutative symmetry
    class of conjunction/disjunction arguments.  Sorted by (size, text).
    """
    layers: list[list[Formula]] = [[Var(v) for v in variable_names]]
    keys: dict[Formula, str] = {f: print_formula(f) for f in layers[0]}

    def remember(f: Formula) -> Formula:
        if f not in keys:
            keys[f] = print_formula(f)
        return f

    for c in range(1, max_connectives + 1):
        layer: list[Formula] = []
        for f in layers[c - 1]:
            layer.append(remember(Not(f)))
        for i in range(c):
            j = c - 1 - i
            for lf in layers[i]:
                for rf in layers[j]:
                    layer.append(remember(Imp(lf, rf)))
            if i > j:
                continue
            for li, lf in enumerate(layers[i]):
                rs = layers[j][li:] if i == j else layers[j]
                for rf in rs:
                    a, b = (lf, rf) if keys[lf] <= keys[rf] else (rf, lf)
                    layer.append(remember(And(a, b)))
                    layer.append(remember(Or(a, b)))
        layer.sort(key=keys.__getitem__)
        layers.append(layer)
    out = []
    for layer in layers:
        out.extend(sorted(layer, key=keys.__getitem__))
    return out


def named_formulas() -> dict[str, Formula]:
    """Benchmark schemata used throughout the test corpus."""
    return {
        "lem": parse("p | ~p"),
        "wlem": parse("~p | ~~p"),
        "peirce": parse("((p -> q) -> p) -> p"),
        "dne": parse("~~p -> p"),
        "dummett": parse("(p -> q) | (q -> p)"),
        "kreisel_putnam": parse("(~p -> q | r) -> ((~p -> q) | (~p -> r))"),
    }


def load_corpus(path: str) -> list[Formula]:
    """One formula per line; blank lines and '#' comments ignored."""
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                out.append(parse(line))
    return out
