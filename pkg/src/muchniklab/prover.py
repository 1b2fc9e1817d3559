"""Syntactic decision procedures.

``decide_ipc`` runs a terminating contraction-free single-succedent sequent
search (the calculus with the four refined implication-left rules, so no
loop checking is needed).  ``decide_logic`` adds truth tables for classical
logic and a two-sided bounded procedure for the weak-excluded-middle logic:
a sound axiom-instance proof attempt on one side and countermodel search
over algebras of directed frames on the other.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from . import budgets
from .budgets import SearchBudget
from .errors import BudgetExceeded
from .formulas import (
    BOT,
    And,
    Const,
    Countermodel,
    Formula,
    Imp,
    Not,
    Or,
    Var,
    find_countermodel,
    is_valid,
    print_formula,
    subformulas,
)
from .lattices import chain, downset_lattice
from .posets import Poset, enumerate_posets


def normalize(phi: Formula) -> Formula:
    """Rewrite negation as implication-to-falsum and verum as bot -> bot."""
    if isinstance(phi, Var):
        return phi
    if isinstance(phi, Const):
        return phi if not phi.value else Imp(BOT, BOT)
    if isinstance(phi, Not):
        return Imp(normalize(phi.sub), BOT)
    if isinstance(phi, And):
        return And(normalize(phi.left), normalize(phi.right))
    if isinstance(phi, Or):
        return Or(normalize(phi.left), normalize(phi.right))
    if isinstance(phi, Imp):
        return Imp(normalize(phi.left), normalize(phi.right))
    raise TypeError(f"not a formula: {phi!r}")


@dataclass
class ProofNode:
    rule: str
    antecedent: tuple[Formula, ...]
    goal: Formula
    principal: Optional[Formula]
    premises: list["ProofNode"] = field(default_factory=list)

    def flatten(self) -> list[dict]:
        """Pre-order list of rule applications for the trace format."""
        out = []

        def walk(node: "ProofNode") -> None:
            out.append(
                {
                    "rule": node.rule,
                    "sequent_before": _sequent_json(node.antecedent, node.goal),
                    "sequent_after": [
                        _sequent_json(p.antecedent, p.goal) for p in node.premises
                    ],
                    "principal": (
                        print_formula(node.principal) if node.principal else None
                    ),
                }
            )
            for p in node.premises:
                walk(p)

        walk(self)
        return out


def _sequent_json(antecedent, goal) -> dict:
    return {
        "antecedent": sorted(print_formula(f) for f in antecedent),
        "goal": print_formula(goal),
    }


def _sorted_members(gamma: frozenset) -> list[Formula]:
    return sorted(gamma, key=print_formula)


def prove(gamma: frozenset, goal: Formula, _memo=None) -> Optional[ProofNode]:
    """Proof search; returns a replayable tree or None."""
    if _memo is None:
        _memo = {}
    key = (gamma, goal)
    if key in _memo:
        return _memo[key]
    _memo[key] = None  # defensive; the calculus cannot revisit a sequent
    node = _prove(gamma, goal, _memo)
    _memo[key] = node
    return node


def _mk(rule, gamma, goal, principal, premises) -> ProofNode:
    return ProofNode(rule, tuple(_sorted_members(gamma)), goal, principal, premises)


def _prove(gamma: frozenset, goal: Formula, memo) -> Optional[ProofNode]:
    if BOT in gamma:
        return _mk("L-bot", gamma, goal, BOT, [])
    if isinstance(goal, Var) and goal in gamma:
        return _mk("axiom", gamma, goal, goal, [])

    # invertible left rules, first match in deterministic order
    for f in _sorted_members(gamma):
        rest = gamma - {f}
        if isinstance(f, And):
            sub = prove(rest | {f.left, f.right}, goal, memo)
            return _mk("L-and", gamma, goal, f, [sub]) if sub else None
        if isinstance(f, Or):
            left = prove(rest | {f.left}, goal, memo)
            if left is None:
                return None
            right = prove(rest | {f.right}, goal, memo)
            if right is None:
                return None
            return _mk("L-or", gamma, goal, f, [left, right])
        if isinstance(f, Imp):
            a = f.left
            if isinstance(a, Const) and not a.value:
                sub = prove(rest, goal, memo)
                return _mk("L-imp-bot", gamma, goal, f, [sub]) if sub else None
            if isinstance(a, And):
                repl = Imp(a.left, Imp(a.right, f.right))
                sub = prove(rest | {repl}, goal, memo)
                return _mk("L-imp-and", gamma, goal, f, [sub]) if sub else None
            if isinstance(a, Or):
                repl = {Imp(a.left, f.right), Imp(a.right, f.right)}
                sub = prove(rest | repl, goal, memo)
                return _mk("L-imp-or", gamma, goal, f, [sub]) if sub else None
            if isinstance(a, Var) and a in gamma:
                sub = prove(rest | {f.right}, goal, memo)
                return _mk("L-imp-atom", gamma, goal, f, [sub]) if sub else None

    # invertible right rules
    if isinstance(goal, Imp):
        sub = prove(gamma | {goal.left}, goal.right, memo)
        return _mk("R-imp", gamma, goal, goal, [sub]) if sub else None
    if isinstance(goal, And):
        left = prove(gamma, goal.left, memo)
        if left is None:
            return None
        right = prove(gamma, goal.right, memo)
        if right is None:
            return None
        return _mk("R-and", gamma, goal, goal, [left, right])

    # choice points
    if isinstance(goal, Or):
        sub = prove(gamma, goal.left, memo)
        if sub:
            return _mk("R-or-left", gamma, goal, goal, [sub])
        sub = prove(gamma, goal.right, memo)
        if sub:
            return _mk("R-or-right", gamma, goal, goal, [sub])
    for f in _sorted_members(gamma):
        if isinstance(f, Imp) and isinstance(f.left, Imp):
            rest = gamma - {f}
            inner = f.left
            left = prove(rest | {Imp(inner.right, f.right)}, inner, memo)
            if left is None:
                continue
            right = prove(rest | {f.right}, goal, memo)
            if right is None:
                continue
            return _mk("L-imp-imp", gamma, goal, f, [left, right])
    return None


_RULES_LEFT = {
    "L-and", "L-or", "L-imp-bot", "L-imp-and", "L-imp-or", "L-imp-atom", "L-imp-imp",
}


def replay_trace(node: ProofNode) -> bool:
    """Re-check every rule application against its schema; raises on mismatch."""
    gamma = frozenset(node.antecedent)
    goal = node.goal
    f = node.principal

    def expect(premises: list[tuple[frozenset, Formula]]) -> bool:
        got = [(frozenset(p.antecedent), p.goal) for p in node.premises]
        if got != premises:
            raise AssertionError(f"rule {node.rule} premises do not match schema")
        return all(replay_trace(p) for p in node.premises)

    if node.rule == "L-bot":
        if BOT not in gamma or node.premises:
            raise AssertionError("L-bot needs falsum in the antecedent")
        return True
    if node.rule == "axiom":
        if goal not in gamma or not isinstance(goal, Var) or node.premises:
            raise AssertionError("axiom needs the atomic goal in the antecedent")
        return True
    if node.rule in _RULES_LEFT and (f is None or f not in gamma):
        raise AssertionError(f"rule {node.rule} principal formula missing")
    rest = gamma - {f} if f is not None else gamma
    if node.rule == "L-and":
        return expect([(rest | {f.left, f.right}, goal)])
    if node.rule == "L-or":
        return expect([(rest | {f.left}, goal), (rest | {f.right}, goal)])
    if node.rule == "L-imp-bot":
        if not (isinstance(f, Imp) and f.left == BOT):
            raise AssertionError("L-imp-bot principal must be bot -> C")
        return expect([(rest, goal)])
    if node.rule == "L-imp-and":
        a = f.left
        return expect([(rest | {Imp(a.left, Imp(a.right, f.right))}, goal)])
    if node.rule == "L-imp-or":
        a = f.left
        return expect(
            [(rest | {Imp(a.left, f.right), Imp(a.right, f.right)}, goal)]
        )
    if node.rule == "L-imp-atom":
        if not (isinstance(f, Imp) and isinstance(f.left, Var) and f.left in gamma):
            raise AssertionError("L-imp-atom needs the atom present")
        return expect([(rest | {f.right}, goal)])
    if node.rule == "L-imp-imp":
        inner = f.left
        if not (isinstance(f, Imp) and isinstance(inner, Imp)):
            raise AssertionError("L-imp-imp principal must be (A -> B) -> C")
        return expect(
            [
                (rest | {Imp(inner.right, f.right)}, inner),
                (rest | {f.right}, goal),
            ]
        )
    if node.rule == "R-imp":
        return expect([(gamma | {goal.left}, goal.right)])
    if node.rule == "R-and":
        return expect([(gamma, goal.left), (gamma, goal.right)])
    if node.rule == "R-or-left":
        return expect([(gamma, goal.left)])
    if node.rule == "R-or-right":
        return expect([(gamma, goal.right)])
    raise AssertionError(f"unknown rule {node.rule}")


@dataclass
class Decision:
    verdict: str  # valid | invalid | unknown
    trace: Optional[ProofNode] = None
    countermodel: Optional[Countermodel] = None
    detail: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out: dict = {"verdict": self.verdict, **self.detail}
        if self.trace is not None:
            out["proof"] = self.trace.flatten()
        if self.countermodel is not None:
            out["countermodel"] = self.countermodel.describe()
        return out


def decide_ipc(
    phi: Formula,
    attach_countermodel: bool = True,
    budget: Optional[SearchBudget] = None,
    threads: int = 1,
) -> Decision:
    """Total decision for intuitionistic validity.

    Valid verdicts carry a replayable proof tree; invalid verdicts carry a
    finite algebra countermodel found by the semantic search.  When the
    countermodel search exhausts its family, BudgetExceeded is raised with
    the (still sound) verdict attached.
    """
    proof = prove(frozenset(), normalize(phi))
    if proof is not None:
        return Decision("valid", trace=proof)
    if not attach_countermodel:
        return Decision("invalid")
    cm = find_countermodel(phi, "heyting", budget, threads)
    if cm is None:
        raise BudgetExceeded(
            "countermodel family exhausted for an unprovable formula",
            partial_verdict="invalid",
        )
    return Decision("invalid", countermodel=cm)


def wlem_instance(alpha: Formula) -> Formula:
    return Or(Not(alpha), Not(Not(alpha)))


def directed_posets(npts: int) -> tuple[Poset, ...]:
    """Posets with a greatest element, derived from all posets one point smaller."""
    if npts < 1:
        return ()
    out = []
    labels = [f"p{i}" for i in range(npts - 1)] + ["t"]
    for base in enumerate_posets(npts - 1):
        top_bit = 1 << (npts - 1)
        rows = [u | top_bit for u in base.up] + [top_bit]
        out.append(Poset(labels, rows))
    return tuple(out)


def _kc_refute(
    phi: Formula, lo: int, hi: int, max_valuations: int, threads: int
) -> Optional[Countermodel]:
    """Brouwer-semantics search over downset algebras of directed frames.

    Truth-as-bottom over downsets of a poset with a greatest element matches
    the usual reading over the upsets of the frame, so every member validates
    the weak excluded middle and refutations are sound for this logic.
    """
    from .formulas import variables

    kvars = len(variables(phi))
    for npts in range(lo, hi + 1):
        for p in directed_posets(npts):
            lat = downset_lattice(p)
            if lat.n**kvars > max_valuations:
                continue
            res = is_valid(phi, lat, "brouwer", max_valuations, threads)
            if res.status == "invalid":
                return Countermodel(
                    "directed-frame", None, p, lat, res.witness, res.value
                )
    return None


def decide_logic(
    phi: Formula,
    logic: str,
    kc_points: int = 8,
    budget: Optional[SearchBudget] = None,
    threads: int = 1,
    attach_countermodel: bool = True,
) -> Decision:
    """Decide membership in IPC, KC, or CPC.

    The KC procedure is two-sided: a proof of (conjoined weak-excluded-middle
    instances over the subformulas) -> phi yields ``valid``; a countermodel on
    a directed frame within the size bound yields ``invalid``; otherwise the
    verdict is ``unknown``.
    """
    logic = logic.upper()
    if logic == "IPC":
        return decide_ipc(phi, attach_countermodel, budget, threads)
    if logic == "CPC":
        res = is_valid(phi, chain(2), "heyting", threads=threads)
        if res.ok:
            return Decision("valid", detail={"method": "truth-table"})
        cm = Countermodel("tower", 1, None, chain(2), res.witness, res.value)
        return Decision("invalid", countermodel=cm, detail={"method": "truth-table"})
    if logic != "KC":
        raise ValueError(f"logic must be IPC, KC or CPC, got {logic!r}")

    max_val = (budget or budgets.DEFAULT_SEARCH_BUDGET).max_valuations
    ipc = decide_ipc(phi, attach_countermodel=False)
    if ipc.verdict == "valid":
        return Decision("valid", trace=ipc.trace, detail={"method": "ipc-proof"})
    quick = min(5, kc_points)
    cm = _kc_refute(phi, 1, quick, max_val, threads)
    if cm is not None:
        return Decision("invalid", countermodel=cm)
    instances = [wlem_instance(a) for a in subformulas(phi)]
    instances.sort(key=print_formula)
    hyp = instances[0]
    for inst in instances[1:]:
        hyp = And(hyp, inst)
    proof = prove(frozenset(), normalize(Imp(hyp, phi)))
    if proof is not None:
        return Decision(
            "valid", trace=proof, detail={"method": "wlem-instances"}
        )
    if kc_points > quick:
        cm = _kc_refute(phi, quick + 1, kc_points, max_val, threads)
        if cm is not None:
            return Decision("invalid", countermodel=cm)
    return Decision(
        "unknown",
        detail={
            "method": "exhausted",
            "kc_points": kc_points,
            "instances_tried": len(instances),
        },
    )
