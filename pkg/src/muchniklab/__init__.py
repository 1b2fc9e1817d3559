"""Workbench for finite Brouwer/Heyting algebras, intermediate propositional
logics, and a finite-poset simulation of the Muchnik lattice."""

from .budgets import SearchBudget
from .errors import (
    AmbientMismatch,
    BudgetExceeded,
    CycleError,
    EmptyInterval,
    FormulaSyntaxError,
    MuchnikLabError,
    NoJoinTable,
    NotALatticeError,
    NotDistributiveError,
    PolicyUnsatisfiable,
    SizeBudgetExceeded,
    UnboundVariable,
    UnknownLabel,
    ValuationBudgetExceeded,
)
from .formulas import (
    Countermodel,
    Formula,
    ValidityResult,
    eval_brouwer,
    eval_heyting,
    find_countermodel,
    generate_corpus,
    is_valid,
    load_corpus,
    named_formulas,
    parse,
    print_formula,
)
from .lattices import (
    DistLattice,
    LatticeMap,
    chain,
    downset_lattice,
    dual,
    explicit_lattice,
    interval,
    is_brouwer_homomorphism,
    join_irreducibles,
    lattice_isomorphic,
    meet_slice_map,
    power,
    principal_quotient,
    product,
    stack_sum,
)
from .muchnik import (
    Construction,
    DegreeInterval,
    DegreePoset,
    MassProblem,
    SimDegree,
    build_master_poset,
    construction_from_json,
    degree_interval,
    degree_join,
    degree_meet,
    degree_of,
    muchnik_arrow,
    muchnik_leq,
    solvability_successor,
    verify_construction,
)
from .posets import (
    Poset,
    enumerate_posets,
    make_poset,
    poset_from_json,
    poset_isomorphic,
)
from .prover import Decision, decide_ipc, decide_logic, prove, replay_trace
from .structure import (
    StructureReport,
    analyze,
    is_dd_like,
    is_initial_segment_embeddable,
    is_interval_embeddable,
    is_weakly_projective,
)
from .tower import TowerLevel, describe_element, jaskowski_algebra, tower_size

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
