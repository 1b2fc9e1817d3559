"""Exception types shared across the package."""


class MuchnikLabError(Exception):
    """Base class for all errors raised by this package."""


class CycleError(MuchnikLabError):
    """The declared order relation has a cycle (antisymmetry fails)."""


class UnknownLabel(MuchnikLabError):
    """A relation pair or subset mentions an undeclared point."""


class SizeBudgetExceeded(MuchnikLabError):
    """A construction or enumeration would exceed the configured size cap."""


class EmptyInterval(MuchnikLabError):
    """Interval endpoints are not ordered (a is not below b)."""


class NotALatticeError(MuchnikLabError):
    """An explicitly given order is not a lattice (missing lub/glb)."""


class NotDistributiveError(MuchnikLabError):
    """An explicitly given lattice contains an M3 or N5 sublattice."""


class FormulaSyntaxError(MuchnikLabError):
    """Formula text does not match the grammar.

    Carries the 0-based character position of the offending token.
    """

    def __init__(self, message, position):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class UnboundVariable(MuchnikLabError):
    """A formula variable has no value under the given valuation."""


class ValuationBudgetExceeded(MuchnikLabError):
    """An exhaustive validity check would enumerate too many valuations."""


class BudgetExceeded(MuchnikLabError):
    """A search budget ran out.

    When raised from countermodel attachment the syntactic verdict is still
    sound and is carried in ``partial_verdict``.
    """

    def __init__(self, message, partial_verdict=None):
        super().__init__(message)
        self.partial_verdict = partial_verdict


class AmbientMismatch(MuchnikLabError):
    """Two mass problems live over different degree posets."""


class NoJoinTable(MuchnikLabError):
    """The degree poset is not an upper semilattice; formula mode needs joins."""


class PolicyUnsatisfiable(MuchnikLabError):
    """The master-poset build cannot certify its structural properties."""
