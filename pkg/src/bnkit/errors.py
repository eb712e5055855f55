"""Exception types shared across the package.

Every error raised by bnkit derives from :class:`BnkitError` so callers
(and the CLI) can catch the whole family in one clause.
"""


class BnkitError(Exception):
    """Base class for all bnkit errors."""


class CycleDetected(BnkitError):
    """An edge list contains a directed cycle. Carries one witness cycle."""

    def __init__(self, cycle):
        self.cycle = list(cycle)
        super().__init__("directed cycle: " + " -> ".join(map(str, self.cycle)))


class UnknownVariable(BnkitError):
    """A name does not refer to any declared variable."""


class DuplicateEdge(BnkitError):
    """The same ordered pair appears twice in an edge list."""


class DuplicateConstraint(BnkitError):
    """The same constraint pair appears twice in a constraint file."""


class MalformedRow(BnkitError):
    """A constraint or data file row does not match the expected layout."""


class VariableInTwoTiers(BnkitError):
    """A variable was assigned to more than one temporal tier."""


class ConstraintConflict(BnkitError):
    """Two knowledge inputs contradict each other (e.g. required and forbidden)."""


class UnsatisfiableSeed(BnkitError):
    """No valid starting graph exists for the given knowledge and in-degree cap."""


class OverlappingRoles(BnkitError):
    """A variable was declared both a decision and a utility node."""


class ArityMismatch(BnkitError):
    """Dataset columns and model variables disagree on names or state counts."""


class VariableSetMismatch(BnkitError):
    """Two graphs being compared are not defined over the same variables."""


class DegenerateTruth(BnkitError):
    """The true graph has no present or no absent edges, so BSF is undefined."""


class TooFewVariables(BnkitError):
    """Temporal constraints need at least two variables; the requested rate
    selects fewer, so small networks cannot be sampled at low rates."""


class TooManyVariables(BnkitError):
    """Exhaustive DAG enumeration is limited to five variables."""


class NoAdmissibleConnector(BnkitError):
    """A connectivity or decision/utility repair phase found no arc it is
    allowed to add."""


class SearchTimeout(BnkitError):
    """A learning run exceeded its wall-clock budget."""
