"""Exception hierarchy shared across the package.

Every error carries enough context (offending edge, vertex, row, ...) in its
message to be actionable from the CLI without a traceback.
"""


class DoseMatchError(Exception):
    """Base class for all package-specific errors."""


# ---------------------------------------------------------------------------
# Graph construction / validation
# ---------------------------------------------------------------------------

class GraphError(DoseMatchError):
    """Base class for malformed-graph errors."""


class DuplicateEdge(GraphError):
    pass


class SelfLoop(GraphError):
    pass


class NegativeCost(GraphError):
    pass


class IndexOutOfRange(GraphError):
    pass


class UnknownEdge(GraphError):
    """An edge cover / matching references a pair absent from the graph."""


# ---------------------------------------------------------------------------
# Matching / edge cover solvers
# ---------------------------------------------------------------------------

class NoPerfectMatching(DoseMatchError):
    """The graph admits no perfect matching."""


class OddVertexCount(DoseMatchError):
    pass


class Infeasible(DoseMatchError):
    """No admissible pairing exists."""


class IsolatedVertex(DoseMatchError):
    """A vertex with no incident edge: no edge cover exists."""


# ---------------------------------------------------------------------------
# Distances
# ---------------------------------------------------------------------------

class SingularCovariance(DoseMatchError):
    pass


class DimensionMismatch(DoseMatchError):
    pass


# ---------------------------------------------------------------------------
# Homogeneity measures
# ---------------------------------------------------------------------------

class AbsentDistance(DoseMatchError):
    """A required pairwise distance is marked as forbidden/absent."""


class RefNotMember(DoseMatchError):
    pass


class TooLarge(DoseMatchError):
    """Instance exceeds the brute-force enumeration bound."""


class EmptyCluster(DoseMatchError):
    pass


class EmptySide(DoseMatchError):
    """A median split produced an empty dose group (cannot happen for valid input)."""


# ---------------------------------------------------------------------------
# Estimation
# ---------------------------------------------------------------------------

class RankDeficient(DoseMatchError):
    pass


# ---------------------------------------------------------------------------
# I/O
# ---------------------------------------------------------------------------

class ParseError(DoseMatchError):
    pass


class MissingColumn(DoseMatchError):
    pass


class NonFiniteValue(DoseMatchError):
    pass


class DuplicateId(DoseMatchError):
    pass
