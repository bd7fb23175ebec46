"""Exception hierarchy.

``ValueError`` subclasses are caller mistakes (the CLI exits 1);
``SolverError`` subclasses are numerical or solver failures (exit 2).
"""


class PolarnetError(Exception):
    pass


class GraphError(PolarnetError, ValueError):
    """Invalid graph input (bad weights, self-loops, duplicates, ...)."""


class ModelError(PolarnetError, ValueError):
    """Inconsistent model instance (equal leaders, bad kappa/beta, ...)."""


class ParameterError(PolarnetError, ValueError):
    """Parameter outside its domain (rho, lambda, bounds, budget, ...)."""


class SolverError(PolarnetError, RuntimeError):
    pass


class NumericalError(SolverError):
    """A dense factorization or eigendecomposition failed."""


class InsufficientEdgeBudget(SolverError):
    """The sparsifier could not certify the requested epsilon within k edges."""

    def __init__(self, message, achieved_epsilon, design=None):
        super().__init__(message)
        self.achieved_epsilon = achieved_epsilon
        self.design = design
