"""Exact inflation tests for symmetric tripartite binary distributions."""

from .dist import SymmetricDist, constant, e3_interval, target_distribution
from .errors import (CertificateError, DegreeOverflowError, ModelFileError,
                     ResourceLimitError, SymtriError, WiringError)
from .inflation import Family, HierarchyLevel, RingSpec, assemble, build_system
from .lin import Poly2, SparseMatrix
from .lp import Feasible, Infeasible, StandardLp, solve_feasibility, verify_certificate

__version__ = "0.1.0"
