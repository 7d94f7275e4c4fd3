"""Semidefinite programs through Gibbs states: a classical MMW solver and a
simulator of the sampling-based variant with an explicit query-cost ledger."""

from .exceptions import (DimensionError, GibbsSDPError, InvalidInstanceError, NumericalError,
                         OracleError, PreconditionError, SolverContractError,
                         SparsificationError, WidthError)
from .linalg import (DensityMatrix, SparseHermitian, gibbs_state, hermitian_exp, min_eigenvalue,
                     operator_norm, trace_distance, trace_inner)
from .model import (DualVector, EntryOracle, SdpInstance, check_instance, load_instance,
                    save_instance, validate, verify_dual)

__version__ = "0.1.0"

__all__ = ["DensityMatrix", "DimensionError", "DualVector", "EntryOracle", "GibbsSDPError",
           "InvalidInstanceError", "NumericalError", "OracleError", "PreconditionError",
           "SdpInstance", "SolverContractError", "SparseHermitian", "SparsificationError",
           "WidthError", "check_instance", "gibbs_state", "hermitian_exp", "load_instance",
           "min_eigenvalue", "operator_norm", "save_instance", "trace_distance", "trace_inner",
           "validate", "verify_dual"]
