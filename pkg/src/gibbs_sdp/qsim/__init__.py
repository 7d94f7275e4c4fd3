"""Classical simulation of the sampling-based SDP loop with a query-cost ledger."""

from .driver import QsimResult, qsim_feasibility, run_quantum_sim
from .ledger import CostLedger, RoundRecord
from .params import QsimConfig, theoretical_cost_report

__all__ = ["CostLedger", "QsimConfig", "QsimResult", "RoundRecord", "qsim_feasibility",
           "run_quantum_sim", "theoretical_cost_report"]
