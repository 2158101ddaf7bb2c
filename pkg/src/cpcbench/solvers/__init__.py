"""Baseline optimizers under the penalty protocol."""

from .base import ALGORITHMS, PENALTY, PenalizedObjective, RunResult, SolverConfig, penalize
from .ga import run_ga
from .gpso import run_gpso
from .msqn import run_msqn
from .protocol import ProtocolResult, coordinates, run_protocol, run_seed, run_solver
from .random_search import run_random_search
from .sa import run_sa

__all__ = [
    "ALGORITHMS", "PENALTY", "PenalizedObjective", "ProtocolResult", "RunResult", "SolverConfig",
    "coordinates", "penalize", "run_ga", "run_gpso", "run_msqn", "run_protocol",
    "run_random_search", "run_sa", "run_seed", "run_solver",
]
