"""Time-optimal control of a three-qubit Ising chain and its entanglement dynamics."""
from .errors import (
    ConfigError,
    DivergentTime,
    DomainError,
    EmptyBounds,
    InsufficientEnergy,
    InvalidEnergy,
    NegativeBzSquared,
    NegativeTangle,
    OutOfRange,
    QBError,
    StepTooLarge,
)
from .model import ChainParams, FieldParams, omega_k_sq
from .optimal import Branch, OptimalPlan, optimal_plan, thresholds
from .propagator import StateClass, evolve_class, representative_state, u_opt
from .tangle import CONSERVED_TOTAL, tau13_closed, tau123_closed, tangles

__version__ = "0.1.0"
