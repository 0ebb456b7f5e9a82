"""Effective energy efficiency of ultra-reliable short-packet links under fading."""
from .channel import EvalConfig
from .effective_capacity import (
    EcMethod, QoSConstraints, delay_bound, delay_bound_symbols, effective_capacity,
)
from .eee_models import BufferMode, PowerModel, TrafficModel, eee_ebp, eee_full_buffer
from .errors import ConvergenceError, DomainError, InfeasibleError
from .fbl_rate import LinkParams, db_to_linear, rate

__version__ = "0.1.0"

__all__ = [
    "BufferMode", "ConvergenceError", "DomainError", "EcMethod", "EvalConfig", "InfeasibleError",
    "LinkParams", "PowerModel", "QoSConstraints", "TrafficModel", "db_to_linear", "delay_bound",
    "delay_bound_symbols", "eee_ebp", "eee_full_buffer", "effective_capacity", "rate",
]
