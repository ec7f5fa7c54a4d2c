"""Eco-driving deceleration advice for heavy trucks."""

from .errors import (
    BracketNotSignChanging,
    EcoDriveError,
    InfeasibleAtSample,
    MaxIterationsExceeded,
    NoFeasiblePath,
    NonFiniteState,
    ValidationError,
)
from .vehicle import DrivingMode, EngineEnvelope, ModeKind, TruckConfig

__version__ = "0.1.0"
