"""Off-resonant Raman quantum memory: mode decomposition, storage, shaping and retrieval."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ContractViolation,
    DegenerateSignalError,
    DegenerateTransformError,
    DomainError,
    NodalModeError,
    NullModeError,
    RamanMemoryError,
)
from .modes import ModeCache, ModeDecomposition, check_nodeless, decompose, mode_function, singular_value_sweep, verify_mu  # noqa: E402
from .physical import (  # noqa: E402
    ControlPulse,
    PhysicalParams,
    SignalWavepacket,
    coupling_from_ensemble,
    coupling_from_fields,
    desk_scenario,
    from_scaled,
    gaussian_wavepacket,
    to_scaled,
)
from .transport import ScaledField, excitation_budget, fd_integrate, field_map, scatter  # noqa: E402
from .readin import input_modes, readin  # noqa: E402
from .shaping import shape_analytic, shape_optimize  # noqa: E402
from .readout import ReadoutConfig, RetrievalMap, mismatch_suppression, retrieval_map, retrieval_probability  # noqa: E402
from .estimators import ControlShaper, RamanMemory, RetrievalModel  # noqa: E402

__all__ = [
    "ContractViolation", "DegenerateSignalError", "DegenerateTransformError", "DomainError", "NodalModeError",
    "NullModeError", "RamanMemoryError",
    "ModeCache", "ModeDecomposition", "check_nodeless", "decompose", "mode_function", "singular_value_sweep",
    "verify_mu",
    "ControlPulse", "PhysicalParams", "SignalWavepacket", "coupling_from_ensemble", "coupling_from_fields",
    "desk_scenario", "from_scaled", "gaussian_wavepacket", "to_scaled",
    "ScaledField", "excitation_budget", "fd_integrate", "field_map", "scatter",
    "input_modes", "readin", "shape_analytic", "shape_optimize",
    "ReadoutConfig", "RetrievalMap", "mismatch_suppression", "retrieval_map", "retrieval_probability",
    "ControlShaper", "RamanMemory", "RetrievalModel",
]
