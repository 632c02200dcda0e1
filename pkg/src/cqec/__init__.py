"""Catalytic recovery of coherent quantum states under energy-conserving dynamics.

The package is organized bottom-up: ``qstate`` (states, fidelity, coherence),
``modes`` (recoverability decision), ``noise``, ``circuit`` (energy-conserving
gates), ``catalyst`` and ``purification`` (catalyst preparation),
``recovery`` (the optimizer and protocol driver), ``baselines``,
``bench_states`` and ``experiments``.
"""

from .baselines import (
    bound_constant,
    copies_for_target,
    finite_copy_infidelity,
    power_law_fit,
    steane_fidelity,
    surface_logical_error,
)
from .catalyst import CatalystBudget, VariationalCatalyst, optimize_catalyst
from .circuit import ECCircuit, ECGate, build_layered, build_minimal, covariance_defect
from .exceptions import (
    ConfigError,
    CQECError,
    FitError,
    InvalidArgumentError,
    InvalidStateError,
    UndefinedBoundError,
    UnsupportedDimensionError,
)
from .modes import check_recoverable, mode_set, resonant_span
from .noise import NoiseSpec, dephase, depolarize
from .purification import DepolForm, SwapTestPurifier, pipeline, recursive_purify, swap_gadget
from .qstate import (
    HamiltonianSpec,
    PureEnsemble,
    l1_coherence,
    maximally_coherent,
    partial_trace,
    qfi,
    uhlmann_fidelity,
)
from .recovery import (
    CQECRecovery,
    ProtocolConfig,
    optimize_parameters,
    run_protocol,
    threshold_sweep,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "bound_constant",
    "copies_for_target",
    "finite_copy_infidelity",
    "power_law_fit",
    "steane_fidelity",
    "surface_logical_error",
    "CatalystBudget",
    "VariationalCatalyst",
    "optimize_catalyst",
    "ECCircuit",
    "ECGate",
    "build_layered",
    "build_minimal",
    "covariance_defect",
    "ConfigError",
    "CQECError",
    "FitError",
    "InvalidArgumentError",
    "InvalidStateError",
    "UndefinedBoundError",
    "UnsupportedDimensionError",
    "check_recoverable",
    "mode_set",
    "resonant_span",
    "NoiseSpec",
    "dephase",
    "depolarize",
    "DepolForm",
    "SwapTestPurifier",
    "pipeline",
    "recursive_purify",
    "swap_gadget",
    "HamiltonianSpec",
    "PureEnsemble",
    "l1_coherence",
    "maximally_coherent",
    "partial_trace",
    "qfi",
    "uhlmann_fidelity",
    "CQECRecovery",
    "ProtocolConfig",
    "optimize_parameters",
    "run_protocol",
    "threshold_sweep",
]
