"""Matrix-product-state circuit simulation with swap-network and projector engines."""

from .circuits import Circuit, hea, heisenberg_1d, ising_2d, load_circuit, qaoa, save_circuit
from .gates import GateOp, ProductGenerator, SumGenerator, gate_generator, gate_unitary
from .linalg import LanczosConvergenceError, TruncationReport, lanczos_expm_apply, truncated_svd
from .metrics import ProbeSpec, StepMetrics
from .mps import MPS, expectation_two_site, norm, product_state, shift_center
from .tebd import GateLog, TebdConfig, run_circuit_tebd
from .tdvp import TdvpConfig, run_circuit_tdvp

__all__ = [
    "Circuit",
    "GateLog",
    "GateOp",
    "LanczosConvergenceError",
    "MPS",
    "ProbeSpec",
    "ProductGenerator",
    "StepMetrics",
    "SumGenerator",
    "TdvpConfig",
    "TebdConfig",
    "TruncationReport",
    "expectation_two_site",
    "gate_generator",
    "gate_unitary",
    "hea",
    "heisenberg_1d",
    "ising_2d",
    "lanczos_expm_apply",
    "load_circuit",
    "norm",
    "product_state",
    "qaoa",
    "run_circuit_tebd",
    "run_circuit_tdvp",
    "save_circuit",
    "shift_center",
    "truncated_svd",
]
