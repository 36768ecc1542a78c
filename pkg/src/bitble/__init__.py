"""Binary-tree block-encoding synthesis.

Compiles a dense ``2**n x 2**n`` matrix into RY/RZ/CNOT/SWAP circuits whose
top-left block is ``A / alpha``, and checks the result with a dense simulator.
"""
from .circuit import (Circuit, CircuitBuilder, CircuitInfo, Gate, GateKind, compress,
                      count_gates, export_text, parse_text, size_metric)
from .demux import MultiplexorSpec, permutative_demux, recursive_demux
from .numerics import control_schedule, fwht_gray_solve, gray_sequence, rz_tree_solve
from .protocols import (EncodingResult, bitble3_angles, bitble_angles, frobenius, mu_p,
                        scale_invariance_check, synthesize)
from .simulate import apply_to_state, circuit_to_unitary, verify_block
from .state_prep import pair_angle, ry_tree_angles, rz_phase_tree, state_prep_circuit

__version__ = "0.1.0"

__all__ = [
    "Circuit", "CircuitBuilder", "CircuitInfo", "Gate", "GateKind", "compress",
    "count_gates", "export_text", "parse_text", "size_metric",
    "MultiplexorSpec", "permutative_demux", "recursive_demux",
    "control_schedule", "fwht_gray_solve", "gray_sequence", "rz_tree_solve",
    "EncodingResult", "bitble3_angles", "bitble_angles", "frobenius", "mu_p",
    "scale_invariance_check", "synthesize",
    "apply_to_state", "circuit_to_unitary", "verify_block",
    "pair_angle", "ry_tree_angles", "rz_phase_tree", "state_prep_circuit",
]
