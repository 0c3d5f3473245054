"""Capacities of quantum and classical channels with limited shared entanglement.

Lower bounds come from ensemble optimizers (capacity), upper bounds from
summing norms of the channel adjoint (psumming).
"""
__version__ = "0.1.0"

from .capacity import (CapacityResult, Ensemble, OptimizerConfig, blahut_arimoto, ea_capacity,
                       evaluate_objective, holevo_capacity, purification_transport, restricted_capacity)
from .channels import (ClassicalChannel, QuantumChannel, amplitude_damping, apply, apply_adjoint, bsc, choi,
                       classical_channel, classical_embed, classical_identity, complementary, construct,
                       depolarizing, direct_sum_channel, identity_channel, tensor_channel, validate)
from .entropy import (entropy_derivative_F, fannes_audenaert_bound, quantum_mutual_information,
                      shannon_entropy, von_neumann_entropy)
from .linalg import hermitian_eig, partial_trace, schatten_norm
from .psumming import (NormCurve, capacity_upper_from_norm, channel_norm_1p_d, classical_psumming_norm,
                       covariant_psumming, derivative_capacity_estimate, nonadditivity_demo, sandwich)

__all__ = [
    "CapacityResult", "ClassicalChannel", "Ensemble", "NormCurve", "OptimizerConfig", "QuantumChannel",
    "amplitude_damping", "apply", "apply_adjoint", "blahut_arimoto", "bsc", "capacity_upper_from_norm",
    "channel_norm_1p_d", "choi", "classical_channel", "classical_embed", "classical_identity",
    "classical_psumming_norm", "complementary", "construct", "covariant_psumming", "depolarizing",
    "derivative_capacity_estimate", "direct_sum_channel", "ea_capacity", "entropy_derivative_F",
    "evaluate_objective", "fannes_audenaert_bound", "hermitian_eig", "holevo_capacity", "identity_channel",
    "nonadditivity_demo", "partial_trace", "purification_transport", "quantum_mutual_information",
    "restricted_capacity", "sandwich", "schatten_norm", "shannon_entropy", "tensor_channel", "validate",
    "von_neumann_entropy",
]
