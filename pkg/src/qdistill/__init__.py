"""Single-copy entanglement distillation of two-qubit states by local filtering."""

from .classify import Classification, StateClass, classify_state, max_distillable_eof
from .distill import (CanonicalForm, FilterOutcome, LocalFilter, ProtocolTrace, apply_filter,
                      bell_diagonalize, canonicalize, canonicalize_product_pair,
                      incomplete_quasi_filter, pure_state_filter, quasi_distillation_filter,
                      simulate_protocol, two_product_filter)
from .entanglement import (concurrence, entanglement_of_formation, eof, is_bell_diagonal,
                           is_entangled, lambda_spectrum)
from .states import DensityMatrix
from .support import classify_face, is_product, product_vectors_in_plane

__all__ = [
    "CanonicalForm", "Classification", "DensityMatrix", "FilterOutcome", "LocalFilter",
    "ProtocolTrace", "StateClass", "apply_filter", "bell_diagonalize", "canonicalize",
    "canonicalize_product_pair", "classify_face", "classify_state", "concurrence",
    "entanglement_of_formation", "eof", "incomplete_quasi_filter", "is_bell_diagonal",
    "is_entangled", "is_product", "lambda_spectrum", "max_distillable_eof",
    "product_vectors_in_plane", "pure_state_filter", "quasi_distillation_filter",
    "simulate_protocol", "two_product_filter",
]
