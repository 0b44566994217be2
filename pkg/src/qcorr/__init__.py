"""Two-qubit correlation classes: exact criteria, simulated measurements and learned classifiers."""

from .criteria import (
    horodecki_M,
    label_details,
    label_state,
    max_chsh,
    ppt_min_eigenvalue,
    steering_radii,
    steering_radius,
)
from .linalg import fidelity, nearest_density_matrix, partial_trace, partial_transpose
from .measurement import features_exact, features_from_counts, simulate_counts, tomography_reconstruct
from .states import CorrelationLabel, make_state, theoretical_label

__version__ = "0.1.0"

__all__ = [
    "CorrelationLabel",
    "features_exact",
    "features_from_counts",
    "fidelity",
    "horodecki_M",
    "label_details",
    "label_state",
    "make_state",
    "max_chsh",
    "nearest_density_matrix",
    "partial_trace",
    "partial_transpose",
    "ppt_min_eigenvalue",
    "simulate_counts",
    "steering_radii",
    "steering_radius",
    "theoretical_label",
    "tomography_reconstruct",
]
