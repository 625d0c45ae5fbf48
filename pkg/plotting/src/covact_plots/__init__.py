"""Figure rendering for the activity-detection experiment CSV outputs."""

from .io import SchemaError, read_lemma3, read_phase_diagram, read_roc
from .lemma3 import plot_lemma3
from .phase import plot_phase, transition_points
from .roc import plot_roc

__version__ = "0.1.0"
