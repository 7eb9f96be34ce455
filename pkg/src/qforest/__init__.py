"""Quantum random-forest prediction: circuit synthesis, lowering, simulation and estimation."""
from .circuit import Circuit, Gate, GateCountReport, Kind
from .forest import (
    ForestModel,
    ForestValidationError,
    TreeModel,
    leaf_angles,
    load_forest,
    parse_forest,
    predict_proba,
    tree_predict_classical,
)
from .simulator import Statevector, run, unitary_of
from .synth import RegisterLayout, SynthesizedPredictor, synthesize_rf_predict

__all__ = [
    "Circuit", "Gate", "GateCountReport", "Kind",
    "ForestModel", "ForestValidationError", "TreeModel", "leaf_angles", "load_forest",
    "parse_forest", "predict_proba", "tree_predict_classical",
    "Statevector", "run", "unitary_of",
    "RegisterLayout", "SynthesizedPredictor", "synthesize_rf_predict",
]
