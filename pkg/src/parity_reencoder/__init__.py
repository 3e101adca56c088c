"""Simulator for a linear-optics parity-state re-encoder."""
from .circuit import CircuitConfig, MismatchParams, ReencoderResult, run
from .detection import CorrectionOp, DetectorPattern, FlipClass, GateMode
from .density import OutputDensityMatrix
from .encoding import BlochAngles, LogicalQubit, collapse_component, decode, parity_state
from .mismatch import (
    QuadratureSpec, SignVariant, average_fidelity, closed_form_fidelity, closed_form_probability,
    closed_form_rho, simulate_rho,
)
from .pdc import ContaminationReport, DetectorModel, PdcParams, contamination_analysis, pdc_state
from .photonic import PhotonicState, Slot, Tag
from .teleport import ProtocolState, RetryPolicy, RunStats, aggregate, run_protocol_trial

__all__ = [
    "BlochAngles", "CircuitConfig", "ContaminationReport", "CorrectionOp", "DetectorModel",
    "DetectorPattern", "FlipClass", "GateMode", "LogicalQubit", "MismatchParams", "OutputDensityMatrix",
    "PdcParams", "PhotonicState", "ProtocolState", "QuadratureSpec", "ReencoderResult", "RetryPolicy",
    "RunStats", "SignVariant", "Slot", "Tag", "aggregate", "average_fidelity", "closed_form_fidelity",
    "closed_form_probability", "closed_form_rho", "collapse_component", "contamination_analysis",
    "decode", "parity_state", "pdc_state", "run", "run_protocol_trial", "simulate_rho",
]
