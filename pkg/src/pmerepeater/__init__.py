"""Simulator and rate analytics for a quantum repeater built on
"polarization" maximally entangled (PME) states of atomic ensembles."""

from .analytics import (
    CavityParams,
    ProtocolParams,
    RateBreakdown,
    cavity_snr,
    fidelity_imperfection,
    paper_params,
    reference_comparison,
    success_probs,
    sweep,
    total_time,
)
from .sim import SimConfig, SimOutcome, convergence_report, simulate_basic_link, simulate_nested

__version__ = "0.1.0"
