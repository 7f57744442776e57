"""Exact few-excitation simulation of the PME repeater's optical stages."""

from .darkstate import DarkStateSystem, dark_state_check
from .detection import ClickOutcome, DetectorModel, measure_clicks
from .optics import (
    apply_beamsplitter,
    apply_loss,
    apply_pbs,
    apply_phase,
    beamsplitter_matrix,
    from_diagonal,
    linear_transform,
    swap_polarization,
    to_diagonal,
    transfer,
)
from .protocols import (
    HeraldOutcome,
    HeraldResult,
    NotPMEError,
    basic_link_generation,
    build_eme,
    build_input_photon_state,
    entanglement_swap,
    local_pme_generation,
    pme_sign,
    pme_state,
    pme_target,
    single_excitation_state,
    teleport,
    teleport_target,
    vacuum_coefficient,
)
from .state import FockState, MixedState, ModeId, ModeKind, Polarization, TruncationError

__all__ = [
    "ClickOutcome",
    "DarkStateSystem",
    "DetectorModel",
    "FockState",
    "HeraldOutcome",
    "HeraldResult",
    "MixedState",
    "ModeId",
    "ModeKind",
    "NotPMEError",
    "Polarization",
    "TruncationError",
    "apply_beamsplitter",
    "apply_loss",
    "apply_pbs",
    "apply_phase",
    "beamsplitter_matrix",
    "from_diagonal",
    "basic_link_generation",
    "build_eme",
    "build_input_photon_state",
    "dark_state_check",
    "entanglement_swap",
    "linear_transform",
    "local_pme_generation",
    "measure_clicks",
    "pme_sign",
    "pme_state",
    "pme_target",
    "single_excitation_state",
    "swap_polarization",
    "teleport",
    "teleport_target",
    "to_diagonal",
    "transfer",
    "vacuum_coefficient",
]
