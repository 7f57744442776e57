"""Measurement-conditioned protocol stages of the PME repeater.

Every stage is simulated exactly: atomic excitations are transferred to
photonic modes, sent through beam splitters (and fiber loss), and the click
record of threshold detectors heralds the conditional atomic state.

Four-ensemble PME states use the registry order ``(l1, l2, r1, r2)`` of
atomic-S modes and have the form ``(S_l1 S_r2 + sign * S_l2 S_r1)|vac>/sqrt2``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Sequence

from .detection import ClickOutcome, DetectorModel, measure_clicks
from .optics import apply_beamsplitter, apply_loss, apply_pbs, swap_polarization, to_diagonal, transfer
from .state import (
    DEFAULT_TRUNCATION,
    FockState,
    MixedState,
    ModeId,
    ModeKind,
    as_mixed,
)

SQRT1_2 = 1 / math.sqrt(2)
PME_TOL = 1e-9

# Sign of the heralded PME (relative to the "+" form, for "+" inputs) for
# each accepted click pair. Obtained by enumerating the ideal protocol with
# the conventions of this module; tests/test_protocols.py re-derives them.
LOCAL_PME_SIGNS = {
    ("D_L1", "D_R1"): +1,
    ("D_L1", "D_R2"): -1,
    ("D_L2", "D_R1"): -1,
    ("D_L2", "D_R2"): +1,
}
BASIC_LINK_SIGNS = {
    ("D1", "D3"): +1,
    ("D1", "D4"): -1,
    ("D2", "D3"): -1,
    ("D2", "D4"): +1,
}
SWAP_SIGNS = {
    ("D1", "D3"): +1,
    ("D1", "D4"): -1,
    ("D2", "D3"): -1,
    ("D2", "D4"): +1,
}
TELEPORT_SIGNS = {
    ("D_I1", "D_I2"): +1,
    ("D_I1", "D_L2"): -1,
    ("D_L1", "D_I2"): -1,
    ("D_L1", "D_L2"): +1,
}


class NotPMEError(ValueError):
    """Input is not a polarization maximally entangled state of the expected form."""


# state builders


def build_input_photon_state(phi: float, left: str = "L_in", right: str = "R_in") -> FockState:
    """Single photon split over two optical modes: ``(|0,1> + e^{i phi}|1,0>)/sqrt2``."""
    modes = (ModeId.photon(left), ModeId.photon(right))
    return FockState(modes, {(0, 1): SQRT1_2, (1, 0): cmath.exp(1j * phi) * SQRT1_2})


def build_eme(c0: float, phi: float, left: str = "L", right: str = "R", truncation: int = DEFAULT_TRUNCATION) -> MixedState:
    """Effective maximally entangled state of two ensembles (T modes).

    Vacuum with weight ``c0/(c0+1)``, ``(T_L^dag + e^{i phi} T_R^dag)|0 0>/sqrt2``
    with weight ``1/(c0+1)``.
    """
    if not c0 >= 0:
        raise ValueError(f"vacuum coefficient must be non-negative, got {c0}")
    modes = (ModeId.t(left), ModeId.t(right))
    if math.isinf(c0):
        return MixedState.pure(FockState.vacuum(modes, truncation))
    excited = FockState(modes, {(1, 0): SQRT1_2, (0, 1): cmath.exp(1j * phi) * SQRT1_2}, truncation)
    branches = [(1 / (c0 + 1), excited)]
    if c0 > 0:
        branches.append((c0 / (c0 + 1), FockState.vacuum(modes, truncation)))
    return MixedState(tuple(branches))


def vacuum_coefficient(eta_p: float, eta_s: float) -> float:
    """Vacuum coefficient produced by source and storage inefficiency.

    A photon emitted with probability ``eta_p`` and stored with ``eta_s`` leaves
    the pair excited with probability ``eta_p*eta_s = 1/(c0+1)``.
    """
    keep = eta_p * eta_s
    if not 0 <= keep <= 1:
        raise ValueError("eta_p * eta_s must lie in [0, 1]")
    return math.inf if keep == 0 else 1 / keep - 1


def pme_state(
    left: Sequence[str] = ("L1", "L2"),
    right: Sequence[str] = ("R1", "R2"),
    sign: int = +1,
    truncation: int = DEFAULT_TRUNCATION,
) -> FockState:
    """``(S_l1 S_r2 + sign S_l2 S_r1)|vac>/sqrt2`` over S modes ordered (l1, l2, r1, r2)."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    l1, l2 = left
    r1, r2 = right
    modes = tuple(ModeId.s(x) for x in (l1, l2, r1, r2))
    return FockState(modes, {(1, 0, 0, 1): SQRT1_2, (0, 1, 1, 0): sign * SQRT1_2}, truncation)


def single_excitation_state(alpha: complex, beta: complex, ensembles: Sequence[str] = ("I1", "I2")) -> FockState:
    """``(alpha S_1^dag + beta S_2^dag)|0 0>``."""
    modes = tuple(ModeId.s(x) for x in ensembles)
    return FockState(modes, {(1, 0): alpha, (0, 1): beta})


def ensemble_name(mode: ModeId) -> str:
    return mode.label.rsplit(".", 1)[0]


def pme_roles(state: FockState | MixedState) -> tuple[ModeId, ModeId, ModeId, ModeId]:
    modes = as_mixed(state).modes
    if len(modes) != 4 or any(m.kind is not ModeKind.ATOMIC_S for m in modes):
        raise NotPMEError(f"expected four atomic-S modes (l1, l2, r1, r2), got {[str(m) for m in modes]}")
    return modes  # type: ignore[return-value]


def pme_target(state: FockState | MixedState, sign: int = +1) -> FockState:
    l1, l2, r1, r2 = (ensemble_name(m) for m in pme_roles(state))
    return pme_state((l1, l2), (r1, r2), sign, as_mixed(state).branches[0][1].truncation)


def pme_sign(state: FockState | MixedState, tol: float = PME_TOL) -> int:
    """Return +1/-1 for a PME state of either sign; raise `NotPMEError` otherwise."""
    mixed = as_mixed(state)
    for sign in (+1, -1):
        if mixed.fidelity(pme_target(mixed, sign)) >= 1 - tol:
            return sign
    raise NotPMEError("input is not a PME state (fidelity below 1 - 1e-9 for both signs)")


# heralding


@dataclass(frozen=True)
class HeraldOutcome:
    clicks: tuple[str, ...]
    probability: float
    state: MixedState  # conditional state before correction
    sign: int

    @property
    def needs_correction(self) -> bool:
        return self.sign < 0


@dataclass(frozen=True)
class HeraldResult:
    """Result of a heralded stage.

    ``state`` is the accepted conditional state with the pi-phase correction
    already applied on ``correction_mode`` for outcomes whose sign is -1.
    """

    success_prob: float
    state: MixedState | None
    outcomes: tuple[HeraldOutcome, ...]
    correction_mode: str
    detectors: tuple[str, ...]
    patterns: tuple[ClickOutcome, ...] = field(repr=False, default=())

    @property
    def corrections(self) -> dict[tuple[str, ...], str]:
        return {o.clicks: ("pi-phase" if o.needs_correction else "none") for o in self.outcomes}

    def fidelity(self, target: FockState) -> float:
        if self.state is None:
            raise ValueError("stage never succeeds; no conditional state")
        return self.state.fidelity(target)


def _herald(
    mixed: MixedState,
    detectors: Sequence[tuple[str, ModeId]],
    model: DetectorModel,
    pairs: Sequence[tuple[str, str]],
    discard: Sequence[ModeId],
    order: Sequence[ModeId],
    signs: dict[tuple[str, ...], int],
    input_sign: int,
    correction_mode: ModeId,
) -> HeraldResult:
    names = [n for n, _ in detectors]
    patterns = measure_clicks(mixed, [(m, model) for _, m in detectors])
    accepted = []
    for pat in patterns:
        clicked = {n for n, c in zip(names, pat.pattern) if c}
        if pat.probability == 0 or len(clicked) != len(pairs):
            continue
        picks = []
        for pair in pairs:
            hit = clicked.intersection(pair)
            if len(hit) != 1:
                break
            picks.append(hit.pop())
        else:
            key = tuple(picks)
            post = pat.state.trace_out(discard) if discard else pat.state
            post = post.map(lambda s: s.reordered(order))
            accepted.append(HeraldOutcome(key, pat.probability, post, signs[key] * input_sign))
    success = math.fsum(o.probability for o in accepted)
    state = None
    if success > 0:
        parts = []
        for o in accepted:
            fixed = o.state if o.sign > 0 else o.state.map(lambda s: s.phase_shift(correction_mode, math.pi))
            parts.extend((o.probability * w, s) for w, s in fixed.branches)
        state = MixedState(tuple(parts)).merged().normalized()
    return HeraldResult(
        success_prob=success,
        state=state,
        outcomes=tuple(accepted),
        correction_mode=correction_mode.label,
        detectors=tuple(names),
        patterns=tuple(patterns),
    )


def _t_modes(eme: MixedState) -> tuple[ModeId, ModeId]:
    modes = eme.modes
    if len(modes) != 2 or any(m.kind is not ModeKind.ATOMIC_T for m in modes):
        raise ValueError(f"EME state must live on two atomic-T modes, got {[str(m) for m in modes]}")
    return modes  # type: ignore[return-value]


def local_pme_generation(
    eme1: MixedState | FockState,
    eme2: MixedState | FockState,
    eta_e1: float = 1.0,
    eta_d: float = 1.0,
    phi_L: float = 0.0,
    phi_R: float = 0.0,
    p_d: float = 0.0,
) -> HeraldResult:
    """Project two EME pairs (L1,R1), (L2,R2) onto a PME state.

    T excitations convert to S with photon emission (efficiency ``eta_e1``);
    the L photons and the R photons each meet at a 50/50 beam splitter and a
    click on both sides heralds ``(S_L1 S_R2 +- S_L2 S_R1)|vac>/sqrt2``. The
    result is ordered (L1, L2, R1, R2).
    """
    eme1, eme2 = as_mixed(eme1), as_mixed(eme2)
    tl1, tr1 = _t_modes(eme1)
    tl2, tr2 = _t_modes(eme2)
    if {tl1.label, tr1.label} & {tl2.label, tr2.label}:
        raise ValueError("the two EME pairs must use disjoint ensembles")
    ensembles = [ensemble_name(m) for m in (tl1, tr1, tl2, tr2)]
    s_modes = {e: ModeId.s(e) for e in ensembles}
    ph = {e: ModeId.photon(f"{e}.ph") for e in ensembles}

    rho = eme1.tensor(eme2).map(lambda s: s.with_modes(list(s_modes.values()) + list(ph.values())))

    def convert(s: FockState) -> FockState:
        for t, e in zip((tl1, tr1, tl2, tr2), ensembles):
            s = transfer(s, t, ph[e], eta_e1, herald=s_modes[e])
        s = apply_beamsplitter(s, ph[ensembles[0]], ph[ensembles[2]], phi_L)
        return apply_beamsplitter(s, ph[ensembles[1]], ph[ensembles[3]], phi_R)

    rho = rho.map(convert)
    l1, r1, l2, r2 = ensembles
    detectors = [("D_L1", ph[l1]), ("D_L2", ph[l2]), ("D_R1", ph[r1]), ("D_R2", ph[r2])]
    return _herald(
        rho,
        detectors,
        DetectorModel(eta_d, p_d),
        pairs=[("D_L1", "D_L2"), ("D_R1", "D_R2")],
        discard=[tl1, tr1, tl2, tr2],
        order=[s_modes[l1], s_modes[l2], s_modes[r1], s_modes[r2]],
        signs=LOCAL_PME_SIGNS,
        input_sign=+1,
        correction_mode=s_modes[l2],
    )


def _input_signs(states, strict: bool, signs) -> tuple[int, ...]:
    if strict:
        found = tuple(pme_sign(s) for s in states)
        if signs is not None and tuple(signs) != found:
            raise NotPMEError(f"declared input signs {tuple(signs)} differ from detected {found}")
        return found
    for s in states:
        pme_roles(s)
    return tuple(signs) if signs is not None else (1,) * len(states)


def basic_link_generation(
    pme_a: FockState | MixedState,
    pme_b: FockState | MixedState,
    eta_e2: float = 1.0,
    eta_t: float = 1.0,
    eta_d: float = 1.0,
    channel_phase_a: float = 0.0,
    channel_phase_b: float = 0.0,
    p_d: float = 0.0,
    strict: bool = True,
    input_signs: Sequence[int] | None = None,
) -> HeraldResult:
    """Entangle neighbouring nodes A and B by a two-photon polarization BSM.

    A's right pair emits H (r1) / V (r2) photons, B's left pair H (l1) / V (l2).
    Both photons cross a fiber of transmissivity ``eta_t`` with their own
    channel phase. A half-wave plate on B's arm precedes the PBS; each PBS
    output is analysed in the +/- basis (D1/D2 and D3/D4). The heralded state
    is ordered (A.l1, A.l2, B.r1, B.r2).
    """
    sa, sb = _input_signs((pme_a, pme_b), strict, input_signs)
    pme_a, pme_b = as_mixed(pme_a), as_mixed(pme_b)
    al1, al2, ar1, ar2 = pme_roles(pme_a)
    bl1, bl2, br1, br2 = pme_roles(pme_b)
    port_a = (ModeId.photon("bsm.a", "H"), ModeId.photon("bsm.a", "V"))
    port_b = (ModeId.photon("bsm.b", "H"), ModeId.photon("bsm.b", "V"))

    def retrieve(s: FockState) -> FockState:
        s = s.with_modes(port_a + port_b)
        s = transfer(s, ar1, port_a[0], eta_e2)
        s = transfer(s, ar2, port_a[1], eta_e2)
        s = transfer(s, bl1, port_b[0], eta_e2)
        s = transfer(s, bl2, port_b[1], eta_e2)
        for m in port_a:
            s = s.phase_shift(m, channel_phase_a)
        for m in port_b:
            s = s.phase_shift(m, channel_phase_b)
        return s

    rho = pme_a.tensor(pme_b).map(retrieve)
    for m in port_a + port_b:
        rho = apply_loss(rho, m, eta_t)

    def analyse(s: FockState) -> FockState:
        s = swap_polarization(s, port_b)
        s = apply_pbs(s, port_a, port_b, "HV")
        return to_diagonal(to_diagonal(s, port_a), port_b)

    rho = rho.map(analyse)
    detectors = [("D1", port_a[0]), ("D2", port_a[1]), ("D3", port_b[0]), ("D4", port_b[1])]
    return _herald(
        rho,
        detectors,
        DetectorModel(eta_d, p_d),
        pairs=[("D1", "D2"), ("D3", "D4")],
        discard=[ar1, ar2, bl1, bl2],
        order=[al1, al2, br1, br2],
        signs=BASIC_LINK_SIGNS,
        input_sign=sa * sb,
        correction_mode=al2,
    )


def entanglement_swap(
    pme_ab: FockState | MixedState,
    pme_bc: FockState | MixedState,
    eta_e2: float = 1.0,
    eta_d: float = 1.0,
    phase: float = 0.0,
    p_d: float = 0.0,
    strict: bool = True,
    input_signs: Sequence[int] | None = None,
) -> HeraldResult:
    """Join PME links (A, B_L) and (B_R, C) into a PME link (A, C).

    The four B ensembles are read out; B_L1/B_R1 photons meet on one beam
    splitter (D1, D2), B_L2/B_R2 photons on another (D3, D4). One click in
    each pair heralds success.
    """
    s1, s2 = _input_signs((pme_ab, pme_bc), strict, input_signs)
    pme_ab, pme_bc = as_mixed(pme_ab), as_mixed(pme_bc)
    a1, a2, bl1, bl2 = pme_roles(pme_ab)
    br1, br2, c1, c2 = pme_roles(pme_bc)
    ph = {m.label: ModeId.photon(f"{ensemble_name(m)}.ph") for m in (bl1, bl2, br1, br2)}

    def readout(s: FockState) -> FockState:
        s = s.with_modes(list(ph.values()))
        for m in (bl1, bl2, br1, br2):
            s = transfer(s, m, ph[m.label], eta_e2)
        s = apply_beamsplitter(s, ph[bl1.label], ph[br1.label], phase)
        return apply_beamsplitter(s, ph[bl2.label], ph[br2.label], phase)

    rho = pme_ab.tensor(pme_bc).map(readout)
    detectors = [
        ("D1", ph[bl1.label]),
        ("D2", ph[br1.label]),
        ("D3", ph[bl2.label]),
        ("D4", ph[br2.label]),
    ]
    return _herald(
        rho,
        detectors,
        DetectorModel(eta_d, p_d),
        pairs=[("D1", "D2"), ("D3", "D4")],
        discard=[bl1, bl2, br1, br2],
        order=[a1, a2, c1, c2],
        signs=SWAP_SIGNS,
        input_sign=s1 * s2,
        correction_mode=a2,
    )


def teleport(
    alpha: complex,
    beta: complex,
    pme: FockState | MixedState,
    eta_e2: float = 1.0,
    eta_d: float = 1.0,
    phase: float = 0.0,
    p_d: float = 0.0,
    strict: bool = True,
    input_sign: int | None = None,
    unknown: Sequence[str] = ("I1", "I2"),
) -> HeraldResult:
    """Transfer ``(alpha S_I1 + beta S_I2)|vac>`` onto the far pair of a PME link.

    I1 and L1 photons meet on one beam splitter (D_I1, D_L1), I2 and L2 on
    another (D_I2, D_L2). The output lives on (R1, R2).
    """
    if abs(abs(alpha) ** 2 + abs(beta) ** 2 - 1) > 1e-12:
        raise ValueError("unknown state must satisfy |alpha|^2 + |beta|^2 = 1")
    (sign,) = _input_signs((pme,), strict, None if input_sign is None else (input_sign,))
    pme = as_mixed(pme)
    l1, l2, r1, r2 = pme_roles(pme)
    source = single_excitation_state(alpha, beta, unknown)
    i1, i2 = source.modes
    ph = {m.label: ModeId.photon(f"{ensemble_name(m)}.ph") for m in (i1, i2, l1, l2)}

    def readout(s: FockState) -> FockState:
        s = s.with_modes(list(ph.values()))
        for m in (i1, i2, l1, l2):
            s = transfer(s, m, ph[m.label], eta_e2)
        s = apply_beamsplitter(s, ph[i1.label], ph[l1.label], phase)
        return apply_beamsplitter(s, ph[i2.label], ph[l2.label], phase)

    rho = MixedState.pure(source).tensor(pme).map(readout)
    detectors = [
        ("D_I1", ph[i1.label]),
        ("D_L1", ph[l1.label]),
        ("D_I2", ph[i2.label]),
        ("D_L2", ph[l2.label]),
    ]
    return _herald(
        rho,
        detectors,
        DetectorModel(eta_d, p_d),
        pairs=[("D_I1", "D_L1"), ("D_I2", "D_L2")],
        discard=[i1, i2, l1, l2],
        order=[r1, r2],
        signs=TELEPORT_SIGNS,
        input_sign=sign,
        correction_mode=r2,
    )


def teleport_target(alpha: complex, beta: complex, pme: FockState | MixedState) -> FockState:
    _, _, r1, r2 = pme_roles(pme)
    return FockState((r1, r2), {(1, 0): alpha, (0, 1): beta})
