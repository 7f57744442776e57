"""Verification battery for the quantum stages, driven by the `verify` subcommand.

State checks run at ideal efficiencies over a phase grid; probability checks
use the configured efficiencies (without dark counts) and compare exact
enumeration with the closed forms.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from . import analytics
from .analytics import ProtocolParams
from .fock import (
    DarkStateSystem,
    DetectorModel,
    FockState,
    ModeId,
    apply_beamsplitter,
    basic_link_generation,
    build_eme,
    dark_state_check,
    entanglement_swap,
    local_pme_generation,
    measure_clicks,
    pme_state,
    pme_target,
    teleport,
    teleport_target,
    vacuum_coefficient,
)

FIDELITY_TOL = 1e-10
PROBABILITY_TOL = 1e-9
DARK_STATE_TOL = 1e-12
SIGN_CYCLE = ((1, 1), (1, -1), (-1, 1), (-1, -1))


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    metric: float
    detail: str = ""

    def as_dict(self) -> dict:
        return {"check": self.name, "passed": self.passed, "metric": self.metric, "detail": self.detail}


def phase_grid(points: int) -> list[float]:
    if points < 1:
        raise ValueError("phase grid needs at least one point")
    return [2 * math.pi * k / points for k in range(points)]


def _worst_infidelity(result, target_of) -> float:
    """Largest infidelity over accepted outcomes (each against its signed target) and the corrected mixture."""
    if result.state is None:
        return 1.0
    worst = 1 - result.state.fidelity(target_of(result.state, +1))
    for o in result.outcomes:
        worst = max(worst, 1 - o.state.fidelity(target_of(o.state, o.sign)))
    return max(worst, 0.0)


def _state_check(name: str, infid: float) -> Check:
    return Check(name, infid < FIDELITY_TOL, infid, f"1 - F = {infid:.3e}")


def hom_check() -> Check:
    modes = (ModeId.photon("a"), ModeId.photon("b"))
    out = apply_beamsplitter(FockState(modes, {(1, 1): 1.0}), *modes)
    amp = abs(out.amplitude((1, 1)))
    return Check("hom_zero_coincidence", amp < 1e-15, amp, "|<1,1|BS|1,1>|")


def local_pme_checks(grid) -> list[Check]:
    out = []
    for phi in grid:
        res = local_pme_generation(build_eme(0, phi, "L1", "R1"), build_eme(0, phi, "L2", "R2"), phi_L=phi, phi_R=phi)
        out.append(_state_check(f"local_pme[phi={phi:.4f}]", _worst_infidelity(res, pme_target)))
    return out


def basic_link_checks(grid) -> list[Check]:
    a = pme_state(("A.L1", "A.L2"), ("A.R1", "A.R2"))
    b = pme_state(("B.L1", "B.L2"), ("B.R1", "B.R2"))
    out = []
    for k, th in enumerate(grid):
        th_b = grid[(3 * k + 1) % len(grid)]
        res = basic_link_generation(a, b, channel_phase_a=th, channel_phase_b=th_b)
        out.append(_state_check(f"basic_link[phase_a={th:.4f},phase_b={th_b:.4f}]", _worst_infidelity(res, pme_target)))
    return out


def swap_checks(grid) -> list[Check]:
    out = []
    for k, phase in enumerate(grid):
        s1, s2 = SIGN_CYCLE[k % 4]
        ab = pme_state(("A1", "A2"), ("BL1", "BL2"), s1)
        bc = pme_state(("BR1", "BR2"), ("C1", "C2"), s2)
        res = entanglement_swap(ab, bc, phase=phase)
        out.append(_state_check(f"swap[phase={phase:.4f},signs={s1:+d}{s2:+d}]", _worst_infidelity(res, pme_target)))
    return out


def teleport_checks(grid) -> list[Check]:
    pme = pme_state(("L1", "L2"), ("R1", "R2"))
    out = []
    for k, phi in enumerate(grid):
        theta = math.pi * (k + 0.5) / (2 * len(grid))
        alpha, beta = math.cos(theta), cmath.exp(1j * phi) * math.sin(theta)
        res = teleport(alpha, beta, pme, phase=phi / 2)

        def target(state, sign, alpha=alpha, beta=beta):
            return FockState(state.modes, {(1, 0): alpha, (0, 1): sign * beta})

        infid = _worst_infidelity(res, target)
        infid = max(infid, 1 - res.state.fidelity(teleport_target(alpha, beta, pme)))
        out.append(_state_check(f"teleport[phi={phi:.4f}]", infid))
    return out


def dark_state_checks(samples: int = 100, seed: int = 2024) -> Check:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for g, om in rng.uniform(0, 10, size=(samples, 2)):
        residual, _ = dark_state_check(DarkStateSystem(float(g), float(om)))
        worst = max(worst, residual)
    return Check("dark_state", worst < DARK_STATE_TOL, worst, f"max ||H|D>|| over {samples} pairs")


def detector_check(samples: int = 100, seed: int = 7) -> Check:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        n = int(rng.integers(0, 3))
        det = DetectorModel(float(rng.random()), float(rng.random() * 1e-2))
        state = FockState((ModeId.photon("x"),), {(n,): 1.0})
        click = measure_clicks(state, [(state.modes[0], det)])[1].probability
        worst = max(worst, abs(click - (1 - (1 - det.dark_count_prob) * (1 - det.efficiency) ** n)))
    return Check("detector_povm", worst < 1e-15, worst, "max |P(click|n) - formula|")


def enumerated_probabilities(params: ProtocolParams) -> dict[str, float]:
    """Exact success probabilities of the three heralded stages (no dark counts)."""
    c0 = vacuum_coefficient(params.eta_p, params.eta_s)
    p_r = local_pme_generation(
        build_eme(c0, 0.0, "L1", "R1"), build_eme(c0, 0.0, "L2", "R2"), eta_e1=params.eta_e1, eta_d=params.eta_d
    ).success_prob
    a = pme_state(("A.L1", "A.L2"), ("A.R1", "A.R2"))
    b = pme_state(("B.L1", "B.L2"), ("B.R1", "B.R2"))
    eta_t = analytics.fiber_transmission(params.L0, params.L_att)
    p_b = basic_link_generation(a, b, eta_e2=params.eta_e2, eta_t=eta_t, eta_d=params.eta_d).success_prob
    ab = pme_state(("A1", "A2"), ("BL1", "BL2"))
    bc = pme_state(("BR1", "BR2"), ("C1", "C2"))
    p_i = entanglement_swap(ab, bc, eta_e2=params.eta_e2, eta_d=params.eta_d).success_prob
    return {"p_r": p_r, "p_b": p_b, "p_i": p_i}


def probability_checks(params: ProtocolParams) -> list[Check]:
    rates = analytics.success_probs(params)
    found = enumerated_probabilities(params)
    out = []
    for key in ("p_r", "p_b", "p_i"):
        want = getattr(rates, key)
        diff = abs(found[key] - want)
        ok = diff <= PROBABILITY_TOL and diff <= PROBABILITY_TOL * want + 1e-15
        out.append(Check(f"probability_{key}", ok, found[key], f"enumerated {found[key]:.6e} vs closed form {want:.6e}"))
    return out


def run_battery(params: ProtocolParams, grid_points: int = 8) -> list[Check]:
    grid = phase_grid(grid_points)
    checks = [hom_check(), detector_check(), dark_state_checks()]
    checks += local_pme_checks(grid)
    checks += basic_link_checks(grid)
    checks += swap_checks(grid)
    checks += teleport_checks(grid)
    checks += probability_checks(params)
    return checks
