"""Acceptance criteria, one test group per criterion.

Run ``pytest tests/test_acceptance.py -v``; the terminal summary prints one
PASS/FAIL line per criterion with the measured values.
"""

import cmath
import itertools
import json
import math
import time
import timeit

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pmerepeater import analytics, cli, verify
from pmerepeater.analytics import CavityParams, ProtocolParams
from pmerepeater.config import load_config, preset_text
from pmerepeater.fock import (
    DarkStateSystem,
    DetectorModel,
    FockState,
    ModeId,
    apply_beamsplitter,
    apply_loss,
    basic_link_generation,
    build_eme,
    dark_state_check,
    entanglement_swap,
    linear_transform,
    local_pme_generation,
    measure_clicks,
    pme_state,
    pme_target,
    teleport,
    teleport_target,
)
from pmerepeater.sim import RATIO_BAND, LinkModel, SimConfig, convergence_report, simulate_model

GRID = verify.phase_grid(8)
FID_TOL = 1e-10


def criterion(number, title):
    return pytest.mark.criterion(number, title)


# 1 ---------------------------------------------------------------------------


@criterion(1, "total_time(paper preset) = 2251 s within 0.5%, < 1 ms")
def test_paper_total_time(measured):
    params = load_config("paper").protocol
    t = analytics.total_time(params)
    per_call = min(timeit.repeat(lambda: analytics.total_time(params), number=100, repeat=5)) / 100
    measured(f"T_tot={t:.3f} s, {per_call * 1e6:.1f} us/call")
    assert t == pytest.approx(2251, rel=5e-3)
    assert per_call < 1e-3


# 2 ---------------------------------------------------------------------------


@criterion(2, "fidelity_imperfection(4, 5e-6) = 3.2e-4 exactly")
def test_fidelity_bound(measured):
    value = analytics.fidelity_imperfection(4, 5e-6)
    measured(f"dF={value!r}")
    assert value == 3.2e-4


# 3 ---------------------------------------------------------------------------


@criterion(3, "cavity SNR ~ 10 for free-space factor 1e-2, Q = 1000")
def test_cavity_snr(measured):
    r = analytics.cavity_snr(CavityParams.from_free_space_factor(1e-2, Q=1000))
    measured(f"R_sn={r:.6g}")
    assert r == pytest.approx(10, rel=0.05)


# 4 ---------------------------------------------------------------------------


def _worst(result, target_of):
    worst = 1 - result.state.fidelity(target_of(result.state, +1))
    for o in result.outcomes:
        worst = max(worst, 1 - o.state.fidelity(target_of(o.state, o.sign)))
    return worst


@criterion(4, "exact projection suite, F >= 1 - 1e-10 over 8x8 phase grids")
def test_local_pme_grid(measured):
    worst = 0.0
    for phi_l, phi_r in itertools.product(GRID, GRID):
        # EME phases locked to the beam-splitter phases
        res = local_pme_generation(
            build_eme(0, phi_r, "L1", "R1"), build_eme(0, phi_l, "L2", "R2"), phi_L=phi_l, phi_R=phi_r
        )
        worst = max(worst, _worst(res, pme_target))
    measured(f"local 1-F<={worst:.1e}")
    assert worst < FID_TOL


@criterion(4, "exact projection suite, F >= 1 - 1e-10 over 8x8 phase grids")
def test_basic_link_grid(measured):
    a = pme_state(("A.L1", "A.L2"), ("A.R1", "A.R2"))
    b = pme_state(("B.L1", "B.L2"), ("B.R1", "B.R2"))
    worst = max(
        _worst(basic_link_generation(a, b, channel_phase_a=ta, channel_phase_b=tb), pme_target)
        for ta, tb in itertools.product(GRID, GRID)
    )
    measured(f"link 1-F<={worst:.1e}")
    assert worst < FID_TOL


@criterion(4, "exact projection suite, F >= 1 - 1e-10 over 8x8 phase grids")
def test_swap_grid(measured):
    worst = 0.0
    for phase, (s1, s2) in itertools.product(GRID, [(1, 1), (1, -1), (-1, 1), (-1, -1)]):
        ab = pme_state(("A1", "A2"), ("BL1", "BL2"), s1)
        bc = pme_state(("BR1", "BR2"), ("C1", "C2"), s2)
        worst = max(worst, _worst(entanglement_swap(ab, bc, phase=phase), pme_target))
    measured(f"swap 1-F<={worst:.1e}")
    assert worst < FID_TOL


@criterion(4, "exact projection suite, F >= 1 - 1e-10 over 8x8 phase grids")
def test_teleport_grid(measured):
    pme = pme_state()
    worst = 0.0
    for k, (phi, phase) in enumerate(itertools.product(GRID, GRID)):
        theta = math.pi * (k % 7 + 0.5) / 14
        alpha, beta = math.cos(theta), cmath.exp(1j * phi) * math.sin(theta)
        res = teleport(alpha, beta, pme, phase=phase)

        def target(state, sign):
            return FockState(state.modes, {(1, 0): alpha, (0, 1): sign * beta})

        worst = max(worst, _worst(res, target), 1 - res.fidelity(teleport_target(alpha, beta, pme)))
    measured(f"teleport 1-F<={worst:.1e}")
    assert worst < FID_TOL


# 5 ---------------------------------------------------------------------------

LOSSY = list(itertools.product((0.5, 0.8, 1.0), (0.3, 0.7, 0.95), (0.4, 0.8, 1.0)))


@criterion(5, "enumerated p_r, p_b, p_i equal closed forms within 1e-9 on 27 lossy points")
def test_probability_cross_check(measured):
    worst = 0.0
    for k, (eta_s, eta_d, eta_e2) in enumerate(LOSSY):
        params = ProtocolParams(
            eta_p=0.9,
            eta_s=eta_s,
            eta_e1=(0.01, 0.2, 0.6)[k % 3],
            eta_e2=eta_e2,
            eta_d=eta_d,
            L_n=(100.0, 400.0, 1600.0)[k // 9],
            n=k % 3,
            p_d=0.0,
        )
        found = verify.enumerated_probabilities(params)
        rates = analytics.success_probs(params)
        for key in ("p_r", "p_b", "p_i"):
            want = getattr(rates, key)
            assert found[key] == pytest.approx(want, rel=1e-9, abs=1e-9), (key, params)
            worst = max(worst, abs(found[key] - want))
    measured(f"{len(LOSSY)} points, max |diff|={worst:.1e}")
    assert len(LOSSY) >= 27


# 6 ---------------------------------------------------------------------------


@criterion(6, "||H|D>|| < 1e-12 for 100 random (g, Omega) pairs")
def test_dark_state(measured):
    rng = np.random.default_rng(20240601)
    residuals = [dark_state_check(DarkStateSystem(float(g), float(o)))[0] for g, o in rng.uniform(0, 10, (100, 2))]
    measured(f"max={max(residuals):.1e}")
    assert max(residuals) < 1e-12


# 7 ---------------------------------------------------------------------------

_MC_CLOCK: list[float] = []


@pytest.fixture
def mc_clock():
    start = time.perf_counter()
    yield
    _MC_CLOCK.append(time.perf_counter() - start)


@criterion(7, "Monte Carlo consistency (n=0 3-sigma, E[max]=8/3, n=1,2 ratio band, < 1 min)")
def test_mc_basic_link(measured, mc_clock):
    cfg = SimConfig(analytics.paper_params().at_level(0), trials=100_000, seed=7)
    rep = convergence_report(cfg)
    (row,) = rep.rows
    z = (row.mc_mean - row.analytic) / row.std_error
    measured(f"n=0 z={z:+.2f}")
    assert abs(z) < 3


@criterion(7, "Monte Carlo consistency (n=0 3-sigma, E[max]=8/3, n=1,2 ratio band, < 1 min)")
def test_mc_max_of_geometrics(measured, mc_clock):
    # level-1 time with unit hops, free local slots and certain swaps is max(G1, G2) + 1
    model = LinkModel(n=1, p_r=1.0, p_b=0.5, p_swap=1.0, slot_time=0.0, hop_time=1.0)
    out = simulate_model(model, 1, 100_000, seed=11)
    mean = out.mean_total_time - 1
    z = (mean - 8 / 3) / out.std_error
    measured(f"E[max]={mean:.4f} z={z:+.2f}")
    assert abs(z) < 3


@criterion(7, "Monte Carlo consistency (n=0 3-sigma, E[max]=8/3, n=1,2 ratio band, < 1 min)")
@pytest.mark.parametrize("n", [1, 2])
def test_mc_ratio_band(n, measured, mc_clock):
    cfg = SimConfig(analytics.paper_params().at_level(n), trials=100_000, seed=100 + n)
    rep = convergence_report(cfg)
    top = rep.rows[-1]
    measured(f"n={n} ratio={top.ratio:.3f}")
    assert RATIO_BAND[0] <= top.ratio <= RATIO_BAND[1]


@criterion(7, "Monte Carlo consistency (n=0 3-sigma, E[max]=8/3, n=1,2 ratio band, < 1 min)")
def test_mc_paper_smoke(measured, mc_clock):
    rep = convergence_report(SimConfig(analytics.paper_params(), trials=100, seed=42))
    measured(f"n=4 smoke ratio={rep.rows[-1].ratio:.3f}")
    assert math.isfinite(rep.rows[-1].ratio)


@criterion(7, "Monte Carlo consistency (n=0 3-sigma, E[max]=8/3, n=1,2 ratio band, < 1 min)")
def test_mc_total_runtime(measured):
    total = sum(_MC_CLOCK)
    measured(f"MC runtime {total:.1f} s")
    assert len(_MC_CLOCK) == 5, "runtime check must run after the Monte Carlo tests"
    assert total < 60


# 8 ---------------------------------------------------------------------------


@criterion(8, "simulate output byte-identical across runs and worker counts")
def test_simulate_determinism(tmp_path, capsys, measured):
    raw = json.loads(preset_text("paper"))
    raw["protocol"].update(n=2, L_n=625.0)
    cfg = tmp_path / "n2.json"
    cfg.write_text(json.dumps(raw))
    outputs = []
    for k, workers in enumerate(("1", "1", "3")):
        path = tmp_path / f"run{k}.csv"
        argv = ["simulate", "--config", str(cfg), "--seed", "42", "--trials", "12000", "--workers", workers]
        assert cli.main(argv + ["--output", "csv", "-o", str(path)]) == 0
        outputs.append(path.read_bytes())
    capsys.readouterr()
    measured(f"{len(outputs[0])} bytes x3")
    assert outputs[0] == outputs[1] == outputs[2]


# 9 ---------------------------------------------------------------------------

PROPERTY_SETTINGS = settings(max_examples=150, deadline=None)
MODES3 = tuple(ModeId.photon(x) for x in "abc")
angles = st.floats(0, 2 * math.pi, allow_nan=False)
unit = st.floats(0, 1, allow_nan=False)


@st.composite
def two_photon_states(draw):
    """Random normalized state on three modes with at most two photons in total."""
    occs = [o for o in itertools.product(range(3), repeat=3) if sum(o) <= 2]
    picks = draw(st.lists(st.sampled_from(occs), min_size=1, max_size=6, unique=True))
    amps = {o: complex(draw(st.floats(-1, 1)), draw(st.floats(-1, 1))) for o in picks}
    norm = math.sqrt(sum(abs(a) ** 2 for a in amps.values()))
    if norm < 1e-3:
        amps, norm = {picks[0]: 1.0}, 1.0
    return FockState(MODES3, {o: a / norm for o, a in amps.items()})


@st.composite
def unitaries(draw, dim=3):
    re = draw(st.lists(st.floats(-1, 1), min_size=dim * dim, max_size=dim * dim))
    im = draw(st.lists(st.floats(-1, 1), min_size=dim * dim, max_size=dim * dim))
    m = np.array(re).reshape(dim, dim) + 1j * np.array(im).reshape(dim, dim) + 3 * np.eye(dim)
    q, r = np.linalg.qr(m)
    return q * (np.diag(r) / np.abs(np.diag(r)))


@criterion(9, "property suites over >= 100 randomized cases each")
@PROPERTY_SETTINGS
@given(two_photon_states(), two_photon_states(), unitaries())
def test_unitarity(s, t, u):
    us, ut = linear_transform(s, MODES3, u), linear_transform(t, MODES3, u)
    assert us.norm() == pytest.approx(1, abs=1e-12)
    assert abs(us.inner(ut) - s.inner(t)) < 1e-12


@criterion(9, "property suites over >= 100 randomized cases each")
@PROPERTY_SETTINGS
@given(two_photon_states(), unit, unit, st.floats(0, 0.1), angles)
def test_probability_conservation(s, eta_loss, eta_det, p_d, phase):
    lossy = apply_loss(apply_beamsplitter(s, MODES3[0], MODES3[1], phase), MODES3[2], eta_loss)
    assert lossy.total_weight() == pytest.approx(1, abs=1e-12)
    det = DetectorModel(eta_det, p_d)
    outcomes = measure_clicks(lossy, [(MODES3[0], det), (MODES3[1], det)])
    assert math.fsum(o.probability for o in outcomes) == pytest.approx(1, abs=1e-12)


@criterion(9, "property suites over >= 100 randomized cases each")
@PROPERTY_SETTINGS
@given(angles)
def test_hom_zero_coincidence(phase):
    a, b = MODES3[:2]
    out = apply_beamsplitter(FockState((a, b), {(1, 1): 1.0}), a, b, phase)
    assert abs(out.amplitude((1, 1))) < 1e-15


@criterion(9, "property suites over >= 100 randomized cases each")
@PROPERTY_SETTINGS
@given(st.integers(0, 2), unit, st.floats(0, 0.5))
def test_detector_povm(n, eta, p_d):
    mode = MODES3[0]
    out = measure_clicks(FockState((mode,), {(n,): 1.0}), [(mode, DetectorModel(eta, p_d))])
    want = 1 - (1 - p_d) * (1 - eta) ** n
    assert out[1].probability == pytest.approx(want, abs=1e-15)
