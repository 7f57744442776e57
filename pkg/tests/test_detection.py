import math

import pytest

from pmerepeater.fock import DetectorModel, FockState, MixedState, ModeId, measure_clicks

A, B = ModeId.photon("a"), ModeId.photon("b")


@pytest.mark.parametrize("n", [0, 1, 2])
def test_povm_formula(n):
    det = DetectorModel(0.9, 5e-6)
    assert det.no_click_prob(n) == pytest.approx((1 - 5e-6) * 0.1**n)
    assert det.click_prob(n) + det.no_click_prob(n) == pytest.approx(1)


def test_vacuum_clicks_only_by_dark_count():
    det = DetectorModel(0.9, 5e-6)
    out = measure_clicks(FockState.vacuum((A,)), [(A, det)])
    assert [o.pattern for o in out] == [(False,), (True,)]
    assert out[1].probability == pytest.approx(5e-6, rel=1e-12)


def test_patterns_cover_all_bitmasks_and_sum_to_one():
    s = FockState((A, B), {(1, 0): 1 / math.sqrt(2), (0, 1): 1 / math.sqrt(2)})
    det = DetectorModel(0.7, 1e-3)
    out = measure_clicks(s, [(A, det), (B, det)])
    assert [o.bitmask for o in out] == [0, 1, 2, 3]
    assert math.fsum(o.probability for o in out) == pytest.approx(1)


def test_post_state_on_remaining_modes():
    c = ModeId.s("c")
    s = FockState((A, c), {(1, 1): 1 / math.sqrt(2), (0, 0): 1 / math.sqrt(2)})
    out = measure_clicks(s, [(A, DetectorModel())])
    click = out[1]
    assert click.probability == pytest.approx(0.5)
    assert click.state.labels == ("c.S",)
    assert click.state.populations() == pytest.approx({(1,): 1.0})


def test_imperfect_detector_mixes_no_click_branch():
    c = ModeId.s("c")
    s = FockState((A, c), {(1, 1): 1 / math.sqrt(2), (0, 0): 1 / math.sqrt(2)})
    out = measure_clicks(MixedState.pure(s), [(A, DetectorModel(0.5))])
    assert out[0].probability == pytest.approx(0.75)
    assert out[0].state.populations() == pytest.approx({(0,): 2 / 3, (1,): 1 / 3})


def test_rejects_bad_detector_and_duplicates():
    with pytest.raises(ValueError):
        DetectorModel(1.2)
    with pytest.raises(ValueError):
        measure_clicks(FockState.vacuum((A,)), [(A, DetectorModel()), (A, DetectorModel())])


def test_threshold_only():
    assert DetectorModel().number_resolving is False
