"""Threshold (non photon-number-resolving) detection with exact click statistics."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

from .state import FockState, MixedState, ModeRef, _label, as_mixed


@dataclass(frozen=True)
class DetectorModel:
    efficiency: float = 1.0
    dark_count_prob: float = 0.0

    number_resolving = False

    def __post_init__(self):
        for name in ("efficiency", "dark_count_prob"):
            value = getattr(self, name)
            if not 0 <= value <= 1:
                raise ValueError(f"{name}={value} outside [0, 1]")

    def no_click_prob(self, n: int) -> float:
        return (1 - self.dark_count_prob) * (1 - self.efficiency) ** n

    def click_prob(self, n: int) -> float:
        """Probability of a click on an ``n``-photon Fock input."""
        return 1 - self.no_click_prob(n)


IDEAL = DetectorModel()


@dataclass(frozen=True)
class ClickOutcome:
    pattern: tuple[bool, ...]
    probability: float
    state: MixedState | None  # None when the pattern is impossible

    @property
    def bitmask(self) -> int:
        return sum(1 << i for i, c in enumerate(self.pattern) if c)


def measure_clicks(
    state: FockState | MixedState,
    detectors: Sequence[tuple[ModeRef, DetectorModel]],
) -> list[ClickOutcome]:
    """All ``2^D`` click patterns with exact probabilities and conditional states.

    Measured modes are removed from the post-measurement registry. Bit ``i``
    of a pattern's bitmask refers to ``detectors[i]``.
    """
    mixed = as_mixed(state)
    modes = [m for m, _ in detectors]
    labels = [_label(m) for m in modes]
    if len(set(labels)) != len(labels):
        raise ValueError(f"mode measured twice: {labels}")
    models = [d for _, d in detectors]
    total = mixed.total_weight()
    patterns = list(itertools.product((False, True), repeat=len(detectors)))
    parts: dict[tuple[bool, ...], list[tuple[float, FockState]]] = {p: [] for p in patterns}
    for weight, branch in mixed.branches:
        for occ, phi in branch.split(modes).items():
            # P(no click) per detector for this photon-number record
            q = [d.no_click_prob(n) for d, n in zip(models, occ)]
            for p in patterns:
                like = math.prod((1 - qi) if click else qi for qi, click in zip(q, p))
                if like > 0:
                    parts[p].append((weight / total * like, phi))
    out = []
    for p in patterns:
        prob = math.fsum(w * s.norm() ** 2 for w, s in parts[p])
        post = MixedState.from_unnormalized(parts[p]).merged() if prob > 0 else None
        if post is not None:
            post = post.normalized()
        out.append(ClickOutcome(p, prob, post))
    out.sort(key=lambda o: o.bitmask)
    return out
