"""Closed-form rates, fidelity bound and cavity enhancement for the PME repeater.

Units: seconds, kilometres, hertz. Cavity quantities are SI.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, fields
from typing import Any, Sequence

# Cited totals for the same parameter set; reference data, not recomputed.
REFERENCE_TOTALS_S = {
    "DLCZ": 650_000.0,
    "SPS": 15_300.0,
}
PAPER_TOTAL_TIME_S = 2251.0
SPEED_OF_LIGHT_VACUUM = 299_792_458.0  # m/s, for the cavity mode frequency

_PROBABILITIES = ("eta_p", "eta_s", "eta_e1", "eta_e2", "eta_d", "p_d")
_POSITIVE = ("r", "L_n", "L_att", "c")


@dataclass(frozen=True)
class ProtocolParams:
    eta_p: float = 1.0
    eta_s: float = 0.9
    eta_e1: float = 0.01
    eta_e2: float = 0.9
    eta_d: float = 0.9
    r: float = 50e6
    L_n: float = 2500.0
    L_att: float = 22.0
    n: int = 4
    c: float = 2.0e5
    c0: float = 0.0
    p_d: float = 5e-6

    def __post_init__(self):
        for name in _PROBABILITIES:
            value = getattr(self, name)
            if not 0 <= value <= 1:
                raise ValueError(f"{name}={value} must lie in [0, 1]")
        for name in _POSITIVE:
            value = getattr(self, name)
            if not value > 0 or not math.isfinite(value):
                raise ValueError(f"{name}={value} must be strictly positive and finite")
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 0:
            raise ValueError(f"n={self.n} must be a non-negative integer")
        object.__setattr__(self, "n", int(self.n))
        if self.c0 < 0:
            raise ValueError(f"c0={self.c0} must be non-negative")

    @property
    def L0(self) -> float:
        """Elementary link length ``L_n / 2^n``."""
        return self.L_n / 2**self.n

    def replace(self, **changes: Any) -> "ProtocolParams":
        return dataclasses.replace(self, **changes)

    def at_level(self, n: int) -> "ProtocolParams":
        """Same elementary link, ``n`` nesting levels (``L_n = L0 * 2^n``)."""
        return self.replace(n=n, L_n=self.L0 * 2**n)

    @classmethod
    def field_names(cls) -> tuple[str, ...]:
        return tuple(f.name for f in fields(cls))


def paper_params() -> ProtocolParams:
    """Reference parameter set (the bundled `paper` preset)."""
    return ProtocolParams()


@dataclass(frozen=True)
class CavityParams:
    rho_n: float  # atoms / m^3
    L_a: float  # m
    lambda_s: float  # m
    Q: float = 1.0
    N_a: float | None = None
    g_c: float | None = None  # rad/s
    gamma_s: float | None = None  # rad/s

    def __post_init__(self):
        if not self.Q > 0:
            raise ValueError("Q must be positive")
        if self.rho_n < 0 or self.L_a < 0 or not self.lambda_s > 0:
            raise ValueError("rho_n, L_a must be >= 0 and lambda_s > 0")

    @classmethod
    def from_free_space_factor(cls, factor: float, Q: float = 1.0, lambda_s: float = 1.5e-6) -> "CavityParams":
        """Pick ``rho_n`` (with ``L_a`` = 1 m) so that ``3 rho_n L_a lambda^2 / 4 pi^2 = factor``."""
        rho_n = factor * 4 * math.pi**2 / (3 * lambda_s**2)
        return cls(rho_n=rho_n, L_a=1.0, lambda_s=lambda_s, Q=Q)

    @property
    def k_s(self) -> float:
        return 2 * math.pi / self.lambda_s

    @property
    def omega_s(self) -> float:
        return SPEED_OF_LIGHT_VACUUM * self.k_s

    @property
    def kappa(self) -> float:
        """Cavity decay rate ``omega_s / Q``."""
        return self.omega_s / self.Q

    @property
    def free_space_factor(self) -> float:
        return 3 * self.rho_n * self.L_a / self.k_s**2


def free_space_snr(cav: CavityParams) -> float:
    """Free-space estimate ``3 rho_n L_a / k_s^2`` (~ optical depth)."""
    return cav.free_space_factor


def cavity_snr(cav: CavityParams) -> float:
    """Cavity-enhanced estimate ``3 rho_n L_a lambda_s^2 Q / 4 pi^2``."""
    return 3 * cav.rho_n * cav.L_a * cav.lambda_s**2 * cav.Q / (4 * math.pi**2)


def coupling_snr(cav: CavityParams) -> float:
    """``4 N_a |g_c|^2 / (kappa gamma_s)`` when the microscopic rates are known."""
    if cav.N_a is None or cav.g_c is None or cav.gamma_s is None:
        raise ValueError("N_a, g_c and gamma_s are required")
    return 4 * cav.N_a * abs(cav.g_c) ** 2 / (cav.kappa * cav.gamma_s)


@dataclass(frozen=True)
class RateBreakdown:
    p_r: float
    p_b: float
    p_i: float
    eta_t: float
    T_l: float
    T_tot: float
    delta_F: float

    def as_dict(self) -> dict[str, float]:
        return dataclasses.asdict(self)


def fiber_transmission(L0: float, L_att: float) -> float:
    """Transmission over half an elementary link, ``exp(-L0 / 2 L_att)``."""
    return math.exp(-L0 / (2 * L_att))


def local_success(p: ProtocolParams) -> float:
    return (p.eta_p * p.eta_s * p.eta_e1 * p.eta_d) ** 2 / 2


def local_success_from_eme(eta_e1: float, eta_d: float, c0: float) -> float:
    """Local success for two EME pairs with vacuum coefficient ``c0``.

    Equals `local_success` when ``1/(c0+1) = eta_p*eta_s``; the stated
    closed form has no separate ``c0`` dependence.
    """
    return (eta_e1 * eta_d / (c0 + 1)) ** 2 / 2


def link_success(p: ProtocolParams) -> float:
    return (p.eta_e2 * p.eta_d * fiber_transmission(p.L0, p.L_att)) ** 2 / 2


def swap_success(p: ProtocolParams) -> float:
    return (p.eta_e2 * p.eta_d) ** 2 / 2


def _total_time(p: ProtocolParams, p_r: float, p_b: float, p_i: float) -> float:
    if p_r == 0 or p_b == 0 or (p.n and p_i == 0):
        return math.inf
    return (p.L0 / p.c + 1 / (p.r * p_r)) / (p_b * p_i**p.n) * 1.5**p.n


def total_time(params: ProtocolParams) -> float:
    """Mean time to share a PME state over ``L_n``.

    ``(L0/c + 1/(r p_r)) / (p_b prod_{i=1..n} p_i) * (3/2)^n`` with the
    product running over all ``n`` swap levels. Infinite if any stage cannot
    succeed.
    """
    return _total_time(params, local_success(params), link_success(params), swap_success(params))


def fidelity_imperfection(n: int, p_d: float) -> float:
    """Dark-count infidelity ``2^(n+2) p_d``, saturating at 1."""
    if n < 0 or not 0 <= p_d <= 1:
        raise ValueError("need n >= 0 and p_d in [0, 1]")
    return min(1.0, math.ldexp(p_d, n + 2))


def success_probs(params: ProtocolParams) -> RateBreakdown:
    p_r = local_success(params)
    p_b = link_success(params)
    p_i = swap_success(params)
    return RateBreakdown(
        p_r=p_r,
        p_b=p_b,
        p_i=p_i,
        eta_t=fiber_transmission(params.L0, params.L_att),
        T_l=1 / (params.r * p_r) if p_r > 0 else math.inf,
        T_tot=_total_time(params, p_r, p_b, p_i),
        delta_F=fidelity_imperfection(params.n, params.p_d),
    )


@dataclass(frozen=True)
class SweepRow:
    axis: str
    value: float
    params: ProtocolParams
    breakdown: RateBreakdown


def sweep(params: ProtocolParams, axis: str, values: Sequence[float]) -> list[SweepRow]:
    """Evaluate `success_probs` with one field of ``params`` varied, in the given order.

    Sweeping ``n`` keeps ``L_n`` fixed (the elementary link shrinks).
    """
    if axis not in ProtocolParams.field_names():
        raise ValueError(f"unknown sweep axis {axis!r}; choose from {', '.join(ProtocolParams.field_names())}")
    values = list(values)
    if not values:
        raise ValueError("sweep needs at least one value")
    rows = []
    for v in values:
        p = params.replace(**{axis: v})
        rows.append(SweepRow(axis, v, p, success_probs(p)))
    return rows


@dataclass(frozen=True)
class Comparison:
    this_scheme: float
    references: dict[str, float]

    @property
    def speedups(self) -> dict[str, float]:
        return {k: v / self.this_scheme for k, v in self.references.items()}

    def as_dict(self) -> dict[str, float]:
        row = {"T_tot": self.this_scheme}
        for name, value in self.references.items():
            row[f"T_{name}"] = value
            row[f"speedup_vs_{name}"] = value / self.this_scheme
        return row


def reference_comparison(params: ProtocolParams) -> Comparison:
    return Comparison(total_time(params), dict(REFERENCE_TOTALS_S))
