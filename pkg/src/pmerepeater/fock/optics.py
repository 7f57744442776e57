"""Passive linear optics and excitation transfer on `FockState`s."""

from __future__ import annotations

import cmath
import math
from functools import lru_cache
from typing import Sequence

import numpy as np

from .state import (
    PRUNE_TOL,
    FockState,
    MixedState,
    ModeId,
    ModeKind,
    ModeRef,
    TruncationError,
    as_mixed,
)

SQRT1_2 = 1 / math.sqrt(2)


def _expand(occ: tuple[int, ...], columns: tuple[tuple[complex, ...], ...]) -> dict[tuple[int, ...], complex]:
    """Image of ``prod_j (a_j^dag)^n_j / sqrt(n_j!) |0>`` under ``a_j^dag -> sum_k U_kj a_k^dag``."""
    k = len(occ)
    poly: dict[tuple[int, ...], complex] = {(0,) * k: 1.0 + 0j}
    for j, n in enumerate(occ):
        col = columns[j]
        for _ in range(n):
            nxt: dict[tuple[int, ...], complex] = {}
            for mono, c in poly.items():
                for out, u in enumerate(col):
                    if u == 0:
                        continue
                    m = list(mono)
                    m[out] += 1
                    m = tuple(m)
                    nxt[m] = nxt.get(m, 0) + c * u
            poly = nxt
    scale = 1 / math.sqrt(math.prod(math.factorial(n) for n in occ))
    return {
        mono: c * scale * math.sqrt(math.prod(math.factorial(m) for m in mono))
        for mono, c in poly.items()
    }


def linear_transform(state: FockState, modes: Sequence[ModeRef], unitary) -> FockState:
    """Apply the passive transform ``a_j^dag -> sum_k U[k, j] a_k^dag`` on ``modes``.

    Raises `TruncationError` if a non-negligible amplitude lands above the
    truncation.
    """
    u = np.asarray(unitary, dtype=complex)
    idx = [state.index(m) for m in modes]
    if u.shape != (len(idx), len(idx)):
        raise ValueError(f"unitary shape {u.shape} does not match {len(idx)} modes")
    if len(set(idx)) != len(idx):
        raise ValueError("a mode appears twice in the transform")
    columns = tuple(tuple(complex(x) for x in u[:, j]) for j in range(len(idx)))
    cache: dict[tuple[int, ...], dict] = {}
    out: dict[tuple[int, ...], complex] = {}
    for occ, amp in state.amplitudes.items():
        sub = tuple(occ[i] for i in idx)
        if sub not in cache:
            cache[sub] = _expand(sub, columns)
        base = list(occ)
        for new_sub, c in cache[sub].items():
            for i, n in zip(idx, new_sub):
                base[i] = n
            key = tuple(base)
            out[key] = out.get(key, 0) + amp * c
    cap = state.truncation
    for key, amp in out.items():
        if abs(amp) > PRUNE_TOL and max(key) > cap:
            raise TruncationError(
                f"occupation {key} exceeds truncation {cap}; raise the truncation"
            )
    return FockState(state.modes, {k: v for k, v in out.items() if max(k) <= cap}, cap)


def beamsplitter_matrix(phase: float = 0.0) -> np.ndarray:
    """Columns are the images of ``a^dag`` and ``b^dag``.

    The output modes are ``(a + e^{i phase} b)/sqrt2`` and
    ``(a - e^{i phase} b)/sqrt2`` and keep the input labels.
    """
    e = cmath.exp(1j * phase)
    return SQRT1_2 * np.array([[1, e], [1, -e]], dtype=complex)


def apply_beamsplitter(state: FockState, a: ModeRef, b: ModeRef, phase: float = 0.0) -> FockState:
    return linear_transform(state, (a, b), beamsplitter_matrix(phase))


def polarization_pair(state: FockState, port: Sequence[ModeRef]) -> tuple[ModeId, ModeId]:
    h, v = (state.mode(m) for m in port)
    if h.kind is not ModeKind.PHOTONIC or v.kind is not ModeKind.PHOTONIC:
        raise ValueError("polarization ports need photonic modes")
    if (h.polarization.value, v.polarization.value) != ("H", "V"):
        raise ValueError(f"port must be ordered (H, V), got ({h}, {v})")
    return h, v


def to_diagonal(state: FockState, port: Sequence[ModeRef]) -> FockState:
    """Rotate a port so its (H, V) slots hold the |+>, |-> components."""
    polarization_pair(state, port)
    return linear_transform(state, port, beamsplitter_matrix(0.0))


def from_diagonal(state: FockState, port: Sequence[ModeRef]) -> FockState:
    # the rotation is its own inverse
    return to_diagonal(state, port)


def swap_polarization(state: FockState, port: Sequence[ModeRef]) -> FockState:
    """Half-wave plate exchanging H and V in one port."""
    polarization_pair(state, port)
    return linear_transform(state, port, np.array([[0, 1], [1, 0]], dtype=complex))


def apply_pbs(
    state: FockState,
    in_a: Sequence[ModeRef],
    in_b: Sequence[ModeRef],
    basis: str = "HV",
) -> FockState:
    """Polarizing beam splitter between two spatial ports.

    ``in_a``/``in_b`` are ``(H, V)`` mode pairs that are reused as the
    output ports. Basis "HV" transmits H and reflects V (V swaps ports);
    basis "diag" transmits |+> and reflects |->, and outputs are returned
    in the H/V slots again.
    """
    (ah, av), (bh, bv) = polarization_pair(state, in_a), polarization_pair(state, in_b)
    if basis == "HV":
        return linear_transform(state, (av, bv), np.array([[0, 1], [1, 0]], dtype=complex))
    if basis == "diag":
        state = to_diagonal(to_diagonal(state, (ah, av)), (bh, bv))
        state = linear_transform(state, (av, bv), np.array([[0, 1], [1, 0]], dtype=complex))
        return from_diagonal(from_diagonal(state, (ah, av)), (bh, bv))
    raise ValueError(f"unknown PBS basis {basis!r}")


@lru_cache(maxsize=None)
def _binomial_amp(n: int, k: int, eta: float) -> float:
    return math.sqrt(math.comb(n, k) * eta**k * (1 - eta) ** (n - k))


def transfer(
    state: FockState,
    source: ModeRef,
    target: ModeRef,
    eta: float,
    herald: ModeRef | None = None,
) -> FockState:
    """Move excitations from ``source`` into ``target`` with efficiency ``eta``.

    Each excitation transfers independently: ``|n> -> sum_k sqrt(C(n,k) eta^k
    (1-eta)^(n-k)) |n-k>|k>``, so unconverted excitations stay in ``source``.
    If ``herald`` is given it receives one excitation per transferred one
    (used for the T -> S conversion that emits a photon). Target modes must
    start empty.
    """
    if not 0 <= eta <= 1:
        raise ValueError(f"efficiency {eta} outside [0, 1]")
    si, ti = state.index(source), state.index(target)
    hi = state.index(herald) if herald is not None else None
    out: dict[tuple[int, ...], complex] = {}
    for occ, amp in state.amplitudes.items():
        if occ[ti] or (hi is not None and occ[hi]):
            raise ValueError(f"transfer target {target} must be empty")
        n = occ[si]
        for k in range(n + 1):
            c = _binomial_amp(n, k, eta)
            if c == 0:
                continue
            new = list(occ)
            new[si] = n - k
            new[ti] = k
            if hi is not None:
                new[hi] = k
            key = tuple(new)
            if k > state.truncation:
                raise TruncationError(f"transfer of {k} excitations exceeds truncation")
            out[key] = out.get(key, 0) + amp * c
    return FockState(state.modes, out, state.truncation)


def loss_mode_for(mode: ModeId) -> ModeId:
    return ModeId(f"{mode.label}~loss", ModeKind.PHOTONIC, mode.polarization or "H")


def apply_loss(state: FockState | MixedState, mode: ModeRef, eta: float) -> MixedState:
    """Transmissivity-``eta`` channel: beam splitter onto a fresh mode, then trace it out."""
    if not 0 <= eta <= 1:
        raise ValueError(f"transmissivity {eta} outside [0, 1]")
    mixed = as_mixed(state)
    if eta == 1:
        return mixed
    m = mixed.branches[0][1].mode(mode)
    anc = loss_mode_for(m)
    t, r = math.sqrt(eta), math.sqrt(1 - eta)
    u = np.array([[t, -r], [r, t]], dtype=complex)

    def lossy(s: FockState) -> FockState:
        return linear_transform(s.with_modes([anc]), (m, anc), u)

    return mixed.map(lossy).trace_out([anc])


def apply_phase(state: FockState | MixedState, mode: ModeRef, phi: float):
    if isinstance(state, MixedState):
        return state.map(lambda s: s.phase_shift(mode, phi))
    return state.phase_shift(mode, phi)
