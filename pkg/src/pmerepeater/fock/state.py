"""Sparse Fock-space states over labeled bosonic modes.

A `FockState` is a pure state stored as a map from occupation vectors to
complex amplitudes. A `MixedState` is an ensemble of pure states, which is
all the mixtures in this protocol need (vacuum admixture, loss, detection).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Sequence

PRUNE_TOL = 1e-15
NORM_TOL = 1e-12
DEFAULT_TRUNCATION = 2


class TruncationError(ValueError):
    """An operation would populate a mode above the truncation."""


class ModeKind(str, Enum):
    ATOMIC_T = "atomic-T"
    ATOMIC_S = "atomic-S"
    PHOTONIC = "photonic"


class Polarization(str, Enum):
    H = "H"
    V = "V"


@dataclass(frozen=True)
class ModeId:
    label: str
    kind: ModeKind
    polarization: Polarization | None = None

    def __post_init__(self):
        if not self.label:
            raise ValueError("mode label must be non-empty")
        kind = ModeKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if self.polarization is not None:
            object.__setattr__(self, "polarization", Polarization(self.polarization))
        if (kind is ModeKind.PHOTONIC) != (self.polarization is not None):
            raise ValueError(
                f"mode {self.label!r}: polarization is required for photonic "
                "modes and forbidden for atomic ones"
            )

    @classmethod
    def t(cls, ensemble: str) -> "ModeId":
        return cls(f"{ensemble}.T", ModeKind.ATOMIC_T)

    @classmethod
    def s(cls, ensemble: str) -> "ModeId":
        return cls(f"{ensemble}.S", ModeKind.ATOMIC_S)

    @classmethod
    def photon(cls, name: str, polarization: str | Polarization = Polarization.H) -> "ModeId":
        pol = Polarization(polarization)
        return cls(f"{name}.{pol.value}", ModeKind.PHOTONIC, pol)

    def __str__(self) -> str:
        return self.label


ModeRef = ModeId | str


def _check_registry(modes: Sequence[ModeId]) -> tuple[ModeId, ...]:
    modes = tuple(modes)
    labels = [m.label for m in modes]
    if len(set(labels)) != len(labels):
        dup = sorted({x for x in labels if labels.count(x) > 1})
        raise ValueError(f"duplicate mode labels: {dup}")
    return modes


@dataclass(frozen=True, eq=False)
class FockState:
    """Pure state ``sum_n c_n |n>`` over an ordered mode registry.

    Instances are treated as immutable; every operation returns a new state.
    """

    modes: tuple[ModeId, ...]
    amplitudes: Mapping[tuple[int, ...], complex]
    truncation: int = DEFAULT_TRUNCATION
    _index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        modes = _check_registry(self.modes)
        object.__setattr__(self, "modes", modes)
        if self.truncation < 1:
            raise ValueError("truncation must be >= 1")
        clean: dict[tuple[int, ...], complex] = {}
        for occ, amp in self.amplitudes.items():
            occ = tuple(int(k) for k in occ)
            if len(occ) != len(modes):
                raise ValueError(f"occupation {occ} does not match {len(modes)} modes")
            if abs(amp) <= PRUNE_TOL:
                continue
            if min(occ, default=0) < 0:
                raise ValueError(f"negative occupation {occ}")
            if max(occ, default=0) > self.truncation:
                raise TruncationError(
                    f"occupation {occ} exceeds truncation {self.truncation}"
                )
            clean[occ] = complex(amp)
        object.__setattr__(self, "amplitudes", clean)
        object.__setattr__(self, "_index", {m.label: i for i, m in enumerate(modes)})

    # construction

    @classmethod
    def vacuum(cls, modes: Sequence[ModeId], truncation: int = DEFAULT_TRUNCATION) -> "FockState":
        modes = tuple(modes)
        return cls(modes, {(0,) * len(modes): 1.0}, truncation)

    @classmethod
    def from_terms(
        cls,
        modes: Sequence[ModeId],
        terms: Mapping[Mapping[ModeRef, int] | tuple[int, ...], complex] | Iterable,
        truncation: int = DEFAULT_TRUNCATION,
        normalize: bool = True,
    ) -> "FockState":
        """Build from ``{occupation: amplitude}``.

        Occupations may be full tuples or ``{mode: count}`` dicts (missing
        modes are empty). Dict keys are unhashable, so pass an iterable of
        ``(occupation, amplitude)`` pairs in that case.
        """
        modes = tuple(modes)
        index = {m.label: i for i, m in enumerate(modes)}
        items = terms.items() if isinstance(terms, Mapping) else terms
        amps: dict[tuple[int, ...], complex] = {}
        for occ, amp in items:
            if isinstance(occ, Mapping):
                vec = [0] * len(modes)
                for ref, count in occ.items():
                    vec[index[_label(ref)]] = count
                occ = tuple(vec)
            amps[tuple(occ)] = amps.get(tuple(occ), 0) + amp
        state = cls(modes, amps, truncation)
        return state.normalized() if normalize else state

    # basic queries

    def index(self, mode: ModeRef) -> int:
        try:
            return self._index[_label(mode)]
        except KeyError:
            raise KeyError(f"mode {_label(mode)!r} not in registry") from None

    def mode(self, label: ModeRef) -> ModeId:
        return self.modes[self.index(label)]

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(m.label for m in self.modes)

    def norm(self) -> float:
        return math.sqrt(sum(abs(a) ** 2 for a in self.amplitudes.values()))

    def normalized(self) -> "FockState":
        nrm = self.norm()
        if nrm == 0:
            raise ValueError("cannot normalize the zero vector")
        return self._replace({k: v / nrm for k, v in self.amplitudes.items()})

    def is_normalized(self, tol: float = NORM_TOL) -> bool:
        return abs(self.norm() - 1.0) <= tol

    def amplitude(self, occupation: Mapping[ModeRef, int] | tuple[int, ...]) -> complex:
        if isinstance(occupation, Mapping):
            vec = [0] * len(self.modes)
            for ref, count in occupation.items():
                vec[self.index(ref)] = count
            occupation = tuple(vec)
        return self.amplitudes.get(tuple(occupation), 0j)

    def max_occupation(self) -> int:
        return max((max(k, default=0) for k in self.amplitudes), default=0)

    def excitations(self, modes: Iterable[ModeRef] | None = None) -> set[int]:
        """Total excitation numbers present in the support (over ``modes``)."""
        idx = range(len(self.modes)) if modes is None else [self.index(m) for m in modes]
        return {sum(occ[i] for i in idx) for occ in self.amplitudes}

    # registry manipulation

    def _replace(self, amplitudes, modes=None) -> "FockState":
        return FockState(self.modes if modes is None else tuple(modes), amplitudes, self.truncation)

    def with_modes(self, extra: Sequence[ModeId]) -> "FockState":
        """Append empty modes to the registry."""
        extra = tuple(extra)
        pad = (0,) * len(extra)
        return self._replace({k + pad: v for k, v in self.amplitudes.items()}, self.modes + extra)

    def reordered(self, order: Sequence[ModeRef]) -> "FockState":
        perm = [self.index(m) for m in order]
        if sorted(perm) != list(range(len(self.modes))):
            raise ValueError("reorder must be a permutation of the registry")
        modes = [self.modes[i] for i in perm]
        return self._replace({tuple(k[i] for i in perm): v for k, v in self.amplitudes.items()}, modes)

    def tensor(self, other: "FockState") -> "FockState":
        amps = {
            k1 + k2: v1 * v2
            for k1, v1 in self.amplitudes.items()
            for k2, v2 in other.amplitudes.items()
        }
        return FockState(
            self.modes + other.modes, amps, max(self.truncation, other.truncation)
        )

    def split(self, modes: Sequence[ModeRef]) -> dict[tuple[int, ...], "FockState"]:
        """Decompose ``|psi> = sum_m |m>_modes (x) |phi_m>``.

        Returns unnormalized ``phi_m`` over the remaining modes, keyed by the
        occupation ``m`` of ``modes`` (in the given order).
        """
        picked = [self.index(m) for m in modes]
        if len(set(picked)) != len(picked):
            raise ValueError("mode listed twice")
        chosen = set(picked)
        rest = [i for i in range(len(self.modes)) if i not in chosen]
        rest_modes = [self.modes[i] for i in rest]
        parts: dict[tuple[int, ...], dict[tuple[int, ...], complex]] = {}
        for occ, amp in self.amplitudes.items():
            key = tuple(occ[i] for i in picked)
            parts.setdefault(key, {})[tuple(occ[i] for i in rest)] = amp
        return {k: FockState(tuple(rest_modes), v, self.truncation) for k, v in parts.items()}

    def drop_vacuum_modes(self, modes: Sequence[ModeRef]) -> "FockState":
        """Remove modes that are empty on the whole support."""
        parts = self.split(modes)
        if set(parts) != {(0,) * len(modes)}:
            raise ValueError(f"modes {[_label(m) for m in modes]} are not in vacuum")
        return parts[(0,) * len(modes)]

    def phase_shift(self, mode: ModeRef, phi: float) -> "FockState":
        """Apply ``exp(i phi a^dagger a)`` to one mode."""
        i = self.index(mode)
        return self._replace({k: v * cmath.exp(1j * phi * k[i]) for k, v in self.amplitudes.items()})

    # comparison

    def _aligned(self, other: "FockState") -> "FockState":
        if set(self.labels) != set(other.labels):
            raise ValueError(
                f"mode registries differ: {sorted(self.labels)} vs {sorted(other.labels)}"
            )
        return other if other.labels == self.labels else other.reordered(self.labels)

    def inner(self, other: "FockState") -> complex:
        """``<self|other>``, matching modes by label."""
        other = self._aligned(other)
        return sum(
            (v.conjugate() * other.amplitudes.get(k, 0) for k, v in self.amplitudes.items()),
            0j,
        )

    def fidelity(self, other: "FockState") -> float:
        return abs(self.inner(other)) ** 2 / (self.norm() ** 2 * other.norm() ** 2)

    def allclose(self, other: "FockState", atol: float = 1e-12) -> bool:
        other = self._aligned(other)
        keys = set(self.amplitudes) | set(other.amplitudes)
        return all(abs(self.amplitudes.get(k, 0) - other.amplitudes.get(k, 0)) <= atol for k in keys)

    def __repr__(self) -> str:
        terms = ", ".join(
            f"{''.join(map(str, k))}: {v:.4g}" for k, v in sorted(self.amplitudes.items())
        )
        return f"FockState([{', '.join(self.labels)}], {{{terms}}})"


def _label(ref: ModeRef) -> str:
    return ref.label if isinstance(ref, ModeId) else ref


@dataclass(frozen=True, eq=False)
class MixedState:
    """Ensemble ``rho = sum_k w_k |psi_k><psi_k|`` of normalized pure states."""

    branches: tuple[tuple[float, FockState], ...]

    def __post_init__(self):
        branches = tuple((float(w), s) for w, s in self.branches if w > 0)
        if not branches:
            raise ValueError("mixed state has no branch with positive weight")
        labels = set(branches[0][1].labels)
        for w, s in branches:
            if set(s.labels) != labels:
                raise ValueError("all branches must share one mode registry")
            if not s.is_normalized(1e-9):
                raise ValueError("branch states must be normalized")
        object.__setattr__(self, "branches", branches)

    @classmethod
    def pure(cls, state: FockState) -> "MixedState":
        return cls(((1.0, state.normalized()),))

    @classmethod
    def from_unnormalized(cls, parts: Iterable[tuple[float, FockState]]) -> "MixedState":
        """Build from ``(weight, unnormalized state)`` pairs, folding norms into weights."""
        out = []
        for w, s in parts:
            nrm2 = s.norm() ** 2
            if w * nrm2 > 0:
                out.append((w * nrm2, s.normalized()))
        return cls(tuple(out))

    @property
    def modes(self) -> tuple[ModeId, ...]:
        return self.branches[0][1].modes

    @property
    def labels(self) -> tuple[str, ...]:
        return self.branches[0][1].labels

    def total_weight(self) -> float:
        return math.fsum(w for w, _ in self.branches)

    def normalized(self) -> "MixedState":
        total = self.total_weight()
        return MixedState(tuple((w / total, s) for w, s in self.branches))

    def map(self, fn) -> "MixedState":
        """Apply a pure-state map to every branch."""
        return MixedState(tuple((w, fn(s)) for w, s in self.branches))

    def tensor(self, other: "MixedState | FockState") -> "MixedState":
        other = as_mixed(other)
        return MixedState(
            tuple((w1 * w2, s1.tensor(s2)) for w1, s1 in self.branches for w2, s2 in other.branches)
        )

    def trace_out(self, modes: Sequence[ModeRef]) -> "MixedState":
        parts = []
        for w, s in self.branches:
            parts.extend((w, phi) for phi in s.split(modes).values())
        return MixedState.from_unnormalized(parts).merged()

    def fidelity(self, target: FockState) -> float:
        """``<t|rho|t>`` for a pure target; the mixture is normalized first."""
        total = self.total_weight()
        return math.fsum(w * target.fidelity(s) for w, s in self.branches) / total

    def merged(self, tol: float = 1e-12) -> "MixedState":
        """Combine branches whose states coincide up to a global phase."""
        kept: list[list] = []
        for w, s in self.branches:
            for entry in kept:
                if len(entry[1].amplitudes) == len(s.amplitudes) and entry[1].fidelity(s) > 1 - tol:
                    entry[0] += w
                    break
            else:
                kept.append([w, s])
        return MixedState(tuple((w, s) for w, s in kept))

    def populations(self) -> dict[tuple[int, ...], float]:
        """Diagonal of rho in the occupation basis of the registry."""
        out: dict[tuple[int, ...], float] = {}
        for w, s in self.branches:
            for k, v in s.amplitudes.items():
                out[k] = out.get(k, 0.0) + w * abs(v) ** 2
        return out

    def __len__(self) -> int:
        return len(self.branches)


def as_mixed(state: FockState | MixedState) -> MixedState:
    return MixedState.pure(state) if isinstance(state, FockState) else state
