"""Finite-shot single-qubit Pauli tomography.

Counts are drawn from a counter-based generator (Philox) seeded by the run
seed plus a per-task ``substream`` key, so results do not depend on the
order in which members are processed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import linalg
from .assemblage import Assemblage
from .errors import IncompleteTomography, InvalidState

BASES = ("X", "Y", "Z")
METHODS = ("linear",)  # "mle" is reserved for a maximum-likelihood backend


def substream_rng(seed: int, substream: Sequence[int] = ()) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed) % 2**64, spawn_key=tuple(int(k) for k in substream))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class ShotCounts:
    basis: str
    shots: int
    counts: dict = field(default_factory=dict)  # {+1: n_plus, -1: n_minus}
    seed: int | None = None
    substream: tuple[int, ...] = ()

    def __post_init__(self):
        if self.basis not in BASES:
            raise ValueError(f"basis must be one of {BASES}, got {self.basis!r}")
        counts = {int(k): int(v) for k, v in self.counts.items()}
        if set(counts) - {1, -1} or any(v < 0 for v in counts.values()):
            raise ValueError(f"counts must map +1/-1 to non-negative integers, got {counts}")
        counts = {1: counts.get(1, 0), -1: counts.get(-1, 0)}
        if counts[1] + counts[-1] != self.shots or self.shots < 1:
            raise ValueError(f"counts {counts} do not sum to shots={self.shots}")
        object.__setattr__(self, "counts", counts)

    @property
    def expectation(self) -> float:
        return (self.counts[1] - self.counts[-1]) / self.shots

    def to_dict(self) -> dict:
        return {
            "basis": self.basis,
            "shots": self.shots,
            "counts": {"+1": self.counts[1], "-1": self.counts[-1]},
            "seed": self.seed,
            "substream": list(self.substream),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ShotCounts":
        c = data["counts"]
        return cls(
            basis=data["basis"],
            shots=int(data["shots"]),
            counts={1: c["+1"], -1: c["-1"]},
            seed=data.get("seed"),
            substream=tuple(data.get("substream", ())),
        )


def plus_probability(rho, basis: str) -> float:
    P = linalg.PAULIS[basis]
    return float(np.real(np.trace(0.5 * (linalg.I2 + P) @ rho)))


def sample_counts(
    rho,
    basis: str,
    shots: int,
    seed: int,
    substream: Sequence[int] = (),
) -> ShotCounts:
    """Measure ``rho`` ``shots`` times in a Pauli basis."""
    if isinstance(rho, linalg.DensityMatrix):
        rho = rho.mat
    rho = linalg.as_matrix(rho)
    if rho.shape != (2, 2):
        raise InvalidState("sample_counts expects a single-qubit state")
    if shots < 1:
        raise ValueError("shots must be positive")
    p = plus_probability(rho, basis)
    if not -1e-9 <= p <= 1 + 1e-9:
        raise InvalidState(f"outcome probability {p} outside [0, 1]")
    rng = substream_rng(seed, substream)
    n_plus = int(rng.binomial(shots, min(max(p, 0.0), 1.0)))
    return ShotCounts(basis, shots, {1: n_plus, -1: shots - n_plus}, int(seed), tuple(substream))


def project_bloch(r: np.ndarray) -> np.ndarray:
    """Nearest physical Bloch vector: rescale onto the unit sphere if outside."""
    r = np.asarray(r, dtype=float)
    norm = float(np.linalg.norm(r))
    return r / norm if norm > 1 else r


def _check_method(method: str):
    if method not in METHODS:
        raise NotImplementedError(f"reconstruction method {method!r} not available; have {METHODS}")


def reconstruct_state(counts: Iterable[ShotCounts], method: str = "linear") -> np.ndarray:
    """Linear-inversion estimate projected to the nearest density matrix.

    For one qubit the Frobenius-nearest unit-trace PSD matrix to
    ``(I + r.sigma)/2`` with ``|r| > 1`` is the one with ``r/|r|``.
    """
    _check_method(method)
    by_basis = {c.basis: c for c in counts}
    missing = [b for b in BASES if b not in by_basis]
    if missing:
        raise IncompleteTomography(f"no counts for basis {', '.join(missing)}")
    r = np.array([by_basis[b].expectation for b in BASES])
    return linalg.from_bloch(project_bloch(r))


def tomographic_assemblage(
    asm: Assemblage,
    shots: int,
    seed: int,
    probabilities: np.ndarray | None = None,
    method: str = "linear",
) -> Assemblage:
    """Re-estimate every conditional state of ``asm`` from sampled counts.

    Each member is scaled back by its known preparation probability, by
    default the member's exact trace. Member ``(a, x)`` measured in basis
    ``b`` uses substream ``(x, a, b)``.
    """
    _check_method(method)
    if asm.dim != 2:
        raise InvalidState("tomography is single-qubit only")
    probs = asm.probabilities() if probabilities is None else np.asarray(probabilities, float)
    cond = asm.conditional_states()
    out = np.zeros_like(asm.members)
    for x in range(asm.settings):
        for a in range(asm.outcomes):
            if probs[x, a] <= 0:
                continue
            counts = [
                sample_counts(cond[x, a], b, shots, seed, (x, a, k)) for k, b in enumerate(BASES)
            ]
            out[x, a] = probs[x, a] * reconstruct_state(counts, method)
    return Assemblage(out)
