"""Gate matrices and the n-qubit XY-chain transfer circuit.

Qubits are 0-based; qubit 0 is the sender and qubit ``n-1`` the receiver.
Two-qubit blocks are written in the ``|q_l q_{l+1}>`` basis with ``q_l`` the
most significant bit.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Mapping

import numpy as np
from scipy.linalg import expm

from . import linalg
from .assemblage import Assemblage, apply_channel
from .constants import MAX_QUBITS
from .errors import DimMismatch, InvalidChainLength

VARIANTS = ("V", "U")

# two-qubit block costs; used only for noise timing
CNOTS_PER_BLOCK = {"V": 4, "U": 3}
U3_PER_BLOCK = {"V": 3, "U": 3}

DEFAULT_DURATIONS_NS = {"u3": 100.0, "U": 700.0, "V": 900.0, "S": 0.0, "X": 100.0}


def u3_gate(delta: float, phi: float, xi: float) -> np.ndarray:
    """Generic single-qubit rotation ``u3(delta, phi, xi)``."""
    # half-angle entries: delta has period 4 pi, the phases 2 pi
    delta = float(np.mod(delta, 4 * np.pi))
    phi, xi = float(np.mod(phi, 2 * np.pi)), float(np.mod(xi, 2 * np.pi))
    c, s = np.cos(delta / 2), np.sin(delta / 2)
    return np.array(
        [
            [c, -np.exp(1j * xi) * s],
            [np.exp(1j * phi) * s, np.exp(1j * (xi + phi)) * c],
        ],
        dtype=complex,
    )


def s_gate() -> np.ndarray:
    return np.diag([1, 1j]).astype(complex)


def xy_hamiltonian(J: float = 0.5) -> np.ndarray:
    """``J (s+ s- + s- s+)`` on two qubits, with hbar = 1."""
    sp = np.array([[0, 1], [0, 0]], dtype=complex)  # |0><1| raises toward |0>
    sm = sp.conj().T
    return J * (np.kron(sp, sm) + np.kron(sm, sp))


def v_gate(theta: float) -> np.ndarray:
    """XY evolution ``exp(-i H theta)`` at ``J = 1/2`` in closed form."""
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array(
        [
            [1, 0, 0, 0],
            [0, c, -1j * s, 0],
            [0, -1j * s, c, 0],
            [0, 0, 0, 1],
        ],
        dtype=complex,
    )


def v_gate_expm(theta: float) -> np.ndarray:
    return expm(-1j * theta * xy_hamiltonian(0.5))


def u_gate(theta: float) -> np.ndarray:
    """Reduced-CNOT replacement for :func:`v_gate`, valid when the target starts in ``|0>``."""
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array(
        [
            [1, 0, 0, 0],
            [0, 0, -1j * s, c],
            [0, 0, c, -1j * s],
            [0, 1, 0, 0],
        ],
        dtype=complex,
    )


def pauli_prep_angles(a: int, x: int) -> tuple[float, float, float]:
    """``u3`` angles turning ``|0>`` into eigenstate ``a`` (0 -> +1) of Pauli ``x`` (0=X, 1=Y, 2=Z)."""
    table = {
        (0, 0): (np.pi / 2, 0.0, np.pi),
        (1, 0): (np.pi / 2, np.pi, np.pi),
        (0, 1): (np.pi / 2, np.pi / 2, np.pi),
        (1, 1): (np.pi / 2, -np.pi / 2, np.pi),
        (0, 2): (0.0, 0.0, 0.0),
        (1, 2): (np.pi, 0.0, np.pi),
    }
    return table[a, x]


@dataclass(frozen=True)
class GateOp:
    name: str
    params: tuple[float, ...]
    targets: tuple[int, ...]
    duration_ns: float = 0.0
    cnot_count: int = 0

    def matrix(self) -> np.ndarray:
        if self.name == "U3":
            return u3_gate(*self.params)
        if self.name == "V":
            return v_gate(self.params[0])
        if self.name == "U":
            return u_gate(self.params[0])
        if self.name == "S":
            return s_gate()
        if self.name == "X":
            return linalg.X.copy()
        raise ValueError(f"unknown gate {self.name!r}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["params"] = list(self.params)
        d["targets"] = list(self.targets)
        return d


@dataclass(frozen=True)
class ChainCircuit:
    n: int
    theta: float
    variant: str
    gates: tuple[GateOp, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "theta": self.theta,
            "variant": self.variant,
            "gates": [g.to_dict() for g in self.gates],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    def unitary(self) -> np.ndarray:
        """Full ``2**n`` unitary; tests only, the simulator applies blocks locally."""
        U = np.eye(2**self.n, dtype=complex)
        for g in self.gates:
            U = embed(g.matrix(), g.targets, self.n) @ U
        return U

    @property
    def duration_ns(self) -> float:
        return sum(g.duration_ns for g in self.gates)


def normalize_variant(variant: str) -> str:
    v = str(variant).upper()
    if v not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")
    return v


def build_chain(
    n: int,
    theta: float,
    variant: str = "U",
    durations: Mapping[str, float] | None = None,
) -> ChainCircuit:
    """Transfer circuit with ``n - 1`` blocks on ``(l, l+1)``, ascending ``l``.

    No decoding gate is appended.
    """
    if not isinstance(n, (int, np.integer)) or not 2 <= n <= MAX_QUBITS:
        raise InvalidChainLength(f"chain length must be in 2..{MAX_QUBITS}, got {n}")
    variant = normalize_variant(variant)
    dur = dict(DEFAULT_DURATIONS_NS)
    if durations:
        dur.update(durations)
    gates = tuple(
        GateOp(variant, (float(theta),), (l, l + 1), float(dur[variant]), CNOTS_PER_BLOCK[variant])
        for l in range(n - 1)
    )
    return ChainCircuit(int(n), float(theta), variant, gates)


def decoding_unitary(n: int) -> np.ndarray:
    """``S^(n-1)``, undoing the phase picked up by perfect transfer over ``n`` qubits."""
    return np.linalg.matrix_power(s_gate(), n - 1)


def embed(gate: np.ndarray, targets, n: int) -> np.ndarray:
    """Lift a gate on adjacent ``targets`` to the full ``n``-qubit space."""
    targets = tuple(targets)
    k = len(targets)
    if gate.shape != (2**k, 2**k):
        raise DimMismatch(f"gate of shape {gate.shape} does not act on {k} qubits")
    if targets != tuple(range(targets[0], targets[0] + k)):
        raise ValueError("embed supports contiguous ascending targets only")
    lo = targets[0]
    return linalg.tensor(np.eye(2**lo), gate, np.eye(2 ** (n - lo - k)))


def apply_gate_to_state(psi: np.ndarray, gate: np.ndarray, targets, n: int) -> np.ndarray:
    """Apply a gate on ``targets`` to an ``n``-qubit state vector (or a stack in the last axis)."""
    k = len(targets)
    t = psi.reshape((2,) * n + psi.shape[1:])
    g = gate.reshape((2,) * (2 * k))
    t = np.tensordot(g, t, axes=(list(range(k, 2 * k)), list(targets)))
    t = np.moveaxis(t, list(range(k)), list(targets))
    return t.reshape(psi.shape)


def apply_gate_to_density(rho: np.ndarray, gate: np.ndarray, targets, n: int) -> np.ndarray:
    """``G rho G^dagger`` with ``G`` acting on ``targets`` of an ``n``-qubit operator."""
    tmp = apply_gate_to_state(rho, gate, targets, n)
    return apply_gate_to_state(tmp.conj().T, gate, targets, n).conj().T


def chain_kraus(circuit: ChainCircuit) -> list[np.ndarray]:
    """Kraus operators of the ideal sender-to-receiver channel.

    The sender qubit carries the input; all other qubits start in ``|0>``.
    Column ``i`` of the stacked output is the chain applied to ``|i 0...0>``.
    """
    n = circuit.n
    psi = np.zeros((2**n, 2), dtype=complex)
    psi[0, 0] = 1.0
    psi[2 ** (n - 1), 1] = 1.0
    for g in circuit.gates:
        psi = apply_gate_to_state(psi, g.matrix(), g.targets, n)
    # psi[(env, out), i] -> K_env[out, i]
    t = psi.reshape(2 ** (n - 1), 2, 2)
    return [t[e] for e in range(t.shape[0]) if np.any(np.abs(t[e]) > 1e-15)]


def ideal_transfer(asm: Assemblage, n: int, theta: float, variant: str = "U") -> Assemblage:
    """Send every member from qubit 0 to qubit ``n-1`` through the noiseless chain."""
    if asm.dim != 2:
        raise DimMismatch(f"chain transfer needs qubit members, got dimension {asm.dim}")
    return apply_channel(asm, chain_kraus(build_chain(n, theta, variant)))
