"""Device noise: T1/T2 decoherence between gates and bit-flip readout error.

Decoherence follows the Lindblad generator with amplitude damping at rate
``1/T1`` and sigma_z dephasing at rate
``gamma_phi = (1/T2 - 1/(2 T1)) / 2``, so that coherences decay as
``exp(-t/T2)`` overall. The closed-form Kraus channels are the production
path; :func:`lindblad_integrate` integrates the master equation directly
and exists to cross-check them.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import linalg
from .assemblage import Assemblage, apply_channel
from .circuit import DEFAULT_DURATIONS_NS, apply_gate_to_state, build_chain
from .errors import DimMismatch, IntegrationUnstable, UnphysicalNoise

SIGMA_MINUS = np.array([[0, 1], [0, 0]], dtype=complex)  # |0><1|, decay toward |0>


def _as_tuple(v) -> tuple[float, ...]:
    if np.isscalar(v):
        return (float(v),)
    return tuple(float(t) for t in v)


@dataclass(frozen=True)
class NoiseParams:
    """Per-qubit coherence times (ns), gate durations (ns) and readout error.

    A single T1/T2 value applies to every qubit. ``spectator_decoherence``
    decides whether qubits outside a gate decohere during it.
    """

    t1_ns: tuple[float, ...] = (70_000.0,)
    t2_ns: tuple[float, ...] = (80_000.0,)
    durations_ns: Mapping[str, float] = field(default_factory=lambda: dict(DEFAULT_DURATIONS_NS))
    readout_gamma: float = 0.02
    spectator_decoherence: bool = True

    def __post_init__(self):
        t1, t2 = _as_tuple(self.t1_ns), _as_tuple(self.t2_ns)
        object.__setattr__(self, "t1_ns", t1)
        object.__setattr__(self, "t2_ns", t2)
        durations = dict(DEFAULT_DURATIONS_NS)
        durations.update({k: float(v) for k, v in dict(self.durations_ns).items()})
        object.__setattr__(self, "durations_ns", durations)
        if len(t1) != len(t2) and 1 not in (len(t1), len(t2)):
            raise UnphysicalNoise("t1_ns and t2_ns have different lengths")
        for k in range(max(len(t1), len(t2))):
            check_coherence_times(*self.qubit(k))
        if any(v < 0 for v in durations.values()):
            raise UnphysicalNoise("gate durations must be non-negative")
        if not 0 <= self.readout_gamma <= 0.5:
            raise UnphysicalNoise(f"readout error must lie in [0, 0.5], got {self.readout_gamma}")

    def qubit(self, k: int) -> tuple[float, float]:
        t1 = self.t1_ns[k] if len(self.t1_ns) > 1 else self.t1_ns[0]
        t2 = self.t2_ns[k] if len(self.t2_ns) > 1 else self.t2_ns[0]
        return t1, t2

    def covers(self, n: int) -> bool:
        return all(len(t) == 1 or len(t) >= n for t in (self.t1_ns, self.t2_ns))

    def to_dict(self) -> dict:
        return {
            "t1_ns": list(self.t1_ns),
            "t2_ns": list(self.t2_ns),
            "durations_ns": dict(sorted(self.durations_ns.items())),
            "readout_gamma": self.readout_gamma,
            "spectator_decoherence": self.spectator_decoherence,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "NoiseParams":
        known = {"t1_ns", "t2_ns", "durations_ns", "readout_gamma", "spectator_decoherence"}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown noise fields: {sorted(unknown)}")
        return cls(**dict(data))

    def fingerprint(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:12]


def noiseless(durations_ns: Mapping[str, float] | None = None) -> NoiseParams:
    return NoiseParams(
        t1_ns=(np.inf,), t2_ns=(np.inf,), durations_ns=durations_ns or {}, readout_gamma=0.0
    )


def check_coherence_times(t1: float, t2: float):
    if not (t1 > 0 and t2 > 0):
        raise UnphysicalNoise(f"T1 and T2 must be positive, got T1={t1}, T2={t2}")
    if t2 > 2 * t1:
        raise UnphysicalNoise(f"T2={t2} exceeds 2*T1={2 * t1}; the channel would not be CP")


def dephasing_rate(t1: float, t2: float) -> float:
    """Pure-dephasing rate multiplying the sigma_z dissipator."""
    return 0.5 * (1.0 / t2 - 0.5 / t1)


def idle_channel(t1: float, t2: float, t: float) -> list[np.ndarray]:
    """Kraus operators of free decoherence for ``t`` ns on one qubit.

    The excited population decays as ``exp(-t/T1)`` into ``|0>`` and the
    coherence as ``exp(-t/T2)``.
    """
    check_coherence_times(t1, t2)
    if t < 0:
        raise UnphysicalNoise(f"idle time must be non-negative, got {t}")
    p = -np.expm1(-t / t1)  # 1 - exp(-t/T1) without cancellation
    # remaining coherence factor after amplitude damping's exp(-t/2T1)
    lam = -0.5 * np.expm1(-2 * dephasing_rate(t1, t2) * t)
    ad = [
        np.array([[1, 0], [0, np.sqrt(1 - p)]], dtype=complex),
        np.array([[0, np.sqrt(p)], [0, 0]], dtype=complex),
    ]
    dp = [np.sqrt(1 - lam) * linalg.I2, np.sqrt(lam) * linalg.Z]
    return [d @ a for d in dp for a in ad]


def readout_kraus(gamma: float) -> list[np.ndarray]:
    if not 0 <= gamma <= 0.5:
        raise UnphysicalNoise(f"readout error must lie in [0, 0.5], got {gamma}")
    return [np.sqrt(1 - gamma) * linalg.I2, np.sqrt(gamma) * linalg.X]


def readout_channel(rho, gamma: float) -> np.ndarray:
    """Bit-flip before measurement: ``(1 - gamma) rho + gamma X rho X``."""
    if isinstance(rho, linalg.DensityMatrix):
        rho = rho.mat
    rho = linalg.as_matrix(rho)
    if rho.shape != (2, 2):
        raise DimMismatch("readout_channel acts on a single qubit")
    if not 0 <= gamma <= 0.5:
        raise UnphysicalNoise(f"readout error must lie in [0, 0.5], got {gamma}")
    return (1 - gamma) * rho + gamma * (linalg.X @ rho @ linalg.X)


def superoperator(kraus: Sequence[np.ndarray]) -> np.ndarray:
    """Tensor ``S[i, j, k, l]`` with ``E(rho)[i, j] = sum_kl S[i, j, k, l] rho[k, l]``."""
    K = np.stack([np.asarray(k, dtype=complex) for k in kraus])
    return np.einsum("eik,ejl->ijkl", K, K.conj())


def apply_local_superop(ops: np.ndarray, sup: np.ndarray, qubit: int, n: int) -> np.ndarray:
    """Apply a single-qubit superoperator to a stack ``(s, 2**n, 2**n)`` of operators."""
    s = ops.shape[0]
    t = ops.reshape((s,) + (2,) * (2 * n))
    t = np.tensordot(sup, t, axes=([2, 3], [1 + qubit, 1 + n + qubit]))
    t = np.moveaxis(t, [0, 1], [1 + qubit, 1 + n + qubit])
    return t.reshape(ops.shape)


def noisy_chain_kraus(n: int, theta: float, variant: str, noise: NoiseParams) -> list[np.ndarray]:
    """Kraus operators of the noisy sender-to-receiver channel, readout included."""
    if not noise.covers(n):
        raise UnphysicalNoise(f"noise parameters list fewer than {n} qubits")
    circuit = build_chain(n, theta, variant, durations=noise.durations_ns)
    dim = 2**n
    # matrix units |i><j| on the sender, every other qubit in |0>
    ops = np.zeros((4, dim, dim), dtype=complex)
    for i in range(2):
        for j in range(2):
            ops[2 * i + j, i * 2 ** (n - 1), j * 2 ** (n - 1)] = 1.0
    cache: dict = {}
    for g in circuit.gates:
        G = g.matrix()
        ops = np.stack([apply_gate_to_state(o, G, g.targets, n) for o in ops])
        ops = np.stack([apply_gate_to_state(o.conj().T, G, g.targets, n).conj().T for o in ops])
        if g.duration_ns <= 0:
            continue
        idle_qubits = range(n) if noise.spectator_decoherence else g.targets
        for q in idle_qubits:
            key = (noise.qubit(q), g.duration_ns)
            if key not in cache:
                cache[key] = superoperator(idle_channel(*noise.qubit(q), g.duration_ns))
            ops = apply_local_superop(ops, cache[key], q, n)
    reduced = [linalg.partial_trace(o, (2,) * n, [n - 1]) for o in ops]
    reduced = [readout_channel(r, noise.readout_gamma) for r in reduced]
    J = np.zeros((4, 4), dtype=complex)
    for i in range(2):
        for j in range(2):
            e = np.zeros((2, 2), dtype=complex)
            e[i, j] = 1.0
            J += np.kron(e, reduced[2 * i + j])
    return linalg.kraus_from_choi(J, 2)


def noisy_transfer(
    asm: Assemblage, n: int, theta: float, variant: str = "U", noise: NoiseParams | None = None
) -> Assemblage:
    """Transfer every member through the noisy chain and the readout channel.

    Per member: prepared state on qubit 0 (preparation is instantaneous), then
    for each block the ideal gate followed by idle decoherence for the block's
    duration, then reduction to qubit ``n-1`` and the bit-flip readout.
    """
    if asm.dim != 2:
        raise DimMismatch(f"chain transfer needs qubit members, got dimension {asm.dim}")
    noise = noise or NoiseParams()
    return apply_channel(asm, noisy_chain_kraus(n, theta, variant, noise))


# --- master-equation oracle ------------------------------------------------


def _local(op: np.ndarray, q: int, n: int) -> np.ndarray:
    return linalg.tensor(np.eye(2**q), op, np.eye(2 ** (n - q - 1)))


def lindblad_generator(n: int, noise: NoiseParams):
    """Return ``rho -> d rho / dt`` for free decoherence of ``n`` qubits."""
    terms = []
    for q in range(n):
        t1, t2 = noise.qubit(q)
        g1, g2 = 1.0 / t1, dephasing_rate(t1, t2)
        sm = _local(SIGMA_MINUS, q, n)
        sz = _local(linalg.Z, q, n)
        terms.append((g1, sm, sm.conj().T @ sm))
        terms.append((g2, sz, sz @ sz))

    def rhs(rho):
        out = np.zeros_like(rho)
        for g, L, LdL in terms:
            if g:
                out += 0.5 * g * (2 * L @ rho @ L.conj().T - LdL @ rho - rho @ LdL)
        return out

    return rhs


def lindblad_integrate(rho, noise: NoiseParams, t: float, dt: float) -> np.ndarray:
    """Fourth-order Runge-Kutta integration of the decoherence master equation.

    Raises:
        IntegrationUnstable: trace drifts by more than 1e-6.
    """
    if dt <= 0 or t < 0:
        raise ValueError("need dt > 0 and t >= 0")
    rho = np.array(linalg.as_matrix(rho), dtype=complex)
    n = int(round(np.log2(rho.shape[0])))
    if 2**n != rho.shape[0]:
        raise DimMismatch("lindblad_integrate expects an n-qubit operator")
    f = lindblad_generator(n, noise)
    tr0 = np.trace(rho)
    steps = int(np.ceil(t / dt - 1e-12))
    h = t / steps if steps else 0.0
    for _ in range(steps):
        k1 = f(rho)
        k2 = f(rho + 0.5 * h * k1)
        k3 = f(rho + 0.5 * h * k2)
        k4 = f(rho + h * k3)
        rho = rho + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        if abs(np.trace(rho) - tr0) > 1e-6:
            raise IntegrationUnstable(f"trace drifted to {np.trace(rho)} with step {h}")
    return rho
