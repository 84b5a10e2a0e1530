"""Spatiotemporal steering robustness benchmarks for simulated qubit-chain state transfer."""

__version__ = "0.1.0"

from .assemblage import (  # noqa: E402
    Assemblage,
    apply_channel,
    lhs_assemblage,
    pauli_assemblage,
    read_assemblage,
    satisfies_nsit,
    signaling_D,
    unitary_image,
    write_assemblage,
)
from .circuit import build_chain, ideal_transfer  # noqa: E402
from .noise import NoiseParams, noisy_transfer  # noqa: E402
from .steering import SdpReport, stsr, stsr_dual, stsr_primal  # noqa: E402
from .tomography import tomographic_assemblage  # noqa: E402

__all__ = [
    "Assemblage",
    "NoiseParams",
    "SdpReport",
    "apply_channel",
    "build_chain",
    "ideal_transfer",
    "lhs_assemblage",
    "noisy_transfer",
    "pauli_assemblage",
    "read_assemblage",
    "satisfies_nsit",
    "signaling_D",
    "stsr",
    "stsr_dual",
    "stsr_primal",
    "tomographic_assemblage",
    "unitary_image",
    "write_assemblage",
]
