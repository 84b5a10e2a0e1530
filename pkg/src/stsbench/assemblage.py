"""Assemblages: the indexed family of subnormalized states steered on Bob's side.

Labels are 0-based in memory: ``members[x, a]`` holds the member for setting
``x`` and outcome ``a``. The JSON format uses 1-based labels; only
:func:`to_json_dict` and :func:`from_json_dict` translate between the two.
"""

from __future__ import annotations

import itertools
import json
from pathlib import Path
from typing import Sequence

import numpy as np

from . import linalg
from .constants import (
    ASSEMBLAGE_TRACE_TOL,
    HERMITICITY_TOL,
    KRAUS_TOL,
    NSIT_TOL,
    PSD_TOL,
)
from .errors import (
    InvalidChannel,
    InvalidSetting,
    NeedTwoSettings,
    ParseError,
    ValidationError,
)


class Assemblage:
    """Immutable assemblage ``{rho_{a|x}}`` with ``m`` settings and ``q`` outcomes.

    Args:
        members: array-like of shape ``(m, q, d, d)``.
        validate: check hermiticity, positivity and per-setting total trace.
    """

    __slots__ = ("_members",)

    def __init__(self, members, validate: bool = True):
        arr = np.array(members, dtype=complex)
        if arr.ndim != 4 or arr.shape[2] != arr.shape[3]:
            raise ValidationError("shape", f"expected (m, q, d, d), got {arr.shape}")
        if min(arr.shape) < 1:
            raise ValidationError("shape", f"empty dimension in {arr.shape}")
        if validate:
            _validate_members(arr)
        arr.flags.writeable = False
        self._members = arr

    @classmethod
    def from_members(cls, members: dict, settings: int, outcomes: int) -> "Assemblage":
        """Build from a ``{(a, x): matrix}`` mapping with 0-based labels."""
        d = np.asarray(next(iter(members.values()))).shape[0]
        arr = np.zeros((settings, outcomes, d, d), dtype=complex)
        for x in range(settings):
            for a in range(outcomes):
                arr[x, a] = members[a, x]
        return cls(arr)

    @property
    def members(self) -> np.ndarray:
        return self._members

    @property
    def settings(self) -> int:
        return self._members.shape[0]

    @property
    def outcomes(self) -> int:
        return self._members.shape[1]

    @property
    def dim(self) -> int:
        return self._members.shape[2]

    def member(self, a: int, x: int) -> np.ndarray:
        self._check_setting(x)
        if not 0 <= a < self.outcomes:
            raise InvalidSetting(f"outcome {a} outside 0..{self.outcomes - 1}")
        return self._members[x, a]

    def probabilities(self) -> np.ndarray:
        """``P(a|x)`` as an ``(m, q)`` array."""
        return np.real(np.trace(self._members, axis1=2, axis2=3))

    def conditional_states(self) -> np.ndarray:
        p = self.probabilities()
        out = np.zeros_like(self._members)
        nz = p > 0
        out[nz] = self._members[nz] / p[nz][:, None, None]
        return out

    def _check_setting(self, x: int):
        if not 0 <= x < self.settings:
            raise InvalidSetting(f"setting {x} outside 0..{self.settings - 1}")

    def __eq__(self, other):
        if not isinstance(other, Assemblage):
            return NotImplemented
        return self._members.shape == other._members.shape and np.array_equal(
            self._members, other._members
        )

    def allclose(self, other: "Assemblage", atol: float) -> bool:
        return self._members.shape == other._members.shape and bool(
            np.max(np.abs(self._members - other._members)) <= atol
        )

    def __repr__(self):
        return f"Assemblage(settings={self.settings}, outcomes={self.outcomes}, dim={self.dim})"


def _validate_members(arr: np.ndarray):
    m, q, d, _ = arr.shape
    for x, a in itertools.product(range(m), range(q)):
        mem = arr[x, a]
        err = linalg.hermiticity_error(mem)
        if err > HERMITICITY_TOL:
            raise ValidationError(
                "hermiticity", f"member (a={a + 1}, x={x + 1}) has |M - M^dagger| = {err:.3e}"
            )
        lo = linalg.min_eig(mem)
        if lo < -PSD_TOL:
            raise ValidationError(
                "positive semidefinite",
                f"member (a={a + 1}, x={x + 1}) has min eigenvalue {lo:.3e}",
            )
    totals = np.real(np.trace(arr.sum(axis=1), axis1=1, axis2=2))
    for x, t in enumerate(totals):
        if abs(t - 1) > ASSEMBLAGE_TRACE_TOL:
            raise ValidationError(
                "total probability", f"marginal of setting x={x + 1} has trace {t:.12g}"
            )


def pauli_assemblage() -> Assemblage:
    """Uniform assemblage of the six Pauli eigenstates, ``P(a|x) = 1/2``.

    Setting order is X, Y, Z; outcome 0 is the +1 eigenstate.
    """
    arr = np.zeros((3, 2, 2, 2), dtype=complex)
    for x, P in enumerate((linalg.X, linalg.Y, linalg.Z)):
        for a, sign in enumerate((1, -1)):
            arr[x, a] = 0.25 * (linalg.I2 + sign * P)
    return Assemblage(arr)


def lhs_assemblage(
    weights: Sequence[float],
    states: Sequence[np.ndarray],
    response: np.ndarray,
) -> Assemblage:
    """Assemblage built from a local-hidden-state model.

    Args:
        weights: ``P(lambda)``.
        states: ontic states ``sigma(lambda)`` (normalized).
        response: array ``(n_lambda, m, q)`` of ``P(a|x, lambda)``.
    """
    response = np.asarray(response, dtype=float)
    _, m, q = response.shape
    d = np.asarray(states[0]).shape[0]
    arr = np.zeros((m, q, d, d), dtype=complex)
    for w, s, r in zip(weights, states, response):
        arr += w * r[:, :, None, None] * np.asarray(s)[None, None]
    return Assemblage(arr)


def marginal(asm: Assemblage, x: int) -> np.ndarray:
    """``sum_a rho_{a|x}`` for setting ``x`` (0-based)."""
    asm._check_setting(x)
    return asm.members[x].sum(axis=0)


def signaling_D(asm: Assemblage) -> float:
    """Largest halved trace distance between marginals of two settings."""
    if asm.settings < 2:
        raise NeedTwoSettings(f"need at least two settings, got {asm.settings}")
    margs = asm.members.sum(axis=1)
    best = 0.0
    for x, y in itertools.combinations(range(asm.settings), 2):
        diff = linalg.hermitize(margs[x] - margs[y])
        best = max(best, 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(diff)))))
    return best


def satisfies_nsit(asm: Assemblage, tol: float = NSIT_TOL) -> bool:
    return signaling_D(asm) <= tol


def apply_channel(asm: Assemblage, kraus: Sequence[np.ndarray]) -> Assemblage:
    """Send every member through the channel ``rho -> sum_k K rho K^dagger``."""
    kraus = [np.asarray(k, dtype=complex) for k in kraus]
    if not kraus or any(k.ndim != 2 or k.shape[1] != asm.dim for k in kraus):
        raise InvalidChannel(f"Kraus operators must act on dimension {asm.dim}")
    if len({k.shape for k in kraus}) != 1:
        raise InvalidChannel("Kraus operators have inconsistent shapes")
    if not linalg.kraus_is_trace_preserving(kraus, KRAUS_TOL):
        raise InvalidChannel("sum_k K^dagger K differs from identity")
    K = np.stack(kraus)
    out = np.einsum("kij,xajl,kml->xaim", K, asm.members, K.conj(), optimize=True)
    return Assemblage(linalg.hermitize(out))


def unitary_image(asm: Assemblage, u: np.ndarray) -> Assemblage:
    return apply_channel(asm, [u])


# --- JSON ------------------------------------------------------------------


def to_json_dict(asm: Assemblage) -> dict:
    members = []
    for x in range(asm.settings):
        for a in range(asm.outcomes):
            mat = asm.members[x, a]
            members.append(
                {
                    "a": a + 1,
                    "x": x + 1,
                    "matrix": [[[float(v.real), float(v.imag)] for v in row] for row in mat],
                }
            )
    return {"dim": asm.dim, "settings": asm.settings, "outcomes": asm.outcomes, "members": members}


def _require_int(obj: dict, key: str, where: str, minimum: int = 1) -> int:
    if key not in obj:
        raise ParseError(f"{where}: missing field '{key}'")
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ParseError(f"{where}.{key}: expected integer, got {type(v).__name__}")
    if v < minimum:
        raise ParseError(f"{where}.{key}: must be >= {minimum}, got {v}")
    return v


def from_json_dict(data) -> Assemblage:
    if not isinstance(data, dict):
        raise ParseError("top level: expected an object")
    d = _require_int(data, "dim", "top level")
    m = _require_int(data, "settings", "top level")
    q = _require_int(data, "outcomes", "top level")
    members = data.get("members")
    if not isinstance(members, list):
        raise ParseError("top level.members: expected a list")
    arr = np.zeros((m, q, d, d), dtype=complex)
    seen = set()
    for i, mem in enumerate(members):
        where = f"members[{i}]"
        if not isinstance(mem, dict):
            raise ParseError(f"{where}: expected an object")
        a = _require_int(mem, "a", where)
        x = _require_int(mem, "x", where)
        if a > q:
            raise ParseError(f"{where}.a: outcome {a} exceeds outcomes={q}")
        if x > m:
            raise ParseError(f"{where}.x: setting {x} exceeds settings={m}")
        if (a, x) in seen:
            raise ParseError(f"{where}: duplicate member (a={a}, x={x})")
        seen.add((a, x))
        mat = mem.get("matrix")
        if not isinstance(mat, list) or len(mat) != d:
            raise ParseError(f"{where}.matrix: expected {d} rows")
        for r, row in enumerate(mat):
            if not isinstance(row, list) or len(row) != d:
                raise ParseError(f"{where}.matrix[{r}]: expected {d} entries")
            for c, entry in enumerate(row):
                if (
                    not isinstance(entry, list)
                    or len(entry) != 2
                    or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in entry)
                ):
                    raise ParseError(f"{where}.matrix[{r}][{c}]: expected [re, im] numbers")
                arr[x - 1, a - 1, r, c] = complex(entry[0], entry[1])
    missing = [(a, x) for x in range(1, m + 1) for a in range(1, q + 1) if (a, x) not in seen]
    if missing:
        raise ParseError(f"members: missing entries for (a, x) = {missing}")
    return Assemblage(arr)


def write_assemblage(asm: Assemblage, path) -> None:
    Path(path).write_text(json.dumps(to_json_dict(asm), indent=1) + "\n")


def read_assemblage(path) -> Assemblage:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror or exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return from_json_dict(data)
