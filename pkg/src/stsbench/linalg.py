"""Dense quantum-information primitives.

Matrices are plain ``numpy`` complex arrays. Subsystem ordering follows
``numpy.kron``: the first factor is the most significant index.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

from .constants import EQUALITY_TOL, HERMITICITY_TOL, PSD_TOL, TRACE_TOL
from .errors import DimMismatch, InvalidSubsystem, NotHermitian, ValidationError

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = {"X": X, "Y": Y, "Z": Z}

KET0 = np.array([1, 0], dtype=complex)
KET1 = np.array([0, 1], dtype=complex)


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimMismatch(f"expected a square matrix, got shape {a.shape}")
    return a


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def hermiticity_error(m: np.ndarray) -> float:
    m = np.asarray(m)
    if m.size == 0:
        return 0.0
    return float(np.max(np.abs(m - dagger(m))))


def is_hermitian(m, tol: float = HERMITICITY_TOL) -> bool:
    return hermiticity_error(m) <= tol


def check_hermitian(m, tol: float = HERMITICITY_TOL) -> np.ndarray:
    m = as_matrix(m)
    err = hermiticity_error(m)
    if err > tol:
        raise NotHermitian(f"max |M - M^dagger| = {err:.3e} exceeds {tol:.0e}")
    return m


def hermitize(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + dagger(m))


def tensor(*mats) -> np.ndarray:
    """Kronecker product of one or more matrices (or vectors), left to right."""
    if not mats:
        raise ValueError("tensor needs at least one operand")
    return reduce(np.kron, [np.asarray(m, dtype=complex) for m in mats])


def _check_dims(dims: Sequence[int], size: int) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if any(d < 1 for d in dims) or int(np.prod(dims)) != size:
        raise DimMismatch(f"subsystem dims {dims} do not multiply to {size}")
    return dims


def partial_trace(rho, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Trace out every subsystem not listed in ``keep``.

    Args:
        rho: operator on the composite space.
        dims: subsystem dimensions, product equal to ``rho.shape[0]``.
        keep: indices of subsystems to retain; output keeps them in
            ascending order.

    Raises:
        InvalidSubsystem: ``keep`` is empty or names a missing subsystem.
    """
    rho = as_matrix(rho)
    dims = _check_dims(dims, rho.shape[0])
    keep = sorted(set(int(k) for k in keep))
    n = len(dims)
    if not keep:
        raise InvalidSubsystem("keep must name at least one subsystem")
    bad = [k for k in keep if not 0 <= k < n]
    if bad:
        raise InvalidSubsystem(f"subsystem indices {bad} outside 0..{n - 1}")

    t = rho.reshape(dims + dims)
    traced = [k for k in range(n) if k not in keep]
    # trace the highest index first so remaining axis numbers stay valid
    for k in sorted(traced, reverse=True):
        cur = t.ndim // 2
        t = np.trace(t, axis1=k, axis2=k + cur)
    d_keep = int(np.prod([dims[k] for k in keep]))
    return t.reshape(d_keep, d_keep)


def hermitian_eigs(m, tol: float = HERMITICITY_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian matrix, eigenvalues descending."""
    m = check_hermitian(m, tol)
    w, v = np.linalg.eigh(hermitize(m))
    return w[::-1].copy(), v[:, ::-1].copy()


def eigvalsh(m) -> np.ndarray:
    """Ascending eigenvalues of the Hermitian part, no tolerance check."""
    return np.linalg.eigvalsh(hermitize(np.asarray(m, dtype=complex)))


def min_eig(m) -> float:
    m = np.asarray(m, dtype=complex)
    if m.size == 0:
        return 0.0
    return float(eigvalsh(m)[0])


def trace_norm(m) -> float:
    return float(np.sum(np.abs(eigvalsh(check_hermitian(m)))))


def trace_distance(a, b) -> float:
    """Half the trace norm of ``a - b`` for Hermitian ``a`` and ``b``."""
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape != b.shape:
        raise DimMismatch(f"shapes {a.shape} and {b.shape} differ")
    return 0.5 * trace_norm(a - b)


def psd_project(m) -> np.ndarray:
    """Nearest PSD matrix in Frobenius norm (negative eigenvalues clipped)."""
    w, v = np.linalg.eigh(hermitize(as_matrix(m)))
    return (v * np.clip(w, 0, None)) @ dagger(v)


def projector(ket) -> np.ndarray:
    ket = np.asarray(ket, dtype=complex).reshape(-1)
    return np.outer(ket, ket.conj())


def bloch_vector(rho) -> np.ndarray:
    rho = as_matrix(rho)
    return np.real([np.trace(rho @ P) for P in (X, Y, Z)])


def from_bloch(r) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    return 0.5 * (I2 + r[0] * X + r[1] * Y + r[2] * Z)


def kraus_is_trace_preserving(kraus: Sequence[np.ndarray], tol: float) -> bool:
    kraus = [as_matrix(k) for k in kraus]
    if not kraus:
        return False
    d = kraus[0].shape[1]
    s = sum(dagger(k) @ k for k in kraus)
    return float(np.max(np.abs(s - np.eye(d)))) <= tol


def apply_kraus(rho: np.ndarray, kraus: Sequence[np.ndarray]) -> np.ndarray:
    return sum(k @ rho @ dagger(k) for k in kraus)


def choi_matrix(kraus: Sequence[np.ndarray]) -> np.ndarray:
    """Choi matrix sum_ij |i><j| (x) E(|i><j|) of a Kraus channel."""
    d_in = np.asarray(kraus[0]).shape[1]
    d_out = np.asarray(kraus[0]).shape[0]
    J = np.zeros((d_in * d_out, d_in * d_out), dtype=complex)
    for i in range(d_in):
        for j in range(d_in):
            e = np.zeros((d_in, d_in), dtype=complex)
            e[i, j] = 1.0
            J += np.kron(e, apply_kraus(e, kraus))
    return J


def kraus_from_choi(J: np.ndarray, d_in: int, tol: float = 1e-14) -> list[np.ndarray]:
    """Kraus operators from a PSD Choi matrix in the :func:`choi_matrix` layout."""
    J = hermitize(as_matrix(J))
    d_out = J.shape[0] // d_in
    w, v = np.linalg.eigh(J)
    kraus = []
    for lam, vec in zip(w[::-1], v.T[::-1]):
        if lam <= tol:
            break
        # vec = sum_i |i> (x) K|i>  ->  column i of K is vec[i*d_out:(i+1)*d_out]
        kraus.append(np.sqrt(lam) * vec.reshape(d_in, d_out).T)
    return kraus


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A validated density operator together with its subsystem layout.

    ``normalized=False`` admits subnormalized states (trace in ``[0, 1]``).
    """

    mat: np.ndarray
    dims: tuple[int, ...] = ()
    normalized: bool = True

    def __post_init__(self):
        m = as_matrix(self.mat)
        dims = self.dims or (m.shape[0],)
        object.__setattr__(self, "dims", _check_dims(dims, m.shape[0]))
        err = hermiticity_error(m)
        if err > HERMITICITY_TOL:
            raise ValidationError("hermiticity", f"max |M - M^dagger| = {err:.3e}")
        tr = float(np.real(np.trace(m)))
        if self.normalized and abs(tr - 1) > TRACE_TOL:
            raise ValidationError("unit trace", f"trace = {tr:.12g}")
        if not self.normalized and not -TRACE_TOL <= tr <= 1 + TRACE_TOL:
            raise ValidationError("subnormalized trace", f"trace = {tr:.12g}")
        lo = min_eig(m)
        if lo < -PSD_TOL:
            raise ValidationError("positive semidefinite", f"min eigenvalue = {lo:.3e}")
        m = m.copy()
        m.flags.writeable = False
        object.__setattr__(self, "mat", m)

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def reduce(self, keep: Iterable[int]) -> "DensityMatrix":
        keep = sorted(set(keep))
        sub = partial_trace(self.mat, self.dims, keep)
        return DensityMatrix(sub, tuple(self.dims[k] for k in keep), self.normalized)

    def __eq__(self, other):
        if not isinstance(other, DensityMatrix):
            return NotImplemented
        return self.dims == other.dims and np.allclose(
            self.mat, other.mat, rtol=0, atol=EQUALITY_TOL
        )

    def __hash__(self):
        return hash((self.dims, self.mat.tobytes()))


def random_density_matrix(d: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random mixed state from the Ginibre ensemble."""
    k = d if rank is None else rank
    g = rng.normal(size=(d, k)) + 1j * rng.normal(size=(d, k))
    rho = g @ dagger(g)
    return rho / np.trace(rho)


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR with phase correction."""
    g = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(g)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph
