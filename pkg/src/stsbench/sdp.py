"""Primal-dual interior-point solver for small block-diagonal SDPs.

Standard form, with ``X`` and ``Z`` block-diagonal real symmetric::

    primal:  minimize <C, X>   s.t.  A(X) = b,  X >= 0
    dual:    maximize b'y      s.t.  C - A*(y) = Z,  Z >= 0

Each block is a real symmetric ``k x k`` matrix. Blocks of equal size are
stacked so that scaling, Schur-complement assembly and line searches are
batched numpy calls. Search directions use Nesterov-Todd scaling with a
Mehrotra predictor-corrector step. Hermitian problems are embedded with
:func:`realify` and read back with :func:`complexify`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .constants import SDP_GAP_TOL, SDP_MAX_ITER


class Status(str, enum.Enum):
    OPTIMAL = "Optimal"
    MAX_ITERATIONS = "MaxIterations"
    NUMERICAL_TROUBLE = "NumericalTrouble"


def realify(h: np.ndarray) -> np.ndarray:
    """Embed a Hermitian ``d x d`` matrix as the real symmetric ``[[A, -B], [B, A]]``."""
    h = np.asarray(h, dtype=complex)
    a, b = h.real, h.imag
    return np.block([[a, -b], [b, a]])


def complexify(x: np.ndarray) -> np.ndarray:
    """Adjoint of :func:`realify`: ``<x, realify(h)> = Re tr(complexify(x) h)``.

    Maps PSD matrices to PSD matrices, and ``realify(g)`` to ``2 g``.
    """
    x = np.asarray(x, dtype=float)
    d = x.shape[0] // 2
    p, q, s = x[:d, :d], x[:d, d:], x[d:, d:]
    return (p + s) + 1j * (q.T - q)


class BlockLayout:
    """Packs a list of square blocks into one flat vector and back."""

    def __init__(self, sizes: Sequence[int]):
        self.sizes = tuple(int(k) for k in sizes)
        if not self.sizes or any(k < 1 for k in self.sizes):
            raise ValueError("block sizes must be positive")
        offsets = np.concatenate([[0], np.cumsum([k * k for k in self.sizes])])
        self.length = int(offsets[-1])
        self.order = sum(self.sizes)
        groups: dict[int, list[int]] = {}
        for j, k in enumerate(self.sizes):
            groups.setdefault(k, []).append(j)
        # size -> (block ids, flat index array of shape (g, k*k))
        self.groups = {
            k: (
                ids,
                np.array([np.arange(offsets[j], offsets[j] + k * k) for j in ids]),
            )
            for k, ids in sorted(groups.items())
        }

    def unpack(self, vec: np.ndarray) -> dict[int, np.ndarray]:
        return {
            k: vec[..., idx].reshape(vec.shape[:-1] + (len(ids), k, k))
            for k, (ids, idx) in self.groups.items()
        }

    def pack(self, blocks: dict[int, np.ndarray]) -> np.ndarray:
        lead = next(iter(blocks.values())).shape[:-3]
        vec = np.zeros(lead + (self.length,))
        for k, (ids, idx) in self.groups.items():
            vec[..., idx] = blocks[k].reshape(lead + (len(ids), k * k))
        return vec

    def from_list(self, mats: Sequence[np.ndarray]) -> np.ndarray:
        vec = np.zeros(self.length)
        for k, (ids, idx) in self.groups.items():
            for row, j in zip(idx, ids):
                vec[row] = np.asarray(mats[j], dtype=float).reshape(-1)
        return vec

    def to_list(self, vec: np.ndarray) -> list[np.ndarray]:
        out: list = [None] * len(self.sizes)
        for k, (ids, idx) in self.groups.items():
            for row, j in zip(idx, ids):
                out[j] = vec[row].reshape(k, k).copy()
        return out


@dataclass
class BlockSDP:
    """An SDP in standard form.

    Args:
        sizes: block dimensions.
        C: objective blocks, one symmetric matrix per block.
        A: constraint matrices; ``A[i]`` is a list of blocks (``None`` for zero).
        b: right-hand side, ``len(A)`` entries.
    """

    sizes: Sequence[int]
    C: Sequence[np.ndarray]
    A: Sequence[Sequence[np.ndarray | None]]
    b: Sequence[float]

    def __post_init__(self):
        self.layout = BlockLayout(self.sizes)
        lay = self.layout
        self.c_vec = lay.from_list([_sym(c) for c in self.C])
        rows = []
        for blocks in self.A:
            mats = [
                np.zeros((k, k)) if blk is None else _sym(blk)
                for k, blk in zip(lay.sizes, blocks)
            ]
            rows.append(lay.from_list(mats))
        self.a_mat = np.array(rows).reshape(len(rows), lay.length)
        self.b_vec = np.asarray(self.b, dtype=float).reshape(-1)
        if self.a_mat.shape[0] != self.b_vec.shape[0]:
            raise ValueError("A and b have different lengths")


def _sym(m) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    return 0.5 * (m + m.T)


@dataclass
class SdpSolution:
    status: Status
    X: list[np.ndarray]
    y: np.ndarray
    Z: list[np.ndarray]
    primal_objective: float
    dual_objective: float
    iterations: int
    primal_residual: float
    dual_residual: float
    complementarity: float
    history: list = field(default_factory=list, repr=False)

    @property
    def gap(self) -> float:
        return abs(self.primal_objective - self.dual_objective)


def _sym_batch(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + np.swapaxes(m, -1, -2))


def _max_step(lam: np.ndarray, d: np.ndarray) -> float:
    """Largest alpha with ``diag(lam) + alpha * d >= 0`` over all blocks in a group."""
    s = 1.0 / np.sqrt(lam)
    scaled = s[..., :, None] * d * s[..., None, :]
    ev = np.linalg.eigvalsh(_sym_batch(scaled))
    lo = float(ev.min())
    return np.inf if lo >= 0 else -1.0 / lo


def solve_block_sdp(
    problem: BlockSDP,
    gap_tol: float = SDP_GAP_TOL,
    feas_tol: float = 1e-9,
    max_iter: int = SDP_MAX_ITER,
) -> SdpSolution:
    """Solve ``problem`` to the requested duality-gap tolerance.

    The iteration is deterministic: no random starts, fixed operation order.
    Returns the last iterate with status ``MaxIterations`` if the tolerances
    are not reached, or ``NumericalTrouble`` if a factorization breaks down.
    """
    lay = problem.layout
    A, b, c = problem.a_mat, problem.b_vec, problem.c_vec
    m = A.shape[0]
    a_blocks = lay.unpack(A)  # size -> (m, g, k, k)
    c_blocks = lay.unpack(c)

    norm_b = float(np.linalg.norm(b))
    norm_c = float(np.linalg.norm(c))
    row_norms = np.linalg.norm(A, axis=1) if m else np.zeros(0)
    n_order = lay.order
    xi = max(10.0, np.sqrt(n_order), *(np.sqrt(n_order) * (1 + np.abs(b)) / (1 + row_norms)))
    eta = max(10.0, np.sqrt(n_order), norm_c, *(row_norms if m else [0.0]))

    Xb = {k: xi * np.broadcast_to(np.eye(k), (len(ids), k, k)).copy() for k, (ids, _) in lay.groups.items()}
    Zb = {k: eta * np.broadcast_to(np.eye(k), (len(ids), k, k)).copy() for k, (ids, _) in lay.groups.items()}
    y = np.zeros(m)

    def inner(u: dict, v: dict) -> float:
        return float(sum(np.sum(u[k] * v[k]) for k in u))

    def a_op(blocks: dict) -> np.ndarray:
        out = np.zeros(m)
        for k in blocks:
            out += np.einsum("igab,gab->i", a_blocks[k], blocks[k])
        return out

    def a_adj(v: np.ndarray) -> dict:
        return {k: np.einsum("i,igab->gab", v, a_blocks[k]) for k in a_blocks}

    status = Status.MAX_ITERATIONS
    history = []
    it = 0
    pobj = dobj = np.nan
    pres = dres = compl = np.inf

    def measures():
        ay = a_adj(y)
        rp = b - a_op(Xb)
        Rd = {k: c_blocks[k] - ay[k] - Zb[k] for k in Zb}
        p = inner(c_blocks, Xb)
        d = float(b @ y)
        return rp, Rd, p, d

    for it in range(max_iter + 1):
        rp, Rd, pobj, dobj = measures()
        pres = float(np.linalg.norm(rp)) / (1 + norm_b)
        dres = float(np.sqrt(inner(Rd, Rd))) / (1 + norm_c)
        compl = inner(Xb, Zb)
        gap = abs(pobj - dobj)
        history.append((pobj, dobj, pres, dres, compl))
        if (
            pres <= feas_tol
            and dres <= feas_tol
            and gap <= gap_tol * (1 + abs(pobj) + abs(dobj))
            and compl <= gap_tol * (1 + abs(pobj) + abs(dobj))
        ):
            status = Status.OPTIMAL
            break
        if it == max_iter:
            break
        mu = compl / n_order

        try:
            # Nesterov-Todd scaling W = R R^T with R^T Z R = R^-1 X R^-T = diag(lam)
            R, Rinv, lam, W = {}, {}, {}, {}
            for k in Xb:
                Lx = np.linalg.cholesky(Xb[k])
                Lz = np.linalg.cholesky(Zb[k])
                U, s, Vt = np.linalg.svd(np.swapaxes(Lz, -1, -2) @ Lx)
                isq = 1.0 / np.sqrt(s)
                R[k] = Lx @ np.swapaxes(Vt, -1, -2) * isq[..., None, :]
                Rinv[k] = isq[..., :, None] * np.swapaxes(U, -1, -2) @ np.swapaxes(Lz, -1, -2)
                lam[k] = s
                W[k] = R[k] @ np.swapaxes(R[k], -1, -2)

            # Schur complement M_ij = <A_i, W A_j W>
            M = np.zeros((m, m))
            for k in a_blocks:
                waw = np.einsum("gab,igbc,gcd->igad", W[k], a_blocks[k], W[k], optimize=True)
                M += np.einsum("igab,jgab->ij", a_blocks[k], waw, optimize=True)
            M = 0.5 * (M + M.T)
            cho = np.linalg.cholesky(M + 1e-14 * np.trace(M) / max(m, 1) * np.eye(m))
        except np.linalg.LinAlgError:
            status = Status.NUMERICAL_TROUBLE
            break

        WRdW = {k: W[k] @ Rd[k] @ W[k] for k in W}
        a_wrdw = a_op(WRdW)

        def direction(Rc: dict):
            # scaled complementarity: lam o (dx~ + dz~) = Rc
            S = {}
            for k in Rc:
                l = lam[k]
                S[k] = 2.0 * Rc[k] / (l[..., :, None] + l[..., None, :])
            RSR = {k: R[k] @ S[k] @ np.swapaxes(R[k], -1, -2) for k in S}
            rhs = rp - a_op(RSR) + a_wrdw
            dy = np.linalg.solve(cho.T, np.linalg.solve(cho, rhs))
            ady = a_adj(dy)
            dZ = {k: Rd[k] - ady[k] for k in Rd}
            dX = {k: _sym_batch(RSR[k] - W[k] @ dZ[k] @ W[k]) for k in dZ}
            dx_s = {k: Rinv[k] @ dX[k] @ np.swapaxes(Rinv[k], -1, -2) for k in dX}
            dz_s = {k: np.swapaxes(R[k], -1, -2) @ dZ[k] @ R[k] for k in dZ}
            return dX, dy, dZ, dx_s, dz_s

        def steps(dx_s, dz_s):
            ap = min(_max_step(lam[k], dx_s[k]) for k in lam)
            ad = min(_max_step(lam[k], dz_s[k]) for k in lam)
            return ap, ad

        lam_sq = {k: np.einsum("...i,ij->...ij", lam[k] ** 2, np.eye(len(lam[k][0]))) for k in lam}

        # predictor
        Rc = {k: -lam_sq[k] for k in lam}
        dX, dy, dZ, dx_s, dz_s = direction(Rc)
        ap, ad = steps(dx_s, dz_s)
        ap, ad = min(1.0, ap), min(1.0, ad)
        mu_aff = inner(
            {k: Xb[k] + ap * dX[k] for k in Xb}, {k: Zb[k] + ad * dZ[k] for k in Zb}
        ) / n_order
        sigma = min(1.0, max(0.0, (mu_aff / mu) ** 3)) if mu > 0 else 0.0

        # corrector
        Rc = {}
        eye = {k: np.eye(len(lam[k][0])) for k in lam}
        for k in lam:
            cross = 0.5 * (dx_s[k] @ dz_s[k] + dz_s[k] @ dx_s[k])
            Rc[k] = sigma * mu * eye[k] - lam_sq[k] - cross
        dX, dy, dZ, dx_s, dz_s = direction(Rc)
        ap, ad = steps(dx_s, dz_s)
        ap = min(1.0, 0.98 * ap)
        ad = min(1.0, 0.98 * ad)

        Xb = {k: _sym_batch(Xb[k] + ap * dX[k]) for k in Xb}
        y = y + ad * dy
        Zb = {k: _sym_batch(Zb[k] + ad * dZ[k]) for k in Zb}

    X_list = lay.to_list(lay.pack(Xb))
    Z_list = lay.to_list(lay.pack(Zb))
    return SdpSolution(
        status=status,
        X=X_list,
        y=y,
        Z=Z_list,
        primal_objective=float(pobj),
        dual_objective=float(dobj),
        iterations=it,
        primal_residual=pres,
        dual_residual=dres,
        complementarity=compl,
        history=history,
    )
