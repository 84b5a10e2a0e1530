"""Spatiotemporal steering robustness (STSR) via semidefinite programming.

The robustness of an assemblage ``{rho_{a|x}}`` is::

    min  tr sum_l sigma_l - 1
    s.t. sum_l D_l(a|x) sigma_l - rho_{a|x} >= 0,   sigma_l >= 0

with the dual::

    max  tr sum_{a,x} F_{a|x} rho_{a|x} - 1
    s.t. 1 - sum_{a,x} D_l(a|x) F_{a|x} >= 0,   F_{a|x} >= 0

where ``l`` runs over the ``q**m`` deterministic strategies. The robustness
program is written as the dual (LMI) side of :mod:`stsbench.sdp`, so one
interior-point run yields the LHS ensemble ``sigma_l`` from ``y`` and the
witness ``F_{a|x}`` from ``X``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .assemblage import Assemblage
from .constants import MAX_STRATEGIES, SDP_CLAMP_TOL, SDP_REPORT_GAP_TOL
from .errors import NumericalTrouble, TooManyStrategies
from .sdp import BlockSDP, SdpSolution, Status, complexify, realify, solve_block_sdp

Strategy = tuple  # one 0-based outcome per setting


def enumerate_strategies(m: int, q: int) -> list[Strategy]:
    """All ``q**m`` deterministic strategies in lexicographic order.

    Strategy ``s`` assigns outcome ``s[x]`` to setting ``x`` (0-based).
    """
    if m < 1 or q < 2:
        raise ValueError(f"need m >= 1 and q >= 2, got m={m}, q={q}")
    if q**m > MAX_STRATEGIES:
        raise TooManyStrategies(f"q**m = {q}**{m} exceeds {MAX_STRATEGIES}")
    return list(itertools.product(range(q), repeat=m))


def strategy_labels(s: Strategy) -> tuple[int, ...]:
    return tuple(a + 1 for a in s)


def hermitian_basis(d: int) -> list[np.ndarray]:
    """Orthogonal basis of the real space of ``d x d`` Hermitian matrices."""
    basis = []
    for j in range(d):
        e = np.zeros((d, d), dtype=complex)
        e[j, j] = 1
        basis.append(e)
    for j, k in itertools.combinations(range(d), 2):
        e = np.zeros((d, d), dtype=complex)
        e[j, k] = e[k, j] = 1
        basis.append(e)
        f = np.zeros((d, d), dtype=complex)
        f[j, k], f[k, j] = -1j, 1j
        basis.append(f)
    return basis


@dataclass
class SdpReport:
    """Outcome of one robustness computation.

    ``primal_value`` is the robustness computed from the LHS ensemble,
    ``dual_value`` the witness score. ``lhs_ensemble[l]`` pairs with
    ``strategies[l]``; ``witness[x][a]`` is ``F_{a|x}``.
    """

    primal_value: float
    dual_value: float
    lhs_ensemble: list[np.ndarray]
    witness: list[list[np.ndarray]]
    gap: float
    status: Status
    iterations: int
    strategies: list[Strategy] = field(default_factory=list)
    clamped: bool = False

    @property
    def value(self) -> float:
        return self.primal_value

    def to_dict(self) -> dict:
        def enc(mat):
            return [[[float(v.real), float(v.imag)] for v in row] for row in mat]

        return {
            "primal_value": self.primal_value,
            "dual_value": self.dual_value,
            "gap": self.gap,
            "status": self.status.value,
            "iterations": self.iterations,
            "clamped": self.clamped,
            "lhs_ensemble": [
                {"strategy": list(strategy_labels(s)), "sigma": enc(m)}
                for s, m in zip(self.strategies, self.lhs_ensemble)
            ],
            "witness": [
                {"a": a + 1, "x": x + 1, "F": enc(F)}
                for x, row in enumerate(self.witness)
                for a, F in enumerate(row)
            ],
        }


def build_stsr_problem(asm: Assemblage) -> tuple[BlockSDP, list[Strategy], list[np.ndarray]]:
    """Robustness SDP for ``asm`` in solver standard form.

    Blocks ``0..L-1`` hold ``sigma_l >= 0``; block ``L + x*q + a`` holds the
    domination constraint for ``(a, x)``. Variable ``y[l*d*d + p]`` is the
    coefficient of ``basis[p]`` in ``sigma_l``.
    """
    m, q, d = asm.settings, asm.outcomes, asm.dim
    strategies = enumerate_strategies(m, q)
    basis = hermitian_basis(d)
    L = len(strategies)
    n_blocks = L + m * q
    sizes = [2 * d] * n_blocks
    zero = np.zeros((2 * d, 2 * d))
    C = [zero] * L + [-realify(asm.members[x, a]) for x in range(m) for a in range(q)]
    real_basis = [realify(h) for h in basis]
    A, b = [], []
    for l, s in enumerate(strategies):
        for p, h in enumerate(basis):
            blocks: list = [None] * n_blocks
            blocks[l] = -real_basis[p]
            for x in range(m):
                blocks[L + x * q + s[x]] = -real_basis[p]
            A.append(blocks)
            # the realified trace counts each eigenvalue twice
            b.append(-np.trace(real_basis[p]) / 2)
    return BlockSDP(sizes, C, A, b), strategies, basis


def _report(asm: Assemblage, sol: SdpSolution, strategies, basis) -> SdpReport:
    m, q, d = asm.settings, asm.outcomes, asm.dim
    L = len(strategies)
    nb = len(basis)
    sigmas = [
        linalg.hermitize(sum(sol.y[l * nb + p] * basis[p] for p in range(nb)))
        for l in range(L)
    ]
    witness = [
        [linalg.hermitize(complexify(sol.X[L + x * q + a])) for a in range(q)]
        for x in range(m)
    ]
    primal = float(sum(np.real(np.trace(s)) for s in sigmas)) - 1.0
    dual = witness_score(witness, asm)
    gap = abs(primal - dual)
    status = sol.status
    if status is Status.OPTIMAL and gap > SDP_REPORT_GAP_TOL:
        status = Status.NUMERICAL_TROUBLE
    clamped = False
    if primal < 0:
        if primal < -SDP_CLAMP_TOL:
            if status is Status.OPTIMAL:
                raise NumericalTrouble(f"robustness {primal:.3e} is negative beyond tolerance")
        else:
            primal, clamped = 0.0, True
    return SdpReport(
        primal_value=primal,
        dual_value=dual,
        lhs_ensemble=sigmas,
        witness=witness,
        gap=gap,
        status=status,
        iterations=sol.iterations,
        strategies=strategies,
        clamped=clamped,
    )


def _solve(asm: Assemblage) -> SdpReport:
    problem, strategies, basis = build_stsr_problem(asm)
    sol = solve_block_sdp(problem)
    return _report(asm, sol, strategies, basis)


def stsr_primal(asm: Assemblage) -> SdpReport:
    """Robustness of ``asm`` with its optimal LHS ensemble.

    The report's ``primal_value`` is the minimum of the LHS program; the
    witness is returned alongside because the solver produces both.
    """
    return _solve(asm)


def stsr_dual(asm: Assemblage) -> SdpReport:
    """Robustness of ``asm`` read from the optimal steering witness."""
    return _solve(asm)


def stsr(asm: Assemblage) -> float:
    return stsr_primal(asm).primal_value


def witness_score(witness, asm: Assemblage) -> float:
    """``tr sum F_{a|x} rho_{a|x} - 1`` for a fixed witness."""
    return (
        float(
            sum(
                np.real(np.trace(witness[x][a] @ asm.members[x, a]))
                for x in range(asm.settings)
                for a in range(asm.outcomes)
            )
        )
        - 1.0
    )


def check_lhs_certificate(report: SdpReport, asm: Assemblage, tol: float = 1e-7) -> bool:
    """Whether ``report.lhs_ensemble`` is feasible for ``asm`` within ``tol``."""
    if any(linalg.min_eig(s) < -tol for s in report.lhs_ensemble):
        return False
    for x in range(asm.settings):
        for a in range(asm.outcomes):
            acc = sum(
                s for s, strat in zip(report.lhs_ensemble, report.strategies) if strat[x] == a
            )
            if linalg.min_eig(acc - asm.members[x, a]) < -tol:
                return False
    return True


def check_witness(report: SdpReport, tol: float = 1e-7) -> bool:
    """Whether ``report.witness`` is feasible for the dual program within ``tol``."""
    F = report.witness
    d = F[0][0].shape[0]
    if any(linalg.min_eig(f) < -tol for row in F for f in row):
        return False
    for s in report.strategies:
        acc = sum(F[x][a] for x, a in enumerate(s))
        if linalg.min_eig(np.eye(d) - acc) < -tol:
            return False
    return True
