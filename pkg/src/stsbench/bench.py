"""Benchmark sweeps over chain length, transfer angle, noise and shot count."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .assemblage import pauli_assemblage, signaling_D
from .circuit import ideal_transfer, normalize_variant
from .constants import MAX_QUBITS
from .errors import NumericalTrouble, ReportError, StsError
from .noise import NoiseParams, noisy_transfer
from .steering import stsr_primal
from .tomography import tomographic_assemblage

CSV_COLUMNS = (
    "n",
    "theta",
    "stsr",
    "signaling",
    "duality_gap",
    "status",
    "shots",
    "seed",
    "t1_ns",
    "t2_ns",
    "gamma_readout",
    "wall_ms",
)

# slack for the STSR >= D audit on every record
AUDIT_TOL = 1e-6


def default_theta_grid(divisions: int = 7) -> list[float]:
    return [m * np.pi / divisions for m in range(2 * divisions + 1)]


@dataclass
class BenchmarkConfig:
    n_values: Sequence[int] = (2, 3, 4, 5)
    thetas: Sequence[float] = field(default_factory=default_theta_grid)
    variant: str = "U"
    noise: NoiseParams | None = None
    shots: int | None = None
    seed: int = 0
    timing: bool = False

    def __post_init__(self):
        self.n_values = tuple(int(n) for n in self.n_values)
        self.thetas = tuple(float(t) for t in self.thetas)
        self.variant = normalize_variant(self.variant)
        if not self.n_values or not self.thetas:
            raise ValueError("chain-length and theta grids must be nonempty")
        bad = [n for n in self.n_values if not 2 <= n <= MAX_QUBITS]
        if bad:
            raise ValueError(f"chain lengths {bad} outside 2..{MAX_QUBITS}")
        if self.shots is not None and int(self.shots) < 1:
            raise ValueError("shots must be positive")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def to_dict(self) -> dict:
        return {
            "n": list(self.n_values),
            "theta_grid": list(self.thetas),
            "variant": self.variant,
            "noise": None if self.noise is None else self.noise.to_dict(),
            "shots": self.shots,
            "seed": int(self.seed),
        }

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def grid(self) -> list[tuple[int, int, float]]:
        return [(n, k, t) for n in self.n_values for k, t in enumerate(self.thetas)]


@dataclass
class BenchmarkRecord:
    n: int
    theta: float
    stsr: float | None
    signaling: float | None
    duality_gap: float | None
    status: str
    shots: int | None
    seed: int
    t1_ns: str
    t2_ns: str
    gamma_readout: float
    wall_ms: float | None
    noise_fingerprint: str
    audit_ok: bool
    error: str = ""
    config_hash: str = ""
    version: str = __version__

    @classmethod
    def from_dict(cls, data: dict) -> "BenchmarkRecord":
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in data.items() if k in names})


def point_seed(seed: int, n: int, theta_index: int) -> int:
    """Independent 64-bit seed for one grid point."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(n, theta_index))
    lo, hi = ss.generate_state(2, dtype=np.uint32)
    return int(lo) | (int(hi) << 32)


def _noise_columns(noise: NoiseParams | None) -> tuple[str, str, float, str]:
    if noise is None:
        return "", "", 0.0, "ideal"
    fmt = lambda ts: ";".join(f"{t:.6g}" for t in ts)  # noqa: E731
    return fmt(noise.t1_ns), fmt(noise.t2_ns), noise.readout_gamma, noise.fingerprint()


def evaluate_point(config: BenchmarkConfig, n: int, theta_index: int, theta: float) -> BenchmarkRecord:
    t1, t2, gamma, fp = _noise_columns(config.noise)
    start = time.perf_counter()
    stsr_val = sig = gap = None
    error = ""
    try:
        asm = pauli_assemblage()
        if config.noise is None:
            out = ideal_transfer(asm, n, theta, config.variant)
        else:
            out = noisy_transfer(asm, n, theta, config.variant, config.noise)
        if config.shots:
            out = tomographic_assemblage(out, config.shots, point_seed(config.seed, n, theta_index))
        report = stsr_primal(out)
        stsr_val, gap, status = report.primal_value, report.gap, report.status.value
        sig = signaling_D(out)
    except NumericalTrouble as exc:
        status, error = "NumericalTrouble", str(exc)
    except StsError as exc:
        status, error = "Error", f"{type(exc).__name__}: {exc}"
    wall = (time.perf_counter() - start) * 1e3 if config.timing else None
    audit = status == "Optimal" and stsr_val >= sig - AUDIT_TOL
    return BenchmarkRecord(
        n=n,
        theta=theta,
        stsr=stsr_val,
        signaling=sig,
        duality_gap=gap,
        status=status,
        shots=config.shots,
        seed=int(config.seed),
        t1_ns=t1,
        t2_ns=t2,
        gamma_readout=gamma,
        wall_ms=wall,
        noise_fingerprint=fp,
        audit_ok=bool(audit),
        error=error,
        config_hash=config.config_hash(),
    )


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("STSR_BENCH_THREADS", "1")))
    except ValueError:
        return 1


def run_sweep(config: BenchmarkConfig) -> list[BenchmarkRecord]:
    """One record per grid point, in grid order whatever the worker count."""
    points = config.grid()
    workers = worker_count()
    if workers == 1:
        return [evaluate_point(config, *p) for p in points]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda p: evaluate_point(config, *p), points))


# --- reports -----------------------------------------------------------------


def _g6(v) -> str:
    if v is None or v == "":
        return ""
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def records_to_csv(records: Sequence[BenchmarkRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        row = asdict(r)
        w.writerow([_g6(row[c] if c != "status" else r.status) for c in CSV_COLUMNS])
    return buf.getvalue()


def records_to_json(records: Sequence[BenchmarkRecord], config: BenchmarkConfig | None = None) -> str:
    doc = {
        "provenance": {
            "package": "stsbench",
            "version": __version__,
            "config": None if config is None else config.to_dict(),
            "config_hash": None if config is None else config.config_hash(),
        },
        "records": [asdict(r) for r in records],
    }
    return json.dumps(doc, indent=1) + "\n"


def records_from_json(text: str) -> list[BenchmarkRecord]:
    return [BenchmarkRecord.from_dict(r) for r in json.loads(text)["records"]]


def _theta_label(theta: float) -> str:
    frac = theta / np.pi
    for den in (1, 2, 3, 4, 6, 7, 8):
        num = frac * den
        if abs(num - round(num)) < 1e-9:
            num = int(round(num))
            if num == 0:
                return "0"
            head = "π" if num == 1 else f"{num}π"
            return head if den == 1 else f"{head}/{den}"
    return f"{theta:.6g}"


def records_to_markdown(records: Sequence[BenchmarkRecord]) -> str:
    """One table per angle, laid out as device / route / n / STSR / signaling."""
    lines = []
    by_theta: dict[float, list[BenchmarkRecord]] = {}
    for r in records:
        by_theta.setdefault(r.theta, []).append(r)
    for theta, rows in by_theta.items():
        lines.append(f"### θ = {_theta_label(theta)}")
        lines.append("")
        lines.append("| Devices | Transference routes | n | STSR | Signaling |")
        lines.append("|---|---|---|---|---|")
        for i, r in enumerate(rows):
            device = ""
            if i == 0 or rows[i - 1].noise_fingerprint != r.noise_fingerprint:
                device = f"simulator ({r.noise_fingerprint})"
            route = " → ".join(str(q) for q in range(r.n))
            lines.append(f"| {device} | {route} | {r.n} | {_g6(r.stsr)} | {_g6(r.signaling)} |")
        lines.append("")
    return "\n".join(lines)


def emit_report(
    records: Sequence[BenchmarkRecord],
    fmt: str,
    path=None,
    config: BenchmarkConfig | None = None,
) -> str:
    """Render ``records`` as csv, json or md; write to ``path`` when given."""
    if not records:
        raise ValueError("no records to report")
    fmt = fmt.lower()
    if fmt == "csv":
        text = records_to_csv(records)
    elif fmt == "json":
        text = records_to_json(records, config)
    elif fmt in ("md", "markdown"):
        text = records_to_markdown(records)
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    if path is not None:
        try:
            Path(path).write_text(text, encoding="utf-8")
        except OSError as exc:
            raise ReportError(path, exc.strerror or str(exc)) from exc
    return text


def sweep_exit_code(records: Sequence[BenchmarkRecord]) -> int:
    solver = {"MaxIterations", "NumericalTrouble"}
    if any(r.status in solver for r in records):
        return 2
    if any(r.status == "Error" for r in records):
        return 1
    return 0
