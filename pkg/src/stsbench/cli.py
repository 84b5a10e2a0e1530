"""Command-line entry point: ``stsbench <subcommand> [flags]``.

Exit codes: 0 success, 1 validation error or bad usage, 2 solver
non-convergence anywhere in the run.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .assemblage import pauli_assemblage, read_assemblage, satisfies_nsit, signaling_D
from .bench import BenchmarkConfig, default_theta_grid, emit_report, run_sweep, sweep_exit_code
from .errors import NumericalTrouble, ReportError, StsError
from .noise import NoiseParams
from .sdp import Status
from .steering import stsr_primal
from .tomography import tomographic_assemblage

EXIT_OK, EXIT_INVALID, EXIT_SOLVER = 0, 1, 2

_PI_TERM = re.compile(r"^(?P<num>[0-9.]*)\*?pi(?:/(?P<den>[0-9.]+))?$")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; 2 is reserved for solver failures here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def parse_int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in str(text).split(",") if t.strip()]
    except ValueError as exc:
        raise UsageError(f"bad integer list {text!r}") from exc


def parse_angle(token: str) -> float:
    token = token.strip().lower().replace(" ", "")
    m = _PI_TERM.match(token)
    if m:
        num = float(m["num"]) if m["num"] else 1.0
        den = float(m["den"]) if m["den"] else 1.0
        return num * np.pi / den
    try:
        return float(token)
    except ValueError as exc:
        raise UsageError(f"bad angle {token!r}") from exc


def parse_theta_grid(spec) -> list[float]:
    """``"7"`` -> ``{m pi/7 : m = 0..14}``; otherwise comma-separated angles like ``pi/2,pi``."""
    if isinstance(spec, (list, tuple)):
        return [float(t) for t in spec]
    spec = str(spec).strip()
    if spec.isdigit():
        if int(spec) < 1:
            raise UsageError("theta grid divisions must be positive")
        return default_theta_grid(int(spec))
    return [parse_angle(t) for t in spec.split(",") if t.strip()]


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON config file; flags override its keys")
    p.add_argument("--seed", type=int, help="64-bit RNG seed (default 0)")
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--format", choices=("csv", "json", "md"), type=str.lower, help="report format (default csv)")


def _add_sweep(p: argparse.ArgumentParser, noisy: bool):
    _add_common(p)
    p.add_argument("--n", help="comma-separated chain lengths (default 2,3,4,5)")
    p.add_argument("--theta-grid", help="divisions of pi (default 7) or comma list such as pi/2,pi")
    p.add_argument("--variant", type=str.lower, choices=("v", "u"), help="two-qubit block (default u)")
    p.add_argument("--shots", type=int, help="shots per basis; omit for exact states")
    p.add_argument("--timing", action="store_true", default=None, help="fill wall_ms (breaks byte-identical output)")
    if noisy:
        p.add_argument("--t1", help="T1 in ns, one value or comma list per qubit")
        p.add_argument("--t2", help="T2 in ns, one value or comma list per qubit")
        p.add_argument("--gate-ns", type=float, help="duration of the two-qubit block in ns")
        p.add_argument("--readout-gamma", type=float, help="readout bit-flip probability")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="stsbench", description="Spatiotemporal steering robustness benchmarks.")
    parser.add_argument("--version", action="version", version=f"stsbench {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    _add_sweep(sub.add_parser("theory-curve", help="ideal STSR versus theta and n"), noisy=False)
    _add_sweep(sub.add_parser("noise-sim", help="STSR and signaling under device noise"), noisy=True)

    for name, helptext in (("stsr", "STSR and D of an assemblage file"), ("signaling", "D of an assemblage file")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("path", help="assemblage JSON")
        p.add_argument("--format", choices=("text", "json"), default="text", type=str.lower)

    p = sub.add_parser("tomo-calibrate", help="shot-noise floor of STSR and D by Monte Carlo")
    _add_common(p)
    p.add_argument("--shots", type=int, help="shots per basis (default 8000)")
    p.add_argument("--trials", type=int, help="number of seeds (default 1000)")
    return parser


def load_config_file(path) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise UsageError(f"{path}: top level must be an object")
    return data


_SWEEP_KEYS = {
    "n", "theta_grid", "variant", "t1", "t2", "gate_ns", "readout_gamma",
    "shots", "seed", "out", "format", "timing", "noise",
}


def merged_options(args: argparse.Namespace, keys: set[str]) -> dict:
    """Config-file values overlaid by every flag given on the command line."""
    opts = load_config_file(args.config) if args.config else {}
    unknown = set(opts) - keys
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    for k in keys:
        v = getattr(args, k, None)
        if v is not None:
            opts[k] = v
    return opts


def _times(v) -> tuple[float, ...]:
    if isinstance(v, (int, float)):
        return (float(v),)
    if isinstance(v, (list, tuple)):
        return tuple(float(t) for t in v)
    try:
        return tuple(float(t) for t in str(v).split(","))
    except ValueError as exc:
        raise UsageError(f"bad coherence time {v!r}") from exc


def noise_from_options(opts: dict) -> NoiseParams:
    base = dict(opts.get("noise") or {})
    if "t1" in opts:
        base["t1_ns"] = _times(opts["t1"])
    if "t2" in opts:
        base["t2_ns"] = _times(opts["t2"])
    if "readout_gamma" in opts:
        base["readout_gamma"] = float(opts["readout_gamma"])
    if "gate_ns" in opts:
        variant = str(opts.get("variant", "u")).upper()
        base.setdefault("durations_ns", {})[variant] = float(opts["gate_ns"])
    return NoiseParams.from_dict(base)


def config_from_options(opts: dict, noisy: bool) -> BenchmarkConfig:
    n_values = opts.get("n", [2, 3, 4, 5])
    if not isinstance(n_values, list):
        n_values = parse_int_list(n_values)
    return BenchmarkConfig(
        n_values=n_values,
        thetas=parse_theta_grid(opts.get("theta_grid", "7")),
        variant=opts.get("variant", "u"),
        noise=noise_from_options(opts) if noisy else None,
        shots=opts.get("shots"),
        seed=int(opts.get("seed", 0)),
        timing=bool(opts.get("timing", False)),
    )


def _write(text: str, out):
    if out:
        try:
            Path(out).write_text(text, encoding="utf-8")
        except OSError as exc:
            raise ReportError(out, exc.strerror or str(exc)) from exc
    else:
        sys.stdout.write(text)


def cmd_sweep(args, noisy: bool) -> int:
    keys = _SWEEP_KEYS if noisy else _SWEEP_KEYS - {"t1", "t2", "gate_ns", "readout_gamma", "noise"}
    opts = merged_options(args, keys)
    config = config_from_options(opts, noisy)
    records = run_sweep(config)
    text = emit_report(records, opts.get("format", "csv"), opts.get("out"), config)
    if not opts.get("out"):
        sys.stdout.write(text)
    for r in records:
        if r.error:
            print(f"n={r.n} theta={r.theta:.6g}: {r.status}: {r.error}", file=sys.stderr)
        elif not r.audit_ok:
            print(f"n={r.n} theta={r.theta:.6g}: audit failed, stsr < signaling", file=sys.stderr)
    return sweep_exit_code(records)


def cmd_stsr(args) -> int:
    asm = read_assemblage(args.path)
    report = stsr_primal(asm)
    D = signaling_D(asm) if asm.settings >= 2 else 0.0
    if args.format == "json":
        out = report.to_dict()
        out["signaling"] = D
        print(json.dumps(out, indent=1))
    else:
        print(f"STSR = {report.primal_value:.6f}")
        print(f"D = {D:.6f}")
        print(f"status = {report.status.value}")
        print(f"gap = {report.gap:.3e}")
    return EXIT_OK if report.status is Status.OPTIMAL else EXIT_SOLVER


def cmd_signaling(args) -> int:
    asm = read_assemblage(args.path)
    D = signaling_D(asm)
    nsit = satisfies_nsit(asm)
    if args.format == "json":
        print(json.dumps({"signaling": D, "nsit": nsit}))
    else:
        print(f"D = {D:.6f}")
        print(f"NSIT = {'holds' if nsit else 'violated'}")
    return EXIT_OK


def tomo_calibrate(shots: int, trials: int, seed: int) -> dict:
    """Percentiles of tomographic D and STSR for the Pauli assemblage over ``trials`` seeds."""
    base = pauli_assemblage()
    ss = np.random.SeedSequence(seed)
    seeds = [int(s.generate_state(1, dtype=np.uint64)[0]) for s in ss.spawn(trials)]
    Ds, Ss, solver_fail = [], [], 0
    for s in seeds:
        est = tomographic_assemblage(base, shots, s)
        Ds.append(signaling_D(est))
        rep = stsr_primal(est)
        if rep.status is not Status.OPTIMAL:
            solver_fail += 1
        Ss.append(rep.primal_value)
    Ds, Ss = np.array(Ds), np.array(Ss)
    return {
        "shots": shots,
        "trials": trials,
        "seed": seed,
        "signaling_p50": float(np.percentile(Ds, 50)),
        "signaling_p95": float(np.percentile(Ds, 95)),
        "signaling_p99": float(np.percentile(Ds, 99)),
        "stsr_mean": float(Ss.mean()),
        "stsr_p05": float(np.percentile(Ss, 5)),
        "stsr_p95": float(np.percentile(Ss, 95)),
        "solver_failures": solver_fail,
    }


def cmd_tomo(args) -> int:
    opts = merged_options(args, {"shots", "trials", "seed", "out", "format"})
    shots, trials = int(opts.get("shots", 8000)), int(opts.get("trials", 1000))
    if shots < 1 or trials < 1:
        raise UsageError("shots and trials must be positive")
    summary = tomo_calibrate(shots, trials, int(opts.get("seed", 0)))
    fmt = opts.get("format", "csv")
    if fmt == "json":
        text = json.dumps(summary, indent=1) + "\n"
    elif fmt == "md":
        text = "| quantity | value |\n|---|---|\n" + "".join(
            f"| {k} | {v:.6g} |\n" if isinstance(v, float) else f"| {k} | {v} |\n" for k, v in summary.items()
        )
    else:
        text = ",".join(summary) + "\n" + ",".join(
            f"{v:.6g}" if isinstance(v, float) else str(v) for v in summary.values()
        ) + "\n"
    _write(text, opts.get("out"))
    return EXIT_SOLVER if summary["solver_failures"] else EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "theory-curve":
            return cmd_sweep(args, noisy=False)
        if args.command == "noise-sim":
            return cmd_sweep(args, noisy=True)
        if args.command == "stsr":
            return cmd_stsr(args)
        if args.command == "signaling":
            return cmd_signaling(args)
        return cmd_tomo(args)
    except NumericalTrouble as exc:
        print(f"stsbench: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (StsError, UsageError, ValueError) as exc:
        print(f"stsbench: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
