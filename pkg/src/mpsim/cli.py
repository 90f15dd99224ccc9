"""Command-line entry point: build or load circuits, run engines, verify, bench.

Exit codes: 0 success, 1 tolerance violation or engine failure, 2 input
error, 3 resource abort. The resource guard triggers when the projected
peak memory of a run exceeds the byte budget in the MPSIM_MEMORY_CAP_BYTES
environment variable (no guard when unset).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import oracle
from .circuits import Circuit, hea, heisenberg_1d, ising_2d, load_circuit, qaoa
from .gates import ProductGenerator, gate_generator
from .linalg import LanczosConvergenceError
from .metrics import ProbeSpec, StepMetrics
from .mps import MPS, norm, product_state
from .tebd import UNBOUNDED_CHI, GateLog, TebdConfig, run_circuit_tebd
from .tdvp import TdvpConfig, run_circuit_tdvp

EXIT_OK = 0
EXIT_TOLERANCE = 1
EXIT_INPUT = 2
EXIT_RESOURCE = 3

MEMORY_CAP_ENV = "MPSIM_MEMORY_CAP_BYTES"

BUILDER_FAMILIES = ("heisenberg1d", "ising2d", "qaoa", "hea")


@dataclass
class RunConfig:
    """Engine-independent run settings assembled from CLI flags."""

    engine: str = "both"
    chi_max: int = UNBOUNDED_CHI
    s_max: float = 1e-12
    krylov_max: int = 25
    krylov_tol: float = 1e-12
    probes: ProbeSpec = field(default_factory=ProbeSpec)
    out_dir: str = "."
    prefix: str = "metrics"
    seed: int | None = None
    jobs: int = 1


def metrics_header(num_qubits: int) -> list[str]:
    bonds = [f"chi_{j}" for j in range(1, num_qubits)]
    return ["step", *bonds, "cost", "correlator", "discarded_weight_cum", "wall_time_ms"]


def write_metrics_csv(path: str, num_qubits: int, metrics: list[StepMetrics]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(metrics_header(num_qubits))
        for m in metrics:
            writer.writerow(
                [
                    m.step,
                    *m.bond_dims,
                    m.cost,
                    repr(m.correlator),
                    repr(m.discarded_weight_cum),
                    repr(m.wall_time_ms),
                ]
            )


def projected_peak_bytes(num_qubits: int, chi_max: int, local_dim: int = 2) -> int:
    """Upper bound on resident tensor bytes for a run at the given cap."""
    caps = []
    for n in range(num_qubits + 1):
        exponent = min(n, num_qubits - n)
        if exponent >= math.log(max(chi_max, 2), local_dim):
            caps.append(chi_max)
        else:
            caps.append(local_dim**exponent)
    state = sum(16 * local_dim * caps[n] * caps[n + 1] for n in range(num_qubits))
    interior = max(caps)
    transient = 16 * (local_dim * interior) ** 2 * 4
    return state + transient


def check_memory_cap(num_qubits: int, chi_max: int) -> str | None:
    """Returns an abort message when the projected memory exceeds the cap."""
    cap = os.environ.get(MEMORY_CAP_ENV)
    if cap is None:
        return None
    try:
        cap_bytes = int(cap)
    except ValueError:
        return f"invalid {MEMORY_CAP_ENV}={cap!r}"
    projected = projected_peak_bytes(num_qubits, chi_max)
    if projected > cap_bytes:
        return (
            f"projected peak memory {projected} bytes exceeds "
            f"{MEMORY_CAP_ENV}={cap_bytes}; pass a smaller --chi-max"
        )
    return None


def build_circuit(args: argparse.Namespace) -> Circuit:
    if args.circuit is not None:
        return load_circuit(args.circuit)
    family = args.builder
    if family == "heisenberg1d":
        return heisenberg_1d(
            num_qubits=args.n,
            coupling=args.coupling,
            transverse_field=args.field,
            dt=args.dt,
            steps=args.steps,
            periodic=args.periodic,
        )
    if family == "ising2d":
        if args.rows is None or args.cols is None:
            raise ValueError("ising2d needs --rows and --cols")
        return ising_2d(
            rows=args.rows,
            cols=args.cols,
            coupling=args.coupling,
            transverse_field=args.field,
            dt=args.dt,
            steps=args.steps,
        )
    if family == "qaoa":
        return qaoa(num_qubits=args.n, layers=args.steps, seed=args.seed or 0)
    if family == "hea":
        return hea(num_qubits=args.n, depth=args.steps, seed=args.seed or 0, entangler=args.entangler)
    raise ValueError(f"unknown builder {family!r}")


def run_engine(
    engine: str, circuit: Circuit, cfg: RunConfig
) -> tuple[MPS, list[StepMetrics], GateLog]:
    psi = product_state(circuit.num_qubits, 2, [0] * circuit.num_qubits)
    log = GateLog()
    if engine == "tebd":
        engine_cfg = TebdConfig(s_max=cfg.s_max, chi_max=cfg.chi_max)
        psi, metrics = run_circuit_tebd(circuit, psi, engine_cfg, cfg.probes, log)
    elif engine == "tdvp":
        engine_cfg = TdvpConfig(
            s_max=cfg.s_max,
            chi_max=cfg.chi_max,
            krylov_max=cfg.krylov_max,
            krylov_tol=cfg.krylov_tol,
        )
        psi, metrics = run_circuit_tdvp(circuit, psi, engine_cfg, cfg.probes, log)
    else:
        raise ValueError(f"unknown engine {engine!r}")
    return psi, metrics, log


def cmd_run(args: argparse.Namespace) -> int:
    try:
        circuit = build_circuit(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    cfg = config_from_args(args)
    abort = check_memory_cap(circuit.num_qubits, cfg.chi_max)
    if abort is not None:
        print(f"resource abort: {abort}", file=sys.stderr)
        return EXIT_RESOURCE
    engines = ("tebd", "tdvp") if cfg.engine == "both" else (cfg.engine,)
    os.makedirs(cfg.out_dir, exist_ok=True)
    for engine in engines:
        try:
            psi, metrics, log = run_engine(engine, circuit, cfg)
        except LanczosConvergenceError as exc:
            print(f"error: {engine} engine failed: {exc}", file=sys.stderr)
            return EXIT_TOLERANCE
        csv_path = os.path.join(cfg.out_dir, f"{cfg.prefix}_{engine}.csv")
        write_metrics_csv(csv_path, circuit.num_qubits, metrics)
        summary = {
            "engine": engine,
            "num_qubits": circuit.num_qubits,
            "layers": len(metrics),
            "final_norm": norm(psi),
            "bond_dims": psi.bond_dims(),
            "swaps": log.swaps,
            "discarded_weight_cum": log.discarded_weight,
        }
        summary_path = os.path.join(cfg.out_dir, f"{cfg.prefix}_{engine}_summary.json")
        with open(summary_path, "w", encoding="utf-8") as fh:
            json.dump(summary, fh, indent=1)
        print(f"{engine}: wrote {csv_path} and {summary_path}")
    return EXIT_OK


def worst_projection_residual(trials: int, seed: int) -> float:
    """Worst relative residual between global and windowed projections."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    num_sites = 6
    for trial in range(trials):
        span_lo = int(rng.integers(1, num_sites))
        span_hi = int(rng.integers(span_lo + 1, min(num_sites, span_lo + 3) + 1))
        a = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        b = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        gen = ProductGenerator(
            coefficient=float(rng.uniform(-2.0, 2.0)),
            factor_left=(a + a.conj().T) / 2,
            factor_right=(b + b.conj().T) / 2,
            span=(span_lo, span_hi),
        )
        psi = oracle.random_mps(num_sites, chi=4, seed=int(rng.integers(2**31)))
        worst = max(worst, oracle.windowed_projection_residual(psi, gen))
    return worst


def cmd_verify(args: argparse.Namespace) -> int:
    if args.n > 12 or (args.rows or 0) * (args.cols or 0) > 12:
        print("error: verify is capped at 12 qubits", file=sys.stderr)
        return EXIT_INPUT
    try:
        circuit = build_circuit(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    cfg = config_from_args(args)
    reference = oracle.run_circuit_dense(
        circuit, oracle.dense_basis_state(circuit.num_qubits, [0] * circuit.num_qubits)
    )
    ok = True
    for engine in ("tebd", "tdvp"):
        psi, _, _ = run_engine(engine, circuit, cfg)
        fid = oracle.fidelity(oracle.mps_to_dense(psi), reference)
        passed = fid >= 1.0 - args.tol_fidelity
        ok = ok and passed
        print(f"{engine} fidelity: {fid:.12f} (tol {args.tol_fidelity:g}) "
              f"{'PASS' if passed else 'FAIL'}")
    residual = worst_projection_residual(args.trials, seed=args.seed or 0)
    passed = residual <= args.tol_projection
    ok = ok and passed
    print(f"projection residual: {residual:.3e} (tol {args.tol_projection:g}) "
          f"{'PASS' if passed else 'FAIL'}")
    return EXIT_OK if ok else EXIT_TOLERANCE


def bench_one_size(family: str, size: int, args: argparse.Namespace, cfg: RunConfig):
    bench_args = argparse.Namespace(**vars(args))
    bench_args.n = size
    bench_args.circuit = None
    bench_args.builder = family
    if family == "ising2d" and (bench_args.rows is None or bench_args.cols is None):
        raise ValueError("ising2d bench needs --rows and --cols")
    circuit = build_circuit(bench_args)
    results = {}
    for engine in ("tebd", "tdvp"):
        _, metrics, _ = run_engine(engine, circuit, cfg)
        results[engine] = metrics
    return circuit.num_qubits, results


def cmd_bench(args: argparse.Namespace) -> int:
    if not args.sizes:
        print("bench: empty size list, nothing to do")
        return EXIT_OK
    cfg = config_from_args(args)
    for size in args.sizes:
        abort = check_memory_cap(size, cfg.chi_max)
        if abort is not None:
            print(f"resource abort: {abort}", file=sys.stderr)
            return EXIT_RESOURCE
    rows = []
    violations = []
    worker = lambda size: bench_one_size(args.family, size, args, cfg)
    try:
        if cfg.jobs > 1:
            with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
                outcomes = list(pool.map(worker, args.sizes))
        else:
            outcomes = [worker(size) for size in args.sizes]
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    for size, (num_qubits, results) in zip(args.sizes, outcomes):
        horizon = {}
        for engine in ("tebd", "tdvp"):
            saturated = [m.step for m in results[engine] if max(m.bond_dims) >= cfg.chi_max]
            horizon[engine] = saturated[0] if saturated else ""
        for m_tebd, m_tdvp in zip(results["tebd"], results["tdvp"]):
            chi_tebd = sum(m_tebd.bond_dims)
            chi_tdvp = sum(m_tdvp.bond_dims)
            if chi_tdvp > chi_tebd:
                violations.append((size, m_tebd.step, chi_tdvp, chi_tebd))
            rows.append(
                [
                    args.family,
                    num_qubits,
                    m_tebd.step,
                    chi_tebd,
                    chi_tdvp,
                    m_tebd.cost,
                    m_tdvp.cost,
                    horizon["tebd"],
                    horizon["tdvp"],
                ]
            )
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            [
                "family",
                "n",
                "step",
                "chi_sum_tebd",
                "chi_sum_tdvp",
                "cost_tebd",
                "cost_tdvp",
                "horizon_tebd",
                "horizon_tdvp",
            ]
        )
        writer.writerows(rows)
    print(f"bench: wrote {args.out}")
    for size, step, chi_tdvp, chi_tebd in violations:
        print(
            f"bond-economy violation at n={size} step={step}: "
            f"tdvp {chi_tdvp} > tebd {chi_tebd}",
            file=sys.stderr,
        )
    return EXIT_TOLERANCE if violations else EXIT_OK


def config_from_args(args: argparse.Namespace) -> RunConfig:
    probes = ProbeSpec(correlator_site=getattr(args, "correlator_site", None))
    return RunConfig(
        engine=getattr(args, "engine", "both"),
        chi_max=args.chi_max if args.chi_max is not None else UNBOUNDED_CHI,
        s_max=args.s_max,
        krylov_max=getattr(args, "krylov_max", 25),
        krylov_tol=getattr(args, "krylov_tol", 1e-12),
        probes=probes,
        out_dir=getattr(args, "out_dir", "."),
        prefix=getattr(args, "prefix", "metrics"),
        seed=getattr(args, "seed", None),
        jobs=getattr(args, "jobs", 1),
    )


def _add_circuit_source_flags(parser: argparse.ArgumentParser, with_file: bool = True) -> None:
    if with_file:
        parser.add_argument("--circuit", help="path to a circuit IR JSON file")
    else:
        parser.set_defaults(circuit=None)
    parser.add_argument("--builder", choices=BUILDER_FAMILIES, help="benchmark family")
    parser.add_argument("--n", type=int, default=8, help="qubit count (chain families)")
    parser.add_argument("--rows", type=int, default=None, help="grid rows (ising2d)")
    parser.add_argument("--cols", type=int, default=None, help="grid columns (ising2d)")
    parser.add_argument("--steps", type=int, default=10, help="Trotter steps / layers / depth")
    parser.add_argument("--dt", type=float, default=0.1, help="Trotter timestep")
    parser.add_argument("--coupling", type=float, default=1.0, help="pair coupling J")
    parser.add_argument("--field", type=float, default=1.0, help="single-site field h or g")
    parser.add_argument("--periodic", action="store_true", help="periodic chain (heisenberg1d)")
    parser.add_argument("--entangler", choices=("cz", "cx"), default="cz", help="HEA entangler")
    parser.add_argument("--seed", type=int, default=None, help="random-circuit seed")


def _add_engine_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--chi-max", type=int, default=None, help="bond-dimension cap")
    parser.add_argument("--s-max", type=float, default=1e-12, help="SVD truncation threshold")
    parser.add_argument("--krylov-max", type=int, default=25)
    parser.add_argument("--krylov-tol", type=float, default=1e-12)
    parser.add_argument("--correlator-site", type=int, default=None,
                        help="left site of the correlator probe (default floor(N/2))")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mpsim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a circuit and emit metrics CSV + summary JSON")
    _add_circuit_source_flags(p_run)
    _add_engine_flags(p_run)
    p_run.add_argument("--engine", choices=("tebd", "tdvp", "both"), default="both")
    p_run.add_argument("--out-dir", default=".", help="output directory")
    p_run.add_argument("--prefix", default="metrics", help="output filename prefix")
    p_run.set_defaults(func=cmd_run)

    p_verify = sub.add_parser("verify", help="run both engines against the dense oracle")
    _add_circuit_source_flags(p_verify, with_file=False)
    _add_engine_flags(p_verify)
    p_verify.add_argument("--tol-fidelity", type=float, default=1e-8)
    p_verify.add_argument("--tol-projection", type=float, default=1e-10)
    p_verify.add_argument("--trials", type=int, default=10,
                          help="projection-equivalence subcheck trials")
    p_verify.set_defaults(func=cmd_verify, engine="both")

    p_bench = sub.add_parser("bench", help="side-by-side engine cost table")
    _add_circuit_source_flags(p_bench, with_file=False)
    _add_engine_flags(p_bench)
    p_bench.add_argument("--family", choices=BUILDER_FAMILIES, required=True)
    p_bench.add_argument("--sizes", type=int, nargs="*", default=[], help="qubit counts")
    p_bench.add_argument("--out", default="bench.csv", help="aggregate CSV path")
    p_bench.add_argument("--jobs", type=int, default=1, help="parallel (family, size) cells")
    p_bench.set_defaults(func=cmd_bench, engine="both")

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    if args.command in ("run", "verify") and args.circuit is None and args.builder is None:
        parser.error("one of --circuit or --builder is required")
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
