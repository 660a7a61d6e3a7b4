"""Command-line entry point: ``hamreduce <command> ...``.

Every JSON artifact carries ``schema_version``, the full run configuration
and a SHA-256 digest of the input, and is written with sorted keys so that
reruns are byte-identical.  Exit codes: 0 ok, 2 input error, 3 cap error,
4 promise violation.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
from dataclasses import asdict, dataclass

import numpy as np

from . import __version__
from .circuit import (build_sat_verifier, cz_sandwich_normalize, decompose_elementary,
                      elementary_gate_count, to_cz_form)
from .clock import johnson_path_d2, johnson_path_generic, min_clock_qubits, star_clock
from .cnf import parse_dimacs, random_kcnf, to_dimacs
from .errors import CapExceeded, InputError, PromiseViolated
from .hamiltonian import (A_CONST, B_CONST, HamiltonianSpec, build_hu_3local, build_hu_5local,
                          build_trivial_sat_hamiltonian, locality_of)
from .qpf import QpfConfig, qpf_algorithm
from .spectra import DENSE_CAP, ITERATIVE_CAP, eigenvalues, ground_energy, partition_function_exact

SCHEMA_VERSION = 1

EXIT_OK, EXIT_INPUT, EXIT_CAP, EXIT_PROMISE = 0, 2, 3, 4


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    dense_cap: int = DENSE_CAP
    iterative_cap: int = ITERATIVE_CAP
    a_const: float = A_CONST
    b_const: float = B_CONST
    num_bins: int | None = None
    epsilon: float | None = None
    eta: float = 1e-4
    ell: int | None = None
    reps: int = 9

    def __post_init__(self):
        if self.dense_cap < 1 or self.iterative_cap < 1:
            raise InputError("caps must be >= 1")


def _config_from_args(args) -> RunConfig:
    return RunConfig(seed=args.seed, dense_cap=args.dense_cap, iterative_cap=args.iterative_cap,
                     a_const=args.a_const, b_const=args.b_const, num_bins=args.num_bins,
                     epsilon=args.epsilon, eta=args.eta, ell=args.ell, reps=args.reps)


def _read(path: str) -> bytes:
    try:
        with open(path, "rb") as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def _digest(data: bytes) -> str:
    return "sha256:" + hashlib.sha256(data).hexdigest()


def _envelope(command: str, cfg: RunConfig, digest: str | None, payload: dict) -> dict:
    return {"schema_version": SCHEMA_VERSION, "tool_version": __version__, "command": command,
            "config": asdict(cfg), "input_digest": digest, **payload}


def _emit(obj: dict, out: str | None) -> None:
    text = json.dumps(obj, sort_keys=True, indent=2) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# --------------------------------------------------------------------------
# commands


def cmd_reduce(args, cfg: RunConfig) -> int:
    if not args.out:
        raise InputError("reduce needs --out for the Hamiltonian JSON")
    data = _read(args.input)
    phi = parse_dimacs(data)
    summary: dict = {"flavor": args.flavor, "num_vars": phi.num_vars, "num_clauses": phi.num_clauses}
    if args.flavor == "trivial":
        spec = build_trivial_sat_hamiltonian(phi)
    else:
        verifier = build_sat_verifier(phi)
        summary["gate_count_certificate"] = verifier.gate_count_certificate
        summary["elementary_gates"] = elementary_gate_count(verifier)
        if args.flavor == "five_local":
            circ = decompose_elementary(verifier)
            n_cl = args.n_cl or min_clock_qubits(len(circ.gates), 2)
            sched = johnson_path_d2(n_cl)
            spec = build_hu_5local(circ, sched, a_const=cfg.a_const, b_const=cfg.b_const)
        elif args.flavor == "three_local":
            czc = cz_sandwich_normalize(to_cz_form(verifier))
            if args.clock == "star":
                sched = star_clock(args.n_cl or czc.total_steps + 2)
            else:
                sched = johnson_path_d2(args.n_cl or min_clock_qubits(czc.total_steps, 2))
            spec = build_hu_3local(czc, sched)
        else:
            raise InputError(f"unknown flavor {args.flavor!r}")
    summary.update({
        "total_qubits": spec.total_qubits, "locality": locality_of(spec), "num_terms": len(spec.terms),
        "thresholds": None if spec.thresholds is None else
        {"a": spec.thresholds.a, "b": spec.thresholds.b},
        "coefficients": spec.coefficients})
    with open(args.out, "w") as fh:
        fh.write(spec.to_json())
    _emit(_envelope("reduce", cfg, _digest(data), {"summary": summary, "spec_path": args.out}),
          args.summary)
    return EXIT_OK


def cmd_spectrum(args, cfg: RunConfig) -> int:
    data = _read(args.spec)
    spec = HamiltonianSpec.from_json(data.decode("utf-8"))
    if args.format == "csv":
        w = eigenvalues(spec, cfg.dense_cap)
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["index", "eigenvalue"])
        for i, e in enumerate(w):
            writer.writerow([i, repr(float(e))])
        text = buf.getvalue()
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        return EXIT_OK
    res = ground_energy(spec, dense_cap=cfg.dense_cap, iterative_cap=cfg.iterative_cap,
                        seed=cfg.seed)
    payload = {"lambda": res.ground_energy, "method": res.method, "residual": res.residual,
               "total_qubits": spec.total_qubits, "locality": locality_of(spec)}
    if args.beta is not None:
        payload["beta"] = args.beta
        payload["Z"] = partition_function_exact(spec, args.beta, cfg.dense_cap)
    _emit(_envelope("spectrum", cfg, _digest(data), payload), args.out)
    return EXIT_OK


def cmd_qpf(args, cfg: RunConfig) -> int:
    data = _read(args.spec)
    spec = HamiltonianSpec.from_json(data.decode("utf-8"))
    qcfg = QpfConfig(num_bins=cfg.num_bins, noise=not args.exact_counts, ell_count=cfg.ell,
                     reps_count=cfg.reps, eta=cfg.eta)
    est = qpf_algorithm(spec, args.beta, args.delta, args.backend, np.random.default_rng(cfg.seed),
                        qcfg, cap=cfg.dense_cap)
    payload = {"z_half": est.z_tilde_half, "exact_Z": est.exact_z, "ratio": est.ratio,
               "beta": args.beta, "delta": args.delta, "backend": args.backend,
               "bins": [asdict(b) for b in est.bins]}
    _emit(_envelope("qpf", cfg, _digest(data), payload), args.out)
    return EXIT_OK


def cmd_clock_path(args, cfg: RunConfig) -> int:
    if args.d == 2:
        sched = johnson_path_d2(args.n)
    else:
        sched = johnson_path_generic(args.n, args.d)
    payload = {"n_cl": sched.n_cl, "d": sched.d, "total_steps": sched.total_steps,
               "path": [list(s) for s in sched.path]}
    _emit(_envelope("clock-path", cfg, None, payload), args.out)
    return EXIT_OK


def cmd_gatecount(args, cfg: RunConfig) -> int:
    if args.input:
        data = _read(args.input)
        phi = parse_dimacs(data)
    else:
        if args.n is None or args.m is None:
            raise InputError("give --input or both --n and --m")
        phi = random_kcnf(args.n, args.m, args.k, np.random.default_rng(cfg.seed))
        data = to_dimacs(phi).encode()
    circ = build_sat_verifier(phi)
    actual = elementary_gate_count(circ)
    payload = {"num_vars": phi.num_vars, "num_clauses": phi.num_clauses,
               "arity_bound": phi.arity_bound, "high_level_gates": len(circ.gates),
               "elementary_gates": actual, "certificate": circ.gate_count_certificate,
               "within_certificate": actual <= circ.gate_count_certificate,
               "qubits": circ.num_qubits}
    _emit(_envelope("gatecount", cfg, _digest(data), payload), args.out)
    return EXIT_OK


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--dense-cap", type=int, default=DENSE_CAP)
    common.add_argument("--iterative-cap", type=int, default=ITERATIVE_CAP)
    common.add_argument("--a-const", type=float, default=A_CONST)
    common.add_argument("--b-const", type=float, default=B_CONST)
    common.add_argument("--num-bins", type=int, default=None)
    common.add_argument("--epsilon", type=float, default=None)
    common.add_argument("--eta", type=float, default=1e-4)
    common.add_argument("--ell", type=int, default=None, help="counting register width")
    common.add_argument("--reps", type=int, default=9, help="median repetitions for counting")
    common.add_argument("--out", default=None)

    p = argparse.ArgumentParser(prog="hamreduce", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("reduce", parents=[common], help="CNF to Hamiltonian spec")
    r.add_argument("--input", required=True)
    r.add_argument("--flavor", choices=["trivial", "five_local", "three_local"], default="trivial")
    r.add_argument("--n-cl", type=int, default=None)
    r.add_argument("--clock", choices=["johnson", "star"], default="johnson")
    r.add_argument("--summary", default=None, help="write the summary here instead of stdout")
    r.set_defaults(func=cmd_reduce)

    s = sub.add_parser("spectrum", parents=[common], help="ground energy, Z or the full spectrum")
    s.add_argument("--spec", required=True)
    s.add_argument("--beta", type=float, default=None)
    s.add_argument("--format", choices=["json", "csv"], default="json")
    s.set_defaults(func=cmd_spectrum)

    q = sub.add_parser("qpf", parents=[common], help="partition-function estimate")
    q.add_argument("--spec", required=True)
    q.add_argument("--beta", type=float, required=True)
    q.add_argument("--delta", type=float, required=True)
    q.add_argument("--backend", choices=["ideal", "simulated"], default="ideal")
    q.add_argument("--exact-counts", action="store_true", help="ideal backend without noise")
    q.set_defaults(func=cmd_qpf)

    c = sub.add_parser("clock-path", parents=[common], help="Johnson-graph clock path")
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--d", type=int, default=2)
    c.set_defaults(func=cmd_clock_path)

    g = sub.add_parser("gatecount", parents=[common], help="verifier gate count vs certificate")
    g.add_argument("--input", default=None)
    g.add_argument("--n", type=int, default=None)
    g.add_argument("--m", type=int, default=None)
    g.add_argument("--k", type=int, default=3)
    g.set_defaults(func=cmd_gatecount)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config_from_args(args)
        return args.func(args, cfg)
    except PromiseViolated as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PROMISE
    except CapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
