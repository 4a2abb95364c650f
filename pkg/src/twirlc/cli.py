"""Command-line interface.

Subcommands: compile (fold twirls into circuit files), simulate (run one
circuit under a noise model), parity-bound (net-parity decay numbers), and
run (experiment harness from a config file).

Exit codes: 0 success, 2 config/usage error, 3 resource cap exceeded.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .circuit import parse as parse_circuit
from .circuit import serialize
from .compiler import compile_ensemble
from .errors import ConfigError, ParseError, ResourceCapError, TwirlcError
from .harness import load_config, run_experiment, write_outputs
from .metrics import tvd
from .parity import ParityProfile, markov_oracle, net_parity_bound
from .sim import (
    DecoherenceModel,
    LatticeModel,
    OverrotationModel,
    run_compiled,
    run_overrotation,
)


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="twirlc", description=__doc__)
    top.add_argument("--version", action="version", version=f"twirlc {__version__}")
    sub = top.add_subparsers(dest="command", required=True)

    comp = sub.add_parser("compile", help="randomly compile a circuit file")
    comp.add_argument("--circuit", required=True)
    comp.add_argument("--n-rc", type=int, default=1)
    comp.add_argument("--seed", type=int, required=True)
    comp.add_argument("--out-dir", default=".")
    comp.add_argument("--prefix", default=None, help="output basename (default: input stem)")

    simp = sub.add_parser("simulate", help="simulate a circuit under a noise model")
    simp.add_argument("--model", choices=("overrot", "decoh", "lattice"), required=True)
    simp.add_argument("--circuit", required=True)
    simp.add_argument("--n-rc", type=int, default=0, help="0 = bare circuit")
    simp.add_argument("--draws", type=int, default=1)
    simp.add_argument("--shots", type=int, default=None)
    simp.add_argument("--seed", type=int, required=True)
    simp.add_argument("--eps-easy", type=float, default=0.0)
    simp.add_argument("--eps-hard", type=float, default=0.0)
    simp.add_argument("--t1", type=float, default=50e-6)
    simp.add_argument("--t2", type=float, default=50e-6)
    simp.add_argument("--t-single", type=float, default=25e-9)
    simp.add_argument("--t-double", type=float, default=100e-9)
    simp.add_argument("--j-mean", type=float, default=0.0)
    simp.add_argument("--j-variance", type=float, default=1e-3)
    simp.add_argument("--out", default=None, help="CSV path (default: stdout)")

    par = sub.add_parser("parity-bound", help="net-parity bound and optional oracle")
    par.add_argument("--p", required=True,
                     help="comma list of per-round bounds or uniform:<value>")
    par.add_argument("--rounds", type=int, default=None,
                     help="round count (required with uniform:<value>)")
    par.add_argument("--oracle-samples", type=int, default=0)
    par.add_argument("--seed", type=int, default=0)

    runp = sub.add_parser("run", help="run an experiment config")
    runp.add_argument("--config", required=True)
    runp.add_argument("--out-dir", default=".")
    return top


def _cmd_compile(args) -> int:
    with open(args.circuit) as fh:
        bare = parse_circuit(fh.read())
    ensemble = compile_ensemble(bare, args.n_rc, args.seed)
    stem = args.prefix or os.path.splitext(os.path.basename(args.circuit))[0]
    os.makedirs(args.out_dir, exist_ok=True)
    frames = {}
    for i, member in enumerate(ensemble.members):
        path = os.path.join(args.out_dir, f"{stem}.rc{i:03d}.circ")
        with open(path, "w") as fh:
            fh.write(serialize(member.circuit))
        frames[str(i)] = str(member.final_frame)
        print(path)
    sidecar = os.path.join(args.out_dir, f"{stem}.frames.json")
    with open(sidecar, "w") as fh:
        json.dump({"seed": args.seed, "n_rc": args.n_rc, "frames": frames}, fh, indent=2)
        fh.write("\n")
    print(sidecar)
    return 0


def _simulate_once(bare, args, rng, draw_seed):
    if args.model == "lattice":
        model = LatticeModel(n_sys=bare.n, j_mean=args.j_mean, j_variance=args.j_variance)
        dec = None
    else:
        model = OverrotationModel(args.eps_easy, args.eps_hard)
        dec = (
            DecoherenceModel(args.t1, args.t2, args.t_single, args.t_double)
            if args.model == "decoh"
            else None
        )
    ideal = run_overrotation(bare, OverrotationModel()).distribution
    if args.n_rc > 0:
        ensemble = compile_ensemble(bare, args.n_rc, draw_seed)
        if args.model == "lattice":
            results, avg = run_compiled(ensemble, model, rng=rng)
        else:
            results, avg = run_compiled(ensemble, model, dec=dec)
        r = sum(res.error_rate for res in results) / len(results)
        return r, tvd(avg, ideal)
    if args.model == "lattice":
        from .sim import run_lattice

        res = run_lattice(bare, model, rng)
    else:
        res = run_overrotation(bare, model, dec)
    return res.error_rate, tvd(res.distribution, ideal)


def _cmd_simulate(args) -> int:
    with open(args.circuit) as fh:
        bare = parse_circuit(fh.read())
    lines = ["M,n_rc,draw,r,tvd,seed"]
    children = np.random.SeedSequence(args.seed).spawn(args.draws)
    for draw, child in enumerate(children):
        rng = np.random.default_rng(child)
        r, d = _simulate_once(bare, args, rng, child)
        lines.append(
            f"{bare.hard_cycle_count},{args.n_rc},{draw},{r!r},{d!r},{args.seed}"
        )
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_parity(args) -> int:
    if args.p.startswith("uniform:"):
        if not args.rounds:
            raise ConfigError("uniform profile needs --rounds")
        profile = ParityProfile.uniform(float(args.p.split(":", 1)[1]), args.rounds)
    else:
        probs = tuple(float(tok) for tok in args.p.split(","))
        if args.rounds and args.rounds != len(probs):
            raise ConfigError(f"--rounds {args.rounds} != {len(probs)} listed bounds")
        profile = ParityProfile(probs)
    bound = net_parity_bound(profile)
    print(f"rounds: {len(profile.probs)}")
    print(f"closed_form: {bound!r}")
    if args.oracle_samples > 0:
        rng = np.random.default_rng(args.seed)
        est = markov_oracle(profile, args.oracle_samples, rng)
        sigma = math.sqrt(max(bound * (1 - bound), 1e-12) / args.oracle_samples)
        print(f"oracle: {est!r}")
        print(f"oracle_sigma: {sigma!r}")
    return 0


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    table = run_experiment(cfg)
    os.makedirs(args.out_dir, exist_ok=True)
    csv_path, manifest_path = write_outputs(table, cfg, args.out_dir)
    print(csv_path)
    print(manifest_path)
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "compile": _cmd_compile,
        "simulate": _cmd_simulate,
        "parity-bound": _cmd_parity,
        "run": _cmd_run,
    }
    try:
        return handlers[args.command](args)
    except ResourceCapError as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return 3
    except (ConfigError, ParseError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except TwirlcError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
