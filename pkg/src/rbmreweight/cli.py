"""Command line entry point: ``rbmreweight <subcommand> ...``."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import ConfigError, ExperimentSpec, parse_config, parse_count, parse_schedule
from .exact import PauliString, chsh, ground_state, network_state_vector, pauli_expectation, save_state
from .experiments import (CONVERGENCE_COLUMNS, SUMMARY_COLUMNS, _Evaluator, chains_for, resolve_state,
                          rows_to_csv, run_experiment, summarize, summary_path, write_csv)
from .network import save_params
from .rotations import MeasurementBasis, attach_rotations
from .sampler import SamplerConfig, dump_records, run_chains
from .trainer import TrainConfig, train_ground_state, write_training_log

log = logging.getLogger("rbmreweight")


def _add_state_args(p, required=True):
    p.add_argument("--state", required=required,
                   help="bell-complex, bell-imag, ghz:N, tfim:N or a parameter file")
    p.add_argument("--field", type=float, default=None, help="transverse field h for tfim states")
    p.add_argument("--coupling", type=float, default=None, help="Ising coupling J for tfim states")


def _add_sampler_args(p):
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--burn-in", type=int, default=None)
    p.add_argument("--thin", type=int, default=None)
    p.add_argument("--chains", type=int, default=None)
    p.add_argument("--workers", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rbmreweight", description=__doc__)
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("state", help="build or train a network and save its parameters")
    _add_state_args(p)
    p.add_argument("--iters", type=int, default=2000, help="SR iterations for tfim states")
    p.add_argument("--no-translation-invariance", action="store_true")
    p.add_argument("--train-log", help="CSV training log (tfim states)")
    p.add_argument("--out", required=True)

    p = sub.add_parser("sample", help="one phase-reweighted estimate")
    _add_state_args(p)
    p.add_argument("--observable", required=True, help="Pauli string (XX, X1X2) or chsh")
    p.add_argument("--basis", help="measurement basis; defaults to the observable's own")
    p.add_argument("--samples", default="1e6")
    _add_sampler_args(p)
    p.add_argument("--dump", help="write raw records 'chain sweep v... phase'")
    p.add_argument("--out", help="CSV file (default stdout)")

    for name, helptext in (("convergence", "deviation versus sample count"),
                           ("size-scaling", "deviation versus system size at fixed sample count")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", help="key = value experiment file; flags override it")
        _add_state_args(p, required=False)
        p.add_argument("--observable", action="append", help="repeatable")
        p.add_argument("--samples", help="schedule, e.g. 1e2,1e4,1e6")
        p.add_argument("--repeats", type=int, default=None)
        if name == "size-scaling":
            p.add_argument("--sizes", help="e.g. 2,3,4,5")
        _add_sampler_args(p)
        p.add_argument("--out", default=None)

    p = sub.add_parser("exact", help="exact reference values")
    _add_state_args(p)
    p.add_argument("--observable", action="append", required=True)
    p.add_argument("--dump-state", help="write the normalized state vector 'index re im'")
    return parser


def _resolve(args):
    return resolve_state(args.state, 1.0 if args.field is None else args.field,
                         1.0 if args.coupling is None else args.coupling,
                         getattr(args, "iters", 2000),
                         not getattr(args, "no_translation_invariance", False))


def cmd_state(args) -> int:
    if args.state.lower().startswith("tfim:"):
        n = int(args.state.split(":", 1)[1])
        cfg = TrainConfig(n_spins=n, field_strength=1.0 if args.field is None else args.field,
                          coupling=1.0 if args.coupling is None else args.coupling,
                          max_iters=args.iters,
                          translation_invariant=not args.no_translation_invariance)
        result = train_ground_state(cfg)
        params = result.params
        print(f"energy {result.energy:.12f} after {result.iterations} iterations ({result.status})")
        if args.train_log:
            write_training_log(result, args.train_log)
    else:
        params = _resolve(args).params
    save_params(params, args.out)
    print(f"wrote {args.out}")
    return 0


def cmd_sample(args) -> int:
    state = _resolve(args)
    spec = ExperimentSpec().updated(seed=args.seed, burn_in=args.burn_in, thin=args.thin,
                                    chains=args.chains, workers=args.workers)
    q = parse_count(args.samples)
    n = state.n_spins
    basis = None
    if args.observable.lower() == "chsh":
        if args.basis or args.dump:
            raise ValueError("--basis and --dump do not apply to chsh")
    else:
        op = PauliString.parse(args.observable, n)
        basis = op.basis()
        if args.basis:
            basis = MeasurementBasis(args.basis).axes
            if len(basis) != n:
                raise ValueError(f"basis {args.basis!r} has {len(basis)} sites, state has {n}")
            for i in op.support:
                if basis[i] != op.ops[i]:
                    raise ValueError(f"{op.label()} is not diagonal in basis {basis}")
        if args.dump:
            cfg = SamplerConfig(n_samples=q, burn_in=spec.burn_in, thin=spec.thin,
                                n_chains=chains_for(q, spec.chains), seed=spec.seed)
            batches = list(run_chains(attach_rotations(state.params, basis), cfg, spec.workers))
            dump_records(batches, args.dump)
    ev = _Evaluator(state, spec)
    row = ev.estimate(args.observable, q, spec.seed, basis)
    row.update(repeat=0, state=state.state_id, param_hash=ev.hash)
    text = rows_to_csv([row], CONVERGENCE_COLUMNS)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _spec_from_args(args, experiment: str) -> ExperimentSpec:
    spec = parse_config(args.config) if args.config else ExperimentSpec(
        experiment=experiment, sizes=(2,) if experiment == "size-scaling" else ())
    if spec.experiment != experiment:
        raise ConfigError(f"config describes a {spec.experiment} experiment, not {experiment}")
    kw = dict(state=args.state, field=args.field, coupling=args.coupling, repeats=args.repeats,
              seed=args.seed, burn_in=args.burn_in, thin=args.thin, chains=args.chains,
              workers=args.workers, out=args.out)
    if args.observable:
        kw["observables"] = tuple(args.observable)
    if args.samples:
        kw["schedule"] = parse_schedule(args.samples)
    if getattr(args, "sizes", None):
        kw["sizes"] = tuple(int(s) for s in args.sizes.replace(",", " ").split())
    return spec.updated(**kw)


def cmd_experiment(args) -> int:
    spec = _spec_from_args(args, args.command)
    rows, columns = run_experiment(spec)
    write_csv(rows, columns, spec.out)
    write_csv(summarize(rows), SUMMARY_COLUMNS, summary_path(spec.out))
    print(f"wrote {spec.out} ({len(rows)} rows) and {summary_path(spec.out)}")
    return 0


def cmd_exact(args) -> int:
    state = _resolve(args)
    psi = network_state_vector(state.params)
    ed = ground_state(state.hamiltonian)[1] if state.hamiltonian is not None else None
    print("observable,encoded,ed")

    def value(label, vec):
        op = PauliString.parse(label, state.n_spins)
        return pauli_expectation(vec, op)

    for label in args.observable:
        if label.lower() == "chsh":
            enc = chsh(value("XX", psi), value("ZZ", psi))
            ref = None if ed is None else chsh(value("XX", ed), value("ZZ", ed))
        else:
            enc = value(label, psi)
            ref = None if ed is None else value(label, ed)
        print(f"{label},{enc!r},{'' if ref is None else repr(ref)}")
    if args.dump_state:
        save_state(psi, args.dump_state)
    return 0


COMMANDS = {"state": cmd_state, "sample": cmd_sample, "convergence": cmd_experiment,
            "size-scaling": cmd_experiment, "exact": cmd_exact}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
