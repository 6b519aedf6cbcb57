"""
Main entry point - kinetic-uq command line
  kinetic-uq run <scenario-file> [--out DIR] [--seed S] [--replications R] [--threads T] [--full]
  kinetic-uq catalog
  kinetic-uq verify
"""
import argparse
import logging
import os
import sys

from dotenv import load_dotenv

sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from errors import ConfigurationError, KineticUQError
from harness.experiment import run_experiment
from harness.scenario import load_scenario
from harness.verify import run_verification
from models.catalog import get_model_entry, list_models
from tools.report_tools import emit_report

load_dotenv()

logger = logging.getLogger("kinetic_uq")


def _env_int(name: str):
    value = os.getenv(name)
    if value is None or value.strip() == "":
        return None
    try:
        return int(value)
    except ValueError as e:
        raise ConfigurationError(f"environment variable must be an integer, got '{value}'", name) from e


def _banner(title: str):
    print("=" * 80)
    print(title)
    print("=" * 80)


def cmd_run(args) -> int:
    spec = load_scenario(
        args.scenario,
        env_seed=_env_int("KINETIC_UQ_SEED"),
        env_output=os.getenv("KINETIC_UQ_OUTPUT"),
    )
    if args.full:
        spec = spec.at_full_scale()
    spec = spec.with_overrides(seed=args.seed, replications=args.replications, output_directory=args.out)
    threads = args.threads or _env_int("KINETIC_UQ_THREADS") or 1

    _banner(f"kinetic-uq run - {spec.model_key}")
    print(f"Kinds: {', '.join(spec.kinds)}")
    print(f"N: {list(spec.N)}  M: {list(spec.M)}  N_MF: {spec.N_MF}  M_MF: {spec.M_MF}  k: {spec.k}")
    print(f"epsilon: {spec.epsilon}  t_final: {spec.t_final}  snapshots: {list(spec.snapshot_times)}")
    print(f"Replications: {spec.replications}  seed: {spec.seed}  threads: {threads}")
    print(f"Config hash: {spec.config_hash}")
    print("-" * 80)

    try:
        report = run_experiment(spec, threads=threads)
    except KineticUQError as e:
        partial = getattr(e, "partial_report", None)
        if partial is not None:
            emit_report(partial, spec.output_directory)
            print(f"✗ Partial results written to {spec.output_directory}")
        raise

    written = emit_report(report, spec.output_directory)
    for row in report.error_vs_M:
        print(f"{row['kind']:>7}  N={row['N']:<7} M={row['M']:<6} t={row['t']:<8g} {row['qoi']:<10} "
              f"L2 error {row['L2_error']:.4e} ± {row['stderr']:.1e}")
    print("-" * 80)
    print(f"✓ {len(written)} files written to {spec.output_directory}")
    return 0


def cmd_catalog(args) -> int:
    _banner("kinetic-uq catalog")
    for key in list_models():
        entry = get_model_entry(key)["entry"]
        print(f"{key:<20} {entry.get('description', '')}")
    return 0


def cmd_verify(args) -> int:
    _banner("kinetic-uq verify")
    results = run_verification()
    for name, passed, detail in results:
        print(f"{'✓' if passed else '✗'} {name}: {detail}")
    failed = sum(1 for _, passed, _ in results if not passed)
    print("-" * 80)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return 0 if failed == 0 else 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kinetic-uq", description="Kinetic UQ with mean-field control variates")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario document")
    run.add_argument("scenario", help="path to the scenario .ini file")
    run.add_argument("--out", help="output directory (default: scenario [output] directory)")
    run.add_argument("--seed", type=int, help="master seed")
    run.add_argument("--replications", type=int, help="replication count R")
    run.add_argument("--threads", type=int, help="worker processes (default: KINETIC_UQ_THREADS or 1)")
    run.add_argument("--full", action="store_true", help="catalog sample sizes and 50 replications")
    run.set_defaults(handler=cmd_run)

    catalog = sub.add_parser("catalog", help="list model keys")
    catalog.set_defaults(handler=cmd_catalog)

    verify = sub.add_parser("verify", help="run the invariant suite")
    verify.set_defaults(handler=cmd_verify)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.getenv("KINETIC_UQ_LOG_LEVEL", "WARNING").upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except KineticUQError as e:
        print(f"\n✗ Error: {e}", file=sys.stderr)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
