"""
Command-Line Entry Point
python -m birb <design|simulate|fit|oracle|scramble|plan|lspec|schema>

JSON and JSONL artifacts go to --out or stdout; logs go to stderr.
Exit codes: 0 success, 2 invalid input, 3 capability exceeded, 4 fit failure.
"""

import argparse
import contextlib
import itertools
import json
import sys
from typing import IO, Iterator, List, Optional

import pandas as pd
from pydantic import ValidationError

from birb import __version__
from birb.analysis.fitting import bootstrap, fit_dataset
from birb.analysis.oracle import epsilon_omega_oracle
from birb.analysis.planner import PlannerInput, plan_samples
from birb.analysis.superchannel import build_L_superchannel
from birb.circuits.serialization import iter_circuit_batch, write_circuit_batch
from birb.cli.configs import (
    CONFIG_MODELS,
    ExperimentConfig,
    LspecConfig,
    OracleConfig,
    ScrambleConfig,
    load_config,
    read_json,
    resolve_noise,
)
from birb.core.config import settings
from birb.core.errors import BirbError, ConfigurationError, FitFailureError
from birb.core.logging import get_logger, setup_logging
from birb.engines.runner import ENGINES, DatasetRow, load_dataset, simulate_records, write_dataset
from birb.noise.models import NoiseModel
from birb.sampler.scrambling import estimate_scrambling
from birb.utils.helpers import derive_rng, dumps_report, open_artifact

logger = get_logger()


# -- output helpers -------------------------------------------------------------


@contextlib.contextmanager
def _output(path: Optional[str]) -> Iterator[IO]:
    if path is None or path == "-":
        yield sys.stdout
        sys.stdout.flush()
    else:
        with open_artifact(path, "wt") as stream:
            yield stream


def _emit_report(report: dict, path: Optional[str]):
    with _output(path) as out:
        out.write(dumps_report(report))


def _load_experiment(path: str, seed: Optional[int]) -> ExperimentConfig:
    data = read_json(path)
    if "design" not in data:
        data = {"design": data}
    if seed is not None:
        data["design"]["seed"] = seed
    return ExperimentConfig.model_validate(data)


def _noise_from_args(args, source, n: int, gate_set) -> NoiseModel:
    if args.noise:
        return NoiseModel.load(args.noise)
    return resolve_noise(source, n, gate_set)


# -- commands -------------------------------------------------------------------


def cmd_design(args) -> int:
    """Emit the circuit batch of a design"""
    experiment = _load_experiment(args.config, args.seed)
    out = args.out or experiment.circuits_out
    with _output(out) as stream:
        count = write_circuit_batch(stream, experiment.design.records())
    logger.info(f"Wrote {count} circuits")
    return 0


# Rows buffered per CSV write
CSV_CHUNK_ROWS = 1024


def _rows_to_csv(rows: Iterator[DatasetRow], stream: IO, chunk_rows: int = CSV_CHUNK_ROWS) -> int:
    """Write rows as CSV one chunk at a time under a single header"""
    columns = [field.alias or name for name, field in DatasetRow.model_fields.items()]
    rows = iter(rows)
    count = 0
    while True:
        chunk = list(itertools.islice(rows, chunk_rows))
        if not chunk and count:
            break
        frame = pd.DataFrame([row.model_dump(by_alias=True) for row in chunk], columns=columns)
        frame.to_csv(stream, index=False, header=count == 0)
        count += len(chunk)
        if not chunk:
            break
    return count


def cmd_simulate(args) -> int:
    """Run a circuit batch (or a config's design) and emit the dataset"""
    experiment = _load_experiment(args.config, None) if args.config else None
    engine = args.engine or (experiment.engine if experiment else "frame")
    shots = args.shots if args.shots is not None else (experiment.shots if experiment else settings.default_shots)

    if args.circuits:
        records = iter_circuit_batch(args.circuits)
    elif experiment is not None:
        records = experiment.design.records()
    else:
        raise ConfigurationError("simulate needs --circuits or a --config with a design")

    # Noise is sized from the first record
    records = iter(records)
    first = next(records, None)
    if first is None:
        with _output(args.out):
            pass
        logger.info("No circuits to simulate")
        return 0
    n = int((first.get("metadata") or {}).get("n") or len(first["target_pauli"].lstrip("+-−")))
    gate_set = experiment.design.omega.gate_set if experiment else None
    noise = _noise_from_args(args, experiment.noise if experiment else None, n, gate_set)

    rows = simulate_records(
        _chain(first, records), noise, engine, shots, seed=args.seed, workers=args.workers
    )
    out = args.out or (experiment.dataset_out if experiment else None)
    with _output(out) as stream:
        if args.format == "csv":
            count = _rows_to_csv(rows, stream)
        else:
            count = write_dataset(stream, rows)
    logger.info(f"Wrote {count} dataset rows")
    return 0


def _chain(first: dict, rest: Iterator[dict]) -> Iterator[dict]:
    yield first
    yield from rest


def cmd_fit(args) -> int:
    """Fit a dataset; writes the JSON report (or the CSV table with --format csv)"""
    dataset = load_dataset(args.dataset)
    seed = args.seed if args.seed is not None else (dataset.seed or 0)
    try:
        fit = fit_dataset(dataset, weighted=not args.unweighted, floor=args.floor, convention=args.convention)
        if args.bootstrap:
            sigma, failures = bootstrap(
                dataset, args.bootstrap, seed, args.workers, not args.unweighted, args.floor, args.convention
            )
            fit = fit.model_copy(update={"sigma": sigma, "bootstrap_failures": failures})
    except FitFailureError as e:
        _emit_report(
            {
                "n": dataset.n,
                "depths": dataset.depths(),
                "fit_status": "failed",
                "error": str(e),
                "seed": seed,
                "schema_version": settings.schema_version,
            },
            args.out,
        )
        raise

    if args.format == "csv":
        with _output(args.out) as stream:
            fit.table().to_csv(stream, index=False)
    else:
        _emit_report(fit.report(seed), args.out)
    if args.csv:
        fit.write_csv(args.csv)
    return 0


def cmd_oracle(args) -> int:
    config = load_config(OracleConfig, args.config, {"seed": args.seed})
    noise = _noise_from_args(args, config.noise, config.n, config.omega.gate_set)
    estimate = epsilon_omega_oracle(
        config.omega,
        noise,
        config.n,
        config.depths,
        config.circuits_per_depth,
        config.seed,
        floor=config.floor,
        bootstrap_samples=config.bootstrap,
        workers=args.workers,
        convention=config.convention,
    )
    _emit_report(estimate.report(), args.out)
    return 0


def cmd_scramble(args) -> int:
    config = load_config(ScrambleConfig, args.config, {"seed": args.seed})
    report = estimate_scrambling(
        config.omega,
        config.n,
        config.k,
        config.pauli_pairs,
        config.circuits,
        config.probes,
        derive_rng(config.seed, "scramble"),
    )
    data = report.model_dump()
    data.update({"seed": config.seed, "schema_version": settings.schema_version})
    _emit_report(data, args.out)
    return 0


def cmd_plan(args) -> int:
    if args.config:
        plan = load_config(PlannerInput, args.config)
    else:
        plan = PlannerInput(nu=args.nu, alpha=args.alpha, A=args.A, gamma_bar=args.gamma_bar, d=args.d, beta=args.beta)
    output = plan_samples(plan)
    data = output.model_dump()
    data["schema_version"] = settings.schema_version
    _emit_report(data, args.out)
    return 0


def cmd_lspec(args) -> int:
    config = load_config(LspecConfig, args.config, {"seed": args.seed})
    noise = _noise_from_args(args, config.noise, config.n, config.omega.gate_set)
    report = build_L_superchannel(config.omega, noise, config.n, config.samples, config.seed)
    _emit_report(report.report(), args.out)
    return 0


def cmd_schema(args) -> int:
    schemas = {name: model.model_json_schema() for name, model in CONFIG_MODELS.items()}
    if args.name:
        schemas = {args.name: schemas[args.name]}
    _emit_report(schemas, args.out)
    return 0


# -- parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="birb", description="Binary randomized benchmarking toolkit")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default=None, help="overrides BIRB_LOG")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=None, help="output path (.gz compresses); stdout when omitted")
    common.add_argument("--seed", type=int, default=None, help="root 64-bit seed override")
    common.add_argument("--workers", type=int, default=None, help="worker processes")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("design", parents=[common], help="generate a circuit batch")
    p.add_argument("--config", required=True, help="design or experiment JSON")
    p.set_defaults(handler=cmd_design)

    p = sub.add_parser("simulate", parents=[common], help="simulate circuits into a dataset")
    p.add_argument("--circuits", default=None, help="circuit batch JSONL")
    p.add_argument("--config", default=None, help="experiment JSON (design, noise, engine, N)")
    p.add_argument("--noise", default=None, help="noise model JSON")
    p.add_argument("--engine", choices=ENGINES, default=None)
    p.add_argument("--shots", "-N", type=int, default=None)
    p.add_argument("--format", choices=("jsonl", "csv"), default="jsonl")
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("fit", parents=[common], help="fit a dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--bootstrap", type=int, default=settings.bootstrap_samples, help="replicates, 0 skips")
    p.add_argument("--floor", action="store_true", help="fit A p^d + B")
    p.add_argument("--unweighted", action="store_true")
    p.add_argument("--convention", choices=("entanglement", "average-gate"), default="entanglement")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--csv", default=None, help="also write the (d, fbar, sigma) table here")
    p.set_defaults(handler=cmd_fit)

    p = sub.add_parser("oracle", parents=[common], help="exact eps_Omega of a noise model")
    p.add_argument("--config", required=True)
    p.add_argument("--noise", default=None)
    p.set_defaults(handler=cmd_oracle)

    p = sub.add_parser("scramble", parents=[common], help="estimate the scrambling deviation")
    p.add_argument("--config", required=True)
    p.set_defaults(handler=cmd_scramble)

    p = sub.add_parser("plan", parents=[common], help="circuits needed per depth")
    p.add_argument("--config", default=None)
    p.add_argument("--nu", type=float, default=0.05)
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--A", type=float, default=1.0)
    p.add_argument("--gamma-bar", type=float, default=1.0)
    p.add_argument("--d", type=int, default=0)
    p.add_argument("--beta", type=float, default=None)
    p.set_defaults(handler=cmd_plan)

    p = sub.add_parser("lspec", parents=[common], help="layer superchannel spectrum")
    p.add_argument("--config", required=True)
    p.add_argument("--noise", default=None)
    p.set_defaults(handler=cmd_lspec)

    p = sub.add_parser("schema", parents=[common], help="print config JSON schemas")
    p.add_argument("name", nargs="?", choices=sorted(CONFIG_MODELS), default=None)
    p.set_defaults(handler=cmd_schema)

    return parser


def _format_validation(error: ValidationError) -> str:
    lines = []
    for item in error.errors():
        location = ".".join(str(part) for part in item["loc"]) or "<root>"
        lines.append(f"  {location}: {item['msg']}")
    return "\n".join(lines)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.log_level:
        setup_logging(level=args.log_level)

    try:
        return args.handler(args)
    except ValidationError as e:
        logger.error(f"Invalid input ({e.error_count()} error(s)):\n{_format_validation(e)}")
        return 2
    except FitFailureError as e:
        logger.error(f"Fit failed: {e}")
        return e.exit_code
    except BirbError as e:
        logger.error(str(e))
        return e.exit_code
    except (FileNotFoundError, json.JSONDecodeError) as e:
        logger.error(f"Cannot read input: {e}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
