"""Command-line entry point: ``ges2n run | synth | sweep``.

Exit codes: 0 success, 2 configuration error, 3 I/O failure, 4 input schema
failure, 5 degenerate optimisation.  ``GES2N_LOG`` selects the log level
(error, info or debug; default error).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import asdict

from .errors import ConfigError, DegenerateObjectiveError, Ges2nError, SchemaError
from .io import read_key_values, read_record, write_record
from .objective import VARIANT_NAMES
from .optimizer import INIT_METHODS
from .pipeline import RunConfig, parse_sweep, run_pipeline, run_sweep, write_outputs
from .synth import SCENARIOS, SynthConfig, generate, scenario

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_SCHEMA = 4
EXIT_DEGENERATE = 5

LOG_LEVELS = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}

log = logging.getLogger("ges2n")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def _run_flags(p):
    p.add_argument("--config", help="key = value file; flags override its entries")
    p.add_argument("--input", help="CSV with columns time,accel,omega")
    p.add_argument("--variant", help=f"one of {', '.join(VARIANT_NAMES)}")
    p.add_argument("--alpha-c", help="fault cyclic order (shaft orders)")
    p.add_argument("--nh", help="number of harmonics (default 10)")
    p.add_argument("--band-width", help="band width in shaft orders (default 0.1)")
    p.add_argument("--delta-alpha", help="cyclic order resolution override")
    p.add_argument("--alpha-max", help="largest cyclic order in the objective grid")
    p.add_argument("--filter-length", help="number of filter taps (default 256)")
    p.add_argument("--tol", help="convergence tolerance (default 1e-12)")
    p.add_argument("--max-iter", help="iteration limit (default 1500)")
    p.add_argument("--init", choices=INIT_METHODS, help="initial filter (default lpc)")
    p.add_argument("--seed", help="seed for --init random")
    p.add_argument("--extraneous-order", help="known extraneous order for M2, or 'none'")
    p.add_argument("--out", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ges2n", description="Design FIR filters that bring out cyclic fault signatures.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="design a filter for one record")
    _run_flags(run)

    synth = sub.add_parser("synth", help="write a synthetic record")
    synth.add_argument("--config", help="key = value file of synthesis settings")
    synth.add_argument("--scenario", choices=tuple(SCENARIOS), help="start from a named scenario")
    synth.add_argument("--out", required=True, help="output CSV path")

    sweep = sub.add_parser("sweep", help="run a grid of designs")
    sweep.add_argument("--config", required=True, help="key = value file; axes are comma lists")
    sweep.add_argument("--jobs", default=1, help="parallel cells (default 1)")
    sweep.add_argument("--out", required=True, help="output directory")
    return parser


def _setup_logging():
    name = os.environ.get("GES2N_LOG", "error").strip().lower()
    if name not in LOG_LEVELS:
        raise ConfigError(f"GES2N_LOG must be one of {', '.join(LOG_LEVELS)}, not {name!r}")
    logging.basicConfig(level=LOG_LEVELS[name], format="%(levelname)s %(name)s: %(message)s",
                        stream=sys.stderr, force=True)


def _run_config(args) -> RunConfig:
    values = read_key_values(args.config) if args.config else {}
    flags = {k: v for k, v in vars(args).items() if k not in ("command", "config") and v is not None}
    cfg = RunConfig.from_mapping({**values, **flags})
    if cfg.input is None:
        raise ConfigError("--input is required")
    if cfg.out is None:
        raise ConfigError("--out is required")
    return cfg.validate()


def _integer(text, name) -> int:
    try:
        return int(text)
    except ValueError as exc:
        raise ConfigError(f"{name} must be an integer, not {text!r}") from exc


def cmd_run(args) -> int:
    cfg = _run_config(args)
    record = read_record(cfg.input)
    result = run_pipeline(cfg, record)
    write_outputs(cfg.out, result)
    log.info("%s: %s after %d iterations, psi=%.6g", cfg.variant, result.trace.status,
             result.trace.n_iter, result.psi)
    return EXIT_OK


def cmd_synth(args) -> int:
    values = read_key_values(args.config) if args.config else {}
    if args.scenario:
        start = {k: str(v) for k, v in asdict(scenario(args.scenario)).items()}
        cfg = SynthConfig.from_mapping({**start, **values})
    else:
        cfg = SynthConfig.from_mapping(values)
    write_record(args.out, generate(cfg).record)
    return EXIT_OK


def cmd_sweep(args) -> int:
    base, axes, source = parse_sweep(read_key_values(args.config))
    if base.input is not None:
        record = read_record(base.input)
    else:
        seed = source.get("scenario_seed")
        cfg = scenario(source.get("scenario", "weak-fault"), None if seed is None else _integer(seed, "scenario_seed"))
        record = generate(cfg).record
    if base.alpha_c is None:
        raise ConfigError("alpha_c is required")
    rows = run_sweep(base, axes, record, args.out, _integer(args.jobs, "--jobs"))
    failed = sum(r["status"] == "failed" for r in rows)
    log.info("sweep finished: %d cells, %d failed", len(rows), failed)
    return EXIT_OK


COMMANDS = {"run": cmd_run, "synth": cmd_synth, "sweep": cmd_sweep}


def main(argv=None) -> int:
    try:
        _setup_logging()
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"ges2n: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SchemaError as exc:
        print(f"ges2n: input schema error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except DegenerateObjectiveError as exc:
        print(f"ges2n: degenerate optimisation: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except OSError as exc:
        print(f"ges2n: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except Ges2nError as exc:
        print(f"ges2n: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
