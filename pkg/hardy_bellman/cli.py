import argparse
import json
import logging
import sys
from typing import Any, Dict, List, Optional, Sequence, Tuple

from pydantic import ValidationError

from hardy_bellman import __version__
from hardy_bellman.Config import DEFAULT_SEED, RunConfig, setup_logging
from hardy_bellman.Domain import MomentData, moments_to_spoint, solve_kappa, validate_spoint
from hardy_bellman.errors import (
    ConvergenceError,
    DomainError,
    InconsistencyError,
    InfeasibleError,
    SingularityError,
)
from hardy_bellman.Exponents import PRESETS
from hardy_bellman.LemmaSuite import default_suite
from hardy_bellman.oracles import maximize_three_constraints, maximize_two_constraints
from hardy_bellman.RegionAtlas import classify, emit_atlas
from hardy_bellman.SharpConstant import sharp_t
from hardy_bellman.SpecialFunctions import omega_values
from hardy_bellman.utils import atomic_write_text, csv_lines, document_template, populate_template, to_jsonable

logger = logging.getLogger("hardy_bellman.cli")

EXIT_OK = 0
EXIT_DOMAIN = 2
EXIT_CONVERGENCE = 3
EXIT_IO = 4
EXIT_VIOLATION = 5
EXIT_INFEASIBLE = 6
EXIT_PROPERTY = 7


def _exponent_flags(parser: argparse.ArgumentParser, q_required: bool = True) -> None:
    parser.add_argument("--p", type=float, required=True, help="outer exponent p > q")
    parser.add_argument("--q", type=float, required=q_required, help="inner exponent 1 < q < p")


def _common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--tol", type=float, default=1e-12, help="root solver tolerance")
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED, help="master seed")
    parser.add_argument("--out", default=None, help="also write the document to this path")
    parser.add_argument("--format", choices=("json", "csv"), default="json", help="stdout rendering")
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hardy-bellman",
        description="Sharp constants of the three-constraint Hardy inequality for the dyadic maximal operator.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    eval_parser = commands.add_parser("eval", help="sharp constant and region of one point (s1, s2)")
    _exponent_flags(eval_parser)
    eval_parser.add_argument("--s1", type=float, required=True)
    eval_parser.add_argument("--s2", type=float, required=True)
    _common_flags(eval_parser)

    region = commands.add_parser("region", help="grid atlas and threshold curves as CSV tables")
    _exponent_flags(region)
    region.add_argument("--grid", dest="resolution", type=int, default=100, help="grid points per axis")
    region.add_argument("--workers", type=int, default=None)
    _common_flags(region)
    region.set_defaults(out="atlas")

    kappa = commands.add_parser("kappa", help="mass kappa matching omega_q and omega_p for moments (f, A, F)")
    _exponent_flags(kappa)
    kappa.add_argument("--f", type=float, required=True)
    kappa.add_argument("--A", type=float, required=True)
    kappa.add_argument("--F", type=float, required=True)
    _common_flags(kappa)

    verify = commands.add_parser("verify", help="step-function search against the claimed bound")
    _exponent_flags(verify, q_required=False)
    verify.add_argument("--mode", choices=("two", "three"), required=True)
    verify.add_argument("--f", type=float, required=True)
    verify.add_argument("--A", type=float, default=None)
    verify.add_argument("--F", type=float, required=True)
    verify.add_argument("--kappa", type=float, default=1.0)
    verify.add_argument("--n", type=int, default=2000)
    verify.add_argument("--trials", type=int, default=8)
    verify.add_argument("--grid", choices=("geometric", "uniform"), default="geometric")
    verify.add_argument("--workers", type=int, default=None)
    verify.add_argument("--candidate-csv", default=None, help="write the best step function as cell_index,value")
    _common_flags(verify)

    lemmas = commands.add_parser("check-lemmas", help="randomised property suite")
    lemmas.add_argument("--samples", type=int, default=1000)
    lemmas.add_argument("--preset", dest="presets", action="append", choices=sorted(PRESETS), default=None)
    _common_flags(lemmas)
    return parser


def config_from(args: argparse.Namespace) -> RunConfig:
    values = {key: value for key, value in vars(args).items() if key in RunConfig.model_fields and value is not None}
    if args.command == "check-lemmas" and not values.get("presets"):
        values["presets"] = list(PRESETS)
    return RunConfig(**values)


def cmd_eval(cfg: RunConfig) -> Tuple[Dict[str, Any], int]:
    E = cfg.exponents()
    P = validate_spoint(E, cfg.s1, cfg.s2)
    result = sharp_t(E, P, tol=cfg.tol)
    report = classify(E, P, solve_tol=cfg.tol)
    region = report.model_dump()
    region["classification"] = report.classification
    return {"s1": P.s1, "s2": P.s2, **result.model_dump(), "region": region}, EXIT_OK


def cmd_region(cfg: RunConfig) -> Tuple[Dict[str, Any], int]:
    E = cfg.exponents()
    atlas = emit_atlas(E, cfg.resolution, workers=cfg.workers, solve_tol=cfg.tol)
    paths = atlas.write(cfg.out or "atlas")
    delta = atlas.curves[0].s1
    return {"delta": delta, "rows": len(atlas.rows), "counts": atlas.counts(), "files": paths}, EXIT_OK


def cmd_kappa(cfg: RunConfig) -> Tuple[Dict[str, Any], int]:
    E = cfg.exponents()
    kappa = solve_kappa(E, cfg.f, cfg.A, cfg.F, tol=cfg.tol)
    P = moments_to_spoint(E, MomentData(f=cfg.f, A=cfg.A, F=cfg.F, kappa=kappa))
    w_p = omega_values(E.p, P.s1)
    w_q = omega_values(E.q, P.s2)
    return {"kappa": kappa, "s1": P.s1, "s2": P.s2, "omega_p": w_p, "omega_q": w_q, "omega_gap": abs(w_p - w_q)}, EXIT_OK


def cmd_verify(cfg: RunConfig) -> Tuple[Dict[str, Any], int]:
    if cfg.mode == "two":
        report = maximize_two_constraints(cfg.p, cfg.f, cfg.F, cfg.n, cfg.trials, cfg.seed, grid=cfg.grid, workers=cfg.workers)
    else:
        if cfg.A is None:
            raise DomainError("three-constraint mode needs --A", constraint="A given")
        M = MomentData(f=cfg.f, A=cfg.A, F=cfg.F, kappa=cfg.kappa)
        report = maximize_three_constraints(
            cfg.exponents(), M, cfg.n, cfg.trials, cfg.seed, grid=cfg.grid, workers=cfg.workers
        )
    return report.model_dump(), EXIT_VIOLATION if report.violation else EXIT_OK


def cmd_check_lemmas(cfg: RunConfig) -> Tuple[Dict[str, Any], int]:
    report = default_suite().run_all(cfg.presets, cfg.samples, cfg.seed)
    document = report.model_dump()
    document["passed"] = report.passed
    return document, EXIT_OK if report.passed else EXIT_PROPERTY


COMMANDS = {
    "eval": cmd_eval,
    "region": cmd_region,
    "kappa": cmd_kappa,
    "verify": cmd_verify,
    "check-lemmas": cmd_check_lemmas,
}


def _flatten(prefix: str, value: Any, rows: List[List[Any]]) -> None:
    if isinstance(value, dict):
        for key, item in value.items():
            _flatten(f"{prefix}.{key}" if prefix else str(key), item, rows)
    elif isinstance(value, list) and any(isinstance(item, (dict, list)) for item in value):
        for index, item in enumerate(value):
            _flatten(f"{prefix}.{index}", item, rows)
    elif isinstance(value, list):
        rows.append([prefix, " ".join(repr(item) if isinstance(item, float) else str(item) for item in value)])
    else:
        rows.append([prefix, value])


def render(document: Dict[str, Any], fmt: str) -> str:
    """JSON with shortest round-trip floats, or a two-column key,value CSV of the result."""
    plain = to_jsonable(document)
    if fmt == "json":
        return json.dumps(plain, indent=2) + "\n"
    rows: List[List[Any]] = []
    _flatten("", plain["result"], rows)
    return csv_lines(("key", "value"), rows)


def _dump_candidate(path: str, values: Sequence[float]) -> None:
    atomic_write_text(path, csv_lines(("cell_index", "value"), ([k, float(v)] for k, v in enumerate(values))))


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run one command and return its exit code.

    0 ok, 2 domain, 3 convergence, 4 IO, 5 bound violation, 6 infeasible, 7 property failure.
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.log_level)
    try:
        cfg = config_from(args)
        document, code = COMMANDS[cfg.command](cfg)
        envelope = populate_template(
            document_template(),
            {"version": __version__, "command": cfg.command, "config": cfg.model_dump(), "result": document},
        )
        if cfg.out and cfg.command != "region":
            atomic_write_text(cfg.out, render(envelope, "json"))
        if cfg.command == "verify" and args.candidate_csv:
            _dump_candidate(args.candidate_csv, document["best_values"])
        sys.stdout.write(render(envelope, cfg.format))
        return code
    except (ValidationError, DomainError, ValueError) as error:
        print(f"hardy-bellman {args.command}: {error}", file=sys.stderr)
        return EXIT_DOMAIN
    except (ConvergenceError, SingularityError, InconsistencyError) as error:
        print(f"hardy-bellman {args.command}: numerical failure: {error}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except InfeasibleError as error:
        print(f"hardy-bellman {args.command}: {error}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except OSError as error:
        print(f"hardy-bellman {args.command}: cannot write output: {error}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
