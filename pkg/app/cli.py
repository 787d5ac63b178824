"""
Command-line front end.

Reports go to stdout as JSON (default) or indented text; logging goes to
stderr. Exit codes: 0 on success, 1 when a checked claim fails, 2 on malformed
input, an exceeded bound or a usage error.
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

from pydantic import ValidationError

from app import __version__
from app.config import settings
from app.models.schemas import OutputFormat, RunConfig
from app.services.flatgeom import parse_direction
from app.services.grpcore import InvalidInputError, ResourceLimitError, VerificationError
from app.services.reports import ReportService
from app.utils.builtins import BUILTIN_LEDGERS
from app.utils.helpers import dump_json, load_dessin, load_family_manifest, load_origami, render_text

# Configure logging
logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


class _UsageError(Exception):
    pass


class _ArgumentParser(argparse.ArgumentParser):
    """Raises instead of exiting so ``run`` owns the exit code."""

    def error(self, message: str):
        raise _UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(
        prog="origami-curves",
        description="Origamis, Veech groups, dessins and the formal-exponent ledger.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "--format",
        choices=[f.value for f in OutputFormat],
        default=settings.OUTPUT_FORMAT,
        help="Report rendering (default: %(default)s)",
    )
    parser.add_argument(
        "--orbit-bound",
        type=int,
        default=settings.ORBIT_BOUND,
        help="Maximal SL(2,Z)-orbit size (default: %(default)s, env ORIGAMI_ORBIT_BOUND)",
    )
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    for name, help_text in (
        ("validate", "check an origami file"),
        ("invariants", "genus, stratum, block systems, monodromy group order"),
        ("veech", "Veech group, cusps and origami-curve genus"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("file", metavar="FILE", help="origami JSON file or built-in name")

    p = sub.add_parser("cylinders", help="cylinder decomposition in a rational direction")
    p.add_argument("file", metavar="FILE")
    p.add_argument("--direction", default="1/0", help="direction p/q (default: %(default)s)")

    p = sub.add_parser("same-curve", help="test whether two origamis share an SL(2,Z)-orbit")
    p.add_argument("file1", metavar="FILE1")
    p.add_argument("file2", metavar="FILE2")

    p = sub.add_parser("from-dessin", help="build the origami attached to a pure dessin")
    p.add_argument("file", metavar="FILE", help="dessin JSON file or built-in name")

    p = sub.add_parser("fingerprint", help="Galois-invariant record of an origami")
    p.add_argument("file", metavar="FILE")
    p.add_argument(
        "--source-degree",
        type=int,
        default=None,
        help="degree D of the dessin the origami was built from; adds the cusp check",
    )

    p = sub.add_parser("verify-families", help="check the covering identities of the genus-2 families")
    p.add_argument("--manifest", metavar="FILE", default=None, help="JSON manifest of families, maps and identities")

    p = sub.add_parser("verify-gt", help="run the formal-exponent ledger")
    p.add_argument("--ledger", default="S2-ledger", help="built-in ledger name or script file")

    sub.add_parser("builtins", help="list built-in named inputs")
    return parser


def _load_ledger(source: str) -> str:
    if source in BUILTIN_LEDGERS:
        return BUILTIN_LEDGERS[source]
    try:
        return Path(source).read_text()
    except OSError as e:
        raise InvalidInputError(f"No such ledger file or built-in name: '{source}'") from e


def _dispatch(args: argparse.Namespace, service: ReportService) -> Dict[str, Any]:
    commands: Dict[str, Callable[[], Dict[str, Any]]] = {
        "validate": lambda: service.validate(load_origami(args.file)),
        "invariants": lambda: service.invariants(load_origami(args.file)),
        "veech": lambda: service.veech(load_origami(args.file)),
        "cylinders": lambda: service.cylinders(load_origami(args.file), parse_direction(args.direction)),
        "same-curve": lambda: service.same_curve(load_origami(args.file1), load_origami(args.file2)),
        "from-dessin": lambda: service.from_dessin(load_dessin(args.file)),
        "fingerprint": lambda: service.fingerprint(load_origami(args.file), args.source_degree),
        "verify-families": lambda: service.verify_families(
            load_family_manifest(args.manifest) if args.manifest else None
        ),
        "verify-gt": lambda: service.verify_gt(_load_ledger(args.ledger)),
        "builtins": service.builtins,
    }
    return commands[args.command]()


def _emit(report: Dict[str, Any], fmt: str) -> None:
    if fmt == OutputFormat.TEXT.value:
        sys.stdout.write("\n".join(render_text(report)) + "\n")
    else:
        sys.stdout.write(dump_json(report) + "\n")


def run(argv: Optional[List[str]] = None) -> int:
    """
    Parse ``argv``, run one subcommand and print its report.

    Args:
        argv: Arguments without the program name; defaults to ``sys.argv[1:]``

    Returns:
        The process exit code
    """
    logging.basicConfig(
        level=getattr(logging, settings.LOG_LEVEL),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
    )
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        config = RunConfig(
            orbit_bound=args.orbit_bound,
            format=args.format,
        )
    except _UsageError as e:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"error: {str(e)}\n")
        return EXIT_USAGE
    except ValidationError as e:
        sys.stderr.write(f"error: {e.errors()[0]['msg']}\n")
        return EXIT_USAGE

    logger.debug(f"Running {args.command} with {config}")
    service = ReportService(orbit_bound=config.orbit_bound)
    try:
        report = _dispatch(args, service)
    except VerificationError as e:
        logger.error(f"Verification failed at {e.anchor}: {str(e)}")
        sys.stderr.write(f"verification failed [{e.anchor}]: {str(e)}\n")
        if e.detail:
            sys.stderr.write(f"  {e.detail}\n")
        return EXIT_FAILED
    except (InvalidInputError, ResourceLimitError) as e:
        logger.error(f"Error running {args.command}: {str(e)}")
        sys.stderr.write(f"error: {str(e)}\n")
        return EXIT_USAGE

    _emit(report, config.format)
    failed = ReportService.failures(report)
    if failed:
        for anchor in failed:
            sys.stderr.write(f"FAILED: {anchor}\n")
        return EXIT_FAILED
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
