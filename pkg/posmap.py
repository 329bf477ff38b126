#!/usr/bin/env python3
"""
Command-line front end for the positive-map toolkit

Exit codes: 0 pass / member / consistent, 1 falsified / not member,
2 inconclusive, 64 usage error, 65 input error, 70 internal error.
"""

import argparse
import logging
import sys
import time
from typing import Any, Callable, Dict, List, Optional, Tuple

import config
from cones import (
    MembershipStatus,
    decide_generated_dual,
    dual_pair_min,
    falsify_dual_membership,
    make_symmetric_cone,
)
from errors import MapFileError, PosmapError, UsageError
from map_calculus import compose, pair, star_t
from map_files import describe_map, map_to_document, parse_map_file
from positivity import (
    SearchConfig,
    Verdict,
    check_star_t_symmetry,
    is_cp,
    is_k_positive,
    is_positive_map,
)
from utils import dump_report, print_summary, save_report
from verify_suites import SUITES, SuiteRunner

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FALSIFIED = 1
EXIT_INCONCLUSIVE = 2
EXIT_USAGE = 64
EXIT_DATA = 65
EXIT_SOFTWARE = 70

EXIT_CODES = {
    "CertifiedPositive": EXIT_OK,
    "Falsified": EXIT_FALSIFIED,
    "NoCounterexample": EXIT_INCONCLUSIVE,
    MembershipStatus.MEMBER.value: EXIT_OK,
    MembershipStatus.CONSISTENT.value: EXIT_OK,
    MembershipStatus.NOT_MEMBER.value: EXIT_FALSIFIED,
    "pass": EXIT_OK,
    "fail": EXIT_FALSIFIED,
    "inconsistent": EXIT_INCONCLUSIVE,
    "Symmetric": EXIT_OK,
    "NotSymmetric": EXIT_FALSIFIED,
    "nonnegative": EXIT_OK,
    "negative": EXIT_FALSIFIED,
}

Report = Dict[str, Any]


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    common = _ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None,
                        help="Search seed (default: $POSMAP_SEED or 0).")
    common.add_argument("--restarts", type=int, default=None,
                        help=f"Random restarts per search (default: {config.DEFAULT_RESTARTS}).")
    common.add_argument("--tol", type=float, default=None,
                        help=f"PSD tolerance (default: {config.DEFAULT_PSD_TOL:g}).")
    common.add_argument("--samples", type=int, default=None,
                        help="Random PSD probe inputs per positivity check (default: POSMAP_SAMPLES).")
    common.add_argument("--format", choices=["text", "json"], default="text", help="Report format.")
    common.add_argument("--out", type=str, default=None, help="Also write the JSON report to this path.")

    parser = _ArgumentParser(prog="posmap", description="Choi-matrix calculus of positive maps and mapping cones.")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    p = sub.add_parser("check-cp", parents=[common], help="Complete positivity of a map.")
    p.add_argument("file")

    p = sub.add_parser("check-positive", parents=[common], help="Positivity of a map.")
    p.add_argument("file")

    p = sub.add_parser("check-k-positive", parents=[common], help="k-positivity of a map.")
    p.add_argument("file")
    p.add_argument("--k", type=int, required=True)

    p = sub.add_parser("pair", parents=[common], help="Tr(C_phi C_psi) of two maps.")
    p.add_argument("file1")
    p.add_argument("file2")

    p = sub.add_parser("dual", parents=[common], help="Dual-cone membership of a candidate.")
    p.add_argument("--cone-gen", action="append", required=True, dest="cone_gen",
                   help="Generator map file (repeatable).")
    p.add_argument("--candidate", required=True)
    p.add_argument("--trials", type=int, default=config.DEFAULT_TRIALS)

    p = sub.add_parser("cor4", parents=[common], aliases=["generated-dual"],
                       help="Decide membership in the dual of the cone of one g = g* = g^t.")
    p.add_argument("--gen", required=True)
    p.add_argument("--candidate", required=True)
    p.add_argument("--trials", type=int, default=config.DEFAULT_TRIALS)

    p = sub.add_parser("prop5", parents=[common], aliases=["symmetry"],
                       help="Test phi = phi* = phi^t on the Choi matrix.")
    p.add_argument("file")

    p = sub.add_parser("verify", parents=[common], help="Run a seeded verification suite.")
    p.add_argument("suite", choices=sorted(SUITES))
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--trials", type=int, default=config.DEFAULT_TRIALS)
    p.add_argument("--csv", type=str, default=None, help="Write the per-trial table as CSV.")
    return parser


def _witness_block(verdict: Verdict) -> Optional[Dict[str, Any]]:
    if verdict.witness is None:
        return None
    return {
        'kind': verdict.witness.kind,
        'value': verdict.witness.value,
        'vectors': dict(verdict.witness.vectors),
    }


def _verdict_report(phi, verdict: Verdict) -> Report:
    return {
        'status': verdict.status.value,
        'map': describe_map(phi),
        'value': verdict.value,
        'stats': verdict.stats,
        'witness': _witness_block(verdict),
    }


def cmd_check_cp(args, cfg: SearchConfig) -> Report:
    phi = parse_map_file(args.file)
    return _verdict_report(phi, is_cp(phi, cfg.psd_tol))


def cmd_check_positive(args, cfg: SearchConfig) -> Report:
    phi = parse_map_file(args.file)
    return _verdict_report(phi, is_positive_map(phi, cfg))


def cmd_check_k_positive(args, cfg: SearchConfig) -> Report:
    phi = parse_map_file(args.file)
    top = min(phi.in_dim, phi.out_dim)
    if not 1 <= args.k <= top:
        raise UsageError(f"--k must lie in 1..{top} for this map, got {args.k}")
    report = _verdict_report(phi, is_k_positive(phi, args.k, cfg))
    report['k'] = args.k
    return report


def cmd_pair(args, cfg: SearchConfig) -> Report:
    phi = parse_map_file(args.file1)
    psi = parse_map_file(args.file2)
    value = pair(phi, psi)
    sign = "negative" if value < -cfg.psd_tol else "nonnegative"
    witness = None
    if sign == "negative":
        # psi is outside the dual of the ray through phi
        witness = {
            'route': "pair",
            'message': f"Tr(C_phi C_psi) = {value:.12g}",
            'value': value,
        }
    return {
        'status': sign,
        'maps': [describe_map(phi), describe_map(psi)],
        'value': value,
        'sign': sign,
        'witness': witness,
    }


def cmd_dual(args, cfg: SearchConfig) -> Report:
    generators = [parse_map_file(path).relabel(path) for path in args.cone_gen]
    phi = parse_map_file(args.candidate)
    if args.trials < 1:
        raise UsageError(f"--trials must be >= 1, got {args.trials}")
    cone = make_symmetric_cone(generators, cfg, name="cli")
    membership = falsify_dual_membership(cone, phi, args.trials, cfg)
    pairing = dual_pair_min(cone, phi, cfg)

    status = membership.status
    witness = None
    if membership.witness is not None:
        psi = membership.witness.psi
        witness = {
            'route': "tensor_on_p",
            'message': f"({psi.label} (x) candidate)(p) has eigenvalue {membership.witness.value:.12g}",
            'value': membership.witness.value,
            'psi': map_to_document(psi),
            # check-cp on this map reproduces the eigenvalue
            'composite': map_to_document(compose(phi, star_t(psi)).relabel("candidate o psi^*t")),
            'vector': membership.witness.vector,
        }
    elif pairing.value < -cfg.psd_tol:
        status = MembershipStatus.NOT_MEMBER
        witness = {
            'route': "pair",
            'message': f"Tr(C_candidate C_psi) = {pairing.value:.12g}",
            'value': pairing.value,
            'psi': map_to_document(pairing.psi),
        }
    return {
        'status': status.value,
        'candidate': describe_map(phi),
        'cone_generators': len(cone.generators),
        'trials': membership.trials,
        'min_tensor_on_p': membership.stats['min_value'],
        'dual_pair_min': pairing.value,
        'witness': witness,
    }


def cmd_generated_dual(args, cfg: SearchConfig) -> Report:
    g = parse_map_file(args.gen)
    phi = parse_map_file(args.candidate)
    report = decide_generated_dual(g, phi, cfg, args.trials)
    witness = None
    if report.witness is not None:
        witness = {
            'value': report.witness.value,
            'psi': map_to_document(report.witness.psi) if report.witness.psi is not None else None,
            'vector': report.witness.vector,
            'input': report.witness.input,
        }
    return {
        'status': report.status.value,
        'generator': describe_map(g),
        'candidate': describe_map(phi),
        'trials': report.trials,
        'stats': report.stats,
        'witness': witness,
    }


def cmd_symmetry(args, cfg: SearchConfig) -> Report:
    phi = parse_map_file(args.file)
    check = check_star_t_symmetry(phi)
    if not check.consistent:
        status = "inconsistent"
    else:
        status = "Symmetric" if check.holds else "NotSymmetric"
    return {
        'status': status,
        'map': describe_map(phi),
        'real': check.real,
        'symmetric': check.symmetric,
        'flip_invariant': check.flip_invariant,
        'star_fixed': check.star_fixed,
        't_fixed': check.t_fixed,
        'deviations': check.deviations,
    }


def cmd_verify(args, cfg: SearchConfig) -> Report:
    try:
        runner = SuiteRunner(args.dim, args.trials, cfg)
    except ValueError as e:
        raise UsageError(str(e))
    runner.run(args.suite)
    if args.csv:
        runner.save_csv(args.suite, args.csv)
    if args.format == "text":
        runner.print_summary(args.suite)
    return runner.generate_report(args.suite)


COMMANDS: Dict[str, Callable[[argparse.Namespace, SearchConfig], Report]] = {
    "check-cp": cmd_check_cp,
    "check-positive": cmd_check_positive,
    "check-k-positive": cmd_check_k_positive,
    "pair": cmd_pair,
    "dual": cmd_dual,
    "cor4": cmd_generated_dual,
    "generated-dual": cmd_generated_dual,
    "prop5": cmd_symmetry,
    "symmetry": cmd_symmetry,
    "verify": cmd_verify,
}


def _configure_logging() -> None:
    logging.basicConfig(
        level=getattr(logging, config.LOG_LEVEL, logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
    )


def _print_text(command: str, report: Report) -> None:
    lines = {'Status': report['status']}
    for key in ('value', 'min_tensor_on_p', 'dual_pair_min', 'sign', 'k', 'seed', 'tolerance'):
        if report.get(key) is not None:
            lines[key.replace('_', ' ').capitalize()] = report[key]
    witness = report.get('witness')
    if witness:
        lines['Witness'] = witness.get('message') or f"{witness.get('kind', 'psi')} value {witness['value']:.12g}"
    print_summary(command, lines)


def _execute(args: argparse.Namespace, argv: List[str]) -> Tuple[int, Report]:
    try:
        cfg = SearchConfig.from_env(seed=args.seed, restarts=args.restarts, psd_tol=args.tol,
                                     samples=args.samples)
    except ValueError as e:
        raise UsageError(str(e))
    started = time.perf_counter()
    report = COMMANDS[args.command](args, cfg)
    report.update({
        'schema': config.REPORT_SCHEMA_VERSION,
        'command': list(argv),
        'seed': cfg.seed,
        'tolerance': cfg.psd_tol,
        'restarts': cfg.restarts,
        'samples': cfg.samples,
        'wall_time': time.perf_counter() - started,
    })
    return EXIT_CODES[report['status']], report


def run(argv: Optional[List[str]] = None) -> int:
    """
    Run one command line and return its exit code; the report goes to stdout
    """
    _configure_logging()
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        code, report = _execute(args, argv)
    except SystemExit as e:
        # --help
        return int(e.code or 0)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except MapFileError as e:
        print(f"input error: {e}", file=sys.stderr)
        return EXIT_DATA
    except PosmapError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA
    except Exception as e:
        logger.exception("unexpected failure in %s", argv)
        print(f"internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_SOFTWARE

    if args.format == "json":
        print(dump_report(report))
    elif args.command != "verify":
        _print_text(args.command, report)
    if args.out:
        save_report(report, args.out)
        logger.info("report saved to %s", args.out)
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
