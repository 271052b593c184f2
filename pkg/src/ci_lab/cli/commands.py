"""
CLI subcommands.

Commands:
    verify-paper  - Check both counterexamples and the overlap variant
    check         - Evaluate CI / mutual-independence statements on a table file
    search        - Search for a counterexample to an implication query
    deconf        - Run the deconfounder pipeline on a known table
    version       - Show version information

Exit codes: 0 success, 1 usage error, 2 file/format or evaluation error,
3 search found no witness. Reports go to stdout, errors to stderr.
"""

from __future__ import annotations

import json
import logging
import sys
from collections.abc import Callable
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from pydantic import ValidationError

from ci_lab.exceptions import CILabException, FormatException, ParseException

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_NO_WITNESS = 3


class UsageError(Exception):
    """Bad command line."""


@dataclass
class Options:
    values: dict[str, str] = field(default_factory=dict)
    flags: set[str] = field(default_factory=set)

    def get(self, name: str, default: str | None = None) -> str | None:
        return self.values.get(name, default)

    def require(self, name: str) -> str:
        if name not in self.values:
            raise UsageError(f"Missing required option --{name}")
        return self.values[name]

    def integer(self, name: str, default: int) -> int:
        raw = self.values.get(name)
        if raw is None:
            return default
        try:
            return int(raw)
        except ValueError as e:
            raise UsageError(f"--{name} expects an integer, got {raw!r}") from e


def _parse_options(args: list[str], valued: set[str], flags: set[str]) -> Options:
    """`--name value` for names in `valued`, bare `--name` for names in `flags`."""
    options = Options()
    i = 0
    while i < len(args):
        arg = args[i]
        name = arg[2:] if arg.startswith("--") else None
        if name in valued and i + 1 < len(args):
            options.values[name] = args[i + 1]
            i += 2
        elif name in flags:
            options.flags.add(name)
            i += 1
        elif name in valued:
            raise UsageError(f"Option {arg} needs a value")
        else:
            raise UsageError(f"Unknown option: {arg}")
    return options


def _emit(payload: Any) -> None:
    print(json.dumps(payload, indent=2))


def _yes(value: bool | None) -> str:
    return "n/a" if value is None else str(value).lower()


# =============================================================================
# verify-paper
# =============================================================================


def _claim_lines(name: str, report: Any) -> list[str]:
    lines = [f"{name}: {report.verdict.value}"]
    lines.append("  premise (1)(i):  " + " ".join(f"{c}={_yes(v)}" for c, v in report.premise_1i.items()))
    lines.append("  premise (1)(ii): " + " ".join(f"{c}={_yes(v)}" for c, v in report.premise_1ii.items()))
    lines.append(f"  premise (iii):   {_yes(report.premise_iii)}")
    lines.append(f"  premise (2):     {_yes(report.premise_2)}")
    lines.append(f"  conclusion (3):  {_yes(report.conclusion_3)}")
    return lines


def _cmd_verify_paper(options: Options) -> int:
    from ci_lab.claims import build_ce1, build_ce2, build_overlap_variant, verify_claim
    from ci_lab.validation.models import Verdict

    reports = {
        "ce1": verify_claim(build_ce1()),
        "ce2": verify_claim(build_ce2()),
        "overlap-variant": verify_claim(build_overlap_variant(1)),
    }
    if "json" in options.flags:
        _emit({name: r.model_dump(mode="json") for name, r in reports.items()})
    else:
        for name, report in reports.items():
            print("\n".join(_claim_lines(name, report)))
    refuted = all(r.verdict is Verdict.CLAIM_REFUTED for r in reports.values())
    return EXIT_OK if refuted else EXIT_INPUT


# =============================================================================
# check
# =============================================================================


def _cmd_check(options: Options) -> int:
    from ci_lab.cli.grammar import parse_ci_statement, parse_groups
    from ci_lab.independence import is_ci, is_mutually_independent
    from ci_lab.schema.loader import load_table

    if "ci" not in options.values and "mutual" not in options.values:
        raise UsageError("check needs --ci and/or --mutual")
    table = load_table(options.require("table"))
    results: list[tuple[str, bool]] = []
    if "ci" in options.values:
        statement = parse_ci_statement(options.require("ci"))
        results.append((str(statement), is_ci(table, statement)))
    if "mutual" in options.values:
        groups = parse_groups(options.require("mutual"))
        given_text = options.get("given", "") or ""
        given = [g.strip() for g in given_text.split(",") if g.strip() and g.strip() != "-"]
        label = "mutual(" + " ; ".join(",".join(g) for g in groups) + ") | " + ",".join(given)
        results.append((label.rstrip(), is_mutually_independent(table, groups, given)))

    if "json" in options.flags:
        _emit([{"statement": s, "holds": v} for s, v in results])
    else:
        for statement, value in results:
            print(f"{statement}: {_yes(value)}")
    return EXIT_OK


# =============================================================================
# search
# =============================================================================


def _cmd_search(options: Options) -> int:
    from ci_lab.schema.loader import load_query
    from ci_lab.search import PRESETS, SearchConfig, find_counterexample

    if "query" in options.values:
        query = load_query(options.require("query"))
    elif "preset" in options.values:
        preset = options.require("preset")
        if preset not in PRESETS:
            raise UsageError(f"Unknown preset {preset!r}; choose from {', '.join(sorted(PRESETS))}")
        query = PRESETS[preset]()
    else:
        raise UsageError("search needs --query FILE or --preset NAME")

    settings: dict[str, Any] = {"seed": options.integer("seed", 0)}
    for option, key in (
        ("restarts", "restarts"),
        ("max-iterations", "max_iterations"),
        ("snap-denominator", "snap_denominator"),
        ("grid-denominator", "grid_denominator"),
    ):
        if option in options.values:
            settings[key] = options.integer(option, 0)
    if "mode" in options.values:
        settings["mode"] = options.require("mode")
    try:
        config = SearchConfig(**settings)
    except ValidationError as e:
        raise UsageError(f"Invalid search options: {e.errors()[0]['msg']}") from e

    outcome = find_counterexample(query, config)
    if "json" in options.flags:
        _emit({"query": str(query), **outcome.model_dump(mode="json")})
    else:
        print(f"query: {query}")
        print(f"mode: {outcome.mode}  seed: {config.seed}  restarts used: {outcome.restarts_used}")
        if outcome.table is None:
            reason = "budget exhausted" if outcome.budget_exhausted else "none exists"
            print(f"witness: none ({reason})")
        else:
            print("witness:")
            for assignment, p in outcome.table.assignments():
                cells = " ".join(f"{k}={v}" for k, v in assignment.items())
                print(f"  {cells}  {p}")
            print("verification:")
            assert outcome.verification is not None
            for check in (*outcome.verification.premises, outcome.verification.conclusion):
                print(f"  {check.statement}: {_yes(check.holds)}")
    return EXIT_OK if outcome.found else EXIT_NO_WITNESS


# =============================================================================
# deconf
# =============================================================================


def _load_dgp(name: str) -> Any:
    from ci_lab.claims import build_ce1, build_ce2, build_cluster_instance, build_overlap_variant
    from ci_lab.schema.loader import load_instance

    builders: dict[str, Callable[[], Any]] = {
        "ce1": build_ce1,
        "ce2": build_ce2,
        "cluster": build_cluster_instance,
        "overlap": build_overlap_variant,
    }
    if name in builders:
        return builders[name]()
    if not Path(name).exists():
        raise FormatException(f"No such DGP file: {name}", path=name)
    return load_instance(name)


def _adjustment_lines(label: str, report: Any) -> list[str]:
    lines = [f"{label} (Z={report.z}):"]
    for term in report.terms:
        mean = "undefined" if term.conditional_mean is None else str(term.conditional_mean)
        lines.append(f"  stratum {report.z}={term.z}: P={term.weight}  E[W|a,z]={mean}")
    psi = "undefined" if report.psi is None else str(report.psi)
    gap = "undefined" if report.gap is None else str(report.gap)
    lines.append(f"  psi={psi}  E[W]={report.baseline}  gap={gap}")
    if report.degenerate_strata:
        lines.append(f"  degenerate strata: {', '.join(report.degenerate_strata)}")
    return lines


def _cmd_deconf(options: Options) -> int:
    from ci_lab.cli.grammar import parse_assignment
    from ci_lab.deconf_pipeline import run_deconfounder, simulate_samples

    inst = _load_dgp(options.get("dgp", "ce1") or "ce1")
    if "target" in options.values:
        target = parse_assignment(options.require("target"))
    else:
        target = {c: inst.table.schema.support(c)[0] for c in inst.causes}
    n = options.integer("n", 10_000)
    k = options.integer("k", 2)
    seed = options.integer("seed", 0)
    if n < 1 or k < 1:
        raise UsageError("--n and --k must be >= 1")
    exact = "exact" in options.flags

    report = run_deconfounder(
        inst.table, inst.causes, inst.w, target, z=inst.z, n=n, k=k, seed=seed, exact=exact
    )
    if "save-samples" in options.values and not exact:
        simulate_samples(inst.table, inst.causes, n, seed).to_csv(options.require("save-samples"))

    if "json" in options.flags:
        _emit(report.model_dump(mode="json"))
        return EXIT_OK
    target_text = ",".join(f"{k_}={v}" for k_, v in report.target.items())
    print(f"target: {target_text}  seed: {report.seed}  mode: {'exact' if report.exact else 'sampled'}")
    if not report.exact:
        weights = ", ".join(f"{w:.4f}" for w in report.class_weights or [])
        print(f"fit: n={report.n} k={report.k} loglik={report.log_likelihood:.4f} "
              f"converged={_yes(report.converged)} weights=[{weights}]")
    print("\n".join(_adjustment_lines("adjustment", report.adjustment)))
    if report.oracle is not None:
        print("\n".join(_adjustment_lines("oracle adjustment", report.oracle)))
    for c in report.conditioning:
        print(f"conditioning {c.z}={c.z_value}: {c.status.value} (feasible: {', '.join(c.feasible_z) or '-'})")
    return EXIT_OK


# =============================================================================
# dispatch
# =============================================================================

COMMANDS: dict[str, tuple[Callable[[Options], int], set[str], set[str]]] = {
    "verify-paper": (_cmd_verify_paper, set(), {"json"}),
    "check": (_cmd_check, {"table", "ci", "mutual", "given"}, {"json"}),
    "search": (
        _cmd_search,
        {"query", "preset", "seed", "mode", "restarts", "max-iterations", "snap-denominator", "grid-denominator"},
        {"json"},
    ),
    "deconf": (_cmd_deconf, {"dgp", "n", "k", "seed", "target", "save-samples"}, {"exact", "json"}),
}


def print_usage() -> None:
    print("Usage: ci-lab <command> [options]", file=sys.stderr)
    print(file=sys.stderr)
    print("Commands:", file=sys.stderr)
    print("  verify-paper  Check both counterexamples and the overlap variant", file=sys.stderr)
    print("  check         --table F --ci S [--mutual G1;G2 --given Z]", file=sys.stderr)
    print("  search        --query F | --preset NAME [--seed N --mode M --restarts R]", file=sys.stderr)
    print("  deconf        --dgp ce1|ce2|cluster|overlap|FILE [--n N --k K --seed S --target a --exact]", file=sys.stderr)
    print("  version       Show version information", file=sys.stderr)
    print(file=sys.stderr)
    print("All commands accept --json for machine-readable output.", file=sys.stderr)


def run(argv: list[str]) -> int:
    """
    Run one command.

    Args:
        argv: Arguments after the program name

    Returns:
        Exit code
    """
    if not argv:
        print_usage()
        return EXIT_USAGE
    command, args = argv[0], [a for a in argv[1:] if a not in ("-v", "--verbose")]

    if command == "version":
        from ci_lab import __version__

        print(f"ci-lab v{__version__}")
        return EXIT_OK
    if command not in COMMANDS:
        print(f"Unknown command: {command}", file=sys.stderr)
        print_usage()
        return EXIT_USAGE

    handler, valued, flags = COMMANDS[command]
    try:
        return handler(_parse_options(args, valued, flags))
    except (UsageError, ParseException) as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (CILabException, ValidationError, ValueError) as e:
        logger.debug("Command %s failed: %r", command, e)
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_INPUT
