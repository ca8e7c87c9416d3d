"""Command-line front end.

Subcommands::

    lise analyze --config cfg.yaml          structural checks, verdict text
    lise run     --config cfg.yaml          simulate, write per-step + summary CSV
    lise compare --config cfg.yaml          side-by-side steady state + dominance

Exit codes: 0 success, 1 usage/config error, 2 structural-check failure,
3 runtime numerical failure.  The output directory comes from --out, else the
LISE_OUT_DIR environment variable, else the config.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import __version__
from .config import ConfigDocument, load_config
from .errors import ConfigError, LiseError
from .linalg import DEFAULT_TOL
from .model import validate
from .simulate import run_scenario, write_step_csv, write_summary_csv
from .structural import (
    invariant_zeros,
    plise_stability_check,
    strong_detectability,
    strong_observability_ti,
    strong_observability_tv,
    ulise_convergence_check,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CHECK_FAILED = 2
EXIT_NUMERICAL = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lise",
        description="Joint state and unknown-input estimation for linear "
                    "discrete-time systems: structural analysis, simulation, "
                    "and filter comparison.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="path to a YAML config file")
    common.add_argument("--seed", type=int, default=None,
                        help="override the scenario noise seed")
    common.add_argument("--out", default=None, help="override the output directory")
    common.add_argument("--mc", type=int, default=None,
                        help="override the Monte-Carlo run count")
    common.add_argument("--strict", action="store_true",
                        help="abort instead of warning when structural checks fail")

    sub.add_parser("analyze", parents=[common],
                   help="run the structural checks and print verdicts")
    sub.add_parser("run", parents=[common],
                   help="simulate the scenario and write CSV outputs")
    cmp_p = sub.add_parser("compare", parents=[common],
                           help="run several filters and compare steady state")
    cmp_p.add_argument("--filters", nargs="+", default=None,
                       help="filters to compare (default: scenario's list)")
    return parser


def _override_scenario(doc: ConfigDocument, args) -> None:
    sc = doc.scenario
    if sc is None:
        return
    updates = {}
    if args.seed is not None:
        updates["noise_seed"] = args.seed
    if args.mc is not None:
        updates["monte_carlo"] = args.mc
    if getattr(args, "filters", None):
        updates["filters"] = tuple(args.filters)
    if updates:
        from dataclasses import replace
        doc.scenario = replace(sc, **updates)


def _out_dir(doc: ConfigDocument, args) -> str:
    if args.out:
        return args.out
    env = os.environ.get("LISE_OUT_DIR")
    if env:
        return env
    return doc.output.dir


def _fmt_zero(z: complex) -> str:
    if abs(z.imag) < 1e-12:
        return f"{z.real:.6g}"
    sign = "+" if z.imag >= 0 else "-"
    return f"{z.real:.6g}{sign}{abs(z.imag):.6g}j"


def cmd_analyze(doc: ConfigDocument, args) -> int:
    model = doc.model
    checks = doc.analysis.checks
    tol = DEFAULT_TOL
    failed = False

    if "validate" in checks:
        violations = validate(model, tol=tol)
        if violations:
            failed = True
            for v in violations:
                print(f"model assumptions: VIOLATED [k={v.index}] {v.field}: {v.message}")
        else:
            print("model assumptions: ok")
        if violations:
            return EXIT_CHECK_FAILED

    step = model.step(0)
    if "strong_observability" in checks:
        if doc.analysis.window is not None:
            verdict = strong_observability_tv(model, doc.analysis.window, tol)
            tag = "yes" if verdict.observable else "no"
            print(f"strong observability (window {doc.analysis.window}): {tag} "
                  f"(rank {verdict.combined.achieved}/{verdict.combined.required})")
            failed |= not verdict.observable
        else:
            verdict = strong_observability_ti(model, tol)
            if model.p == 0:
                tag = "yes (classical)" if verdict.observable else "no (classical)"
            else:
                tag = "yes" if verdict.observable else "no"
            wit = ("" if verdict.witness_window is None
                   else f" (window {verdict.witness_window})")
            print(f"strong observability: {tag}{wit}")
            failed |= not verdict.observable

    zs = None
    if "invariant_zeros" in checks or "strong_detectability" in checks:
        det = strong_detectability(step, tol)
        zs = det.zeros
        if "invariant_zeros" in checks:
            ordered = sorted(zs.zeros, key=lambda z: (z.real, z.imag))
            listing = ", ".join(_fmt_zero(z) for z in ordered) if ordered else "none"
            print(f"invariant zeros ({zs.method}): {listing}")
        if "strong_detectability" in checks:
            tag = "yes" if det.detectable else "no"
            print(f"strongly detectable: {tag} (max zero modulus {det.max_zero_modulus:.6g})")
            failed |= not det.detectable

    if "ulise_convergence" in checks:
        cert = ulise_convergence_check(step, tol)
        extra = f" ({cert.reason})" if cert.reason else ""
        if cert.circle is not None:
            extra = f" (min circle sigma {cert.circle.min_sigma:.4g})"
        print(f"ULISE gain convergence: {cert.status}{extra}")
        failed |= not cert.ok
    if "plise_stability" in checks:
        cert = plise_stability_check(step, tol)
        extra = f" ({cert.reason})" if cert.reason else ""
        if cert.circle is not None:
            extra = f" (min circle sigma {cert.circle.min_sigma:.4g})"
        print(f"PLISE boundedness: {cert.status}{extra}")
        failed |= not cert.ok

    return EXIT_CHECK_FAILED if failed else EXIT_OK


def _structural_gate(result, strict: bool) -> int:
    rep = result.structural
    if rep is None:
        return EXIT_OK
    problems = []
    if not rep.strongly_detectable.detectable:
        problems.append("system is not strongly detectable")
    for name, cert in (("ULISE", rep.ulise_convergent), ("PLISE", rep.plise_bounded)):
        if name in result.scenario.filters and not cert.ok:
            problems.append(f"{name} certificate: {cert.status} {cert.reason}")
    for msg in problems:
        print(f"structural warning: {msg}", file=sys.stderr)
    if problems and strict:
        print("aborting (--strict)", file=sys.stderr)
        return EXIT_CHECK_FAILED
    return EXIT_OK


def cmd_run(doc: ConfigDocument, args) -> int:
    if doc.scenario is None:
        print("config has no scenario block; nothing to run", file=sys.stderr)
        return EXIT_USAGE
    out_dir = _out_dir(doc, args)
    os.makedirs(out_dir, exist_ok=True)
    result = run_scenario(doc.scenario, raise_filter_errors=False)
    gate = _structural_gate(result, args.strict)
    if gate != EXIT_OK:
        return gate
    step_path = os.path.join(out_dir, doc.output.per_step)
    summary_path = os.path.join(out_dir, doc.output.summary)
    write_step_csv(result, step_path)
    write_summary_csv(result, summary_path)
    print(f"wrote {step_path}")
    print(f"wrote {summary_path}")
    for fr in result.failed:
        print(f"{fr.name} failed at step {fr.failed_at}: {fr.error}", file=sys.stderr)
    return EXIT_NUMERICAL if result.failed else EXIT_OK


def cmd_compare(doc: ConfigDocument, args) -> int:
    if doc.scenario is None:
        print("config has no scenario block; nothing to compare", file=sys.stderr)
        return EXIT_USAGE
    if len(doc.scenario.filters) < 2:
        print("compare needs at least two filters", file=sys.stderr)
        return EXIT_USAGE
    result = run_scenario(doc.scenario, raise_filter_errors=False)
    gate = _structural_gate(result, args.strict)
    if gate != EXIT_OK:
        return gate
    model = doc.scenario.model
    names = [n for n in doc.scenario.filters if result.filters[n].error is None]
    header = ["metric"] + list(names)
    rows = []
    for i in range(model.n):
        rows.append([f"px_{i + 1}{i + 1}"]
                    + [f"{result.filters[n].steady['px_diag'][i]:.6g}" for n in names])
    for i in range(model.p):
        rows.append([f"pd_{i + 1}{i + 1}"]
                    + [f"{result.filters[n].steady['pd_diag'][i]:.6g}" for n in names])
    rows.append(["tr_px"] + [f"{result.filters[n].steady['tr_px']:.6g}" for n in names])
    rows.append(["tr_pd"] + [f"{result.filters[n].steady['tr_pd']:.6g}" for n in names])
    widths = [max(len(r[i]) for r in [header] + rows) for i in range(len(header))]
    for r in [header] + rows:
        print("  ".join(s.rjust(w) for s, w in zip(r, widths)))

    if "ULISE" in names:
        u = result.filters["ULISE"].steady
        violations = []
        for n in names:
            if n == "ULISE":
                continue
            s = result.filters[n].steady
            if u["tr_px"] > s["tr_px"] + 1e-10:
                violations.append(f"trace(Px) ULISE > {n}")
            if u["tr_pd"] > s["tr_pd"] + 1e-10:
                violations.append(f"trace(Pd) ULISE > {n}")
        if violations:
            for v in violations:
                print(f"dominance violation: {v}")
        else:
            print("dominance check: ULISE steady traces are minimal (as expected)")
    for fr in result.failed:
        print(f"{fr.name} failed at step {fr.failed_at}: {fr.error}", file=sys.stderr)
    return EXIT_NUMERICAL if result.failed else EXIT_OK


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; this tool reserves 2 for failed
        # structural checks
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        doc = load_config(args.config)
        _override_scenario(doc, args)
        if args.command == "analyze":
            return cmd_analyze(doc, args)
        if args.command == "run":
            return cmd_run(doc, args)
        return cmd_compare(doc, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except LiseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
