"""Command-line front end: ``pendulum-bsh {spectrum,verify,plotdata,reduce}``.

Exit codes: 0 success, 1 usage error, 2 rejected hbar, 3 a verification
check failed. JSON reports are written with sorted keys so a fixed
configuration always produces the same bytes.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from pathlib import Path
from typing import Any, NoReturn, Sequence

import numpy as np

from . import classical as cl
from . import holonomy as hol
from . import minus_one_rep as odd
from . import reduction_one_rep as red
from .checks import SUITES, Check, run_suites
from .errors import DomainError, RejectedHbarError
from .spectrum import Spectrum, build_spectrum, validate_hbar

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_REJECTED = 2
EXIT_FAILED = 3

SEED_VARIABLE = "PENDULUM_BSH_SEED"
PLOT_KINDS = ("action_curve", "period_curve", "reduced_action", "holonomy_scan")
#: Plot grids skip energies this close to the separatrix.
PLOT_GAP = 1e-6

LEVEL_COLUMNS = ["n", "region", "energy", "action", "period"]
REDUCED_COLUMNS = ["k", "representation", "parity", "energy", "reduced_action", "partner_n", "partner_region"]
CHECK_COLUMNS = ["suite", "name", "residual", "tolerance", "passed"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad usage; 2 is reserved for rejected hbar here."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_float(text: str) -> float:
    value = float(text)
    if not (math.isfinite(value) and value > 0.0):
        raise argparse.ArgumentTypeError(f"must be a positive number, got {text}")
    return value


def _tolerance(text: str) -> float:
    value = float(text)
    if not 0.0 < value < 1e-2:
        raise argparse.ArgumentTypeError(f"must lie in (0, 1e-2), got {text}")
    return value


def _m_max(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--hbar", type=_positive_float, default=0.4, help="Planck constant (default 0.4)")
    common.add_argument("--m-max", type=_m_max, default=32, help="largest rotation quantum number (default 32)")
    common.add_argument("--tol", type=_tolerance, default=1e-10, help="ODE tolerance (default 1e-10)")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", type=Path, default=None, help="output file (default stdout)")

    parser = _Parser(prog="pendulum-bsh", description="Bohr-Sommerfeld quantization of the pendulum.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("spectrum", parents=[common], help="quantum levels and reduced tables")
    verify = sub.add_parser("verify", parents=[common], help="run property suites")
    verify.add_argument("suite", choices=(*SUITES, "all"))
    plot = sub.add_parser("plotdata", parents=[common], help="(e, value) samples for plotting")
    plot.add_argument("what", choices=PLOT_KINDS)
    plot.add_argument("--e-min", type=float, default=0.01)
    plot.add_argument("--e-max", type=float, default=6.0)
    plot.add_argument("--points", type=int, default=400)
    sub.add_parser("reduce", parents=[common], help="reduced spectra of both representations")
    return parser


def _seed() -> int:
    raw = os.environ.get(SEED_VARIABLE, "0")
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_VARIABLE} must be an integer, got {raw!r}") from None


def _config(args: argparse.Namespace, seed: int) -> dict[str, Any]:
    config: dict[str, Any] = {
        "command": args.command,
        "hbar": args.hbar,
        "m_max": args.m_max,
        "tol": args.tol,
        "format": args.format,
        "seed": seed,
    }
    if args.command == "verify":
        config["suite"] = args.suite
    if args.command == "plotdata":
        config.update(what=args.what, e_min=args.e_min, e_max=args.e_max, points=args.points)
    return config


def level_rows(spectrum: Spectrum) -> list[dict[str, Any]]:
    rows = []
    for lv in spectrum.levels:
        rows.append({
            "n": lv.n,
            "region": lv.region.value,
            "energy": lv.energy,
            "action": cl.component_action(lv.energy),
            "period": cl.period(lv.energy) if lv.energy > 0.0 else None,
        })
    return rows


def reduced_rows(spectrum: Spectrum) -> list[dict[str, Any]]:
    """Reduced levels of both lifts, each with the unreduced level it reconstructs.

    A reduced level contributes one row per partner, and one row with no
    partner when it has none (the -1 lift skips k = 0).
    """
    levels = red.reduced_spectrum(spectrum.hbar, spectrum.m_max)
    rows: list[dict[str, Any]] = []
    for representation, partners_of in ((1, red.reconstruct_even), (-1, odd.reconstruct_odd)):
        for lv in levels:
            partners = partners_of([lv], spectrum)
            base = {
                "reduced": True,
                "k": lv.k,
                "representation": representation,
                "parity": "even" if representation == 1 else "odd",
                "energy": lv.energy,
                "reduced_action": red.reduced_action(lv.energy) if lv.energy > 0.0 else 0.0,
            }
            for partner in partners or [None]:
                rows.append({
                    **base,
                    "partner_n": None if partner is None else partner.n,
                    "partner_region": None if partner is None else partner.region.value,
                    "partner_energy": None if partner is None else partner.energy,
                })
    return rows


def spectrum_section(spectrum: Spectrum) -> dict[str, Any]:
    return {"N": spectrum.N, "M": spectrum.M, "epsilon": spectrum.epsilon_gap, "levels": level_rows(spectrum)}


def plot_grid(e_min: float, e_max: float, points: int) -> list[float]:
    """Uniform grid on [e_min, e_max] with the band (2 - 1e-6, 2 + 1e-6) removed."""
    if points < 1 or not 0.0 < e_min <= e_max:
        return []
    grid = np.linspace(e_min, e_max, points) if points > 1 else np.array([e_min])
    return [float(e) for e in grid if abs(e - cl.SEPARATRIX_ENERGY) >= PLOT_GAP]


def plot_values(what: str, grid: Sequence[float], hbar: float) -> list[tuple[float, float]]:
    if what == "action_curve":
        fn = cl.full_action
    elif what == "period_curve":
        fn = cl.period
    elif what == "reduced_action":
        fn = red.reduced_action
    else:
        def fn(e: float) -> float:
            return abs(hol.holonomy_phase(e, hbar) - 1.0)
    return [(e, fn(e)) for e in grid]


def _csv_text(columns: Sequence[str], rows: Sequence[dict[str, Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=list(columns), extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: ("" if row.get(k) is None else _csv_cell(row[k])) for k in columns})
    return buffer.getvalue()


def _csv_cell(value: Any) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _json_text(report: dict[str, Any]) -> str:
    return json.dumps(report, sort_keys=True, indent=2, allow_nan=False) + "\n"


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text, encoding="utf-8")


def _report(config: dict[str, Any], spectrum: Spectrum | None, reduced: list[dict[str, Any]],
            checks: Sequence[Check]) -> dict[str, Any]:
    return {
        "config": config,
        "spectrum": None if spectrum is None else spectrum_section(spectrum),
        "reduced": reduced,
        "checks": [c.as_dict() for c in checks],
    }


def _rejection_report(config: dict[str, Any], err: RejectedHbarError) -> dict[str, Any]:
    report = _report(config, None, [], [])
    report["rejection"] = {"hbar": err.hbar, "n": err.n, "reason": err.reason}
    return report


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        seed = _seed()
        config = _config(args, seed)
        if args.command == "plotdata":
            return _plotdata(args, config)
        try:
            validate_hbar(args.hbar)
            spectrum = build_spectrum(args.hbar, args.m_max)
        except RejectedHbarError as err:
            report = _rejection_report(config, err)
            text = _json_text(report) if args.format == "json" else f"rejected,{err.n},{err.reason}\n"
            _emit(text, args.out)
            print(f"pendulum-bsh: {err}", file=sys.stderr)
            return EXIT_REJECTED
        if args.command == "spectrum":
            return _spectrum(args, config, spectrum)
        if args.command == "reduce":
            return _reduce(args, config, spectrum)
        return _verify(args, config, spectrum, seed)
    except (UsageError, DomainError) as err:
        parser.print_usage(sys.stderr)
        print(f"pendulum-bsh: error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as err:
        print(f"pendulum-bsh: cannot write output: {err}", file=sys.stderr)
        return EXIT_USAGE


def _spectrum(args: argparse.Namespace, config: dict[str, Any], spectrum: Spectrum) -> int:
    if args.format == "csv":
        _emit(_csv_text(LEVEL_COLUMNS, level_rows(spectrum)), args.out)
    else:
        _emit(_json_text(_report(config, spectrum, reduced_rows(spectrum), [])), args.out)
    return EXIT_OK


def _reduce(args: argparse.Namespace, config: dict[str, Any], spectrum: Spectrum) -> int:
    rows = reduced_rows(spectrum)
    if args.format == "csv":
        _emit(_csv_text(REDUCED_COLUMNS, rows), args.out)
    else:
        _emit(_json_text(_report(config, spectrum, rows, [])), args.out)
    return EXIT_OK


def _verify(args: argparse.Namespace, config: dict[str, Any], spectrum: Spectrum, seed: int) -> int:
    names = list(SUITES) if args.suite == "all" else [args.suite]
    checks = run_suites(names, spectrum, args.tol, seed)
    if args.format == "csv":
        _emit(_csv_text(CHECK_COLUMNS, [c.as_dict() for c in checks]), args.out)
    else:
        _emit(_json_text(_report(config, spectrum, [], checks)), args.out)
    failed = [c for c in checks if not c.passed]
    for c in failed:
        print(f"FAIL {c.suite}: {c.name} (residual {c.residual:.3e}, tolerance {c.tolerance:.1e})", file=sys.stderr)
    return EXIT_FAILED if failed else EXIT_OK


def _plotdata(args: argparse.Namespace, config: dict[str, Any]) -> int:
    grid = plot_grid(args.e_min, args.e_max, args.points)
    if not grid:
        raise UsageError("the requested grid is empty (need points >= 1 and 0 < e-min <= e-max)")
    samples = plot_values(args.what, grid, args.hbar)
    if args.format == "csv":
        rows = [{"e": e, "value": v} for e, v in samples]
        _emit(_csv_text(["e", "value"], rows), args.out)
    else:
        _emit(_json_text({"config": config, "samples": [[e, v] for e, v in samples]}), args.out)
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> NoReturn:
    sys.exit(run(argv))
