"""Command-line front end: ``mwrc {rates,classify,simulate,sweep} SPEC``.

Exit codes: 0 success, 2 invalid input, 3 a size cap was exceeded, 4
internal error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .classify import DEFAULT_TOL, classify
from .errors import MwrcError, TooLargeError
from .errors import ValidationError
from .fdf import run_end_to_end
from .rates import DEFAULT_DELTA, swfdf_feasible, theorem_min_rate, phi
from .sources import info_profile
from .specio import ProblemSpec, digest, load_spec
from .sw_codec import BLOCK_CAP

EXIT_OK, EXIT_VALIDATION, EXIT_CAP, EXIT_INTERNAL = 0, 2, 3, 4


def result_record(command: str, spec: ProblemSpec, result, seed=None, timestamp: bool = False) -> dict:
    """Serializable record; ``input_digest`` is the SHA-256 of the canonical input."""
    rec = {
        "tool": "mwrc",
        "version": __version__,
        "command": command,
        "input": spec.raw,
        "input_digest": spec.digest,
        "seed": seed,
        "result": result,
    }
    if timestamp:
        rec["timestamp"] = datetime.now(timezone.utc).isoformat()
    return rec


def verify_record(rec: dict) -> bool:
    return digest(rec["input"]) == rec["input_digest"]


def _clean(x):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.generic):
        x = x.item()
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    return x


def _flatten(d: dict, prefix: str = "") -> list[tuple[str, object]]:
    rows = []
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            rows.extend(_flatten(v, key + "."))
        elif isinstance(v, list):
            rows.append((key, json.dumps(v)))
        else:
            rows.append((key, v))
    return rows


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf)  # RFC 4180: minimal quoting, CRLF line ends
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _opt(args, spec: ProblemSpec, name: str, default):
    v = getattr(args, name, None)
    if v is not None:
        return v
    return spec.options.get(name, default)


def _seed(args, spec: ProblemSpec) -> int:
    if args.seed is not None:
        return args.seed
    if "seed" in spec.options:
        return int(spec.options["seed"])
    env = os.environ.get("MWRC_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ValidationError(f"MWRC_SEED must be an integer, got {env!r}") from None
    return 0


# --- subcommands ---------------------------------------------------------------------


def cmd_rates(args) -> str:
    spec = load_spec(args.spec)
    tol = _opt(args, spec, "tol", DEFAULT_TOL)
    delta = _opt(args, spec, "delta", DEFAULT_DELTA)
    report = theorem_min_rate(spec.source, spec.channel, delta, tol)
    result = report.to_dict()
    kappa = _opt(args, spec, "kappa", None)
    if kappa is not None:
        feas = swfdf_feasible(float(kappa), report.profile, spec.channel)
        result["check"] = {"kappa": float(kappa), "swfdf_feasible": feas.feasible,
                           "conflicts": feas.describe_conflicts()}
    result = _clean(result)
    if args.format == "json":
        return json.dumps(result_record("rates", spec, result, timestamp=args.timestamp), indent=2) + "\n"
    if args.format == "csv":
        return _csv(["key", "value"], _flatten(result))
    lines = [
        f"phi             {report.phi:.6g}",
        f"inf K (SW/FDF)  {report.inf_kappa_swfdf:.6g}",
        f"class           {report.source_class.label}",
        f"kappa*          {'n/a' if report.kappa_star is None else f'{report.kappa_star:.6g} (case {report.case})'}",
        f"Cover/Tuncel    {report.cover_tuncel:.6g}",
    ]
    if report.witness is not None:
        r = report.witness
        lines.append(f"witness         kappa={report.witness_kappa:.6g} R=({r.R1:.6g}, {r.R2:.6g}, {r.R3:.6g})")
    if "check" in result:
        chk = result["check"]
        verdict = "feasible" if chk["swfdf_feasible"] else "infeasible: " + "; ".join(chk["conflicts"])
        lines.append(f"SW/FDF-IS at {chk['kappa']:g}: {verdict}")
    return "\n".join(lines) + "\n"


def cmd_classify(args) -> str:
    spec = load_spec(args.spec)
    tol = _opt(args, spec, "tol", DEFAULT_TOL)
    ip = info_profile(spec.source)
    result = classify(spec.source, tol, ip).to_dict()
    result["profile"] = ip.as_dict()
    result = _clean(result)
    if args.format == "json":
        return json.dumps(result_record("classify", spec, result, timestamp=args.timestamp), indent=2) + "\n"
    if args.format == "csv":
        return _csv(["key", "value"], _flatten(result))
    return "\n".join(f"{k:22s}{v}" for k, v in _flatten(result)) + "\n"


def _sim_kwargs(args, spec: ProblemSpec) -> dict:
    trials = int(_opt(args, spec, "trials", 1000))
    if trials < 1:
        raise ValidationError("--trials must be >= 1")
    m = int(_opt(args, spec, "m", 6))
    if m < 1:
        raise ValidationError("--m must be >= 1")
    cap = int(_opt(args, spec, "cap", BLOCK_CAP))
    return dict(case=_opt(args, spec, "case", "auto"), m=m, trials=trials, seed=_seed(args, spec),
                theta=_opt(args, spec, "theta", None), injective=args.injective,
                tol=_opt(args, spec, "tol", DEFAULT_TOL), cap=cap)


def cmd_simulate(args) -> str:
    spec = load_spec(args.spec)
    kw = _sim_kwargs(args, spec)
    ph = phi(info_profile(spec.source), spec.channel)
    if args.kappa_factor is not None:
        kappa = args.kappa_factor * ph
    else:
        kappa = _opt(args, spec, "kappa", None)
        if kappa is None:
            raise ValidationError("give --kappa or --kappa-factor")
    stats = run_end_to_end(spec.source, spec.channel, float(kappa), **kw)
    result = _clean({**stats.to_dict(), "phi": ph})
    if args.format == "json":
        return json.dumps(result_record("simulate", spec, result, kw["seed"], args.timestamp), indent=2) + "\n"
    if args.format == "csv":
        return _csv(["key", "value"], _flatten(result))
    lo, hi = stats.interval
    return (f"kappa {stats.kappa:.6g} (n={stats.n}, m={stats.m}, case {stats.case}, phi={ph:.6g})\n"
            f"P_e   {stats.p_e:.4f}  [{lo:.4f}, {hi:.4f}]  ({stats.errors}/{stats.trials})\n"
            f"stage relay={stats.relay_errors} downlink={stats.downlink_errors} source={stats.source_errors}\n")


def cmd_sweep(args) -> str:
    spec = load_spec(args.spec)
    kw = _sim_kwargs(args, spec)
    lo, hi = args.kappa_range
    if args.steps < 1 or not (0 < lo <= hi) or (args.steps > 1 and lo == hi):
        raise ValidationError("--kappa-range must be 0 < LO < HI (or LO == HI with --steps 1)")
    ip = info_profile(spec.source)
    ph = phi(ip, spec.channel)
    report = theorem_min_rate(spec.source, spec.channel, tol=kw["tol"])
    grid = np.linspace(lo, hi, args.steps)
    if args.relative:
        grid = grid * ph
    header = ["kappa", "kappa_over_phi", "n", "trials", "errors", "p_e", "wilson_low", "wilson_high",
              "phi", "inf_kappa_swfdf"]
    rows = []
    for k in grid:
        s = run_end_to_end(spec.source, spec.channel, float(k), **kw)
        w_lo, w_hi = s.interval
        rows.append([f"{k:.6g}", f"{k / ph:.6g}", s.n, s.trials, s.errors, f"{s.p_e:.6g}",
                     f"{w_lo:.6g}", f"{w_hi:.6g}", f"{ph:.6g}", f"{report.inf_kappa_swfdf:.6g}"])
    if args.format == "json":
        result = [dict(zip(header, r)) for r in rows]
        return json.dumps(result_record("sweep", spec, result, kw["seed"], args.timestamp), indent=2) + "\n"
    return _csv(header, rows)


# --- argument parsing -----------------------------------------------------------------


def _common(p: argparse.ArgumentParser, default_format: str = "text"):
    p.add_argument("spec", help="JSON problem spec (path, or the name of a bundled spec)")
    fmt = p.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="format", action="store_const", const="json")
    fmt.add_argument("--csv", dest="format", action="store_const", const="csv")
    p.set_defaults(format=default_format)
    p.add_argument("--tol", type=float, default=None, help="classification tolerance")
    p.add_argument("--out", default=None, help="write output to this file instead of stdout")
    p.add_argument("--timestamp", action="store_true", help="add a UTC timestamp to JSON records")


def _sim(p: argparse.ArgumentParser):
    p.add_argument("--m", type=int, default=None, help="source block length")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--seed", type=int, default=None, help="default: MWRC_SEED or 0")
    p.add_argument("--case", choices=["auto", "1", "2", "3"], default=None)
    p.add_argument("--theta", type=float, default=None, help="subcode length window (case 3)")
    p.add_argument("--cap", type=int, default=None, help="largest block space searched by source decoders")
    p.add_argument("--injective", action="store_true", help="use lossless source binning")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mwrc", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"mwrc {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rates", help="bounds on the minimum source-channel rate")
    _common(p)
    p.add_argument("--delta", type=float, default=None, help="margin for witness rates")
    p.add_argument("--kappa", type=float, default=None, help="also test SW/FDF-IS feasibility at this kappa")
    p.set_defaults(func=cmd_rates)

    p = sub.add_parser("classify", help="source class and common parts")
    _common(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("simulate", help="Monte Carlo error rate of the coding scheme")
    _common(p)
    _sim(p)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--kappa", type=float, default=None, help="channel uses per source symbol")
    g.add_argument("--kappa-factor", type=float, default=None, help="kappa as a multiple of phi")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="error rate over a grid of kappa (CSV)")
    _common(p, default_format="csv")
    _sim(p)
    p.add_argument("--kappa-range", type=float, nargs=2, metavar=("LO", "HI"), required=True)
    p.add_argument("--steps", type=int, default=5)
    p.add_argument("--relative", action="store_true", help="range is in multiples of phi")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        text = args.func(args)
        _emit(text, args.out)
        return EXIT_OK
    except TooLargeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (MwrcError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
