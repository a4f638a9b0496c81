"""Command-line interface.

Subcommands: ess, fit, posterior, consistency, density-grid, serve.
Parameters can come from flags, from a JSON config document mirroring the
flags (explicit flags win), or both. Output formats: human (two decimals),
json (full precision), csv (full precision, RFC-4180-style with header).
Exit codes: 0 success, 1 computation error, 2 usage error. Warnings go to
stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from typing import Any, Optional, Sequence

from . import __version__
from .errors import EsskitError, ValidationError
from . import runs

_FORMATS = ("human", "json", "csv")


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON document providing any of the flags")
    parser.add_argument("--output-format", choices=_FORMATS, default=None,
                        help="human (default), json, or csv")


def _add_measure_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--measure", choices=["mean-diff", "rd", "log-or", "log-rr"])
    parser.add_argument("--s1sq", type=float, help="treatment-arm variance (mean-diff)")
    parser.add_argument("--s0sq", type=float, help="control-arm variance (mean-diff)")


def _add_prior_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--theta0", type=float, help="prior mean of the effect")
    parser.add_argument("--s", type=float, help="prior sd of the effect")
    parser.add_argument("--mu0", type=float, help="prior mean of the control log-odds")
    parser.add_argument("--m0", type=float, help="prior sd of the control log-odds")
    parser.add_argument("--rho", type=float, help="prior correlation")


def _add_quad_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--quad-nodes", type=int, dest="quad_nodes")
    parser.add_argument("--quad-panels", type=int, dest="quad_panels")
    parser.add_argument("--quad-margin", type=float, dest="quad_margin")


def _add_counts_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--y0", type=int, help="control events")
    parser.add_argument("--n0", type=int, help="control arm size")
    parser.add_argument("--y1", type=int, help="treatment events")
    parser.add_argument("--n1", type=int, help="treatment arm size")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="esskit",
        description="Effective sample size for treatment-effect priors",
    )
    parser.add_argument("--version", action="version", version=f"esskit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_ess = sub.add_parser("ess", help="prior ESS at all scaling levels")
    _add_measure_flags(p_ess)
    p_ess.add_argument("--ratio", help="randomization ratio a:b")
    _add_prior_flags(p_ess)
    _add_quad_flags(p_ess)
    p_ess.add_argument("--renormalize", action="store_true", default=None,
                       help="divide the numerator by the captured mass")
    _add_common(p_ess)

    p_fit = sub.add_parser("fit", help="maximum-likelihood fit of two-arm counts")
    _add_measure_flags(p_fit)
    _add_counts_flags(p_fit)
    _add_common(p_fit)

    p_post = sub.add_parser("posterior", help="posterior belief and posterior ESS")
    _add_measure_flags(p_post)
    p_post.add_argument("--ratio", help="randomization ratio a:b")
    _add_prior_flags(p_post)
    _add_counts_flags(p_post)
    p_post.add_argument("--theta-hat", type=float, dest="theta_hat",
                        help="effect estimate (normal endpoint)")
    p_post.add_argument("--sigma-sq", type=float, dest="sigma_sq",
                        help="sampling variance of the estimate (normal endpoint)")
    _add_quad_flags(p_post)
    p_post.add_argument("--renormalize", action="store_true", default=None)
    _add_common(p_post)

    p_cons = sub.add_parser("consistency", help="predictive-consistency simulation")
    _add_measure_flags(p_cons)
    p_cons.add_argument("--ratio", help="randomization ratio a:b")
    _add_prior_flags(p_cons)
    p_cons.add_argument("--true-p0", type=float, dest="true_p0")
    p_cons.add_argument("--true-p1", type=float, dest="true_p1")
    p_cons.add_argument("--n1", type=int)
    p_cons.add_argument("--n0", type=int)
    p_cons.add_argument("--reps", type=int)
    p_cons.add_argument("--seed", type=int)
    p_cons.add_argument("--continuity-correction", type=float,
                        dest="continuity_correction")
    _add_quad_flags(p_cons)
    p_cons.add_argument("--renormalize", action="store_true", default=None)
    p_cons.add_argument("--verbose", action="store_true", default=None,
                        help="include per-replicate posterior ESS values")
    _add_common(p_cons)

    p_grid = sub.add_parser("density-grid", help="induced rate density on a grid")
    _add_measure_flags(p_grid)
    _add_prior_flags(p_grid)
    p_grid.add_argument("--resolution", type=int)
    _add_common(p_grid)

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--bind", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8787)
    p_serve.add_argument("--ui-dir", dest="ui_dir", default=None,
                         help="static directory for the elicitation UI")
    return parser


_NON_PARAM_KEYS = {"command", "config"}


def _collect_params(args: argparse.Namespace) -> dict[str, Any]:
    """Merge the config document (if any) under the explicit flags."""
    params: dict[str, Any] = {}
    if args.config:
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise ValidationError(f"cannot read config file: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ValidationError(f"config file is not valid JSON: {exc}") from exc
        if not isinstance(doc, dict):
            raise ValidationError("config document must be a JSON object")
        params.update(doc)
    for key, value in vars(args).items():
        if key not in _NON_PARAM_KEYS and value is not None:
            params[key] = value
    return params


def _format_number(x: Any) -> str:
    if isinstance(x, float):
        return f"{x:.2f}"
    return str(x)


def _human_lines(result: dict, indent: str = "") -> list[str]:
    lines = []
    for key, value in result.items():
        if key == "warnings":
            continue
        if isinstance(value, dict):
            lines.append(f"{indent}{key}:")
            lines.extend(_human_lines(value, indent + "  "))
        elif isinstance(value, list) and value and isinstance(value[0], list):
            if len(value) <= 4:  # small matrix: show the rows
                lines.append(f"{indent}{key}:")
                for row in value:
                    lines.append(f"{indent}  [" + ", ".join(f"{v:.6g}" for v in row) + "]")
            else:
                lines.append(f"{indent}{key}: [{len(value)} rows]")
        elif isinstance(value, list):
            lines.append(f"{indent}{key}: " + ", ".join(_format_number(v) for v in value))
        else:
            lines.append(f"{indent}{key}: {_format_number(value)}")
    return lines


def _flatten(result: dict, prefix: str = "") -> dict[str, Any]:
    flat: dict[str, Any] = {}
    for key, value in result.items():
        if key == "warnings":
            continue
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            flat.update(_flatten(value, name + "."))
        elif isinstance(value, list):
            flat[name] = json.dumps(value)
        else:
            flat[name] = value
    return flat


def _csv_text(rows: list[dict[str, Any]]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()), lineterminator="\r\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def _emit(result: dict, fmt: str, command: str) -> None:
    for warning in result.get("warnings", ()):
        print(f"warning: {warning}", file=sys.stderr)
    if fmt == "json":
        print(json.dumps(result))
        return
    if fmt == "csv":
        if command == "density-grid":
            rows = [{"p0": f"{p0:.17g}", "p1": f"{p1:.17g}", "density": f"{d:.17g}"}
                    for p0, p1, d in result["rows"]]
        elif command == "consistency" and "per_replicate" in result:
            rows = [{"replicate": i, "posterior_ess_total": repr(v)}
                    for i, v in enumerate(result["per_replicate"])]
        else:
            flat = _flatten(result)
            rows = [{k: (repr(v) if isinstance(v, float) else v) for k, v in flat.items()}]
        sys.stdout.write(_csv_text(rows))
        return
    if command == "density-grid":
        print(f"density grid: {result['resolution']}x{result['resolution']} "
              f"cell-center samples (use json or csv for the rows)")
        return
    print("\n".join(_human_lines(result)))


_RUNNERS = {
    "ess": runs.run_ess,
    "fit": runs.run_fit,
    "posterior": runs.run_posterior,
    "consistency": runs.run_consistency,
    "density-grid": runs.run_density_grid,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.command == "serve":
        from .service import serve  # deferred: uvicorn import is slow

        serve(bind=args.bind, port=args.port, ui_dir=args.ui_dir)
        return 0

    try:
        params = _collect_params(args)
        fmt = params.pop("output_format", None) or "human"
        result = _RUNNERS[args.command](params)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except EsskitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # never a traceback on user input
        print(f"internal error: {exc}", file=sys.stderr)
        return 1
    _emit(result, fmt, args.command)
    return 0


if __name__ == "__main__":
    sys.exit(main())
