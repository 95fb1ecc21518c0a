"""Command-line interface.

    linode [--tol v] [--samples n] [--format text|json-lines] COMMAND ...

Every run produces a RunReport: the command echo, a sha256 digest of the
input files, the output records in a fixed order and any diagnostics.  Exit
codes: 0 success, 1 domain error (with a machine-readable code), 2 usage
error.  Floats are printed with 17 significant digits.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .errors import LinodeError
from .expr import LeafNames, evaluate_many, serialize
from .ode import ClassTag, form_of, format_tags

DEFAULT_TOL = 1e-7
DEFAULT_SAMPLES = 50


def fmt_float(x: float) -> str:
    return format(float(x), ".17g")


def _plain(v):
    """Diagnostics as JSON-compatible values (floats stay floats)."""
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_plain(x) for x in v]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(v)
    if isinstance(v, Fraction):
        return str(v)
    if v is None or isinstance(v, str):
        return v
    return str(v)


def _json(v) -> str:
    """JSON text with floats at 17 significant digits."""
    if isinstance(v, dict):
        return "{" + ", ".join(f"{json.dumps(k)}: {_json(x)}" for k, x in v.items()) + "}"
    if isinstance(v, list):
        return "[" + ", ".join(_json(x) for x in v) + "]"
    if isinstance(v, float):
        if not np.isfinite(v):
            return json.dumps(fmt_float(v))
        return fmt_float(v)
    return json.dumps(v)


def _text(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return fmt_float(v)
    if isinstance(v, (dict, list)):
        return _json(v)
    return str(v)


@dataclass
class RunReport:
    command: list
    inputs_digest: str = ""
    outputs: list = field(default_factory=list)  # (key, value) in print order
    diagnostics: list = field(default_factory=list)  # dicts
    exit_code: int = 0

    def add(self, key: str, value):
        self.outputs.append((key, _plain(value)))

    def error(self, code: str, message: str, exit_code: int = 1):
        self.diagnostics.append({"severity": "error", "code": code, "message": message})
        self.exit_code = exit_code

    def note(self, **items):
        self.diagnostics.append({"severity": "info", **_plain(items)})

    def render(self, fmt: str = "text") -> str:
        lines = []
        if fmt == "json-lines":
            lines.append(_json({"command": list(self.command)}))
            lines.append(_json({"inputs": self.inputs_digest}))
            for key, value in self.outputs:
                lines.append(_json({"key": key, "value": value}))
            for d in self.diagnostics:
                lines.append(_json({"diagnostic": d}))
            lines.append(_json({"exit": self.exit_code}))
            return "\n".join(lines) + "\n"
        lines.append("command: " + " ".join(self.command))
        lines.append("inputs: " + self.inputs_digest)
        for key, value in self.outputs:
            if isinstance(value, str) and "\n" in value:
                lines.append(f"{key}:")
                lines.extend("  " + ln for ln in value.rstrip("\n").split("\n"))
            else:
                lines.append(f"{key} = {_text(value)}")
        for d in self.diagnostics:
            rest = {k: v for k, v in d.items() if k != "severity"}
            lines.append(f"{d['severity']}: {_text(rest)}")
        lines.append(f"exit = {self.exit_code}")
        return "\n".join(lines) + "\n"


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.prog}: {message}")


def _global_options(parser, suppress: bool):
    default = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--tol", type=float, default=default(DEFAULT_TOL),
                        help="tolerance for verification predicates (default 1e-7)")
    parser.add_argument("--samples", type=int, default=default(DEFAULT_SAMPLES),
                        help="number of sample points (default 50)")
    parser.add_argument("--format", choices=("text", "json-lines"), default=default("text"))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="linode", description="Point transformations, canonical forms and "
                     "symmetry classification of linear ODEs.")
    parser.add_argument("--version", action="version", version=f"linode {__version__}")
    _global_options(parser, suppress=False)
    common = _Parser(add_help=False)
    _global_options(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("transform", parents=[common], help="apply a transformation to an equation")
    p.add_argument("ode")
    p.add_argument("tau")

    p = sub.add_parser("gauge", parents=[common], help="reduce an equation to a canonical form")
    p.add_argument("ode")
    p.add_argument("--to", required=True, choices=("rational", "lf", "arnold1", "arnold2"))
    p.add_argument("--t0", type=float)

    p = sub.add_parser("classify", parents=[common], help="Lie symmetry dimension")
    p.add_argument("ode")
    p.add_argument("--t0", type=float)

    p = sub.add_parser("verify", parents=[common], help="check an admissible transformation")
    p.add_argument("source")
    p.add_argument("target")
    p.add_argument("tau")

    p = sub.add_parser("member", parents=[common], help="equivalence-group membership")
    p.add_argument("tau")
    p.add_argument("--class", dest="tag", required=True, choices=("L", "L1", "L2", "A1", "A2"))
    p.add_argument("--homogeneous", action="store_true")
    p.add_argument("--order", type=int, required=True)

    p = sub.add_parser("fundamental", parents=[common], help="numeric fundamental system")
    p.add_argument("ode")
    p.add_argument("--t0", type=float, required=True)

    p = sub.add_parser("recover", parents=[common], help="equation from a fundamental system")
    p.add_argument("system")

    p = sub.add_parser("parse", parents=[common], help="parse a file and check the round trip")
    p.add_argument("file")
    return parser


# ---------------------------------------------------------------------------
# commands

class _Inputs:
    def __init__(self):
        self.digest = hashlib.sha256()

    def read(self, path: str) -> str:
        try:
            data = Path(path).read_bytes()
        except OSError as err:
            raise LinodeError(f"cannot read {path}: {err.strerror}", code="io") from err
        self.digest.update(len(data).to_bytes(8, "big"))
        self.digest.update(data)
        try:
            return data.decode("utf-8")
        except UnicodeDecodeError as err:
            raise LinodeError(f"{path} is not UTF-8 text", code="io") from err


def _load(inputs: _Inputs, path: str, kind: str):
    from . import parse

    text = inputs.read(path)
    try:
        return parse.PARSERS[kind](text)
    except parse.ParseError as err:
        raise LinodeError(f"{path}:{err}", code=err.code) from err


def cmd_transform(args, report, inputs, names):
    from .transform import apply_to_ode

    ode = _load(inputs, args.ode, "ode")
    tau = _load(inputs, args.tau, "transformation")
    out = apply_to_ode(tau, ode)
    report.add("ode", out.to_document(names))
    report.add("form", format_tags(form_of(out, tol=args.tol, n=args.samples)))


def cmd_gauge(args, report, inputs, names):
    from .gauge import GAUGES

    ode = _load(inputs, args.ode, "ode")
    res = GAUGES[args.to](ode, args.t0)
    report.add("transformation", res.transformation.to_document(names))
    report.add("ode", res.ode.to_document(names))
    report.add("form", format_tags(form_of(res.ode, tol=args.tol, n=args.samples)))
    report.add("residual", float(res.residual))
    for key in sorted(res.diagnostics):
        if key not in ("residual",):
            report.note(**{key: res.diagnostics[key]})


def cmd_classify(args, report, inputs, names):
    from .symmetry import classify_dimension

    ode = _load(inputs, args.ode, "ode")
    res = classify_dimension(ode, args.t0)
    report.add("dimension", res.dimension)
    report.add("case", res.case)
    report.add("confidence", res.confidence)
    report.add("witness", res.witness.to_document(names) if res.witness is not None else "none")
    for key in sorted(res.diagnostics):
        report.note(**{key: res.diagnostics[key]})


def cmd_verify(args, report, inputs, names):
    from .groupoid import AdmissibleTransformation, verify_admissible

    src = _load(inputs, args.source, "ode")
    tgt = _load(inputs, args.target, "ode")
    tau = _load(inputs, args.tau, "transformation")
    verdict = verify_admissible(AdmissibleTransformation(src, tgt, tau), args.tol, args.samples)
    report.add("admissible", verdict.ok)
    report.add("reason", verdict.reason)
    for key in sorted(verdict.details):
        report.add(key, verdict.details[key])


def cmd_member(args, report, inputs, names):
    from .groupoid import in_equivalence_group

    tau = _load(inputs, args.tau, "transformation")
    verdict = in_equivalence_group(tau, ClassTag.parse(args.tag), args.order, args.homogeneous,
                                   args.tol, args.samples)
    report.add("member", verdict.ok)
    report.add("reason", verdict.reason)
    for key in sorted(verdict.details):
        report.add(key, verdict.details[key])


def cmd_fundamental(args, report, inputs, names):
    from .reparam import fundamental_system, wronskian

    ode = _load(inputs, args.ode, "ode")
    fs = fundamental_system(ode, args.t0)
    report.add("system", fs.to_document(names))
    ts = fs.interval.chebyshev(args.samples) if args.samples >= 2 else np.array([args.t0])
    vals = evaluate_many([wronskian(fs)] + list(fs.chis), ts)
    header = "t W " + " ".join(f"chi{i + 1}" for i in range(fs.order))
    rows = [header] + [" ".join(fmt_float(v) for v in [t] + [col[i] for col in vals])
                       for i, t in enumerate(ts)]
    report.add("values", "\n".join(rows) + "\n")


def cmd_recover(args, report, inputs, names):
    from .reparam import coefficients_from_fundamental_system

    fs = _load(inputs, args.system, "system")
    ode = coefficients_from_fundamental_system(fs)
    report.add("ode", ode.to_document(names))


def cmd_parse(args, report, inputs, names):
    from . import parse

    text = inputs.read(args.file)
    kind = parse.kind_of(args.file, text)
    try:
        value = parse.PARSERS[kind](text)
    except parse.ParseError as err:
        raise LinodeError(f"{args.file}:{err}", code=err.code) from err
    if kind == "expression":
        canonical = serialize(value) + "\n"
    elif kind == "vector-field":
        canonical = parse.vector_field_document(value)
    else:
        canonical = value.to_document()
    again = parse.PARSERS[kind](canonical)
    report.add("kind", kind)
    report.add("canonical", canonical)
    report.add("roundtrip", again == value)


COMMANDS = {
    "transform": cmd_transform,
    "gauge": cmd_gauge,
    "classify": cmd_classify,
    "verify": cmd_verify,
    "member": cmd_member,
    "fundamental": cmd_fundamental,
    "recover": cmd_recover,
    "parse": cmd_parse,
}


def run(argv=None) -> tuple[RunReport, str]:
    """Execute one command; returns the report and the output format."""
    argv = list(sys.argv[1:] if argv is None else argv)
    report = RunReport(command=argv, inputs_digest="none")
    fmt = "json-lines" if "json-lines" in argv else "text"
    try:
        args = build_parser().parse_args(argv)
    except _UsageError as err:
        report.error("usage", str(err), exit_code=2)
        return report, fmt
    fmt = args.format
    inputs = _Inputs()
    try:
        COMMANDS[args.command](args, report, inputs, LeafNames())
    except LinodeError as err:
        report.error(err.code, str(err))
    report.inputs_digest = "sha256:" + inputs.digest.hexdigest()
    return report, fmt


def main(argv=None) -> int:
    report, fmt = run(argv)
    sys.stdout.write(report.render(fmt))
    return report.exit_code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
