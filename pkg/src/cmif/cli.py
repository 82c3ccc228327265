"""Command-line front end.

Every command prints one JSON report on stdout and exits 0 on pass/found,
1 on fail/none, 2 on input errors.  Documents may be given as file paths or
as ``fixture:<name>`` for the bundled fixtures.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

from . import __version__
from .conjugacy import LengthMismatch, PatternMismatch, build_chain
from .functions import FunctionError, GeneratedFn, OutOfDomain, closed_graph_check, surjective_graph_check
from .invlimit import DEFAULT_FAMILY_DEPTH, DepthMismatch, DepthNApprox, approximate, transport_test
from .io import FIXTURES, DocumentError, dumps, fixture_text, parse_document, serialize
from .limits import DOWN, UP, side_limit
from .markov import verify_cmif
from .partition import DEFAULT_DEPTH, PartitionError
from .pattern import DEFAULT_SHIFT_BOUND, PatternMap, PatternMapError, check_same_pattern, find_pattern_map
from .render import RENDER_DEPTH, render_svg
from .scalar import Q, fmt_rational

EXIT_PASS, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
CHAIN_FORMAT = "cmif-chain/1"


class InputError(Exception):
    pass


class _Inputs:
    """Reads inputs and remembers their digests for the report."""

    def __init__(self):
        self.digests: dict[str, str] = {}

    def text(self, source: str) -> str:
        if source.startswith("fixture:"):
            name = source.split(":", 1)[1]
            if name not in FIXTURES:
                raise InputError(f"unknown fixture {name!r}; known: {', '.join(FIXTURES)}")
            text = fixture_text(name)
        else:
            try:
                text = Path(source).read_text(encoding="utf-8")
            except OSError as exc:
                raise InputError(f"{source}: {exc.strerror}")
        self.digests[source] = hashlib.sha256(text.encode()).hexdigest()
        return text

    def document(self, source: str):
        text = self.text(source)
        try:
            return parse_document(text)
        except (DocumentError, PartitionError, FunctionError) as exc:
            raise InputError(f"{source}: {exc}")

    def function(self, source: str):
        return self.document(source).function

    def generated(self, source: str) -> GeneratedFn:
        f = self.function(source)
        if not isinstance(f, GeneratedFn):
            raise InputError(f"{source}: this command needs a generated (partition-based) function")
        return f

    def json(self, source: str) -> dict:
        try:
            return json.loads(self.text(source))
        except json.JSONDecodeError as exc:
            raise InputError(f"{source}: line {exc.lineno}: {exc.msg}")


def _rational(text: str):
    try:
        return Q(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational: {text!r}")


def _load_tau(inputs: _Inputs, source: str, f: GeneratedFn, g: GeneratedFn) -> PatternMap:
    try:
        return PatternMap.from_json(inputs.json(source), f.partition, g.partition)
    except (PatternMapError, PartitionError, KeyError, ValueError) as exc:
        raise InputError(f"{source}: {exc}")


def _write(path: str | None, text: str) -> None:
    if path is None:
        return
    if path == "-":
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}")


# -- commands ---------------------------------------------------------------------------


def cmd_validate(args, inputs: _Inputs):
    f = inputs.function(args.doc)
    if isinstance(f, GeneratedFn):
        report = verify_cmif(f, args.depth)
        return report.overall, {"kind": "generated", **report.to_json()}
    usc = closed_graph_check(f, args.depth)
    onto = surjective_graph_check(f, args.depth)
    ok = usc.ok and onto.ok
    return ok, {"kind": "finite-graph", "overall": "pass" if ok else "fail", "usc": usc.to_json(), "surjective": onto.to_json()}


def cmd_limits(args, inputs: _Inputs):
    f = inputs.function(args.doc)
    sides = (UP, DOWN) if args.side == "both" else (args.side,)
    try:
        rows = [side_limit(f, args.at, s) for s in sides]
    except OutOfDomain as exc:
        raise InputError(str(exc))
    return True, {"at": fmt_rational(args.at), "limits": [{**r.to_json(), "text": r.value.to_text()} for r in rows]}


def cmd_pattern(args, inputs: _Inputs):
    f, g = inputs.generated(args.f), inputs.generated(args.g)
    if args.tau:
        tau = _load_tau(inputs, args.tau, f, g)
        res = check_same_pattern(f, g, tau, args.depth)
        return res.ok, {"mode": "check", "tau": tau.to_json(), **res.to_json()}
    tau = find_pattern_map(f, g, shift_bound=args.shift_bound)
    return tau is not None, {"mode": "find", "tau": tau.to_json() if tau else None}


def cmd_conjugate(args, inputs: _Inputs):
    fdoc, gdoc = inputs.document(args.f), inputs.document(args.g)
    f, g = fdoc.function, gdoc.function
    if not (isinstance(f, GeneratedFn) and isinstance(g, GeneratedFn)):
        raise InputError("conjugate needs generated (partition-based) functions")
    if args.tau:
        tau = _load_tau(inputs, args.tau, f, g)
    else:
        tau = find_pattern_map(f, g)
        if tau is None:
            return False, {"error": "no pattern map found", "chain": None}
    try:
        chain = build_chain(f, g, tau, args.depth, args.verify_depth)
    except PatternMismatch as exc:
        return False, {"error": str(exc), "chain": None}
    summary = chain.summary(args.verify_depth)
    if args.out:
        record = {
            "format": CHAIN_FORMAT,
            "depth": args.depth,
            "tau": tau.to_json(),
            "f": json.loads(serialize(fdoc)),
            "g": json.loads(serialize(gdoc)),
        }
        _write(args.out, dumps(record))
    return chain.ok, {"chain": summary}


def cmd_approx(args, inputs: _Inputs):
    fs = [inputs.function(d) for d in args.docs]
    if len(fs) not in (1, args.depth - 1):
        raise InputError(f"give one bonding function or {args.depth - 1}, got {len(fs)}")
    if args.depth < 2 or args.resolution <= 0:
        raise InputError("need --depth >= 2 and a positive --resolution")
    approx = approximate(fs if len(fs) > 1 else fs[0], args.depth, args.resolution, args.family_depth, args.max_points)
    csv_text = approx.to_csv()
    _write(args.out, csv_text)
    return True, {
        "depth": approx.depth,
        "resolution": fmt_rational(approx.resolution),
        "family_depth": approx.family_depth,
        "tuples": len(approx),
        "truncated": approx.truncated,
        "csv_sha256": hashlib.sha256(csv_text.encode()).hexdigest(),
    }


def _rebuild_chain(inputs: _Inputs, source: str):
    rec = inputs.json(source)
    if rec.get("format") != CHAIN_FORMAT or "f" not in rec:
        raise InputError(f"{source}: not a chain file written by 'conjugate --out'")
    try:
        f = parse_document(json.dumps(rec["f"])).function
        g = parse_document(json.dumps(rec["g"])).function
        tau = PatternMap.from_json(rec["tau"], f.partition, g.partition)
        return build_chain(f, g, tau, int(rec["depth"]))
    except (DocumentError, PartitionError, FunctionError, PatternMapError, PatternMismatch, KeyError, ValueError) as exc:
        raise InputError(f"{source}: {exc}")


def cmd_transport(args, inputs: _Inputs):
    chain = _rebuild_chain(inputs, args.chain)
    try:
        approx = DepthNApprox.from_csv(inputs.text(args.approx))
    except (DepthMismatch, ValueError, ZeroDivisionError) as exc:
        raise InputError(f"{args.approx}: {exc}")
    gs = [inputs.function(d) for d in args.gs]
    n = approx.depth
    if len(gs) not in (1, n - 1):
        raise InputError(f"give one target bonding function or {n - 1}, got {len(gs)}")
    try:
        res = transport_test(chain, approx, gs if len(gs) > 1 else gs[0])
    except (DepthMismatch, LengthMismatch) as exc:
        raise InputError(str(exc))
    return res.ok, res.to_json()


def cmd_render(args, inputs: _Inputs):
    f = inputs.function(args.doc)
    svg = render_svg(f, args.width, args.height, args.depth)
    _write(args.out, svg)
    return True, {
        "lines": svg.count("<line"),
        "rects": svg.count("<rect"),
        "svg_sha256": hashlib.sha256(svg.encode()).hexdigest(),
    }


# -- parser -----------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cmif", description="Countably Markov interval functions: checks, limits, conjugacies.")
    p.add_argument("--version", action="version", version=f"cmif {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", help="decide the countably Markov conditions (or closedness for finite graphs)")
    s.add_argument("doc")
    s.add_argument("--depth", type=int, default=DEFAULT_DEPTH)
    s.set_defaults(run=cmd_validate)

    s = sub.add_parser("limits", help="one-sided set-valued limits at a point")
    s.add_argument("doc")
    s.add_argument("--at", type=_rational, required=True)
    s.add_argument("--side", choices=[UP, DOWN, "both"], default="both")
    s.set_defaults(run=cmd_limits)

    s = sub.add_parser("pattern", help="check a pattern map, or search for one")
    s.add_argument("f")
    s.add_argument("g")
    s.add_argument("--tau")
    s.add_argument("--shift-bound", type=int, default=DEFAULT_SHIFT_BOUND)
    s.add_argument("--depth", type=int, default=DEFAULT_DEPTH)
    s.set_defaults(run=cmd_pattern)

    s = sub.add_parser("conjugate", help="build and verify the conjugating chain h_1..h_{m+1}")
    s.add_argument("f")
    s.add_argument("g")
    s.add_argument("--depth", type=int, required=True, help="number of bonding maps m")
    s.add_argument("--tau")
    s.add_argument("--verify-depth", type=int, default=DEFAULT_DEPTH)
    s.add_argument("--out", help="write a chain file for 'transport'")
    s.set_defaults(run=cmd_conjugate)

    s = sub.add_parser("approx", help="finite-depth inverse limit approximation as CSV")
    s.add_argument("docs", nargs="+", help="one bonding function, or f_1 .. f_{n-1}")
    s.add_argument("--depth", type=int, required=True)
    s.add_argument("--resolution", type=_rational, required=True)
    s.add_argument("--family-depth", type=int, default=DEFAULT_FAMILY_DEPTH)
    s.add_argument("--max-points", type=int, default=200_000)
    s.add_argument("--out", help="CSV path, or - for stdout (the report then goes to stderr)")
    s.set_defaults(run=cmd_approx)

    s = sub.add_parser("transport", help="check that H maps an approximation into the target inverse limit")
    s.add_argument("chain")
    s.add_argument("approx")
    s.add_argument("gs", nargs="+")
    s.set_defaults(run=cmd_transport)

    s = sub.add_parser("render", help="SVG drawing of the graph")
    s.add_argument("doc")
    s.add_argument("--out", help="SVG path, or - for stdout (the report then goes to stderr)")
    s.add_argument("--width", type=int, default=400)
    s.add_argument("--height", type=int, default=400)
    s.add_argument("--depth", type=int, default=RENDER_DEPTH)
    s.set_defaults(run=cmd_render)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_PASS
    inputs = _Inputs()
    try:
        ok, result = args.run(args, inputs)
        status = EXIT_PASS if ok else EXIT_FAIL
    except InputError as exc:
        result, status = {"error": str(exc)}, EXIT_INPUT
    report = {
        "command": args.command,
        "inputs": dict(sorted(inputs.digests.items())),
        "status": {EXIT_PASS: "pass", EXIT_FAIL: "fail", EXIT_INPUT: "input-error"}[status],
        "result": result,
    }
    stream = sys.stderr if getattr(args, "out", None) == "-" and status != EXIT_INPUT else sys.stdout
    stream.write(dumps(report))
    return status


if __name__ == "__main__":
    sys.exit(main())
