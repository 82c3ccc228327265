"""JSON function documents, pattern-map files and canonical serialization.

Rationals are always ``"p/q"`` strings.  ``serialize(parse(text))`` is the
canonical form; canonical documents round-trip byte for byte.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources

from .functions import Box, FiniteGraph, FunctionError, GeneratedFn, GraphSegment, SegmentFamily
from .partition import Explicit, Gap, Member, PartitionError, Rel, parse_ref, validate_partition
from .scalar import Const, Geometric, Mobius, Q, fmt_rational

FORMAT = "cmif-function/1"


class DocumentError(ValueError):
    """Input problem with a field path, e.g. ``values.explicit:0: malformed point reference``."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


@dataclass
class FunctionDocument:
    function: FiniteGraph | GeneratedFn
    name: str = ""
    provenance: str = ""
    extra: dict = field(default_factory=dict)

    @property
    def kind(self) -> str:
        return "generated" if isinstance(self.function, GeneratedFn) else "finite-graph"


def _q(v, path: str) -> Fraction:
    if not isinstance(v, (str, int)) or isinstance(v, bool):
        raise DocumentError(path, f"expected a 'p/q' string, got {v!r}")
    try:
        return Q(v)
    except (ValueError, ZeroDivisionError) as exc:
        raise DocumentError(path, str(exc))


def _ref(text, path: str):
    if not isinstance(text, str):
        raise DocumentError(path, f"expected a point reference string, got {text!r}")
    try:
        return parse_ref(text)
    except ValueError as exc:
        raise DocumentError(path, str(exc))


def _need(d: dict, key: str, path: str):
    if not isinstance(d, dict) or key not in d:
        raise DocumentError(path, f"missing field '{key}'")
    return d[key]


# -- sequences --------------------------------------------------------------------


def _seq(entry, path: str):
    if not isinstance(entry, dict) or len(entry) != 1:
        raise DocumentError(path, "sequence must be one of {mobius: [p,q,r,s]}, {geometric: [a,b,rho]}, {const: v}")
    (kind, args), = entry.items()
    try:
        if kind == "mobius":
            return Mobius(*[_q(a, path) for a in args])
        if kind == "geometric":
            return Geometric(*[_q(a, path) for a in args])
        if kind == "const":
            return Const(_q(args, path))
    except (TypeError, ValueError) as exc:
        raise DocumentError(path, str(exc))
    raise DocumentError(path, f"unknown sequence kind {kind!r}")


def _seq_out(s) -> dict:
    if isinstance(s, Mobius):
        return {"mobius": [fmt_rational(v) for v in (s.p, s.q, s.r, s.s)]}
    if isinstance(s, Geometric):
        return {"geometric": [fmt_rational(v) for v in (s.alpha, s.beta, s.rho)]}
    return {"const": fmt_rational(s.value)}


# -- parsing ------------------------------------------------------------------------


def _parse_finite(doc: dict, ambient) -> FiniteGraph:
    segs, boxes, fams = [], [], []
    for i, s in enumerate(doc.get("segments", [])):
        path = f"segments[{i}]"
        p0, p1 = _need(s, "from", path), _need(s, "to", path)
        op = s.get("open", [False, False])
        try:
            segs.append(GraphSegment(_q(p0[0], path), _q(p0[1], path), _q(p1[0], path), _q(p1[1], path), bool(op[0]), bool(op[1])))
        except (ValueError, IndexError, TypeError) as exc:
            raise DocumentError(path, str(exc))
    for i, b in enumerate(doc.get("boxes", [])):
        path = f"boxes[{i}]"
        xs, ys = _need(b, "x", path), _need(b, "y", path)
        op = b.get("open", [False, False])
        try:
            boxes.append(Box(_q(xs[0], path), _q(xs[1], path), _q(ys[0], path), _q(ys[1], path), bool(op[0]), bool(op[1])))
        except (ValueError, IndexError, TypeError) as exc:
            raise DocumentError(path, str(exc))
    for i, f in enumerate(doc.get("segment_families", [])):
        path = f"segment_families[{i}]"
        try:
            fams.append(
                SegmentFamily(
                    *[_seq(_need(f, k, path), f"{path}.{k}") for k in ("x0", "y0", "x1", "y1")],
                    n0=int(f.get("n0", 1)),
                )
            )
        except (ValueError, TypeError) as exc:
            if isinstance(exc, DocumentError):
                raise
            raise DocumentError(path, str(exc))
    return FiniteGraph(ambient, segs, boxes, fams)


def _parse_generated(doc: dict, ambient) -> GeneratedFn:
    part = _need(doc, "partition", "")
    raw = {"ambient": ambient, "explicit": part.get("explicit", {}), "families": part.get("families", {})}
    try:
        P = validate_partition(raw)
    except PartitionError as exc:
        v = exc.violations[0]
        raise DocumentError(f"partition ({v.code})", "; ".join(str(x) for x in exc.violations))
    values: dict = {}
    for key, pair in _need(doc, "values", "").items():
        path = f"values.{key}"
        k = _ref(key, path)
        if isinstance(k, Rel):
            if k.offset != 0:
                raise DocumentError(path, "family value rules are keyed by family:<id>[n]")
            k = k.family
        if not isinstance(pair, list) or len(pair) != 2:
            raise DocumentError(path, "value must be a pair [u, v]")
        values[k] = (_ref(pair[0], path), _ref(pair[1], path))
    gap_rules: dict = {}
    for i, g in enumerate(_need(doc, "gaps", "")):
        path = f"gaps[{i}]"
        image = _need(g, "image", path)
        if not isinstance(image, list) or len(image) != 2:
            raise DocumentError(path, "image must be a pair [start, end]")
        st, en = _ref(image[0], path), _ref(image[1], path)
        if "family" in g:
            key = g["family"]
        else:
            between = _need(g, "between", path)
            key = Gap(_ref(between[0], path), _ref(between[1], path))
        gap_rules[key] = (st, en)
    try:
        f = GeneratedFn(P, values, gap_rules)
    except FunctionError as exc:
        raise DocumentError("values/gaps", str(exc))
    for i, g in enumerate(doc["gaps"]):
        if "orientation" in g:
            want = g["orientation"]
            got = _orientation(f, g)
            if got is not None and want != got:
                raise DocumentError(f"gaps[{i}].orientation", f"declared {want} but the image endpoints give {got}")
    return f


def _orientation(f: GeneratedFn, g: dict) -> str | None:
    """Orientation of a gap rule; None when it depends on the index."""
    key = g.get("family")
    P = f.partition
    if key is None:
        st, en = f.gap_rules[Gap(parse_ref(g["between"][0]), parse_ref(g["between"][1]))]
        a, b = P.value(st), P.value(en)
    else:
        tail = P.order.tail_of(key)
        st, en = f.gap_rules[key]
        start = f.symbolic_start(tail)
        d = f.sym_expr(f._sym(en, key, 0, tail)) - f.sym_expr(f._sym(st, key, 0, tail))
        signs = d.signs_from(start)
        if len(signs) != 1:
            return None
        sg = signs.pop()
        return "increasing" if sg > 0 else "decreasing" if sg < 0 else "constant"
    return "increasing" if b > a else "decreasing" if b < a else "constant"


def parse_document(text: str) -> FunctionDocument:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"line {exc.lineno} column {exc.colno}", f"syntax error: {exc.msg}")
    if not isinstance(doc, dict):
        raise DocumentError("", "document must be a JSON object")
    fmt = doc.get("format")
    if fmt != FORMAT:
        raise DocumentError("format", f"expected {FORMAT!r}, got {fmt!r}")
    amb = _need(doc, "ambient", "")
    if not isinstance(amb, list) or len(amb) != 2:
        raise DocumentError("ambient", "expected [x, y]")
    ambient = (_q(amb[0], "ambient[0]"), _q(amb[1], "ambient[1]"))
    if not ambient[0] < ambient[1]:
        raise DocumentError("ambient", "needs x < y")
    kind = _need(doc, "representation", "")
    if kind == "generated":
        fn = _parse_generated(doc, ambient)
    elif kind == "finite-graph":
        fn = _parse_finite(doc, ambient)
    else:
        raise DocumentError("representation", f"expected 'generated' or 'finite-graph', got {kind!r}")
    meta = doc.get("metadata", {})
    fn.name = meta.get("name", "")
    return FunctionDocument(fn, meta.get("name", ""), meta.get("provenance", ""))


def load_document(path) -> FunctionDocument:
    with open(path, encoding="utf-8") as fh:
        return parse_document(fh.read())


# -- serialization ------------------------------------------------------------------


def _gap_entry(f: GeneratedFn, key, pair) -> dict:
    out = {}
    if isinstance(key, str):
        out["family"] = key
    else:
        out["between"] = [str(key.left), str(key.right)]
    out["image"] = [str(pair[0]), str(pair[1])]
    o = _orientation(f, out)
    if o is not None:
        out["orientation"] = o
    return out


def _ref_sort_key(f: GeneratedFn, key) -> tuple:
    P = f.partition
    if isinstance(key, str):
        return (1, key, 0)
    if isinstance(key, Explicit):
        return (0, "", P.value(key))
    if isinstance(key, Member):
        return (2, key.family, key.index)
    return (0, "", P.value(key.left))


def document_to_dict(doc: FunctionDocument) -> dict:
    f = doc.function
    out: dict = {"format": FORMAT, "metadata": {"name": doc.name, "provenance": doc.provenance}}
    out["ambient"] = [fmt_rational(v) for v in f.domain]
    if isinstance(f, GeneratedFn):
        out["representation"] = "generated"
        raw = f.partition.to_raw()
        out["partition"] = {"explicit": raw["explicit"], "families": raw["families"]}
        values = {}
        for key in sorted(f.values, key=lambda k: _ref_sort_key(f, k)):
            name = f"family:{key}[n]" if isinstance(key, str) else str(key)
            values[name] = [str(r) for r in f.values[key]]
        out["values"] = values
        out["gaps"] = [_gap_entry(f, k, f.gap_rules[k]) for k in sorted(f.gap_rules, key=lambda k: _ref_sort_key(f, k))]
        return out
    out["representation"] = "finite-graph"
    out["segments"] = [
        {
            "from": [fmt_rational(s.x0), fmt_rational(s.y0)],
            "to": [fmt_rational(s.x1), fmt_rational(s.y1)],
            "open": [s.open0, s.open1],
        }
        for s in f.segments
    ]
    out["boxes"] = [
        {
            "x": [fmt_rational(b.x0), fmt_rational(b.x1)],
            "y": [fmt_rational(b.y0), fmt_rational(b.y1)],
            "open": [b.open_left, b.open_right],
        }
        for b in f.boxes
    ]
    out["segment_families"] = [
        {"x0": _seq_out(s.x0), "y0": _seq_out(s.y0), "x1": _seq_out(s.x1), "y1": _seq_out(s.y1), "n0": s.n0}
        for s in f.families
    ]
    return out


_SCALAR_ARRAY = re.compile(r"\[\s*((?:\"[^\"\n]*\"|-?\d+|true|false|null)(?:,\s*(?:\"[^\"\n]*\"|-?\d+|true|false|null))*)\s*\]")


def dumps(obj) -> str:
    """Indented JSON with arrays of scalars kept on one line."""
    text = json.dumps(obj, indent=2, ensure_ascii=False)
    text = _SCALAR_ARRAY.sub(lambda m: "[" + re.sub(r",\s+", ", ", m.group(1)) + "]", text)
    return text + "\n"


def serialize(doc: FunctionDocument) -> str:
    return dumps(document_to_dict(doc))


def canonical(text: str) -> str:
    return serialize(parse_document(text))


# -- fixtures -------------------------------------------------------------------------

FIXTURES = (
    "identity",
    "tent",
    "tent_b",
    "tent_flat",
    "bennet",
    "bennet_scaled",
    "tau_example",
    "xxx",
    "xxxx",
)


def fixture_text(name: str) -> str:
    return resources.files("cmif").joinpath(f"fixtures/{name}.json").read_text(encoding="utf-8")


def load_fixture(name: str) -> FunctionDocument:
    return parse_document(fixture_text(name))
