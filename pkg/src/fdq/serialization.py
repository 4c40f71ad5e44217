"""Canonical text files for every persisted object.

A file is a header followed by body lines::

    fdq/1
    kind cochain
    vars x:2 y:1
    arity 1
    [[[[1,0]],[[[1,2,[0,0,1]]],[0,0],[1]]]]

Series kinds carry `lambda <N>` in the header and one `order <r> <json>` line
per coefficient. Body lines are compact JSON dumped by pydantic type adapters;
terms are sorted graded-lex so equal objects give byte-identical files.
"""

import logging
from pathlib import Path
from typing import Any, Optional

from pydantic import TypeAdapter, ValidationError

import fdq.defaults as fd
import fdq.deform as fdf
import fdq.diffop as fdo
import fdq.hochschild as fh
import fdq.ring as fr
from fdq.config import Config
from fdq.errors import FdqError, SerializationError


logger = logging.getLogger(__name__)

PolyJson = list[tuple[int, int, list[int]]]
DiffOpJson = list[tuple[PolyJson, list[int], list[int]]]
CochainJson = list[tuple[list[list[int]], DiffOpJson]]
BaseCochainJson = list[tuple[list[list[int]], PolyJson]]

_poly_adapter = TypeAdapter(PolyJson)
_diffop_adapter = TypeAdapter(DiffOpJson)
_cochain_adapter = TypeAdapter(CochainJson)
_basecochain_adapter = TypeAdapter(BaseCochainJson)

SERIES_KINDS = {
    "star": (fdf.StarProduct, "basecochain"),
    "module": (fdf.ModuleDeformation, "cochain"),
    "equivalence": (fdf.Equivalence, "diffop"),
    "commutant": (fdf.CommutantElement, "diffop"),
    "vseries": (None, "diffop"),
}
KINDS = ("poly", "diffop", "cochain", "basecochain", *SERIES_KINDS, "config")


##################################################
# TERM LISTS
##################################################


def _poly_to_json(context: fr.VarContext, p: Any) -> PolyJson:
    if not fr.depends_only_on(p, context.xy_indices):
        raise SerializationError("Only polynomials in the x and y variables can be written")
    width = context.n + context.k
    return [
        (int(c.numerator), int(c.denominator), list(monom[:width]))
        for monom, c in sorted(p.iterterms(), key=lambda term: fr.grlex_key(term[0][:width]))
    ]


def _poly_from_json(context: fr.VarContext, data: PolyJson) -> Any:
    p = context.ring.zero
    for num, den, exps in data:
        if len(exps) != context.n + context.k:
            raise SerializationError(f"Exponent vector {exps} does not match {context}")
        if den == 0:
            raise SerializationError("Zero denominator")
        p = p + context.monomial(dict(zip(context.xy_indices, exps)), fr.to_rational(f"{num}/{den}"))
    return p


def _diffop_to_json(D: fdo.DiffOp) -> DiffOpJson:
    out = []
    for d, c in D.sorted_terms():
        alpha, gamma = D.split_key(d)
        out.append((_poly_to_json(D.context, c), list(alpha), list(gamma)))
    return out


def _diffop_from_json(context: fr.VarContext, data: DiffOpJson) -> fdo.DiffOp:
    terms: dict = {}
    for poly, alpha, gamma in data:
        if len(alpha) != context.n or len(gamma) != context.k:
            raise SerializationError(f"Derivative index {alpha}, {gamma} does not match {context}")
        key = tuple(alpha) + tuple(gamma)
        c = _poly_from_json(context, poly)
        terms[key] = terms[key] + c if key in terms else c
    return fdo.DiffOp.build(context, terms)


def _alphas_from_json(context: fr.VarContext, arity: int, data: list[list[int]]) -> tuple:
    if len(data) != arity or any(len(alpha) != context.n for alpha in data):
        raise SerializationError(f"Multi-indices {data} do not fit a {arity}-cochain on {context}")
    return tuple(tuple(alpha) for alpha in data)


def _cochain_to_json(phi: fh.Cochain) -> CochainJson:
    return [([list(alpha) for alpha in alphas], _diffop_to_json(op)) for alphas, op in phi.sorted_terms()]


def _cochain_from_json(context: fr.VarContext, arity: int, data: CochainJson) -> fh.Cochain:
    terms = {_alphas_from_json(context, arity, alphas): _diffop_from_json(context, op) for alphas, op in data}
    return fh.Cochain(context=context, arity=arity, terms=terms)


def _basecochain_to_json(C: fh.BaseCochain) -> BaseCochainJson:
    return [([list(alpha) for alpha in alphas], _poly_to_json(C.context, c)) for alphas, c in C.sorted_terms()]


def _basecochain_from_json(context: fr.VarContext, arity: int, data: BaseCochainJson) -> fh.BaseCochain:
    terms = {_alphas_from_json(context, arity, alphas): _poly_from_json(context, c) for alphas, c in data}
    return fh.BaseCochain(context=context, arity=arity, terms=terms)


def _dump_line(kind: str, obj: Any) -> str:
    match kind:
        case "poly":
            return _poly_adapter.dump_json(_poly_to_json(obj.context, obj.element)).decode()
        case "diffop":
            return _diffop_adapter.dump_json(_diffop_to_json(obj)).decode()
        case "cochain":
            return _cochain_adapter.dump_json(_cochain_to_json(obj)).decode()
        case "basecochain":
            return _basecochain_adapter.dump_json(_basecochain_to_json(obj)).decode()
    raise SerializationError(f"Unknown kind {kind!r}")


def _load_line(kind: str, context: fr.VarContext, arity: Optional[int], line: str) -> Any:
    match kind:
        case "poly":
            return fr.Poly.wrap(context, _poly_from_json(context, _poly_adapter.validate_json(line)))
        case "diffop":
            return _diffop_from_json(context, _diffop_adapter.validate_json(line))
        case "cochain":
            return _cochain_from_json(context, arity, _cochain_adapter.validate_json(line))
        case "basecochain":
            return _basecochain_from_json(context, arity, _basecochain_adapter.validate_json(line))
    raise SerializationError(f"Unknown kind {kind!r}")


##################################################
# FILES
##################################################


def kind_of(obj: Any) -> str:
    match obj:
        case Config():
            return "config"
        case fr.Poly():
            return "poly"
        case fdo.DiffOp():
            return "diffop"
        case fh.Cochain():
            return "cochain"
        case fh.BaseCochain():
            return "basecochain"
        case fdf.StarProduct():
            return "star"
        case fdf.ModuleDeformation():
            return "module"
        case fdf.Equivalence():
            return "equivalence"
        case fdf.CommutantElement():
            return "commutant"
        case fr.Series():
            return "vseries"
    raise SerializationError(f"Cannot write a {type(obj).__name__}")


def _arity_of(kind: str) -> Optional[int]:
    return {"star": 2, "module": 1}.get(kind)


def serialize(obj: Any) -> str:
    kind = kind_of(obj)
    lines = [fd.FORMAT_VERSION, f"kind {kind}"]
    if kind == "config":
        return "\n".join(lines + obj.to_lines()) + "\n"
    match obj:
        case fdf.StarProduct() | fdf.ModuleDeformation() | fdf.Equivalence() | fdf.CommutantElement():
            series = obj.series
        case fr.Series():
            series = obj
            if any(not isinstance(D, fdo.DiffOp) for D in series):
                raise SerializationError("Only series of operators are written as vseries")
        case _:
            series = None
    context = (series[0] if series is not None else obj).context
    lines.append(f"vars x:{context.n} y:{context.k}")
    if series is None:
        if kind in ("cochain", "basecochain"):
            lines.append(f"arity {obj.arity}")
        lines.append(_dump_line(kind, obj))
    else:
        element_kind = SERIES_KINDS[kind][1]
        lines.append(f"lambda {series.order}")
        lines += [f"order {r} {_dump_line(element_kind, coeff)}" for r, coeff in enumerate(series)]
    return "\n".join(lines) + "\n"


def _header_value(lines: list[str], position: int, key: str) -> str:
    if position >= len(lines):
        raise SerializationError(f"Missing {key!r} line")
    found, _, value = lines[position].partition(" ")
    if found != key:
        raise SerializationError(f"Expected {key!r} at line {position + 1}, got {lines[position]!r}")
    return value.strip()


def _read_context(value: str) -> fr.VarContext:
    try:
        x, y = value.split()
        if not x.startswith("x:") or not y.startswith("y:"):
            raise ValueError(value)
        return fr.VarContext(n=int(x[2:]), k=int(y[2:]))
    except ValueError as e:
        raise SerializationError(f"Malformed variable declaration {value!r}") from e


def deserialize(text: str, base: Optional[Path] = None) -> Any:
    """Parses a file body back into its object.

    Raises:
        SerializationError: version mismatch or malformed content.
    """
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines or lines[0].strip() != fd.FORMAT_VERSION:
        raise SerializationError(f"Expected format {fd.FORMAT_VERSION}, got {lines[0] if lines else 'an empty file'!r}")
    kind = _header_value(lines, 1, "kind")
    if kind not in KINDS:
        raise SerializationError(f"Unknown kind {kind!r}")
    if kind == "config":
        try:
            return Config.from_lines(lines[2:], base=base)
        except FdqError as e:
            raise SerializationError(str(e)) from e
    context = _read_context(_header_value(lines, 2, "vars"))
    try:
        if kind not in SERIES_KINDS:
            arity = None
            body = 3
            if kind in ("cochain", "basecochain"):
                arity = int(_header_value(lines, 3, "arity"))
                body = 4
            if len(lines) != body + 1:
                raise SerializationError(f"Expected a single body line for kind {kind}")
            return _load_line(kind, context, arity, lines[body])
        order = int(_header_value(lines, 3, "lambda"))
        model, element_kind = SERIES_KINDS[kind]
        coeffs = []
        for r, line in enumerate(lines[4:]):
            value = _header_value(lines, 4 + r, "order")
            index, _, payload = value.partition(" ")
            if int(index) != r:
                raise SerializationError(f"Expected order {r}, got {index}")
            coeffs.append(_load_line(element_kind, context, _arity_of(kind), payload))
        if len(coeffs) != order + 1:
            raise SerializationError(f"Expected {order + 1} coefficients, got {len(coeffs)}")
        series = fr.Series.of(coeffs, order)
        return series if model is None else model(series=series)
    except SerializationError:
        raise
    except (ValidationError, FdqError, ValueError) as e:
        raise SerializationError(f"Malformed {kind} body: {e}") from e


def dump(obj: Any, path: Path) -> None:
    path = Path(path)
    path.write_text(serialize(obj), encoding="utf-8")
    logger.info("Wrote %s to %s", kind_of(obj), path)


def load(path: Path, kind: Optional[str] = None) -> Any:
    """Reads a file, checking its kind when one is expected."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise SerializationError(f"Cannot read {path}: {e}") from e
    obj = deserialize(text, base=path.parent)
    if kind is not None and kind_of(obj) != kind:
        raise SerializationError(f"{path} holds a {kind_of(obj)}, expected a {kind}")
    return obj
