"""Reading and writing layout spec files.

Format (UTF-8, line oriented, '#' starts a comment):

    vars <n>
    name <i> <label>                                    (optional)
    c <H|S:<penalty>> x<i>*<coeff> [x<j>*<coeff> ...] <EQ|LE|GE> <rhs>
"""

import logging
import math
import re
from pathlib import Path
from typing import Dict, List, Union

from pydantic import ValidationError

from app.core.errors import ParseError
from app.core.schemas import Constraint, LayoutSpec, Relation

logger = logging.getLogger(__name__)

_TERM_RE = re.compile(r"^x(\d+)\*(\S+)$")


def format_number(value: float) -> str:
    """Shortest text that parses back to exactly `value`."""
    value = float(value)
    if value.is_integer() and abs(value) < 1e15:
        return str(int(value))
    return repr(value)


def _parse_float(token: str, line_no: int, what: str) -> float:
    try:
        value = float(token)
    except ValueError:
        raise ParseError(f"invalid {what} {token!r}", line_no) from None
    if not math.isfinite(value):
        raise ParseError(f"non-finite {what} {token!r}", line_no)
    return value


def _parse_int(token: str, line_no: int, what: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise ParseError(f"invalid {what} {token!r}", line_no) from None


def _parse_constraint(tokens: List[str], var_count: int, line_no: int) -> Constraint:
    if len(tokens) < 5:
        raise ParseError("constraint line needs priority, terms, relation and rhs", line_no)

    priority = tokens[1]
    if priority == "H":
        penalty = None
    elif priority.startswith("S:"):
        penalty = _parse_float(priority[2:], line_no, "penalty")
        if penalty <= 0:
            raise ParseError(f"soft penalty must be positive, got {priority[2:]}", line_no)
    else:
        raise ParseError(f"unknown priority {priority!r} (expected H or S:<penalty>)", line_no)

    try:
        relation = Relation(tokens[-2])
    except ValueError:
        raise ParseError(f"unknown relation {tokens[-2]!r}", line_no) from None
    rhs = _parse_float(tokens[-1], line_no, "rhs")

    terms = []
    seen = set()
    for token in tokens[2:-2]:
        match = _TERM_RE.match(token)
        if not match:
            raise ParseError(f"malformed term {token!r} (expected x<index>*<coeff>)", line_no)
        idx = int(match.group(1))
        if idx >= var_count:
            raise ParseError(f"variable index {idx} out of range for {var_count} variables", line_no)
        if idx in seen:
            raise ParseError(f"duplicate variable x{idx}", line_no)
        seen.add(idx)
        terms.append((idx, _parse_float(match.group(2), line_no, "coefficient")))

    try:
        return Constraint(terms=tuple(terms), relation=relation, rhs=rhs, penalty=penalty)
    except ValidationError as e:
        raise ParseError(str(e), line_no) from None


def parse_spec(text: str) -> LayoutSpec:
    """
    Parse spec file text into a LayoutSpec.

    Raises:
        ParseError: malformed line, unknown relation, index out of range,
            nonpositive penalty, or a spec that fails validation
    """
    var_count = None
    names: Dict[int, str] = {}
    constraints: List[Constraint] = []

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        head = tokens[0]

        if var_count is None:
            if head != "vars" or len(tokens) != 2:
                raise ParseError("expected 'vars <n>' before anything else", line_no)
            var_count = _parse_int(tokens[1], line_no, "variable count")
            if var_count < 1:
                raise ParseError(f"variable count must be positive, got {var_count}", line_no)
        elif head == "vars":
            raise ParseError("duplicate 'vars' line", line_no)
        elif head == "name":
            if len(tokens) != 3:
                raise ParseError("expected 'name <index> <label>'", line_no)
            idx = _parse_int(tokens[1], line_no, "variable index")
            if not 0 <= idx < var_count:
                raise ParseError(f"variable index {idx} out of range for {var_count} variables", line_no)
            names[idx] = tokens[2]
        elif head == "c":
            constraints.append(_parse_constraint(tokens, var_count, line_no))
        else:
            raise ParseError(f"unknown directive {head!r}", line_no)

    if var_count is None:
        raise ParseError("missing 'vars' line")
    if not constraints:
        raise ParseError("spec has no constraints")

    var_names = tuple(names.get(i, f"x{i}") for i in range(var_count))
    try:
        return LayoutSpec(var_count=var_count, var_names=var_names, constraints=tuple(constraints))
    except ValidationError as e:
        raise ParseError(str(e)) from None


def serialize_spec(spec: LayoutSpec) -> str:
    """Render a spec in the file format; names equal to the default `x<i>` are omitted."""
    lines = [f"vars {spec.var_count}"]
    for i, name in enumerate(spec.var_names):
        if name != f"x{i}":
            lines.append(f"name {i} {name}")
    for constraint in spec.constraints:
        priority = "H" if constraint.is_hard else f"S:{format_number(constraint.penalty)}"
        terms = " ".join(f"x{idx}*{format_number(coeff)}" for idx, coeff in constraint.terms)
        lines.append(
            f"c {priority} {terms} {constraint.relation.value} {format_number(constraint.rhs)}"
        )
    return "\n".join(lines) + "\n"


def read_spec(path: Union[str, Path]) -> LayoutSpec:
    path = Path(path)
    return parse_spec(path.read_text(encoding="utf-8"))


def write_spec(path: Union[str, Path], spec: LayoutSpec) -> Path:
    path = Path(path)
    path.write_text(serialize_spec(spec), encoding="utf-8")
    logger.debug(f"Wrote spec with {len(spec.constraints)} constraints to {path}")
    return path
