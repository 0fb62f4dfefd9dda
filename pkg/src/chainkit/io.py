"""Text formats: complex files, surface files and reports.

Complex file::

    # the circle with one vertex
    dim 1
    gen 0: v
    gen 1: e
    bnd e: +1*v -1*v
    rot v: +1*e

``gen k:`` declares labels in degree k, ``bnd a:`` gives the boundary of a
generator as a signed combination of degree k-1 labels, ``rot a:`` gives the
rotation operator J (degree +1).  An optional ``mod M`` line marks a complex
defined modulo M.  Lines starting with ``#`` are ignored.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from .complex import GradedFreeComplex, HomologyGroup, verify_complex
from .equivariant import CircleComplex, verify_circle_complex
from .expr import Expression, ExpressionError
from .matrix import IntegerMatrix
from .morse import MorseFunctionSpec, Surface


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line, self.column = line, column
        where = f"line {line}" + (f", column {column}" if column else "") + ": " if line else ""
        super().__init__(where + message)


class BoundaryCheckError(ValueError):
    """A syntactically valid file whose operators fail their identities."""


@dataclass
class ParsedComplex:
    complex: GradedFreeComplex
    circle: CircleComplex | None = None

    def as_circle(self) -> CircleComplex:
        return self.circle if self.circle is not None else CircleComplex(self.complex)


_TERM = re.compile(r"([+-]?)\s*(?:(\d+)\s*\*\s*)?([^\s*+]+)")
_LABEL = re.compile(r"^[A-Za-z_][A-Za-z0-9_.'-]*$")


def _terms(text: str, start_col: int, lineno: int) -> list[tuple[int, str, int]]:
    """Parse ``+2*a -b c`` into (coefficient, label, column) triples."""
    out = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _TERM.match(text, pos)
        if not m or not m.group(3):
            raise ParseError(f"cannot read term {text[pos:].split()[0]!r}", lineno, start_col + pos)
        sign = -1 if m.group(1) == "-" else 1
        coef = int(m.group(2)) if m.group(2) else 1
        out.append((sign * coef, m.group(3), start_col + m.start(3)))
        pos = m.end()
    return out


def parse_complex_text(text: str) -> ParsedComplex:
    top = None
    modulus = None
    gens: dict[int, list[str]] = {}
    degree_of: dict[str, int] = {}
    bnd: dict[str, list[tuple[int, str]]] = {}
    rot: dict[str, list[tuple[int, str]]] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        indent = len(line) - len(line.lstrip())
        body = line.strip()
        head, _, rest = body.partition(" ")
        if head == "dim":
            try:
                top = int(rest)
            except ValueError:
                raise ParseError(f"bad dimension {rest!r}", lineno, indent + 5) from None
            continue
        if head == "mod":
            try:
                modulus = int(rest)
            except ValueError:
                raise ParseError(f"bad modulus {rest!r}", lineno, indent + 5) from None
            if modulus < 2:
                raise ParseError("modulus must be at least 2", lineno, indent + 5)
            continue
        if head not in ("gen", "bnd", "rot"):
            raise ParseError(f"unknown directive {head!r}", lineno, indent + 1)
        key, colon, payload = rest.partition(":")
        if not colon:
            raise ParseError(f"missing ':' after {head}", lineno, indent + len(head) + 2)
        key = key.strip()
        payload_col = indent + len(head) + 1 + len(key) + 2 + 1
        if head == "gen":
            try:
                k = int(key)
            except ValueError:
                raise ParseError(f"bad degree {key!r}", lineno, indent + len(head) + 2) from None
            if top is not None and k > top:
                raise ParseError(f"degree {k} exceeds dim {top}", lineno, indent + len(head) + 2)
            gens.setdefault(k, [])
            for m in re.finditer(r"\S+", payload):
                label = m.group()
                if not _LABEL.match(label):
                    raise ParseError(f"invalid label {label!r}", lineno, payload_col + m.start())
                if label in degree_of:
                    raise ParseError(f"label {label!r} declared twice", lineno, payload_col + m.start())
                degree_of[label] = k
                gens.setdefault(k, []).append(label)
            continue
        if key not in degree_of:
            raise ParseError(f"unknown label {key!r}", lineno, indent + len(head) + 2)
        table, shift = (bnd, -1) if head == "bnd" else (rot, 1)
        if key in table:
            raise ParseError(f"second {head} line for {key!r}", lineno, indent + 1)
        entries = []
        for coef, label, col in _terms(payload, payload_col, lineno):
            if label not in degree_of:
                raise ParseError(f"unknown label {label!r}", lineno, col)
            if degree_of[label] != degree_of[key] + shift:
                raise ParseError(f"degree mismatch: {label!r} has degree {degree_of[label]}, "
                                 f"expected {degree_of[key] + shift}", lineno, col)
            entries.append((coef, label))
        table[key] = entries
    if not gens:
        raise ParseError("no generators declared")
    lo = min(gens)
    hi = max(gens) if top is None else max(top, max(gens))
    for k in range(lo, hi + 1):
        gens.setdefault(k, [])
    pos = {lbl: i for k in gens for i, lbl in enumerate(gens[k])}

    def matrices(table, shift):
        mats = {}
        for k in range(lo, hi + 1):
            tgt = k + shift
            if tgt not in gens:
                continue
            rows = [[0] * len(gens[k]) for _ in gens[tgt]]
            for j, lbl in enumerate(gens[k]):
                for coef, other in table.get(lbl, ()):
                    rows[pos[other]][j] += coef
            mats[k] = IntegerMatrix.from_rows(rows, len(gens[k]))
        return mats

    cx = GradedFreeComplex(gens, matrices(bnd, -1), modulus=modulus)
    bad = verify_complex(cx)
    if bad:
        raise BoundaryCheckError(f"boundary squares to a nonzero map in degree(s) {bad}")
    circle = None
    if rot:
        circle = CircleComplex(cx, matrices(rot, 1))
        problems = verify_circle_complex(circle)
        if problems:
            raise BoundaryCheckError("; ".join(problems))
    return ParsedComplex(cx, circle)


def parse_complex(path) -> ParsedComplex:
    return parse_complex_text(Path(path).read_text())


def _combination(column: list[int], labels) -> str:
    return " ".join(f"{c:+d}*{labels[i]}" for i, c in enumerate(column) if c)


def emit_complex(x: GradedFreeComplex | ParsedComplex, circle: CircleComplex | None = None) -> str:
    if isinstance(x, ParsedComplex):
        x, circle = x.complex, x.circle
    lines = [f"dim {x.hi}"]
    if x.modulus is not None:
        lines.append(f"mod {x.modulus}")
    for k in x.degrees:
        lines.append(f"gen {k}:" + "".join(f" {lbl}" for lbl in x.labels(k)))
    for k in x.degrees:
        if k - 1 < x.lo:
            continue
        mat = x.boundary(k)
        for j, lbl in enumerate(x.labels(k)):
            terms = _combination(mat.column(j), x.labels(k - 1))
            if terms:
                lines.append(f"bnd {lbl}: {terms}")
    if circle is not None:
        for k in x.degrees:
            if k + 1 > x.hi:
                continue
            mat = circle.J(k)
            for j, lbl in enumerate(x.labels(k)):
                terms = _combination(mat.column(j), x.labels(k + 1))
                if terms:
                    lines.append(f"rot {lbl}: {terms}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Surfaces


def parse_surface_text(text: str, name: str = "custom") -> tuple[Surface, MorseFunctionSpec]:
    fields: dict[str, tuple[str, int]] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        if head not in ("constraint", "function", "box"):
            raise ParseError(f"unknown directive {head!r}", lineno, 1)
        if head in fields:
            raise ParseError(f"duplicate {head} line", lineno, 1)
        fields[head] = (rest.strip(), lineno)
    for req in ("constraint", "function", "box"):
        if req not in fields:
            raise ParseError(f"missing {req} line")
    exprs = {}
    for key in ("constraint", "function"):
        text_, lineno = fields[key]
        try:
            exprs[key] = Expression.parse(text_)
        except ExpressionError as exc:
            raise ParseError(str(exc), lineno, len(key) + 2) from None
    box_text, lineno = fields["box"]
    try:
        box = tuple(float(v) for v in box_text.split())
    except ValueError:
        raise ParseError(f"bad box {box_text!r}", lineno, 5) from None
    if len(box) != 6 or any(box[2 * i] >= box[2 * i + 1] for i in range(3)):
        raise ParseError("box needs six numbers x0 x1 y0 y1 z0 z1 with x0 < x1 etc.", lineno, 5)
    return Surface(name, exprs["constraint"], box), MorseFunctionSpec(exprs["function"])


def parse_surface(path) -> tuple[Surface, MorseFunctionSpec]:
    p = Path(path)
    return parse_surface_text(p.read_text(), name=p.stem)


# ---------------------------------------------------------------------------
# Reports


@dataclass
class HomologyRow:
    degree: int
    betti: int
    torsion: tuple[int, ...] = ()
    group: str = ""

    @classmethod
    def of(cls, h: HomologyGroup) -> "HomologyRow":
        return cls(h.degree, h.betti, tuple(h.torsion), str(h))


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class Report:
    command: str
    meta: dict[str, str] = field(default_factory=dict)
    rows: list[HomologyRow] = field(default_factory=list)
    checks: list[Check] = field(default_factory=list)
    diagnostics: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add_homology(self, groups) -> None:
        self.rows.extend(HomologyRow.of(h) for h in groups)

    def check(self, name: str, passed: bool, detail: str = "") -> None:
        self.checks.append(Check(name, bool(passed), detail))

    def to_text(self) -> str:
        out = [f"{self.command}"]
        for k, v in self.meta.items():
            out.append(f"  {k}: {v}")
        if self.rows:
            width = max(len(r.group) for r in self.rows)
            out.append("")
            width = max(width, len("group"))
            out.append(f"  {'deg':>4}  {'group':<{width}}  {'betti':>5}  torsion")
            for r in self.rows:
                tors = " ".join(map(str, r.torsion)) or "-"
                out.append(f"  {r.degree:>4}  {r.group:<{width}}  {r.betti:>5}  {tors}")
        if self.checks:
            out.append("")
            width = max(len(c.name) for c in self.checks)
            for c in self.checks:
                verdict = "PASS" if c.passed else "FAIL"
                out.append(f"  {verdict}  {c.name:<{width}}  {c.detail}".rstrip())
        if self.diagnostics:
            out.append("")
            out.extend(f"  note: {d}" for d in self.diagnostics)
        return "\n".join(out) + "\n"

    def to_machine(self) -> str:
        lines = ["--- machine ---", f"command = {_esc(self.command)}"]
        lines += [f"meta.{_esc(k)} = {_esc(v)}" for k, v in self.meta.items()]
        for i, r in enumerate(self.rows):
            tors = ",".join(map(str, r.torsion))
            lines.append(f"row.{i} = {r.degree};{r.betti};{tors};{_esc(r.group)}")
        for i, c in enumerate(self.checks):
            lines.append(f"check.{i} = {'pass' if c.passed else 'fail'};{_esc(c.name)};{_esc(c.detail)}")
        lines += [f"diagnostic.{i} = {_esc(d)}" for i, d in enumerate(self.diagnostics)]
        lines.append("--- end ---")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_machine(cls, text: str) -> "Report":
        body = text.split("--- machine ---", 1)[1].split("--- end ---", 1)[0]
        rep = cls("")
        for line in body.split("\n"):
            if not line:
                continue
            key, _, value = line.partition(" = ")
            if key == "command":
                rep.command = _unesc(value)
            elif key.startswith("meta."):
                rep.meta[_unesc(key[5:])] = _unesc(value)
            elif key.startswith("row."):
                deg, betti, tors, group = value.split(";", 3)
                rep.rows.append(HomologyRow(int(deg), int(betti),
                                            tuple(int(t) for t in tors.split(",") if t), _unesc(group)))
            elif key.startswith("check."):
                verdict, name, detail = value.split(";", 2)
                rep.checks.append(Check(_unesc(name), verdict == "pass", _unesc(detail)))
            elif key.startswith("diagnostic."):
                rep.diagnostics.append(_unesc(value))
        return rep


def _esc(s: str) -> str:
    return (s.replace("\\", "\\\\").replace("\n", "\\n").replace("\r", "\\r")
            .replace(";", "\\s").replace("=", "\\e"))


def _unesc(s: str) -> str:
    out, i = [], 0
    table = {"n": "\n", "r": "\r", "s": ";", "e": "=", "\\": "\\"}
    while i < len(s):
        if s[i] == "\\" and i + 1 < len(s):
            out.append(table.get(s[i + 1], s[i + 1]))
            i += 2
        else:
            out.append(s[i])
            i += 1
    return "".join(out)


__all__ = [
    "BoundaryCheckError", "Check", "HomologyRow", "ParseError", "ParsedComplex", "Report",
    "emit_complex", "parse_complex", "parse_complex_text", "parse_surface", "parse_surface_text",
]
