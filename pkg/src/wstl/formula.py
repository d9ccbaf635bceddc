"""Formula syntax trees for STL / weighted STL, with parsing and normalization.

A formula is an immutable tree of :class:`FormulaNode`. Weights are not stored
on the tree; they live in a :class:`ParameterTable` keyed by the position of
the owning node (its *path*, the tuple of child indices from the root), the
role of the weighted operand and, for temporal operators, the time offset.

Concrete syntax::

    x >= 0                      affine predicates (>=, <=, >, <, =)
    2*x - 0.5*y + 1 <= 3
    (x, y) in [7,9]x[1,3]       box membership
    !phi   phi & psi   phi | psi   phi -> psi
    F[a,b] phi   G[a,b] phi   phi U[a,b] psi   phi R[a,b] psi
    true   false

Omitting ``[a,b]`` on a temporal operator means "until the end of the signal".
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass, field
from typing import Iterator, Mapping


class Kind(enum.Enum):
    TRUE = "true"
    FALSE = "false"
    PRED = "pred"
    IN = "in"
    NOT = "not"
    AND = "and"
    OR = "or"
    IMPLIES = "implies"
    UNTIL = "until"
    RELEASE = "release"
    ALWAYS = "always"
    EVENTUALLY = "eventually"


TEMPORAL = frozenset({Kind.ALWAYS, Kind.EVENTUALLY, Kind.UNTIL, Kind.RELEASE})
BINARY = frozenset({Kind.AND, Kind.OR, Kind.IMPLIES, Kind.UNTIL, Kind.RELEASE})
UNARY = frozenset({Kind.NOT, Kind.ALWAYS, Kind.EVENTUALLY})
ATOMIC = frozenset({Kind.TRUE, Kind.FALSE, Kind.PRED, Kind.IN})


class FormulaSyntaxError(ValueError):
    """Raised for malformed formula text; carries the character offset."""

    def __init__(self, message: str, position: int, text: str = ""):
        self.position = position
        self.text = text
        super().__init__(f"{message} at position {position}")


@dataclass(frozen=True)
class Affine:
    """``sum(coef * channel) + constant`` with terms kept in source order."""

    terms: tuple[tuple[str, float], ...] = ()
    constant: float = 0.0

    def __post_init__(self):
        names = [name for name, _ in self.terms]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate channel in affine expression: {names}")

    @property
    def channels(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.terms)

    def negate(self) -> Affine:
        return Affine(tuple((n, -c) for n, c in self.terms), -self.constant)

    def __add__(self, other: Affine) -> Affine:
        coefs = dict(self.terms)
        for name, c in other.terms:
            coefs[name] = coefs.get(name, 0.0) + c
        return Affine(tuple(coefs.items()), self.constant + other.constant)

    def __sub__(self, other: Affine) -> Affine:
        return self + other.negate()

    def scale(self, k: float) -> Affine:
        return Affine(tuple((n, k * c) for n, c in self.terms), k * self.constant)

    def evaluate(self, sample: Mapping[str, float]) -> float:
        value = 0.0
        for name, c in self.terms:
            value += c * sample[name]
        return value + self.constant


@dataclass(frozen=True)
class Predicate:
    """Comparison ``expr <op> 0``; after normalization only ``>=`` remains."""

    expr: Affine
    op: str = ">="

    def __post_init__(self):
        if self.op not in (">=", "<=", "="):
            raise ValueError(f"unsupported comparison {self.op!r}")

    @property
    def channels(self) -> tuple[str, ...]:
        return self.expr.channels


@dataclass(frozen=True)
class Box:
    """``(ch1, ..., chk) in [lo1, hi1] x ... x [lok, hik]``."""

    channels: tuple[str, ...]
    bounds: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if len(self.channels) != len(self.bounds) or not self.channels:
            raise ValueError("box needs one interval per channel")
        for lo, hi in self.bounds:
            if lo > hi:
                raise ValueError(f"empty box side [{lo}, {hi}]")


@dataclass(frozen=True)
class FormulaNode:
    kind: Kind
    children: tuple[FormulaNode, ...] = ()
    interval: tuple[int, int | None] | None = None
    pred: Predicate | None = None
    box: Box | None = None

    def __post_init__(self):
        arity = {k: 2 for k in BINARY} | {k: 1 for k in UNARY} | {k: 0 for k in ATOMIC}
        if len(self.children) != arity[self.kind]:
            raise ValueError(f"{self.kind.value} takes {arity[self.kind]} operand(s)")
        if self.kind in TEMPORAL:
            a, b = self.interval if self.interval is not None else (0, None)
            if a < 0 or (b is not None and (b < 0 or a > b)):
                raise ValueError(f"invalid interval [{a}, {b}]")
            object.__setattr__(self, "interval", (a, b))
        elif self.interval is not None:
            raise ValueError(f"{self.kind.value} takes no interval")
        if (self.kind is Kind.PRED) != (self.pred is not None):
            raise ValueError("predicate payload mismatch")
        if (self.kind is Kind.IN) != (self.box is not None):
            raise ValueError("box payload mismatch")

    def __str__(self) -> str:
        return to_string(self)

    @property
    def bounded(self) -> bool:
        return self.interval is None or self.interval[1] is not None

    def walk(self, path: tuple[int, ...] = ()) -> Iterator[tuple[tuple[int, ...], FormulaNode]]:
        """Pre-order traversal yielding ``(path, node)``."""
        yield path, self
        for i, child in enumerate(self.children):
            yield from child.walk(path + (i,))

    def at(self, path: tuple[int, ...]) -> FormulaNode:
        node = self
        for i in path:
            node = node.children[i]
        return node

    def depth(self) -> int:
        if not self.children:
            return 0
        return 1 + max(c.depth() for c in self.children)

    def channels(self) -> set[str]:
        out: set[str] = set()
        for _, node in self.walk():
            if node.pred is not None:
                out.update(node.pred.channels)
            if node.box is not None:
                out.update(node.box.channels)
        return out


# -- constructors -----------------------------------------------------------

TRUE = FormulaNode(Kind.TRUE)
FALSE = FormulaNode(Kind.FALSE)


def pred(terms: Mapping[str, float] | str, constant: float = 0.0, op: str = ">=") -> FormulaNode:
    """Shorthand: ``pred("x", -3)`` is ``x - 3 >= 0``."""
    if isinstance(terms, str):
        terms = {terms: 1.0}
    expr = Affine(tuple((n, float(c)) for n, c in terms.items()), float(constant))
    return FormulaNode(Kind.PRED, pred=Predicate(expr, op))


def And(a: FormulaNode, b: FormulaNode) -> FormulaNode:
    return FormulaNode(Kind.AND, (a, b))


def Or(a: FormulaNode, b: FormulaNode) -> FormulaNode:
    return FormulaNode(Kind.OR, (a, b))


def Not(a: FormulaNode) -> FormulaNode:
    return FormulaNode(Kind.NOT, (a,))


def Implies(a: FormulaNode, b: FormulaNode) -> FormulaNode:
    return FormulaNode(Kind.IMPLIES, (a, b))


def Always(a: FormulaNode, interval=None) -> FormulaNode:
    return FormulaNode(Kind.ALWAYS, (a,), interval)


def Eventually(a: FormulaNode, interval=None) -> FormulaNode:
    return FormulaNode(Kind.EVENTUALLY, (a,), interval)


def Until(a: FormulaNode, b: FormulaNode, interval=None) -> FormulaNode:
    return FormulaNode(Kind.UNTIL, (a, b), interval)


def Release(a: FormulaNode, b: FormulaNode, interval=None) -> FormulaNode:
    return FormulaNode(Kind.RELEASE, (a, b), interval)


# -- tokenizer / parser -----------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>->|>=|<=|==|[><=!&|()\[\],+\-*/×∧∨¬])
    """,
    re.VERBOSE,
)

_KEYWORDS = {"F", "G", "U", "R", "true", "false", "in"}
_ALIASES = {"∧": "&", "∨": "|", "¬": "!", "==": "="}


@dataclass
class _Tok:
    kind: str
    text: str
    pos: int


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        if kind != "ws":
            tok = m.group()
            if kind == "ident" and tok in _KEYWORDS:
                kind = "kw"
            toks.append(_Tok(kind, _ALIASES.get(tok, tok), pos))
        pos = m.end()
    toks.append(_Tok("eof", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    # token helpers
    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def error(self, message: str, tok: _Tok | None = None) -> FormulaSyntaxError:
        tok = tok or self.tok
        return FormulaSyntaxError(message, tok.pos, self.text)

    def accept(self, text: str) -> bool:
        if self.tok.text == text and self.tok.kind in ("op", "kw", "ident"):
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> _Tok:
        tok = self.tok
        if not self.accept(text):
            found = tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        return tok

    # grammar
    def parse(self) -> FormulaNode:
        node = self.implication()
        if self.tok.kind != "eof":
            raise self.error(f"unexpected {self.tok.text!r}")
        return node

    def implication(self) -> FormulaNode:
        left = self.disjunction()
        if self.accept("->"):
            return Implies(left, self.implication())
        return left

    def disjunction(self) -> FormulaNode:
        node = self.conjunction()
        while self.accept("|"):
            node = Or(node, self.conjunction())
        return node

    def conjunction(self) -> FormulaNode:
        node = self.binary_temporal()
        while self.accept("&"):
            node = And(node, self.binary_temporal())
        return node

    def binary_temporal(self) -> FormulaNode:
        node = self.unary()
        while self.tok.text in ("U", "R") and self.tok.kind == "kw":
            kind = Kind.UNTIL if self.tok.text == "U" else Kind.RELEASE
            self.i += 1
            interval = self.interval()
            node = FormulaNode(kind, (node, self.unary()), interval)
        return node

    def unary(self) -> FormulaNode:
        if self.accept("!"):
            return Not(self.unary())
        if self.tok.kind == "kw" and self.tok.text in ("F", "G"):
            kind = Kind.EVENTUALLY if self.tok.text == "F" else Kind.ALWAYS
            self.i += 1
            interval = self.interval()
            return FormulaNode(kind, (self.unary(),), interval)
        return self.atom()

    def interval(self) -> tuple[int, int] | None:
        if self.tok.text != "[":
            return None
        start = self.tok
        self.i += 1
        a = self.interval_bound()
        self.expect(",")
        b = self.interval_bound()
        self.expect("]")
        if a > b:
            raise FormulaSyntaxError(f"reversed interval [{a},{b}]", start.pos, self.text)
        return (a, b)

    def interval_bound(self) -> int:
        tok = self.tok
        if tok.text == "-":
            raise self.error("negative interval bound")
        if tok.kind != "num" or not tok.text.isdigit():
            raise self.error(f"interval bounds must be nonnegative integers, found {tok.text!r}")
        self.i += 1
        return int(tok.text)

    def atom(self) -> FormulaNode:
        tok = self.tok
        if self.accept("true"):
            return TRUE
        if self.accept("false"):
            return FALSE
        if tok.text == "(":
            box = self.try_box()
            if box is not None:
                return box
            saved = self.i
            try:
                return self.predicate()
            except FormulaSyntaxError:
                self.i = saved
            self.i += 1
            node = self.implication()
            self.expect(")")
            return node
        if tok.kind == "ident" and self.toks[self.i + 1].text == "in":
            return self.try_box()
        if tok.kind in ("ident", "num") or tok.text == "-":
            return self.predicate()
        raise self.error(f"unexpected {tok.text or 'end of input'!r}")

    def try_box(self) -> FormulaNode | None:
        saved = self.i
        channels = []
        if self.accept("("):
            while self.tok.kind == "ident":
                channels.append(self.tok.text)
                self.i += 1
                if not self.accept(","):
                    break
            if not channels or not self.accept(")") or self.tok.text != "in":
                self.i = saved
                return None
        else:
            channels.append(self.tok.text)
            self.i += 1
        self.expect("in")
        bounds = [self.box_side()]
        while self.tok.text in ("x", "×"):
            self.i += 1
            bounds.append(self.box_side())
        if len(bounds) != len(channels):
            raise self.error(f"box over {len(channels)} channel(s) needs {len(channels)} interval(s)")
        try:
            box = Box(tuple(channels), tuple(bounds))
        except ValueError as exc:
            raise self.error(str(exc)) from None
        return FormulaNode(Kind.IN, box=box)

    def box_side(self) -> tuple[float, float]:
        self.expect("[")
        lo = self.signed_number()
        self.expect(",")
        hi = self.signed_number()
        self.expect("]")
        return (lo, hi)

    def signed_number(self) -> float:
        sign = -1.0 if self.accept("-") else 1.0
        tok = self.tok
        if tok.kind != "num":
            raise self.error("expected a number")
        self.i += 1
        return sign * float(tok.text)

    def predicate(self) -> FormulaNode:
        lhs = self.arith()
        tok = self.tok
        if tok.text not in (">=", "<=", ">", "<", "="):
            raise self.error(f"expected a comparison, found {tok.text or 'end of input'!r}")
        self.i += 1
        rhs = self.arith()
        op = {">": ">=", "<": "<="}.get(tok.text, tok.text)
        return FormulaNode(Kind.PRED, pred=Predicate(lhs - rhs, op))

    def arith(self) -> Affine:
        node = self.term()
        while self.tok.text in ("+", "-"):
            neg = self.tok.text == "-"
            self.i += 1
            rhs = self.term()
            node = node - rhs if neg else node + rhs
        return node

    def term(self) -> Affine:
        node = self.factor()
        while self.tok.text in ("*", "/"):
            tok = self.tok
            self.i += 1
            rhs = self.factor()
            if tok.text == "/":
                if rhs.terms or rhs.constant == 0:
                    raise self.error("division only by a nonzero constant", tok)
                node = node.scale(1.0 / rhs.constant)
            elif not rhs.terms:
                node = node.scale(rhs.constant)
            elif not node.terms:
                node = rhs.scale(node.constant)
            else:
                raise self.error("nonlinear predicate", tok)
        return node

    def factor(self) -> Affine:
        tok = self.tok
        if self.accept("-"):
            return self.factor().negate()
        if self.accept("+"):
            return self.factor()
        if tok.kind == "num":
            self.i += 1
            return Affine((), float(tok.text))
        if tok.kind == "ident":
            self.i += 1
            return Affine(((tok.text, 1.0),), 0.0)
        if self.accept("("):
            node = self.arith()
            self.expect(")")
            return node
        raise self.error(f"expected a term, found {tok.text or 'end of input'!r}")


def parse(text: str) -> FormulaNode:
    """Parse formula text into a syntax tree.

    Sugar (implication, box membership, equality) is kept as written;
    :func:`to_pnf` expands it.

    Raises:
        FormulaSyntaxError: malformed text, with the offending position.
    """
    return _Parser(text).parse()


# -- printing ---------------------------------------------------------------

def _num(x: float) -> str:
    if x == 0:
        return "0"
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(float(x))


def _affine_lhs(expr: Affine) -> str:
    parts = []
    for name, c in expr.terms:
        mag = abs(c)
        body = name if mag == 1 else f"{_num(mag)}*{name}"
        if not parts:
            parts.append(body if c >= 0 else f"-{body}")
        else:
            parts.append(f"{'+' if c >= 0 else '-'} {body}")
    return " ".join(parts) if parts else "0"


def _interval(iv: tuple[int, int | None]) -> str:
    a, b = iv
    return "" if b is None and a == 0 else f"[{a},{b}]"


def to_string(f: FormulaNode) -> str:
    """Render ``f`` in the concrete syntax accepted by :func:`parse`."""
    k = f.kind
    if k is Kind.TRUE:
        return "true"
    if k is Kind.FALSE:
        return "false"
    if k is Kind.PRED:
        p = f.pred
        return f"{_affine_lhs(p.expr)} {p.op} {_num(-p.expr.constant)}"
    if k is Kind.IN:
        chans = ", ".join(f.box.channels)
        sides = "x".join(f"[{_num(lo)},{_num(hi)}]" for lo, hi in f.box.bounds)
        return f"({chans}) in {sides}"

    def operand(child: FormulaNode) -> str:
        text = to_string(child)
        return text if child.kind in ATOMIC or child.kind in UNARY else f"({text})"

    if k is Kind.NOT:
        return f"!{operand(f.children[0])}"
    if k in (Kind.ALWAYS, Kind.EVENTUALLY):
        op = "G" if k is Kind.ALWAYS else "F"
        return f"{op}{_interval(f.interval)} {operand(f.children[0])}"
    sym = {Kind.AND: "&", Kind.OR: "|", Kind.IMPLIES: "->"}.get(k)
    if sym is None:
        sym = ("U" if k is Kind.UNTIL else "R") + _interval(f.interval)
    left, right = f.children
    return f"{operand(left)} {sym} {operand(right)}"


# -- normalization ----------------------------------------------------------

def _expand_box(box: Box) -> FormulaNode:
    preds = []
    for ch, (lo, hi) in zip(box.channels, box.bounds):
        preds.append(pred({ch: 1.0}, -lo))
        preds.append(pred({ch: -1.0}, hi))
    # balanced nesting: ((x >= lo & x <= hi) & (y >= lo & y <= hi))
    while len(preds) > 1:
        paired = [And(preds[i], preds[i + 1]) for i in range(0, len(preds) - 1, 2)]
        if len(preds) % 2:
            paired.append(preds[-1])
        preds = paired
    return preds[0]


def to_pnf(f: FormulaNode, negate: bool = False) -> FormulaNode:
    """Positive normal form with negations folded into predicates.

    The result contains only TRUE, FALSE, PRED (all ``>=``), AND, OR, ALWAYS,
    EVENTUALLY, UNTIL and RELEASE. Operand order is preserved, so weights
    attach to the same operands as in the input. Robustness (weighted or not)
    is unchanged.
    """
    k = f.kind
    if k is Kind.TRUE:
        return FALSE if negate else TRUE
    if k is Kind.FALSE:
        return TRUE if negate else FALSE
    if k is Kind.PRED:
        p = f.pred
        if p.op == "=":
            split = And(pred_node(p.expr), pred_node(p.expr.negate()))
            return to_pnf(split, negate)
        expr = p.expr if p.op == ">=" else p.expr.negate()
        return pred_node(expr.negate() if negate else expr)
    if k is Kind.IN:
        return to_pnf(_expand_box(f.box), negate)
    if k is Kind.NOT:
        return to_pnf(f.children[0], not negate)
    if k is Kind.IMPLIES:
        a, b = f.children
        return to_pnf(Or(Not(a), b), negate)
    flip = {
        Kind.AND: Kind.OR, Kind.OR: Kind.AND,
        Kind.ALWAYS: Kind.EVENTUALLY, Kind.EVENTUALLY: Kind.ALWAYS,
        Kind.UNTIL: Kind.RELEASE, Kind.RELEASE: Kind.UNTIL,
    }
    kind = flip[k] if negate else k
    children = tuple(to_pnf(c, negate) for c in f.children)
    return FormulaNode(kind, children, f.interval)


def pred_node(expr: Affine) -> FormulaNode:
    return FormulaNode(Kind.PRED, pred=Predicate(expr, ">="))


PNF_KINDS = frozenset({
    Kind.TRUE, Kind.FALSE, Kind.PRED, Kind.AND, Kind.OR,
    Kind.ALWAYS, Kind.EVENTUALLY, Kind.UNTIL, Kind.RELEASE,
})


def is_pnf(f: FormulaNode) -> bool:
    return all(
        n.kind in PNF_KINDS and (n.pred is None or n.pred.op == ">=")
        for _, n in f.walk()
    )


def horizon(f: FormulaNode) -> int:
    """Samples needed to evaluate ``f`` at time 0.

    A temporal operator without an upper bound needs only its lower bound; at
    evaluation time its window stretches to whatever the signal provides.
    """
    k = f.kind
    if k in ATOMIC:
        return 1
    hs = [horizon(c) for c in f.children]
    if k in TEMPORAL:
        a, b = f.interval
        return (a if b is None else b) + max(hs)
    return max(hs)


def shrink_intervals(f: FormulaNode, k: int) -> FormulaNode:
    """Clip every bounded interval endpoint to ``k - 1``."""
    interval = f.interval
    if f.kind in TEMPORAL and f.interval[1] is not None:
        a, b = f.interval
        interval = (min(a, k - 1), min(b, k - 1))
    children = tuple(shrink_intervals(c, k) for c in f.children)
    return FormulaNode(f.kind, children, interval, f.pred, f.box)


# -- parameters -------------------------------------------------------------

ParamId = str

ROLE_LEFT = "conjunct-1"
ROLE_RIGHT = "conjunct-2"
ROLE_OFFSET = "offset"
ROLE_UNTIL_LEFT = "until-left"
ROLE_UNTIL_RIGHT = "until-right"


@dataclass(frozen=True)
class ParamEntry:
    path: tuple[int, ...]
    kind: Kind
    role: str
    offset: int | None = None

    def describe(self) -> str:
        where = "/".join(map(str, self.path)) or "root"
        off = "" if self.offset is None else f"@{self.offset}"
        return f"{self.kind.value}[{where}].{self.role}{off}"


@dataclass
class ParameterTable:
    """Weight parameters of a PNF formula, in deterministic order."""

    entries: dict[ParamId, ParamEntry] = field(default_factory=dict)
    length: int | None = None

    def __post_init__(self):
        self._index = {(e.path, e.role, e.offset): pid for pid, e in self.entries.items()}
        self._offsets: dict[tuple, list[int]] = {}
        for e in self.entries.values():
            if e.offset is not None:
                self._offsets.setdefault((e.path, e.role), []).append(e.offset)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __contains__(self, pid) -> bool:
        return pid in self.entries

    @property
    def ids(self) -> list[ParamId]:
        return list(self.entries)

    def lookup(self, path, role, offset=None, clamp=False) -> ParamId:
        """ParamId for an operand; ``clamp`` snaps offsets to the nearest existing one."""
        key = (tuple(path), role, offset)
        if key in self._index:
            return self._index[key]
        if clamp and offset is not None:
            offsets = self._offsets.get((tuple(path), role))
            if offsets:
                nearest = min(offsets, key=lambda o: (abs(o - offset), o))
                return self._index[(tuple(path), role, nearest)]
        raise KeyError(f"no parameter for {role} offset {offset} at node {path}")


def collect_parameters(f: FormulaNode, length: int | None = None) -> ParameterTable:
    """One weight per conjunct and per temporal offset (two per Until offset).

    Args:
        f: formula in PNF.
        length: longest signal the table must serve; required when some
            temporal operator has no upper bound.
    """
    if not is_pnf(f):
        raise ValueError("collect_parameters needs a formula in positive normal form")
    entries: dict[ParamId, ParamEntry] = {}

    def add(path, kind, role, offset=None):
        entries[f"w{len(entries)}"] = ParamEntry(path, kind, role, offset)

    for path, node in f.walk():
        k = node.kind
        if k in (Kind.AND, Kind.OR):
            add(path, k, ROLE_LEFT)
            add(path, k, ROLE_RIGHT)
        elif k in TEMPORAL:
            a, b = node.interval
            if b is None:
                if length is None:
                    raise ValueError("unbounded interval: pass the signal length")
                b = max(a, length - max(horizon(c) for c in node.children))
            for off in range(a, b + 1):
                if k in (Kind.UNTIL, Kind.RELEASE):
                    add(path, k, ROLE_UNTIL_LEFT, off)
                    add(path, k, ROLE_UNTIL_RIGHT, off)
                else:
                    add(path, k, ROLE_OFFSET, off)
    return ParameterTable(entries, length)


@dataclass(frozen=True)
class Valuation(Mapping):
    """Positive weight per parameter id."""

    weights: Mapping[ParamId, float]

    def __post_init__(self):
        for pid, w in self.weights.items():
            if not (w > 0 and math.isfinite(w)):
                raise ValueError(f"weight {pid} must be positive and finite, got {w}")
        object.__setattr__(self, "weights", dict(self.weights))

    def __getitem__(self, pid):
        return self.weights[pid]

    def __iter__(self):
        return iter(self.weights)

    def __len__(self):
        return len(self.weights)

    @classmethod
    def ones(cls, table: ParameterTable) -> Valuation:
        return cls({pid: 1.0 for pid in table})

    def log(self) -> dict[ParamId, float]:
        return {pid: math.log(w) for pid, w in self.weights.items()}
