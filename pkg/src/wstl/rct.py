"""Robustness computation trees.

An RCT is the time-unrolled syntax tree of a PNF formula: every node pairs an
operator (or predicate) with the absolute instant at which it is evaluated.
Edges carry the ParamId of the weight that scales the child's value, or
``None`` where the semantics applies no weight.

Until at time ``t`` unrolls into one "offset" min-node per ``t'`` in its
window. Each offset node has two edges: the left weight applied to an
unweighted min over ``phi1`` at ``[t, t+t')`` (empty, hence ``+inf``, when
``t' = 0``), and the right weight applied to ``phi2`` at ``t+t'``.
Release is the dual with max in place of min.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Mapping

import numpy as np

from .formula import (
    ATOMIC,
    ROLE_LEFT,
    ROLE_OFFSET,
    ROLE_RIGHT,
    ROLE_UNTIL_LEFT,
    ROLE_UNTIL_RIGHT,
    FormulaNode,
    Kind,
    ParameterTable,
    collect_parameters,
    horizon,
    is_pnf,
)

INF = math.inf

MIN, MAX, LEAF = "min", "max", "leaf"


class SignalTooShortError(ValueError):
    pass


class MissingChannelError(KeyError):
    def __init__(self, channel: str, signal: str | None = None):
        self.channel = channel
        where = f" in signal {signal!r}" if signal else ""
        super().__init__(f"channel {channel!r} missing{where}")

    def __str__(self):
        return self.args[0]


class MissingParameterError(KeyError):
    pass


@dataclass(frozen=True)
class Signal:
    """Multi-channel discrete-time signal; samples at t = 0 .. length-1."""

    channels: Mapping[str, np.ndarray]
    name: str | None = None

    def __post_init__(self):
        chans = {k: np.asarray(v, dtype=float) for k, v in self.channels.items()}
        lengths = {len(v) for v in chans.values()}
        if len(lengths) > 1:
            raise ValueError(f"channels of unequal length: {sorted(lengths)}")
        for k, v in chans.items():
            if v.ndim != 1:
                raise ValueError(f"channel {k!r} must be one-dimensional")
        object.__setattr__(self, "channels", chans)

    @classmethod
    def single(cls, values, channel: str = "x", name: str | None = None) -> Signal:
        return cls({channel: values}, name)

    @property
    def length(self) -> int:
        return len(next(iter(self.channels.values()))) if self.channels else 0

    def __len__(self):
        return self.length

    def __getitem__(self, channel: str) -> np.ndarray:
        try:
            return self.channels[channel]
        except KeyError:
            raise MissingChannelError(channel, self.name) from None

    def truncate(self, k: int) -> Signal:
        return Signal({c: v[:k] for c, v in self.channels.items()}, self.name)

    def hold_extend(self, n: int) -> Signal:
        """Extend to ``n`` samples by repeating the last one."""
        if n <= self.length:
            return self
        pad = n - self.length
        return Signal({c: np.concatenate([v, np.repeat(v[-1:], pad)]) for c, v in self.channels.items()}, self.name)


@dataclass(eq=False)
class RCTNode:
    source: FormulaNode
    path: tuple[int, ...]
    time: int
    op: str
    children: list[tuple[RCTNode, str | None]] = field(default_factory=list)
    role: str | None = None
    value: float | None = None

    @property
    def is_leaf(self) -> bool:
        return self.op == LEAF

    def walk(self) -> Iterator[RCTNode]:
        yield self
        for child, _ in self.children:
            yield from child.walk()

    def params(self) -> set[str]:
        return {pid for node in self.walk() for _, pid in node.children if pid is not None}

    def size(self) -> int:
        return sum(1 for _ in self.walk())

    def max_time(self) -> int:
        return max(n.time for n in self.walk())

    def label(self) -> str:
        k = self.source.kind
        if k is Kind.PRED:
            from .formula import to_string
            return to_string(self.source)
        if self.role == "offset":
            return f"{k.value}-offset"
        if self.role == "left":
            return f"{k.value}-left-{self.op}"
        return k.value

    def dump(self, indent: int = 0, edge: str | None = None) -> str:
        val = "?" if self.value is None else _fmt(self.value)
        w = f" [{edge}]" if edge else ""
        lines = [f"{'  ' * indent}({self.label()}, t={self.time}) = {val}{w}"]
        for child, pid in self.children:
            lines.append(child.dump(indent + 1, pid))
        return "\n".join(lines)


def _fmt(x: float) -> str:
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.6g}"


def _window(node: FormulaNode, t: int, length: int) -> range:
    a, b = node.interval
    if b is None:
        b = length - t - max(horizon(c) for c in node.children)
    return range(a, b + 1)


def build_rct(
    f: FormulaNode,
    t: int,
    length: int,
    table: ParameterTable | None = None,
    clamp_offsets: bool = False,
) -> RCTNode:
    """Unroll ``f`` at instant ``t`` for a signal of ``length`` samples.

    ``clamp_offsets`` maps offsets missing from ``table`` to the nearest
    existing one (used for prefix evaluation on shortened intervals).
    """
    if not is_pnf(f):
        raise ValueError("build_rct needs a formula in positive normal form")
    if t < 0 or t + horizon(f) > length:
        raise SignalTooShortError(
            f"signal of length {length} is too short: evaluating at t={t} needs {t + horizon(f)} samples"
        )
    if table is None:
        table = collect_parameters(f, length)

    def pid(path, role, offset=None):
        try:
            return table.lookup(path, role, offset, clamp=clamp_offsets)
        except KeyError as exc:
            raise MissingParameterError(str(exc)) from None

    def build(node: FormulaNode, path, t) -> RCTNode:
        k = node.kind
        if k in ATOMIC:
            return RCTNode(node, path, t, LEAF)
        if k in (Kind.AND, Kind.OR):
            out = RCTNode(node, path, t, MIN if k is Kind.AND else MAX)
            out.children = [
                (build(node.children[0], path + (0,), t), pid(path, ROLE_LEFT)),
                (build(node.children[1], path + (1,), t), pid(path, ROLE_RIGHT)),
            ]
            return out
        if k in (Kind.ALWAYS, Kind.EVENTUALLY):
            out = RCTNode(node, path, t, MIN if k is Kind.ALWAYS else MAX)
            out.children = [
                (build(node.children[0], path + (0,), t + off), pid(path, ROLE_OFFSET, off))
                for off in _window(node, t, length)
            ]
            return out
        # Until: max over offsets of min(w1 * min(phi1 on [t, t+off)), w2 * phi2(t+off));
        # Release swaps min and max.
        outer, inner = (MAX, MIN) if k is Kind.UNTIL else (MIN, MAX)
        out = RCTNode(node, path, t, outer)
        for off in _window(node, t, length):
            left = RCTNode(node, path, t, inner, role="left")
            left.children = [(build(node.children[0], path + (0,), s), None) for s in range(t, t + off)]
            gadget = RCTNode(node, path, t, inner, role="offset")
            gadget.children = [
                (left, pid(path, ROLE_UNTIL_LEFT, off)),
                (build(node.children[1], path + (1,), t + off), pid(path, ROLE_UNTIL_RIGHT, off)),
            ]
            out.children.append((gadget, None))
        return out

    return build(f, (), t)


def _leaf_value(node: RCTNode, signal: Signal) -> float:
    src = node.source
    if src.kind is Kind.TRUE:
        return INF
    if src.kind is Kind.FALSE:
        return -INF
    value = 0.0
    t = node.time
    for name, c in src.pred.expr.terms:
        value += c * signal[name][t]
    return float(value + src.pred.expr.constant)


def _empty(op: str) -> float:
    return INF if op == MIN else -INF


def robustness(rct: RCTNode, signal: Signal) -> float:
    """Classical robustness; fills every node's ``value`` cache."""
    if rct.max_time() >= signal.length:
        raise SignalTooShortError(f"tree reaches t={rct.max_time()} but signal has {signal.length} samples")

    def ev(node: RCTNode) -> float:
        if node.op == LEAF:
            node.value = _leaf_value(node, signal)
        else:
            vals = [ev(c) for c, _ in node.children]
            if not vals:
                node.value = _empty(node.op)
            else:
                node.value = min(vals) if node.op == MIN else max(vals)
        return node.value

    return ev(rct)


def _weight(valuation: Mapping[str, float], pid: str) -> float:
    try:
        w = valuation[pid]
    except KeyError:
        raise MissingParameterError(f"valuation has no value for {pid}") from None
    if not w > 0:
        raise ValueError(f"weight {pid} must be positive, got {w}")
    return w


def weighted_robustness(
    rct: RCTNode,
    signal: Signal | None,
    valuation: Mapping[str, float],
    record: dict | None = None,
) -> float:
    """Weighted robustness: each child value times its edge weight before min/max.

    Leaf values come from the cache when present, else from ``signal``.
    ``record``, when given, receives ``id(node) -> value`` for every node.
    The cache itself (classical robustness) is not modified.
    """

    def ev(node: RCTNode) -> float:
        if node.op == LEAF:
            value = node.value if node.value is not None else _leaf_value(node, signal)
        else:
            vals = []
            for child, pid in node.children:
                r = ev(child)
                vals.append(r if pid is None else _weight(valuation, pid) * r)
            if not vals:
                value = _empty(node.op)
            else:
                value = min(vals) if node.op == MIN else max(vals)
        if record is not None:
            record[id(node)] = value
        return value

    return ev(rct)


def weighted_robustness_batch(
    rct: RCTNode,
    signal: Signal | None,
    weights: Mapping[str, np.ndarray],
    size: int,
) -> np.ndarray:
    """Vectorized :func:`weighted_robustness` over ``size`` valuations at once.

    ``weights[pid]`` is an array of shape ``(size,)``.
    """

    def ev(node: RCTNode) -> np.ndarray | float:
        if node.op == LEAF:
            return node.value if node.value is not None else _leaf_value(node, signal)
        vals = []
        for child, pid in node.children:
            r = ev(child)
            vals.append(r if pid is None else weights[pid] * r)
        if not vals:
            return _empty(node.op)
        reduce = np.minimum if node.op == MIN else np.maximum
        out = vals[0]
        for v in vals[1:]:
            out = reduce(out, v)
        return out

    out = ev(rct)
    return np.broadcast_to(np.asarray(out, dtype=float), (size,)).copy()


def formula_robustness(f: FormulaNode, signal: Signal, t: int = 0) -> float:
    """Convenience: robustness of a PNF formula without keeping the tree."""
    return robustness(build_rct(f, t, signal.length), signal)
