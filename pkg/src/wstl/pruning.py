"""Structural pruning of robustness computation trees.

Under any positive weighting, a child whose robustness sign differs from its
parent's can never be the value selected by the parent's min/max. Removing
such children (recursively) leaves a tree where every node has the root's
sign, the robustness is unchanged, and the weights on removed edges are no
longer decision variables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .rct import LEAF, RCTNode


class UncachedTreeError(ValueError):
    """The tree has not been evaluated; node signs are unknown."""


def sign(x: float) -> int:
    return 1 if x > 0 else (-1 if x < 0 else 0)


@dataclass
class PrunedRCT:
    root: RCTNode
    root_sign: int
    active_params: set[str] = field(default_factory=set)
    kept: int = 0
    deleted: int = 0

    @property
    def constant(self) -> bool:
        """Weighted robustness is the same for every valuation (0 or infinite)."""
        return zero_sign_policy(self.root) or math.isinf(self.root.value)

    @property
    def value(self) -> float:
        return self.root.value


def prune(rct: RCTNode, signal=None) -> PrunedRCT:
    """Return a pruned copy of an evaluated tree; the input is left untouched.

    ``signal`` is accepted for symmetry with the evaluation API; node signs are
    read from the value cache filled by :func:`wstl.rct.robustness`.
    """
    if rct.value is None:
        raise UncachedTreeError("evaluate the tree with robustness() before pruning")
    root_sign = sign(rct.value)
    active: set[str] = set()
    stats = {"kept": 0, "deleted": 0}

    def copy(node: RCTNode) -> RCTNode:
        if node.value is None:
            raise UncachedTreeError(f"node at t={node.time} has no cached value")
        stats["kept"] += 1
        out = RCTNode(node.source, node.path, node.time, node.op, role=node.role, value=node.value)
        if node.op == LEAF:
            return out
        s = sign(node.value)
        for child, pid in node.children:
            if child.value is None:
                raise UncachedTreeError(f"node at t={child.time} has no cached value")
            if sign(child.value) == s:
                out.children.append((copy(child), pid))
                if pid is not None:
                    active.add(pid)
            else:
                stats["deleted"] += child.size()
        return out

    root = copy(rct)
    return PrunedRCT(root, root_sign, active, stats["kept"], stats["deleted"])


def zero_sign_policy(rct: RCTNode) -> bool:
    """True when the root robustness is exactly 0.

    Such a signal has weighted robustness 0 under every valuation, so any
    comparison involving it is decided without decision variables.
    """
    if rct.value is None:
        raise UncachedTreeError("evaluate the tree before asking for its sign")
    return rct.value == 0
