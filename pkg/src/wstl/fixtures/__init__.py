"""Bundled inputs: the worked single-signal example, the robot corpus, the F1 formula."""

from __future__ import annotations

from pathlib import Path

from ..data import load_feedback, load_signals
from ..formula import parse

ROOT = Path(__file__).parent


def path(*parts: str) -> Path:
    return ROOT.joinpath(*parts)


def example1():
    """``(formula, signal)`` of the six-sample worked example."""
    formula = parse(path("example1", "formula.stl").read_text())
    signal = next(iter(load_signals(path("example1", "signal.csv")).values()))
    return formula, signal


def robot():
    """``(formula, store, {"pd1": ..., "pd2": ..., "pd3": ...})``."""
    formula = parse(path("robot", "task.stl").read_text())
    store = load_signals(path("robot", "signals.json"))
    prefs = {name: load_feedback(path("robot", f"{name}.json"), "preferences", store) for name in ("pd1", "pd2", "pd3")}
    return formula, store, prefs


def f1_formula():
    return parse(path("f1", "formula.stl").read_text())
