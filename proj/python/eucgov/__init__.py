"""Spreadsheet and EUC application governance: scan, assess, report.

The functions mirror the command-line operations and return plain Python
values decoded from the same JSON the CLI and HTTP service emit.
"""

import json
import os

from . import _core
from ._core import EucgovError

__all__ = [
    "EucgovError",
    "assess",
    "concentration",
    "diff",
    "kpi",
    "list_eucas",
    "nested_if_depth",
    "overdue",
    "run_cli",
    "scan",
    "triage",
    "unregistered",
    "what_if",
]


def _text(value):
    return value if isinstance(value, str) else json.dumps(value)


def scan(path):
    """Complexity indicators, grade and Controls Framework check for one workbook."""
    return json.loads(_core.scan(os.fspath(path)))


def nested_if_depth(formula):
    """Returns (depth, balanced)."""
    return _core.nested_if_depth(formula)


def diff(baseline, current):
    return json.loads(_core.diff(os.fspath(baseline), os.fspath(current)))


def assess(answers):
    """Scores an assessment input given as a dict or JSON text."""
    return json.loads(_core.assess(_text(answers)))


def what_if(answers, toggles):
    return json.loads(_core.what_if(_text(answers), list(toggles)))


def triage(submission):
    return json.loads(_core.triage(_text(submission)))


def kpi(store, as_of="", include_retired=False):
    return json.loads(_core.kpi(os.fspath(store), as_of, include_retired))


def concentration(store, top_k=7, include_retired=False):
    return json.loads(_core.concentration(os.fspath(store), top_k, include_retired))


def overdue(store, as_of=""):
    return json.loads(_core.overdue(os.fspath(store), as_of))


def unregistered(store):
    return json.loads(_core.unregistered(os.fspath(store)))


def list_eucas(store):
    return json.loads(_core.list_eucas(os.fspath(store)))


def run_cli(args, stdin=""):
    """Runs one CLI command in-process; returns (exit_code, stdout, stderr)."""
    return _core.run_cli([os.fspath(a) for a in args], stdin)
