"""Problem files: a line-oriented text format for generators and elements.

Example::

    format: bogofock-problem/1
    kind: generator
    d: 2
    S.0: [[0, 0], [0, 0]]
    S.1: [[0, 0], [0, 0]]
    T.0: [[0.3, 0], [0, 0]]
    T.1: [[0, 0], [0.7, 0]]

Each ``X.i`` line is row i of the matrix as a JSON list of ``[re, im]`` pairs.
Blank lines and lines starting with ``#`` are ignored.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from bogofock.symplectic import SigmaGenerator, SymplecticElement

__all__ = ["FORMAT", "DEMOS", "ProblemError", "ProblemFile", "parse_problem", "dump_problem", "read_problem", "demo"]

FORMAT = "bogofock-problem/1"
KINDS = ("generator", "element")


class ProblemError(ValueError):
    """Malformed or inconsistent problem file."""


@dataclass(frozen=True, eq=False)
class ProblemFile:
    kind: str
    d: int
    S: np.ndarray
    T: np.ndarray

    def generator(self) -> SigmaGenerator:
        if self.kind != "generator":
            raise ProblemError(f"problem kind is {self.kind!r}, not 'generator'")
        return SigmaGenerator(self.S, self.T)

    def element(self) -> SymplecticElement:
        if self.kind != "element":
            raise ProblemError(f"problem kind is {self.kind!r}, not 'element'")
        return SymplecticElement(self.S, self.T)


def _parse_row(text: str, where: str, d: int) -> list[complex]:
    try:
        row = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemError(f"{where}: not a JSON array ({exc.msg})") from None
    if not isinstance(row, list) or len(row) != d:
        raise ProblemError(f"{where}: expected {d} entries")
    out = []
    for entry in row:
        if (
            not isinstance(entry, list)
            or len(entry) != 2
            or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in entry)
        ):
            raise ProblemError(f"{where}: entries must be [re, im] number pairs")
        if not all(math.isfinite(x) for x in entry):
            raise ProblemError(f"{where}: non-finite entry")
        out.append(complex(entry[0], entry[1]))
    return out


def parse_problem(text: str) -> ProblemFile:
    fields: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition(":")
        if not sep:
            raise ProblemError(f"line {lineno}: expected 'key: value'")
        key = key.strip()
        if key in fields:
            raise ProblemError(f"line {lineno}: duplicate key {key!r}")
        fields[key] = value.strip()

    if fields.pop("format", None) != FORMAT:
        raise ProblemError(f"missing or unsupported format line (want {FORMAT!r})")
    kind = fields.pop("kind", None)
    if kind not in KINDS:
        raise ProblemError(f"kind must be one of {KINDS}, got {kind!r}")
    try:
        d = int(fields.pop("d"))
    except (KeyError, ValueError):
        raise ProblemError("d must be a positive integer") from None
    if d < 1:
        raise ProblemError("d must be a positive integer")

    mats = {}
    for name in ("S", "T"):
        rows = []
        for i in range(d):
            key = f"{name}.{i}"
            if key not in fields:
                raise ProblemError(f"missing row {key}")
            rows.append(_parse_row(fields.pop(key), key, d))
        mats[name] = np.array(rows, dtype=complex)
    if fields:
        raise ProblemError(f"unexpected keys: {', '.join(sorted(fields))}")
    return ProblemFile(kind, d, mats["S"], mats["T"])


def _num(x: float) -> str:
    # integral values print without a trailing ".0"
    x = float(x) + 0.0
    return str(int(x)) if x.is_integer() and abs(x) < 1e15 else repr(x)


def dump_problem(problem: ProblemFile) -> str:
    lines = [f"format: {FORMAT}", f"kind: {problem.kind}", f"d: {problem.d}"]
    for name, m in (("S", problem.S), ("T", problem.T)):
        for i, row in enumerate(np.asarray(m, dtype=complex)):
            cells = ", ".join(f"[{_num(z.real)}, {_num(z.imag)}]" for z in row)
            lines.append(f"{name}.{i}: [{cells}]")
    return "\n".join(lines) + "\n"


def read_problem(path: str) -> ProblemFile:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ProblemError(f"cannot read {path}: {exc.strerror}") from None
    return parse_problem(text)


DEMOS = {
    "squeeze": (1, [[0]], [[0.5]]),
    "rotation": (1, [[1j]], [[0]]),
    "phase": (1, [[0.5j]], [[1]]),
    "commuting2d": (2, [[0, 0], [0, 0]], [[0.3, 0], [0, 0.7]]),
}


def demo(name: str) -> ProblemFile:
    try:
        d, s, t = DEMOS[name]
    except KeyError:
        raise ProblemError(f"unknown demo {name!r}; choose from {', '.join(DEMOS)}") from None
    return ProblemFile("generator", d, np.array(s, dtype=complex), np.array(t, dtype=complex))
