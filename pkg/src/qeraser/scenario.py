"""Scenario files: a small sectioned ``key = value`` text format.

Format rules:

* UTF-8 text; ``\\n`` or ``\\r\\n`` line endings.
* ``#`` starts a comment that runs to the end of the line.
* ``[name]`` opens a section; keys and section names are case-sensitive.
* ``key = value`` assigns inside the current section. Whitespace around
  keys and values is ignored.
* Reals are plain decimals with optional exponent (no ``nan``/``inf``);
  integers are decimal digits with an optional sign.

Sections ``source``, ``bs1``, ``bs2``, ``bs3`` and ``polarizer`` are
required; ``sweep`` and ``screen`` fall back to defaults. Squared moduli
(``c1_sq``, ``r_sq``) and ``q_abs`` must lie in ``[0, 1]``.

Diagnostics are reported as ``line:column: code: message`` with 1-based
positions. File-level problems (a missing section) point at ``1:1``; a
missing key points at its section header.
"""

from __future__ import annotations

import dataclasses
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import QEraserError
from .model import ApparatusConfig

SWEEP_PARAMETERS = ("q_abs", "c1_abs", "r1_abs", "r3_abs")
REQUIRED_SECTIONS = ("source", "bs1", "bs2", "bs3", "polarizer")
DEFAULT_SWEEP_STEPS = 101

_REAL = re.compile(r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")
_INT = re.compile(r"[+-]?\d+")
_NAME = re.compile(r"[A-Za-z0-9_]+")


@dataclass(frozen=True)
class Source:
    c1_sq: float
    c1_phase: float = 0.0
    c2_phase: float = 0.0


@dataclass(frozen=True)
class Splitter:
    r_sq: float
    r_phase: float = 0.0
    t_phase: float = 0.0


@dataclass(frozen=True)
class Polarizer:
    q_abs: float
    q_phase: float = 0.0


@dataclass(frozen=True)
class Sweep:
    parameter: str = "q_abs"
    start: float = 0.0
    stop: float = 1.0
    steps: int = DEFAULT_SWEEP_STEPS

    def grid(self) -> list[float]:
        """Inclusive linear grid from ``start`` to ``stop``."""
        n = self.steps - 1
        inner = [self.start + (self.stop - self.start) * (k / n) for k in range(1, n)]
        return [self.start, *inner, self.stop]


@dataclass(frozen=True)
class Screen:
    samples: int = 100_000
    seed: int = 0
    bins: int = 32


@dataclass(frozen=True)
class ScenarioFile:
    source: Source
    bs1: Splitter
    bs2: Splitter
    bs3: Splitter
    polarizer: Polarizer
    sweep: Sweep = field(default_factory=Sweep)
    screen: Screen = field(default_factory=Screen)

    def to_config(self) -> ApparatusConfig:
        return ApparatusConfig.from_moduli(
            self.source.c1_sq,
            self.bs1.r_sq,
            self.bs2.r_sq,
            self.bs3.r_sq,
            self.polarizer.q_abs,
            c1_phase=self.source.c1_phase,
            c2_phase=self.source.c2_phase,
            r_phases=(self.bs1.r_phase, self.bs2.r_phase, self.bs3.r_phase),
            t_phases=(self.bs1.t_phase, self.bs2.t_phase, self.bs3.t_phase),
            q_phase=self.polarizer.q_phase,
        )

    def with_swept(self, value: float, parameter: str | None = None) -> "ScenarioFile":
        """Copy with the sweep parameter set to ``value`` (a modulus, not its square)."""
        parameter = parameter or self.sweep.parameter
        replace = dataclasses.replace
        if parameter == "q_abs":
            return replace(self, polarizer=replace(self.polarizer, q_abs=value))
        if parameter == "c1_abs":
            return replace(self, source=replace(self.source, c1_sq=value * value))
        if parameter == "r1_abs":
            return replace(self, bs1=replace(self.bs1, r_sq=value * value))
        if parameter == "r3_abs":
            return replace(self, bs3=replace(self.bs3, r_sq=value * value))
        raise ValueError(f"unknown sweep parameter {parameter!r}")


@dataclass(frozen=True, order=True)
class Diagnostic:
    line: int
    column: int
    code: str
    message: str

    def __str__(self) -> str:
        return f"{self.line}:{self.column}: {self.code}: {self.message}"


class ScenarioError(QEraserError):
    """Raised with every diagnostic found in a rejected scenario."""

    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__(format_diagnostics(self.diagnostics).rstrip("\n"))


def format_diagnostics(diagnostics: list[Diagnostic]) -> str:
    return "".join(f"{d}\n" for d in diagnostics)


# key -> (kind, lo, hi); for "choice" the options take the place of lo
_PHASE = ("real", None, None)
_SCHEMA: dict[str, dict[str, tuple]] = {
    "source": {"c1_sq": ("real", 0.0, 1.0), "c1_phase": _PHASE, "c2_phase": _PHASE},
    "bs1": {"r_sq": ("real", 0.0, 1.0), "r_phase": _PHASE, "t_phase": _PHASE},
    "bs2": {"r_sq": ("real", 0.0, 1.0), "r_phase": _PHASE, "t_phase": _PHASE},
    "bs3": {"r_sq": ("real", 0.0, 1.0), "r_phase": _PHASE, "t_phase": _PHASE},
    "polarizer": {"q_abs": ("real", 0.0, 1.0), "q_phase": _PHASE},
    "sweep": {
        "parameter": ("choice", SWEEP_PARAMETERS, None),
        "from": ("real", 0.0, 1.0),
        "to": ("real", 0.0, 1.0),
        "steps": ("int", 2, 1_000_000),
    },
    "screen": {
        "samples": ("int", 100, 100_000_000),
        "seed": ("int", 0, 2**63 - 1),
        "bins": ("int", 2, 100_000),
    },
}
_REQUIRED_KEYS = {"source": ("c1_sq",), "bs1": ("r_sq",), "bs2": ("r_sq",), "bs3": ("r_sq",), "polarizer": ("q_abs",)}
_ATTR = {"from": "start", "to": "stop"}
_SECTION_TYPES = {
    "source": Source,
    "bs1": Splitter,
    "bs2": Splitter,
    "bs3": Splitter,
    "polarizer": Polarizer,
    "sweep": Sweep,
    "screen": Screen,
}


def _fmt_bound(x) -> str:
    return repr(x) if isinstance(x, float) else str(x)


def _convert(kind: str, lo, hi, raw: str):
    """Return ``(value, None)`` or ``(None, (code, message))``."""
    if kind == "choice":
        if raw in lo:
            return raw, None
        return None, ("invalid-value", f"expected one of {', '.join(lo)}, got {raw!r}")
    if kind == "int":
        if not _INT.fullmatch(raw):
            return None, ("invalid-value", f"expected an integer, got {raw!r}")
        value = int(raw)
    else:
        if not _REAL.fullmatch(raw):
            return None, ("invalid-value", f"expected a real number, got {raw!r}")
        value = float(raw)
        if not math.isfinite(value):
            return None, ("invalid-value", f"value {raw!r} is not finite")
    if lo is not None and (value < lo or value > hi):
        return None, ("out-of-range", f"value {raw} outside [{_fmt_bound(lo)}, {_fmt_bound(hi)}]")
    return value, None


def parse_scenario(text: str) -> ScenarioFile:
    """Parse scenario text.

    Never raises anything but :class:`ScenarioError`, which lists every
    problem found in the file, in line order.
    """
    diags: list[Diagnostic] = []
    values: dict[str, dict[str, object]] = {}
    seen: dict[str, set[str]] = {}
    header_line: dict[str, int] = {}
    current: str | None = None
    skipping = False

    for lineno, raw_line in enumerate(text.split("\n"), start=1):
        line = raw_line[:-1] if raw_line.endswith("\r") else raw_line
        hash_at = line.find("#")
        content = line if hash_at < 0 else line[:hash_at]
        stripped = content.strip()
        if not stripped:
            continue
        col = len(content) - len(content.lstrip()) + 1

        if stripped.startswith("["):
            if not stripped.endswith("]"):
                diags.append(Diagnostic(lineno, col, "syntax", "section header must end with ']'"))
                current, skipping = None, True
                continue
            inner = stripped[1:-1]
            name = inner.strip()
            name_col = col + 1 + (len(inner) - len(inner.lstrip()))
            if not _NAME.fullmatch(name):
                diags.append(Diagnostic(lineno, col, "syntax", f"invalid section name {name!r}"))
                current, skipping = None, True
            elif name not in _SCHEMA:
                diags.append(Diagnostic(lineno, name_col, "unknown-section", f"unknown section [{name}]"))
                current, skipping = None, True
            elif name in values:
                diags.append(Diagnostic(
                    lineno, name_col, "duplicate-section",
                    f"section [{name}] already opened on line {header_line[name]}",
                ))
                current, skipping = None, True
            else:
                values[name] = {}
                seen[name] = set()
                header_line[name] = lineno
                current, skipping = name, False
            continue

        eq = content.find("=")
        if eq < 0:
            diags.append(Diagnostic(lineno, col, "syntax", "expected 'key = value'"))
            continue
        key = content[:eq].strip()
        if not key:
            diags.append(Diagnostic(lineno, col, "syntax", "missing key before '='"))
            continue
        key_col = col
        after = content[eq + 1:]
        raw_value = after.strip()
        value_col = eq + 2 + (len(after) - len(after.lstrip()))
        if skipping:
            continue
        if current is None:
            diags.append(Diagnostic(lineno, key_col, "key-outside-section", f"key {key!r} appears before any section"))
            continue
        schema = _SCHEMA[current]
        if key not in schema:
            diags.append(Diagnostic(lineno, key_col, "unknown-key", f"unknown key {key!r} in [{current}]"))
            continue
        if key in seen[current]:
            diags.append(Diagnostic(lineno, key_col, "duplicate-key", f"key {key!r} already set in [{current}]"))
            continue
        seen[current].add(key)
        if not raw_value:
            diags.append(Diagnostic(lineno, value_col, "invalid-value", f"missing value for {key!r}"))
            continue
        value, problem = _convert(*schema[key], raw_value)
        if problem is not None:
            diags.append(Diagnostic(lineno, value_col, *problem))
            continue
        values[current][key] = value

    for name in REQUIRED_SECTIONS:
        if name not in values:
            diags.append(Diagnostic(1, 1, "missing-section", f"required section [{name}] not found"))
            continue
        for key in _REQUIRED_KEYS[name]:
            if key not in seen[name]:
                diags.append(Diagnostic(header_line[name], 1, "missing-key", f"required key {key!r} missing from [{name}]"))

    if diags:
        raise ScenarioError(sorted(diags, key=lambda d: (d.line, d.column)))

    sections = {
        name: _SECTION_TYPES[name](**{_ATTR.get(k, k): v for k, v in values[name].items()})
        for name in values
    }
    return ScenarioFile(**sections)


def load_scenario(path: str | Path) -> ScenarioFile:
    data = Path(path).read_bytes()
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        line = data.count(b"\n", 0, exc.start) + 1
        column = exc.start - (data.rfind(b"\n", 0, exc.start) + 1) + 1
        raise ScenarioError([Diagnostic(line, column, "encoding", "file is not valid UTF-8")]) from None
    return parse_scenario(text)


def _fmt(value) -> str:
    return repr(float(value)) if isinstance(value, float) else str(value)


def serialize_scenario(scenario: ScenarioFile) -> str:
    """Canonical text form: every section and key, fixed order."""
    blocks = []
    for name, schema in _SCHEMA.items():
        section = getattr(scenario, name)
        lines = [f"[{name}]"]
        lines += [f"{key} = {_fmt(getattr(section, _ATTR.get(key, key)))}" for key in schema]
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"


PRESETS: dict[str, str] = {
    "conventional": """\
# symmetric source, mirrors at B1/B2, 50:50 B3, identical polarizers
[source]
c1_sq = 0.5
[bs1]
r_sq = 1
[bs2]
r_sq = 1
[bs3]
r_sq = 0.5
[polarizer]
q_abs = 1
""",
    "which-path": """\
# B1 and B2 removed: every tag photon reaches D3 or D4
[source]
c1_sq = 0.5
[bs1]
r_sq = 0
[bs2]
r_sq = 0
[bs3]
r_sq = 0.5
[polarizer]
q_abs = 1
""",
    "fig4a": """\
# P, V, C versus |q|; |r1| = |r2| = 1, |c1|^2 = 0.5, |r3|^2 = 0.1
[source]
c1_sq = 0.5
[bs1]
r_sq = 1
[bs2]
r_sq = 1
[bs3]
r_sq = 0.1
[polarizer]
q_abs = 0.6
[sweep]
parameter = q_abs
from = 0
to = 1
steps = 101
""",
    "fig4b": """\
# P, V, C versus |c1|; |r1| = |r2| = 1, |r3| = 0.6, |q| = 0.6
[source]
c1_sq = 0.5
[bs1]
r_sq = 1
[bs2]
r_sq = 1
[bs3]
r_sq = 0.36
[polarizer]
q_abs = 0.6
[sweep]
parameter = c1_abs
from = 0
to = 1
steps = 101
""",
    "fig4c": """\
# P, V, C versus |r1|; |c1|^2 = 0.5, |r3|^2 = 0.5, |q| = 0.6, B2 a mirror
[source]
c1_sq = 0.5
[bs1]
r_sq = 1
[bs2]
r_sq = 1
[bs3]
r_sq = 0.5
[polarizer]
q_abs = 0.6
[sweep]
parameter = r1_abs
from = 0
to = 1
steps = 101
""",
    "fig4d": """\
# P, V, C versus |r3|; |r1| = |r2| = 1, |c1|^2 = 0.25, |q| = 0.6
[source]
c1_sq = 0.25
[bs1]
r_sq = 1
[bs2]
r_sq = 1
[bs3]
r_sq = 0.5
[polarizer]
q_abs = 0.6
[sweep]
parameter = r3_abs
from = 0
to = 1
steps = 101
""",
}


def load_preset(name: str) -> ScenarioFile:
    try:
        return parse_scenario(PRESETS[name])
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}") from None
