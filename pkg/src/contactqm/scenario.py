"""Scenario files: a line-oriented ``key = value`` text format with one matrix block.

Example::

    # radiative decay of a qubit
    name = decay
    n = 2
    dissipation = linear
    gamma = 1
    excited_start = true
    t_end = 10
    samples = 201
    hamiltonian:
      4,0  0,0
      0,0  2,0
    end

Blank lines and text after ``#`` are ignored.  Matrix entries are ``re,im``
pairs separated by whitespace, one matrix row per line.  Keys:

==================  =========================================================
``name``            free text label (default ``scenario``)
``n``               number of levels (required, >= 2)
``hbar``            reduced Planck constant (default 1)
``dissipation``     ``none`` | ``linear`` | ``general`` (default ``none``)
``gamma``           rate of f(S) = -gamma S (required for ``linear``)
``f_coeffs``        c0, c1, ... of f(S) = sum c_k S^k (required for ``general``)
``chart``           chart of the initial coordinates (default n)
``z``               n-1 initial coordinates as ``re,im`` pairs
``S0``              initial fiber coordinate (default 0)
``excited_start``   ``true`` starts next to level 1 instead of at ``z``
``excited_kappa``   distance parameter of that start (default 1e-12)
``excited_phase``   phase of that start (default 0)
``t_end``           final time (required, > 0)
``samples``         number of output times, uniform on [0, t_end] (default 201)
``outputs``         comma list from z, S, e_H, var_H, P, bloch (default: all)
``reference_level`` level whose population is reported as P (default 1)
``rtol``, ``atol``  integrator tolerances (defaults 1e-10, 1e-12)
``window``          portrait window x0,x1,y0,y1 (default -3,3,-3,3)
``grid``            portrait grid NxM (default 41x41)
==================  =========================================================
"""

import dataclasses
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .dynamics import ContactHamiltonianSpec, GeneralDissipation, LinearDissipation, StepControl, excited_state
from .errors import ScenarioError
from .states import ExtendedState, ProjectiveState

OUTPUTS = ("z", "S", "e_H", "var_H", "P", "bloch")
_DISSIPATIONS = ("none", "linear", "general")
_TRUE = {"true", "yes", "1", "on"}
_FALSE = {"false", "no", "0", "off"}


@dataclass(frozen=True)
class Scenario:
    n: int
    hamiltonian: tuple  # n rows of n complex entries
    t_end: float
    name: str = "scenario"
    hbar: float = 1.0
    dissipation: str = "none"
    gamma: float = 0.0
    f_coeffs: tuple = ()
    chart: Optional[int] = None
    z: Optional[tuple] = None
    S0: float = 0.0
    excited_start: bool = False
    excited_kappa: float = 1e-12
    excited_phase: float = 0.0
    samples: int = 201
    outputs: tuple = OUTPUTS
    reference_level: int = 1
    rtol: float = 1e-10
    atol: float = 1e-12
    window: tuple = (-3.0, 3.0, -3.0, 3.0)
    grid: tuple = (41, 41)

    @property
    def H(self) -> np.ndarray:
        return np.array(self.hamiltonian, dtype=complex)

    def to_spec(self) -> ContactHamiltonianSpec:
        if self.dissipation == "linear":
            fiber = LinearDissipation(self.gamma)
        elif self.dissipation == "general":
            fiber = GeneralDissipation.polynomial(self.f_coeffs)
        else:
            fiber = LinearDissipation(0.0)
        return ContactHamiltonianSpec(self.H, fiber, self.hbar)

    def initial_state(self) -> ExtendedState:
        if self.excited_start:
            return excited_state(self.n, self.excited_kappa, self.excited_phase, self.S0)
        chart = self.n if self.chart is None else self.chart
        return ExtendedState(ProjectiveState(chart, list(self.z)), self.S0)

    def step_control(self) -> StepControl:
        return StepControl(rtol=self.rtol, atol=self.atol)

    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.t_end, self.samples)

    def with_overrides(self, **changes) -> "Scenario":
        return dataclasses.replace(self, **changes)


# -- parsing -----------------------------------------------------------------------

def _num(text, line, key) -> float:
    try:
        v = float(text)
    except ValueError:
        raise ScenarioError(f"expected a real number, got {text!r}", line, key) from None
    if not np.isfinite(v):
        raise ScenarioError(f"value must be finite, got {text!r}", line, key)
    return v


def _int(text, line, key) -> int:
    try:
        return int(text)
    except ValueError:
        raise ScenarioError(f"expected an integer, got {text!r}", line, key) from None


def _complex_pair(text, line, key) -> complex:
    parts = text.split(",")
    if len(parts) != 2:
        raise ScenarioError(f"expected a 're,im' pair, got {text!r}", line, key)
    return complex(_num(parts[0], line, key), _num(parts[1], line, key))


def _bool(text, line, key) -> bool:
    t = text.lower()
    if t in _TRUE:
        return True
    if t in _FALSE:
        return False
    raise ScenarioError(f"expected true/false, got {text!r}", line, key)


def _real_list(text, line, key) -> tuple:
    return tuple(_num(p.strip(), line, key) for p in text.split(",") if p.strip())


def parse_grid(text, line=None, key="grid") -> tuple:
    parts = text.lower().split("x")
    if len(parts) != 2:
        raise ScenarioError(f"expected NxM, got {text!r}", line, key)
    g = (_int(parts[0].strip(), line, key), _int(parts[1].strip(), line, key))
    if min(g) < 2:
        raise ScenarioError("grid needs at least 2 points per direction", line, key)
    return g


def parse_window(text, line=None, key="window") -> tuple:
    w = _real_list(text, line, key)
    if len(w) != 4:
        raise ScenarioError(f"expected x0,x1,y0,y1, got {text!r}", line, key)
    if not (w[1] > w[0] and w[3] > w[2]):
        raise ScenarioError("window must satisfy x0 < x1 and y0 < y1", line, key)
    return w


def loads(text: str) -> Scenario:
    """Parse scenario text; raises ScenarioError naming the line and field."""
    values, where = {}, {}
    matrix, matrix_line = None, None
    lines = text.splitlines()
    k = 0
    while k < len(lines):
        lineno = k + 1
        raw = lines[k].split("#", 1)[0].strip()
        k += 1
        if not raw:
            continue
        if raw.rstrip(":").strip() == "hamiltonian" and raw.endswith(":"):
            if matrix is not None:
                raise ScenarioError("duplicate hamiltonian block", lineno, "hamiltonian")
            matrix, matrix_line = [], lineno
            while True:
                if k >= len(lines):
                    raise ScenarioError("hamiltonian block is not closed by 'end'", matrix_line, "hamiltonian")
                row_no = k + 1
                row = lines[k].split("#", 1)[0].strip()
                k += 1
                if not row:
                    continue
                if row == "end":
                    break
                r = len(matrix) + 1
                matrix.append((row_no, [_complex_pair(tok, row_no, f"hamiltonian[{r}][{c}]")
                                        for c, tok in enumerate(row.split(), start=1)]))
            continue
        if "=" not in raw:
            raise ScenarioError(f"expected 'key = value', got {raw!r}", lineno)
        key, value = (s.strip() for s in raw.split("=", 1))
        if key not in _FIELDS:
            raise ScenarioError("unknown key", lineno, key)
        if key in values:
            raise ScenarioError("duplicate key", lineno, key)
        values[key] = value
        where[key] = lineno
    return _build(values, where, matrix, matrix_line)


_FIELDS = {f.name for f in dataclasses.fields(Scenario)} - {"hamiltonian"}


def _build(values, where, matrix, matrix_line) -> Scenario:
    def line(key):
        return where.get(key)

    if "n" not in values:
        raise ScenarioError("missing required key", None, "n")
    n = _int(values["n"], line("n"), "n")
    if n < 2:
        raise ScenarioError("n must be at least 2", line("n"), "n")
    if matrix is None:
        raise ScenarioError("missing hamiltonian block", None, "hamiltonian")
    if len(matrix) != n:
        raise ScenarioError(f"expected {n} rows, got {len(matrix)}", matrix_line, "hamiltonian")
    for r, (lineno, row) in enumerate(matrix, start=1):
        if len(row) != n:
            raise ScenarioError(f"expected {n} entries, got {len(row)}", lineno, f"hamiltonian[{r}]")
    H = [row for _, row in matrix]
    for r in range(n):
        for c in range(r, n):
            a, b = H[r][c], H[c][r].conjugate()
            if abs(a - b) > 1e-12 * max(1.0, abs(a), abs(b)):
                lineno = matrix[c][0]
                raise ScenarioError(f"matrix is not Hermitian: entry ({c + 1},{r + 1}) = {H[c][r]} "
                                    f"but ({r + 1},{c + 1}) = {H[r][c]}", lineno,
                                    f"hamiltonian[{c + 1}][{r + 1}]")
    kw = {"n": n, "hamiltonian": tuple(tuple(row) for row in H)}

    if "t_end" not in values:
        raise ScenarioError("missing required key", None, "t_end")
    for key in ("t_end", "hbar", "gamma", "S0", "excited_kappa", "excited_phase", "rtol", "atol"):
        if key in values:
            kw[key] = _num(values[key], line(key), key)
    for key in ("t_end", "hbar", "rtol", "atol"):
        if key in kw and not kw[key] > 0:
            raise ScenarioError("must be positive", line(key), key)
    if kw.get("excited_kappa", 0.0) < 0:
        raise ScenarioError("must be non-negative", line("excited_kappa"), "excited_kappa")
    if "name" in values:
        kw["name"] = values["name"]
    if "samples" in values:
        kw["samples"] = _int(values["samples"], line("samples"), "samples")
        if kw["samples"] < 2:
            raise ScenarioError("sample count must be at least 2", line("samples"), "samples")
    if "reference_level" in values:
        kw["reference_level"] = _int(values["reference_level"], line("reference_level"), "reference_level")
        if not 1 <= kw["reference_level"] <= n:
            raise ScenarioError(f"must be in 1..{n}", line("reference_level"), "reference_level")

    dissipation = values.get("dissipation", "none")
    if dissipation not in _DISSIPATIONS:
        raise ScenarioError(f"expected one of {', '.join(_DISSIPATIONS)}", line("dissipation"), "dissipation")
    kw["dissipation"] = dissipation
    if dissipation == "linear" and "gamma" not in values:
        raise ScenarioError("linear dissipation needs gamma", line("dissipation"), "gamma")
    if dissipation != "linear" and "gamma" in values:
        raise ScenarioError("gamma is only used with dissipation = linear", line("gamma"), "gamma")
    if dissipation == "general":
        if "f_coeffs" not in values:
            raise ScenarioError("general dissipation needs f_coeffs", line("dissipation"), "f_coeffs")
        kw["f_coeffs"] = _real_list(values["f_coeffs"], line("f_coeffs"), "f_coeffs")
        if not kw["f_coeffs"]:
            raise ScenarioError("needs at least one coefficient", line("f_coeffs"), "f_coeffs")
    elif "f_coeffs" in values:
        raise ScenarioError("f_coeffs is only used with dissipation = general", line("f_coeffs"), "f_coeffs")

    excited = _bool(values["excited_start"], line("excited_start"), "excited_start") \
        if "excited_start" in values else False
    kw["excited_start"] = excited
    if excited and ("z" in values or "chart" in values):
        key = "z" if "z" in values else "chart"
        raise ScenarioError("give either excited_start or an initial z, not both", line(key), key)
    if not excited:
        if "z" not in values:
            raise ScenarioError("missing initial state (z or excited_start)", None, "z")
        z = tuple(_complex_pair(tok, line("z"), "z") for tok in values["z"].split())
        if len(z) != n - 1:
            raise ScenarioError(f"expected {n - 1} coordinates, got {len(z)}", line("z"), "z")
        kw["z"] = z
        if "chart" in values:
            kw["chart"] = _int(values["chart"], line("chart"), "chart")
            if not 1 <= kw["chart"] <= n:
                raise ScenarioError(f"chart must be in 1..{n}", line("chart"), "chart")

    if "outputs" in values:
        outs = tuple(o.strip() for o in values["outputs"].split(",") if o.strip())
        bad = [o for o in outs if o not in OUTPUTS]
        if bad or not outs:
            raise ScenarioError(f"unknown output {bad[0] if bad else ''!r}; choose from {', '.join(OUTPUTS)}",
                                line("outputs"), "outputs")
        kw["outputs"] = outs
    if "window" in values:
        kw["window"] = parse_window(values["window"], line("window"))
    if "grid" in values:
        kw["grid"] = parse_grid(values["grid"], line("grid"))
    return Scenario(**kw)


def load(path) -> Scenario:
    return loads(Path(path).read_text())


# -- serialization -------------------------------------------------------------------

def _fmt(x: float) -> str:
    return repr(float(x))


def _pair(c: complex) -> str:
    return f"{_fmt(c.real)},{_fmt(c.imag)}"


def dumps(s: Scenario) -> str:
    """Text form that ``loads`` maps back to an identical Scenario."""
    out = [f"name = {s.name}", f"n = {s.n}", f"hbar = {_fmt(s.hbar)}", f"dissipation = {s.dissipation}"]
    if s.dissipation == "linear":
        out.append(f"gamma = {_fmt(s.gamma)}")
    if s.dissipation == "general":
        out.append("f_coeffs = " + ", ".join(_fmt(c) for c in s.f_coeffs))
    if s.excited_start:
        out.append("excited_start = true")
    else:
        if s.chart is not None:
            out.append(f"chart = {s.chart}")
        out.append("z = " + " ".join(_pair(c) for c in s.z))
    out += [f"S0 = {_fmt(s.S0)}", f"excited_kappa = {_fmt(s.excited_kappa)}",
            f"excited_phase = {_fmt(s.excited_phase)}", f"t_end = {_fmt(s.t_end)}", f"samples = {s.samples}",
            "outputs = " + ", ".join(s.outputs), f"reference_level = {s.reference_level}",
            f"rtol = {_fmt(s.rtol)}", f"atol = {_fmt(s.atol)}",
            "window = " + ",".join(_fmt(w) for w in s.window), f"grid = {s.grid[0]}x{s.grid[1]}",
            "hamiltonian:"]
    out += ["  " + "  ".join(_pair(c) for c in row) for row in s.hamiltonian]
    out.append("end")
    return "\n".join(out) + "\n"


def dump(s: Scenario, path) -> None:
    Path(path).write_text(dumps(s))


# -- bundled scenarios ------------------------------------------------------------------

BUNDLED_DIR = Path(__file__).resolve().parent / "scenarios"


def bundled(name: str) -> Path:
    """Path of a scenario shipped with the package (``name`` with or without extension)."""
    p = BUNDLED_DIR / (name if name.endswith(".scenario") else f"{name}.scenario")
    if not p.is_file():
        raise FileNotFoundError(f"no bundled scenario {name!r}")
    return p


def bundled_names() -> list[str]:
    return sorted(p.stem for p in BUNDLED_DIR.glob("*.scenario"))
