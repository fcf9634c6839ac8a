"""Experiment configuration: an INI file with four sections.

Grammar (``#`` and ``;`` start comment lines)::

    [experiment]
    kind = consistency        ; one of KINDS
    seed = 404
    output = results/run      ; writes run.json and run.csv
    replications = 200
    epsilon = 0.05

    [model]
    alpha = 0.55
    beta = 0.55
    theta = 1.0

    [grid]
    horizons = 4, 8, 16       ; T = S, or TxS pairs such as 4x8
    cell_step = 0.25

    [lemma]
    samples = 100000
    alphas = 0.55
    betas = 0.52, 0.56, 0.60, 0.62

Every key is optional; missing keys take per-kind defaults. Unknown
sections or keys are errors.
"""

from __future__ import annotations

import math
import re
from dataclasses import asdict, dataclass, field

from .errors import ParseError, ValidationError

KINDS = (
    "simulate",
    "estimate",
    "consistency",
    "variance-scaling",
    "denominator-growth",
    "normality-gap",
    "lemma-integral",
    "bessel-check",
)
# refused outside (1/2, 5/8)^2
STRICT_REGIME_KINDS = ("consistency", "normality-gap", "variance-scaling")
# run, with a warning, outside (1/2, 5/8)^2
WARN_REGIME_KINDS = ("estimate", "denominator-growth", "lemma-integral")
CHAOS_KINDS = ("variance-scaling", "denominator-growth", "normality-gap")
SIMULATION_KINDS = ("simulate", "estimate", "consistency")
CHAOS_CELL_CAP = 32
SIMULATION_CELL_CAP = 64

_DEFAULT_GRID = {
    "simulate": ([(2.0, 2.0)], 0.5),
    "estimate": ([(8.0, 8.0)], 0.25),
    "consistency": ([(4.0, 4.0), (8.0, 8.0), (16.0, 16.0)], 0.25),
    "variance-scaling": ([(4.0, 4.0), (8.0, 8.0), (16.0, 16.0), (32.0, 32.0)], 1.0),
    "denominator-growth": ([(4.0, 4.0), (8.0, 8.0), (16.0, 16.0), (32.0, 32.0)], 1.0),
    "normality-gap": ([(4.0, 4.0), (8.0, 8.0), (16.0, 16.0), (32.0, 32.0)], 1.0),
    "lemma-integral": ([(1.0, 1.0)], 1.0),
    "bessel-check": ([(1.0, 1.0)], 1.0),
}
_DEFAULT_REPS = {"simulate": 2000, "consistency": 200}

_SCHEMA = {
    "experiment": {"kind": "str", "seed": "int", "output": "str", "replications": "int", "epsilon": "float"},
    "model": {"alpha": "float", "beta": "float", "theta": "float"},
    "grid": {"horizons": "horizons", "cell_step": "float"},
    "lemma": {"samples": "int", "alphas": "floats", "betas": "floats"},
}


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    alpha: float = 0.55
    beta: float = 0.55
    theta: float = 1.0
    horizons: tuple = ()
    cell_step: float = 1.0
    replications: int = 1
    seed: int = 0
    output_path: str = "fou-sheet-report"
    epsilon: float = 0.05
    samples: int = 100000
    lemma_alphas: tuple = (0.55,)
    lemma_betas: tuple = (0.52, 0.56, 0.60, 0.62)
    allow_slow: bool = False
    warnings: tuple = field(default=(), compare=False)

    @property
    def theorem_regime(self) -> bool:
        return 0.5 < self.alpha < 0.625 and 0.5 < self.beta < 0.625

    def cells(self, horizon) -> tuple[int, int]:
        t, s = horizon
        return max(1, round(t / self.cell_step)), max(1, round(s / self.cell_step))

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("warnings")
        # where the report goes does not change its content
        d.pop("output_path")
        d["horizons"] = [list(h) for h in self.horizons]
        d["lemma_alphas"] = list(self.lemma_alphas)
        d["lemma_betas"] = list(self.lemma_betas)
        return d


_SECTION = re.compile(r"^\[([A-Za-z_-]+)\]\s*$")
_KEY = re.compile(r"^([A-Za-z_][A-Za-z0-9_-]*)\s*=\s*(.*?)\s*$")


def _scan(source: str) -> dict:
    """Line-oriented parse into ``{section: {key: (value, line)}}``."""
    out: dict = {}
    section = None
    for lineno, raw in enumerate(source.splitlines(), start=1):
        stripped = raw.strip()
        col = len(raw) - len(raw.lstrip()) + 1
        if not stripped or stripped[0] in "#;":
            continue
        if stripped.startswith("["):
            m = _SECTION.match(stripped)
            if not m:
                raise ParseError("malformed section header", lineno, col)
            section = m.group(1)
            if section in out:
                raise ParseError(f"duplicate section [{section}]", lineno, col)
            out[section] = {}
            continue
        m = _KEY.match(stripped)
        if not m:
            what = "invalid key name" if "=" in stripped else "expected 'key = value'"
            raise ParseError(what, lineno, col)
        if section is None:
            raise ParseError("key outside of any section", lineno, col)
        key, value = m.group(1), m.group(2)
        # inline comments
        value = re.split(r"\s[#;]", value, maxsplit=1)[0].strip()
        if key in out[section]:
            raise ParseError(f"duplicate key '{key}'", lineno, col)
        out[section][key] = (value, lineno)
    return out


def _convert(kind: str, text: str):
    if kind == "str":
        return text
    if kind == "int":
        return int(text, 10)
    if kind == "float":
        v = float(text)
        if not math.isfinite(v):
            raise ValueError("not finite")
        return v
    if kind == "floats":
        vals = tuple(float(p) for p in text.split(",") if p.strip())
        if not vals or not all(math.isfinite(v) for v in vals):
            raise ValueError("need a non-empty list of finite numbers")
        return vals
    if kind == "horizons":
        out = []
        for part in text.split(","):
            part = part.strip().lower()
            if not part:
                continue
            if "x" in part:
                t, s = part.split("x", 1)
                out.append((float(t), float(s)))
            else:
                out.append((float(part), float(part)))
        if not out:
            raise ValueError("need at least one horizon")
        return tuple(out)
    raise AssertionError(kind)


_FIELD_OF = {"output": "output_path", "alphas": "lemma_alphas", "betas": "lemma_betas"}


def parse_config(source: str, overrides: dict | None = None) -> ExperimentConfig:
    """Parse and validate a configuration.

    Parameters
    ----------
    source : str
        INI text (may be empty).
    overrides : dict, optional
        Field values that replace those from ``source`` (command-line flags).

    Raises
    ------
    ParseError
        Malformed text, with line and column.
    ValidationError
        Every violated constraint at once.
    """
    scanned = _scan(source)
    errors = []
    values: dict = {}
    for section, keys in scanned.items():
        if section not in _SCHEMA:
            errors.append(f"unknown section [{section}]")
            continue
        for key, (text, lineno) in keys.items():
            if key not in _SCHEMA[section]:
                errors.append(f"line {lineno}: unknown key '{key}' in [{section}]")
                continue
            try:
                values[_FIELD_OF.get(key, key)] = _convert(_SCHEMA[section][key], text)
            except ValueError as exc:
                errors.append(f"line {lineno}: bad value for {key}: {text!r} ({exc})")
    for k, v in (overrides or {}).items():
        if v is not None:
            values[k] = v
    return validate(values, errors)


def validate(values: dict, errors: list | None = None) -> ExperimentConfig:
    """Build a config from field values, collecting every violation."""
    errors = list(errors or [])
    warnings = []
    kind = values.get("kind", "")
    if kind not in KINDS:
        errors.append(f"kind must be one of {', '.join(KINDS)} (got {kind!r})")
        kind = None
    if kind is not None:
        grid_default, step_default = _DEFAULT_GRID[kind]
        values.setdefault("horizons", tuple(grid_default))
        values.setdefault("cell_step", step_default)
        values.setdefault("replications", _DEFAULT_REPS.get(kind, 1))
        if kind == "bessel-check":
            values.setdefault("samples", 200)

    a, b = values.get("alpha", 0.55), values.get("beta", 0.55)
    for name, h in (("alpha", a), ("beta", b)):
        if not 0.5 < h < 1:
            errors.append(f"{name}={h} must lie in (1/2, 1)")
    regime = 0.5 < a < 0.625 and 0.5 < b < 0.625
    if not regime and kind is not None:
        msg = (
            f"(alpha, beta) = ({a}, {b}) outside the theorem regime (1/2, 5/8) "
            f"required by {kind}"
        )
        if kind in STRICT_REGIME_KINDS:
            errors.append(msg)
        elif kind in WARN_REGIME_KINDS:
            warnings.append(msg)
    theta = values.get("theta", 1.0)
    if not theta > 0:
        errors.append(f"theta={theta} must be > 0")
    step = values.get("cell_step", 1.0)
    if not step > 0:
        errors.append(f"cell_step={step} must be > 0")
    horizons = tuple(tuple(float(x) for x in h) for h in values.get("horizons", ()))
    values["horizons"] = horizons
    if not horizons:
        errors.append("horizons must be non-empty")
    for t, s in horizons:
        if not (t > 0 and s > 0):
            errors.append(f"horizon ({t}, {s}) must be positive")
        elif step > 0 and (t < step or s < step):
            errors.append(f"horizon ({t}, {s}) is shorter than cell_step={step}")
    reps = values.get("replications", 1)
    if not (isinstance(reps, int) and reps >= 1):
        errors.append(f"replications={reps} must be an integer >= 1")
    seed = values.get("seed", 0)
    if not (isinstance(seed, int) and 0 <= seed < 2**64):
        errors.append(f"seed={seed} must be an integer in [0, 2^64)")
    eps = values.get("epsilon", 0.05)
    if not eps >= 0:
        errors.append(f"epsilon={eps} must be >= 0")
    samples = values.get("samples", 100000)
    if not (isinstance(samples, int) and samples >= 2):
        errors.append(f"samples={samples} must be an integer >= 2")
    for key in ("lemma_alphas", "lemma_betas"):
        for h in values.get(key, ()):
            if not 0.5 < h < 1:
                errors.append(f"{key} entry {h} must lie in (1/2, 1)")
    if kind == "lemma-integral":
        for h in tuple(values.get("lemma_alphas", ())) + tuple(values.get("lemma_betas", ())):
            if 0.5 < h < 1 and not h < 0.625:
                warnings.append(f"lemma parameter {h} outside (1/2, 5/8)")
    if not values.get("output_path", "x"):
        errors.append("output must be a non-empty path")

    allow_slow = bool(values.get("allow_slow", False))
    if kind in CHAOS_KINDS + SIMULATION_KINDS and step > 0 and not allow_slow:
        cap = CHAOS_CELL_CAP if kind in CHAOS_KINDS else SIMULATION_CELL_CAP
        for t, s in horizons:
            nt, ns = max(1, round(t / step)), max(1, round(s / step))
            if max(nt, ns) > cap:
                if kind in CHAOS_KINDS:
                    cost = f"~{2.0 * (nt * ns) ** 3:.1e} flops and {8.0 * (nt * ns) ** 2 / 2**20:.0f} MiB per matrix"
                else:
                    cost = f"~{float(nt * ns) ** 2:.1e} flops per replication"
                errors.append(
                    f"horizon ({t}, {s}) with cell_step={step} needs {nt}x{ns} cells, above the "
                    f"cap of {cap} per side for {kind} ({cost}); pass --i-know-this-is-slow to run anyway"
                )

    if errors:
        raise ValidationError(errors)
    values["warnings"] = tuple(warnings)
    return ExperimentConfig(**values)
