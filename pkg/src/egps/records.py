"""Config files, run records, field dumps and sweep tables.

Floats are written with 17 significant digits so every file round-trips
bitwise.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import DomainError
from .gflow import SolverConfig
from .grid import TensorGrid
from .model import (Field, Harmonic, ModelParams, OpticalLattice, RadialPower,
                    Tabulated, Zero)
from .radial import RadialGrid

SCHEMA_VERSION = 1
SWEEP_COLUMNS = ["beta", "lambda", "eta", "regime", "iterations", "converged"]


def fmt(x: float) -> str:
    return "%.17g" % x


# -- potentials and grids ----------------------------------------------------

def format_potential(v) -> str | dict:
    if isinstance(v, Tabulated):
        return {"tabulated": [float(x) for x in v.values]}
    return str(v)


def parse_potential(text) -> object:
    """Parse ``zero``, ``harmonic:g[,g,g]``, ``lattice:V0,k`` or ``power:coef,exp``."""
    if isinstance(text, dict) and "tabulated" in text:
        return Tabulated(np.array(text["tabulated"], dtype=float))
    kind, _, args = str(text).strip().partition(":")
    kind = kind.strip().lower()
    try:
        nums = [float(a) for a in args.split(",")] if args.strip() else []
    except ValueError:
        raise DomainError(f"bad potential arguments {args!r}") from None
    if kind in ("zero", "none", "free"):
        return Zero()
    if kind == "harmonic" and nums:
        return Harmonic(tuple(nums))
    if kind == "lattice" and len(nums) == 2:
        return OpticalLattice(*nums)
    if kind == "power" and len(nums) == 2:
        return RadialPower(*nums)
    raise DomainError(f"cannot parse potential {text!r}")


def grid_from_spec(spec: dict):
    if spec["kind"] == "radial":
        return RadialGrid(int(spec["dim"]), float(spec["R"]), int(spec["M"]))
    if spec["kind"] == "tensor":
        return TensorGrid(int(spec["dim"]), tuple(tuple(e) for e in spec["extents"]),
                          tuple(spec["counts"]))
    raise DomainError(f"unknown grid kind {spec['kind']!r}")


def model_to_dict(m: ModelParams) -> dict:
    return {"dim": m.dim, "beta": m.beta, "lambda": m.lam, "c": m.c,
            "potential": format_potential(m.potential)}


def model_from_dict(d: dict) -> ModelParams:
    return ModelParams(int(d["dim"]), float(d["beta"]), float(d["lambda"]), float(d["c"]),
                       parse_potential(d["potential"]))


# -- run records -------------------------------------------------------------

@dataclass
class RunRecord:
    model: dict
    grid: dict
    config: dict
    result: dict
    initial_width: float | None = None
    schema_version: int = SCHEMA_VERSION
    extra: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "RunRecord":
        data = json.loads(text)
        if "schema_version" not in data:
            raise DomainError("run record has no schema_version")
        if data["schema_version"] != SCHEMA_VERSION:
            raise DomainError(f"unsupported run record schema {data['schema_version']!r}")
        return cls(**data)

    def model_params(self) -> ModelParams:
        return model_from_dict(self.model)

    def make_grid(self):
        return grid_from_spec(self.grid)

    def solver_config(self) -> SolverConfig:
        return SolverConfig(**self.config)


def result_summary(result, eta=None, theta=None, wall_time=None, backend=None) -> dict:
    return {
        "energy": result.energy,
        "chemical_potential": result.chemical_potential,
        "peak_value": result.peak_value,
        "peak_location": list(result.peak_location),
        "eta_theta": eta,
        "theta": theta,
        "classification": result.classification.value,
        "iterations": result.iterations,
        "converged": result.converged,
        "boundary_ratio": result.boundary_ratio,
        "wall_time": wall_time,
        "backend": backend,
    }


# -- field dumps -------------------------------------------------------------

def write_field_dump(f: Field, c: float, stream) -> None:
    g = f.grid
    names = ["r"] if g.is_radial else ["x", "y", "z"][: g.dim]
    stream.write(f"# schema={SCHEMA_VERSION}\n")
    stream.write(f"# dim={g.dim}\n")
    stream.write(f"# grid={json.dumps(g.spec(), sort_keys=True)}\n")
    stream.write(f"# c={fmt(c)}\n")
    stream.write(",".join(names + ["phi"]) + "\n")
    cols = g.coordinate_columns()
    for i, v in enumerate(f.values):
        stream.write(",".join([fmt(col[i]) for col in cols] + [fmt(v)]) + "\n")


def read_field_dump(stream) -> tuple[Field, float]:
    header = {}
    line = stream.readline()
    while line.startswith("#"):
        key, _, value = line[1:].strip().partition("=")
        header[key.strip()] = value.strip()
        line = stream.readline()
    for key in ("grid", "c"):
        if key not in header:
            raise DomainError(f"field dump header lacks {key!r}")
    grid = grid_from_spec(json.loads(header["grid"]))
    rows = list(csv.reader(stream))
    values = np.array([float(r[-1]) for r in rows if r])
    if values.size != grid.size:
        raise DomainError(f"field dump has {values.size} rows, grid needs {grid.size}")
    return Field(grid, values), float(header["c"])


# -- sweep tables ------------------------------------------------------------

def write_sweep_csv(cells, stream, meta: dict | None = None) -> None:
    stream.write(f"#schema={SCHEMA_VERSION}\n")
    for key, value in (meta or {}).items():
        stream.write(f"# {key}={value}\n")
    for cell in cells:
        if cell.boundary:
            stream.write(f"# boundary beta={fmt(cell.beta)} lambda={fmt(cell.lam)}\n")
    stream.write(",".join(SWEEP_COLUMNS) + "\n")
    for cell in sorted(cells, key=lambda c: (c.beta, c.lam)):
        eta = "" if cell.eta_theta is None else fmt(cell.eta_theta)
        stream.write(",".join([fmt(cell.beta), fmt(cell.lam), eta, cell.regime.value,
                               str(cell.iterations), "true" if cell.converged else "false"])
                     + "\n")


def read_sweep_csv(stream) -> list[dict]:
    lines = [ln for ln in stream if not ln.startswith("#")]
    return list(csv.DictReader(io.StringIO("".join(lines))))


# -- flat key = value config files -------------------------------------------

CONFIG_KEYS = {
    "dim": int, "radial": "bool", "beta": float, "lambda": float, "c": float,
    "R": float, "M": int, "n": str, "extent": str, "potential": str, "harmonic": str,
    "tau": float, "tol": float, "metric": str, "max_iter": int, "width": float,
    "theta": float, "linear_tol": float, "spread_window": int,
}


class ConfigError(ValueError):
    pass


def _to_bool(text):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def parse_config(text: str, source: str = "<config>") -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment. Errors name the line."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        if key not in CONFIG_KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        kind = CONFIG_KEYS[key]
        try:
            out[key] = _to_bool(value) if kind == "bool" else kind(value)
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: bad value for {key!r}: {exc}") from None
    return out
