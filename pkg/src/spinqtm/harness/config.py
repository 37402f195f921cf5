"""Sweep configuration files (YAML) and grid expansion."""

from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from ..cycle import FOUR_STROKE, TWO_STROKE, CycleConfig
from ..spinchain import ChainSpec, NoSymPairSpec, random_chain_spec

__all__ = [
    "ANALYSES",
    "ConfigError",
    "Axis",
    "SweepConfig",
    "load_config",
    "parse_config",
    "spec_hash",
]

ANALYSES = ("thermo", "regime", "ansatz", "lowtemp", "mixing")
CONFIG_FIELDS = ("beta1", "beta2", "tau1", "tau2")
CHAIN_FIELDS = ("E1", "EN", "ratio", "J", "K", "F")
NOSYM_FIELDS = ("E1", "E2", "ratio", "J_R", "J_I", "K_R", "K_I", "F")


class ConfigError(ValueError):
    """Malformed sweep configuration."""


@dataclass(frozen=True)
class Axis:
    """One sweep axis; several fields may move together (tuple-valued points)."""

    fields: tuple
    values: tuple

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class SweepConfig:
    name: str
    model: str  # "chain" or "nosym"
    spec: object
    config: CycleConfig
    axes: tuple
    analyses: tuple
    table: str
    sidecar: bool = True
    seed: int = 0
    tol: float = 1e-12
    raw: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def n_points(self) -> int:
        return int(np.prod([len(a) for a in self.axes])) if self.axes else 1

    def points(self):
        """Grid points in row-major order (first axis slowest) as field dicts."""
        grids = [a.values for a in self.axes]
        for combo in itertools.product(*grids):
            out = {}
            for axis, val in zip(self.axes, combo):
                out.update(zip(axis.fields, val))
            yield out

    def resolve(self, point: dict):
        """(spec, config) at one grid point."""
        spec, cfg = self.spec, self.config
        cfg_kw = {k: v for k, v in point.items() if k in CONFIG_FIELDS}
        if cfg_kw:
            try:
                cfg = cfg.replace(**cfg_kw)
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
        spec_kw = {k: v for k, v in point.items() if k not in CONFIG_FIELDS}
        if spec_kw:
            spec = _apply_spec_fields(self.model, spec, spec_kw)
        return spec, cfg


def _apply_spec_fields(model, spec, kw):
    kw = dict(kw)
    if model == "nosym":
        if "ratio" in kw:
            E1 = kw.get("E1", spec.E1)
            kw["E2"] = kw.pop("ratio") * E1
        return spec.replace(**kw)
    E = np.array(spec.E, dtype=float)
    if "E1" in kw:
        E[0] = kw.pop("E1")
    if "ratio" in kw:
        E[-1] = kw.pop("ratio") * E[0]
    if "EN" in kw:
        E[-1] = kw.pop("EN")
    return spec.replace(E=E, **kw)


def _grid(d: dict, where: str) -> tuple:
    if "values" in d:
        vals = d["values"]
        if not isinstance(vals, list) or not vals:
            raise ConfigError(f"{where}: values must be a non-empty list")
        return tuple(vals)
    try:
        start, stop = float(d["start"]), float(d["stop"])
    except KeyError:
        raise ConfigError(f"{where}: give either values or start/stop with step or num") from None
    if "num" in d:
        vals = np.linspace(start, stop, int(d["num"]))
    elif "step" in d:
        step = float(d["step"])
        if step <= 0:
            raise ConfigError(f"{where}: step must be positive")
        n = int(round((stop - start) / step))
        vals = start + step * np.arange(n + 1)
        # clean up accumulated rounding so grid values print nicely
        vals = np.round(vals, 12)
    else:
        raise ConfigError(f"{where}: give step or num")
    if len(vals) == 0:
        raise ConfigError(f"{where}: empty grid")
    return tuple(float(v) for v in vals)


def _parse_axis(d: dict, model: str, k: int) -> Axis:
    where = f"axes[{k}]"
    if not isinstance(d, dict) or "field" not in d:
        raise ConfigError(f"{where}: needs a 'field' entry")
    fields = d["field"]
    fields = tuple(fields) if isinstance(fields, list) else (fields,)
    allowed = CONFIG_FIELDS + (NOSYM_FIELDS if model == "nosym" else CHAIN_FIELDS)
    for f in fields:
        if f not in allowed:
            raise ConfigError(f"{where}: unknown field {f!r} (allowed: {', '.join(allowed)})")
    vals = _grid(d, where)
    if len(fields) == 1:
        vals = tuple((float(v),) for v in vals)
    else:
        for v in vals:
            if not isinstance(v, list) or len(v) != len(fields):
                raise ConfigError(f"{where}: each value must be a list of {len(fields)} numbers")
        vals = tuple(tuple(float(x) for x in v) for v in vals)
    for v in vals:
        if not all(np.isfinite(v)):
            raise ConfigError(f"{where}: non-finite grid value {v}")
    return Axis(fields, vals)


def _parse_spec(d: dict, model: str, seed: int):
    if model == "nosym":
        try:
            return NoSymPairSpec(**d)
        except TypeError as exc:
            raise ConfigError(f"spec: {exc}") from None
    if "random" in d:
        r = dict(d["random"])
        rng = np.random.default_rng(seed)
        N = int(r.pop("N"))
        return random_chain_spec(rng, N, **r)
    d = dict(d)
    N = int(d.get("N", 0))
    E = d.get("E", 1.0)
    if isinstance(E, dict):
        if "linear" not in E:
            raise ConfigError("spec.E: mapping form must be {linear: [first, last]}")
        E = np.linspace(E["linear"][0], E["linear"][1], N)
    else:
        E = np.array(np.broadcast_to(np.asarray(E, dtype=float), (N,)))
        for key, pos in (("E1", 0), ("EN", -1)):
            if key in d:
                E[pos] = d[key]
    try:
        return ChainSpec(N, E, d.get("J", 0.0), d.get("K", 0.0), d.get("F", 0.0))
    except ValueError as exc:
        raise ConfigError(f"spec: {exc}") from None


def parse_config(raw: dict, name: str = "sweep") -> SweepConfig:
    if not isinstance(raw, dict):
        raise ConfigError("top level must be a mapping")
    model = raw.get("model", "chain")
    if model not in ("chain", "nosym"):
        raise ConfigError(f"model must be 'chain' or 'nosym', got {model!r}")
    seed = int(raw.get("seed", 0))
    if not 0 <= seed < 2 ** 64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    spec = _parse_spec(raw.get("spec", {}), model, seed)
    c = dict(raw.get("config", {}))
    c.setdefault("mode", FOUR_STROKE)
    if c["mode"] not in (FOUR_STROKE, TWO_STROKE):
        raise ConfigError(f"config.mode must be {FOUR_STROKE!r} or {TWO_STROKE!r}")
    try:
        cfg = CycleConfig(**c)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"config: {exc}") from None
    axes = tuple(_parse_axis(a, model, k) for k, a in enumerate(raw.get("axes", [])))
    analyses = tuple(raw.get("analyses", ["thermo", "regime"]))
    for a in analyses:
        if a not in ANALYSES:
            raise ConfigError(f"unknown analysis {a!r} (allowed: {', '.join(ANALYSES)})")
    if "lowtemp" in analyses and (model != "chain" or cfg.mode != TWO_STROKE):
        raise ConfigError("the lowtemp analysis needs a chain in two-stroke mode")
    out = raw.get("output", {})
    table = out.get("table", f"{raw.get('name', name)}.csv")
    return SweepConfig(
        name=raw.get("name", name),
        model=model,
        spec=spec,
        config=cfg,
        axes=axes,
        analyses=analyses,
        table=table,
        sidecar=bool(out.get("sidecar", True)),
        seed=seed,
        tol=float(raw.get("tol", 1e-12)),
        raw=raw,
    )


def load_config(path) -> SweepConfig:
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return parse_config(raw, name=path.stem)


def spec_hash(spec) -> str:
    """sha256 of the canonical JSON form of a spec."""
    blob = json.dumps(spec.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()
