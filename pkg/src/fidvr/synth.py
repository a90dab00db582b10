"""Seeded synthetic post-fault voltage waveforms.

Each archetype switches on a subset of three closed-form terms on top of
nominal voltage:

* recovery: ``-d`` held for ``stall_time`` then ``-d exp(-(t - stall)/tau_rec)``
* oscillation: ``a_osc exp(-t/tau_osc) sin(2 pi f t)``
* overshoot: ``a_ov exp(-t/tau_ov) (1 - exp(-t/tau_rise))``

plus optional smooth noise (three seeded low-frequency sinusoids).
"""

from __future__ import annotations

import json
import os
from importlib import resources
from dataclasses import dataclass, field, replace
from typing import Mapping

import numpy as np

from .trace import VoltageTrace, load_trace, write_trace

__all__ = [
    "ARCHETYPES",
    "DEFAULT_PARAMS",
    "ScenarioSpec",
    "Scenario",
    "generate_scenario",
    "generate_corpus",
    "build_corpus",
    "write_corpus",
    "read_corpus",
    "builtin_template",
    "load_template",
]

ARCHETYPES = ("oscillatory", "over_voltage", "over_voltage_oscillatory", "fidvr", "nominal")

# archetype -> active terms
_TERMS = {
    "oscillatory": ("recovery", "oscillation"),
    "over_voltage": ("recovery", "overshoot"),
    "over_voltage_oscillatory": ("recovery", "oscillation", "overshoot"),
    "fidvr": ("recovery",),
    "nominal": (),
}

DEFAULT_PARAMS = {
    "dip_depth": 0.0,
    "recovery_tau": 1.0,
    "stall_time": 0.0,
    "osc_freq": 1.0,
    "osc_amp": 0.0,
    "osc_decay": 1.0,
    "overshoot_amp": 0.0,
    "overshoot_decay": 1.0,
    "overshoot_rise": 0.05,
    "noise_amp": 0.0,
}

_MASK64 = (1 << 64) - 1
# smooth-noise band, Hz
_NOISE_BAND = (0.05, 0.5)


@dataclass(frozen=True)
class ScenarioSpec:
    archetype: str
    params: Mapping[str, float] = field(default_factory=dict)
    seed: int = 0
    dt: float = 0.01
    duration: float = 10.0

    def __post_init__(self):
        if self.archetype not in _TERMS:
            raise ValueError(f"unknown archetype {self.archetype!r}")
        unknown = set(self.params) - set(DEFAULT_PARAMS)
        if unknown:
            raise ValueError(f"unknown scenario parameters: {sorted(unknown)}")
        if not (self.dt > 0 and self.duration > 0):
            raise ValueError("dt and duration must be positive")
        p = self.full_params()
        if not 0 <= p["dip_depth"] < 1:
            raise ValueError("dip_depth must lie in [0, 1)")
        for key in ("osc_amp", "overshoot_amp", "noise_amp", "stall_time"):
            if p[key] < 0:
                raise ValueError(f"{key} must be non-negative")
        for key in ("recovery_tau", "osc_decay", "overshoot_decay", "overshoot_rise"):
            if not p[key] > 0:
                raise ValueError(f"{key} must be positive")
        object.__setattr__(self, "seed", int(self.seed) & _MASK64)

    def full_params(self) -> dict:
        return {**DEFAULT_PARAMS, **{k: float(v) for k, v in self.params.items()}}

    def to_dict(self) -> dict:
        return {"archetype": self.archetype, "params": dict(sorted(self.params.items())),
                "seed": self.seed, "dt": self.dt, "duration": self.duration}

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioSpec":
        return cls(data["archetype"], dict(data.get("params", {})), int(data.get("seed", 0)),
                   float(data.get("dt", 0.01)), float(data.get("duration", 10.0)))


@dataclass(frozen=True, eq=False)
class Scenario:
    scenario_id: str
    trace: VoltageTrace
    spec: ScenarioSpec


def generate_scenario(spec: ScenarioSpec) -> VoltageTrace:
    """Render ``spec`` as a post-fault trace starting at t = 0."""
    p = spec.full_params()
    terms = _TERMS[spec.archetype]
    n = int(round(spec.duration / spec.dt)) + 1
    t = spec.dt * np.arange(n)
    v = np.ones(n)
    if "recovery" in terms and p["dip_depth"] > 0:
        lag = np.maximum(t - p["stall_time"], 0.0)
        v -= p["dip_depth"] * np.exp(-lag / p["recovery_tau"])
    if "oscillation" in terms and p["osc_amp"] > 0:
        v += p["osc_amp"] * np.exp(-t / p["osc_decay"]) * np.sin(2 * np.pi * p["osc_freq"] * t)
    if "overshoot" in terms and p["overshoot_amp"] > 0:
        v += (p["overshoot_amp"] * np.exp(-t / p["overshoot_decay"])
              * (1 - np.exp(-t / p["overshoot_rise"])))
    if p["noise_amp"] > 0:
        rng = np.random.default_rng(spec.seed)
        freqs = rng.uniform(*_NOISE_BAND, size=3)
        phases = rng.uniform(0, 2 * np.pi, size=3)
        v += p["noise_amp"] / 3 * np.sin(2 * np.pi * freqs[:, None] * t + phases[:, None]).sum(axis=0)
    return VoltageTrace(0.0, spec.dt, np.maximum(v, 0.0))


def generate_corpus(count: int, template: ScenarioSpec, jitter: float = 0.0,
                    master_seed: int = 0, prefix: str | None = None) -> list[Scenario]:
    """Jittered copies of ``template``.

    Scenario ``k`` uses seed ``master_seed ^ k``; every parameter is scaled
    by an independent factor drawn uniformly from ``[1 - jitter, 1 + jitter]``.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if jitter < 0:
        raise ValueError("jitter must be non-negative")
    prefix = template.archetype if prefix is None else prefix
    names = sorted(template.params)
    out = []
    for k in range(count):
        seed = (master_seed ^ k) & _MASK64
        rng = np.random.default_rng(seed)
        factors = rng.uniform(1 - jitter, 1 + jitter, size=len(names))
        params = {name: float(template.params[name] * f) for name, f in zip(names, factors)}
        if "dip_depth" in params:
            params["dip_depth"] = min(params["dip_depth"], 0.99)
        spec = replace(template, params=params, seed=seed)
        out.append(Scenario(f"{prefix}-{k:05d}", generate_scenario(spec), spec))
    return out


def build_corpus(template: dict, master_seed: int | None = None) -> list[Scenario]:
    """Build a corpus from a template document.

    The template is either a single group or ``{"groups": [...]}``; a group
    holds ``archetype``, ``params``, ``count``, ``jitter`` and optional
    ``prefix``, ``dt``, ``duration`` and ``seed_offset``. Group seeds are
    ``master_seed + seed_offset``.
    """
    if master_seed is None:
        master_seed = int(template.get("master_seed", 0))
    groups = template["groups"] if "groups" in template else [template]
    corpus = []
    for g in groups:
        spec = ScenarioSpec(g["archetype"], dict(g.get("params", {})), 0,
                            float(g.get("dt", template.get("dt", 0.01))),
                            float(g.get("duration", template.get("duration", 10.0))))
        corpus += generate_corpus(int(g.get("count", 1)), spec, float(g.get("jitter", 0.0)),
                                  master_seed + int(g.get("seed_offset", 0)), g.get("prefix"))
    ids = [s.scenario_id for s in corpus]
    if len(set(ids)) != len(ids):
        raise ValueError("corpus template yields duplicate scenario ids")
    return corpus


def write_corpus(corpus, out_dir) -> str:
    """Write one CSV per scenario plus ``manifest.json``; returns the manifest path."""
    os.makedirs(out_dir, exist_ok=True)
    entries = []
    for sc in corpus:
        fname = f"{sc.scenario_id}.csv"
        write_trace(sc.trace, os.path.join(out_dir, fname))
        entries.append({"id": sc.scenario_id, "file": fname, **sc.spec.to_dict()})
    path = os.path.join(out_dir, "manifest.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({"scenarios": entries}, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return path


def read_corpus(corpus_dir) -> list[Scenario]:
    """Load a corpus written by :func:`write_corpus`."""
    path = os.path.join(corpus_dir, "manifest.json")
    with open(path, encoding="utf-8") as fh:
        manifest = json.load(fh)
    out = []
    for entry in manifest["scenarios"]:
        trace = load_trace(os.path.join(corpus_dir, entry["file"]))
        out.append(Scenario(entry["id"], trace, ScenarioSpec.from_dict(entry)))
    return out


BUILTIN_TEMPLATES = {"acceptance": "acceptance_corpus.json"}


def builtin_template(name: str) -> dict:
    """Corpus template shipped with the package (``"acceptance"``)."""
    try:
        fname = BUILTIN_TEMPLATES[name]
    except KeyError:
        raise ValueError(f"unknown builtin template {name!r}") from None
    return json.loads(resources.files("fidvr.data").joinpath(fname).read_text(encoding="utf-8"))


def load_template(source) -> dict:
    """A builtin template name or the path of a template JSON file."""
    if isinstance(source, str) and source in BUILTIN_TEMPLATES:
        return builtin_template(source)
    with open(source, encoding="utf-8") as fh:
        return json.load(fh)
