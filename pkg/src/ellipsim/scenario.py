"""Scenario configuration: schema, INI parsing, presets and validation.

A scenario file fully determines a run.  Files use INI sections mirroring
the field groups below; every key has a documented default, and the
resolved configuration is echoed next to the outputs so a run can be
reproduced from its artifacts alone.
"""

import configparser
from dataclasses import dataclass, fields, replace

import numpy as np

__all__ = ["PRESETS", "Scenario", "ScenarioError", "load_scenario", "preset"]

MODELS = ("micro", "q-maxwellian", "q-monokinetic", "rho", "diffusive")
FLOW_KINDS = ("none", "top-bottom", "rotational", "cavity-demo", "file")
BC_KINDS = ("neumann", "reflective")
STUDIES = ("none", "stationary")


class ScenarioError(ValueError):
    """Invalid scenario; ``field`` names the offending key."""

    def __init__(self, field_name, message):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass
class Scenario:
    """Flat, fully resolved run description."""

    # run
    model: str = "q-monokinetic"
    t_end: float = 1.0
    snapshots: tuple = ()
    seed: int = 0
    bc: str = "neumann"
    study: str = "none"
    study_noise: tuple = (0.2, 1.0, 2.0, 5.0, 10.0)
    # domain
    domain: tuple = (-1.0, -1.0, 1.0, 1.0)
    # potential
    L: float = 0.1
    D: float = 0.05
    eps0: float = 1.0
    interaction: bool = True
    # dynamics
    gamma: float = 1.0
    gamma_bar: float = 1.0
    m: float = 1.0
    I_c: float = 1.0
    A: float = 0.0
    B: float = 0.0
    # external potentials
    v1: str = "zero"
    v2: str = "zero"
    # flow
    flow: str = "none"
    flow_path: str = ""
    # grids
    h: float = 0.1
    ntheta: int = 60
    # initial condition
    support: tuple = (-0.5, -0.5, 0.5, 0.5)
    theta0: float = 0.0
    v0: tuple = (0.0, 0.0)
    omega0: float = 0.0
    # microscopic runs
    n: int = 100
    realizations: int = 1
    dt: float = 1e-3
    wall_ghosts: bool = False
    # output
    out_dir: str = "out"

    def validate(self):
        if self.model not in MODELS:
            raise ScenarioError("run.model", f"unknown model {self.model!r}")
        if self.t_end <= 0:
            raise ScenarioError("run.t_end", "must be positive")
        snaps = tuple(float(t) for t in self.snapshots)
        if any(t < 0 or t > self.t_end + 1e-12 for t in snaps):
            raise ScenarioError("run.snapshots", "must lie in [0, t_end]")
        if tuple(sorted(snaps)) != snaps:
            raise ScenarioError("run.snapshots", "must be sorted")
        if self.bc not in BC_KINDS:
            raise ScenarioError("run.bc", f"unknown boundary {self.bc!r}")
        if self.study not in STUDIES:
            raise ScenarioError("run.study", f"unknown study {self.study!r}")
        if self.study == "stationary" and self.model != "q-maxwellian":
            raise ScenarioError("run.study",
                                "stationary study needs model q-maxwellian")
        x0, y0, x1, y1 = self.domain
        if not (x1 > x0 and y1 > y0):
            raise ScenarioError("domain.rect", "degenerate rectangle")
        if not (self.L >= self.D > 0):
            raise ScenarioError("potential.L", "requires L >= D > 0")
        if self.eps0 <= 0:
            raise ScenarioError("potential.eps0", "must be positive")
        if self.m <= 0 or self.I_c <= 0:
            raise ScenarioError("dynamics.m", "m and I_c must be positive")
        if min(self.gamma, self.gamma_bar, self.A, self.B) < 0:
            raise ScenarioError("dynamics.gamma", "rates must be nonnegative")
        if self.flow not in FLOW_KINDS:
            raise ScenarioError("flow.kind", f"unknown flow {self.flow!r}")
        if self.flow == "file" and not self.flow_path:
            raise ScenarioError("flow.path", "flow kind 'file' needs a path")
        if self.h <= 0:
            raise ScenarioError("grid.h", "must be positive")
        if self.ntheta < 1:
            raise ScenarioError("grid.ntheta", "must be at least 1")
        sx0, sy0, sx1, sy1 = self.support
        if not (sx1 > sx0 and sy1 > sy0):
            raise ScenarioError("initial.support", "degenerate rectangle")
        if sx0 < x0 - 1e-12 or sy0 < y0 - 1e-12 \
                or sx1 > x1 + 1e-12 or sy1 > y1 + 1e-12:
            raise ScenarioError("initial.support", "must lie inside the domain")
        if self.model == "micro":
            if self.n < 1:
                raise ScenarioError("micro.n", "need at least one particle")
            if self.realizations < 1:
                raise ScenarioError("micro.realizations", "need at least one")
            if self.dt <= 0:
                raise ScenarioError("micro.dt", "must be positive")
        if self.model == "diffusive":
            if 2.0 * self.gamma <= self.A**2:
                raise ScenarioError("dynamics.A", "diffusive limit needs 2 gamma > A^2")
            if 2.0 * self.gamma_bar <= self.B**2:
                raise ScenarioError("dynamics.B",
                                    "diffusive limit needs 2 gamma_bar > B^2")
        return self


# section/key layout of the INI schema; values are Scenario field names
_SCHEMA = {
    "run": {"model": "model", "t_end": "t_end", "snapshots": "snapshots",
            "seed": "seed", "bc": "bc", "study": "study",
            "study_noise": "study_noise"},
    "domain": {"rect": "domain"},
    "potential": {"l": "L", "d": "D", "eps0": "eps0",
                  "interaction": "interaction"},
    "dynamics": {"gamma": "gamma", "gamma_bar": "gamma_bar", "m": "m",
                 "i_c": "I_c", "a": "A", "b": "B"},
    "external": {"v1": "v1", "v2": "v2"},
    "flow": {"kind": "flow", "path": "flow_path"},
    "grid": {"h": "h", "ntheta": "ntheta"},
    "initial": {"support": "support", "theta0": "theta0", "v0": "v0",
                "omega0": "omega0"},
    "micro": {"n": "n", "realizations": "realizations", "dt": "dt",
              "wall_ghosts": "wall_ghosts"},
    "output": {"dir": "out_dir"},
}

_FIELD_TYPES = {f.name: f.type for f in fields(Scenario)}


def _parse_value(name, text):
    kind = _FIELD_TYPES[name]
    text = text.strip()
    try:
        if kind is float:
            return float(text)
        if kind is int:
            return int(text)
        if kind is bool:
            if text.lower() in ("true", "yes", "1", "on"):
                return True
            if text.lower() in ("false", "no", "0", "off"):
                return False
            raise ValueError(f"not a boolean: {text!r}")
        if kind is tuple:
            return tuple(float(tok) for tok in text.replace(",", " ").split())
        return text
    except ValueError as exc:
        raise ScenarioError(name, str(exc)) from exc


def load_scenario(path_or_stream, base: Scenario = None) -> Scenario:
    """Parse an INI scenario file on top of ``base`` (default: defaults)."""
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        if hasattr(path_or_stream, "read"):
            parser.read_file(path_or_stream)
        else:
            with open(path_or_stream) as fh:
                parser.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ScenarioError("file", str(exc)) from exc

    sc = base if base is not None else Scenario()
    updates = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ScenarioError(section, "unknown section")
        for key, text in parser[section].items():
            if key not in _SCHEMA[section]:
                raise ScenarioError(f"{section}.{key}", "unknown key")
            name = _SCHEMA[section][key]
            updates[name] = _parse_value(name, text)
    return replace(sc, **updates)


def dump_scenario(sc: Scenario, stream):
    """Write the resolved scenario in the same INI schema."""
    parser = configparser.ConfigParser()
    for section, keys in _SCHEMA.items():
        parser[section] = {}
        for key, name in keys.items():
            value = getattr(sc, name)
            if isinstance(value, tuple):
                text = " ".join(repr(float(v)) for v in value)
            elif isinstance(value, bool):
                text = "true" if value else "false"
            elif isinstance(value, float):
                text = repr(value)
            else:
                text = str(value)
            parser[section][key] = text
    parser.write(stream)


def _stationary_preset() -> Scenario:
    return Scenario(
        model="q-maxwellian", t_end=40.0, snapshots=(40.0,), bc="reflective",
        study="stationary", study_noise=(0.2, 1.0, 2.0, 5.0, 10.0),
        domain=(-6.0, -6.0, 6.0, 6.0), L=1.0, D=0.5, eps0=1.0,
        gamma=0.0, gamma_bar=0.0, m=1.0, I_c=1.0, A=2.0, B=2.0,
        v1="quadratic", v2="sine", flow="none",
        h=0.2, ntheta=8, support=(1.5, 1.5, 3.5, 3.5), theta0=0.0,
        n=200, realizations=16, out_dir="out-stationary")


def _top_bottom_preset() -> Scenario:
    return Scenario(
        model="q-monokinetic", t_end=5.0, snapshots=(0.75, 1.5, 5.0),
        domain=(-1.5, -1.5, 1.5, 1.5), L=0.1, D=0.05, eps0=1.0,
        gamma=1.0, gamma_bar=1.0, m=1.0, I_c=0.001, A=0.0, B=0.0,
        flow="top-bottom", h=0.05, ntheta=60,
        support=(-1.0, -1.0, 1.0, 1.0), theta0=0.0,
        n=1000, realizations=32, dt=1e-3, out_dir="out-top-bottom")


def _rotational_preset() -> Scenario:
    return Scenario(
        model="q-monokinetic", t_end=3.0, snapshots=(1.5, 2.5, 3.0),
        domain=(-1.5, -1.5, 1.5, 1.5), L=0.1, D=0.05, eps0=1.0,
        gamma=1.0, gamma_bar=1.0, m=1.0, I_c=0.001, A=0.0, B=0.0,
        flow="rotational", h=0.02, ntheta=60,
        support=(0.2, -0.25, 0.7, 0.25), theta0=0.5 * np.pi,
        n=1000, realizations=32, dt=1e-3, out_dir="out-rotational")


def _cavity_preset() -> Scenario:
    return Scenario(
        model="rho", t_end=5.0, snapshots=(2.0, 3.5, 5.0), bc="reflective",
        domain=(0.0, 0.0, 1.0, 1.0), L=0.05, D=0.025, eps0=1.0,
        gamma=10.0, gamma_bar=10.0, m=1.0, I_c=0.001, A=0.0, B=0.0,
        flow="cavity-demo", h=0.005, ntheta=60,
        support=(0.4, 0.4, 0.6, 0.6), theta0=0.0,
        n=1000, realizations=128, dt=1e-3, wall_ghosts=True,
        out_dir="out-cavity")


PRESETS = {
    "stationary": _stationary_preset,
    "top-bottom": _top_bottom_preset,
    "rotational": _rotational_preset,
    "cavity": _cavity_preset,
}


def preset(name) -> Scenario:
    if name not in PRESETS:
        raise ScenarioError("run.preset", f"unknown preset {name!r}")
    return PRESETS[name]()
