"""Loading and validating YAML experiment configurations."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema
import yaml

from .errors import ConfigError, HHError
from .landweber import ParameterVector
from .model import Conductances, Exponents, ModelConstants, TimeGrid

PRESETS = {
    "conductances": "conductances.yaml",
    "exponents": "exponents.yaml",
}
DEFAULT_EPSILONS = (1.25, 0.25, 0.05, 0.01, 0.002)


def _schema():
    text = resources.files("hhinverse.presets").joinpath("config.schema.json").read_text()
    return json.loads(text)


@dataclass(frozen=True)
class ExperimentConfig:
    consts: ModelConstants
    true_conductances: Conductances
    true_exponents: Exponents
    unknown: str
    initial_guess: ParameterVector
    grid: TimeGrid
    tau: float = 2.01
    epsilons: tuple = DEFAULT_EPSILONS
    seed: int = 0
    max_iterations: int = 500_000
    safeguard: bool = True
    sufficient_decrease: float = 0.0
    output_dir: str = "out"
    name: str = ""
    raw: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def truth(self):
        """True value of the unknown triple."""
        model = self.true_conductances if self.unknown == "conductances" else self.true_exponents
        return ParameterVector.of(model)

    @property
    def known(self):
        """The triple held fixed during inversion."""
        return self.true_exponents if self.unknown == "conductances" else self.true_conductances

    def snapshot(self):
        """Plain-data copy that :func:`config_from_dict` turns back into this config."""
        return {
            "name": self.name,
            "model": {k: getattr(self.consts, k) for k in
                      ("c_m", "e_na", "e_k", "e_l", "i_ext", "v0", "m0", "n0", "h0")},
            "truth": {"conductances": list(self.true_conductances.as_tuple()),
                      "exponents": list(self.true_exponents.as_tuple())},
            "unknown": self.unknown,
            "initial_guess": list(self.initial_guess.values),
            "grid": {"t_end": self.grid.t_end, "dt": self.grid.dt},
            "tau": self.tau,
            "epsilons": list(self.epsilons),
            "seed": self.seed,
            "max_iterations": self.max_iterations,
            "safeguard": self.safeguard,
            "sufficient_decrease": self.sufficient_decrease,
            "output_dir": self.output_dir,
        }

    def with_overrides(self, **changes):
        data = self.snapshot()
        for key, value in changes.items():
            if value is not None:
                data[key] = value
        return config_from_dict(data)


def _path_of(err):
    return "/".join(str(p) for p in err.absolute_path) or "<root>"


def config_from_dict(data) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a mapping at the top level")
    validator = jsonschema.Draft202012Validator(_schema())
    problems = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
    if problems:
        lines = [f"{_path_of(e)}: {e.message}" for e in problems]
        raise ConfigError("invalid configuration:\n  " + "\n  ".join(lines))
    try:
        grid = TimeGrid(float(data["grid"]["t_end"]), float(data["grid"]["dt"]))
        consts = ModelConstants(**{k: float(v) for k, v in data.get("model", {}).items()})
        true_g = Conductances(*data["truth"]["conductances"])
        true_e = Exponents(*data["truth"]["exponents"])
        unknown = data["unknown"]
        guess = ParameterVector(unknown, tuple(data.get("initial_guess", (0.0, 0.0, 0.0))))
        epsilons = tuple(float(e) for e in data.get("epsilons", DEFAULT_EPSILONS))
        if not all(math.isfinite(e) for e in epsilons):
            raise ConfigError("epsilons: every entry must be finite")
    except HHError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid configuration: {exc}") from exc
    return ExperimentConfig(
        consts=consts,
        true_conductances=true_g,
        true_exponents=true_e,
        unknown=unknown,
        initial_guess=guess,
        grid=grid,
        tau=float(data.get("tau", 2.01)),
        epsilons=epsilons,
        seed=int(data.get("seed", 0)),
        max_iterations=int(data.get("max_iterations", 500_000)),
        safeguard=bool(data.get("safeguard", True)),
        sufficient_decrease=float(data.get("sufficient_decrease", 0.0)),
        output_dir=str(data.get("output_dir", "out")),
        name=str(data.get("name", "")),
        raw=data,
    )


def load_config(source) -> ExperimentConfig:
    """Load a config from a YAML file path or a bundled preset name."""
    source = str(source)
    if source in PRESETS:
        text = resources.files("hhinverse.presets").joinpath(PRESETS[source]).read_text()
    else:
        path = Path(source)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {source!r}: {exc.strerror}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config is not valid YAML: {exc}") from exc
    return config_from_dict(data)
