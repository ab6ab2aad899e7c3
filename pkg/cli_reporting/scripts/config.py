"""
Run configurations, built from command-line flags or from archived JSON files.

An archived report carries its configuration under "config", so a report file is
accepted wherever a config file is.
"""
import os
from dataclasses import dataclass, field, replace

from lattice_spaces.scripts.errors import LatticeInputError
from lattice_spaces.scripts.serialization import load_json
from lattice_spaces.scripts import settings

COMMANDS = ("rho", "tensor-norm", "factorize", "extend", "mz-sweep", "verify")
TOLERANCE_NAMES = ("oracle", "estimator", "residual")


def default_tolerances():
    """The environment defaults of settings.py."""
    return {
        "oracle": settings.ORACLE_TOLERANCE,
        "estimator": settings.ESTIMATOR_TOLERANCE,
        "residual": settings.RESIDUAL_TOLERANCE,
    }


@dataclass(frozen=True)
class RunConfig:
    """
    Everything needed to reproduce a run.

    command (string): one of COMMANDS
    inputs (dict): input paths by role. E.g.: {"op": "data/T.json"}
    params (dict): exponents, sizes and flags of the command
    seed (int): seed of every stochastic estimator
    tolerances (dict): relative oracle and estimator tolerances, absolute residual tolerance
    output (string): path of the JSON report
    csv (string): path of the CSV table, for sweeps
    threads (int): worker threads of the orchestrator
    quiet (bool): suppress progress output
    """
    command: str
    seed: int
    inputs: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=default_tolerances)
    output: str = ""
    csv: str = ""
    threads: int = 1
    quiet: bool = False

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise LatticeInputError(f"unknown command {self.command!r}, expected one of {', '.join(COMMANDS)}")
        if self.seed is None or isinstance(self.seed, bool) or int(self.seed) != self.seed:
            raise LatticeInputError(f"every run needs an integer seed, got {self.seed!r}")
        tolerances = default_tolerances()
        tolerances.update(self.tolerances or {})
        unknown = set(tolerances) - set(TOLERANCE_NAMES)
        if unknown:
            raise LatticeInputError(f"unknown tolerances: {', '.join(sorted(unknown))}")
        for name, value in tolerances.items():
            if not float(value) > 0:
                raise LatticeInputError(f"tolerance {name} must be positive, got {value}")
        if int(self.threads) < 1:
            raise LatticeInputError(f"threads must be at least 1, got {self.threads}")
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "tolerances", {name: float(value) for name, value in tolerances.items()})
        object.__setattr__(self, "inputs", dict(self.inputs or {}))
        object.__setattr__(self, "params", dict(self.params or {}))
        object.__setattr__(self, "threads", int(self.threads))
        if not self.output:
            object.__setattr__(self, "output", os.path.join("results", f"{self.command}.json"))

    def tolerance(self, name):
        """One of the three tolerances by name."""
        return self.tolerances[name]

    def input_path(self, role):
        """Path of a required input."""
        path = self.inputs.get(role)
        if not path:
            raise LatticeInputError(f"{self.command} needs the input --{role}")
        return path

    def param(self, name, default=None, required=False):
        """A command parameter; missing required ones are input errors."""
        value = self.params.get(name)
        if value is None:
            if required:
                raise LatticeInputError(f"{self.command} needs the parameter --{name.replace('_', '-')}")
            return default
        return value

    def resolved(self, folder):
        """Copy with relative input paths taken relative to folder, unless they exist as given."""
        inputs = {role: path if os.path.isabs(path) or os.path.exists(path) else os.path.join(folder, path)
                  for role, path in self.inputs.items()}
        return replace(self, inputs=inputs)

    def to_dict(self):
        """Echo of the configuration; output paths and display flags are left out."""
        return {
            "command": self.command,
            "inputs": self.inputs,
            "params": self.params,
            "seed": self.seed,
            "tolerances": self.tolerances,
        }


def config_from_dict(data, **overrides):
    """Builds a RunConfig from an archived config or report.

    Args:
        data (dict): decoded JSON with command, seed and optionally inputs, params, tolerances
        overrides: fields replacing the archived ones. E.g.: output, quiet

    Returns:
        RunConfig
    """
    if isinstance(data, dict) and isinstance(data.get("config"), dict):
        data = data["config"]
    if not isinstance(data, dict):
        raise LatticeInputError("a run configuration must be a JSON object")
    if "command" not in data:
        raise LatticeInputError("a run configuration needs a command")
    if "seed" not in data:
        raise LatticeInputError("a run configuration needs a seed")
    fields = {key: data[key] for key in ("command", "seed", "inputs", "params", "tolerances") if key in data}
    fields.update({key: value for key, value in overrides.items() if value is not None})
    return RunConfig(**fields)


def read_config(path, **overrides):
    """Loads a config file; relative inputs are resolved from the file's folder."""
    config = config_from_dict(load_json(path), **overrides)
    return config.resolved(os.path.dirname(os.path.abspath(path)))
