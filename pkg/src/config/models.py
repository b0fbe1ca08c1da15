# src/config/models.py

"""
Experiment configuration: one validated model for every command, read from a flat
`key = value` file and/or command-line flags (flags win).
"""

import argparse
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, ValidationError, ValidationInfo, field_validator

from src.utils.errors import InvalidValue, IoFailure, UnknownCommand

COMMANDS = ("field-info", "directions", "rigidity", "directions-theorem", "exceptional",
            "charsum", "clique", "example-f25")
CLIQUE_MODES = ("verify", "catalog")
AUDIT_MODES = ("weil", "cor22", "cor23", "rou", "psi")

LIST_KEYS = ("cosets", "d_range", "primes", "coeffs", "table")


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    command: str
    action: Optional[str] = None

    # field and coset parameters
    p: Optional[int] = None
    n: int = 1
    q: Optional[int] = None
    d: Optional[int] = None
    cosets: List[int] = [0]
    coeffs: List[int] = []
    table: List[int] = []

    # exceptional search
    d_range: List[int] = []
    r_max: int = 2
    primes: List[int] = []

    # audits and cliques
    mode: Optional[str] = None
    count: int = 100
    seed: int = 0
    exact: bool = False
    rou_max_d: int = 10

    # caps
    field_cap: int = 2 ** 22
    search_cap: int = 2 ** 28
    clique_max_q: int = 17
    bruteforce_max_q: int = 9
    audit_field_cap: int = 2 ** 16

    jobs: int = 1

    # output
    out: Optional[str] = None
    html: bool = False
    csv: Optional[str] = None
    edge_list: Optional[str] = None
    output_dir: str = "output"
    base_logdir: str = "logs"

    @field_validator(*LIST_KEYS, mode="before")
    @classmethod
    def _split_list(cls, value):
        if isinstance(value, str):
            return [int(part) for part in value.replace(" ", "").split(",") if part != ""]
        return value

    @field_validator("cosets")
    @classmethod
    def _distinct_cosets(cls, value):
        if len(set(value)) != len(value):
            raise ValueError("duplicate coset exponent")
        return value

    @field_validator("jobs", "count", "n", "r_max")
    @classmethod
    def _positive(cls, value):
        if value < 1:
            raise ValueError("must be >= 1")
        return value

    @field_validator("command")
    @classmethod
    def _known_command(cls, value):
        if value not in COMMANDS:
            raise UnknownCommand(value)
        return value

    @field_validator("mode")
    @classmethod
    def _mode_for_command(cls, value, info: ValidationInfo):
        command = info.data.get("command")
        allowed = {"clique": CLIQUE_MODES, "charsum": AUDIT_MODES}.get(command)
        if value is not None and allowed is not None and value not in allowed:
            raise ValueError(f"mode {value!r} is not one of {', '.join(allowed)}")
        return value

    def clique_mode(self) -> str:
        return self.mode or "verify"

    def audit_mode(self) -> str:
        return self.mode or "weil"


def read_config_file(path: str) -> Dict[str, str]:
    """Flat `key = value` lines; blank lines and `#` comments are skipped."""
    values: Dict[str, str] = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise IoFailure(f"could not read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidValue(f"line {lineno}", f"expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        values[key.replace("-", "_")] = value
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Finite-field rigidity laboratory",
                                     argument_default=argparse.SUPPRESS)
    parser.add_argument("command", nargs="?", help=f"One of: {', '.join(COMMANDS)}.")
    parser.add_argument("action", nargs="?", help="Sub-action, e.g. 'audit' for charsum.")
    parser.add_argument("--config", type=str, help="Flat key = value configuration file.")
    parser.add_argument("--p", type=int, help="Characteristic.")
    parser.add_argument("--n", type=int, help="Extension degree.")
    parser.add_argument("--q", type=int, help="Field size (directions-theorem).")
    parser.add_argument("--d", type=int, help="Subgroup index.")
    parser.add_argument("--cosets", type=str, help="Coset exponents M, comma separated.")
    parser.add_argument("--coeffs", type=str, help="Linearized map coefficients c_0,...,c_{n-1}.")
    parser.add_argument("--table", type=str, help="Value table f(0),...,f(q-1).")
    parser.add_argument("--d-range", dest="d_range", type=str, help="Indices for the exceptional search.")
    parser.add_argument("--r-max", dest="r_max", type=int, help="Largest number of cosets allowed.")
    parser.add_argument("--primes", type=str, help="Primes to scan for the bound margin.")
    parser.add_argument("--mode", type=str, help="clique: verify|catalog; charsum: weil|cor22|cor23|rou|psi.")
    parser.add_argument("--count", type=int, help="Number of random audit instances.")
    parser.add_argument("--seed", type=int, help="Random seed.")
    parser.add_argument("--exact", action="store_true", help="Also decide audits in exact arithmetic.")
    parser.add_argument("--rou-max-d", dest="rou_max_d", type=int, help="Largest d for roots-of-unity audits.")
    parser.add_argument("--jobs", type=int, help="Worker processes.")
    parser.add_argument("--field-cap", dest="field_cap", type=int)
    parser.add_argument("--search-cap", dest="search_cap", type=int)
    parser.add_argument("--clique-max-q", dest="clique_max_q", type=int)
    parser.add_argument("--bruteforce-max-q", dest="bruteforce_max_q", type=int)
    parser.add_argument("--audit-field-cap", dest="audit_field_cap", type=int)
    parser.add_argument("--out", type=str, help="JSON report path.")
    parser.add_argument("--html", action="store_true", help="Also write an HTML report.")
    parser.add_argument("--csv", type=str, help="CSV path for tabular results.")
    parser.add_argument("--edge-list", dest="edge_list", type=str, help="CSV edge list of the Cayley graph.")
    parser.add_argument("--output-dir", dest="output_dir", type=str, help="Output directory.")
    parser.add_argument("--base-logdir", dest="base_logdir", type=str, help="Base name for log directory.")
    return parser


def parse_config(argv: Optional[List[str]] = None) -> ExperimentConfig:
    args, unknown = build_parser().parse_known_args(argv)
    if unknown:
        raise InvalidValue(unknown[0], "unknown option")
    flags = vars(args)
    values: Dict[str, object] = {}
    config_path = flags.pop("config", None)
    if config_path:
        values.update(read_config_file(config_path))
    values.update({k: v for k, v in flags.items() if v is not None})
    if "command" not in values:
        raise UnknownCommand(None)
    if values["command"] not in COMMANDS:
        raise UnknownCommand(values["command"])
    try:
        return ExperimentConfig(**values)
    except ValidationError as exc:
        err = exc.errors()[0]
        key = str(err["loc"][0]) if err.get("loc") else "config"
        raise InvalidValue(key, err["msg"]) from exc
