"""Experiment configuration: flat dotted ``key = value`` files or JSON."""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

from .errors import ConfigError

KNOWN_TOP = {
    "mass", "epsilon", "cutoff", "kappa_list", "lattice", "region", "sweep",
    "wiener_hopf", "tolerances", "output_dir", "verify", "diagnostics",
}
REQUIRED = {
    "entropy": ["mass", "epsilon", "cutoff.kind", "kappa_list", "lattice.box_side", "lattice.points_per_dim",
                "region.kind", "region.size"],
    "sweep": ["mass", "epsilon", "cutoff.kind", "kappa_list", "lattice.box_side", "lattice.points_per_dim",
              "region.kind", "sweep.L_values"],
    "coeff": ["mass", "epsilon", "cutoff.kind", "kappa_list"],
    "symbol-check": ["mass", "epsilon", "cutoff.kind"],
    "diagnostics": ["mass", "epsilon", "cutoff.kind", "lattice.box_side", "lattice.points_per_dim", "region.kind"],
    "verify": ["cutoff.kind"],
}
LATTICE_COMMANDS = {"entropy", "sweep", "diagnostics"}


def parse_flat(text: str) -> dict:
    """Parse ``key.sub = value`` lines; values are JSON literals or bare strings."""
    out: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}", keys=[raw.strip()])
        key, value = (part.strip() for part in line.split("=", 1))
        try:
            parsed = json.loads(value)
        except json.JSONDecodeError:
            parsed = value
        set_dotted(out, key, parsed)
    return out


def set_dotted(tree: dict, key: str, value) -> None:
    parts = key.split(".")
    node = tree
    for p in parts[:-1]:
        node = node.setdefault(p, {})
        if not isinstance(node, dict):
            raise ConfigError(f"key {key!r} conflicts with a scalar entry", keys=[key])
    node[parts[-1]] = value


def get_dotted(tree: dict, key: str, default=KeyError):
    node = tree
    for p in key.split("."):
        if not isinstance(node, dict) or p not in node:
            if default is KeyError:
                raise KeyError(key)
            return default
        node = node[p]
    return node


def flatten(tree: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in tree.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(flatten(v, key + "."))
        else:
            out[key] = v
    return out


def to_flat_text(tree: dict) -> str:
    return "".join(f"{k} = {json.dumps(v)}\n" for k, v in sorted(flatten(tree).items()))


def load(path=None) -> dict:
    """Load a config file, or the shipped default when `path` is None."""
    if path is None:
        text = resources.files("dirac_entropy").joinpath("default_config.txt").read_text()
        return parse_flat(text)
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file {path} does not exist", keys=[])
    text = path.read_text()
    if path.suffix == ".json":
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON in {path}: {exc}", keys=[]) from exc
    return parse_flat(text)


def validate(cfg: dict, command: str) -> None:
    """Raise ConfigError listing missing or invalid keys for `command`."""
    bad = [k for k in REQUIRED.get(command, []) if get_dotted(cfg, k, None) is None]
    unknown = [k for k in cfg if k not in KNOWN_TOP]
    positive = ["lattice.box_side", "lattice.points_per_dim", "region.size"]
    # epsilon = 0 is the continuum coefficient; lattice commands need a positive cutoff length
    if command in LATTICE_COMMANDS:
        positive.append("epsilon")
    else:
        eps = get_dotted(cfg, "epsilon", None)
        if eps is not None and (not isinstance(eps, (int, float)) or isinstance(eps, bool) or eps < 0):
            bad.append("epsilon")
    for k in positive:
        v = get_dotted(cfg, k, None)
        if v is not None and (not isinstance(v, (int, float)) or isinstance(v, bool) or v <= 0):
            bad.append(k)
    m = get_dotted(cfg, "mass", None)
    if m is not None and (not isinstance(m, (int, float)) or m < 0):
        bad.append("mass")
    if get_dotted(cfg, "cutoff.kind", None) == "rational":
        rho = get_dotted(cfg, "cutoff.rho", None)
        if not isinstance(rho, (int, float)) or rho <= 3:
            bad.append("cutoff.rho")
    kl = get_dotted(cfg, "kappa_list", None)
    if kl is not None and (not isinstance(kl, list) or not kl or any(not isinstance(x, (int, float)) or x <= 0 for x in kl)):
        bad.append("kappa_list")
    Ls = get_dotted(cfg, "sweep.L_values", None)
    if Ls is not None and (not isinstance(Ls, list) or any(not isinstance(x, (int, float)) or x <= 0 for x in Ls)):
        bad.append("sweep.L_values")
    bad += unknown
    if bad:
        keys = sorted(set(bad))
        raise ConfigError(f"invalid or missing configuration keys: {', '.join(keys)}", keys=keys)
