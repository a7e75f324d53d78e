"""Hyperparameter defaults, including the per-size laser calibration table.

Values live in ``data/defaults.ini`` (shipped with the package) so they are
recorded data, not code.  The laser tables map problem size n to calibrated
coupling/detuning; lookups for sizes not in the table take the geometrically
nearest entry, falling back to the ``default`` key.
"""
from __future__ import annotations

import configparser
import math
from functools import lru_cache
from importlib import resources


@lru_cache(maxsize=1)
def load_defaults() -> configparser.ConfigParser:
    parser = configparser.ConfigParser()
    text = (resources.files("xorbench") / "data" / "defaults.ini").read_text()
    parser.read_string(text)
    return parser


def laser_table_lookup(table: str, n: int) -> float:
    section = load_defaults()[f"laser.{table}"]
    sizes = [int(k) for k in section if k != "default"]
    if sizes:
        nearest = min(sizes, key=lambda s: abs(math.log(n / s)))
        return section.getfloat(str(nearest))
    return section.getfloat("default")


def solver_defaults(name: str) -> dict:
    """Config kwargs recorded in the defaults file for one solver."""
    parser = load_defaults()
    if name not in parser:
        return {}
    out: dict = {}
    for key, raw in parser[name].items():
        if raw.lower() in ("true", "false"):
            out[key] = raw.lower() == "true"
        else:
            try:
                out[key] = int(raw)
            except ValueError:
                try:
                    out[key] = float(raw)
                except ValueError:
                    out[key] = raw
    return out
