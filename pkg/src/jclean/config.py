"""Size caps and sampling configuration.

Caps can be overridden through the ``JCLEAN_CAPS`` environment variable,
either as a JSON object or as comma separated ``key=value`` pairs::

    JCLEAN_CAPS='{"enumeration_cap": 65536}'
    JCLEAN_CAPS='sample_size=500,seed=3'
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, fields, replace

ENV_VAR = "JCLEAN_CAPS"


@dataclass(frozen=True)
class Caps:
    axiom_cap: int = 256
    analysis_cap: int = 4096
    enumeration_cap: int = 2**20
    similarity_cap: int = 16          # max |R| for unit-group searches in M2(R;s)
    sample_size: int = 2000
    seed: int = 0
    series_precision: int = 3
    series_matrix_cap: int = 2**16    # max |M2(R[[x]]/(x^N))| a series check may build
    series_exhaustive_cap: int = 4096 # above this, series checks sample
    pair_cap: int = 2**22             # exhaustive pair sweeps (conjugations, det products)

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if f.name == "seed":
                if value < 0:
                    raise ValueError("seed must be non-negative")
            elif value <= 0:
                raise ValueError(f"cap {f.name} must be positive, got {value}")

    def override(self, **changes) -> "Caps":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return asdict(self)


def parse_caps(text: str) -> dict:
    text = text.strip()
    if not text:
        return {}
    if text.startswith("{"):
        raw = json.loads(text)
    else:
        raw = {}
        for item in text.split(","):
            key, sep, value = item.partition("=")
            if not sep:
                raise ValueError(f"malformed cap override {item!r}")
            raw[key.strip()] = value.strip()
    known = {f.name for f in fields(Caps)}
    out = {}
    for key, value in raw.items():
        if key not in known:
            raise ValueError(f"unknown cap {key!r}")
        out[key] = int(value)
    return out


def caps_from_env(environ=None, base: Caps | None = None) -> Caps:
    environ = os.environ if environ is None else environ
    base = base or Caps()
    text = environ.get(ENV_VAR, "")
    return base.override(**parse_caps(text)) if text else base
