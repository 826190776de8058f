"""Configuration for ergodic runs, with versioned defaults."""

import json
from dataclasses import asdict, dataclass

from .errors import ConfigError
from .tubes import build_borromean_tubes, build_hopf_tubes

CONFIG_VERSION = 1

# defaults by schema version; bump the version when semantics change
DEFAULTS = {
    1: {
        "tubes": "borromean",
        "fluxes": (1.0, 1.0, 1.0),
        "radius": 0.12,
        "samples": 64,
        "T": 1.0,
        "dt": None,
        "seed": 0,
        "grid_n": None,
    },
}


@dataclass
class ErgodicConfig:
    tubes: str = "borromean"
    fluxes: tuple = (1.0, 1.0, 1.0)
    radius: float = 0.12
    samples: int = 64
    T: float = 1.0
    dt: object = None
    seed: int = 0
    grid_n: object = None
    version: int = CONFIG_VERSION

    def validate(self):
        if self.tubes not in ("borromean", "hopf"):
            raise ConfigError("unknown tube family %r" % self.tubes)
        want = 3 if self.tubes == "borromean" else 2
        if len(self.fluxes) != want:
            raise ConfigError(
                "%s tubes need %d fluxes, got %d"
                % (self.tubes, want, len(self.fluxes))
            )
        if not self.radius > 0:
            raise ConfigError("radius must be positive")
        if int(self.samples) < 1:
            raise ConfigError("samples must be at least 1")
        if not self.T > 0:
            raise ConfigError("T must be positive")
        if self.dt is not None and not self.dt > 0:
            raise ConfigError("dt must be positive when given")
        if self.grid_n is not None:
            g = int(self.grid_n)
            if g < 8 or g % 2:
                raise ConfigError("grid_n must be even and >= 8")
        return self

    def to_dict(self):
        d = asdict(self)
        d["fluxes"] = list(self.fluxes)
        return d

    def build(self):
        """Construct the (system, field spec) pair for this config."""
        if self.tubes == "borromean":
            return build_borromean_tubes(self.radius, self.fluxes)
        return build_hopf_tubes(self.radius, self.fluxes)


def load_config(path=None, overrides=None):
    """Defaults, then the JSON file, then explicit overrides."""
    doc = {}
    if path is not None:
        try:
            with open(path) as fh:
                doc = json.load(fh)
        except (OSError, ValueError) as exc:
            raise ConfigError("bad config %r: %s" % (path, exc)) from exc
        if not isinstance(doc, dict):
            raise ConfigError("config root must be an object")
    version = int(doc.pop("version", CONFIG_VERSION))
    if version not in DEFAULTS:
        raise ConfigError("unsupported config version %d" % version)
    merged = dict(DEFAULTS[version])
    unknown = set(doc) - set(merged)
    if unknown:
        raise ConfigError("unknown config keys %s" % sorted(unknown))
    merged.update(doc)
    if overrides:
        merged.update({k: v for k, v in overrides.items() if v is not None})
    merged["fluxes"] = tuple(float(f) for f in merged["fluxes"])
    cfg = ErgodicConfig(version=version, **merged)
    return cfg.validate()
