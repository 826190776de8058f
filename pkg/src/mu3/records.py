"""Reproducible run records appended to JSON-lines logs.

A record captures everything needed to replay a run and check that the
numeric results come back bit-identical: the command, a hash of the
resolved configuration, grid size and seed, plus raw/rounded/residual
triples per named result.  Timestamps and timings are informational and
excluded from replay comparison.
"""

import hashlib
import json
import time
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone

from .errors import InputOutputError


def canonical_json(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def config_hash(obj):
    return hashlib.sha256(canonical_json(obj).encode("utf-8")).hexdigest()


@dataclass
class RunRecord:
    timestamp: str
    command: str
    config_hash: str
    grid_n: object
    seed: object
    results: dict      # name -> {"raw", "rounded", "residual"}
    timings: dict      # stage -> milliseconds
    artifacts: list = field(default_factory=list)

    @classmethod
    def start(cls, command, config, grid_n=None, seed=None):
        return cls(
            timestamp=datetime.now(timezone.utc).isoformat(),
            command=command,
            config_hash=config_hash(config),
            grid_n=grid_n,
            seed=seed,
            results={},
            timings={},
        )

    def add_result(self, name, raw, rounded=None, residual=None):
        raw = float(raw)
        if rounded is None:
            rounded = float(round(raw))
        if residual is None:
            residual = abs(raw - rounded)
        self.results[name] = {
            "raw": raw,
            "rounded": rounded,
            "residual": float(residual),
        }

    def to_dict(self):
        return asdict(self)


class StageTimer:
    """Collects wall-clock stage timings in milliseconds."""

    def __init__(self, record):
        self.record = record
        self._t0 = None
        self._stage = None

    def stage(self, name):
        self._stage = name
        self._t0 = time.perf_counter()
        return self

    def __enter__(self):
        if self._t0 is None:
            self._t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        dt_ms = (time.perf_counter() - self._t0) * 1e3
        self.record.timings[self._stage or "total"] = round(dt_ms, 3)
        self._t0 = None
        self._stage = None
        return False


def append_record(path, record):
    with open(path, "a") as fh:
        fh.write(canonical_json(record.to_dict()) + "\n")


def read_records(path):
    out = []
    try:
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                doc = json.loads(line)
                out.append(RunRecord(**doc))
    except (OSError, ValueError, TypeError) as exc:
        raise InputOutputError("bad run log %r: %s" % (path, exc)) from exc
    return out
