"""Chain and run configuration.

``RunConfig`` is parsed from a JSON document whose field names are fixed;
unknown fields are rejected with a line-numbered diagnostic.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields

from .boundary import BoundaryData

__all__ = ["ChainConfig", "RunConfig", "ConfigError", "load_config", "parse_config"]


class ConfigError(ValueError):
    """Invalid chain or run configuration."""


@dataclass(frozen=True)
class ChainConfig:
    """Settings for the parallel Metropolis chains.

    ``length`` is the number of emitted states, spread over ``n_chains``
    independent chains (rounded up to a whole number per chain). Output is
    chain-major so contiguous batches never mix chains when ``n_chains`` is a
    multiple of the batch count.
    """

    burn_in: int = 2000
    thin: int = 5
    proposal_scale: float = 0.5
    length: int = 20000
    n_chains: int = 200
    tune: bool = True

    def __post_init__(self):
        if self.burn_in < 0:
            raise ConfigError("burn_in must be >= 0")
        if self.thin < 1:
            raise ConfigError("thin must be >= 1")
        if not (self.proposal_scale > 0 and math.isfinite(self.proposal_scale)):
            raise ConfigError("proposal_scale must be positive")
        if self.length < 1:
            raise ConfigError("length must be >= 1")
        if self.n_chains < 1:
            raise ConfigError("n_chains must be >= 1")

    @property
    def per_chain(self) -> int:
        return -(-self.length // self.n_chains)


_REQUIRED = ("n", "t", "starts", "ends", "seed")


@dataclass(frozen=True)
class RunConfig:
    n: int
    t: float
    starts: BoundaryData
    ends: BoundaryData
    seed: int = 0
    samples: int = 100000
    burn_in: int = 2000
    thin: int = 5
    proposal_scale: float = 0.5
    tolerances: dict = field(default_factory=dict)
    out_dir: str = "reports"

    def chain(self, length: int | None = None, proposal_scale: float | None = None) -> ChainConfig:
        return ChainConfig(
            burn_in=self.burn_in,
            thin=self.thin,
            proposal_scale=self.proposal_scale if proposal_scale is None else proposal_scale,
            length=self.samples if length is None else length,
        )

    def tol(self, check: str, default: float) -> float:
        return float(self.tolerances.get(check, default))


def _line_of(text: str, key: str) -> int:
    needle = f'"{key}"'
    for lineno, line in enumerate(text.splitlines(), start=1):
        if needle in line:
            return lineno
    return 0


def _clusters(raw, name, lineno):
    if not isinstance(raw, list) or not raw:
        raise ConfigError(f"line {lineno}: field '{name}' must be a non-empty list of {{value, mult}}")
    out = []
    for item in raw:
        if not isinstance(item, dict) or set(item) != {"value", "mult"}:
            raise ConfigError(f"line {lineno}: field '{name}' entries need exactly 'value' and 'mult'")
        v, m = item["value"], item["mult"]
        if not isinstance(v, (int, float)) or isinstance(v, bool):
            raise ConfigError(f"line {lineno}: field '{name}': value must be a number")
        if not isinstance(m, int) or isinstance(m, bool) or m < 1:
            raise ConfigError(f"line {lineno}: field '{name}': mult must be a positive integer")
        out.append((float(v), m))
    out.sort()
    try:
        return BoundaryData.from_clusters(out)
    except ValueError as exc:
        raise ConfigError(f"line {lineno}: field '{name}': {exc}") from None


def parse_config(text: str, overrides: dict | None = None) -> RunConfig:
    """Parse and validate a JSON run configuration; ``overrides`` beat file values."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"line {exc.lineno}: malformed JSON: {exc.msg}") from None
    if not isinstance(raw, dict):
        raise ConfigError("line 1: configuration must be a JSON object")

    known = {f.name for f in fields(RunConfig)}
    for key in raw:
        if key not in known:
            raise ConfigError(f"line {_line_of(text, key)}: unknown field '{key}'")
    for key in _REQUIRED:
        if key not in raw:
            raise ConfigError(f"line 0: missing required field '{key}'")
    raw.update({k: v for k, v in (overrides or {}).items() if v is not None})

    def check_int(key, minimum):
        v = raw.get(key)
        if v is None:
            return
        if not isinstance(v, int) or isinstance(v, bool) or v < minimum:
            raise ConfigError(f"line {_line_of(text, key)}: field '{key}' must be an integer >= {minimum}")

    check_int("n", 1)
    check_int("seed", 0)
    check_int("samples", 1)
    check_int("burn_in", 0)
    check_int("thin", 1)
    if raw["seed"] >= 2**64:
        raise ConfigError(f"line {_line_of(text, 'seed')}: field 'seed' must fit in 64 bits")
    t = raw["t"]
    if not isinstance(t, (int, float)) or isinstance(t, bool) or not 0 < t < 1:
        raise ConfigError(f"line {_line_of(text, 't')}: field 't' must lie in (0, 1)")
    ps = raw.get("proposal_scale", 0.5)
    if not isinstance(ps, (int, float)) or isinstance(ps, bool) or not ps > 0:
        raise ConfigError(f"line {_line_of(text, 'proposal_scale')}: field 'proposal_scale' must be positive")
    tols = raw.get("tolerances", {})
    if not isinstance(tols, dict) or not all(isinstance(v, (int, float)) and v >= 0 for v in tols.values()):
        raise ConfigError(f"line {_line_of(text, 'tolerances')}: field 'tolerances' must map check names to numbers")
    out_dir = raw.get("out_dir", "reports")
    if not isinstance(out_dir, str):
        raise ConfigError(f"line {_line_of(text, 'out_dir')}: field 'out_dir' must be a string")

    starts = _clusters(raw["starts"], "starts", _line_of(text, "starts"))
    ends = _clusters(raw["ends"], "ends", _line_of(text, "ends"))
    for name, data in (("starts", starts), ("ends", ends)):
        if data.n != raw["n"]:
            raise ConfigError(
                f"line {_line_of(text, name)}: field '{name}': multiplicities sum to {data.n}, expected n={raw['n']}"
            )

    return RunConfig(
        n=raw["n"],
        t=float(t),
        starts=starts,
        ends=ends,
        seed=raw["seed"],
        samples=raw.get("samples", 100000),
        burn_in=raw.get("burn_in", 2000),
        thin=raw.get("thin", 5),
        proposal_scale=float(ps),
        tolerances=dict(tols),
        out_dir=out_dir,
    )


def load_config(path, overrides: dict | None = None) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), overrides)
