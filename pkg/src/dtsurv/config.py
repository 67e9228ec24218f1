"""Line-oriented config files: one directive per line, shell-style quoting.

All configs in the toolkit share this family: `#` comments and blank lines
are ignored, tokens split like a shell so values with spaces are quoted.
"""

from __future__ import annotations

import os
import shlex
from dataclasses import dataclass, field

from .core import DtsurvError
from .encode import FilterRule, FilterRuleSet
from .synthgen import (
    Censoring,
    ConstantHazard,
    DiscreteWeibullHazard,
    GroupSpec,
    SyntheticSpec,
    TableHazard,
)

__all__ = [
    "ConfigError",
    "EncoderSpec",
    "ServiceConfig",
    "parse_filter_rules",
    "parse_encoder_spec",
    "parse_synth_spec",
    "parse_params",
    "parse_service_config",
    "read_config_lines",
]


class ConfigError(DtsurvError):
    """A config file line could not be understood."""

    def __init__(self, source: str, line_no: int, message: str):
        super().__init__(f"{source}:{line_no}: {message}")
        self.source = source
        self.line_no = line_no


def read_config_lines(text: str, source: str = "<config>") -> list[tuple[int, list[str]]]:
    """(line number, tokens) for every non-blank, non-comment line."""
    out = []
    for i, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        try:
            tokens = shlex.split(stripped, comments=True)
        except ValueError as exc:
            raise ConfigError(source, i, f"bad quoting: {exc}") from exc
        if tokens:
            out.append((i, tokens))
    return out


def parse_filter_rules(text: str, source: str = "<filters>") -> FilterRuleSet:
    """One rule per line: ``column op value`` with op in = != >= nonblank."""
    rules = []
    for line_no, tokens in read_config_lines(text, source):
        if len(tokens) == 2 and tokens[1] == "nonblank":
            rules.append(FilterRule(tokens[0], "nonblank"))
        elif len(tokens) == 3 and tokens[1] in ("=", "!=", ">="):
            rules.append(FilterRule(tokens[0], tokens[1], tokens[2]))
        else:
            raise ConfigError(source, line_no, f"expected 'column op value', got {tokens}")
    return FilterRuleSet(tuple(rules))


@dataclass
class EncoderSpec:
    """Which raw columns play which role in the ingestion contract."""

    nominal: list[str] = field(default_factory=list)
    numeric: list[str] = field(default_factory=list)
    geo: str | None = None
    id_column: str | None = None
    duration_column: str = "survival_months"
    event_column: str = "event"


def parse_encoder_spec(text: str, source: str = "<encoder>") -> EncoderSpec:
    """Directives: nominal/numeric/geo/id/duration/event, each naming a column."""
    spec = EncoderSpec()
    for line_no, tokens in read_config_lines(text, source):
        if len(tokens) != 2:
            raise ConfigError(source, line_no, f"expected 'directive column', got {tokens}")
        directive, column = tokens
        if directive == "nominal":
            spec.nominal.append(column)
        elif directive == "numeric":
            spec.numeric.append(column)
        elif directive == "geo":
            if spec.geo is not None:
                raise ConfigError(source, line_no, "geo column declared twice")
            spec.geo = column
        elif directive == "id":
            spec.id_column = column
        elif directive == "duration":
            spec.duration_column = column
        elif directive == "event":
            spec.event_column = column
        else:
            raise ConfigError(source, line_no, f"unknown directive {directive!r}")
    return spec


def _parse_hazard(tokens: list[str], source: str, line_no: int):
    kind = tokens[0]
    try:
        if kind == "constant" and len(tokens) == 2:
            return ConstantHazard(float(tokens[1]))
        if kind == "weibull" and len(tokens) == 3:
            return DiscreteWeibullHazard(float(tokens[1]), float(tokens[2]))
        if kind == "table" and len(tokens) >= 2:
            return TableHazard(tuple(float(v) for v in tokens[1:]))
    except ValueError as exc:
        raise ConfigError(source, line_no, f"bad hazard number: {exc}") from exc
    raise ConfigError(source, line_no, f"unknown hazard form {tokens}")


def parse_synth_spec(text: str, source: str = "<synth>") -> SyntheticSpec:
    """Directives: patients, horizon, seed, censoring, group, feature.

    group lines read ``group NAME WEIGHT KIND ARGS...`` with hazard kinds
    constant p | weibull q beta | table v0 v1 ...; feature lines attach a
    covariate value to a declared group: ``feature GROUP NAME VALUE``.
    """
    n_patients = 1000
    horizon = 60
    seed = 0
    censoring = Censoring()
    groups: list[dict] = []

    for line_no, tokens in read_config_lines(text, source):
        directive, rest = tokens[0], tokens[1:]
        try:
            if directive == "patients" and len(rest) == 1:
                n_patients = int(rest[0])
            elif directive == "horizon" and len(rest) == 1:
                horizon = int(rest[0])
            elif directive == "seed" and len(rest) == 1:
                seed = int(rest[0])
            elif directive == "censoring":
                if rest == ["none"]:
                    censoring = Censoring()
                elif len(rest) == 2 and rest[0] == "geometric":
                    censoring = Censoring("geometric", rate=float(rest[1]))
                elif len(rest) == 2 and rest[0] == "cutoff":
                    censoring = Censoring("cutoff", cutoff=int(rest[1]))
                else:
                    raise ConfigError(source, line_no, f"unknown censoring {rest}")
            elif directive == "group" and len(rest) >= 3:
                groups.append(
                    {
                        "name": rest[0],
                        "weight": float(rest[1]),
                        "hazard": _parse_hazard(rest[2:], source, line_no),
                        "features": {},
                    }
                )
            elif directive == "feature" and len(rest) == 3:
                for g in groups:
                    if g["name"] == rest[0]:
                        g["features"][rest[1]] = float(rest[2])
                        break
                else:
                    raise ConfigError(source, line_no, f"feature for undeclared group {rest[0]!r}")
            else:
                raise ConfigError(source, line_no, f"unknown directive {tokens}")
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(source, line_no, f"bad number: {exc}") from exc

    if not groups:
        raise ConfigError(source, 0, "spec declares no groups")
    try:
        return SyntheticSpec(
            groups=tuple(
                GroupSpec(g["name"], g["weight"], g["hazard"], g["features"]) for g in groups
            ),
            censoring=censoring,
            horizon=horizon,
            n_patients=n_patients,
            seed=seed,
        )
    except ValueError as exc:
        raise ConfigError(source, 0, str(exc)) from exc


def parse_params(text: str, source: str = "<params>") -> dict[str, str]:
    """Flat ``key value`` pairs; interpretation is up to the model kind."""
    params: dict[str, str] = {}
    for line_no, tokens in read_config_lines(text, source):
        if len(tokens) < 2:
            raise ConfigError(source, line_no, f"expected 'key value', got {tokens}")
        params[tokens[0]] = " ".join(tokens[1:])
    return params


@dataclass
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8000
    model_dir: str = "models"
    static_dir: str | None = None
    geocode_url: str | None = None
    elevation_url: str | None = None
    geo_cache: str | None = None

    def with_env_overrides(self) -> "ServiceConfig":
        """Environment beats file: DTSURV_HOST, DTSURV_PORT, DTSURV_MODEL_DIR."""
        host = os.environ.get("DTSURV_HOST", self.host)
        port = int(os.environ.get("DTSURV_PORT", self.port))
        model_dir = os.environ.get("DTSURV_MODEL_DIR", self.model_dir)
        return ServiceConfig(
            host, port, model_dir, self.static_dir, self.geocode_url, self.elevation_url, self.geo_cache
        )


def parse_service_config(text: str, source: str = "<service>") -> ServiceConfig:
    config = ServiceConfig()
    setters = {
        "host": ("host", str),
        "port": ("port", int),
        "model_dir": ("model_dir", str),
        "static_dir": ("static_dir", str),
        "geocode_url": ("geocode_url", str),
        "elevation_url": ("elevation_url", str),
        "geo_cache": ("geo_cache", str),
    }
    for line_no, tokens in read_config_lines(text, source):
        if len(tokens) != 2 or tokens[0] not in setters:
            raise ConfigError(source, line_no, f"unknown directive {tokens}")
        attr, cast = setters[tokens[0]]
        try:
            setattr(config, attr, cast(tokens[1]))
        except ValueError as exc:
            raise ConfigError(source, line_no, str(exc)) from exc
    return config
