"""Application configuration: INI file plus ``ECF_SECTION__KEY`` environment overrides.

Schema (every key optional)::

    [general]
    timezone = America/Halifax       ; zone for zoneless log timestamps
    seed = 0

    [calendar]
    weekend_days = 5, 6              ; Monday = 0
    holidays_file = holidays.csv     ; CSV with columns name,date

    [holidays]                       ; inline named holidays
    canada_day = 2023-07-01, 2024-07-01

    [classification]                 ; ISO type letter -> category
    R = reefer

    [paths]
    data = stock.csv
    artifacts = artifacts
    reports = reports

    [service]
    host = 127.0.0.1
    port = 8080

    [model_arima]                    ; likewise model_decomposable, model_lstm
    preset = paper                   ; paper | default | reduced (lstm only)
    q = 3                            ; field overrides on top of the preset

Relative paths resolve against the directory of the config file.  An
environment variable such as ``ECF_SERVICE__PORT=9000`` or
``ECF_MODEL_LSTM__EPOCHS=20`` overrides the matching key.
"""

from __future__ import annotations

import configparser
import csv
import dataclasses
import os
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from zoneinfo import ZoneInfo, ZoneInfoNotFoundError

from .errors import ConfigurationError
from .forecaster import default_params, tuned_spec
from .ingest import DEFAULT_TABLE, ClassificationTable
from .models.base import ModelFamily, ModelSpec
from .models.decomposable import DecomposableConfig
from .models.lstm import REDUCED_NETWORK
from .series import CalendarSpec, ContainerCategory

ENV_PREFIX = "ECF_"
PRESETS = ("paper", "default", "reduced")


def _parse_bool(text: str) -> bool:
    value = text.strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _coerce(text: str, current):
    """Convert ``text`` to the type of the existing field value."""
    if isinstance(current, bool):
        return _parse_bool(text)
    if isinstance(current, int):
        return int(text)
    if isinstance(current, float):
        return float(text)
    if current is None:
        if text.strip().lower() in ("", "none"):
            return None
        try:
            return int(text)
        except ValueError:
            return float(text)
    return text.strip()


def _apply_overrides(params, overrides: dict):
    """Replace dataclass fields of ``params`` from string ``overrides``."""
    changes, seasonal = {}, {}
    names = {f.name for f in dataclasses.fields(params)}
    for key, text in overrides.items():
        if isinstance(params, DecomposableConfig) and key in ("yearly", "weekly", "daily"):
            seasonal[key] = _parse_bool(text)
        elif key in names and key != "seasonalities":
            changes[key] = _coerce(text, getattr(params, key))
        else:
            raise ConfigurationError(f"unknown model setting {key!r}")
    try:
        out = dataclasses.replace(params, **changes)
        for name, enabled in seasonal.items():
            out = out.with_seasonality(name, enabled)
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"invalid model setting: {exc}") from None
    return out


def preset_params(family, preset: str = "paper"):
    """Model parameters for a named preset.

    ``paper`` is the tuned optimum, ``default`` the library defaults and
    ``reduced`` (LSTM only) a desktop-scale network for full cross-validation.
    """
    family = ModelFamily.parse(family)
    preset = preset.strip().lower()
    if preset == "paper":
        return tuned_spec(family).params
    if preset == "default":
        return default_params(family)
    if preset == "reduced" and family is ModelFamily.LSTM:
        return REDUCED_NETWORK
    raise ConfigurationError(f"preset {preset!r} is not available for {family.value}")


def _read_holiday_file(path: Path) -> dict:
    named: dict = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            try:
                named.setdefault(row["name"].strip(), set()).add(date.fromisoformat(row["date"].strip()))
            except (KeyError, ValueError) as exc:
                raise ConfigurationError(f"{path}: bad holiday row {row} ({exc})") from None
    return named


@dataclass
class AppConfig:
    timezone: str = "UTC"
    seed: int = 0
    calendar: CalendarSpec = field(default_factory=CalendarSpec)
    classification: ClassificationTable = DEFAULT_TABLE
    models: dict = field(default_factory=lambda: {f: tuned_spec(f) for f in ModelFamily})
    data_path: Path | None = None
    artifacts_dir: Path = Path("artifacts")
    reports_dir: Path = Path("reports")
    host: str = "127.0.0.1"
    port: int = 8080
    source: Path | None = None

    def model_spec(self, family, seed: int | None = None) -> ModelSpec:
        family = ModelFamily.parse(family)
        spec = self.models[family]
        return ModelSpec(family, spec.params, self.seed if seed is None else seed)

    def validate(self) -> "AppConfig":
        try:
            ZoneInfo(self.timezone)
        except (ZoneInfoNotFoundError, ValueError):
            raise ConfigurationError(f"unknown timezone {self.timezone!r}") from None
        if self.data_path is not None and not Path(self.data_path).exists():
            raise ConfigurationError(f"data path {self.data_path} does not exist")
        for name in ("artifacts_dir", "reports_dir"):
            parent = Path(getattr(self, name)).resolve().parent
            if not parent.exists():
                raise ConfigurationError(f"{name} parent directory {parent} does not exist")
        if not 0 <= int(self.port) <= 65535:
            raise ConfigurationError(f"port {self.port} out of range")
        return self


def _env_overrides(parser: configparser.ConfigParser, environ) -> None:
    for name, value in environ.items():
        if not name.startswith(ENV_PREFIX) or "__" not in name:
            continue
        section, key = name[len(ENV_PREFIX):].split("__", 1)
        section = section.lower()
        if not parser.has_section(section):
            parser.add_section(section)
        parser.set(section, key if section == "classification" else key.lower(), value)


def load_config(path=None, environ=None) -> AppConfig:
    """Build an :class:`AppConfig` from an optional INI file and the environment."""
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    parser.optionxform = str  # keep classification letters as written
    base = Path.cwd()
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise ConfigurationError(f"config file {path} not found")
        try:
            parser.read(path)
        except configparser.Error as exc:
            raise ConfigurationError(f"{path}: {exc}") from None
        base = path.resolve().parent
    _env_overrides(parser, os.environ if environ is None else environ)

    def get(section, key, default=None):
        return parser.get(section, key, fallback=default)

    def resolve(text):
        p = Path(text).expanduser()
        return p if p.is_absolute() else base / p

    cfg = AppConfig(source=path)
    try:
        cfg.timezone = get("general", "timezone", cfg.timezone)
        cfg.seed = int(get("general", "seed", cfg.seed))
        cfg.host = get("service", "host", cfg.host)
        cfg.port = int(get("service", "port", cfg.port))
    except ValueError as exc:
        raise ConfigurationError(str(exc)) from None

    weekend = get("calendar", "weekend_days")
    holidays: dict = {}
    if get("calendar", "holidays_file"):
        holidays.update(_read_holiday_file(resolve(get("calendar", "holidays_file"))))
    if parser.has_section("holidays"):
        for name, text in parser.items("holidays"):
            try:
                dates = {date.fromisoformat(t.strip()) for t in text.split(",") if t.strip()}
            except ValueError as exc:
                raise ConfigurationError(f"holiday {name!r}: {exc}") from None
            holidays.setdefault(name, set()).update(dates)
    try:
        cfg.calendar = CalendarSpec(
            frozenset(int(d) for d in weekend.split(",")) if weekend else frozenset({5, 6}),
            {k: frozenset(v) for k, v in holidays.items()})
    except ValueError as exc:
        raise ConfigurationError(f"calendar: {exc}") from None

    if parser.has_section("classification"):
        rules = []
        for letter, cat in parser.items("classification"):
            if len(letter) != 1:
                raise ConfigurationError(f"classification key {letter!r} must be one letter")
            try:
                rules.append((frozenset(letter.upper()), ContainerCategory.parse(cat)))
            except ValueError as exc:
                raise ConfigurationError(str(exc)) from None
        cfg.classification = ClassificationTable(tuple(rules) + DEFAULT_TABLE.rules)

    models = {}
    for family in ModelFamily:
        section = f"model_{family.value}"
        overrides = dict(parser.items(section)) if parser.has_section(section) else {}
        preset = overrides.pop("preset", "paper").strip().lower()
        if preset not in PRESETS:
            raise ConfigurationError(f"[{section}] preset must be one of {PRESETS}, got {preset!r}")
        params = preset_params(family, preset)
        if overrides:
            if params is None:
                raise ConfigurationError(f"[{section}] takes no settings")
            params = _apply_overrides(params, overrides)
        models[family] = ModelSpec(family, params, cfg.seed)
    cfg.models = models

    if get("paths", "data"):
        cfg.data_path = resolve(get("paths", "data"))
    cfg.artifacts_dir = resolve(get("paths", "artifacts", "artifacts"))
    cfg.reports_dir = resolve(get("paths", "reports", "reports"))
    return cfg.validate()
