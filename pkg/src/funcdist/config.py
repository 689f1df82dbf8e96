"""Run configuration: INI sections with typed keys, strict validation, resolved dump."""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass
from pathlib import Path


class ConfigError(ValueError):
    pass


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in text.replace(" ", "").split(",") if v)


def _str_list(text: str) -> tuple[str, ...]:
    return tuple(v.strip() for v in text.split(",") if v.strip())


def _choice(*options):
    def parse(text):
        if text not in options:
            raise ValueError(f"expected one of {options}, got {text!r}")
        return text
    return parse


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ",".join(str(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return "" if value is None else str(value)


# section -> key -> (parser, default)
SCHEMA = {
    "run": {
        "seed": (int, 20240101),
    },
    "paths": {
        "firms": (str, ""),
        "distances": (str, ""),
        "counts": (str, ""),
        "deals": (str, ""),
        "out": (str, "out"),
    },
    "panel": {
        "output_kind": (_choice("LogQ", "ROA"), "LogQ"),
        "min_firms": (int, 30),
        "asset_threshold": (float, 10.0),
        "winsorize": (_bool, False),
        "winsorize_pct": (float, 0.01),
    },
    "network": {
        "layer_sizes": (_int_list, (8, 16, 16, 1)),
    },
    "train": {
        "epochs": (int, 2000),
        "batch_size": (int, 128),
        "full_batch_below": (int, 256),
        "learning_rate": (float, 1e-3),
        "beta1": (float, 0.9),
        "beta2": (float, 0.999),
        "eps": (float, 1e-8),
        "early_stop_patience": (int, 200),
    },
    "distance": {
        "holdout_fraction": (float, 0.0),
        "convention": (_choice("RMSE", "MSE"), "RMSE"),
    },
    "stylized": {
        "sigma": (float, 0.1),
        "n": (int, 200_000),
        "tolerance": (float, 0.01),
        "oracle": (_choice("published", "exact"), "published"),
    },
    "synthetic": {
        "industries": (int, 12),
        "year_start": (int, 1990),
        "year_end": (int, 2021),
        "firms_per_industry": (int, 60),
        "distance_source": (_choice("synthetic", "file"), "synthetic"),
        "lambda0": (float, 6.0),
        "gamma_count": (float, -3.0),
        "gamma_tf": (float, 0.0),
        "gamma_int": (float, -4.0),
        "count_noise_sd": (float, 0.3),
        "n_deals": (int, 3000),
        "simulate_returns": (_bool, True),
    },
    "regress": {
        "tables": (_str_list, ("table2", "table3", "table4", "table6", "table9", "table10")),
    },
    # canonical FirmYear field -> CSV column; any subset of the fields
    "schema": {},
}


@dataclass
class RunConfig:
    values: dict
    base_dir: Path

    def __getitem__(self, section):
        return self.values[section]

    def path(self, key: str) -> Path | None:
        raw = self.values["paths"][key]
        if not raw:
            return None
        p = Path(raw)
        return p if p.is_absolute() else (self.base_dir / p)

    @property
    def seed(self) -> int:
        return self.values["run"]["seed"]

    def resolved_text(self) -> str:
        parser = configparser.ConfigParser(interpolation=None)
        parser.optionxform = str
        for section in SCHEMA:
            parser.add_section(section)
            for key, value in self.values[section].items():
                if (section, key) == ("paths", "out"):
                    continue  # the file lives in the output directory
                parser.set(section, key, _fmt(value))
        buf = io.StringIO()
        parser.write(buf)
        return buf.getvalue()


def parse_config(text: str, base_dir=".") -> RunConfig:
    from .panel import FIRM_FIELDS

    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    unknown = [s for s in parser.sections() if s not in SCHEMA]
    if unknown:
        raise ConfigError(f"unknown config sections: {unknown}")
    values = {}
    for section, keys in SCHEMA.items():
        given = dict(parser.items(section)) if parser.has_section(section) else {}
        if section == "schema":
            bad = [k for k in given if k not in FIRM_FIELDS]
            if bad:
                raise ConfigError(f"unknown keys in [schema]: {bad}")
            values[section] = {k: given[k] for k in sorted(given)}
            continue
        bad = [k for k in given if k not in keys]
        if bad:
            raise ConfigError(f"unknown keys in [{section}]: {bad}")
        values[section] = {}
        for key, (conv, default) in keys.items():
            if key in given:
                try:
                    values[section][key] = conv(given[key])
                except ValueError as exc:
                    raise ConfigError(f"[{section}] {key}: {exc}") from exc
            else:
                values[section][key] = default
    _check(values)
    return RunConfig(values, Path(base_dir))


def _check(v):
    if not 0 <= v["distance"]["holdout_fraction"] < 1:
        raise ConfigError("[distance] holdout_fraction must lie in [0, 1)")
    if v["train"]["epochs"] < 1 or v["train"]["learning_rate"] <= 0:
        raise ConfigError("[train] epochs must be >= 1 and learning_rate > 0")
    sizes = v["network"]["layer_sizes"]
    if len(sizes) < 3 or sizes[0] != 8 or sizes[-1] != 1:
        raise ConfigError("[network] layer_sizes must start with 8, end with 1, have a hidden layer")
    if v["stylized"]["n"] < 1 or v["stylized"]["sigma"] < 0:
        raise ConfigError("[stylized] needs n >= 1 and sigma >= 0")
    if v["synthetic"]["year_end"] < v["synthetic"]["year_start"]:
        raise ConfigError("[synthetic] year_end precedes year_start")
    if not 1 <= v["synthetic"]["industries"] <= 12:
        raise ConfigError("[synthetic] industries must lie in 1..12")


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, path.parent)
