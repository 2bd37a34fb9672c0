"""Pipeline configuration: one dataclass holding every tunable, a flat
``key = value`` config-file reader, and validation against each stage's
preconditions so bad configs fail before any work starts."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path


class ConfigError(ValueError):
    pass


@dataclass
class PipelineConfig:
    resize_width: int = 350
    resize_height: int = 350

    clahe_tiles_x: int = 8
    clahe_tiles_y: int = 8
    clahe_clip: float = 2.0
    median_k: int = 5

    exudate_se: int = 7
    exudate_threshold: int = 235
    disc_percentile: float = 99.5
    disc_dilate: int = 25

    vessel_se_sizes: tuple[int, ...] = (5, 11, 23)
    vessel_threshold: int = 15
    vessel_min_area: int = 200

    ma_se: int = 7
    ma_close_se: int = 5
    ma_threshold: int | None = None  # None: Otsu on the closed image
    ma_min_area: int = 5
    ma_max_area: int = 150

    hist_bins: int = 32

    classifier: str = "rf"
    n_trees: int = 100
    max_depth: int = 16
    m_features: int | None = None  # None: ceil(sqrt(feature dim))
    svm_lambda: float = 1e-4
    svm_epochs: int = 200

    train_frac: float = 0.75
    seed: int = 42

    def validate(self) -> "PipelineConfig":
        if self.resize_width < 1 or self.resize_height < 1:
            raise ConfigError("resize dimensions must be positive")
        if self.clahe_tiles_x < 1 or self.clahe_tiles_y < 1:
            raise ConfigError("CLAHE tile grid must be at least 1x1")
        if self.clahe_clip < 1.0:
            raise ConfigError("CLAHE clip limit must be >= 1.0")
        if self.median_k < 1 or self.median_k % 2 == 0:
            raise ConfigError("median window size must be a positive odd integer")
        for name in ("exudate_se", "disc_dilate", "ma_se", "ma_close_se"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")
        if not self.vessel_se_sizes or any(s < 1 for s in self.vessel_se_sizes):
            raise ConfigError("vessel_se_sizes must be a non-empty list of positive sizes")
        if list(self.vessel_se_sizes) != sorted(self.vessel_se_sizes):
            raise ConfigError("vessel_se_sizes must be ordered small to large")
        for name in ("exudate_threshold", "vessel_threshold"):
            if not 0 <= getattr(self, name) <= 255:
                raise ConfigError(f"{name} must lie in 0..255")
        if self.ma_threshold is not None and not 0 <= self.ma_threshold <= 255:
            raise ConfigError("ma_threshold must lie in 0..255 (or 'otsu')")
        if not 0.0 <= self.disc_percentile <= 100.0:
            raise ConfigError("disc_percentile must lie in 0..100")
        if self.vessel_min_area < 0 or self.ma_min_area < 0:
            raise ConfigError("area bounds must be nonnegative")
        if self.ma_min_area > self.ma_max_area:
            raise ConfigError("ma_min_area must not exceed ma_max_area")
        if self.hist_bins < 1 or 256 % self.hist_bins != 0:
            raise ConfigError("hist_bins must divide 256")
        if self.classifier not in ("rf", "svm", "nb"):
            raise ConfigError("classifier must be one of rf, svm, nb")
        if self.n_trees < 1 or self.max_depth < 1:
            raise ConfigError("forest size and depth must be positive")
        if self.m_features is not None and self.m_features < 1:
            raise ConfigError("m_features must be positive")
        if self.svm_lambda <= 0.0 or self.svm_epochs < 1:
            raise ConfigError("svm_lambda must be positive and svm_epochs at least 1")
        if not 0.0 < self.train_frac < 1.0:
            raise ConfigError("train_frac must lie strictly between 0 and 1")
        return self


_FIELD_TYPES = {f.name: f for f in dataclasses.fields(PipelineConfig)}


def _parse_value(name: str, raw: str):
    raw = raw.strip()
    if name == "vessel_se_sizes":
        try:
            return tuple(int(p) for p in raw.replace(",", " ").split())
        except ValueError:
            raise ConfigError(f"{name}: expected a list of integers, got {raw!r}") from None
    if name in ("ma_threshold", "m_features"):
        if raw.lower() in ("none", "otsu", "auto"):
            return None
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"{name}: expected an integer or 'none', got {raw!r}") from None
    if name == "classifier":
        return raw
    default = getattr(PipelineConfig(), name)
    caster = type(default)
    try:
        if caster is bool:
            return raw.lower() in ("1", "true", "yes")
        return caster(raw)
    except ValueError:
        raise ConfigError(f"{name}: cannot parse {raw!r} as {caster.__name__}") from None


def read_config_file(path) -> dict:
    """Parse a flat ``key = value`` file; '#' starts a comment line."""
    overrides = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, _, value = stripped.partition("=")
        key = key.strip()
        if key not in _FIELD_TYPES:
            raise ConfigError(f"{path}:{lineno}: unknown option {key!r}")
        overrides[key] = _parse_value(key, value)
    return overrides


def build_config(file_path=None, flag_overrides: dict | None = None) -> PipelineConfig:
    """Defaults, then config file, then command-line flags (flags win).

    Keys absent from `flag_overrides` were not given; a present key always
    overrides, even when its value is None (e.g. an explicit Otsu request).
    """
    values: dict = {}
    if file_path is not None:
        values.update(read_config_file(file_path))
    for key, value in (flag_overrides or {}).items():
        if key not in _FIELD_TYPES:
            raise ConfigError(f"unknown option {key!r}")
        values[key] = value
    return PipelineConfig(**values).validate()
