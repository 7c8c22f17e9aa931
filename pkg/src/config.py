"""
Runtime settings for LimitLab.

Defaults are the numeric constants of the library; any of them can be
overridden through LIMITLAB_* environment variables, and the CLI flags
override both.
"""

import logging
import os
from dataclasses import dataclass, replace
from typing import Mapping, Optional, Tuple

logger = logging.getLogger(__name__)

ENV_PREFIX = "LIMITLAB_"

DEFAULT_PROBE_DEPTHS: Tuple[int, ...] = tuple(2 ** k for k in range(4, 15))


@dataclass(frozen=True)
class Settings:
    """Numeric knobs used across the modules"""
    limit_tolerance: float = 1e-9        # Cauchy test for Sampled diagonals
    probe_depths: Tuple[int, ...] = DEFAULT_PROBE_DEPTHS
    symbol_tolerance: float = 1e-6       # epsilon for symbol non-vanishing
    samples: int = 2 ** 14               # circle samples N
    invertibility_cut: float = 1e-10     # sigma_min cut for "invertible"
    near_band: float = 1e3               # cut * near_band marks near-threshold fibres
    section_sizes: Tuple[int, ...] = (50, 100, 200)
    rank_tol: float = 1e-8
    dense_limit: int = 64
    power_tol: float = 1e-12
    power_max_iter: int = 100_000
    n_jobs: int = 1
    log_level: str = "WARNING"

    def with_overrides(self, **changes) -> "Settings":
        changes = {k: v for k, v in changes.items() if v is not None}
        return replace(self, **changes)


def _int_tuple(text: str) -> Tuple[int, ...]:
    return tuple(int(part) for part in text.replace(";", ",").split(",") if part.strip())


_PARSERS = {
    "TOLERANCE": ("limit_tolerance", float),
    "PROBE_DEPTHS": ("probe_depths", _int_tuple),
    "SYMBOL_TOLERANCE": ("symbol_tolerance", float),
    "SAMPLES": ("samples", int),
    "INVERTIBILITY_CUT": ("invertibility_cut", float),
    "SECTIONS": ("section_sizes", _int_tuple),
    "RANK_TOL": ("rank_tol", float),
    "N_JOBS": ("n_jobs", int),
    "LOG_LEVEL": ("log_level", str),
}


def load_settings(environ: Optional[Mapping[str, str]] = None) -> Settings:
    """Build Settings from defaults plus LIMITLAB_* environment overrides."""
    environ = os.environ if environ is None else environ
    overrides = {}
    for suffix, (name, parse) in _PARSERS.items():
        raw = environ.get(ENV_PREFIX + suffix)
        if raw is None or raw == "":
            continue
        try:
            overrides[name] = parse(raw)
        except ValueError:
            logger.warning(f"Ignoring malformed {ENV_PREFIX}{suffix}={raw!r}")
    return Settings().with_overrides(**overrides)


DEFAULT_SETTINGS = Settings()
