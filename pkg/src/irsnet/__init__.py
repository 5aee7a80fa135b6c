"""Coverage, rate and energy efficiency of IRS-assisted cellular networks.

Analytic pipeline (Laplace transforms, Gil-Pelaez inversion, ergodic
rate) with a Monte-Carlo oracle and a CSV-emitting command line.
"""

from importlib import metadata as _md

try:
    __version__ = _md.version("artifact")
except _md.PackageNotFoundError:     # running from a source tree
    __version__ = "0.1.0"

from .config import ConfigError, ScenarioConfig, load_config, parse_config_text  # noqa: E402

__all__ = ["ConfigError", "ScenarioConfig", "load_config", "parse_config_text", "__version__"]
