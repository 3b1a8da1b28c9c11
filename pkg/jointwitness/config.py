import json
import logging
import sys

if sys.version_info >= (3, 11):
    import tomllib
else:  # tomllib is stdlib from 3.11; tomli is its backport
    import tomli as tomllib
from pathlib import Path
from typing import Any

from pydantic_settings import BaseSettings

from jointwitness.exceptions import InvalidInputError

logger = logging.getLogger(__name__)


class Settings(BaseSettings):
    # Numerical tolerances
    bloch_tolerance: float = 1e-12
    orthogonality_tolerance: float = 1e-10
    negativity_tolerance: float = 1e-12
    probability_clamp: float = 1e-15
    lp_tolerance: float = 1e-9

    # Witness and LP defaults
    default_eta_factor: float = 0.9
    grid_rings: int = 24
    grid_angles: int = 48
    grid_warning_threshold: float = 0.45

    # Shot simulation
    certification_sigma: float = 5.0
    covariance_pseudocount: float = 0.5

    sweep_workers: int = 4
    log_level: str = "WARNING"

    database_url: str = "sqlite+aiosqlite:///data/jointwitness.db"
    record_runs: bool = False

    class Config:
        env_prefix = "JOINTWITNESS_"


settings = Settings()


def tolerances() -> dict[str, float]:
    """Every tolerance in effect, as echoed into reports."""
    return {
        "bloch": settings.bloch_tolerance,
        "orthogonality": settings.orthogonality_tolerance,
        "negativity": settings.negativity_tolerance,
        "probability_clamp": settings.probability_clamp,
        "lp": settings.lp_tolerance,
        "certification_sigma": settings.certification_sigma,
        "covariance_pseudocount": settings.covariance_pseudocount,
    }


def read_config_file(path: Path) -> dict[str, Any]:
    """Read a TOML or JSON run configuration mirroring the CLI flags."""
    if not path.exists():
        raise InvalidInputError(f"Config file not found: {path}")

    try:
        if path.suffix == ".toml":
            with path.open("rb") as fh:
                data = tomllib.load(fh)
        elif path.suffix == ".json":
            data = json.loads(path.read_text())
        else:
            raise InvalidInputError(f"Unsupported config format: {path.suffix} (use .toml or .json)")
    except (tomllib.TOMLDecodeError, json.JSONDecodeError) as e:
        raise InvalidInputError(f"Could not parse config file {path}: {e}")

    if not isinstance(data, dict):
        raise InvalidInputError(f"Config file {path} must hold a table of options")

    logger.info(f"Loaded run config from {path}")
    # Flag names use dashes on the command line, underscores in files
    return {key.replace("-", "_"): value for key, value in data.items()}
