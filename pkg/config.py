import os
from dotenv import load_dotenv

# Load environment variables for local development
load_dotenv()


def _env_int(name: str, default: int) -> int:
    value = os.getenv(name)
    if value is None or value.strip() == "":
        return default
    try:
        return int(value)
    except ValueError:
        raise ValueError(f"{name} must be an integer, got {value!r}")


def _env_float(name: str, default: float) -> float:
    value = os.getenv(name)
    if value is None or value.strip() == "":
        return default
    try:
        return float(value)
    except ValueError:
        raise ValueError(f"{name} must be a number, got {value!r}")


def _env_flag(name: str) -> bool:
    return os.getenv(name, "").strip().lower() in ("1", "true", "yes", "on")


# Search defaults
DEFAULT_RESTARTS = _env_int('POSMAP_RESTARTS', 50)
DEFAULT_MAX_ITERS = _env_int('POSMAP_MAX_ITERS', 200)
DEFAULT_CONV_TOL = _env_float('POSMAP_CONV_TOL', 1e-12)
DEFAULT_PSD_TOL = _env_float('POSMAP_PSD_TOL', 1e-9)
DEFAULT_SAMPLES = _env_int('POSMAP_SAMPLES', 200)
DEFAULT_WORKERS = _env_int('POSMAP_WORKERS', 1)
DEFAULT_TRIALS = 20

# Cone elements drawn per trial inside the verify suites
SUITE_CONE_SAMPLES = _env_int('POSMAP_SUITE_CONE_SAMPLES', 4)

# compose() runs both Choi paths and compares them
CHECK_COMPOSE = _env_flag('POSMAP_CHECK_COMPOSE')

LOG_LEVEL = os.getenv('POSMAP_LOG_LEVEL', 'WARNING').upper()

# Standardized filenames
DEFAULT_REPORT_FILENAME = "posmap_report.json"
DEFAULT_CSV_FILENAME = "posmap_trials.csv"
DEFAULT_MAPS_DIR = "maps"

REPORT_SCHEMA_VERSION = 1


def get_default_seed() -> int:
    """
    Default seed, re-read on every call so an exported POSMAP_SEED overrides it
    """
    return _env_int('POSMAP_SEED', 0)
