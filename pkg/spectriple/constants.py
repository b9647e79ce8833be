import logging
import os
from pathlib import Path

from dotenv import load_dotenv

# --- Load constants.env ---
ENV_PATH = Path(__file__).parent / "constants.env"
if ENV_PATH.exists():
    load_dotenv(dotenv_path=ENV_PATH)
else:
    raise FileNotFoundError(ENV_PATH)


def enable_stdout_logs():
    from spectriple.logger import change_console_logger_level

    change_console_logger_level(logging.DEBUG)


def disable_stdout_logs():
    from spectriple.logger import change_console_logger_level

    change_console_logger_level(logging.CRITICAL)


# --- From env (already exported variables take precedence) ---
SPECTRIPLE_MAIN_FOLDER = os.path.expanduser(os.environ["SPECTRIPLE_MAIN_FOLDER"])

# Numerical tolerances
DEFAULT_TOL = float(os.environ["DEFAULT_TOL"])
MAX_MATRIX_DIM_INT = int(os.environ["MAX_MATRIX_DIM_INT"])

# Connes distance minimiser
DISTANCE_RESTARTS_INT = int(os.environ["DISTANCE_RESTARTS_INT"])
DISTANCE_MAX_ITER_INT = int(os.environ["DISTANCE_MAX_ITER_INT"])
DISTANCE_STOP_DELTA = float(os.environ["DISTANCE_STOP_DELTA"])
DISTANCE_PATIENCE_INT = int(os.environ["DISTANCE_PATIENCE_INT"])
DISTANCE_RESTART_AGREEMENT = float(os.environ["DISTANCE_RESTART_AGREEMENT"])

# Heat trace on the flat torus
HEAT_TRACE_TRUNCATION_TOL = float(os.environ["HEAT_TRACE_TRUNCATION_TOL"])

# Certification batches
DEFAULT_SEED_INT = int(os.environ["DEFAULT_SEED_INT"])
DEFAULT_CHECK_TIMEOUT_INT = int(os.environ["DEFAULT_CHECK_TIMEOUT_INT"])
OPTIMAL_CPU_NUM = max(int(os.cpu_count() * 0.5), 1)

# Reports
REPORT_SCHEMA_VERSION_INT = int(os.environ["REPORT_SCHEMA_VERSION_INT"])

# --- Logging levels ---
LOG_LEVEL_FILE = logging.DEBUG
LOG_LEVEL_CONSOLE = logging.CRITICAL
