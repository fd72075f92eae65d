"""Constants for the quorum-allpairs command line and pipeline."""

# Import protocol-level constants from the core library
# Re-exported for application use
from .quorum_core import (  # noqa: F401
    FORMAT_ALIASES,
    KERNEL_ALIASES,
    KERNEL_HANDSHAKE,
    POLICIES,
    POLICY_BALANCED,
)

NAME = "quorum-allpairs"
VERSION = "1.0.0"

# Search
# Candidate-prefix extensions; finishes every p <= 64, though some p above 50 take tens of seconds
DEFAULT_SEARCH_BUDGET = 20_000_000
MIN_SEARCH_BUDGET = 1

# Scheduling and execution
DEFAULT_POLICY = POLICY_BALANCED
DEFAULT_KERNEL = KERNEL_HANDSHAKE
DEFAULT_FORMAT = "csv"
DEFAULT_WORKERS = 1
MIN_WORKERS = 1
MAX_WORKERS = 256
DEFAULT_REPEATS = 3
MIN_REPEATS = 1
DEFAULT_WORKERS_LIST = "1,2,4,8"

# Numeric results up to this many rows are printed when no --out is given
MAX_PRINTED_MATRIX = 20

# Max worker element-pair cost over mean accepted for balanced schedules
BALANCE_TOLERANCE = 1.25

# Difference-set cache
ENV_CACHE_PATH = "QUORUM_ALLPAIRS_CACHE"
DEFAULT_CACHE_DIR = "~/.cache/quorum-allpairs"
DEFAULT_CACHE_FILENAME = "diffsets.txt"

# Exit status
EXIT_OK = 0
EXIT_VERIFICATION_FAILED = 1
EXIT_USAGE = 2

# Console logging
LOG_FORMAT = "%(log_color)s%(levelname)-8s%(reset)s %(name)s: %(message)s"
LOG_COLORS = {
    "DEBUG": "cyan",
    "INFO": "green",
    "WARNING": "yellow",
    "ERROR": "red",
    "CRITICAL": "red,bg_white",
}
