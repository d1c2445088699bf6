BOTTOM = "bottom"
TOP = "top"
SIDES = (BOTTOM, TOP)

GRID_METHOD = "grid"
KERNEL_METHOD = "kernel"
METHODS = (GRID_METHOD, KERNEL_METHOD)

CSV_FORMAT = "csv"
JSON_FORMAT = "json"
FORMATS = (CSV_FORMAT, JSON_FORMAT)

REPORT_FILE_PREFIX = "bilap"
SWEEP_COLUMNS = (
    "mu",
    "side",
    "e",
    "residual",
    "grid_N",
    "iterations",
    "e_prime_analytic",
    "e_prime_fd",
    "status",
)
ORACLE_COLUMNS = ("N", "e_secular", "e_matrix", "diff", "continuum_gap")

EXIT_OK = 0
EXIT_CONFIG_ERROR = 2
EXIT_NUMERICAL_FAILURE = 3
EXIT_CHECK_FAILED = 4

# eigenvalue sides
BELOW_ZERO = "BelowZero"
ABOVE_TOP = "AboveTop"

# sweep row statuses
STATUS_OK = "ok"
STATUS_NO_DISCRETE_SPECTRUM = "no_discrete_spectrum"
STATUS_ERROR = "error"
