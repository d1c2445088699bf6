from bilap.helpers.base_config import BaseConfig


class Config(BaseConfig):
    """
    Library defaults. Allowed types for attributes and nested dictionaries:
    [str, int, float, bool]. Exception will be thrown while trying to override any other type.
    ----------------
    Only the settings named in ENV_WHITELIST are read from environment variables, they do not
    change any number a report contains. Example:
    'bilap__WORKERS=4' runs grid quadrature on four threads.
    Every other value here is echoed into each report, so the config hash covers it.
    """

    UPDATE_FROM_ENV = True
    ENV_KEY_PREFIX = "bilap"
    ENV_WHITELIST = ("WORKERS", "LOG_LEVEL")

    # threads used to evaluate integrands on grid chunks (the sum does not depend on it)
    WORKERS = 1
    LOG_LEVEL = "warning"

    # root finding
    ROOT_RESIDUAL_TOL = 1e-11
    BISECTION_REL_WIDTH = 1e-13
    NEWTON_MAX_STEPS = 3
    # relative step of the finite-difference check of e'(mu)
    FD_REL_STEP = 1e-5
    UNIQUENESS_PROBE_POINTS = 64
    UNIQUENESS_PROBE_DECADES = 3
    # ratio of the coarse bracket handed from adaptive quadrature to the fixed grid
    COARSE_BRACKET_RATIO = 1.25
    BRACKET_MAX_STEPS = 200
    # finite-grid oracle roots
    ORACLE_RESIDUAL_TOL = 1e-13

    # torus quadrature
    MAX_DIMENSION = 5
    QUADRATURE_TOL = 1e-12
    GRID_N_MAX = 4096
    GRID_START_N = 8
    MAX_GRID_POINTS = 10 ** 8
    # fixed grids up to this size keep |v|^2 and the edge distances in memory
    GRID_CACHE_POINTS = 2 ** 23
    # points per grid chunk handed to the integrand
    CHUNK_POINTS = 2 ** 16
    PEAK_POINTS_PER_WIDTH = 8
    # doublings allowed past the peak resolution
    PEAK_HEADROOM_DOUBLINGS = 3

    # threshold integrals: grid ladders for extrapolation and divergence levels
    THRESHOLD_LADDERS = {
        1: "256,512,1024",
        2: "64,128,256",
        3: "24,32,40",
        4: "16,20,24",
        5: "12,16,20",
    }
    # relative spread accepted between the two- and three-level extrapolants
    EXTRAPOLATION_REL_TOL = 1e-3
    DIVERGENCE_BASE_N = {1: 64, 2: 32, 3: 16, 4: 8, 5: 4}
    DIVERGENCE_LEVELS = 4
    # divergent: each of DIVERGENCE_DOUBLINGS consecutive doublings grows the grid value by more than this
    DIVERGENCE_GROWTH = 0.05
    DIVERGENCE_DOUBLINGS = 3

    # radial limits and vanishing orders
    RICHARDSON_LADDER_START = 0.1
    RICHARDSON_LEVELS = 9
    RICHARDSON_REL_TOL = 1e-6
    ORDER_SLOPE_TOL = 0.1
    ORDER_SLOPE_T = 0.02
    MAX_JET_ORDER = 12
    JET_EXTRA_ORDERS = 10
    MOMENT_REL_TOL = 1e-12
    SPHERE_CIRCLE_POINTS = 64
    SPHERE_JACOBI_POINTS = 9

    # heat-kernel engine
    KERNEL_QUAD_TOL = 1e-13
    KERNEL_QUAD_LIMIT = 1000
    KERNEL_DERIVATIVE_STEP = 2e-3

    # appendix integrals
    JM_QUAD_TOL = 1e-12
    JM_QUAD_LIMIT = 200

    # oracle
    DENSE_EIG_CAP = 4096

    # fits
    FIT_MIN_POINTS = 6
    FIT_MAX_CONDITION = 1e8


config = Config()
