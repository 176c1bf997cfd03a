class LabData:
    """
    Contains metadata about the laboratory build.

    Attributes
    ----------
    VERSION : str
        The current version of the lab, echoed into every run manifest.
    NAME : str
        The program name shown in the banner and in ``--help``.
    """

    VERSION: str = "1.2.0"  # The current version of the lab (bump on any numerical change)
    NAME: str = "wavemap-lab"  # Program name used by the banner and parser


# Problem Defaults
DEFAULT_C: float = 1.0  # Half-width of the data support [-C, C]
DEFAULT_EPS: float = 0.3  # Default amplitude of the counterexample data
DEFAULT_M: int = 3  # Default target dimension (sphere S^{m-1} in R^m)
DEFAULT_BUMP: str = "asym"  # Default bump shape id ("asym" or "even")
DEFAULT_STEPS_PER_C: int = 256  # Default grid resolution, h_step = C / 256
EPS_MAX: float = 0.5  # Largest amplitude for which the expansion regime applies

# Tolerances
TOL_SPHERE: float = 1e-12  # Unit-norm tolerance for stored slices
TOL_SYM: float = 1e-10  # Symmetry tolerance for time-symmetric null fields
TOL_IDENTITY: float = 1e-10  # Relative tolerance of quadrature identities
TOL_LEMMA: float = 1e-9  # Relative tolerance of the boundary record identity
TAIL_TOL: float = 1e-10  # Allowed mismatch between the two ends of a transform input
DEGENERATE_RATIO: float = 1e-6  # Relative floor below which a bump cannot witness the obstruction
BLOWUP_TOL: float = 0.1  # Pre-projection sphere defect that aborts an evolution
CORRECTOR_TOL: float = 1e-14  # Convergence threshold of the implicit nonlinear update
CORRECTOR_SWEEPS: int = 8  # Maximum fixed-point sweeps per update
DESC_TOL_FACTOR: float = 10.0  # Extraction tolerance is DESC_TOL_FACTOR * (h / C)^2
ORDER_FAIL: float = 1.5  # Observed convergence order below which a study fails
EXTRAPOLATION_ORDER_BAND: tuple[float, float] = (1.5, 2.5)  # Accepted h-order of alpha

# Quadrature
QUAD_INTERVALS: int = 4096  # Simpson intervals for one-dimensional bump integrals
NULL_STEPS_PER_C: int = 512  # Lattice resolution for perturbation checks, delta = C / 512
HEAVISIDE_POINTS: int = 64  # Simpson intervals per dyadic annulus in the Heaviside demo
HEAVISIDE_J_MIN: int = -20  # Lowest dyadic block of the Heaviside demo (2^j / C)
HEAVISIDE_J_MAX: int = 2  # Highest dyadic block of the Heaviside demo, about 4 / C

# Spectral Configuration
PAD_FACTOR: int = 4  # Minimum zero-padding factor of transforms
RESOLUTION_PER_T: float = 10.0  # Padded length is at least this many times T
KAPPA1: float = 10.0  # Lower edge of the lower-bound window is KAPPA1 / T
KAPPA2: float = 0.1  # Upper edge of the lower-bound window is KAPPA2 / C
WINDOW_POINTS_PER_PERIOD: int = 16  # Quadrature nodes per period of sin^2(2 pi T xi)
TRANSFORM_CHUNK: int = 4096  # Frequencies per chunk when transforming profiles

# Perturbation Configuration
KAPPA_CANDIDATE: float = 1.0 / 64.0  # Candidate constant in c5 . e2 = kappa * A * E
KAPPA_RTOL: float = 0.1  # Agreement needed to call kappa resolved

# Experiment Defaults
EPS_SWEEP: tuple[float, ...] = (0.05, 0.075, 0.1, 0.15, 0.2, 0.3, 0.4)  # Default epsilon sweep
SWEEP_STEPS_PER_C: tuple[int, ...] = (1024, 2048)  # Resolutions of the epsilon sweep
GROWTH_T_OVER_C: tuple[float, ...] = (
    10.0, 20.0, 50.0, 100.0, 200.0, 500.0, 1000.0, 2000.0, 5000.0, 10000.0,
)  # Synthesis times of the growth sweep, in units of C
GROWTH_FIT_MIN_T_OVER_C: float = 10.0  # Growth fits use T >= 10 C only
GROWTH_T0_OVER_C: float = 4.0  # Evolution time before profile extraction
SWEEP_T0_OVER_C: float = 2.0  # Evolution time for epsilon-sweep extractions
SYNTH_STEPS_PER_C: int = 32  # Synthesis resolution for large-T slices
CONVERGENCE_STEPS_PER_C: tuple[int, ...] = (256, 512, 1024)  # Resolutions of the convergence study
CASCADE_SCALES: int = 2  # Default number of cascade copies
CASCADE_STEPS_PER_C: int = 256  # Cascade resolution relative to the largest copy
WORKERS: int = 1  # Worker processes for sweeps (1 runs serially)


# Output Configuration
OUTPUT_DIR_ENV: str = "WAVEMAP_OUTPUT_DIR"  # Environment variable naming the output directory
DEFAULT_OUTPUT_DIR: str = "runs"  # Output directory when neither flag nor env var is set
MANIFEST_FILE: str = "manifest.txt"  # Name of the per-run manifest
SVG_HASH_SALT: str = "wavemap-lab"  # Fixed SVG id salt so plots are reproducible


# Command Group Configuration
COG_DIR: str = "cogs"  # The base directory of the command groups to be loaded


# Logging Configuration
LOG_DIR: str = "logs"  # The base directory of the logs to be stored
LOG_FILE: str = "wavemap.log"  # The name of the log file
MAX_LOGS: int = 10  # The maximum number of logs to store
MAX_LOG_SIZE: int = 5 * 1024 * 1024  # Maximum log file size (5 MB)
LOG_LEVEL: str = "INFO"  # The logging level for the application
LOG_DEBUG: bool = False  # A flag to enable or disable debug mode
