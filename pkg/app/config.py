"""
Exo-Mix - Configuration
"""
import os
from dotenv import load_dotenv

load_dotenv()


def _int_env(name, default):
    value = os.environ.get(name)
    return int(value) if value not in (None, '') else default


def _float_env(name, default):
    value = os.environ.get(name)
    return float(value) if value not in (None, '') else default


class Config:
    """Base configuration."""
    APP_NAME = os.environ.get('APP_NAME', 'Exo-Mix')
    LOG_LEVEL = os.environ.get('LOG_LEVEL', 'INFO')
    LOG_FORMAT = '%(asctime)s %(levelname)s [%(name)s] %(message)s'

    # npEM
    MAX_ITERATIONS = _int_env('EXOMIX_MAX_ITERATIONS', 500)
    TOLERANCE = _float_env('EXOMIX_TOLERANCE', 1e-6)
    RESTARTS = _int_env('EXOMIX_RESTARTS', 5)
    INIT = os.environ.get('EXOMIX_INIT', 'kmeans')
    INIT_SMOOTHING = 0.05
    # EM iterations run on per-coordinate histograms; numpy bin rule or a count
    HISTOGRAM_BINS = os.environ.get('EXOMIX_HISTOGRAM_BINS', 'auto')
    MAX_HISTOGRAM_BINS = _int_env('EXOMIX_MAX_HISTOGRAM_BINS', 256)
    # kernel matrices are cached while n*n*r stays under this many cells
    KERNEL_MATRIX_CELLS = _int_env('EXOMIX_KERNEL_MATRIX_CELLS', 50_000_000)
    BINNED_GRID_SIZE = _int_env('EXOMIX_BINNED_GRID_SIZE', 4096)
    DENSITY_GRID_POINTS = 512

    # Parallelism (None = executor default)
    THREADS = _int_env('EXOMIX_THREADS', None)

    # Bootstrap
    BOOTSTRAP_REPLICATES = _int_env('EXOMIX_BOOTSTRAP_REPLICATES', 200)
    MIN_BOOTSTRAP_REPLICATES = 50
    MAX_FAILED_SHARE = _float_env('EXOMIX_MAX_FAILED_SHARE', 0.2)

    # Fixed effects
    DEMEAN_TOLERANCE = 1e-10
    DEMEAN_MAX_ITERATIONS = 10000

    # Panel preprocessing
    PRODUCT_THRESHOLD = _float_env('EXOMIX_PRODUCT_THRESHOLD', 0.03)
    COORDINATE_CAP = _int_env('EXOMIX_COORDINATE_CAP', 12)
    MISSING_WEEK_SHARE = _float_env('EXOMIX_MISSING_WEEK_SHARE', 0.15)
    MIN_STORES_PER_ZONE = _int_env('EXOMIX_MIN_STORES_PER_ZONE', 4)
    EXPERIMENT_WINDOW = 6

    # Output
    OUTPUT_DIR = os.environ.get('EXOMIX_OUTPUT_DIR', 'output')
    FLOAT_FORMAT = '%.17g'


class DevelopmentConfig(Config):
    """Development configuration."""
    LOG_LEVEL = os.environ.get('LOG_LEVEL', 'DEBUG')


class ProductionConfig(Config):
    """Production configuration (batch reproduction runs)."""
    LOG_LEVEL = os.environ.get('LOG_LEVEL', 'INFO')


class TestingConfig(Config):
    """Testing configuration."""
    TESTING = True
    LOG_LEVEL = 'WARNING'
    MAX_ITERATIONS = 200
    RESTARTS = 2
    THREADS = 1
    BOOTSTRAP_REPLICATES = 50


config = {
    'development': DevelopmentConfig,
    'production': ProductionConfig,
    'testing': TestingConfig,
    'default': ProductionConfig
}
