import os

class Config:
    """Application configuration from environment variables."""

    # Debug mode - enables verbose algorithm logging (set to 'true' while developing)
    DEV_DEBUG = os.environ.get('DEV_DEBUG', 'false').lower() in ('true', '1', 'yes')

    # Flask
    MAX_CONTENT_LENGTH = int(os.environ.get('MAX_CONTENT_LENGTH', 5 * 1024 * 1024))  # 5MB

    # Schema identifier embedded in every config and report file
    MFG_SCHEMA_VERSION = os.environ.get('MFG_SCHEMA_VERSION', 'mfg/1')

    # Report output
    MFG_REPORT_DIR = os.environ.get('MFG_REPORT_DIR', './data/reports')

    # Randomized suites never read ambient entropy; this is the fallback seed
    MFG_DEFAULT_SEED = int(os.environ.get('MFG_DEFAULT_SEED', 0))

    # Resolution settings (0 = pick the degree window automatically)
    MFG_DEGREE_BOUND = int(os.environ.get('MFG_DEGREE_BOUND', 0))
    MFG_MAX_STEPS = int(os.environ.get('MFG_MAX_STEPS', 8))

    # Finite-dimensional algebra search budgets
    MFG_IDEMPOTENT_SEARCH_ATTEMPTS = int(os.environ.get('MFG_IDEMPOTENT_SEARCH_ATTEMPTS', 200))
    MFG_BRUTE_FORCE_MAX_DIM = int(os.environ.get('MFG_BRUTE_FORCE_MAX_DIM', 6))

    # Parallel task execution (--parallel)
    MFG_PARALLEL_WORKERS = int(os.environ.get('MFG_PARALLEL_WORKERS', 4))

    # Background jobs started through the HTTP API
    MFG_JOB_CLEANUP_SECONDS = int(os.environ.get('MFG_JOB_CLEANUP_SECONDS', 3600))
