"""
Run-wide defaults read from the environment (and an optional .env file).

Every value can be overridden per call or per CLI run; the environment only
supplies defaults.
"""
import os

from dotenv import load_dotenv

script_dir = os.path.dirname(os.path.realpath(__file__))
repo_root = os.path.join(script_dir, '..', '..')

load_dotenv(dotenv_path=os.path.join(repo_root, '.env'))

# published upper bound for the real Grothendieck constant
GROTHENDIECK_CONSTANT = float(os.getenv('LATTICE_GROTHENDIECK_CONSTANT', '1.78221'))

ORACLE_TOLERANCE = float(os.getenv('LATTICE_ORACLE_TOLERANCE', '1e-9'))
ESTIMATOR_TOLERANCE = float(os.getenv('LATTICE_ESTIMATOR_TOLERANCE', '1e-2'))
RESIDUAL_TOLERANCE = float(os.getenv('LATTICE_RESIDUAL_TOLERANCE', '1e-8'))

DEFAULT_RESTARTS = int(os.getenv('LATTICE_RESTARTS', '32'))
DEFAULT_MAX_ITER = 10_000
STATIONARITY_TOLERANCE = 1e-10

CORPUS_ROOT = os.getenv(
    'LATTICE_CORPUS_ROOT',
    os.path.normpath(os.path.join(repo_root, 'cli_reporting', 'corpus')))


def corpus_root():
    """Corpus directory, re-reading the environment so tests can patch it.

    Returns:
        string: directory path
    """
    return os.getenv('LATTICE_CORPUS_ROOT', CORPUS_ROOT)
