"""Classical diffusion maps and a dense state-vector simulation of their quantum counterpart."""
from .classical_dm import diffusion_map, eigendecompose, kernel_matrix, transition_matrix
from .dataset import DataSet, gen_blobs, gen_toroidal_helix, gen_two_clusters, load_csv
from .errors import (
    AccuracyError,
    CapacityError,
    ExtractionError,
    IngestionError,
    NumericalError,
    ParameterError,
    PhaseResolutionError,
    QDMError,
)
from .pipeline import RunConfig, run_classical, run_quantum

__version__ = "0.1.0"
