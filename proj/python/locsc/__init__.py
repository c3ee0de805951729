"""Python bindings for the locality-regularized sparse coding toolkit."""

import numpy as np

from ._core import (
    GaborParams,
    LscError,
    bipartite_laplacian,
    eigh,
    encode,
    fold_phase,
    gabor_fit,
    init_dictionary,
    knn_adjacency,
    lap_code_gradient,
    lap_penalty,
    laplacian,
    momentum_schedule,
    phase_histogram,
    project_simplex,
    quadratic_neuron,
    render_gabor,
    save_tensor,
    simplex_shift,
    spectral_cluster,
    spectral_norm_sq_inv,
    sta_receptive_fields,
    symmetry_score,
    train,
    wl_atom_gradient,
    wl_code_gradient,
    wl_penalty,
)
from ._core import load_tensor as _load_tensor

__version__ = "0.1.0"


def load_tensor(path):
    """Read an SCT1 file into a numpy array of its stored shape."""
    dims, data = _load_tensor(str(path))
    return np.asarray(data, dtype=np.float64).reshape(dims)


__all__ = [name for name in dir() if not name.startswith("_")]
