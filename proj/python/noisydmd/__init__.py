"""Noise-robust dynamic mode decomposition."""

from ._core import (
    ConfigError,
    DmdModel,
    Error,
    IoError,
    NumericalError,
    SnapshotMatrix,
    add_noise,
    cc_paper,
    cc_pearson,
    dmd_fit,
    empirical_snr_db,
    load,
    numerical_rank,
    relative_error_series,
    rmse,
    rpca_adm,
    rpca_ialm,
    save,
    shrink,
    solve_fne,
    solve_nlse,
    solve_swe,
    svt,
    tls_fit,
    tls_project,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
