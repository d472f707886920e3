//! Coupled runs of the three models from shared initial data, the error
//! quantities compared across them, and log-log rate fits over `mu` sweeps.

mod coupled;
mod profile;
mod rates;
mod run;
mod sweep;

pub use coupled::{build_coupled_initial_data, CoupledInitialData};
pub use profile::{InitialProfile, ProfileShape, LOCALIZATION_RATIO};
pub use rates::{fit_rate, RateFit};
pub use run::{
    momentum_error, pair_error, pair_error_kdv, pair_error_ww, run_triple, ExperimentConfig,
    PairError, RunResult, Sample, TripleRun, EDGE_LIMIT, TIME_TOL,
};
pub use sweep::{
    convergence_study, fit_families, point_config, validate_mus, FamilyRate, Reduction,
    SweepConfig, SweepReport, FAMILIES,
};
