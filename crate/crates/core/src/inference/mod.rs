//! Maximum-likelihood fitting of GMOP-E, GMOP-W and their sub-models, with
//! observed information, information criteria, goodness-of-fit statistics,
//! TTT curves and descriptive summaries.

mod descriptive;
mod fit;
mod gof;
mod model;
pub mod optimize;

pub use descriptive::{
    descriptive, ttt_curve, validate_table3, Descriptive, TABLE3_N, TABLE3_REFERENCE,
    TABLE3_TOLERANCE,
};
pub use fit::{
    compare_models, compare_models_with, fit, information_criteria, log_likelihood,
    observed_information, standard_errors, Convergence, FitResult, InformationCriteria, Z_975,
};
pub use gof::{gof_from_uniforms, gof_statistics, kolmogorov_sf, GofStatistics};
pub use model::{
    FixedParameter, FreeParameter, Lifetime, LifetimeDistribution, ModelConfig, ModelKind,
    OptimizerSettings, ParamName,
};
