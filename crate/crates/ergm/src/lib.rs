//! Exponential random graph models for undirected networks.
//!
//! Terms are trait objects built by name from a [`TermRegistry`]. Estimation
//! starts from the maximum pseudo-likelihood estimate and refines it with
//! Monte Carlo maximum likelihood; [`ExactOracle`] enumerates every graph on
//! up to seven nodes for reference values.

pub mod bind;
pub mod exact;
pub mod gof;
pub mod mle;
pub mod model;
pub mod mple;
pub mod report;
pub mod sampler;
pub mod tally;
pub mod terms;

use thiserror::Error;

pub use bind::{bind_covariates, BindError, BindOptions, BoundNetwork};
pub use exact::{exact_log_k, exact_mle, ExactOracle, OracleError};
pub use gof::{goodness_of_fit, GofReport};
pub use mle::{information_criteria, mcmc_mle, ErgmFit, EstimationError, MleOptions};
pub use model::{standard_terms, ErgmModel};
pub use mple::{mple, MpleFit};
pub use report::{format_estimate, format_fit, stars};
pub use sampler::{derive_seed, sample_networks, Chain, McmcParams, Sample, SamplerError};
pub use tally::Tallies;
pub use terms::{Covariates, Term, TermRegistry, TermSpec};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("unknown term kind `{0}`")]
    UnknownTerm(String),
    #[error("term `{0}` does not take a decay")]
    UnexpectedDecay(String),
    #[error("decay must be a non-negative finite number, got {0}")]
    InvalidDecay(f64),
    #[error("term `{0}` does not take a covariate")]
    UnexpectedCovariate(String),
    #[error("term `{0}` needs a covariate name")]
    MissingCovariateName(String),
    #[error("no covariate named `{0}`")]
    UnknownCovariate(String),
    #[error("covariate `{name}` has {got} entries, expected {expected}")]
    CovariateShape { name: String, expected: usize, got: usize },
    #[error("covariate `{name}` has a non-finite value at position {index}")]
    NonFiniteCovariate { name: String, index: usize },
    #[error("duplicate term label `{0}`")]
    DuplicateLabel(String),
    #[error("a model needs at least one term")]
    NoTerms,
    #[error("graph has {got} nodes, model expects {expected}")]
    GraphSize { expected: usize, got: usize },
    #[error("models are defined on undirected graphs")]
    Directed,
    #[error("invalid dyad ({0}, {1})")]
    InvalidDyad(usize, usize),
    #[error("parameter vector has length {got}, model has {expected} terms")]
    ThetaLength { expected: usize, got: usize },
}
