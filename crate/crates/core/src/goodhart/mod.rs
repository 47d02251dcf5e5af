//! Proxy overoptimization: the four failure regimes (regressional,
//! extremal, causal, adversarial), the posterior-mean fix for the first,
//! and quantilization with its exact expected-overestimate guarantee.

pub mod demos;
pub mod regress;
pub mod world;

pub use demos::{
    adversarial_demo, causal_demo, extremal_demo, AdversarialReport, CausalReport,
    ExtremalRow, UmbrellaModel,
};
pub use regress::{bayes_estimate, regressional_experiment, Estimator, RegressionalSetup};
pub use world::{
    argmax_baseline, expected_overestimate, quantile_distribution, quantilize, ProxyEntry,
    ProxyWorld, QuantilizerConfig, SampledWorld, WorldError,
};
