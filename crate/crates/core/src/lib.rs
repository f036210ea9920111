//! Variability of bootstrapped network structures.
//!
//! The edge set of a graph over `v` nodes is a vector of `k = v(v-1)/2`
//! binary indicators; a collection of bootstrapped graphs is a sample from a
//! multivariate Bernoulli distribution. This crate estimates its first two
//! moments, summarizes the covariance with descriptive statistics, and tests
//! it against the maximum-entropy case `Σ = I/4` in which every edge is an
//! independent fair coin.
//!
//! ```
//! use netvar::{graph, estimate_moments, variability::{self, RankPolicy, StatKind}};
//!
//! let text = "nodes A B C\ngraph\nA B\ngraph\nA B\nB C\ngraph\n";
//! let samples = graph::parse_sample_set(text, false).unwrap();
//! let est = estimate_moments(samples.incidence());
//! let total = variability::statistic(est.sigma_hat(), StatKind::Total, RankPolicy::Reduce).unwrap();
//! assert!(total.normalized > 0.0 && total.normalized < 1.0);
//! ```

pub mod asymptotic;
pub mod bernoulli;
pub mod error;
pub mod graph;
pub mod montecarlo;
pub mod special;
pub mod variability;

pub use asymptotic::{Method, TestResult};
pub use bernoulli::{estimate_moments, estimate_moments_with, CovMatrix, Estimator, MomentEstimate};
pub use error::{Error, Result};
pub use graph::{parse_sample_set, Incidence, NodeSet, SampleSet};
pub use montecarlo::{mc_pvalue, McConfig, McEstimate};
pub use variability::{RankPolicy, StatKind, StatValue};
