//! Cohort-level statistics over per-scholar home-venue results.

mod curves;
mod groups;
mod hypothesis;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use curves::{pareto_portion_curve, sigmoid_fit, PortionPoint, SigmoidFit};
pub use groups::{
    hv_type_partition, median_q_comparison, quartile_median, quartile_table, HvCountBucket,
    HvTypeCategory, HvTypePartition, MedianComparison, MedianGroup, QuartileTable,
};
pub use hypothesis::{
    bonferroni, chi_square_independence, chi_square_posthoc, jonckheere_terpstra, kruskal_wallis,
    kruskal_wallis_h, mann_whitney_u, mann_whitney_u_with, mann_whitney_z, two_sample_t,
    MannWhitneyOptions, PosthocPairing, TrendAlternative,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("sample is empty")]
    EmptySample,
    #[error("need at least {need} groups, got {got}")]
    TooFewGroups { need: usize, got: usize },
    #[error("contingency table has a zero marginal total")]
    ZeroMarginal,
    #[error("need at least {need} points, got {got}")]
    TooFewPoints { need: usize, got: usize },
    #[error("sigmoid fit did not converge")]
    ConvergenceFailure { best: Box<SigmoidFit> },
    #[error("no scholars to aggregate")]
    EmptyCorpus,
    #[error("{0}")]
    InvalidInput(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TestMethod {
    MannWhitneyU,
    KruskalWallisH,
    ChiSquare,
    JonckheereTerpstra,
    StudentT,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseComparison {
    pub group_i: usize,
    pub group_j: usize,
    pub p_raw: f64,
    /// `min(1, m·p_raw)` over the `m` comparisons in the family.
    pub p_adjusted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub method: TestMethod,
    pub statistic: f64,
    pub p_value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub df: Option<f64>,
    /// Whether `p_value` comes from exact enumeration.
    pub exact: bool,
    pub n_per_group: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub posthoc: Option<Vec<PairwiseComparison>>,
}
