//! Home-venue detection from scholars' publication records.
//!
//! A scholar's venue counts are sorted into a non-increasing distribution and
//! matched against single-peak, Pareto, linear, and uniform archetypes by
//! adjusted R². When the Pareto shape wins, the venues before the elbow of
//! the fitted CDF are the scholar's home venues.

pub mod cohort;
pub mod distfit;
pub mod homevenue;
pub mod ingest;
pub mod lm;
pub mod simulate;
pub mod trajectory;
