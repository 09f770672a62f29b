//! Run configuration, metrics persistence, evaluation, seed streams, the
//! analytic-testbed runner, and learning-curve aggregation.

pub mod aggregate;
pub mod analytic;
pub mod config;
pub mod evaluate;
pub mod metrics;
pub mod seeding;

pub use aggregate::{aggregate, AggregateRow};
pub use analytic::{analytic_run, AnalyticConfig, AnalyticResult, AnalyticRow};
pub use config::{ConfigError, RunConfig};
pub use evaluate::{evaluate as evaluate_policy, Evaluation};
pub use metrics::{MetricsRow, MetricsWriter, METRICS_HEADER};
