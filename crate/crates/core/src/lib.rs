//! Three-dimension firm performance for balanced bank panels.
//!
//! The library computes profitability (return on assets), shareholder
//! value (total stock return) and productivity (Malmquist total factor
//! productivity change) from one panel of bank-year observations,
//! normalizes all three to yearly growth rates, and tests whether the
//! growth rates are statistically equivalent.
//!
//! Modules, bottom-up:
//! - [`lp`]: dense two-phase simplex solver for the DEA linear programs
//! - [`dea`]: output-oriented radial efficiency and distance functions
//! - [`malmquist`]: adjacent-year productivity index and decomposition
//! - [`panel`]: balanced panel ingestion and validation
//! - [`metrics`]: ROA, TSR, growth rates, panel summaries, trend tables
//! - [`stats`]: beta/t/F special functions, one-way ANOVA, paired t-test
//! - [`report`]: end-to-end pipeline, table rendering, artifact output

pub mod dea;
pub mod lp;
pub mod malmquist;
pub mod metrics;
pub mod panel;
pub mod report;
pub mod stats;

pub use dea::{DeaError, DistanceScore, Rts, TechnologySet};
pub use lp::{LpError, LpProblem, LpSolution, LpStatus, Relation};
pub use malmquist::{GroupAverages, MalmquistError, MalmquistRecord};
pub use metrics::{
    GrowthDenominator, GrowthSeries, MetricKind, MetricSeries, MetricsError,
    PanelSummary, TrendTable,
};
pub use panel::{BankYearRecord, PanelDataset, PanelError, SchemaConfig};
pub use report::{
    Aggregation, OutputFormat, ReportBundle, ReportError, RunConfig,
};
pub use stats::{AnovaResult, PairedTResult, StatsError};
