//! Per-bank performance metrics (ROA, TSR, TFP change), their
//! normalization to yearly growth rates, and the descriptive summaries
//! the report tables are built from.
//!
//! All three metric series share one analysis window: every panel year
//! except the first. The first year only anchors the window, providing
//! the prior share price for TSR and the base period for the first
//! productivity pair, so each metric covers the same bank-years and the
//! growth samples stay comparable across metrics.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::malmquist::{malmquist_indices, MalmquistError, MalmquistRecord};
use crate::panel::PanelDataset;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("total assets must be positive, got {value}")]
    NonPositiveAssets { value: f64 },
    #[error("the prior-year share price must be positive, got {value}")]
    NonPositivePrice { value: f64 },
    #[error("growth is undefined on a zero base value")]
    ZeroBase,
    #[error("group {name} has no banks")]
    EmptyGroup { name: String },
    #[error("the series has no observations")]
    EmptySeries,
    #[error("the panel needs at least {needed} years, got {got}")]
    TooFewYears { needed: usize, got: usize },
    #[error("{field} must be finite, got {value}")]
    NonFinite { field: &'static str, value: f64 },
    #[error("series are not comparable: {0}")]
    SeriesMismatch(String),
    #[error(transparent)]
    Productivity(#[from] MalmquistError),
}

/// Which performance dimension a series carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum MetricKind {
    Roa,
    Tsr,
    Tfp,
}

impl MetricKind {
    /// Label for the metric's yearly growth rate in tables.
    pub fn growth_label(self) -> &'static str {
        match self {
            MetricKind::Roa => "ChROA",
            MetricKind::Tsr => "ChTSR",
            MetricKind::Tfp => "ChTFP",
        }
    }
}

impl std::fmt::Display for MetricKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            MetricKind::Roa => "ROA",
            MetricKind::Tsr => "TSR",
            MetricKind::Tfp => "TFP",
        })
    }
}

/// One metric across the analysis window: per bank, one value per year.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSeries {
    pub metric: MetricKind,
    pub years: Vec<i32>,
    pub by_bank: BTreeMap<String, Vec<f64>>,
}

/// Net income over total assets.
pub fn roa(net_income: f64, total_assets: f64) -> Result<f64, MetricsError> {
    if !net_income.is_finite() {
        return Err(MetricsError::NonFinite { field: "net income", value: net_income });
    }
    if !total_assets.is_finite() || total_assets <= 0.0 {
        return Err(MetricsError::NonPositiveAssets { value: total_assets });
    }
    Ok(net_income / total_assets)
}

/// Capital-gain and dividend-yield parts of total stock return; the
/// two sum to the TSR exactly (same operations, same order).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TsrComponents {
    pub capital_gain: f64,
    pub dividend_yield: f64,
}

impl TsrComponents {
    pub fn total(&self) -> f64 {
        self.capital_gain + self.dividend_yield
    }
}

pub fn tsr_components(
    prior_price: f64,
    price: f64,
    dividend: f64,
) -> Result<TsrComponents, MetricsError> {
    if !prior_price.is_finite() || prior_price <= 0.0 {
        return Err(MetricsError::NonPositivePrice { value: prior_price });
    }
    if !price.is_finite() {
        return Err(MetricsError::NonFinite { field: "share price", value: price });
    }
    if !dividend.is_finite() {
        return Err(MetricsError::NonFinite { field: "dividend", value: dividend });
    }
    Ok(TsrComponents {
        capital_gain: (price - prior_price) / prior_price,
        dividend_yield: dividend / prior_price,
    })
}

/// Total stock return: price change plus dividend, over the prior price.
pub fn tsr(prior_price: f64, price: f64, dividend: f64) -> Result<f64, MetricsError> {
    Ok(tsr_components(prior_price, price, dividend)?.total())
}

fn analysis_window(panel: &PanelDataset) -> Result<&[i32], MetricsError> {
    let years = panel.years();
    if years.len() < 2 {
        return Err(MetricsError::TooFewYears { needed: 2, got: years.len() });
    }
    Ok(&years[1..])
}

/// ROA per bank for every year in the analysis window.
pub fn roa_series(panel: &PanelDataset) -> Result<MetricSeries, MetricsError> {
    let window = analysis_window(panel)?.to_vec();
    let mut by_bank = BTreeMap::new();
    for bank in panel.banks() {
        let mut values = Vec::with_capacity(window.len());
        for &year in &window {
            let r = panel.record(bank, year).expect("balanced panel");
            values.push(roa(r.net_income, r.total_assets)?);
        }
        by_bank.insert(bank.clone(), values);
    }
    Ok(MetricSeries { metric: MetricKind::Roa, years: window, by_bank })
}

/// TSR per bank for every year in the analysis window, using the prior
/// panel year's closing price as the base.
pub fn tsr_series(panel: &PanelDataset) -> Result<MetricSeries, MetricsError> {
    let window = analysis_window(panel)?.to_vec();
    let mut by_bank = BTreeMap::new();
    for bank in panel.banks() {
        let mut values = Vec::with_capacity(window.len());
        for &year in &window {
            let prior = panel.record(bank, year - 1).expect("balanced panel");
            let current = panel.record(bank, year).expect("balanced panel");
            values.push(tsr(
                prior.year_end_price,
                current.year_end_price,
                current.dividend_per_share,
            )?);
        }
        by_bank.insert(bank.clone(), values);
    }
    Ok(MetricSeries { metric: MetricKind::Tsr, years: window, by_bank })
}

/// TFP change per bank for every year in the analysis window, from the
/// Malmquist index of the pair ending in that year. Recomputes the
/// indices; use [`tfp_series_from_indices`] when they are already at
/// hand.
pub fn tfp_series(panel: &PanelDataset) -> Result<MetricSeries, MetricsError> {
    let window = analysis_window(panel)?.to_vec();
    let mut per_pair = Vec::with_capacity(window.len());
    for &year in &window {
        per_pair.push(malmquist_indices(panel, year - 1)?);
    }
    tfp_series_from_indices(panel, &per_pair)
}

/// Builds the TFP-change series from precomputed Malmquist records, one
/// inner vector per adjacent-year pair in window order.
pub fn tfp_series_from_indices(
    panel: &PanelDataset,
    indices: &[Vec<MalmquistRecord>],
) -> Result<MetricSeries, MetricsError> {
    let window = analysis_window(panel)?.to_vec();
    if indices.len() != window.len() {
        return Err(MetricsError::SeriesMismatch(format!(
            "expected {} year pairs, got {}",
            window.len(),
            indices.len()
        )));
    }
    let banks = panel.banks();
    let mut by_bank: BTreeMap<String, Vec<f64>> = banks
        .iter()
        .map(|b| (b.clone(), Vec::with_capacity(window.len())))
        .collect();
    for (i, (&year, pair)) in window.iter().zip(indices).enumerate() {
        if pair.len() != banks.len() {
            return Err(MetricsError::SeriesMismatch(format!(
                "pair {i} has {} records for {} banks",
                pair.len(),
                banks.len()
            )));
        }
        for (bank, record) in banks.iter().zip(pair) {
            if record.bank_id != *bank || record.year_pair != (year - 1, year) {
                return Err(MetricsError::SeriesMismatch(format!(
                    "pair {i} record for bank {} years {:?} does not match bank {bank} pair ({}, {year})",
                    record.bank_id,
                    record.year_pair,
                    year - 1,
                )));
            }
            by_bank.get_mut(bank).expect("bank key").push(record.tfpch);
        }
    }
    Ok(MetricSeries { metric: MetricKind::Tfp, years: window, by_bank })
}

/// Denominator convention for growth rates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GrowthDenominator {
    /// (next - prev) / |prev|: the sign of the change is the sign of
    /// the growth rate even when the base is negative.
    #[default]
    Abs,
    /// (next - prev) / prev, the plain relative change.
    Raw,
}

/// Growth rate of one transition. A zero base has no defined growth.
pub fn growth(
    prev: f64,
    next: f64,
    denominator: GrowthDenominator,
) -> Result<f64, MetricsError> {
    if prev == 0.0 {
        return Err(MetricsError::ZeroBase);
    }
    let base = match denominator {
        GrowthDenominator::Abs => prev.abs(),
        GrowthDenominator::Raw => prev,
    };
    Ok((next - prev) / base)
}

/// Growth rates for each consecutive transition in `values`; zero-base
/// transitions are excluded as `None` rather than failing the series.
pub fn growth_series(
    values: &[f64],
    denominator: GrowthDenominator,
) -> Vec<Option<f64>> {
    values
        .windows(2)
        .map(|w| growth(w[0], w[1], denominator).ok())
        .collect()
}

/// A growth observation dropped because its base value was zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZeroBaseExclusion {
    pub bank_id: String,
    pub base_year: i32,
}

/// Yearly growth rates of one metric: per bank, one slot per adjacent
/// year pair, `None` where the base value was zero.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthSeries {
    pub metric: MetricKind,
    pub year_pairs: Vec<(i32, i32)>,
    pub by_bank: BTreeMap<String, Vec<Option<f64>>>,
}

impl GrowthSeries {
    /// All retained growth observations, banks in order, years within.
    pub fn pooled(&self) -> Vec<f64> {
        self.by_bank
            .values()
            .flat_map(|v| v.iter().filter_map(|g| *g))
            .collect()
    }

    pub fn num_observations(&self) -> usize {
        self.by_bank
            .values()
            .map(|v| v.iter().filter(|g| g.is_some()).count())
            .sum()
    }

    /// Excluded transitions, banks in order, years within.
    pub fn exclusions(&self) -> Vec<ZeroBaseExclusion> {
        let mut out = Vec::new();
        for (bank, values) in &self.by_bank {
            for (i, g) in values.iter().enumerate() {
                if g.is_none() {
                    out.push(ZeroBaseExclusion {
                        bank_id: bank.clone(),
                        base_year: self.year_pairs[i].0,
                    });
                }
            }
        }
        out
    }
}

/// Turns a metric series into its yearly growth series.
pub fn growth_table(
    series: &MetricSeries,
    denominator: GrowthDenominator,
) -> Result<GrowthSeries, MetricsError> {
    if series.years.len() < 2 {
        return Err(MetricsError::TooFewYears { needed: 2, got: series.years.len() });
    }
    let year_pairs: Vec<(i32, i32)> =
        series.years.windows(2).map(|w| (w[0], w[1])).collect();
    let by_bank = series
        .by_bank
        .iter()
        .map(|(bank, values)| (bank.clone(), growth_series(values, denominator)))
        .collect();
    Ok(GrowthSeries { metric: series.metric, year_pairs, by_bank })
}

/// Aligns two growth series into paired vectors, keeping only the
/// bank-transitions where both sides have a retained observation.
pub fn paired_observations(
    a: &GrowthSeries,
    b: &GrowthSeries,
) -> Result<(Vec<f64>, Vec<f64>), MetricsError> {
    if a.year_pairs != b.year_pairs {
        return Err(MetricsError::SeriesMismatch(
            "growth series cover different year pairs".to_string(),
        ));
    }
    if a.by_bank.len() != b.by_bank.len()
        || a.by_bank.keys().zip(b.by_bank.keys()).any(|(x, y)| x != y)
    {
        return Err(MetricsError::SeriesMismatch(
            "growth series cover different banks".to_string(),
        ));
    }
    let mut left = Vec::new();
    let mut right = Vec::new();
    for (bank, va) in &a.by_bank {
        let vb = &b.by_bank[bank];
        for (ga, gb) in va.iter().zip(vb) {
            if let (Some(x), Some(y)) = (ga, gb) {
                left.push(*x);
                right.push(*y);
            }
        }
    }
    Ok((left, right))
}

pub(crate) fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

pub(crate) fn sum_sq_dev(values: &[f64], center: f64) -> f64 {
    values.iter().map(|v| (v - center) * (v - center)).sum()
}

/// Pooled statistics over every observation in the series.
#[derive(Debug, Clone, PartialEq)]
pub struct OverallStats {
    pub mean: f64,
    /// Sample standard deviation (divisor N - 1); absent when N < 2.
    pub sd: Option<f64>,
    pub min: f64,
    pub max: f64,
    /// N, the number of bank-year observations.
    pub n: usize,
}

/// Statistics over the per-bank means.
#[derive(Debug, Clone, PartialEq)]
pub struct BetweenStats {
    /// Sample standard deviation of the bank means (divisor n - 1);
    /// absent when n < 2.
    pub sd: Option<f64>,
    pub min: f64,
    pub max: f64,
    /// n, the number of banks.
    pub n: usize,
}

/// Statistics over the within-transformed values x_it - mean_i + mean.
#[derive(Debug, Clone, PartialEq)]
pub struct WithinStats {
    /// Standard deviation of the within-transformed values with
    /// divisor N - 1; absent when T < 2.
    pub sd: Option<f64>,
    pub min: f64,
    pub max: f64,
    /// T, the number of years per bank.
    pub t: usize,
}

/// Overall, between-bank and within-bank decomposition of one series.
///
/// On a balanced panel the sums of squares satisfy
/// overall = T * between + within when each is rebuilt from its sd.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelSummary {
    pub overall: OverallStats,
    pub between: BetweenStats,
    pub within: WithinStats,
}

pub fn panel_summary(series: &MetricSeries) -> Result<PanelSummary, MetricsError> {
    panel_summary_values(&series.by_bank)
}

/// [`panel_summary`] over raw per-bank value vectors; every vector must
/// have the same nonzero length T.
pub fn panel_summary_values(
    by_bank: &BTreeMap<String, Vec<f64>>,
) -> Result<PanelSummary, MetricsError> {
    let t = match by_bank.values().next() {
        None => return Err(MetricsError::EmptySeries),
        Some(first) if first.is_empty() => return Err(MetricsError::EmptySeries),
        Some(first) => first.len(),
    };
    if by_bank.values().any(|v| v.len() != t) {
        return Err(MetricsError::SeriesMismatch(
            "banks cover different numbers of years".to_string(),
        ));
    }
    let n_banks = by_bank.len();
    let pooled: Vec<f64> = by_bank.values().flatten().copied().collect();
    let n = pooled.len();
    let grand_mean = mean(&pooled);
    let overall_sd = if n >= 2 {
        Some((sum_sq_dev(&pooled, grand_mean) / (n - 1) as f64).sqrt())
    } else {
        None
    };
    let overall = OverallStats {
        mean: grand_mean,
        sd: overall_sd,
        min: pooled.iter().copied().fold(f64::INFINITY, f64::min),
        max: pooled.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        n,
    };

    let bank_means: Vec<f64> = by_bank.values().map(|v| mean(v)).collect();
    let between_sd = if n_banks >= 2 {
        Some((sum_sq_dev(&bank_means, grand_mean) / (n_banks - 1) as f64).sqrt())
    } else {
        None
    };
    let between = BetweenStats {
        sd: between_sd,
        min: bank_means.iter().copied().fold(f64::INFINITY, f64::min),
        max: bank_means.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        n: n_banks,
    };

    let within_values: Vec<f64> = by_bank
        .values()
        .zip(&bank_means)
        .flat_map(|(v, m)| v.iter().map(move |x| x - m + grand_mean))
        .collect();
    let within_sd = if t >= 2 {
        Some((sum_sq_dev(&within_values, grand_mean) / (n - 1) as f64).sqrt())
    } else {
        None
    };
    let within = WithinStats {
        sd: within_sd,
        min: within_values.iter().copied().fold(f64::INFINITY, f64::min),
        max: within_values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        t,
    };

    Ok(PanelSummary { overall, between, within })
}

/// One row of a trend table: yearly means for a group of banks (or all
/// banks), their multi-year average, and dispersion of the yearly means.
#[derive(Debug, Clone, PartialEq)]
pub struct TrendRow {
    pub label: String,
    pub num_banks: usize,
    pub yearly_means: Vec<f64>,
    /// Arithmetic mean of the yearly means.
    pub cumulative_mean: f64,
    /// Sample standard deviation of the yearly means (divisor T - 1);
    /// absent when T < 2.
    pub sd: Option<f64>,
    /// sd / cumulative_mean; absent when sd is or when the mean is too
    /// close to zero for the ratio to be meaningful.
    pub cv: Option<f64>,
    /// |cumulative_mean| < 1e-6, which makes the CV unstable.
    pub near_zero_mean: bool,
}

/// Yearly group means of one metric with cumulative averages, group
/// rows in label order followed by the all-banks row.
#[derive(Debug, Clone, PartialEq)]
pub struct TrendTable {
    pub metric: MetricKind,
    pub years: Vec<i32>,
    pub rows: Vec<TrendRow>,
}

/// Label of the final trend-table row pooling every bank.
pub const ALL_BANKS_LABEL: &str = "All banks";

const NEAR_ZERO_MEAN: f64 = 1e-6;

pub(crate) fn trend_row(label: &str, num_banks: usize, yearly_means: Vec<f64>) -> TrendRow {
    let t = yearly_means.len();
    let cumulative_mean = mean(&yearly_means);
    let sd = if t >= 2 {
        Some((sum_sq_dev(&yearly_means, cumulative_mean) / (t - 1) as f64).sqrt())
    } else {
        None
    };
    let near_zero_mean = cumulative_mean.abs() < NEAR_ZERO_MEAN;
    let cv = match sd {
        Some(s) if !near_zero_mean => Some(s / cumulative_mean),
        _ => None,
    };
    TrendRow { label: label.to_string(), num_banks, yearly_means, cumulative_mean, sd, cv, near_zero_mean }
}

pub fn trend_table(
    panel: &PanelDataset,
    series: &MetricSeries,
) -> Result<TrendTable, MetricsError> {
    if series.by_bank.is_empty() || series.years.is_empty() {
        return Err(MetricsError::EmptySeries);
    }
    let t = series.years.len();
    let mut rows = Vec::new();
    for label in panel.group_labels() {
        let banks = panel.banks_in_group(&label);
        if banks.is_empty() {
            return Err(MetricsError::EmptyGroup { name: label });
        }
        let mut yearly = Vec::with_capacity(t);
        for i in 0..t {
            let values: Vec<f64> = banks
                .iter()
                .map(|b| {
                    series
                        .by_bank
                        .get(b)
                        .and_then(|v| v.get(i))
                        .copied()
                        .ok_or_else(|| {
                            MetricsError::SeriesMismatch(format!(
                                "series is missing bank {b}"
                            ))
                        })
                })
                .collect::<Result<_, _>>()?;
            yearly.push(mean(&values));
        }
        rows.push(trend_row(&label, banks.len(), yearly));
    }
    let mut all_banks = Vec::with_capacity(t);
    for i in 0..t {
        let values: Vec<f64> = series.by_bank.values().map(|v| v[i]).collect();
        all_banks.push(mean(&values));
    }
    rows.push(trend_row(ALL_BANKS_LABEL, series.by_bank.len(), all_banks));
    Ok(TrendTable { metric: series.metric, years: series.years.clone(), rows })
}
