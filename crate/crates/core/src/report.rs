//! End-to-end pipeline and report rendering: ingest a panel, compute
//! the three metric series and their growth rates, run the equivalency
//! tests, and render the result tables to markdown or CSV artifacts.
//!
//! Stages that need more data than a degenerate panel can provide
//! (growth rates need at least two window years, paired tests need at
//! least two aligned observations) degrade to recorded reasons instead
//! of failing the run, so a minimal panel still produces a full report
//! with its hypotheses marked not testable.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::malmquist::{
    malmquist_indices, yearly_group_average, yearly_group_average_geometric,
    GroupAverages, MalmquistError, MalmquistRecord,
};
use crate::metrics::{
    growth_table, mean, panel_summary, panel_summary_values, paired_observations,
    roa_series, sum_sq_dev, tfp_series_from_indices, trend_row, trend_table,
    tsr_series, GrowthDenominator, GrowthSeries, MetricKind, MetricSeries,
    MetricsError, TrendTable, ALL_BANKS_LABEL,
};
use crate::panel::{parse_panel_csv, PanelDataset, PanelError, SchemaConfig};
use crate::stats::{one_way_anova, paired_t_test, AnovaResult, PairedTResult, StatsError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReportError {
    #[error("alpha must be strictly between 0 and 1, got {0}")]
    InvalidAlpha(f64),
    #[error("no output format selected")]
    NoFormats,
    #[error("cannot read {path}: {reason}")]
    UnreadableInput { path: String, reason: String },
    #[error("cannot write {path}: {reason}")]
    UnwritableOutput { path: String, reason: String },
    #[error(transparent)]
    Panel(#[from] PanelError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Productivity(#[from] MalmquistError),
    #[error(transparent)]
    Stats(#[from] StatsError),
}

impl ReportError {
    /// Process exit code: 1 for input and environment errors, 2 for
    /// numeric failures inside the computation.
    pub fn exit_code(&self) -> i32 {
        match self {
            ReportError::InvalidAlpha(_)
            | ReportError::NoFormats
            | ReportError::UnreadableInput { .. }
            | ReportError::UnwritableOutput { .. }
            | ReportError::Panel(_) => 1,
            ReportError::Metrics(MetricsError::TooFewYears { .. }) => 1,
            ReportError::Metrics(_) | ReportError::Productivity(_) | ReportError::Stats(_) => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Markdown,
    Csv,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Markdown => "md",
            OutputFormat::Csv => "csv",
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Markdown => "markdown",
            OutputFormat::Csv => "csv",
        })
    }
}

/// How yearly group values are averaged in the TFP trend table. The
/// group-averages artifact always carries both forms, labeled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Aggregation {
    #[default]
    Arithmetic,
    Geometric,
}

impl fmt::Display for Aggregation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Aggregation::Arithmetic => "arithmetic",
            Aggregation::Geometric => "geometric",
        })
    }
}

/// Everything one run needs: input paths, output destination and the
/// analysis knobs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub panel_path: PathBuf,
    pub schema_path: PathBuf,
    pub out_dir: PathBuf,
    pub formats: Vec<OutputFormat>,
    pub alpha: f64,
    pub growth_denominator: GrowthDenominator,
    pub aggregation: Aggregation,
}

impl RunConfig {
    pub fn new(
        panel_path: impl Into<PathBuf>,
        schema_path: impl Into<PathBuf>,
        out_dir: impl Into<PathBuf>,
    ) -> Self {
        RunConfig {
            panel_path: panel_path.into(),
            schema_path: schema_path.into(),
            out_dir: out_dir.into(),
            formats: vec![OutputFormat::Markdown],
            alpha: 0.05,
            growth_denominator: GrowthDenominator::Abs,
            aggregation: Aggregation::Arithmetic,
        }
    }
}

/// A stage that either produced its value or was skipped for a reason
/// the report prints verbatim.
#[derive(Debug, Clone, PartialEq)]
pub enum TestOutcome<T> {
    Computed(T),
    NotComputed { reason: String },
}

impl<T> TestOutcome<T> {
    pub fn computed(&self) -> Option<&T> {
        match self {
            TestOutcome::Computed(v) => Some(v),
            TestOutcome::NotComputed { .. } => None,
        }
    }
}

/// One variable of the descriptive table: its panel summary.
#[derive(Debug, Clone, PartialEq)]
pub struct DescriptiveBlock {
    pub variable: String,
    pub summary: crate::metrics::PanelSummary,
}

/// Per-year cross-sectional statistics over all banks: the max, min,
/// standard deviation and coefficient of variation rows of the trend
/// tables' all-banks section.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossSection {
    pub max: Vec<f64>,
    pub min: Vec<f64>,
    pub sd: Vec<Option<f64>>,
    pub cv: Vec<Option<f64>>,
}

/// One trend table plus its all-banks cross-section and the rendered
/// column labels (years, or year pairs for the TFP table).
#[derive(Debug, Clone, PartialEq)]
pub struct TrendSection {
    pub table: TrendTable,
    pub cross: CrossSection,
    pub column_labels: Vec<String>,
}

/// Arithmetic and geometric group averages of tfpch for one year pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PairGroupAverages {
    pub year_pair: (i32, i32),
    pub arithmetic: GroupAverages,
    pub geometric: GroupAverages,
}

/// The three growth series on the shared analysis window.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthBlock {
    pub roa: GrowthSeries,
    pub tsr: GrowthSeries,
    pub tfp: GrowthSeries,
}

impl GrowthBlock {
    pub fn series(&self) -> [&GrowthSeries; 3] {
        [&self.roa, &self.tsr, &self.tfp]
    }
}

/// ANOVA over the three pooled growth populations, with the group
/// sizes the report prints next to it.
#[derive(Debug, Clone, PartialEq)]
pub struct AnovaBlock {
    pub result: AnovaResult,
    pub group_sizes: Vec<(String, usize)>,
}

/// One paired t-test between two growth series.
#[derive(Debug, Clone, PartialEq)]
pub struct PairOutcome {
    pub label: String,
    pub n: usize,
    pub result: TestOutcome<PairedTResult>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Decided { reject: bool, p: f64 },
    NotTestable { reason: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisOutcome {
    pub id: String,
    pub statement: String,
    pub test: String,
    pub verdict: Verdict,
}

/// All computed results of one pipeline run, ready to render.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportBundle {
    pub alpha: f64,
    pub growth_denominator: GrowthDenominator,
    pub aggregation: Aggregation,
    /// The analysis window: every panel year except the base year.
    pub window_years: Vec<i32>,
    pub num_banks: usize,
    pub descriptives: Vec<DescriptiveBlock>,
    pub trend_roa: TrendSection,
    pub trend_tsr: TrendSection,
    pub trend_tfp: TrendSection,
    pub malmquist_pairs: Vec<Vec<MalmquistRecord>>,
    pub group_averages: Vec<PairGroupAverages>,
    pub growth: TestOutcome<GrowthBlock>,
    pub anova: TestOutcome<AnovaBlock>,
    pub pairs: Vec<PairOutcome>,
    pub verdicts: Vec<HypothesisOutcome>,
}

fn read_input(path: &Path) -> Result<String, ReportError> {
    std::fs::read_to_string(path).map_err(|e| ReportError::UnreadableInput {
        path: path.display().to_string(),
        reason: e.to_string(),
    })
}

/// Reads and parses the schema and panel named by the config. The
/// `validate` subcommand stops here.
pub fn load_panel(config: &RunConfig) -> Result<PanelDataset, ReportError> {
    let schema_text = read_input(&config.schema_path)?;
    let schema = SchemaConfig::parse(&schema_text)?;
    let panel_text = read_input(&config.panel_path)?;
    Ok(parse_panel_csv(panel_text.as_bytes(), &schema)?)
}

/// Runs the full pipeline on the configured inputs.
pub fn run_pipeline(config: &RunConfig) -> Result<ReportBundle, ReportError> {
    if !config.alpha.is_finite() || config.alpha <= 0.0 || config.alpha >= 1.0 {
        return Err(ReportError::InvalidAlpha(config.alpha));
    }
    let panel = load_panel(config)?;
    analyze(
        &panel,
        config.alpha,
        config.growth_denominator,
        config.aggregation,
    )
}

fn cross_section(series: &MetricSeries) -> CrossSection {
    let t = series.years.len();
    let n = series.by_bank.len();
    let mut max = Vec::with_capacity(t);
    let mut min = Vec::with_capacity(t);
    let mut sd = Vec::with_capacity(t);
    let mut cv = Vec::with_capacity(t);
    for i in 0..t {
        let values: Vec<f64> = series.by_bank.values().map(|v| v[i]).collect();
        max.push(values.iter().copied().fold(f64::NEG_INFINITY, f64::max));
        min.push(values.iter().copied().fold(f64::INFINITY, f64::min));
        let m = mean(&values);
        let s = if n >= 2 {
            Some((sum_sq_dev(&values, m) / (n - 1) as f64).sqrt())
        } else {
            None
        };
        sd.push(s);
        cv.push(match s {
            Some(s) if m.abs() >= 1e-6 => Some(s / m),
            _ => None,
        });
    }
    CrossSection { max, min, sd, cv }
}

fn year_labels(years: &[i32]) -> Vec<String> {
    years.iter().map(|y| y.to_string()).collect()
}

fn pair_labels(years: &[i32]) -> Vec<String> {
    years.iter().map(|y| format!("{}-{}", y - 1, y)).collect()
}

/// Rebuilds a trend table with geometric yearly group means. The
/// cumulative average, SD and CV still summarize the yearly means the
/// same way as the arithmetic table.
fn geometric_trend_table(
    panel: &PanelDataset,
    series: &MetricSeries,
) -> Result<TrendTable, ReportError> {
    let t = series.years.len();
    let mut by_year_groups: Vec<BTreeMap<String, Vec<f64>>> = vec![BTreeMap::new(); t];
    for (bank, values) in &series.by_bank {
        let group = panel.group_of(bank).ok_or_else(|| {
            ReportError::Metrics(MetricsError::SeriesMismatch(format!(
                "bank {bank} is missing from the panel"
            )))
        })?;
        for (i, v) in values.iter().enumerate() {
            by_year_groups[i]
                .entry(group.to_string())
                .or_default()
                .push(*v);
        }
    }
    let mut rows = Vec::new();
    let labels = panel.group_labels();
    for label in &labels {
        let mut yearly = Vec::with_capacity(t);
        for groups in &by_year_groups {
            let avg = yearly_group_average_geometric(groups)?;
            yearly.push(avg.group_means[label]);
        }
        let banks = panel.banks_in_group(label).len();
        rows.push(trend_row(label, banks, yearly));
    }
    let mut all = Vec::with_capacity(t);
    for groups in &by_year_groups {
        all.push(yearly_group_average_geometric(groups)?.all_banks_mean);
    }
    rows.push(trend_row(ALL_BANKS_LABEL, series.by_bank.len(), all));
    Ok(TrendTable { metric: series.metric, years: series.years.clone(), rows })
}

fn growth_reason(e: &MetricsError) -> String {
    match e {
        MetricsError::TooFewYears { .. } => {
            "the analysis window has a single year, so there are no growth transitions"
                .to_string()
        }
        other => other.to_string(),
    }
}

fn hypothesis(id: &str, statement: &str, test: &str, verdict: Verdict) -> HypothesisOutcome {
    HypothesisOutcome {
        id: id.to_string(),
        statement: statement.to_string(),
        test: test.to_string(),
        verdict,
    }
}

/// Runs every computation stage on an already-loaded panel.
pub fn analyze(
    panel: &PanelDataset,
    alpha: f64,
    growth_denominator: GrowthDenominator,
    aggregation: Aggregation,
) -> Result<ReportBundle, ReportError> {
    if !alpha.is_finite() || alpha <= 0.0 || alpha >= 1.0 {
        return Err(ReportError::InvalidAlpha(alpha));
    }

    let roa = roa_series(panel)?;
    let tsr = tsr_series(panel)?;
    let window = roa.years.clone();

    let mut malmquist_pairs = Vec::with_capacity(window.len());
    for &year in &window {
        malmquist_pairs.push(malmquist_indices(panel, year - 1)?);
    }
    let tfp = tfp_series_from_indices(panel, &malmquist_pairs)?;

    let mut group_averages = Vec::with_capacity(malmquist_pairs.len());
    for pair in &malmquist_pairs {
        let mut by_group: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        for record in pair {
            let group = panel.group_of(&record.bank_id).expect("panel bank");
            by_group.entry(group.to_string()).or_default().push(record.tfpch);
        }
        group_averages.push(PairGroupAverages {
            year_pair: pair.first().map(|r| r.year_pair).expect("nonempty pair"),
            arithmetic: yearly_group_average(&by_group)?,
            geometric: yearly_group_average_geometric(&by_group)?,
        });
    }

    let mut descriptives = Vec::new();
    for series in [&roa, &tsr, &tfp] {
        descriptives.push(DescriptiveBlock {
            variable: series.metric.to_string(),
            summary: panel_summary(series)?,
        });
    }
    let t = window.len();
    let banks = panel.banks();
    let bn: BTreeMap<String, Vec<f64>> = banks
        .iter()
        .enumerate()
        .map(|(i, b)| (b.clone(), vec![(i + 1) as f64; t]))
        .collect();
    let labels = panel.group_labels();
    let bc: BTreeMap<String, Vec<f64>> = banks
        .iter()
        .map(|b| {
            let group = panel.group_of(b).expect("panel bank");
            let code = labels.iter().position(|g| g == group).expect("known group") + 1;
            (b.clone(), vec![code as f64; t])
        })
        .collect();
    let year_values: Vec<f64> = window.iter().map(|y| *y as f64).collect();
    let years_var: BTreeMap<String, Vec<f64>> = banks
        .iter()
        .map(|b| (b.clone(), year_values.clone()))
        .collect();
    for (name, values) in [("bn", &bn), ("bc", &bc), ("year", &years_var)] {
        descriptives.push(DescriptiveBlock {
            variable: name.to_string(),
            summary: panel_summary_values(values)?,
        });
    }

    let trend_roa = TrendSection {
        table: trend_table(panel, &roa)?,
        cross: cross_section(&roa),
        column_labels: year_labels(&window),
    };
    let trend_tsr = TrendSection {
        table: trend_table(panel, &tsr)?,
        cross: cross_section(&tsr),
        column_labels: year_labels(&window),
    };
    let tfp_table = match aggregation {
        Aggregation::Arithmetic => trend_table(panel, &tfp)?,
        Aggregation::Geometric => geometric_trend_table(panel, &tfp)?,
    };
    let trend_tfp = TrendSection {
        table: tfp_table,
        cross: cross_section(&tfp),
        column_labels: pair_labels(&window),
    };

    let growth = match (
        growth_table(&roa, growth_denominator),
        growth_table(&tsr, growth_denominator),
        growth_table(&tfp, growth_denominator),
    ) {
        (Ok(roa), Ok(tsr), Ok(tfp)) => TestOutcome::Computed(GrowthBlock { roa, tsr, tfp }),
        (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => {
            TestOutcome::NotComputed { reason: growth_reason(&e) }
        }
    };

    let anova = match &growth {
        TestOutcome::Computed(block) => {
            let groups: Vec<Vec<f64>> =
                block.series().iter().map(|s| s.pooled()).collect();
            let group_sizes: Vec<(String, usize)> = block
                .series()
                .iter()
                .map(|s| (s.metric.growth_label().to_string(), s.num_observations()))
                .collect();
            match one_way_anova(&groups) {
                Ok(result) => TestOutcome::Computed(AnovaBlock { result, group_sizes }),
                Err(
                    e @ (StatsError::ZeroWithinVariance
                    | StatsError::TooFewGroups { .. }
                    | StatsError::EmptyGroup { .. }
                    | StatsError::InsufficientObservations { .. }),
                ) => TestOutcome::NotComputed { reason: e.to_string() },
                Err(e) => return Err(e.into()),
            }
        }
        TestOutcome::NotComputed { reason } => {
            TestOutcome::NotComputed { reason: reason.clone() }
        }
    };

    let pair_defs: [(&str, MetricKind, MetricKind); 3] = [
        ("ChROA-ChTSR", MetricKind::Roa, MetricKind::Tsr),
        ("ChTSR-ChTFP", MetricKind::Tsr, MetricKind::Tfp),
        ("ChROA-ChTFP", MetricKind::Roa, MetricKind::Tfp),
    ];
    let mut pairs = Vec::with_capacity(3);
    for (label, left, right) in pair_defs {
        let outcome = match &growth {
            TestOutcome::Computed(block) => {
                let pick = |kind: MetricKind| match kind {
                    MetricKind::Roa => &block.roa,
                    MetricKind::Tsr => &block.tsr,
                    MetricKind::Tfp => &block.tfp,
                };
                let (a, b) = paired_observations(pick(left), pick(right))?;
                let n = a.len();
                let result = match paired_t_test(&a, &b, alpha) {
                    Ok(r) => TestOutcome::Computed(r),
                    Err(
                        e @ (StatsError::ZeroVarianceDifferences
                        | StatsError::InsufficientObservations { .. }),
                    ) => TestOutcome::NotComputed { reason: e.to_string() },
                    Err(e) => return Err(e.into()),
                };
                PairOutcome { label: label.to_string(), n, result }
            }
            TestOutcome::NotComputed { reason } => PairOutcome {
                label: label.to_string(),
                n: 0,
                result: TestOutcome::NotComputed { reason: reason.clone() },
            },
        };
        pairs.push(outcome);
    }

    let anova_verdict = match &anova {
        TestOutcome::Computed(block) => Verdict::Decided {
            reject: block.result.p < alpha,
            p: block.result.p,
        },
        TestOutcome::NotComputed { reason } => {
            Verdict::NotTestable { reason: reason.clone() }
        }
    };
    let pair_verdict = |pair: &PairOutcome| match &pair.result {
        TestOutcome::Computed(r) => Verdict::Decided { reject: r.p < alpha, p: r.p },
        TestOutcome::NotComputed { reason } => {
            Verdict::NotTestable { reason: reason.clone() }
        }
    };
    let verdicts = vec![
        hypothesis(
            "H1o",
            "The mean growth rates of the three performance dimensions do not differ",
            "One-way ANOVA",
            anova_verdict,
        ),
        hypothesis(
            "H2o",
            "The mean growth rates of ROA and TSR do not differ",
            "Paired t-test ChROA-ChTSR",
            pair_verdict(&pairs[0]),
        ),
        hypothesis(
            "H3o",
            "The mean growth rates of TSR and TFP do not differ",
            "Paired t-test ChTSR-ChTFP",
            pair_verdict(&pairs[1]),
        ),
        hypothesis(
            "H4o",
            "The mean growth rates of ROA and TFP do not differ",
            "Paired t-test ChROA-ChTFP",
            pair_verdict(&pairs[2]),
        ),
    ];

    Ok(ReportBundle {
        alpha,
        growth_denominator,
        aggregation,
        window_years: window,
        num_banks: panel.num_banks(),
        descriptives,
        trend_roa,
        trend_tsr,
        trend_tfp,
        malmquist_pairs,
        group_averages,
        growth,
        anova,
        pairs,
        verdicts,
    })
}

/// Formats a number with 6 significant digits, fixed-point.
pub fn fmt_sig(x: f64) -> String {
    if x.is_nan() {
        return "NaN".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    if x == 0.0 {
        return "0.00000".to_string();
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (5 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_sig).unwrap_or_default()
}

/// The files a report run can produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArtifactKind {
    Descriptives,
    TrendRoa,
    TrendTsr,
    TrendTfp,
    Anova,
    PairedT,
    MalmquistIndices,
    MalmquistAverages,
    GrowthObservations,
    Verdicts,
}

pub const ALL_ARTIFACTS: [ArtifactKind; 10] = [
    ArtifactKind::Descriptives,
    ArtifactKind::TrendRoa,
    ArtifactKind::TrendTsr,
    ArtifactKind::TrendTfp,
    ArtifactKind::Anova,
    ArtifactKind::PairedT,
    ArtifactKind::MalmquistIndices,
    ArtifactKind::MalmquistAverages,
    ArtifactKind::GrowthObservations,
    ArtifactKind::Verdicts,
];

/// Artifacts for the `metrics` subcommand: the descriptive and trend
/// tables.
pub const METRICS_ARTIFACTS: [ArtifactKind; 4] = [
    ArtifactKind::Descriptives,
    ArtifactKind::TrendRoa,
    ArtifactKind::TrendTsr,
    ArtifactKind::TrendTfp,
];

/// Artifacts for the `malmquist` subcommand: index and group averages.
pub const MALMQUIST_ARTIFACTS: [ArtifactKind; 2] =
    [ArtifactKind::MalmquistIndices, ArtifactKind::MalmquistAverages];

/// Artifacts for the `test` subcommand: test tables, growth counts and
/// verdicts.
pub const TEST_ARTIFACTS: [ArtifactKind; 4] = [
    ArtifactKind::Anova,
    ArtifactKind::PairedT,
    ArtifactKind::GrowthObservations,
    ArtifactKind::Verdicts,
];

impl ArtifactKind {
    pub fn basename(self) -> &'static str {
        match self {
            ArtifactKind::Descriptives => "table1_descriptives",
            ArtifactKind::TrendRoa => "table2_roa_trend",
            ArtifactKind::TrendTsr => "table3_tsr_trend",
            ArtifactKind::TrendTfp => "table4_tfp_trend",
            ArtifactKind::Anova => "table5_anova",
            ArtifactKind::PairedT => "table6_paired_t",
            ArtifactKind::MalmquistIndices => "malmquist_indices",
            ArtifactKind::MalmquistAverages => "malmquist_group_averages",
            ArtifactKind::GrowthObservations => "growth_observations",
            ArtifactKind::Verdicts => "verdicts",
        }
    }

    fn title(self) -> &'static str {
        match self {
            ArtifactKind::Descriptives => "Descriptive statistics",
            ArtifactKind::TrendRoa => "ROA trend",
            ArtifactKind::TrendTsr => "TSR trend",
            ArtifactKind::TrendTfp => "TFP change trend",
            ArtifactKind::Anova => "One-way ANOVA on growth rates",
            ArtifactKind::PairedT => "Paired t-tests on growth rates",
            ArtifactKind::MalmquistIndices => "Malmquist indices",
            ArtifactKind::MalmquistAverages => "Malmquist group averages",
            ArtifactKind::GrowthObservations => "Growth observations",
            ArtifactKind::Verdicts => "Hypothesis verdicts",
        }
    }
}

/// One rendered file.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportArtifact {
    pub kind: ArtifactKind,
    pub filename: String,
    pub content: String,
}

struct TableDoc {
    headers: Vec<String>,
    rows: Vec<Vec<String>>,
    /// Markdown-only footer lines after the table.
    footers: Vec<String>,
}

fn strs(cells: &[&str]) -> Vec<String> {
    cells.iter().map(|s| s.to_string()).collect()
}

fn to_markdown(title: &str, doc: &TableDoc) -> String {
    let mut out = String::new();
    out.push_str(&format!("# {title}\n\n"));
    out.push_str(&format!("| {} |\n", doc.headers.join(" | ")));
    out.push_str(&format!(
        "|{}\n",
        doc.headers.iter().map(|_| " --- |").collect::<String>()
    ));
    for row in &doc.rows {
        out.push_str(&format!("| {} |\n", row.join(" | ")));
    }
    for footer in &doc.footers {
        out.push('\n');
        out.push_str(footer);
        out.push('\n');
    }
    out
}

fn to_csv(doc: &TableDoc) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(&doc.headers).expect("csv write");
    for row in &doc.rows {
        writer.write_record(row).expect("csv write");
    }
    let bytes = writer.into_inner().expect("csv flush");
    String::from_utf8(bytes).expect("csv utf8")
}

fn build_descriptives(bundle: &ReportBundle) -> TableDoc {
    let mut rows = Vec::new();
    for block in &bundle.descriptives {
        let s = &block.summary;
        rows.push(vec![
            block.variable.clone(),
            "Overall".to_string(),
            fmt_sig(s.overall.mean),
            fmt_opt(s.overall.sd),
            fmt_sig(s.overall.min),
            fmt_sig(s.overall.max),
            format!("N = {}", s.overall.n),
        ]);
        rows.push(vec![
            String::new(),
            "Between".to_string(),
            String::new(),
            fmt_opt(s.between.sd),
            fmt_sig(s.between.min),
            fmt_sig(s.between.max),
            format!("n = {}", s.between.n),
        ]);
        rows.push(vec![
            String::new(),
            "Within".to_string(),
            String::new(),
            fmt_opt(s.within.sd),
            fmt_sig(s.within.min),
            fmt_sig(s.within.max),
            format!("T = {}", s.within.t),
        ]);
    }
    TableDoc {
        headers: strs(&[
            "Variable",
            "Component",
            "Mean",
            "Std.Dev.",
            "Min",
            "Max",
            "Observations",
        ]),
        rows,
        footers: vec![
            "bn codes the banks 1..n in sorted order; bc codes the groups in sorted label order.".to_string(),
        ],
    }
}

fn build_trend(section: &TrendSection, bundle: &ReportBundle) -> TableDoc {
    let mut headers = vec!["Banks".to_string()];
    headers.extend(section.column_labels.iter().cloned());
    headers.extend(strs(&["Cumulative Average", "SD", "CV"]));

    let mut rows = Vec::new();
    let (group_rows, all_row) = section
        .table
        .rows
        .split_at(section.table.rows.len() - 1);
    for row in group_rows {
        let mut cells = vec![row.label.clone()];
        cells.extend(row.yearly_means.iter().map(|m| fmt_sig(*m)));
        cells.push(fmt_sig(row.cumulative_mean));
        cells.push(fmt_opt(row.sd));
        cells.push(fmt_opt(row.cv));
        rows.push(cells);
    }
    let all = &all_row[0];
    let blank_tail = |n: usize| vec![String::new(); n];

    let mut max_row = vec!["All banks: max".to_string()];
    max_row.extend(section.cross.max.iter().map(|m| fmt_sig(*m)));
    max_row.extend(blank_tail(3));
    rows.push(max_row);
    let mut min_row = vec!["All banks: min".to_string()];
    min_row.extend(section.cross.min.iter().map(|m| fmt_sig(*m)));
    min_row.extend(blank_tail(3));
    rows.push(min_row);
    let mut mean_row = vec!["All banks: yearly average".to_string()];
    mean_row.extend(all.yearly_means.iter().map(|m| fmt_sig(*m)));
    mean_row.push(fmt_sig(all.cumulative_mean));
    mean_row.push(fmt_opt(all.sd));
    mean_row.push(fmt_opt(all.cv));
    rows.push(mean_row);
    let mut sd_row = vec!["All banks: SD".to_string()];
    sd_row.extend(section.cross.sd.iter().map(|s| fmt_opt(*s)));
    sd_row.extend(blank_tail(3));
    rows.push(sd_row);
    let mut cv_row = vec!["All banks: CV".to_string()];
    cv_row.extend(section.cross.cv.iter().map(|c| fmt_opt(*c)));
    cv_row.extend(blank_tail(3));
    rows.push(cv_row);

    let mut footers = Vec::new();
    if section.table.metric == MetricKind::Tfp {
        footers.push(format!(
            "Yearly group aggregation: {}. Columns are adjacent-year pairs reported under the later year.",
            bundle.aggregation
        ));
    }
    if section.table.rows.iter().any(|r| r.near_zero_mean) {
        footers.push(
            "CV is omitted for rows whose cumulative mean is within 1e-6 of zero."
                .to_string(),
        );
    }
    TableDoc { headers, rows, footers }
}

fn build_anova(bundle: &ReportBundle, format: OutputFormat) -> TableDoc {
    let headers = match format {
        OutputFormat::Markdown => {
            strs(&["Source", "Sum of Squares", "df", "Mean Square", "F", "Sig"])
        }
        OutputFormat::Csv => strs(&[
            "Source",
            "Sum of Squares",
            "df",
            "Mean Square",
            "F",
            "Sig",
            "Observations",
            "Note",
        ]),
    };
    let width = headers.len();
    let pad = |mut row: Vec<String>| {
        row.resize(width, String::new());
        row
    };
    let mut rows = Vec::new();
    let mut footers = Vec::new();
    match &bundle.anova {
        TestOutcome::Computed(block) => {
            let a = &block.result;
            rows.push(pad(vec![
                "Between groups".to_string(),
                fmt_sig(a.ss_between),
                a.df_between.to_string(),
                fmt_sig(a.ms_between),
                fmt_sig(a.f),
                fmt_sig(a.p),
            ]));
            rows.push(pad(vec![
                "Within groups".to_string(),
                fmt_sig(a.ss_within),
                a.df_within.to_string(),
                fmt_sig(a.ms_within),
            ]));
            rows.push(pad(vec![
                "Total".to_string(),
                fmt_sig(a.ss_total),
                (a.df_between + a.df_within).to_string(),
            ]));
            match format {
                OutputFormat::Markdown => {
                    let sizes = block
                        .group_sizes
                        .iter()
                        .map(|(label, n)| format!("{label} = {n}"))
                        .collect::<Vec<_>>()
                        .join(", ");
                    footers.push(format!("Group sizes: {sizes}."));
                }
                OutputFormat::Csv => {
                    for (label, n) in &block.group_sizes {
                        let mut row = vec![label.clone()];
                        row.resize(6, String::new());
                        row.push(n.to_string());
                        rows.push(pad(row));
                    }
                }
            }
        }
        TestOutcome::NotComputed { reason } => match format {
            OutputFormat::Markdown => {
                footers.push(format!("Not computed: {reason}."));
            }
            OutputFormat::Csv => {
                let mut row = vec!["(not computed)".to_string()];
                row.resize(7, String::new());
                row.push(reason.clone());
                rows.push(row);
            }
        },
    }
    TableDoc { headers, rows, footers }
}

fn build_paired(bundle: &ReportBundle, format: OutputFormat) -> TableDoc {
    let mut headers = strs(&[
        "Pair",
        "Mean",
        "Std. Deviation",
        "Std. Error Mean",
        "CI Lower",
        "CI Upper",
        "t",
        "df",
        "Sig. (2-tailed)",
    ]);
    if format == OutputFormat::Csv {
        headers.push("n".to_string());
        headers.push("Note".to_string());
    }
    let width = headers.len();
    let mut rows = Vec::new();
    let mut footers = Vec::new();
    for (i, pair) in bundle.pairs.iter().enumerate() {
        let label = format!("Pair {} {}", i + 1, pair.label);
        let mut row = match &pair.result {
            TestOutcome::Computed(r) => vec![
                label,
                fmt_sig(r.mean_diff),
                fmt_sig(r.sd_diff),
                fmt_sig(r.se),
                fmt_sig(r.ci_low),
                fmt_sig(r.ci_high),
                fmt_sig(r.t),
                r.df.to_string(),
                fmt_sig(r.p),
            ],
            TestOutcome::NotComputed { reason } => {
                if format == OutputFormat::Markdown {
                    footers.push(format!("Pair {} {}: not computed, {reason}.", i + 1, pair.label));
                }
                vec![label]
            }
        };
        row.resize(width, String::new());
        if format == OutputFormat::Csv {
            row[9] = pair.n.to_string();
            if let TestOutcome::NotComputed { reason } = &pair.result {
                row[10] = reason.clone();
            }
        }
        rows.push(row);
    }
    let level = 100.0 * (1.0 - bundle.alpha);
    footers.insert(0, format!("Confidence level: {level}%."));
    if format == OutputFormat::Csv {
        footers.clear();
    }
    TableDoc { headers, rows, footers }
}

fn build_malmquist(bundle: &ReportBundle) -> TableDoc {
    let mut rows = Vec::new();
    for pair in &bundle.malmquist_pairs {
        for r in pair {
            rows.push(vec![
                format!("{}-{}", r.year_pair.0, r.year_pair.1),
                r.bank_id.clone(),
                fmt_sig(r.d_t_t),
                fmt_sig(r.d_t_t1),
                fmt_sig(r.d_t1_t),
                fmt_sig(r.d_t1_t1),
                fmt_sig(r.effch),
                fmt_sig(r.techch),
                fmt_sig(r.pech),
                fmt_sig(r.sech),
                fmt_sig(r.tfpch),
            ]);
        }
    }
    TableDoc {
        headers: strs(&[
            "Pair", "Bank", "d_t_t", "d_t_t1", "d_t1_t", "d_t1_t1", "Effch", "Techch",
            "Pech", "Sech", "Tfpch",
        ]),
        rows,
        footers: vec![
            "Distances are output-distance values; the first subscript is the technology period, the second the data period.".to_string(),
        ],
    }
}

fn build_malmquist_averages(bundle: &ReportBundle) -> TableDoc {
    let mut rows = Vec::new();
    for avg in &bundle.group_averages {
        let pair = format!("{}-{}", avg.year_pair.0, avg.year_pair.1);
        for (label, m) in &avg.arithmetic.group_means {
            rows.push(vec![
                pair.clone(),
                label.clone(),
                avg.arithmetic.group_sizes[label].to_string(),
                fmt_sig(*m),
                fmt_sig(avg.geometric.group_means[label]),
            ]);
        }
        let total: usize = avg.arithmetic.group_sizes.values().sum();
        rows.push(vec![
            pair,
            ALL_BANKS_LABEL.to_string(),
            total.to_string(),
            fmt_sig(avg.arithmetic.all_banks_mean),
            fmt_sig(avg.geometric.all_banks_mean),
        ]);
    }
    TableDoc {
        headers: strs(&[
            "Pair",
            "Group",
            "Banks",
            "Arithmetic mean TFPch",
            "Geometric mean TFPch",
        ]),
        rows,
        footers: vec![
            "The all-banks arithmetic mean is the size-weighted combination of the group means.".to_string(),
        ],
    }
}

fn build_growth_observations(bundle: &ReportBundle) -> TableDoc {
    let headers = strs(&["Metric", "Year pairs", "Observations", "Excluded transitions"]);
    let mut rows = Vec::new();
    let mut footers = Vec::new();
    match &bundle.growth {
        TestOutcome::Computed(block) => {
            for series in block.series() {
                let excluded = series.exclusions();
                let listed = if excluded.is_empty() {
                    "none".to_string()
                } else {
                    excluded
                        .iter()
                        .map(|e| format!("{} (base {})", e.bank_id, e.base_year))
                        .collect::<Vec<_>>()
                        .join("; ")
                };
                rows.push(vec![
                    series.metric.growth_label().to_string(),
                    series.year_pairs.len().to_string(),
                    series.num_observations().to_string(),
                    listed,
                ]);
            }
            footers.push(format!(
                "Growth denominator: {}.",
                match bundle.growth_denominator {
                    GrowthDenominator::Abs => "absolute value of the base",
                    GrowthDenominator::Raw => "signed base",
                }
            ));
        }
        TestOutcome::NotComputed { reason } => {
            rows.push(vec![
                "(not computed)".to_string(),
                String::new(),
                String::new(),
                reason.clone(),
            ]);
        }
    }
    TableDoc { headers, rows, footers }
}

fn build_verdicts(bundle: &ReportBundle) -> TableDoc {
    let mut rows = Vec::new();
    for v in &bundle.verdicts {
        let (outcome, p) = match &v.verdict {
            Verdict::Decided { reject: true, p } => ("reject".to_string(), fmt_sig(*p)),
            Verdict::Decided { reject: false, p } => {
                ("fail to reject".to_string(), fmt_sig(*p))
            }
            Verdict::NotTestable { reason } => {
                (format!("not testable ({reason})"), String::new())
            }
        };
        rows.push(vec![
            v.id.clone(),
            v.statement.clone(),
            v.test.clone(),
            outcome,
            p,
            fmt_sig(bundle.alpha),
        ]);
    }
    let mut footers = Vec::new();
    if (bundle.alpha - 0.05).abs() > 1e-12 {
        footers.push(format!(
            "Note: alpha = {} differs from the conventional 0.05.",
            fmt_sig(bundle.alpha)
        ));
    }
    TableDoc {
        headers: strs(&["Hypothesis", "Statement", "Test", "Outcome", "p", "Alpha"]),
        rows,
        footers,
    }
}

fn build_doc(bundle: &ReportBundle, kind: ArtifactKind, format: OutputFormat) -> TableDoc {
    match kind {
        ArtifactKind::Descriptives => build_descriptives(bundle),
        ArtifactKind::TrendRoa => build_trend(&bundle.trend_roa, bundle),
        ArtifactKind::TrendTsr => build_trend(&bundle.trend_tsr, bundle),
        ArtifactKind::TrendTfp => build_trend(&bundle.trend_tfp, bundle),
        ArtifactKind::Anova => build_anova(bundle, format),
        ArtifactKind::PairedT => build_paired(bundle, format),
        ArtifactKind::MalmquistIndices => build_malmquist(bundle),
        ArtifactKind::MalmquistAverages => build_malmquist_averages(bundle),
        ArtifactKind::GrowthObservations => build_growth_observations(bundle),
        ArtifactKind::Verdicts => build_verdicts(bundle),
    }
}

/// Renders the selected artifacts in one format.
pub fn render_artifacts(
    bundle: &ReportBundle,
    format: OutputFormat,
    kinds: &[ArtifactKind],
) -> Vec<ReportArtifact> {
    kinds
        .iter()
        .map(|&kind| {
            let doc = build_doc(bundle, kind, format);
            let content = match format {
                OutputFormat::Markdown => to_markdown(kind.title(), &doc),
                OutputFormat::Csv => to_csv(&doc),
            };
            ReportArtifact {
                kind,
                filename: format!("{}.{}", kind.basename(), format.extension()),
                content,
            }
        })
        .collect()
}

/// Renders every artifact in one format.
pub fn render_report(bundle: &ReportBundle, format: OutputFormat) -> Vec<ReportArtifact> {
    render_artifacts(bundle, format, &ALL_ARTIFACTS)
}

/// Writes the selected artifacts for every configured format into
/// `out_dir`, creating it if needed. Returns the written paths.
pub fn write_artifacts(
    bundle: &ReportBundle,
    out_dir: &Path,
    formats: &[OutputFormat],
    kinds: &[ArtifactKind],
) -> Result<Vec<PathBuf>, ReportError> {
    if formats.is_empty() {
        return Err(ReportError::NoFormats);
    }
    std::fs::create_dir_all(out_dir).map_err(|e| ReportError::UnwritableOutput {
        path: out_dir.display().to_string(),
        reason: e.to_string(),
    })?;
    let mut written = Vec::new();
    for &format in formats {
        for artifact in render_artifacts(bundle, format, kinds) {
            let path = out_dir.join(&artifact.filename);
            std::fs::write(&path, artifact.content.as_bytes()).map_err(|e| {
                ReportError::UnwritableOutput {
                    path: path.display().to_string(),
                    reason: e.to_string(),
                }
            })?;
            written.push(path);
        }
    }
    Ok(written)
}
