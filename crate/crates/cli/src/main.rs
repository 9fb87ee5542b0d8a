//! Command-line front end for the three-dimension bank performance
//! pipeline: parse a panel, compute ROA, TSR and Malmquist TFP change,
//! test growth-rate equivalency, and write the result tables.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use triperf::metrics::GrowthDenominator;
use triperf::report::{
    load_panel, run_pipeline, write_artifacts, Aggregation, ArtifactKind,
    OutputFormat, ReportError, RunConfig, TestOutcome, Verdict, ALL_ARTIFACTS,
    MALMQUIST_ARTIFACTS, METRICS_ARTIFACTS, TEST_ARTIFACTS,
};

#[derive(Parser)]
#[command(
    name = "triperf",
    version,
    about = "Bank performance in three dimensions: ROA, total stock return and Malmquist TFP change, with growth-rate equivalency tests"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check that the schema and panel parse and validate cleanly.
    Validate(CommonArgs),
    /// Write the descriptive and trend tables.
    Metrics(CommonArgs),
    /// Write the Malmquist index and group-average tables.
    Malmquist(CommonArgs),
    /// Write the ANOVA, paired-t, growth-count and verdict tables.
    Test(CommonArgs),
    /// Write every table.
    Report(CommonArgs),
}

impl Command {
    fn args(&self) -> &CommonArgs {
        match self {
            Command::Validate(a)
            | Command::Metrics(a)
            | Command::Malmquist(a)
            | Command::Test(a)
            | Command::Report(a) => a,
        }
    }

    fn artifacts(&self) -> &'static [ArtifactKind] {
        match self {
            Command::Validate(_) => &[],
            Command::Metrics(_) => &METRICS_ARTIFACTS,
            Command::Malmquist(_) => &MALMQUIST_ARTIFACTS,
            Command::Test(_) => &TEST_ARTIFACTS,
            Command::Report(_) => &ALL_ARTIFACTS,
        }
    }
}

#[derive(Args)]
struct CommonArgs {
    /// Panel CSV file.
    #[arg(long, value_name = "PATH")]
    panel: PathBuf,
    /// Schema config binding CSV columns to their roles.
    #[arg(long, value_name = "PATH")]
    schema: PathBuf,
    /// Directory the rendered tables are written into.
    #[arg(long, value_name = "DIR", default_value = "report")]
    out: PathBuf,
    /// Output format; pass twice for both.
    #[arg(long, value_enum, default_value = "markdown")]
    format: Vec<FormatArg>,
    /// Significance level for the equivalency tests.
    #[arg(long, value_name = "F", default_value_t = 0.05)]
    alpha: f64,
    /// Growth-rate denominator convention.
    #[arg(long, value_enum, default_value = "abs")]
    growth_denominator: DenomArg,
    /// Yearly group aggregation for the TFP trend table.
    #[arg(long, value_enum, default_value = "arithmetic")]
    aggregation: AggArg,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Markdown,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum DenomArg {
    /// Divide by the absolute value of the base year's value.
    Abs,
    /// Divide by the signed base value.
    Raw,
}

#[derive(Clone, Copy, ValueEnum)]
enum AggArg {
    Arithmetic,
    Geometric,
}

impl CommonArgs {
    fn to_config(&self) -> RunConfig {
        let mut formats: Vec<OutputFormat> = Vec::new();
        for f in &self.format {
            let format = match f {
                FormatArg::Markdown => OutputFormat::Markdown,
                FormatArg::Csv => OutputFormat::Csv,
            };
            if !formats.contains(&format) {
                formats.push(format);
            }
        }
        RunConfig {
            panel_path: self.panel.clone(),
            schema_path: self.schema.clone(),
            out_dir: self.out.clone(),
            formats,
            alpha: self.alpha,
            growth_denominator: match self.growth_denominator {
                DenomArg::Abs => GrowthDenominator::Abs,
                DenomArg::Raw => GrowthDenominator::Raw,
            },
            aggregation: match self.aggregation {
                AggArg::Arithmetic => Aggregation::Arithmetic,
                AggArg::Geometric => Aggregation::Geometric,
            },
        }
    }
}

fn execute(command: &Command) -> Result<(), ReportError> {
    let config = command.args().to_config();
    if let Command::Validate(_) = command {
        let panel = load_panel(&config)?;
        println!(
            "panel OK: {} banks x {} years, {} records, groups: {}",
            panel.num_banks(),
            panel.num_years(),
            panel.records().len(),
            panel.group_labels().join(", ")
        );
        return Ok(());
    }

    let bundle = run_pipeline(&config)?;
    let written = write_artifacts(
        &bundle,
        &config.out_dir,
        &config.formats,
        command.artifacts(),
    )?;
    for path in &written {
        println!("wrote {}", path.display());
    }
    if matches!(command, Command::Test(_) | Command::Report(_)) {
        for v in &bundle.verdicts {
            match &v.verdict {
                Verdict::Decided { reject: true, p } => {
                    println!("{}: rejected (p = {:.4})", v.id, p)
                }
                Verdict::Decided { reject: false, p } => {
                    println!("{}: not rejected (p = {:.4})", v.id, p)
                }
                Verdict::NotTestable { reason } => {
                    println!("{}: not testable ({reason})", v.id)
                }
            }
        }
        if let TestOutcome::NotComputed { reason } = &bundle.growth {
            println!("growth rates not computed: {reason}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
