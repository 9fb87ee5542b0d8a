//! Balanced panel ingestion: schema bindings, CSV parsing, record
//! validation.
//!
//! A panel is n banks observed in t consecutive years, exactly one
//! record per (bank, year). Parsing either returns a dataset satisfying
//! every invariant or fails with a positioned error; no partial dataset
//! escapes. Datasets are immutable after construction and safe to share
//! across threads.
//!
//! The two structural columns are always named `bank_id` and `year`;
//! every other binding (inputs, outputs, the financial columns and the
//! group label) comes from a [`SchemaConfig`], usually parsed from a
//! plain-text `key = value` file.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Read;

use thiserror::Error;

pub const BANK_COLUMN: &str = "bank_id";
pub const YEAR_COLUMN: &str = "year";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PanelError {
    #[error("missing column {name}")]
    MissingColumn { name: String },
    #[error("row {row}, column {column}: cannot parse {value:?}")]
    UnparsableCell { row: u64, column: String, value: String },
    #[error("duplicate record for bank {bank}, year {year}")]
    DuplicateRecord { bank: String, year: i32 },
    #[error("unbalanced panel: bank {bank} has no record for year {year}")]
    UnbalancedPanel { bank: String, year: i32 },
    #[error("years are not consecutive: gap between {prev} and {next}")]
    YearGap { prev: i32, next: i32 },
    #[error("bank {bank} changes group between years ({first} vs {second})")]
    InconsistentGroup { bank: String, first: String, second: String },
    #[error("invalid record for bank {bank}, year {year}: {violations}")]
    InvalidRecord { bank: String, year: i32, violations: String },
    #[error("schema: {0}")]
    Schema(String),
    #[error("panel has no data rows")]
    Empty,
    #[error("csv: {0}")]
    Csv(String),
}

/// Column-name bindings for one panel file. `input_columns` and
/// `output_columns` feed the DEA model (K >= 1 and M >= 1); the four
/// financial columns feed ROA and TSR; `group_column` labels each
/// bank's category. No column may be bound to two roles, and none may
/// shadow the fixed `bank_id` / `year` columns.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemaConfig {
    pub input_columns: Vec<String>,
    pub output_columns: Vec<String>,
    pub net_income: String,
    pub total_assets: String,
    pub year_end_price: String,
    pub dividend_per_share: String,
    pub group_column: String,
}

impl SchemaConfig {
    pub fn validate(&self) -> Result<(), PanelError> {
        if self.input_columns.is_empty() {
            return Err(PanelError::Schema("need at least one input column".to_string()));
        }
        if self.output_columns.is_empty() {
            return Err(PanelError::Schema("need at least one output column".to_string()));
        }
        let mut seen = BTreeSet::new();
        seen.insert(BANK_COLUMN.to_string());
        seen.insert(YEAR_COLUMN.to_string());
        for name in self.bound_columns() {
            if name.is_empty() {
                return Err(PanelError::Schema("empty column name".to_string()));
            }
            if !seen.insert(name.clone()) {
                return Err(PanelError::Schema(format!(
                    "column {name} is bound to two roles"
                )));
            }
        }
        Ok(())
    }

    /// Every configured column name, in canonical order: group, inputs,
    /// outputs, then the four financial columns.
    pub fn bound_columns(&self) -> Vec<String> {
        let mut cols = vec![self.group_column.clone()];
        cols.extend(self.input_columns.iter().cloned());
        cols.extend(self.output_columns.iter().cloned());
        cols.push(self.net_income.clone());
        cols.push(self.total_assets.clone());
        cols.push(self.year_end_price.clone());
        cols.push(self.dividend_per_share.clone());
        cols
    }

    /// Parses the plain-text `key = value` schema format.
    ///
    /// Recognized keys: `inputs` and `outputs` (comma-separated column
    /// lists) and `net_income`, `total_assets`, `year_end_price`,
    /// `dividend_per_share`, `group` (single column names). Blank lines
    /// and lines starting with `#` are ignored. Every key is required,
    /// may appear once, and unknown keys are rejected.
    pub fn parse(text: &str) -> Result<Self, PanelError> {
        let mut values: BTreeMap<&str, String> = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(PanelError::Schema(format!(
                    "line {}: expected key = value, got {line:?}",
                    lineno + 1
                )));
            };
            let key = key.trim();
            let value = value.trim().to_string();
            const KNOWN: [&str; 7] = [
                "inputs",
                "outputs",
                "net_income",
                "total_assets",
                "year_end_price",
                "dividend_per_share",
                "group",
            ];
            let Some(&key) = KNOWN.iter().find(|k| **k == key) else {
                return Err(PanelError::Schema(format!(
                    "line {}: unknown key {key:?}",
                    lineno + 1
                )));
            };
            if values.insert(key, value).is_some() {
                return Err(PanelError::Schema(format!("key {key} appears twice")));
            }
        }
        let take = |key: &str| -> Result<String, PanelError> {
            values
                .get(key)
                .cloned()
                .ok_or_else(|| PanelError::Schema(format!("missing key {key}")))
        };
        let split_list = |key: &str| -> Result<Vec<String>, PanelError> {
            let raw = take(key)?;
            let items: Vec<String> = raw
                .split(',')
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty())
                .collect();
            if items.is_empty() {
                return Err(PanelError::Schema(format!("key {key} lists no columns")));
            }
            Ok(items)
        };
        let schema = SchemaConfig {
            input_columns: split_list("inputs")?,
            output_columns: split_list("outputs")?,
            net_income: take("net_income")?,
            total_assets: take("total_assets")?,
            year_end_price: take("year_end_price")?,
            dividend_per_share: take("dividend_per_share")?,
            group_column: take("group")?,
        };
        schema.validate()?;
        Ok(schema)
    }
}

/// One bank observed in one year.
#[derive(Debug, Clone, PartialEq)]
pub struct BankYearRecord {
    pub bank_id: String,
    pub year: i32,
    pub group: String,
    pub inputs: Vec<f64>,
    pub outputs: Vec<f64>,
    pub net_income: f64,
    pub total_assets: f64,
    pub year_end_price: f64,
    pub dividend_per_share: f64,
}

/// One violated record rule; `field` names the offending field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: String,
    pub rule: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.rule)
    }
}

/// Checks every per-record invariant; the empty list means the record
/// is valid. Violations are data, not errors, so callers can collect
/// them across a whole file before reporting.
pub fn validate_record(r: &BankYearRecord) -> Vec<Violation> {
    let mut v = Vec::new();
    let mut push = |field: &str, rule: &str| {
        v.push(Violation { field: field.to_string(), rule: rule.to_string() })
    };
    if r.bank_id.is_empty() {
        push("bank_id", "must not be empty");
    }
    if r.inputs.is_empty() {
        push("inputs", "need at least one input");
    }
    if r.inputs.iter().any(|x| !x.is_finite() || *x <= 0.0) {
        push("inputs", "inputs must be strictly positive");
    }
    if r.outputs.is_empty() {
        push("outputs", "need at least one output");
    }
    if r.outputs.iter().any(|y| !y.is_finite() || *y < 0.0) {
        push("outputs", "outputs must be non-negative");
    } else if !r.outputs.iter().any(|y| *y > 0.0) {
        push("outputs", "at least one output must be strictly positive");
    }
    if !r.net_income.is_finite() {
        push("net_income", "must be finite");
    }
    if !r.total_assets.is_finite() || r.total_assets <= 0.0 {
        push("total_assets", "must be strictly positive");
    }
    if !r.year_end_price.is_finite() || r.year_end_price <= 0.0 {
        push("year_end_price", "must be strictly positive");
    }
    if !r.dividend_per_share.is_finite() || r.dividend_per_share < 0.0 {
        push("dividend_per_share", "must be non-negative");
    }
    v
}

/// A validated balanced panel: one record per (bank, year), banks
/// sorted, years consecutive. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelDataset {
    records: Vec<BankYearRecord>,
    banks: Vec<String>,
    years: Vec<i32>,
    schema: SchemaConfig,
}

impl PanelDataset {
    /// Builds a dataset from loose records, enforcing every invariant:
    /// per-record validity, consistent K/M against the schema, one
    /// group per bank, no duplicate (bank, year), balance, consecutive
    /// years. Records may arrive in any order.
    pub fn from_records(
        records: Vec<BankYearRecord>,
        schema: SchemaConfig,
    ) -> Result<Self, PanelError> {
        schema.validate()?;
        if records.is_empty() {
            return Err(PanelError::Empty);
        }
        let k = schema.input_columns.len();
        let m = schema.output_columns.len();
        for r in &records {
            let mut violations = validate_record(r);
            if r.inputs.len() != k {
                violations.push(Violation {
                    field: "inputs".to_string(),
                    rule: format!("expected {k} values, got {}", r.inputs.len()),
                });
            }
            if r.outputs.len() != m {
                violations.push(Violation {
                    field: "outputs".to_string(),
                    rule: format!("expected {m} values, got {}", r.outputs.len()),
                });
            }
            if !violations.is_empty() {
                let joined = violations
                    .iter()
                    .map(Violation::to_string)
                    .collect::<Vec<_>>()
                    .join("; ");
                return Err(PanelError::InvalidRecord {
                    bank: r.bank_id.clone(),
                    year: r.year,
                    violations: joined,
                });
            }
        }

        let mut seen: BTreeSet<(String, i32)> = BTreeSet::new();
        let mut groups: BTreeMap<String, String> = BTreeMap::new();
        for r in &records {
            if !seen.insert((r.bank_id.clone(), r.year)) {
                return Err(PanelError::DuplicateRecord { bank: r.bank_id.clone(), year: r.year });
            }
            match groups.get(&r.bank_id) {
                None => {
                    groups.insert(r.bank_id.clone(), r.group.clone());
                }
                Some(g) if *g != r.group => {
                    return Err(PanelError::InconsistentGroup {
                        bank: r.bank_id.clone(),
                        first: g.clone(),
                        second: r.group.clone(),
                    });
                }
                Some(_) => {}
            }
        }

        let banks: Vec<String> = groups.keys().cloned().collect();
        let years: Vec<i32> = records.iter().map(|r| r.year).collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        for bank in &banks {
            for &year in &years {
                if !seen.contains(&(bank.clone(), year)) {
                    return Err(PanelError::UnbalancedPanel { bank: bank.clone(), year });
                }
            }
        }
        for w in years.windows(2) {
            if w[1] != w[0] + 1 {
                return Err(PanelError::YearGap { prev: w[0], next: w[1] });
            }
        }

        let mut records = records;
        records.sort_by(|a, b| (&a.bank_id, a.year).cmp(&(&b.bank_id, b.year)));
        Ok(PanelDataset { records, banks, years, schema })
    }

    pub fn records(&self) -> &[BankYearRecord] {
        &self.records
    }

    pub fn banks(&self) -> &[String] {
        &self.banks
    }

    pub fn years(&self) -> &[i32] {
        &self.years
    }

    pub fn schema(&self) -> &SchemaConfig {
        &self.schema
    }

    pub fn num_banks(&self) -> usize {
        self.banks.len()
    }

    pub fn num_years(&self) -> usize {
        self.years.len()
    }

    /// The record for (bank, year); None when either key is unknown.
    pub fn record(&self, bank: &str, year: i32) -> Option<&BankYearRecord> {
        let bank_idx = self.banks.binary_search_by(|b| b.as_str().cmp(bank)).ok()?;
        let year_idx = self.years.binary_search(&year).ok()?;
        // Records are sorted by (bank, year), one per pair.
        Some(&self.records[bank_idx * self.years.len() + year_idx])
    }

    /// Group label of a bank (constant across its years).
    pub fn group_of(&self, bank: &str) -> Option<&str> {
        self.record(bank, self.years[0]).map(|r| r.group.as_str())
    }

    /// Group labels in sorted order.
    pub fn group_labels(&self) -> Vec<String> {
        let set: BTreeSet<&str> = self.banks.iter().filter_map(|b| self.group_of(b)).collect();
        set.into_iter().map(str::to_string).collect()
    }

    /// Banks of one group, in sorted order.
    pub fn banks_in_group(&self, group: &str) -> Vec<String> {
        self.banks
            .iter()
            .filter(|b| self.group_of(b) == Some(group))
            .cloned()
            .collect()
    }

    /// All records of one year in bank order; None for unknown years.
    pub fn period_rows(&self, year: i32) -> Option<Vec<&BankYearRecord>> {
        if !self.years.contains(&year) {
            return None;
        }
        Some(self.banks.iter().map(|b| self.record(b, year).expect("balanced")).collect())
    }

    /// Renders the dataset back to CSV in canonical column order.
    /// Values print with Rust's shortest round-trip float formatting,
    /// so parsing the output reproduces this dataset field for field.
    pub fn to_csv(&self) -> String {
        let s = &self.schema;
        let mut header: Vec<&str> = vec![BANK_COLUMN, YEAR_COLUMN, &s.group_column];
        header.extend(s.input_columns.iter().map(String::as_str));
        header.extend(s.output_columns.iter().map(String::as_str));
        header.push(&s.net_income);
        header.push(&s.total_assets);
        header.push(&s.year_end_price);
        header.push(&s.dividend_per_share);

        let mut out = String::new();
        out.push_str(&header.join(","));
        out.push('\n');
        for r in &self.records {
            let mut cells: Vec<String> = vec![r.bank_id.clone(), r.year.to_string(), r.group.clone()];
            cells.extend(r.inputs.iter().map(|v| v.to_string()));
            cells.extend(r.outputs.iter().map(|v| v.to_string()));
            cells.push(r.net_income.to_string());
            cells.push(r.total_assets.to_string());
            cells.push(r.year_end_price.to_string());
            cells.push(r.dividend_per_share.to_string());
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Parses a panel from CSV text: UTF-8, comma delimiter, `.` decimal
/// point, first row a header containing `bank_id`, `year` and every
/// column the schema binds (exact, case-sensitive names). Rows may
/// arrive in any order; the resulting dataset is sorted.
pub fn parse_panel_csv<R: Read>(
    reader: R,
    schema: &SchemaConfig,
) -> Result<PanelDataset, PanelError> {
    schema.validate()?;
    let mut csv_reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = csv_reader
        .headers()
        .map_err(|e| PanelError::Csv(e.to_string()))?
        .clone();

    let mut index_of: BTreeMap<&str, usize> = BTreeMap::new();
    for (i, name) in headers.iter().enumerate() {
        if index_of.insert(name, i).is_some() {
            return Err(PanelError::Csv(format!("duplicate header column {name:?}")));
        }
    }
    let col = |name: &str| -> Result<usize, PanelError> {
        index_of
            .get(name)
            .copied()
            .ok_or_else(|| PanelError::MissingColumn { name: name.to_string() })
    };
    let bank_col = col(BANK_COLUMN)?;
    let year_col = col(YEAR_COLUMN)?;
    let group_col = col(&schema.group_column)?;
    let input_cols: Vec<usize> = schema
        .input_columns
        .iter()
        .map(|n| col(n))
        .collect::<Result<_, _>>()?;
    let output_cols: Vec<usize> = schema
        .output_columns
        .iter()
        .map(|n| col(n))
        .collect::<Result<_, _>>()?;
    let net_income_col = col(&schema.net_income)?;
    let total_assets_col = col(&schema.total_assets)?;
    let price_col = col(&schema.year_end_price)?;
    let dividend_col = col(&schema.dividend_per_share)?;

    let mut records = Vec::new();
    for row in csv_reader.records() {
        let row = row.map_err(|e| PanelError::Csv(e.to_string()))?;
        // 1-based physical line in the file, headers included.
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let cell = |idx: usize| row.get(idx).unwrap_or("");
        let parse_f64 = |idx: usize, name: &str| -> Result<f64, PanelError> {
            let raw = cell(idx);
            raw.parse::<f64>().map_err(|_| PanelError::UnparsableCell {
                row: line,
                column: name.to_string(),
                value: raw.to_string(),
            })
        };
        let year: i32 = cell(year_col).parse().map_err(|_| PanelError::UnparsableCell {
            row: line,
            column: YEAR_COLUMN.to_string(),
            value: cell(year_col).to_string(),
        })?;
        let inputs = schema
            .input_columns
            .iter()
            .zip(&input_cols)
            .map(|(name, &idx)| parse_f64(idx, name))
            .collect::<Result<Vec<f64>, _>>()?;
        let outputs = schema
            .output_columns
            .iter()
            .zip(&output_cols)
            .map(|(name, &idx)| parse_f64(idx, name))
            .collect::<Result<Vec<f64>, _>>()?;
        records.push(BankYearRecord {
            bank_id: cell(bank_col).to_string(),
            year,
            group: cell(group_col).to_string(),
            inputs,
            outputs,
            net_income: parse_f64(net_income_col, &schema.net_income)?,
            total_assets: parse_f64(total_assets_col, &schema.total_assets)?,
            year_end_price: parse_f64(price_col, &schema.year_end_price)?,
            dividend_per_share: parse_f64(dividend_col, &schema.dividend_per_share)?,
        });
    }
    PanelDataset::from_records(records, schema.clone())
}
