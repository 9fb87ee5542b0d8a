//! Malmquist productivity index between adjacent years, with the
//! standard decomposition, and the per-year group aggregation used by
//! the trend tables.
//!
//! The index follows the geometric-mean form: four CRS output distances
//! per bank (each period's technology evaluating each period's data)
//! give efficiency change effch = d_t1_t1 / d_t_t and frontier shift
//! techch = sqrt((d_t_t1 / d_t1_t1) * (d_t_t / d_t1_t)), with
//! tfpch = effch * techch. Pure efficiency change pech is the ratio of
//! same-period VRS efficiencies and sech = effch / pech. VRS is only
//! ever solved same-period, which is always feasible; CRS cross-period
//! distances always exist but can degenerate to non-finite values when
//! one period produced none of an output the other period did, and that
//! is surfaced as an error rather than substituted.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::dea::{output_distance, DeaError, Rts, TechnologySet};
use crate::panel::PanelDataset;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MalmquistError {
    #[error("panel has no period {year}")]
    MissingPeriod { year: i32 },
    #[error(transparent)]
    Dea(#[from] DeaError),
    #[error(
        "bank {bank}, pair {t}-{t1}: distance {name} = {value} is not positive and finite"
    )]
    DegenerateDistance { bank: String, t: i32, t1: i32, name: &'static str, value: f64 },
    #[error("group {name} has no values")]
    EmptyGroup { name: String },
    #[error("geometric mean needs strictly positive values, got {value}")]
    NonPositiveValue { value: f64 },
}

/// One bank's productivity change between years t and t+1.
///
/// Distances are stored as output-distance values (at most 1 on the
/// bank's own frontier); the first subscript is the technology period,
/// the second the data period.
#[derive(Debug, Clone, PartialEq)]
pub struct MalmquistRecord {
    pub bank_id: String,
    pub year_pair: (i32, i32),
    pub d_t_t: f64,
    pub d_t_t1: f64,
    pub d_t1_t: f64,
    pub d_t1_t1: f64,
    pub effch: f64,
    pub techch: f64,
    pub tfpch: f64,
    pub pech: f64,
    pub sech: f64,
}

fn technology(
    panel: &PanelDataset,
    year: i32,
    rts: Rts,
) -> Result<TechnologySet, MalmquistError> {
    let rows = panel
        .period_rows(year)
        .ok_or(MalmquistError::MissingPeriod { year })?;
    let inputs = rows.iter().map(|r| r.inputs.clone()).collect();
    let outputs = rows.iter().map(|r| r.outputs.clone()).collect();
    Ok(TechnologySet::new(inputs, outputs, rts)?)
}

/// Computes one MalmquistRecord per bank for the year pair (t, t+1),
/// in the panel's bank order.
pub fn malmquist_indices(
    panel: &PanelDataset,
    t: i32,
) -> Result<Vec<MalmquistRecord>, MalmquistError> {
    let t1 = t + 1;
    let crs_t = technology(panel, t, Rts::Crs)?;
    let crs_t1 = technology(panel, t1, Rts::Crs)?;
    let vrs_t = technology(panel, t, Rts::Vrs)?;
    let vrs_t1 = technology(panel, t1, Rts::Vrs)?;

    let mut records = Vec::with_capacity(panel.num_banks());
    for bank in panel.banks() {
        let rec_t = panel.record(bank, t).expect("balanced panel");
        let rec_t1 = panel.record(bank, t1).expect("balanced panel");
        let check = |name: &'static str, d: f64| -> Result<f64, MalmquistError> {
            if !d.is_finite() || d <= 0.0 {
                return Err(MalmquistError::DegenerateDistance {
                    bank: bank.clone(),
                    t,
                    t1,
                    name,
                    value: d,
                });
            }
            Ok(d)
        };
        let dist = |tech: &TechnologySet, rec: &crate::panel::BankYearRecord| {
            output_distance(&rec.inputs, &rec.outputs, tech).map(|s| s.efficiency)
        };
        let d_t_t = check("d_t_t", dist(&crs_t, rec_t)?)?;
        let d_t_t1 = check("d_t_t1", dist(&crs_t, rec_t1)?)?;
        let d_t1_t = check("d_t1_t", dist(&crs_t1, rec_t)?)?;
        let d_t1_t1 = check("d_t1_t1", dist(&crs_t1, rec_t1)?)?;
        let vrs_eff_t = check("vrs_t", dist(&vrs_t, rec_t)?)?;
        let vrs_eff_t1 = check("vrs_t1", dist(&vrs_t1, rec_t1)?)?;

        let effch = d_t1_t1 / d_t_t;
        let techch = ((d_t_t1 / d_t1_t1) * (d_t_t / d_t1_t)).sqrt();
        let tfpch = effch * techch;
        let pech = vrs_eff_t1 / vrs_eff_t;
        let sech = effch / pech;
        records.push(MalmquistRecord {
            bank_id: bank.clone(),
            year_pair: (t, t1),
            d_t_t,
            d_t_t1,
            d_t1_t,
            d_t1_t1,
            effch,
            techch,
            tfpch,
            pech,
            sech,
        });
    }
    Ok(records)
}

/// Per-group and all-banks arithmetic means for one year's values.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupAverages {
    pub group_means: BTreeMap<String, f64>,
    pub group_sizes: BTreeMap<String, usize>,
    pub all_banks_mean: f64,
}

/// Arithmetic mean per group plus the all-banks mean over every value.
/// The all-banks mean equals the size-weighted combination of the
/// group means by construction.
pub fn yearly_group_average(
    values_by_group: &BTreeMap<String, Vec<f64>>,
) -> Result<GroupAverages, MalmquistError> {
    if values_by_group.is_empty() {
        return Err(MalmquistError::EmptyGroup { name: "(none)".to_string() });
    }
    let mut group_means = BTreeMap::new();
    let mut group_sizes = BTreeMap::new();
    let mut total = 0.0;
    let mut count = 0usize;
    for (name, values) in values_by_group {
        if values.is_empty() {
            return Err(MalmquistError::EmptyGroup { name: name.clone() });
        }
        let sum: f64 = values.iter().sum();
        group_means.insert(name.clone(), sum / values.len() as f64);
        group_sizes.insert(name.clone(), values.len());
        total += sum;
        count += values.len();
    }
    Ok(GroupAverages { group_means, group_sizes, all_banks_mean: total / count as f64 })
}

/// Geometric counterpart of [`yearly_group_average`] for index values,
/// which are strictly positive. Reports label which aggregation a row
/// uses; the arithmetic form is the default.
pub fn yearly_group_average_geometric(
    values_by_group: &BTreeMap<String, Vec<f64>>,
) -> Result<GroupAverages, MalmquistError> {
    if values_by_group.is_empty() {
        return Err(MalmquistError::EmptyGroup { name: "(none)".to_string() });
    }
    let mut group_means = BTreeMap::new();
    let mut group_sizes = BTreeMap::new();
    let mut log_total = 0.0;
    let mut count = 0usize;
    for (name, values) in values_by_group {
        if values.is_empty() {
            return Err(MalmquistError::EmptyGroup { name: name.clone() });
        }
        let mut log_sum = 0.0;
        for &v in values {
            if !v.is_finite() || v <= 0.0 {
                return Err(MalmquistError::NonPositiveValue { value: v });
            }
            log_sum += v.ln();
        }
        group_means.insert(name.clone(), (log_sum / values.len() as f64).exp());
        group_sizes.insert(name.clone(), values.len());
        log_total += log_sum;
        count += values.len();
    }
    Ok(GroupAverages {
        group_means,
        group_sizes,
        all_banks_mean: (log_total / count as f64).exp(),
    })
}
