//! Machine-readable reports printed on standard output. Field sets are part
//! of the CLI contract; only documented fields appear.

use serde::Serialize;

#[derive(Serialize)]
pub struct SplitReport {
    #[serde(rename = "N")]
    pub n_rows: usize,
    pub d: usize,
    pub r: usize,
    pub n_test: usize,
    pub energy_metric: f64,
    pub wall_time_ms: f64,
}

#[derive(Serialize)]
pub struct FoldSummary {
    pub strategy: String,
    pub k: usize,
    pub fold_sizes: Vec<usize>,
    pub per_fold_energy: Vec<f64>,
    pub max_energy: f64,
}

#[derive(Serialize)]
pub struct EnergyReportOut {
    pub energy_full: f64,
    pub energy_between: f64,
    pub energy_plot_metric: f64,
    pub prop1_relative_gap: f64,
}

/// One line of `bench` output; a replication emits one `twinning` and one
/// `random` record. `wall_time_ms` covers producing the split, not scoring
/// it.
#[derive(Serialize)]
pub struct BenchRecord {
    pub method: &'static str,
    pub rep: usize,
    #[serde(rename = "N")]
    pub n_rows: usize,
    pub d: usize,
    pub r: usize,
    pub wall_time_ms: f64,
    pub energy_metric: f64,
}
