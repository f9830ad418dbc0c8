//! Verification reports and their JSON and CSV forms.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::measure::Observation;

/// Default tolerance of the exact checkers.
pub const EXACT_TOL: f64 = 1e-12;
/// Default tolerance of the quadrature checker.
pub const QUADRATURE_TOL: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    Exchangeability,
    Cid,
    Stationarity,
    /// Exchangeability of `(X_1..X_n)` given that the stopping time exceeds `n`.
    ConditionalExchangeability,
    CidQuadrature,
    McTwoSample,
    McOneSample,
    CfDistance,
}

impl CheckKind {
    pub fn name(self) -> &'static str {
        match self {
            CheckKind::Exchangeability => "exchangeability",
            CheckKind::Cid => "cid",
            CheckKind::Stationarity => "stationarity",
            CheckKind::ConditionalExchangeability => "conditional_exchangeability",
            CheckKind::CidQuadrature => "cid_quadrature",
            CheckKind::McTwoSample => "mc_two_sample",
            CheckKind::McOneSample => "mc_one_sample",
            CheckKind::CfDistance => "cf_distance",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    Quadrature,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
        }
    }
}

/// Where the largest deviation was found.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Witness {
    /// Length of the history or path.
    pub n: usize,
    /// The offending history, or a path and its rearrangement.
    pub paths: Vec<Vec<Observation>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub event: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z: Option<f64>,
    /// The two quantities that should agree.
    pub values: Vec<f64>,
}

/// Outcome of one check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub check_kind: CheckKind,
    pub family: String,
    pub horizon: usize,
    pub residual: f64,
    /// Residual as an exact rational when the check ran in rational arithmetic.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact_residual: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    pub tolerance: f64,
    pub verdict: Verdict,
    pub method: Method,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl VerificationReport {
    pub fn new(
        check_kind: CheckKind,
        family: impl Into<String>,
        horizon: usize,
        residual: f64,
        tolerance: f64,
        method: Method,
    ) -> Self {
        let residual = residual.abs();
        Self {
            check_kind,
            family: family.into(),
            horizon,
            residual,
            exact_residual: None,
            witness: None,
            tolerance,
            verdict: verdict(residual, tolerance),
            method,
            sample_size: None,
            seed: None,
        }
    }

    pub fn with_witness(mut self, w: Option<Witness>) -> Self {
        self.witness = w;
        self
    }

    pub fn with_exact(mut self, exact: Option<String>) -> Self {
        self.exact_residual = exact;
        self
    }

    pub fn with_sampling(mut self, sample_size: usize, seed: Option<u64>) -> Self {
        self.sample_size = Some(sample_size);
        self.seed = seed;
        self
    }

    /// Re-judges the report under another tolerance.
    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self.verdict = verdict(self.residual, tolerance);
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    pub fn csv_row(&self) -> [String; 7] {
        [
            self.check_kind.name().to_string(),
            self.family.clone(),
            self.horizon.to_string(),
            format!("{:e}", self.residual),
            format!("{:e}", self.tolerance),
            self.verdict.name().to_string(),
            self.seed.map(|s| s.to_string()).unwrap_or_default(),
        ]
    }
}

pub const CSV_HEADER: [&str; 7] = ["check", "family", "horizon", "residual", "tolerance", "verdict", "seed"];

fn verdict(residual: f64, tolerance: f64) -> Verdict {
    // NaN residuals fail.
    if residual <= tolerance {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

/// Writes the summary rows of `reports` as CSV.
pub fn write_csv<W: std::io::Write>(reports: &[VerificationReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in reports {
        w.write_record(r.csv_row())?;
    }
    w.flush()?;
    Ok(())
}
