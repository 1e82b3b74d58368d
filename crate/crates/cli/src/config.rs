//! Run configuration, from TOML and/or command-line flags.

use std::path::PathBuf;

use ribbon_core::spectra::{SmoothFamily, Spectrum, SpectrumModel};
use ribbon_core::Backend;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    #[default]
    Analyze,
    Eval,
    Sweep,
    Verify,
    Selftest,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Analyze => "analyze",
            Command::Eval => "eval",
            Command::Sweep => "sweep",
            Command::Verify => "verify",
            Command::Selftest => "selftest",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    InversePower,
    #[default]
    RegularizedPower,
    Polynomial,
}

impl std::str::FromStr for FamilyKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.replace('-', "_").as_str() {
            "inverse_power" => Ok(FamilyKind::InversePower),
            "regularized_power" => Ok(FamilyKind::RegularizedPower),
            "polynomial" => Ok(FamilyKind::Polynomial),
            other => Err(format!(
                "unknown family '{other}' (inverse_power, regularized_power, polynomial)"
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub command: Command,
    pub graph: Option<PathBuf>,
    pub family: FamilyKind,
    pub p: f64,
    /// Coefficients for the polynomial family, lowest degree first.
    pub coeffs: Vec<f64>,
    pub spectrum: SpectrumModel,
    pub d: f64,
    pub c: f64,
    /// Shift applied to both the spectrum and the function.
    pub epsilon: f64,
    /// Spectrum index per leg; defaults to 2 on every leg.
    pub ext: Vec<u32>,
    /// Legs carrying the zero mode (index 0, eigenvalue 0).
    pub singular: Vec<usize>,
    #[serde(rename = "N")]
    pub n: Option<u32>,
    #[serde(rename = "N_list")]
    pub n_list: Vec<u32>,
    #[serde(rename = "iR")]
    pub i_r: u32,
    pub backend: Backend,
    pub tol: Option<f64>,
    /// Output directory for `report.json` and `series.csv`.
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub budget: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: Command::Analyze,
            graph: None,
            family: FamilyKind::RegularizedPower,
            p: 2.0,
            coeffs: Vec::new(),
            spectrum: SpectrumModel::Power,
            d: 1.0,
            c: 1.0,
            epsilon: 0.0,
            ext: Vec::new(),
            singular: Vec::new(),
            n: None,
            n_list: Vec::new(),
            i_r: 1,
            backend: Backend::DoubleDouble,
            tol: None,
            out: None,
            threads: None,
            budget: ribbon_core::scaling::DEFAULT_TERM_BUDGET,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Parse(format!("config: {e}")))
    }

    /// Checks that do not need the graph.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Parse(m));
        if !(self.d > 0.0) || !self.d.is_finite() {
            return bad(format!("d must be positive, got {}", self.d));
        }
        if !(self.c > 0.0) || !self.c.is_finite() {
            return bad(format!("c must be positive, got {}", self.c));
        }
        if !self.epsilon.is_finite() {
            return bad("epsilon must be finite".into());
        }
        match self.family {
            FamilyKind::InversePower => {
                if !(self.p >= 1.0) || self.p.fract() != 0.0 {
                    return bad(format!("inverse_power needs a positive integer p, got {}", self.p));
                }
            }
            FamilyKind::RegularizedPower => {
                if !(self.p > 0.0) || !self.p.is_finite() {
                    return bad(format!("regularized_power needs p > 0, got {}", self.p));
                }
            }
            FamilyKind::Polynomial => {
                if self.coeffs.is_empty() {
                    return bad("polynomial family needs coeffs".into());
                }
            }
        }
        if self.i_r == 0 {
            return bad("iR must be at least 1".into());
        }
        if self.threads == Some(0) {
            return bad("threads must be at least 1".into());
        }
        if let Some(t) = self.tol {
            if !(t >= 0.0) {
                return bad(format!("tol must be non-negative, got {t}"));
            }
        }
        if self.command != Command::Selftest && self.graph.is_none() {
            return bad("--graph is required".into());
        }
        match self.command {
            Command::Eval if self.n.is_none() => bad("eval needs --N".into()),
            Command::Sweep | Command::Verify if self.n_list.len() < 2 && self.n.is_none() => {
                bad("sweep and verify need --N-list".into())
            }
            _ => Ok(()),
        }
    }

    pub fn smooth_family(&self) -> SmoothFamily {
        let base = match self.family {
            FamilyKind::InversePower => SmoothFamily::InversePower { p: self.p as u32 },
            FamilyKind::RegularizedPower => SmoothFamily::RegularizedPower { p: self.p },
            FamilyKind::Polynomial => SmoothFamily::Polynomial {
                coeffs: self.coeffs.clone(),
            },
        };
        if self.epsilon == 0.0 {
            base
        } else {
            base.shifted(self.epsilon)
        }
    }

    pub fn spectrum_model(&self) -> Spectrum {
        let mut s = match self.spectrum {
            SpectrumModel::Power => Spectrum::power(self.d),
            SpectrumModel::SignedPower => Spectrum::signed_power(self.d),
        }
        .with_scale(self.c)
        .shifted(self.epsilon);
        if !self.singular.is_empty() {
            s = s.with_singular_mode(0.0);
        }
        s
    }

    /// External indices for an `n`-leg graph, singular legs set to 0.
    pub fn external_indices(&self, n: usize) -> Result<Vec<u32>, CliError> {
        let mut ext = if self.ext.is_empty() {
            vec![2; n]
        } else {
            self.ext.clone()
        };
        if ext.len() != n {
            return Err(CliError::Parse(format!(
                "graph has {n} legs but {} external indices were given",
                ext.len()
            )));
        }
        for &s in &self.singular {
            if s == 0 || s > n {
                return Err(CliError::Parse(format!("singular position {s} is not a leg")));
            }
            ext[s - 1] = 0;
        }
        if let Some(k) = ext.iter().position(|&i| i == 0) {
            if !self.singular.contains(&(k + 1)) {
                return Err(CliError::Parse(format!(
                    "index 0 on leg {} needs --singular {}",
                    k + 1,
                    k + 1
                )));
            }
        }
        Ok(ext)
    }

    pub fn cutoffs(&self) -> Vec<u32> {
        if self.n_list.is_empty() {
            self.n.into_iter().collect()
        } else {
            self.n_list.clone()
        }
    }
}
