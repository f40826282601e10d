//! JSON run configuration.
//!
//! ```json
//! {
//!   "model": "jaynes_cummings",
//!   "params": { "g": 1.0, "delta": 0.0, "kappa": 1.0, "gamma": 1.0 },
//!   "cutoff": 3,
//!   "tolerances": { "degeneracy": 1e-9, "resonance": 1e-9, "residual": 1e-8 },
//!   "output": { "path": "eigs.json", "format": "json" }
//! }
//! ```
//!
//! `tolerances` and `output` are optional. Unknown keys and unknown parameter
//! names are rejected.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{build_jc, build_jc_dephasing, build_spin_model, build_tc2, BlockModel, Oscillator, SpinSystem};
use crate::spectral::{SolverOptions, DEFAULT_RESONANCE_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    JaynesCummings,
    JcDephasing,
    #[serde(rename = "tavis_cummings_2")]
    TavisCummings2,
    SpinChain,
    SpinsOscillator,
}

impl ModelKind {
    /// Required parameter names followed by optional ones with their defaults.
    fn parameters(self) -> (&'static [&'static str], &'static [(&'static str, f64)]) {
        const SPIN_OPTIONAL: &[(&str, f64)] = &[("j", 0.0), ("eta", 0.0), ("delta", 0.0), ("gamma_z", 0.0)];
        match self {
            ModelKind::JaynesCummings => (&["g", "delta", "kappa", "gamma"], &[]),
            ModelKind::JcDephasing => (&["g", "delta", "kappa", "gamma", "gamma_z"], &[]),
            ModelKind::TavisCummings2 => (&["g1", "g2", "delta1", "delta2", "gamma1", "gamma2", "kappa"], &[]),
            ModelKind::SpinChain => (&["spins", "gamma"], SPIN_OPTIONAL),
            ModelKind::SpinsOscillator => (&["spins", "g", "kappa", "gamma"], SPIN_OPTIONAL),
        }
    }

    fn needs_cutoff(self) -> bool {
        self != ModelKind::SpinChain
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub degeneracy: f64,
    pub resonance: f64,
    /// Bound used by the oracle checks in `verify`.
    pub residual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            degeneracy: crate::eigensolver::DEFAULT_DEGENERACY_TOL,
            resonance: DEFAULT_RESONANCE_TOL,
            residual: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub path: PathBuf,
    pub format: OutputFormat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelKind,
    pub params: BTreeMap<String, f64>,
    #[serde(default)]
    pub cutoff: Option<usize>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: Option<OutputSpec>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let (required, optional) = self.model.parameters();
        for name in self.params.keys() {
            if !required.contains(&name.as_str()) && !optional.iter().any(|(o, _)| o == name) {
                return Err(Error::Config(format!("unknown parameter '{name}' for model {:?}", self.model)));
            }
        }
        for name in required {
            if !self.params.contains_key(*name) {
                return Err(Error::Config(format!("missing parameter '{name}' for model {:?}", self.model)));
            }
        }
        if let Some((name, v)) = self.params.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Config(format!("parameter '{name}' = {v} is not finite")));
        }
        if self.model.needs_cutoff() && self.cutoff.is_none() {
            return Err(Error::Config("this model needs a photon cutoff".into()));
        }
        let t = &self.tolerances;
        for (name, v) in [("degeneracy", t.degeneracy), ("resonance", t.resonance), ("residual", t.residual)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("tolerance {name} = {v} must be positive")));
            }
        }
        Ok(())
    }

    fn param(&self, name: &str) -> f64 {
        if let Some(v) = self.params.get(name) {
            return *v;
        }
        let (_, optional) = self.model.parameters();
        optional
            .iter()
            .find(|(o, _)| *o == name)
            .map(|(_, d)| *d)
            .expect("parameter names checked by validate")
    }

    fn spins(&self) -> Result<usize> {
        let m = self.param("spins");
        if m.fract() != 0.0 || m < 1.0 {
            return Err(Error::Config(format!("spins = {m} must be a positive integer")));
        }
        Ok(m as usize)
    }

    pub fn build_model(&self) -> Result<BlockModel> {
        self.validate()?;
        let p = |name: &str| self.param(name);
        let cutoff = self.cutoff.unwrap_or(0);
        match self.model {
            ModelKind::JaynesCummings => build_jc(p("g"), p("delta"), p("kappa"), p("gamma"), cutoff),
            ModelKind::JcDephasing => {
                build_jc_dephasing(p("g"), p("delta"), p("kappa"), p("gamma"), p("gamma_z"), cutoff)
            }
            ModelKind::TavisCummings2 => build_tc2(
                p("g1"),
                p("g2"),
                p("delta1"),
                p("delta2"),
                p("gamma1"),
                p("gamma2"),
                p("kappa"),
                cutoff,
            ),
            ModelKind::SpinChain | ModelKind::SpinsOscillator => {
                let m = self.spins()?;
                let mut sys = SpinSystem::chain(m, p("j"), p("eta"), p("gamma"), p("gamma_z"));
                sys.detunings = vec![p("delta"); m];
                if self.model == ModelKind::SpinChain {
                    if self.cutoff.is_some_and(|c| c != m) {
                        return Err(Error::Config(format!("spin chain cutoff must equal spins = {m}")));
                    }
                    build_spin_model(&sys, None)
                } else {
                    let osc = Oscillator {
                        couplings: vec![p("g"); m],
                        kappa: p("kappa"),
                        cutoff,
                    };
                    build_spin_model(&sys, Some(&osc))
                }
            }
        }
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            degeneracy_tol: Some(self.tolerances.degeneracy),
            resonance_tol: self.tolerances.resonance,
        }
    }

    /// Output path from the command line, else from the config when its format matches.
    pub fn output_path(&self, cli: Option<&Path>, format: OutputFormat) -> Result<PathBuf> {
        if let Some(p) = cli {
            return Ok(p.to_path_buf());
        }
        match &self.output {
            Some(o) if o.format == format => Ok(o.path.clone()),
            Some(o) => Err(Error::Config(format!(
                "configured output format {:?} does not match this command ({format:?})",
                o.format
            ))),
            None => Err(Error::Config("no output path given".into())),
        }
    }
}
