use std::path::{Path, PathBuf};

use qcbecker::analytic::{Family, SchlichtFunction};
use qcbecker::construction::ConstructionParams;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Everything a run depends on. Unknown keys are rejected at every level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub function: Family,
    /// Taylor coefficients kept for the function.
    #[serde(default = "default_terms")]
    pub terms: usize,
    /// `q` the construction runs at; the certified estimate when absent.
    #[serde(default)]
    pub q: Option<f64>,
    #[serde(default)]
    pub params: ConstructionParams,
    /// Defaults to the output-directory environment variable, then `qcbecker-out`.
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Seed of the randomized sample points of `verify`.
    #[serde(default)]
    pub seed: u64,
}

fn default_terms() -> usize {
    64
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            function: Family::quadratic(0.2),
            terms: default_terms(),
            q: None,
            params: ConstructionParams::default(),
            output_dir: None,
            seed: 0,
        }
    }
}

/// Flag overrides applied on top of a config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub family: Option<String>,
    pub param: Option<f64>,
    pub param_im: Option<f64>,
    pub q: Option<f64>,
    pub tspan: Option<f64>,
    pub n: Option<usize>,
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("reading {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
    }

    pub fn apply(mut self, o: &Overrides) -> Result<Self, CliError> {
        if o.family.is_some() || o.param.is_some() || o.param_im.is_some() {
            let current = self.function.parameter();
            let name = o.family.clone().unwrap_or_else(|| self.function.name().to_string());
            let mut obj = serde_json::json!({ "family": name });
            if !matches!(name.as_str(), "identity" | "koebe") {
                obj["c"] = o.param.unwrap_or(current.re).into();
                obj["c_im"] = o.param_im.unwrap_or(current.im).into();
            }
            self.function = serde_json::from_value(obj).map_err(|e| CliError::Usage(format!("--family: {e}")))?;
        }
        if let Some(q) = o.q {
            self.q = Some(q);
        }
        if let Some(t) = o.tspan {
            self.params.tspan = t;
        }
        if let Some(n) = o.n {
            self.params.n = n;
        }
        if o.output_dir.is_some() {
            self.output_dir = o.output_dir.clone();
        }
        if let Some(s) = o.seed {
            self.seed = s;
        }
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.function.validate()?;
        self.params.validate()?;
        if self.terms < 3 {
            return Err(CliError::Usage("terms must be at least 3".into()));
        }
        if let Some(q) = self.q {
            if !(q > 0.0 && q < qcbecker::bounds::Q_MAX) {
                return Err(CliError::Usage(format!("q must lie in (0, 1/3), got {q}")));
            }
        }
        Ok(())
    }

    pub fn schlicht(&self) -> Result<SchlichtFunction<f64>, CliError> {
        Ok(SchlichtFunction::from_family(&self.function, self.terms)?)
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output_dir.clone().unwrap_or_else(|| PathBuf::from("qcbecker-out"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_is_lossless() {
        let c = RunConfig {
            function: Family::Cubic { c: 0.15, c_im: -0.01 },
            q: Some(0.1 + 1e-17),
            seed: 7,
            output_dir: Some("x/y".into()),
            ..RunConfig::default()
        };
        let back: RunConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = serde_json::from_str::<RunConfig>(r#"{"function": {"family": "identity"}, "qq": 0.1}"#);
        assert!(err.is_err());
        let err = serde_json::from_str::<RunConfig>(r#"{"function": {"family": "identity"}, "params": {"m": 1}}"#);
        assert!(err.is_err());
        let ok: RunConfig = serde_json::from_str(r#"{"function": {"family": "quadratic", "c": 0.1}}"#).unwrap();
        assert_eq!(ok.terms, 64);
    }

    #[test]
    fn overrides() {
        let o = Overrides { family: Some("mobius".into()), param: Some(0.1), tspan: Some(3.0), ..Overrides::default() };
        let c = RunConfig::default().apply(&o).unwrap();
        assert_eq!(c.function, Family::mobius(0.1));
        assert_eq!(c.params.tspan, 3.0);
        let id = RunConfig::default().apply(&Overrides { family: Some("identity".into()), ..Overrides::default() }).unwrap();
        assert_eq!(id.function, Family::Identity);
        assert!(RunConfig::default().apply(&Overrides { family: Some("nope".into()), ..Overrides::default() }).is_err());
    }

    #[test]
    fn validation() {
        let mut c = RunConfig::default();
        c.params.tspan = 0.0;
        assert!(c.validate().is_err());
        let c = RunConfig { q: Some(0.4), ..RunConfig::default() };
        assert!(c.validate().is_err());
        let c = RunConfig { function: Family::quadratic(0.7), ..RunConfig::default() };
        assert!(c.validate().is_err());
    }
}
