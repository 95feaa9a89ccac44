use std::path::{Path, PathBuf};

use asd_core::benchmarks::{ReferenceKind, ScenarioName, ScenarioOverrides};
use serde::Deserialize;

/// Noise toggle as written on the command line and in config files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Toggle {
    On,
    Off,
}

/// Run settings read from a TOML file. Keys mirror the `run` flags, plus
/// the scenario overrides that have no flag of their own.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub scenario: Option<String>,
    pub case: Option<u8>,
    #[serde(rename = "ref")]
    pub reference: Option<String>,
    pub dt: Option<f64>,
    pub horizon: Option<f64>,
    pub seed: Option<u64>,
    pub noise: Option<Toggle>,
    pub out: Option<PathBuf>,
    pub a: Option<f64>,
    pub theta_hat: Option<Vec<f64>>,
    pub corrected_coupling: Option<bool>,
    pub alternative_decomposition: Option<bool>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }
}

/// Flag values before merging; `None` means "not given".
#[derive(Debug, Default, Clone)]
pub struct Flags {
    pub scenario: Option<String>,
    pub case: Option<u8>,
    pub reference: Option<String>,
    pub dt: Option<f64>,
    pub horizon: Option<f64>,
    pub seed: Option<u64>,
    pub noise: Option<Toggle>,
    pub out: Option<PathBuf>,
}

/// A fully resolved run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRequest {
    pub scenario: ScenarioName,
    pub case: Option<u8>,
    pub reference: ReferenceKind,
    pub overrides: ScenarioOverrides,
    pub out: PathBuf,
}

impl RunRequest {
    /// Flags win over the config file; the reference defaults to a step.
    pub fn resolve(flags: Flags, file: FileConfig) -> Result<Self, String> {
        let name = flags
            .scenario
            .or(file.scenario)
            .ok_or("no scenario given (use --scenario or a config file)")?;
        let scenario: ScenarioName = name.parse().map_err(|e| format!("{e}"))?;
        let reference = match flags.reference.or(file.reference) {
            Some(r) => r.parse().map_err(|e| format!("{e}"))?,
            None => ReferenceKind::Step,
        };
        let overrides = ScenarioOverrides {
            dt: flags.dt.or(file.dt),
            horizon: flags.horizon.or(file.horizon),
            seed: flags.seed.or(file.seed),
            a: file.a,
            theta_hat: file.theta_hat,
            noise: flags.noise.or(file.noise).map(|t| t == Toggle::On),
            corrected_coupling: file.corrected_coupling,
            alternative_decomposition: file.alternative_decomposition,
        };
        Ok(Self {
            scenario,
            case: flags.case.or(file.case),
            reference,
            overrides,
            out: flags.out.or(file.out).unwrap_or_else(|| PathBuf::from(".")),
        })
    }

    /// `<name>_<ref>[_<case>]`.
    pub fn stem(&self) -> String {
        match self.case {
            Some(c) => format!("{}_{}_{c}", self.scenario, self.reference),
            None => format!("{}_{}", self.scenario, self.reference),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let file: FileConfig = toml::from_str("scenario = \"twocart\"\ncase = 1\nseed = 3\nnoise = \"off\"\n").unwrap();
        let flags = Flags {
            case: Some(2),
            ..Default::default()
        };
        let req = RunRequest::resolve(flags, file).unwrap();
        assert_eq!(req.scenario, ScenarioName::TwoCart);
        assert_eq!(req.case, Some(2));
        assert_eq!(req.overrides.seed, Some(3));
        assert_eq!(req.overrides.noise, Some(false));
        assert_eq!(req.stem(), "twocart_step_2");
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(toml::from_str::<FileConfig>("scenaro = \"rohrs\"").is_err());
    }

    #[test]
    fn missing_scenario_reported() {
        assert!(RunRequest::resolve(Flags::default(), FileConfig::default()).is_err());
    }
}
