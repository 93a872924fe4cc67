//! Scenario configuration: the full static description of one deployment,
//! loadable from a TOML file.
//!
//! Powers cross this boundary in dBm and are converted to watts internally.
//! Unknown keys are rejected so typos in physics parameters fail fast.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::{PathLossParams, Position3D};
use crate::schemes::{Regime, ReliabilityTargets, Scheme};
use crate::solvers::SolverOptions;

/// A configuration failure, naming the offending field.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("config error in `{field}`: {message}")]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: &str, message: impl Into<String>) -> Self {
        ConfigError { field: field.into(), message: message.into() }
    }
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0) * 1e-3
}

pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * (w * 1e3).log10()
}

/// One fading entry in the configuration. `RicianLos` uses the UAV-GU LoS
/// probability (a geometry-derived quantity) as the Rician non-centrality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FadingEntry {
    Rayleigh,
    Rician { non_centrality: f64 },
    RicianLos,
}

/// The three fading entries, or a unit-fading override for deterministic
/// (static-channel) runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FadingConfig {
    /// When true, every draw is (1, 1, 1) and the channel is static.
    pub unit: bool,
    /// An explicitly pinned realization (z1, z2, z3) for deterministic
    /// evaluation of one specific fade.
    pub fixed: Option<[f64; 3]>,
    pub ap_uav: FadingEntry,
    pub ap_gu: FadingEntry,
    pub uav_gu: FadingEntry,
}

impl Default for FadingConfig {
    fn default() -> Self {
        FadingConfig {
            unit: false,
            fixed: None,
            ap_uav: FadingEntry::Rician { non_centrality: 1.0 },
            ap_gu: FadingEntry::Rayleigh,
            uav_gu: FadingEntry::RicianLos,
        }
    }
}

/// Solver tuning knobs as they appear in the configuration file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    /// Restrict phase blocklengths to integer symbol counts.
    pub integer_blocklengths: bool,
    /// Optional per-phase peak power cap (dBm); off by default since the
    /// budget constraint is on average power.
    pub peak_power_cap_dbm: Option<f64>,
    /// Linear SNR cap for bracketed inversions.
    pub snr_cap: f64,
    /// Absolute blocklength tolerance for the one-dimensional searches.
    pub blocklength_tol: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection {
            integer_blocklengths: false,
            peak_power_cap_dbm: None,
            snr_cap: crate::fbl::DEFAULT_SNR_CAP,
            blocklength_tol: 1e-4,
        }
    }
}

impl SolverSection {
    pub fn to_options(self) -> SolverOptions {
        SolverOptions {
            integer_blocklengths: self.integer_blocklengths,
            peak_power_cap_w: self.peak_power_cap_dbm.map(dbm_to_watts),
            snr_cap: self.snr_cap,
            blocklength_tol: self.blocklength_tol,
        }
    }
}

/// Full static scenario description.
///
/// The defaults reproduce the reference deployment: AP at (0,0,20), UAV at
/// (100,0,100), GU at (700,0,0), 30 dBm budget, −80 dBm noise, 400-symbol
/// frames, reliability targets 1e-4 (UAV) and 1e-3 (GU).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub ap_pos: Position3D,
    pub uav_pos: Position3D,
    pub gu_pos: Position3D,
    /// Total per-symbol transmit power budget, dBm.
    pub p0_dbm: f64,
    /// Noise power σ², dBm.
    pub noise_dbm: f64,
    /// Frame length M in symbols.
    pub frame_length: f64,
    /// End-to-end UAV error-probability target. Files must state it for FBL
    /// runs (no file-level default); the programmatic default is 1e-4.
    #[serde(default)]
    pub nu1: Option<f64>,
    /// End-to-end GU error-probability target. Files must state it for FBL
    /// runs (no file-level default); the programmatic default is 1e-3.
    #[serde(default)]
    pub nu2: Option<f64>,
    /// Minimum rate coefficient: the GU is guaranteed beta × its standalone
    /// throughput.
    pub beta: f64,
    /// Optional symbol rate; when set, CSV output gains bits-per-second
    /// columns.
    pub symbol_rate_hz: Option<f64>,
    pub scheme: Scheme,
    pub regime: Regime,
    pub path_loss: PathLossParams,
    pub fading: FadingConfig,
    pub solver: SolverSection,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            ap_pos: Position3D::new(0.0, 0.0, 20.0),
            uav_pos: Position3D::new(100.0, 0.0, 100.0),
            gu_pos: Position3D::new(700.0, 0.0, 0.0),
            p0_dbm: 30.0,
            noise_dbm: -80.0,
            frame_length: 400.0,
            nu1: Some(1e-4),
            nu2: Some(1e-3),
            beta: 1.0,
            symbol_rate_hz: None,
            scheme: Scheme::Relay,
            regime: Regime::Ibl,
            path_loss: PathLossParams::default(),
            fading: FadingConfig::default(),
            solver: SolverSection::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(s: &str) -> Result<Self, ConfigError> {
        let cfg: ScenarioConfig = toml::from_str(s)
            .map_err(|e| ConfigError::new("<toml>", e.to_string().trim().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            ConfigError::new("<file>", format!("cannot read {}: {e}", path.display()))
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn p0_watts(&self) -> f64 {
        dbm_to_watts(self.p0_dbm)
    }

    pub fn noise_watts(&self) -> f64 {
        dbm_to_watts(self.noise_dbm)
    }

    /// Reliability targets, required whenever an FBL evaluation is involved.
    /// Errors name the missing or invalid field.
    pub fn fbl_targets(&self) -> Result<ReliabilityTargets, ConfigError> {
        let nu1 = self
            .nu1
            .ok_or_else(|| ConfigError::new("nu1", "required for the fbl regime"))?;
        let nu2 = self
            .nu2
            .ok_or_else(|| ConfigError::new("nu2", "required for the fbl regime"))?;
        ReliabilityTargets::new(nu1, nu2)
            .map_err(|e| ConfigError::new(if e.contains("nu1") { "nu1" } else { "nu2" }, e))
    }

    /// Domain checks on every physical field. FBL-target presence is only
    /// enforced when `self.regime` (or the caller) demands it.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !self.p0_dbm.is_finite() {
            return Err(ConfigError::new("p0_dbm", "must be finite"));
        }
        if !self.noise_dbm.is_finite() {
            return Err(ConfigError::new("noise_dbm", "must be finite"));
        }
        if !(self.frame_length >= 1.0) {
            return Err(ConfigError::new("frame_length", "must be >= 1 symbol"));
        }
        if !(self.beta >= 0.0) {
            return Err(ConfigError::new("beta", "must be >= 0"));
        }
        for (name, nu) in [("nu1", self.nu1), ("nu2", self.nu2)] {
            if let Some(v) = nu {
                if !(v > 0.0 && v < 1.0) {
                    return Err(ConfigError::new(name, "must lie in (0, 1)"));
                }
            }
        }
        if let Some(sr) = self.symbol_rate_hz {
            if !(sr > 0.0) {
                return Err(ConfigError::new("symbol_rate_hz", "must be > 0"));
            }
        }
        if let FadingEntry::Rician { non_centrality } = self.fading.ap_uav {
            if !(non_centrality >= 0.0) {
                return Err(ConfigError::new("fading.ap_uav", "non_centrality must be >= 0"));
            }
        }
        if let FadingEntry::Rician { non_centrality } = self.fading.ap_gu {
            if !(non_centrality >= 0.0) {
                return Err(ConfigError::new("fading.ap_gu", "non_centrality must be >= 0"));
            }
        }
        if let FadingEntry::Rician { non_centrality } = self.fading.uav_gu {
            if !(non_centrality >= 0.0) {
                return Err(ConfigError::new("fading.uav_gu", "non_centrality must be >= 0"));
            }
        }
        self.path_loss
            .validate()
            .map_err(|e| ConfigError::new("path_loss", e.to_string()))?;
        if !(self.solver.snr_cap > 0.0) {
            return Err(ConfigError::new("solver.snr_cap", "must be > 0"));
        }
        if !(self.solver.blocklength_tol > 0.0) {
            return Err(ConfigError::new("solver.blocklength_tol", "must be > 0"));
        }
        if self.regime == Regime::Fbl {
            self.fbl_targets()?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_roundtrips_through_toml() {
        let cfg = ScenarioConfig::default();
        let text = cfg.to_toml();
        let back = ScenarioConfig::from_toml_str(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let e = ScenarioConfig::from_toml_str("transmit_power_dbm = 30.0").unwrap_err();
        assert!(e.message.contains("transmit_power_dbm"), "{e}");
    }

    #[test]
    fn missing_nu2_with_fbl_regime_names_the_field() {
        let e = ScenarioConfig::from_toml_str("regime = \"fbl\"\nnu1 = 1e-4\n").unwrap_err();
        assert_eq!(e.field, "nu2");
        // With both targets stated the same file parses.
        let cfg =
            ScenarioConfig::from_toml_str("regime = \"fbl\"\nnu1 = 1e-4\nnu2 = 1e-3\n").unwrap();
        assert_eq!(cfg.regime, Regime::Fbl);
        // An IBL file may omit the targets entirely.
        let cfg = ScenarioConfig::from_toml_str("regime = \"ibl\"\n").unwrap();
        assert_eq!(cfg.nu1, None);
    }

    #[test]
    fn power_conversions() {
        assert!((dbm_to_watts(30.0) - 1.0).abs() < 1e-12);
        assert!((dbm_to_watts(-80.0) - 1e-11).abs() < 1e-23);
        assert!((watts_to_dbm(1.0) - 30.0).abs() < 1e-12);
    }

    #[test]
    fn partial_toml_overrides_defaults() {
        let cfg = ScenarioConfig::from_toml_str(
            r#"
beta = 0.5
scheme = "noma"
regime = "fbl"
nu1 = 1e-4
nu2 = 1e-3
gu_pos = [400.0, 0.0, 0.0]

[fading]
unit = true
"#,
        )
        .unwrap();
        assert_eq!(cfg.beta, 0.5);
        assert_eq!(cfg.scheme, Scheme::Noma);
        assert_eq!(cfg.gu_pos, Position3D::new(400.0, 0.0, 0.0));
        assert!(cfg.fading.unit);
        // Untouched fields keep their defaults.
        assert_eq!(cfg.p0_dbm, 30.0);
    }

    #[test]
    fn domain_violations_name_fields() {
        let mut cfg = ScenarioConfig::default();
        cfg.beta = -0.2;
        assert_eq!(cfg.validate().unwrap_err().field, "beta");
        let mut cfg = ScenarioConfig::default();
        cfg.nu1 = Some(1.5);
        assert_eq!(cfg.validate().unwrap_err().field, "nu1");
        let mut cfg = ScenarioConfig::default();
        cfg.frame_length = 0.0;
        assert_eq!(cfg.validate().unwrap_err().field, "frame_length");
    }
}
