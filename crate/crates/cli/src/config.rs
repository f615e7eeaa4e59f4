//! Flat `key = value` configuration files.
//!
//! Values are stored in their file units (Hz, W, mW/cm²) so that
//! `serialize(parse(x))` is exact; conversion to the model's SI/angular
//! units happens when specs are requested.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use combcavity_core::model::{AtomEnsembleSpec, CavitySpec, CombSpec};
use combcavity_core::spectrum::OsaSpec;
use combcavity_core::units::{angular, mw_cm2_to_si};
use combcavity_core::Error as ModelError;

struct Key {
    name: &'static str,
    default: f64,
    /// Name used by the model's validation errors.
    model_name: &'static str,
    integer: bool,
}

const fn key(name: &'static str, default: f64, model_name: &'static str) -> Key {
    Key {
        name,
        default,
        model_name,
        integer: false,
    }
}

const KEYS: &[Key] = &[
    key("fsr_hz", 1.93e9, "fsr"),
    key("kappa_hz", 150e3, "kappa"),
    key("finesse", 1.2e4, "finesse"),
    key("epsilon_hz", 18.0, "epsilon"),
    key("mirror_R", 0.9998, "mirror_R"),
    key("mirror_t", 0.0125, "mirror_t"),
    key("g0_hz", 140e3, "g0"),
    key("loss_factor", 0.125, "loss_factor"),
    key("line_spacing_hz", 1.93e9, "line_spacing"),
    key("delta_f0_hz", -220e3, "delta_f0"),
    key("power_per_line_w", 0.26e-6, "power_per_line"),
    key("envelope_fwhm_hz", 2.5e12, "envelope_fwhm"),
    key("envelope_center_offset_hz", 0.0, "envelope_center_offset"),
    Key {
        integer: true,
        ..key("n_half_modes", 400.0, "n_half_modes")
    },
    key("n_atoms", 1.2e5, "n_atoms"),
    key("gamma_hz", 6.066e6, "gamma"),
    key("delta_a1_hz", 495e6, "delta_a1"),
    key("i_sat_mw_cm2", 2.5, "i_sat"),
    key("eta_over_sqrt_n_hz", 60e3, "eta_over_sqrt_n"),
    key("omega_m_hz", 1.7e6, "omega_m"),
    key("mot_offset_gamma", 2.0, "mot_offset"),
    key("osa_resolution_hz", 7.5e9, "resolution_fwhm"),
    key("osa_grid_step_hz", 0.5e9, "grid_step"),
];

fn index_of(name: &str) -> Option<usize> {
    KEYS.iter().position(|k| k.name == name)
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigErrorKind {
    Io(String),
    Syntax,
    UnknownKey,
    DuplicateKey,
    NonNumeric(String),
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub struct ConfigError {
    /// 1-based line in the file, when the error is tied to one.
    pub line: Option<usize>,
    pub key: Option<String>,
    pub kind: ConfigErrorKind,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(line) = self.line {
            write!(f, "line {line}: ")?;
        }
        if let Some(key) = &self.key {
            write!(f, "`{key}`: ")?;
        }
        match &self.kind {
            ConfigErrorKind::Io(e) => write!(f, "cannot read config: {e}"),
            ConfigErrorKind::Syntax => write!(f, "expected `key = value`"),
            ConfigErrorKind::UnknownKey => write!(f, "unknown key"),
            ConfigErrorKind::DuplicateKey => write!(f, "key given twice"),
            ConfigErrorKind::NonNumeric(v) => write!(f, "`{v}` is not a number"),
            ConfigErrorKind::Invalid(reason) => write!(f, "{reason}"),
        }
    }
}

/// Parameters of the mean-field model that have no place in the cavity,
/// comb or atom specs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicsSpec {
    /// Comb drive per root atom (rad/s).
    pub eta_over_sqrt_n: f64,
    /// MOT Rabi frequency (rad/s).
    pub omega_m: f64,
    /// Atom minus MOT beam frequency in units of Gamma.
    pub mot_offset_gamma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    values: Vec<f64>,
    /// Line each key was set on.
    lines: BTreeMap<&'static str, usize>,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            values: KEYS.iter().map(|k| k.default).collect(),
            lines: BTreeMap::new(),
        }
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            line: None,
            key: None,
            kind: ConfigErrorKind::Io(format!("{}: {e}", path.display())),
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let err = |key: Option<&str>, kind| ConfigError {
                line: Some(line),
                key: key.map(str::to_owned),
                kind,
            };
            let (k, v) = content
                .split_once('=')
                .ok_or_else(|| err(None, ConfigErrorKind::Syntax))?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() || v.is_empty() {
                return Err(err(Some(k), ConfigErrorKind::Syntax));
            }
            let idx = index_of(k).ok_or_else(|| err(Some(k), ConfigErrorKind::UnknownKey))?;
            let spec = &KEYS[idx];
            if cfg.lines.insert(spec.name, line).is_some() {
                return Err(err(Some(k), ConfigErrorKind::DuplicateKey));
            }
            let value: f64 = v
                .parse()
                .map_err(|_| err(Some(k), ConfigErrorKind::NonNumeric(v.to_owned())))?;
            if !value.is_finite() {
                return Err(err(
                    Some(k),
                    ConfigErrorKind::Invalid("must be finite".into()),
                ));
            }
            if spec.integer && (value.fract() != 0.0 || value < 0.0 || value > f64::from(u32::MAX))
            {
                return Err(err(
                    Some(k),
                    ConfigErrorKind::Invalid("must be a non-negative integer".into()),
                ));
            }
            cfg.values[idx] = value;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// One `key = value` line per key, in fixed order.
    pub fn serialize(&self) -> String {
        KEYS.iter()
            .zip(&self.values)
            .map(|(k, v)| format!("{} = {}\n", k.name, v))
            .collect()
    }

    /// Key/value snapshot for manifests.
    pub fn snapshot(&self) -> BTreeMap<String, f64> {
        KEYS.iter()
            .zip(&self.values)
            .map(|(k, &v)| (k.name.to_owned(), v))
            .collect()
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        index_of(name).map(|i| self.values[i])
    }

    /// Overrides one key and revalidates.
    pub fn set(&mut self, name: &str, value: f64) -> Result<(), ConfigError> {
        let idx = index_of(name).ok_or_else(|| ConfigError {
            line: None,
            key: Some(name.to_owned()),
            kind: ConfigErrorKind::UnknownKey,
        })?;
        self.values[idx] = value;
        self.lines.remove(KEYS[idx].name);
        self.validate()
    }

    /// Rebuilds a configuration from a [`snapshot`](Self::snapshot).
    pub fn from_snapshot(snapshot: &BTreeMap<String, f64>) -> Result<Self, ConfigError> {
        let mut c = Self::default();
        for (k, &v) in snapshot {
            let idx = index_of(k).ok_or_else(|| ConfigError {
                line: None,
                key: Some(k.clone()),
                kind: ConfigErrorKind::UnknownKey,
            })?;
            c.values[idx] = v;
        }
        c.validate()?;
        Ok(c)
    }

    /// Copy with the given overrides applied.
    pub fn with(&self, overrides: &[(&str, f64)]) -> Result<Self, ConfigError> {
        let mut c = self.clone();
        for &(k, v) in overrides {
            c.set(k, v)?;
        }
        Ok(c)
    }

    fn v(&self, name: &str) -> f64 {
        self.values[index_of(name).expect("known key")]
    }

    pub fn cavity(&self) -> CavitySpec {
        CavitySpec {
            fsr: self.v("fsr_hz"),
            kappa: angular(self.v("kappa_hz")),
            finesse: self.v("finesse"),
            epsilon: self.v("epsilon_hz"),
            mirror_r: self.v("mirror_R"),
            mirror_t: self.v("mirror_t"),
            g0: angular(self.v("g0_hz")),
            loss_factor: self.v("loss_factor"),
        }
    }

    pub fn comb(&self) -> CombSpec {
        CombSpec {
            line_spacing: self.v("line_spacing_hz"),
            delta_f0: self.v("delta_f0_hz"),
            power_per_line: self.v("power_per_line_w"),
            envelope_fwhm: self.v("envelope_fwhm_hz"),
            envelope_center_offset: self.v("envelope_center_offset_hz"),
            n_half_modes: self.v("n_half_modes") as u32,
        }
    }

    pub fn atoms(&self) -> AtomEnsembleSpec {
        AtomEnsembleSpec {
            n_atoms: self.v("n_atoms"),
            gamma: angular(self.v("gamma_hz")),
            delta_a1: angular(self.v("delta_a1_hz")),
            i_sat: mw_cm2_to_si(self.v("i_sat_mw_cm2")),
        }
    }

    pub fn osa(&self) -> OsaSpec {
        OsaSpec {
            resolution_fwhm: self.v("osa_resolution_hz"),
            grid_step: self.v("osa_grid_step_hz"),
        }
    }

    pub fn dynamics(&self) -> DynamicsSpec {
        DynamicsSpec {
            eta_over_sqrt_n: angular(self.v("eta_over_sqrt_n_hz")),
            omega_m: angular(self.v("omega_m_hz")),
            mot_offset_gamma: self.v("mot_offset_gamma"),
        }
    }

    /// Cavity finesse and mirror reflectivity disagree by more than 25 %.
    pub fn finesse_warning(&self) -> Option<String> {
        let c = self.cavity();
        c.finesse_mismatch().map(|rel| {
            format!(
                "finesse {} and mirror_R {} (finesse {:.0}) differ by {:.0} %",
                c.finesse,
                c.mirror_r,
                c.reflectivity_finesse(),
                100.0 * rel
            )
        })
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let checks = [
            self.cavity().validate(),
            self.comb().validate(),
            self.atoms().validate(),
        ];
        for r in checks {
            if let Err(ModelError::InvalidSpec { name, reason }) = r {
                let key = KEYS.iter().find(|k| k.model_name == name).map(|k| k.name);
                return Err(ConfigError {
                    line: key.and_then(|k| self.lines.get(k).copied()),
                    key: Some(key.unwrap_or(name).to_owned()),
                    kind: ConfigErrorKind::Invalid(reason.to_owned()),
                });
            }
        }
        let positive = [
            ("osa_resolution_hz", self.v("osa_resolution_hz")),
            ("osa_grid_step_hz", self.v("osa_grid_step_hz")),
        ];
        for (k, v) in positive {
            if !(v > 0.0) {
                return Err(ConfigError {
                    line: self.lines.get(k).copied(),
                    key: Some(k.to_owned()),
                    kind: ConfigErrorKind::Invalid("must be positive".into()),
                });
            }
        }
        for k in ["eta_over_sqrt_n_hz", "omega_m_hz"] {
            if !(self.v(k) >= 0.0) {
                return Err(ConfigError {
                    line: self.lines.get(k).copied(),
                    key: Some(k.to_owned()),
                    kind: ConfigErrorKind::Invalid("must be non-negative".into()),
                });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let c = Config::parse("").unwrap();
        assert_eq!(c.cavity(), CavitySpec::default());
        assert_eq!(c.comb(), CombSpec::default());
        let a = c.atoms();
        let d = AtomEnsembleSpec::default();
        assert_eq!(
            (a.n_atoms, a.gamma, a.delta_a1),
            (d.n_atoms, d.gamma, d.delta_a1)
        );
        assert!((a.i_sat - d.i_sat).abs() < 1e-12);
    }

    #[test]
    fn epsilon_parses_in_hz() {
        let c = Config::parse("# comment\nepsilon_hz = 18  # trailing\n").unwrap();
        assert_eq!(c.cavity().epsilon, 18.0);
    }

    #[test]
    fn errors_carry_key_and_line() {
        let e = Config::parse("n_atoms = 1\nfsr_hz = -1\n").unwrap_err();
        assert_eq!((e.line, e.key.as_deref()), (Some(2), Some("fsr_hz")));
        assert!(matches!(e.kind, ConfigErrorKind::Invalid(_)));

        let e = Config::parse("\nfsr = 1\n").unwrap_err();
        assert_eq!((e.line, e.kind), (Some(2), ConfigErrorKind::UnknownKey));

        let e = Config::parse("kappa_hz = fast\n").unwrap_err();
        assert!(matches!(e.kind, ConfigErrorKind::NonNumeric(_)));

        let e = Config::parse("kappa_hz 3\n").unwrap_err();
        assert_eq!(e.kind, ConfigErrorKind::Syntax);

        let e = Config::parse("n_atoms = 1\nn_atoms = 2\n").unwrap_err();
        assert_eq!((e.line, e.kind), (Some(2), ConfigErrorKind::DuplicateKey));

        let e = Config::parse("n_half_modes = 2.5\n").unwrap_err();
        assert!(matches!(e.kind, ConfigErrorKind::Invalid(_)));
    }

    #[test]
    fn serialization_round_trips() {
        let c = Config::parse("n_atoms = 3.7e5\nkappa_hz = 240000\ndelta_f0_hz = -0.1\n").unwrap();
        let text = c.serialize();
        let again = Config::parse(&text).unwrap();
        assert_eq!(again.serialize(), text);
        assert_eq!(again.cavity(), c.cavity());
    }

    #[test]
    fn defaults_trigger_finesse_warning() {
        assert!(Config::default().finesse_warning().is_some());
    }
}
