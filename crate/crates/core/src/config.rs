//! Run configuration: every tolerance a report depends on.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bloomkerman::BkConfig;
use crate::integrate::QuadConfig;
use crate::spec_file::{parse_document, SpecError};
use crate::weights::ProbeWindow;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SharpnessConfig {
    /// Candidate functions evaluated per search.
    pub budget: usize,
}

impl Default for SharpnessConfig {
    fn default() -> Self {
        SharpnessConfig { budget: 10_000 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub quad: QuadConfig,
    pub probe: ProbeWindow,
    pub bk: BkConfig,
    pub sharpness: SharpnessConfig,
}

impl Config {
    /// A TOML document, `key = value` lines with dotted keys, or JSON.
    pub fn from_text(text: &str, path: Option<&Path>) -> Result<Self, SpecError> {
        parse_document(text, path)
    }

    pub fn load(path: &Path) -> Result<Self, SpecError> {
        let text = std::fs::read_to_string(path).map_err(|source| SpecError::Io { path: path.display().to_string(), source })?;
        Config::from_text(&text, Some(path))
    }

    /// The configurable values together with the fixed thresholds.
    pub fn ledger(&self) -> Ledger {
        let fixed = [
            ("weights.tol_pos", crate::weights::TOL_POS),
            ("weights.sharp_limit_tol", 1e-9),
            ("nfunction.index_cap", crate::nfunction::INDEX_CAP),
            ("verify.rel_tol", crate::verifier::VERIFY_REL_TOL),
            ("classify.ratio_cut", crate::classify::RATIO_CUT),
            ("classify.bound_cap", crate::classify::BOUND_CAP),
            ("classify.sequence_terms", crate::classify::SEQUENCE_TERMS as f64),
        ];
        Ledger { config: self.clone(), fixed: fixed.iter().map(|(k, v)| (k.to_string(), *v)).collect() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ledger {
    pub config: Config,
    pub fixed: BTreeMap<String, f64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dotted_keys() {
        let c = Config::from_text("quad.rel_tol = 1e-8\nbk.B_range = [1e-3, 1e3]\nsharpness.budget = 50\n", None).unwrap();
        assert_eq!(c.quad.rel_tol, 1e-8);
        assert_eq!(c.quad.panel_budget, QuadConfig::default().panel_budget);
        assert_eq!(c.bk.b_range, (1e-3, 1e3));
        assert_eq!(c.sharpness.budget, 50);
    }

    #[test]
    fn json_and_unknown_keys() {
        let c = Config::from_text(r#"{"probe": {"points": 101}}"#, None).unwrap();
        assert_eq!(c.probe.points, 101);
        assert!(Config::from_text("quad.rel_tol = 1e-8\nbogus = 1\n", None).is_err());
    }
}
