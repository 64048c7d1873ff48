//! Triple and test-function descriptions read from TOML or JSON files.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classify::{TestFunction, TestKind};
use crate::expr::{parse, ParseError};
use crate::func::Func;
use crate::nfunction::{NFunction, NFunctionError};
use crate::verifier::laplace_function;
use crate::weights::{ProbeWindow, WeightTriple, WeightsError};

#[derive(Debug, thiserror::Error)]
pub enum SpecError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed TOML: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("M: {0}")]
    NFunction(#[from] NFunctionError),
    #[error("{field}: {source}")]
    Parse { field: String, source: ParseError },
    #[error(transparent)]
    Weights(#[from] WeightsError),
    #[error("the functions file lists no functions")]
    NoFunctions,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TripleSpec {
    #[serde(rename = "M")]
    pub m: String,
    pub phi: String,
    pub omega: String,
    /// Overrides the configured probe window.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<ProbeWindow>,
}

fn parse_field(field: &str, text: &str) -> Result<crate::expr::Expr, SpecError> {
    parse(text).map_err(|source| SpecError::Parse { field: field.to_string(), source })
}

impl TripleSpec {
    pub fn new(m: &str, phi: &str, omega: &str) -> Self {
        TripleSpec { m: m.into(), phi: phi.into(), omega: omega.into(), window: None }
    }

    pub fn build(&self) -> Result<WeightTriple, SpecError> {
        self.build_in(ProbeWindow::default())
    }

    pub fn build_in(&self, window: ProbeWindow) -> Result<WeightTriple, SpecError> {
        let m = NFunction::from_spec(&self.m)?;
        let phi = parse_field("phi", &self.phi)?;
        let omega = parse_field("omega", &self.omega)?;
        Ok(WeightTriple::new(m, phi, omega, self.window.unwrap_or(window))?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionSpec {
    pub name: Option<String>,
    /// Grammar expression, or `laplace` for ∫₀^r e^{-τ²}dτ.
    pub u: String,
    pub uprime: Option<String>,
    #[serde(default = "generic")]
    pub kind: TestKind,
    pub support: Option<(f64, f64)>,
}

fn generic() -> TestKind {
    TestKind::Generic
}

impl FunctionSpec {
    pub fn build(&self) -> Result<TestFunction, SpecError> {
        if self.u.trim() == "laplace" {
            let mut f = laplace_function();
            if let Some(n) = &self.name {
                f.name = n.clone();
            }
            return Ok(f);
        }
        let name = self.name.clone().unwrap_or_else(|| self.u.clone());
        let u = parse_field("u", &self.u)?;
        let mut f = match &self.uprime {
            Some(d) => TestFunction::new(name, Func::expr(u), Func::expr(parse_field("uprime", d)?), self.kind),
            None => TestFunction::from_expr(name, u, self.kind),
        };
        f.support = self.support;
        Ok(f)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionsFile {
    pub functions: Vec<FunctionSpec>,
}

fn read(path: &Path) -> Result<String, SpecError> {
    std::fs::read_to_string(path).map_err(|source| SpecError::Io { path: path.display().to_string(), source })
}

/// JSON when the extension says so or the text starts with `{`, TOML otherwise.
pub fn parse_document<T: for<'de> Deserialize<'de>>(text: &str, path: Option<&Path>) -> Result<T, SpecError> {
    let json = path.and_then(|p| p.extension()).is_some_and(|e| e == "json") || text.trim_start().starts_with('{');
    if json {
        Ok(serde_json::from_str(text)?)
    } else {
        Ok(toml::from_str(text)?)
    }
}

pub fn load_triple(path: &Path) -> Result<TripleSpec, SpecError> {
    parse_document(&read(path)?, Some(path))
}

pub fn load_functions(path: &Path) -> Result<Vec<FunctionSpec>, SpecError> {
    let f: FunctionsFile = parse_document(&read(path)?, Some(path))?;
    if f.functions.is_empty() {
        return Err(SpecError::NoFunctions);
    }
    Ok(f.functions)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_and_json_agree() {
        let t: TripleSpec = parse_document("M = \"power:p=2\"\nphi = \"-4*ln(r)\"\nomega = \"1/r\"\n", None).unwrap();
        let j: TripleSpec = parse_document(r#"{"M": "power:p=2", "phi": "-4*ln(r)", "omega": "1/r"}"#, None).unwrap();
        assert_eq!(t, j);
        assert_eq!(t.window, None);
        assert!(t.build().is_ok());
    }

    #[test]
    fn bad_expression_names_the_field() {
        let e = TripleSpec::new("power:p=2", "sin(r)", "1").build().unwrap_err();
        assert!(e.to_string().starts_with("phi:"), "{e}");
    }

    #[test]
    fn functions_file() {
        let text = "[[functions]]\nu = \"laplace\"\nkind = \"hardy_transform\"\n\n[[functions]]\nname = \"tent\"\nu = \"max(0, min(r-1, 3-r))\"\nsupport = [1.0, 3.0]\n";
        let f: FunctionsFile = parse_document(text, None).unwrap();
        let built: Vec<_> = f.functions.iter().map(|s| s.build().unwrap()).collect();
        assert_eq!(built[0].name, "laplace");
        assert_eq!(built[1].support, Some((1.0, 3.0)));
        assert_eq!(built[1].kind, TestKind::Generic);
    }
}
