use std::collections::BTreeMap;

use orlicz_hardy::bloomkerman::{BkVerdict, Muckenhoupt};
use orlicz_hardy::catalog::CatalogEntry;
use orlicz_hardy::classify::{BoundCheck, MembershipVerdict};
use orlicz_hardy::config::Ledger;
use orlicz_hardy::spec_file::{FunctionSpec, TripleSpec};
use orlicz_hardy::verifier::{NormReport, SharpnessResult, VerificationReport};
use orlicz_hardy::weights::Certificate;
use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize)]
pub struct Tool {
    pub name: &'static str,
    pub version: &'static str,
}

impl Default for Tool {
    fn default() -> Self {
        Tool { name: "orlicz-hardy", version: env!("CARGO_PKG_VERSION") }
    }
}

#[derive(Debug, Default, Serialize)]
pub struct Input {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub triple: Option<TripleSpec>,
    /// Test functions as given; `stock` when the built-in set is used.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub functions: Option<FunctionsEcho>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, serde_json::Value>,
}

#[derive(Debug, Serialize)]
#[serde(untagged)]
pub enum FunctionsEcho {
    Listed(Vec<FunctionSpec>),
    Named(String),
}

#[derive(Debug, Serialize)]
pub struct Classification {
    pub function: String,
    #[serde(flatten)]
    pub verdict: MembershipVerdict,
}

#[derive(Debug, Serialize)]
pub struct Timing {
    pub seconds: f64,
}

#[derive(Debug, Serialize)]
pub struct CatalogItem {
    pub name: String,
    pub description: String,
}

#[derive(Debug, Default, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub tool: Tool,
    pub command: String,
    pub input: Input,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Certificate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_check: Option<BoundCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l_check: Option<BoundCheck>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub reports: Vec<VerificationReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub norm_reports: Vec<NormReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub classification: Vec<Classification>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bk: Option<BkVerdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub muckenhoupt: Option<Muckenhoupt>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sharpness: Option<SharpnessResult>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub catalog: Vec<CatalogItem>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub entry: Option<CatalogEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ledger: Option<Ledger>,
    pub exit_code: i32,
    pub diagnostics: Vec<String>,
}

impl RunReport {
    pub fn new(command: &str) -> Self {
        RunReport { schema_version: SCHEMA_VERSION, command: command.into(), ..Default::default() }
    }
}
