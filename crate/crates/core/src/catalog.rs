//! Named triples with known answers: the classical power weights, the
//! choice ω = |φ'|, logarithmic-type weights and the Gaussian counterexample.

use serde::{Deserialize, Serialize};

use crate::bloomkerman::BkStatus;
use crate::ext::ExtReal;
use crate::nfunction::parse_params;
use crate::search::{golden_max, LogGrid};
use crate::spec_file::{SpecError, TripleSpec};
use crate::weights::{Verdict, WeightTriple};

#[derive(Debug, thiserror::Error)]
pub enum CatalogError {
    #[error("unknown catalog entry {name:?}; available: {}", available.join(", "))]
    Unknown { name: String, available: Vec<String> },
    #[error("entry {name:?}: {reason}")]
    BadParams { name: String, reason: String },
    #[error(transparent)]
    Spec(#[from] SpecError),
}

/// How an expected value is known.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    ClosedForm,
    /// Computed once numerically and frozen.
    Regression,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FactValue {
    Number(ExtReal),
    Verdict(Verdict),
    Bk(BkStatus),
    Text(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fact {
    pub key: String,
    pub value: FactValue,
    pub basis: Basis,
    /// Relative tolerance for numeric facts.
    pub tol: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub name: String,
    pub description: String,
    pub triple: TripleSpec,
    pub expected: Vec<Fact>,
}

impl CatalogEntry {
    pub fn build(&self) -> Result<WeightTriple, SpecError> {
        self.triple.build()
    }

    pub fn fact(&self, key: &str) -> Option<&FactValue> {
        self.expected.iter().find(|f| f.key == key).map(|f| &f.value)
    }

    pub fn number(&self, key: &str) -> Option<f64> {
        match self.fact(key)? {
            FactValue::Number(v) => Some(v.0),
            _ => None,
        }
    }
}

const TEMPLATES: [&str; 4] = ["classical", "omega_phi_prime", "log_weights", "gaussian_counterexample"];

/// Default instances of every template.
pub fn list() -> Vec<String> {
    vec![
        "classical:p=2,alpha=4".into(),
        "omega_phi_prime:p=2,alpha=4".into(),
        "log_weights:alpha=1,beta=1,p=1.5".into(),
        "gaussian_counterexample:p=2".into(),
    ]
}

/// The instances used for sweeps over the whole catalog.
pub fn sweep_entries() -> Vec<String> {
    let mut out = Vec::new();
    for p in [2.0, 3.0] {
        for alpha in [-2.0, -1.0, 0.5, 4.0, 6.0] {
            out.push(format!("classical:p={p},alpha={alpha}"));
        }
    }
    for (p, alpha) in [(2.0, 4.0), (3.0, -1.0), (2.0, 0.5)] {
        out.push(format!("omega_phi_prime:p={p},alpha={alpha}"));
    }
    out.push("log_weights:alpha=1,beta=1,p=1.5".into());
    out.push("log_weights:alpha=2,beta=0.5,p=2".into());
    out.push("gaussian_counterexample:p=2".into());
    out
}

/// A triple with ω = |φ'| and the exact sup of φ''/φ'² over (0, ∞).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhiCase {
    pub triple: TripleSpec,
    pub sup_ratio: f64,
}

fn phi_case(m: &str, phi: &str, sup_ratio: f64) -> PhiCase {
    let d = crate::expr::parse(phi).expect("catalog φ parses").differentiate();
    PhiCase { triple: TripleSpec::new(m, phi, &format!("abs({d})")), sup_ratio }
}

/// Twenty φ's drawn from the catalog families, paired with ω = |φ'|.
pub fn phi_cases() -> Vec<PhiCase> {
    let mut out = Vec::new();
    for alpha in [-3.0, -1.0, -0.5, 0.5, 1.5, 2.5, 4.0, 6.0] {
        out.push(phi_case("power:p=2", &format!("-({alpha:?})*ln(r)"), 1.0 / alpha));
    }
    for alpha in [-1.0, 1.5, 2.5, 4.0] {
        out.push(phi_case("power:p=3", &format!("-({alpha:?})*ln(r)"), 1.0 / alpha));
    }
    out.push(phi_case("power:p=2", "-r^2/2", 0.0));
    out.push(phi_case("power:p=2", "r", 0.0));
    out.push(phi_case("power:p=2", "r^2", f64::INFINITY));
    out.push(phi_case("power:p=2", "r^0.5", 0.0));
    out.push(phi_case("power_sum:p=2,q=3", "-ln(r)", 1.0));
    out.push(phi_case("power_sum:p=2,q=3", "-4*ln(r)", 0.25));
    out.push(phi_case("power:p=1.5", &log_phi(1.0, 1.0), 1.0));
    out.push(phi_case("power:p=2", &log_phi(2.0, 0.5), 0.5));
    out
}

fn num(key: &str, v: f64, basis: Basis, tol: f64) -> Fact {
    Fact { key: key.into(), value: FactValue::Number(ExtReal(v)), basis, tol }
}

fn closed(key: &str, v: f64) -> Fact {
    num(key, v, Basis::ClosedForm, 1e-8)
}

fn fact(key: &str, value: FactValue) -> Fact {
    Fact { key: key.into(), value, basis: Basis::ClosedForm, tol: 0.0 }
}

struct Params<'a> {
    name: &'a str,
    values: Vec<(String, f64)>,
}

impl Params<'_> {
    fn get(&self, key: &str) -> Result<f64, CatalogError> {
        self.values
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| *v)
            .ok_or_else(|| CatalogError::BadParams { name: self.name.into(), reason: format!("missing {key}") })
    }

    fn get_or(&self, key: &str, default: f64) -> f64 {
        self.get(key).unwrap_or(default)
    }

    fn bad(&self, reason: impl Into<String>) -> CatalogError {
        CatalogError::BadParams { name: self.name.into(), reason: reason.into() }
    }
}

/// c(λ) = λ^p for the power exponent p.
fn power_constant(p: f64, l: f64, b: f64) -> f64 {
    (l * p / b).powf(p)
}

pub fn load(name: &str) -> Result<CatalogEntry, CatalogError> {
    let (template, rest) = name.split_once(':').unwrap_or((name, ""));
    let values = parse_params(rest).map_err(|reason| CatalogError::BadParams { name: name.into(), reason })?;
    let params = Params { name, values };
    match template {
        "classical" => classical(name, &params),
        "omega_phi_prime" => omega_phi_prime(name, &params),
        "log_weights" => log_weights(name, &params),
        "gaussian_counterexample" => gaussian(name, &params),
        _ => Err(CatalogError::Unknown { name: name.into(), available: TEMPLATES.iter().map(|s| s.to_string()).collect() }),
    }
}

fn check_p(params: &Params, p: f64) -> Result<(), CatalogError> {
    if p > 1.0 {
        Ok(())
    } else {
        Err(params.bad("p must exceed 1"))
    }
}

fn classical(name: &str, params: &Params) -> Result<CatalogEntry, CatalogError> {
    let p = params.get("p")?;
    let alpha = params.get("alpha")?;
    check_p(params, p)?;
    if alpha == 0.0 {
        return Err(params.bad("alpha = 0 makes φ' vanish"));
    }
    let b1 = (alpha + 1.0 - p) / alpha;
    let b2 = -b1;
    let l = 1.0 / alpha.abs();
    let mut expected = vec![closed("b1", b1), closed("b2", b2), closed("L", l)];
    let verdict = if b1 > 0.0 {
        Verdict::B1
    } else if b2 > 0.0 {
        Verdict::B2
    } else {
        Verdict::Neither
    };
    expected.push(fact("verdict", FactValue::Verdict(verdict)));
    if verdict != Verdict::Neither {
        expected.push(closed("C", (p / (alpha - p + 1.0).abs()).powf(p)));
    }
    if alpha < 0.0 {
        expected.push(fact("bk", FactValue::Bk(BkStatus::Satisfied)));
    } else if alpha > p - 1.0 {
        expected.push(fact("bk", FactValue::Bk(BkStatus::ViolatedGInfinite)));
    }
    Ok(CatalogEntry {
        name: name.into(),
        description: format!("M = λ^{p}, φ = {}, ω = 1/r", log_phi_text(alpha)),
        triple: TripleSpec::new(&format!("power:p={p}"), &format!("-({alpha:?})*ln(r)"), "1/r"),
        expected,
    })
}

fn omega_phi_prime(name: &str, params: &Params) -> Result<CatalogEntry, CatalogError> {
    let p = params.get("p")?;
    let alpha = params.get("alpha")?;
    check_p(params, p)?;
    if alpha == 0.0 {
        return Err(params.bad("alpha = 0 makes φ' vanish"));
    }
    // φ''/φ'² ≡ 1/α.
    let s = 1.0 / alpha;
    let b1 = 1.0 - (p - 1.0) * s;
    let b2 = -b1;
    let mut expected = vec![closed("b1", b1), closed("b2", b2), closed("L", 1.0), closed("sup_phi_ratio", s)];
    let verdict = if b1 > 0.0 {
        Verdict::B1
    } else if b2 > 0.0 {
        Verdict::B2
    } else {
        Verdict::Neither
    };
    expected.push(fact("verdict", FactValue::Verdict(verdict)));
    if b1 > 0.0 {
        expected.push(closed("C", power_constant(p, 1.0, b1)));
    } else if b2 > 0.0 {
        expected.push(closed("C", power_constant(p, 1.0, b2)));
    }
    Ok(CatalogEntry {
        name: name.into(),
        description: format!("M = λ^{p}, φ = {}, ω = |φ'|", log_phi_text(alpha)),
        triple: TripleSpec::new(&format!("power:p={p}"), &format!("-({alpha:?})*ln(r)"), &format!("{:?}/r", alpha.abs())),
        expected,
    })
}

fn log_phi(alpha: f64, beta: f64) -> String {
    format!("-({alpha:?})*ln(r)-({beta:?})*ln(ln(1+r))")
}

/// |φ'| for φ = −α ln r − β ln ln(1+r).
fn log_omega(alpha: f64, beta: f64) -> String {
    format!("({alpha:?})/r+({beta:?})/(ln(1+r)*(1+r))")
}

/// φ''/φ'² for φ = −α ln r − β ln ln(1+r), from r·φ' and r²·φ'' so that
/// it stays finite for r far outside the usual window.
fn log_ratio(alpha: f64, beta: f64, r: f64) -> f64 {
    let l = r.ln_1p();
    let q = r / (1.0 + r);
    let d1 = -alpha - beta * q / l;
    let d2 = alpha + beta * q * q / l * (1.0 + 1.0 / l);
    d2 / (d1 * d1)
}

fn log_phi_text(alpha: f64) -> String {
    if alpha < 0.0 {
        format!("{}·ln r", -alpha)
    } else {
        format!("−{alpha}·ln r")
    }
}

/// sup_{r>0} φ''/φ'²: a scan of r ∈ [1e-300, 1e300] refined by golden
/// section, together with the end limits 1/(α+β) at 0 and 1/α at ∞.
pub fn s_alpha_beta(alpha: f64, beta: f64) -> f64 {
    let grid = LogGrid::new(1e-300, 1e300, 6001);
    let mut best = (0, f64::NEG_INFINITY);
    for (i, r) in grid.iter().enumerate() {
        let v = log_ratio(alpha, beta, r);
        if v > best.1 {
            best = (i, v);
        }
    }
    let lo = grid.point(best.0.saturating_sub(1)).ln();
    let hi = grid.point((best.0 + 1).min(grid.points - 1)).ln();
    let (_, refined) = golden_max(&mut |t| log_ratio(alpha, beta, t.exp()), lo, hi, 1e-12, 200);
    best.1.max(refined).max(1.0 / alpha).max(1.0 / (alpha + beta))
}

const LOG_TAIL_TOL: f64 = 2e-3;

/// Frozen values of s_{α,β} for the catalog's parameter pairs.
const S_FIXTURES: [(f64, f64, f64); 2] = [(1.0, 1.0, 1.0), (2.0, 0.5, 0.5)];

fn log_weights(name: &str, params: &Params) -> Result<CatalogEntry, CatalogError> {
    let alpha = params.get("alpha")?;
    let beta = params.get("beta")?;
    let p = params.get_or("p", 1.5);
    check_p(params, p)?;
    if !(alpha > 0.0 && beta > 0.0) {
        return Err(params.bad("alpha and beta must be positive"));
    }
    let (s, basis) = match S_FIXTURES.iter().find(|f| f.0 == alpha && f.1 == beta) {
        Some(f) => (f.2, Basis::Regression),
        None => (s_alpha_beta(alpha, beta), Basis::Regression),
    };
    let threshold = 1.0 + 1.0 / s;
    let b1 = 1.0 - (p - 1.0) * s;
    let mut expected = vec![
        num("s_alpha_beta", s, basis, 1e-8),
        num("D_threshold", threshold, basis, 1e-8),
        closed("L", 1.0),
        // The infimum of b1 is a limit at ∞ approached like 1/ln r; the generic
        // pipeline extrapolates it to about 1e-3.
        num("b1", b1, basis, LOG_TAIL_TOL),
    ];
    if p < threshold {
        expected.push(fact("verdict", FactValue::Verdict(Verdict::B1)));
        expected.push(num("C", power_constant(p, 1.0, b1), basis, LOG_TAIL_TOL * 2.0 * p));
    }
    Ok(CatalogEntry {
        name: name.into(),
        description: format!("M = λ^{p}, μ = r^{alpha}·ln(1+r)^{beta} dr, ω = |φ'|"),
        triple: TripleSpec::new(&format!("power:p={p}"), &log_phi(alpha, beta), &log_omega(alpha, beta)),
        expected,
    })
}

fn gaussian(name: &str, params: &Params) -> Result<CatalogEntry, CatalogError> {
    let p = params.get_or("p", 2.0);
    check_p(params, p)?;
    // b1(r) = 1 + (p−1)/r², b2(r) = −1 − (p−1)/r², ω/|φ'| ≡ 1.
    let expected = vec![
        closed("b1", 1.0),
        num("b2", f64::NEG_INFINITY, Basis::ClosedForm, 0.0),
        closed("L", 1.0),
        fact("verdict", FactValue::Verdict(Verdict::B1)),
        closed("C", power_constant(p, 1.0, 1.0)),
        fact("bk", FactValue::Bk(BkStatus::ViolatedGInfinite)),
        fact("excluded", FactValue::Text("laplace".into())),
    ];
    Ok(CatalogEntry {
        name: name.into(),
        description: format!("M = λ^{p}, φ = −r²/2, ω = r"),
        triple: TripleSpec::new(&format!("power:p={p}"), "-r^2/2", "r"),
        expected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classical_entry() {
        let e = load("classical:p=2,alpha=4").unwrap();
        assert!((e.number("C").unwrap() - 4.0 / 9.0).abs() < 1e-15);
        assert_eq!(e.fact("verdict"), Some(&FactValue::Verdict(Verdict::B1)));
    }

    #[test]
    fn unknown_entry_lists_templates() {
        let msg = load("nope").unwrap_err().to_string();
        for t in TEMPLATES {
            assert!(msg.contains(t), "{msg}");
        }
    }

    #[test]
    fn s_reduces_to_classical() {
        assert!((s_alpha_beta(1.0, 0.0) - 1.0).abs() < 1e-12);
        assert!((s_alpha_beta(4.0, 0.0) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn s_fixtures_reproduce() {
        for (a, b, s) in S_FIXTURES {
            assert!((s_alpha_beta(a, b) - s).abs() <= 1e-8 * s, "{a} {b}: {}", s_alpha_beta(a, b));
        }
    }

    #[test]
    fn s_shrinks_with_alpha() {
        let v: Vec<f64> = [1.0, 4.0, 16.0, 64.0].iter().map(|&a| s_alpha_beta(a, 1.0)).collect();
        assert!(v.windows(2).all(|w| w[1] < w[0]), "{v:?}");
        assert!(v[3] < 0.02);
    }
}
