//! The Bloom–Kerman condition specialized to a weight triple, the integral
//! G(ε, y), and the two-factor Muckenhoupt-type constant for L^p.

use serde::{Deserialize, Serialize};

use crate::expr::EvalError;
use crate::ext::ExtReal;
use crate::func::Func;
use crate::integrate::{modular_ln, weighted_modular, IntegrateError, ModularResult, ModularStatus, QuadConfig};
use crate::nfunction::{NKind, Young};
use crate::search::{extremum, Goal, LogGrid};
use crate::weights::WeightTriple;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BkError {
    #[error("the {0} grid is empty")]
    EmptyGrid(&'static str),
    #[error("grid values must be positive and finite")]
    BadGrid,
    #[error("B range [{lo}, {hi}] is invalid")]
    BadRange { lo: f64, hi: f64 },
    #[error("the Muckenhoupt constant needs M = λ^p with p = {p}, got {m}")]
    NotPower { p: f64, m: String },
    #[error(transparent)]
    Integrate(#[from] IntegrateError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BkConfig {
    pub eps_grid: Vec<f64>,
    pub y_grid: Vec<f64>,
    /// B is searched over doublings from the first to the second value.
    #[serde(rename = "B_range")]
    pub b_range: (f64, f64),
}

fn log_points(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    LogGrid::new(lo, hi, n).iter().collect()
}

impl Default for BkConfig {
    fn default() -> Self {
        BkConfig { eps_grid: log_points(1e-2, 1e2, 7), y_grid: log_points(1e-2, 1e2, 7), b_range: (1e-6, 1e6) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BkStatus {
    Satisfied,
    #[serde(rename = "violated_G_infinite")]
    ViolatedGInfinite,
    #[serde(rename = "violated_no_B")]
    ViolatedNoB,
    Undetermined,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub eps: f64,
    pub y: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BkVerdict {
    pub status: BkStatus,
    pub witness: Option<Witness>,
    #[serde(rename = "B_found")]
    pub b_found: Option<f64>,
    /// A grid check is never a proof over all (ε, y).
    pub certified: bool,
    /// B is a single constant for the whole grid.
    #[serde(rename = "B_scope")]
    pub b_scope: String,
    pub grid_points: usize,
    pub notes: Vec<String>,
}

/// G(ε, y) = ∫_y^∞ M(εω(x)) e^{-φ(x)} dx.
pub fn g_of(t: &WeightTriple, eps: f64, y: f64, cfg: &QuadConfig) -> Result<ModularResult, IntegrateError> {
    let w = t.omega.clone();
    let g = Func::native("eps*omega", move |x| Ok(eps * w.eval(x)?));
    weighted_modular(&g, &t.m, Some(&Func::expr(t.phi.clone())), y, f64::INFINITY, cfg)
}

/// ∫_0^y M*(G/(Bε e^{-φ(x)})) e^{-φ(x)} dx, given ln G.
fn left_side(t: &WeightTriple, ln_g: f64, eps: f64, y: f64, b: f64, cfg: &QuadConfig) -> Result<ModularResult, IntegrateError> {
    let conj = t.m.conjugate();
    let shift = ln_g - b.ln() - eps.ln();
    let f = |x: f64| -> Result<f64, EvalError> {
        let phi = t.phi.eval(x)?;
        Ok(conj.ln_value_exp(shift + phi) - phi)
    };
    modular_ln(&f, 0.0, y, cfg)
}

enum PointOutcome {
    /// Smallest exponent k with B = lo·2^k passing.
    Passes(u32),
    NoB,
    Failed,
}

/// Bisect for the smallest passing doubling; the left side decreases in B.
fn smallest_b(t: &WeightTriple, ln_g: f64, eps: f64, y: f64, lo: f64, kmax: u32, cfg: &QuadConfig) -> Result<PointOutcome, IntegrateError> {
    let g = ln_g.exp();
    let test = |k: u32| -> Result<Option<bool>, IntegrateError> {
        let b = lo * 2f64.powi(k as i32);
        let l = left_side(t, ln_g, eps, y, b, cfg)?;
        Ok(match l.status {
            ModularStatus::Converged => Some(l.value.0 <= g),
            ModularStatus::DivergesAtZero | ModularStatus::DivergesAtInfinity => Some(false),
            ModularStatus::ToleranceNotMet => None,
        })
    };
    match test(kmax)? {
        None => return Ok(PointOutcome::Failed),
        Some(false) => return Ok(PointOutcome::NoB),
        Some(true) => {}
    }
    let (mut a, mut b) = (0u32, kmax);
    match test(0)? {
        None => return Ok(PointOutcome::Failed),
        Some(true) => return Ok(PointOutcome::Passes(0)),
        Some(false) => {}
    }
    while b - a > 1 {
        let m = (a + b) / 2;
        match test(m)? {
            None => return Ok(PointOutcome::Failed),
            Some(true) => b = m,
            Some(false) => a = m,
        }
    }
    Ok(PointOutcome::Passes(b))
}

/// Grid check of the Bloom–Kerman condition with one B for all grid points.
pub fn bk_check(t: &WeightTriple, bk: &BkConfig, cfg: &QuadConfig) -> Result<BkVerdict, BkError> {
    if bk.eps_grid.is_empty() {
        return Err(BkError::EmptyGrid("eps"));
    }
    if bk.y_grid.is_empty() {
        return Err(BkError::EmptyGrid("y"));
    }
    if bk.eps_grid.iter().chain(&bk.y_grid).any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(BkError::BadGrid);
    }
    let (lo, hi) = bk.b_range;
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
        return Err(BkError::BadRange { lo, hi });
    }
    let kmax = (hi / lo).log2().floor() as u32;
    let mut verdict = BkVerdict {
        status: BkStatus::Satisfied,
        witness: None,
        b_found: None,
        certified: false,
        b_scope: "global".into(),
        grid_points: bk.eps_grid.len() * bk.y_grid.len(),
        notes: vec![format!("B searched over {lo:e}·2^k, k = 0..={kmax}")],
    };
    let mut gs = Vec::new();
    for &eps in &bk.eps_grid {
        for &y in &bk.y_grid {
            let g = g_of(t, eps, y, cfg)?;
            match g.status {
                ModularStatus::Converged => gs.push((eps, y, g.ln_value.0)),
                ModularStatus::DivergesAtZero | ModularStatus::DivergesAtInfinity => {
                    verdict.status = BkStatus::ViolatedGInfinite;
                    verdict.witness = Some(Witness { eps, y });
                    return Ok(verdict);
                }
                ModularStatus::ToleranceNotMet => {
                    verdict.status = BkStatus::Undetermined;
                    verdict.witness = Some(Witness { eps, y });
                    verdict.notes.push("G did not reach its tolerance".into());
                    return Ok(verdict);
                }
            }
        }
    }
    let mut k_needed = 0u32;
    for &(eps, y, ln_g) in &gs {
        if ln_g == f64::NEG_INFINITY {
            continue;
        }
        match smallest_b(t, ln_g, eps, y, lo, kmax, cfg)? {
            PointOutcome::Passes(k) => k_needed = k_needed.max(k),
            PointOutcome::NoB => {
                verdict.status = BkStatus::ViolatedNoB;
                verdict.witness = Some(Witness { eps, y });
                return Ok(verdict);
            }
            PointOutcome::Failed => {
                verdict.status = BkStatus::Undetermined;
                verdict.witness = Some(Witness { eps, y });
                verdict.notes.push("left-hand integral did not reach its tolerance".into());
                return Ok(verdict);
            }
        }
    }
    verdict.b_found = Some(lo * 2f64.powi(k_needed as i32));
    Ok(verdict)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Muckenhoupt {
    #[serde(rename = "B")]
    pub b: ExtReal,
    /// Where the supremum is attained or approached.
    pub location: crate::search::Location,
    pub certified: bool,
}

fn muckenhoupt_grid() -> LogGrid {
    LogGrid::new(1e-8, 1e8, 161)
}

/// sup_r (∫_r^∞ ω^p e^{-φ}) (∫_0^r e^{φ/(p-1)})^{p-1}.
pub fn muckenhoupt_b(p: f64, t: &WeightTriple, cfg: &QuadConfig) -> Result<Muckenhoupt, BkError> {
    match t.m.kind {
        NKind::Power { p: q } if q == p => {}
        _ => return Err(BkError::NotPower { p, m: t.m.name() }),
    }
    let ln_first = |x: f64| -> Result<f64, EvalError> {
        let w = t.omega.eval(x)?;
        Ok(p * w.abs().ln() - t.phi.eval(x)?)
    };
    let ln_second = |x: f64| -> Result<f64, EvalError> { Ok(t.phi.eval(x)? / (p - 1.0)) };
    let ln_product = |r: f64| -> Result<Option<f64>, IntegrateError> {
        let a = modular_ln(&ln_first, r, f64::INFINITY, cfg)?;
        let b = modular_ln(&ln_second, 0.0, r, cfg)?;
        if a.diverges() || b.diverges() {
            return Ok(Some(f64::INFINITY));
        }
        if !a.converged() || !b.converged() {
            return Ok(None);
        }
        Ok(Some(a.ln_value.0 + (p - 1.0) * b.ln_value.0))
    };
    let grid = muckenhoupt_grid();
    for r in grid.iter() {
        if ln_product(r)? == Some(f64::INFINITY) {
            return Ok(Muckenhoupt { b: ExtReal::INFINITY, location: crate::search::Location::Interior(r), certified: true });
        }
    }
    let f = |r: f64| ln_product(r).ok().flatten().map(f64::exp);
    let e = extremum(&f, &grid, Goal::Maximize);
    let certified = e.singular.is_empty() && e.is_sharp(1e-9);
    Ok(Muckenhoupt { b: e.value, location: e.location, certified })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::nfunction::NFunction;
    use crate::weights::ProbeWindow;

    fn triple(p: f64, phi: &str, omega: &str) -> WeightTriple {
        WeightTriple::new(NFunction::power(p).unwrap(), parse(phi).unwrap(), parse(omega).unwrap(), ProbeWindow::default())
            .unwrap()
    }

    #[test]
    fn g_on_classical_tail() {
        // p = 2, α = −2, ω = 1/r: G(1, 1) = ∫₁^∞ x^{-4} dx = 1/3.
        let t = triple(2.0, "2*ln(r)", "1/r");
        let cfg = QuadConfig::default();
        let g = g_of(&t, 1.0, 1.0, &cfg).unwrap();
        assert!((g.value.0 - 1.0 / 3.0).abs() < 1e-10);
        let g2 = g_of(&t, 0.25, 1.0, &cfg).unwrap();
        assert!((g2.value.0 - g.value.0 / 16.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_g_diverges() {
        let t = triple(2.0, "-r^2/2", "r");
        let cfg = QuadConfig::default();
        assert!(g_of(&t, 0.1, 3.0, &cfg).unwrap().diverges());
        let v = bk_check(&t, &BkConfig::default(), &cfg).unwrap();
        assert_eq!(v.status, BkStatus::ViolatedGInfinite);
        assert_eq!(v.witness, Some(Witness { eps: 1e-2, y: 1e-2 }));
    }

    #[test]
    fn classical_negative_alpha_satisfied() {
        // Exact threshold B ≥ 1/(2(1−α)) = 1/6.
        let t = triple(2.0, "2*ln(r)", "1/r");
        let v = bk_check(&t, &BkConfig::default(), &QuadConfig::default()).unwrap();
        assert_eq!(v.status, BkStatus::Satisfied, "{v:?}");
        let b = v.b_found.unwrap();
        assert!(b >= 1.0 / 6.0 && b < 2.0 / 6.0, "{b}");
    }

    #[test]
    fn empty_grid_is_an_error() {
        let t = triple(2.0, "2*ln(r)", "1/r");
        let bk = BkConfig { eps_grid: vec![], ..BkConfig::default() };
        assert_eq!(bk_check(&t, &bk, &QuadConfig::default()).unwrap_err(), BkError::EmptyGrid("eps"));
    }

    #[test]
    fn muckenhoupt_closed_form() {
        let t = triple(2.0, "r", "1");
        let m = muckenhoupt_b(2.0, &t, &QuadConfig::default()).unwrap();
        assert!((m.b.0 - 1.0).abs() < 1e-9, "{m:?}");
        let g = triple(2.0, "-r^2/2", "r");
        assert_eq!(muckenhoupt_b(2.0, &g, &QuadConfig::default()).unwrap().b, ExtReal::INFINITY);
        let c = triple(2.0, "-0.5*ln(r)", "1/r");
        // ∫_r^∞ x^{-1.5} = 2r^{-1/2}, ∫_0^r x^{-1/2} = 2r^{1/2}.
        let m = muckenhoupt_b(2.0, &c, &QuadConfig::default()).unwrap();
        assert!((m.b.0 - 4.0).abs() < 1e-8, "{m:?}");
        assert!(matches!(muckenhoupt_b(3.0, &c, &QuadConfig::default()), Err(BkError::NotPower { .. })));
    }
}
