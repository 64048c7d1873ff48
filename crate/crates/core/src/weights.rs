//! Weight triples (M, φ, ω), the pointwise quantities b1(r), b2(r), ω/|φ'|,
//! their extrema, and the certificate of conditions (B1)/(B2).

use serde::{Deserialize, Serialize};

use crate::expr::{EvalError, Expr};
use crate::ext::ExtReal;
use crate::nfunction::NFunction;
use crate::search::{extremum, Extremum, Goal, LogGrid};

/// Strict positivity threshold for b1, b2.
pub const TOL_POS: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeWindow {
    pub r_min: f64,
    pub r_max: f64,
    pub points: usize,
}

impl Default for ProbeWindow {
    fn default() -> Self {
        ProbeWindow { r_min: 1e-8, r_max: 1e8, points: 4001 }
    }
}

impl ProbeWindow {
    pub fn grid(&self) -> LogGrid {
        LogGrid::new(self.r_min, self.r_max, self.points)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Assumption {
    /// φ ∈ C², φ' never vanishes.
    Mu,
    /// ω ≥ 0.
    Omega,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WeightsError {
    #[error("assumption {assumption:?} violated at r = {at:e}: {detail}")]
    Assumption { assumption: Assumption, at: f64, detail: String },
    #[error("φ'(r) = 0 at r = {0:e}")]
    PhiPrimeZero(f64),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Clone, Debug)]
pub struct WeightTriple {
    pub m: NFunction,
    pub phi: Expr,
    pub phi1: Expr,
    pub phi2: Expr,
    pub omega: Expr,
    pub omega1: Expr,
    pub window: ProbeWindow,
    /// Sign of φ' on the probe grid.
    pub phi_sign: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Which {
    B1,
    B2,
}

impl WeightTriple {
    /// Bundle a triple after checking the sign conditions on the probe grid.
    pub fn new(m: NFunction, phi: Expr, omega: Expr, window: ProbeWindow) -> Result<Self, WeightsError> {
        let phi1 = phi.differentiate();
        let phi2 = phi1.differentiate();
        let omega1 = omega.differentiate();
        let grid = window.grid();
        let mut sign = 0.0;
        for r in grid.iter() {
            let d = phi1.eval(r).map_err(|e| WeightsError::Assumption {
                assumption: Assumption::Mu,
                at: r,
                detail: format!("φ' undefined: {e}"),
            })?;
            if d == 0.0 || !d.is_finite() {
                return Err(WeightsError::Assumption { assumption: Assumption::Mu, at: r, detail: format!("φ'(r) = {d}") });
            }
            if sign == 0.0 {
                sign = d.signum();
            } else if d.signum() != sign {
                return Err(WeightsError::Assumption {
                    assumption: Assumption::Mu,
                    at: r,
                    detail: "φ' changes sign".into(),
                });
            }
            let w = omega.eval(r).map_err(|e| WeightsError::Assumption {
                assumption: Assumption::Omega,
                at: r,
                detail: format!("ω undefined: {e}"),
            })?;
            if w < 0.0 {
                return Err(WeightsError::Assumption { assumption: Assumption::Omega, at: r, detail: format!("ω(r) = {w} < 0") });
            }
        }
        Ok(WeightTriple { m, phi, phi1, phi2, omega, omega1, window, phi_sign: sign })
    }

    /// φ''/φ'² at r.
    pub fn phi_ratio(&self, r: f64) -> Result<f64, WeightsError> {
        let p1 = self.phi1.eval(r)?;
        if p1 == 0.0 {
            return Err(WeightsError::PhiPrimeZero(r));
        }
        Ok(self.phi2.eval(r)? / (p1 * p1))
    }

    /// Cross term q(r) = ω'/(ω φ') with its set: `Some((q, in_f))`, or `None`
    /// when r lies in neither F nor G.
    fn cross(&self, r: f64) -> Result<Option<(f64, bool)>, WeightsError> {
        let w = self.omega.eval(r)?;
        if w == 0.0 {
            return Ok(None);
        }
        let p1 = self.phi1.eval(r)?;
        if p1 == 0.0 {
            return Err(WeightsError::PhiPrimeZero(r));
        }
        let w1 = self.omega1.eval(r)?;
        let prod = w1 * p1;
        if prod == 0.0 {
            return Ok(None);
        }
        Ok(Some((w1 / (w * p1), prod > 0.0)))
    }

    pub fn b1_at(&self, r: f64) -> Result<f64, WeightsError> {
        let base = 1.0 + self.phi_ratio(r)?;
        Ok(match self.cross(r)? {
            None => base,
            Some((q, true)) => base - q * self.m.big_d(),
            Some((q, false)) => base - q * self.m.d(),
        })
    }

    pub fn b2_at(&self, r: f64) -> Result<f64, WeightsError> {
        let base = -1.0 - self.phi_ratio(r)?;
        Ok(match self.cross(r)? {
            None => base,
            Some((q, true)) => base + q * self.m.d(),
            Some((q, false)) => base + q * self.m.big_d(),
        })
    }

    pub fn b_at(&self, which: Which, r: f64) -> Result<f64, WeightsError> {
        match which {
            Which::B1 => self.b1_at(r),
            Which::B2 => self.b2_at(r),
        }
    }

    /// ω(r)/|φ'(r)|.
    pub fn l_at(&self, r: f64) -> Result<f64, WeightsError> {
        let p1 = self.phi1.eval(r)?;
        if p1 == 0.0 {
            return Err(WeightsError::PhiPrimeZero(r));
        }
        Ok(self.omega.eval(r)? / p1.abs())
    }

    pub fn infimum_b(&self, which: Which) -> Extremum {
        extremum(&|r| self.b_at(which, r).ok(), &self.window.grid(), Goal::Minimize)
    }

    pub fn sup_l(&self) -> Extremum {
        extremum(&|r| self.l_at(r).ok(), &self.window.grid(), Goal::Maximize)
    }

    /// sup φ''/φ'² over the probe window.
    pub fn sup_phi_ratio(&self) -> Extremum {
        extremum(&|r| self.phi_ratio(r).ok(), &self.window.grid(), Goal::Maximize)
    }

    pub fn certify(&self) -> Certificate {
        let b1 = self.infimum_b(Which::B1);
        let b2 = self.infimum_b(Which::B2);
        let l = self.sup_l();
        Certificate::from_parts(&self.m, b1, b2, l)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    B1,
    B2,
    #[serde(rename = "both")]
    Both,
    #[serde(rename = "neither")]
    Neither,
}

impl Verdict {
    pub fn holds(self) -> bool {
        self != Verdict::Neither
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub b1: ExtReal,
    pub b2: ExtReal,
    #[serde(rename = "L")]
    pub l: ExtReal,
    pub verdict: Verdict,
    /// Condition whose constant is reported.
    pub branch: Option<Which>,
    #[serde(rename = "C")]
    pub c: Option<f64>,
    #[serde(rename = "C_tilde")]
    pub c_tilde: Option<f64>,
    pub d_m: f64,
    #[serde(rename = "D_m")]
    pub big_d_m: f64,
    pub certified: bool,
    pub b1_extremum: Extremum,
    pub b2_extremum: Extremum,
    pub l_extremum: Extremum,
    pub notes: Vec<String>,
}

impl Certificate {
    fn from_parts(m: &NFunction, b1: Extremum, b2: Extremum, l: Extremum) -> Self {
        let (d, big_d) = (m.d(), m.big_d());
        let l_finite = l.value.0 < f64::INFINITY;
        let constant = |b: f64| m.c_of(l.value.0.max(0.0) * big_d * big_d / (b * d));
        let ok1 = b1.value.0 > TOL_POS && l_finite;
        let ok2 = b2.value.0 > TOL_POS && l_finite;
        let c1 = ok1.then(|| constant(b1.value.0));
        let c2 = ok2.then(|| constant(b2.value.0));
        let (verdict, branch, c) = match (c1, c2) {
            (Some(x), Some(y)) => {
                if x <= y {
                    (Verdict::Both, Some(Which::B1), Some(x))
                } else {
                    (Verdict::Both, Some(Which::B2), Some(y))
                }
            }
            (Some(x), None) => (Verdict::B1, Some(Which::B1), Some(x)),
            (None, Some(y)) => (Verdict::B2, Some(Which::B2), Some(y)),
            (None, None) => (Verdict::Neither, None, None),
        };
        let mut notes = Vec::new();
        let mut certified = m.indices.certified;
        if !m.indices.certified {
            notes.push("indices are grid estimates".to_string());
        }
        for (name, e) in [("b1", &b1), ("b2", &b2), ("L", &l)] {
            if !e.singular.is_empty() {
                certified = false;
                notes.push(format!("{name}: {} singular probe(s), first at r = {:e}", e.singular.len(), e.singular[0]));
            }
            if !e.is_sharp(1e-9) {
                certified = false;
                notes.push(format!("{name}: end limit extrapolated with spread {:e}", e.limit_spread));
            }
        }
        notes.push("sign of φ' checked on the probe grid only".to_string());
        Certificate {
            b1: b1.value,
            b2: b2.value,
            l: l.value,
            verdict,
            branch,
            c,
            c_tilde: c.map(|c| c + 1.0),
            d_m: d,
            big_d_m: big_d,
            certified,
            b1_extremum: b1,
            b2_extremum: b2,
            l_extremum: l,
            notes,
        }
    }
}
