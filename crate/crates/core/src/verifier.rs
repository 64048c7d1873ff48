//! Both sides of the modular and norm inequalities for concrete test
//! functions, compared against the certified constants, and a search over
//! parametrized families for the largest ratio.

use serde::{Deserialize, Serialize};

use crate::classify::{classify_with, MembershipVerdict, TestFunction, TestKind, Tri};
use crate::expr::{parse, EvalError, Expr, ParseError};
use crate::ext::ExtReal;
use crate::func::Func;
use crate::integrate::{luxemburg_norm, weighted_modular, ModularResult, ModularStatus, NormResult, NormStatus, QuadConfig};
use crate::search::golden_max;
use crate::weights::{Certificate, Which, WeightTriple};

/// Relative slack on every comparison against a certified constant.
pub const VERIFY_REL_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Holds {
    Yes,
    No,
    /// H = ∞.
    Vacuous,
    /// J = ∞ while H < ∞.
    ViolatedDivergence,
    /// The ratio exceeds C but u is not shown to lie in the certified class.
    OutOfClass,
    Undetermined,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Class {
    #[serde(rename = "R+")]
    RPlus,
    #[serde(rename = "R-")]
    RMinus,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub function: String,
    #[serde(rename = "J")]
    pub j: ModularResult,
    #[serde(rename = "H")]
    pub h: ModularResult,
    /// J/H; `None` when undefined (H = 0 = J, or either side unresolved).
    pub ratio: Option<ExtReal>,
    #[serde(rename = "C_certified")]
    pub c_certified: Option<f64>,
    /// Class the constant applies to.
    pub class: Option<Class>,
    pub holds: Holds,
    pub membership: MembershipVerdict,
    pub diagnostics: Vec<String>,
}

fn constant_for(t: &WeightTriple, cert: &Certificate, which: Which) -> Option<f64> {
    let b = match which {
        Which::B1 => cert.b1.0,
        Which::B2 => cert.b2.0,
    };
    if !(b > crate::weights::TOL_POS) || !cert.l.is_finite() {
        return None;
    }
    let (d, big_d) = (cert.d_m, cert.big_d_m);
    Some(t.m.c_of(cert.l.0.max(0.0) * big_d * big_d / (b * d)))
}

/// The class and constant to test u against: the certificate's branch, or
/// for `both` the branch whose class u is known to belong to.
fn pick_branch(t: &WeightTriple, cert: &Certificate, m: &MembershipVerdict) -> Option<(Class, f64)> {
    let c1 = constant_for(t, cert, Which::B1).map(|c| (Class::RPlus, c));
    let c2 = constant_for(t, cert, Which::B2).map(|c| (Class::RMinus, c));
    match (c1, c2) {
        (Some(a), Some(b)) => {
            let (first, second) = if a.1 <= b.1 { (a, b) } else { (b, a) };
            if member(m, first.0) == Tri::Yes || member(m, second.0) != Tri::Yes {
                Some(first)
            } else {
                Some(second)
            }
        }
        (a, b) => a.or(b),
    }
}

fn member(m: &MembershipVerdict, class: Class) -> Tri {
    m.is_member(class == Class::RPlus)
}

fn omega_times(t: &WeightTriple, u: &Func) -> Func {
    if let Some(e) = u.as_expr() {
        return Func::expr(Expr::Mul(Box::new(t.omega.clone()), Box::new(e.clone())));
    }
    let (w, u) = (t.omega.clone(), u.clone());
    Func::native(format!("omega*({})", u.describe()), move |r| {
        let a = w.eval(r)?;
        if a == 0.0 {
            return Ok(0.0);
        }
        Ok(a * u.eval(r)?)
    })
}

fn is_identically_zero(u: &TestFunction) -> bool {
    u.u.is_zero() && u.uprime.is_zero()
}

/// J = ∫M(ω|u|)e^{-φ}, H = ∫M(|u'|)e^{-φ} and the verdict against the
/// certified constant.
pub fn verify(t: &WeightTriple, cert: &Certificate, u: &TestFunction, cfg: &QuadConfig) -> VerificationReport {
    verify_with(t, cert, u, None, cfg)
}

/// As [`verify`], with `constant` replacing the certified C. Without a
/// certified branch the class is one u is known to belong to.
pub fn verify_with(
    t: &WeightTriple,
    cert: &Certificate,
    u: &TestFunction,
    constant: Option<f64>,
    cfg: &QuadConfig,
) -> VerificationReport {
    let phi = Func::expr(t.phi.clone());
    let mut diagnostics = Vec::new();
    let run = |g: &Func, label: &str, diagnostics: &mut Vec<String>| -> ModularResult {
        match weighted_modular(g, &t.m, Some(&phi), 0.0, f64::INFINITY, cfg) {
            Ok(r) => r,
            Err(e) => {
                diagnostics.push(format!("{label}: {e}"));
                failed()
            }
        }
    };
    let j = run(&omega_times(t, &u.u), "J", &mut diagnostics);
    let h = run(&u.uprime, "H", &mut diagnostics);
    let energy_finite = match h.status {
        ModularStatus::Converged => Some(true),
        ModularStatus::DivergesAtZero | ModularStatus::DivergesAtInfinity => Some(false),
        ModularStatus::ToleranceNotMet => None,
    };
    let membership = classify_with(t, u, energy_finite, cfg);
    let branch = pick_branch(t, cert, &membership);
    let (class, c) = match (branch, constant) {
        (Some((k, c)), over) => (Some(k), Some(over.unwrap_or(c))),
        (None, Some(over)) => {
            let k = [Class::RPlus, Class::RMinus].into_iter().find(|&k| member(&membership, k) == Tri::Yes);
            (k, Some(over))
        }
        (None, None) => (None, None),
    };
    let in_class = class.map(|k| member(&membership, k)) == Some(Tri::Yes);
    let for_ratio = |ratio: f64| -> Holds {
        match c {
            None => Holds::Undetermined,
            Some(c) if ratio <= c * (1.0 + VERIFY_REL_TOL) => Holds::Yes,
            Some(_) if in_class => Holds::No,
            Some(_) => Holds::OutOfClass,
        }
    };
    let (ratio, holds) = if is_identically_zero(u) {
        (None, Holds::Yes)
    } else if h.diverges() {
        (if j.diverges() { None } else { Some(ExtReal(0.0)) }, Holds::Vacuous)
    } else if !h.converged() || j.status == ModularStatus::ToleranceNotMet || !diagnostics.is_empty() {
        diagnostics.push("quadrature did not reach its tolerance".into());
        (None, Holds::Undetermined)
    } else if j.diverges() {
        (Some(ExtReal::INFINITY), Holds::ViolatedDivergence)
    } else if h.ln_value.0 == f64::NEG_INFINITY {
        if j.ln_value.0 == f64::NEG_INFINITY {
            (None, Holds::Yes)
        } else {
            (Some(ExtReal::INFINITY), for_ratio(f64::INFINITY))
        }
    } else {
        let r = (j.ln_value.0 - h.ln_value.0).exp();
        if r.is_nan() {
            diagnostics.push("J/H is not a number".into());
            (None, Holds::Undetermined)
        } else {
            (Some(ExtReal(r)), for_ratio(r))
        }
    };
    if c.is_none() {
        diagnostics.push("no certified constant for this triple".into());
    }
    VerificationReport {
        function: u.name.clone(),
        j,
        h,
        ratio,
        c_certified: c,
        class,
        holds,
        membership,
        diagnostics,
    }
}

fn failed() -> ModularResult {
    ModularResult {
        value: ExtReal(f64::NAN),
        status: ModularStatus::ToleranceNotMet,
        abs_error_estimate: ExtReal(f64::NAN),
        ln_value: ExtReal(f64::NAN),
        evaluations: 0,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub function: String,
    /// ‖ωu‖ in L^M(e^{-φ}dx).
    pub lhs: NormResult,
    /// ‖u'‖ in L^M(e^{-φ}dx).
    pub rhs: NormResult,
    pub ratio: Option<ExtReal>,
    #[serde(rename = "C_tilde")]
    pub c_tilde: Option<f64>,
    pub holds: Holds,
    pub diagnostics: Vec<String>,
}

/// Luxemburg norms of ωu and u' compared against C̃ = C + 1.
pub fn norm_verify(t: &WeightTriple, cert: &Certificate, u: &TestFunction, cfg: &QuadConfig) -> NormReport {
    let phi = Func::expr(t.phi.clone());
    let mut diagnostics = Vec::new();
    let mut norm = |f: &Func, label: &str| -> NormResult {
        match luxemburg_norm(f, &t.m, Some(&phi), 0.0, f64::INFINITY, cfg) {
            Ok(n) => n,
            Err(e) => {
                diagnostics.push(format!("{label}: {e}"));
                NormResult { value: ExtReal(f64::NAN), ln_value: ExtReal(f64::NAN), status: NormStatus::Unresolved }
            }
        }
    };
    let lhs = norm(&omega_times(t, &u.u), "lhs");
    let rhs = norm(&u.uprime, "rhs");
    let c_tilde = cert.c_tilde;
    let (ratio, holds) = if is_identically_zero(u) {
        (Some(ExtReal(0.0)), Holds::Yes)
    } else if rhs.status == NormStatus::Infinite {
        (None, Holds::Vacuous)
    } else if rhs.status == NormStatus::Unresolved || lhs.status == NormStatus::Unresolved {
        (None, Holds::Undetermined)
    } else if lhs.status == NormStatus::Infinite {
        (Some(ExtReal::INFINITY), Holds::ViolatedDivergence)
    } else if rhs.value.0 == 0.0 {
        let holds = if lhs.value.0 == 0.0 { Holds::Yes } else { Holds::Undetermined };
        (None, holds)
    } else {
        let r = lhs.value.0 / rhs.value.0;
        let holds = match c_tilde {
            Some(c) if r <= c * (1.0 + VERIFY_REL_TOL) => Holds::Yes,
            Some(_) => Holds::OutOfClass,
            None => Holds::Undetermined,
        };
        (Some(ExtReal(r)), holds)
    };
    NormReport { function: u.name.clone(), lhs, rhs, ratio, c_tilde, holds, diagnostics }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamRange {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
    /// Search in ln of the parameter.
    #[serde(default)]
    pub log: bool,
}

/// A family of test functions: `template` is a grammar expression in which
/// each `{name}` is replaced by a parameter value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Family {
    pub name: String,
    pub params: Vec<ParamRange>,
    pub template: String,
    #[serde(default = "generic")]
    pub kind: TestKind,
}

fn generic() -> TestKind {
    TestKind::Generic
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FamilyError {
    #[error("parameter {0:?} has an empty range")]
    EmptyRange(String),
    #[error("template placeholder {{{0}}} left unfilled")]
    Unfilled(String),
    #[error("in template: {0}")]
    Parse(#[from] ParseError),
}

impl Family {
    pub fn instantiate(&self, values: &[f64]) -> Result<TestFunction, FamilyError> {
        let mut text = self.template.clone();
        let mut label = Vec::new();
        for (p, v) in self.params.iter().zip(values) {
            text = text.replace(&format!("{{{}}}", p.name), &format!("({v:?})"));
            label.push(format!("{}={v}", p.name));
        }
        if let Some(i) = text.find('{') {
            let rest = &text[i + 1..];
            let name = rest.split('}').next().unwrap_or(rest);
            return Err(FamilyError::Unfilled(name.to_string()));
        }
        let name = format!("{}[{}]", self.name, label.join(","));
        Ok(TestFunction::from_expr(name, parse(&text)?, self.kind))
    }

    /// r^{γ±ε} with a linear cutoff, γ = (p−1−α)/p: the family whose ratio
    /// approaches the classical constant as ε → 0.
    pub fn classical_extremal(p: f64, alpha: f64) -> Family {
        let gamma = (p - 1.0 - alpha) / p;
        let template = if gamma < 0.0 {
            format!("r^(({gamma:?})+{{eps}})*max(0, min(1, 2-r))")
        } else {
            format!("r^(({gamma:?})-{{eps}})*max(0, min(1, r-1))")
        };
        Family {
            name: format!("classical_extremal:p={p},alpha={alpha}"),
            params: vec![ParamRange { name: "eps".into(), lo: 0.02, hi: 0.5, log: true }],
            template,
            kind: TestKind::Generic,
        }
    }

    /// Compact tents max(0, min(r−a, (a+2w)−r)) of half-width w.
    pub fn compact_bumps() -> Family {
        Family {
            name: "compact_bumps".into(),
            params: vec![
                ParamRange { name: "a".into(), lo: 0.05, hi: 20.0, log: true },
                ParamRange { name: "w".into(), lo: 0.05, hi: 5.0, log: true },
            ],
            template: "max(0, min(r-{a}, {a}+2*{w}-r))".into(),
            kind: TestKind::Generic,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SharpnessResult {
    pub family: String,
    pub best_ratio: ExtReal,
    pub best_params: Vec<f64>,
    #[serde(rename = "C")]
    pub c: Option<f64>,
    pub evaluations: usize,
    pub budget_exhausted: bool,
    /// Candidates skipped for lying outside the certified class or failing
    /// to evaluate.
    pub skipped: usize,
    /// Set when some member's ratio exceeds C·(1 + 1e-6).
    pub violation: Option<VerificationReport>,
}

const SCAN_POINTS: usize = 9;
const SWEEPS: usize = 4;

/// Coordinate search over the family parameters maximizing J/H among
/// members of the certified class. `budget` counts candidate functions.
pub fn sharpness_search(
    t: &WeightTriple,
    cert: &Certificate,
    family: &Family,
    budget: usize,
    cfg: &QuadConfig,
) -> Result<SharpnessResult, FamilyError> {
    for p in &family.params {
        if !(p.hi >= p.lo) || (p.log && p.lo <= 0.0) {
            return Err(FamilyError::EmptyRange(p.name.clone()));
        }
    }
    let mut state = Search { t, cert, family, cfg, budget, evaluations: 0, skipped: 0, violation: None };
    let mut x: Vec<f64> = family.params.iter().map(|p| to_coord(p, 0.5 * (from_coord(p, p.lo) + from_coord(p, p.hi)))).collect();
    let mut best = state.score(&x)?;
    for _ in 0..SWEEPS {
        let before = best;
        for k in 0..x.len() {
            let p = &family.params[k];
            let (lo, hi) = (to_coord(p, p.lo), to_coord(p, p.hi));
            if hi == lo {
                continue;
            }
            let step = (hi - lo) / (SCAN_POINTS - 1) as f64;
            let mut best_i = None;
            for i in 0..SCAN_POINTS {
                let mut y = x.clone();
                y[k] = lo + step * i as f64;
                let v = state.score(&y)?;
                if v > best {
                    best = v;
                    best_i = Some(i);
                    x = y;
                }
            }
            let centre = best_i.map_or(x[k], |i| lo + step * i as f64);
            let (a, b) = ((centre - step).max(lo), (centre + step).min(hi));
            let mut err = None;
            let mut g = |c: f64| -> f64 {
                let mut y = x.clone();
                y[k] = c;
                match state.score(&y) {
                    Ok(v) => v,
                    Err(e) => {
                        err = Some(e);
                        f64::NEG_INFINITY
                    }
                }
            };
            let (c, v) = golden_max(&mut g, a, b, 1e-6 * (hi - lo), 40);
            if let Some(e) = err {
                return Err(e);
            }
            if v > best {
                best = v;
                x[k] = c;
            }
        }
        if state.exhausted() || !(best > before * (1.0 + 1e-9)) {
            break;
        }
    }
    let best_params = family.params.iter().zip(&x).map(|(p, &c)| from_coord(p, c)).collect();
    Ok(SharpnessResult {
        family: family.name.clone(),
        best_ratio: ExtReal(if best == f64::NEG_INFINITY { f64::NAN } else { best }),
        best_params,
        c: cert.c,
        evaluations: state.evaluations,
        budget_exhausted: state.exhausted(),
        skipped: state.skipped,
        violation: state.violation,
    })
}

fn to_coord(p: &ParamRange, v: f64) -> f64 {
    if p.log {
        v.ln()
    } else {
        v
    }
}

fn from_coord(p: &ParamRange, c: f64) -> f64 {
    if p.log {
        c.exp()
    } else {
        c
    }
}

struct Search<'a> {
    t: &'a WeightTriple,
    cert: &'a Certificate,
    family: &'a Family,
    cfg: &'a QuadConfig,
    budget: usize,
    evaluations: usize,
    skipped: usize,
    violation: Option<VerificationReport>,
}

impl Search<'_> {
    fn exhausted(&self) -> bool {
        self.evaluations >= self.budget
    }

    /// The member's ratio, or −∞ when it is out of class, unresolved, or the
    /// budget is spent.
    fn score(&mut self, coords: &[f64]) -> Result<f64, FamilyError> {
        if self.exhausted() {
            return Ok(f64::NEG_INFINITY);
        }
        self.evaluations += 1;
        let values: Vec<f64> = self.family.params.iter().zip(coords).map(|(p, &c)| from_coord(p, c)).collect();
        let u = self.family.instantiate(&values)?;
        let rep = verify(self.t, self.cert, &u, self.cfg);
        let in_class = rep.class.is_some_and(|k| member(&rep.membership, k) == Tri::Yes);
        let ratio = rep.ratio.map(|r| r.0).filter(|r| r.is_finite());
        match (in_class, ratio) {
            (true, Some(r)) => {
                if rep.holds == Holds::No && self.violation.is_none() {
                    self.violation = Some(rep);
                }
                Ok(r)
            }
            _ => {
                self.skipped += 1;
                Ok(f64::NEG_INFINITY)
            }
        }
    }
}

/// u(r) = ∫₀^r e^{-τ²}dτ = (√π/2)·erf(r).
pub fn laplace_function() -> TestFunction {
    let u = Func::native("laplace", |r: f64| Ok(0.5 * std::f64::consts::PI.sqrt() * statrs::function::erf::erf(r)));
    let du = Func::native("exp(-r^2)", |r: f64| -> Result<f64, EvalError> { Ok((-r * r).exp()) });
    TestFunction::new("laplace", u, du, TestKind::HardyTransform)
}

/// The stock set: compact trapezoids, powers with two-sided smooth cutoffs,
/// e^{-r}-tailed ramps, the Laplace function and extremal-type members.
pub fn stock_functions() -> Vec<TestFunction> {
    let f = |name: &str, text: &str, kind: TestKind| TestFunction::parse(name, text, kind).expect("stock function parses");
    vec![
        f("tent", "max(0, min(r-1, 3-r))", TestKind::Generic).with_support(1.0, 3.0),
        f("trapezoid", "max(0, min(1, min(r-1, 3-r)))", TestKind::Generic).with_support(1.0, 3.0),
        f("trapezoid_wide", "max(0, min(1, min(4*r-1, (8-r)/4)))", TestKind::Generic).with_support(0.25, 8.0),
        f("tent_small", "max(0, min(r-0.001, 0.003-r))", TestKind::Generic).with_support(1e-3, 3e-3),
        f("power_2_cutoff", "r^2*exp(-r-1/r)", TestKind::HardyTransform),
        f("power_m1_cutoff", "r^(-1)*exp(-r-1/r)", TestKind::HardyTransform),
        f("power_half_cutoff", "r^0.5*exp(-r^2-1/r^2)", TestKind::HardyTransform),
        f("ramp_exp", "min(1, r)*exp(-r)", TestKind::Generic),
        f("rational_ramp_exp", "r/(1+r)*exp(-r)", TestKind::Generic),
        f("square_ramp_exp", "min(1, r)^2*exp(-2*r)", TestKind::Generic),
        laplace_function(),
        f("extremal_cut", "r^(-1.4)*max(0, min(1, 2-r))", TestKind::Generic),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nfunction::NFunction;
    use crate::weights::ProbeWindow;

    fn triple(p: f64, phi: &str, omega: &str) -> WeightTriple {
        WeightTriple::new(NFunction::power(p).unwrap(), parse(phi).unwrap(), parse(omega).unwrap(), ProbeWindow::default())
            .unwrap()
    }

    #[test]
    fn compact_function_on_classical() {
        let t = triple(2.0, "-4*ln(r)", "1/r");
        let cert = t.certify();
        let u = TestFunction::parse("trap", "max(0, min(1, min(r-1, 3-r)))", TestKind::Generic).unwrap();
        let rep = verify(&t, &cert, &u, &QuadConfig::default());
        assert_eq!(rep.holds, Holds::Yes, "{rep:?}");
        assert!(rep.ratio.unwrap().0 <= 4.0 / 9.0);
        let n = norm_verify(&t, &cert, &u, &QuadConfig::default());
        assert_eq!(n.holds, Holds::Yes);
        assert!(n.ratio.unwrap().0 <= 13.0 / 9.0);
    }

    #[test]
    fn laplace_on_gaussian_diverges() {
        let t = triple(2.0, "-r^2/2", "r");
        let cert = t.certify();
        let rep = verify(&t, &cert, &laplace_function(), &QuadConfig::default());
        assert_eq!(rep.holds, Holds::ViolatedDivergence, "{rep:?}");
        assert!(rep.j.diverges() && rep.h.converged());
    }

    #[test]
    fn zero_function() {
        let t = triple(2.0, "-4*ln(r)", "1/r");
        let cert = t.certify();
        let u = TestFunction::parse("zero", "0", TestKind::Generic).unwrap();
        let rep = verify(&t, &cert, &u, &QuadConfig::default());
        assert_eq!((rep.holds, rep.ratio), (Holds::Yes, None));
        assert_eq!(rep.j.value.0, 0.0);
        assert_eq!(norm_verify(&t, &cert, &u, &QuadConfig::default()).ratio, Some(ExtReal(0.0)));
    }

    #[test]
    fn norm_ratio_is_homogeneous() {
        let t = triple(2.0, "-4*ln(r)", "1/r");
        let cert = t.certify();
        let cfg = QuadConfig::default();
        let u = TestFunction::parse("u", "max(0, min(r-1, 3-r))", TestKind::Generic).unwrap();
        let v = TestFunction::parse("2u", "2*max(0, min(r-1, 3-r))", TestKind::Generic).unwrap();
        let a = norm_verify(&t, &cert, &u, &cfg).ratio.unwrap().0;
        let b = norm_verify(&t, &cert, &v, &cfg).ratio.unwrap().0;
        assert!((a - b).abs() <= 1e-9 * a);
    }

    #[test]
    fn single_member_family() {
        let t = triple(2.0, "-4*ln(r)", "1/r");
        let cert = t.certify();
        let cfg = QuadConfig::default();
        let fam = Family { name: "one".into(), params: vec![], template: "max(0, min(r-1, 3-r))".into(), kind: TestKind::Generic };
        let res = sharpness_search(&t, &cert, &fam, 100, &cfg).unwrap();
        let direct = verify(&t, &cert, &fam.instantiate(&[]).unwrap(), &cfg).ratio.unwrap();
        assert_eq!(res.best_ratio, direct);
        assert_eq!(res.evaluations, 1);
    }

    #[test]
    fn unfilled_placeholder() {
        let fam = Family { name: "bad".into(), params: vec![], template: "r^{k}".into(), kind: TestKind::Generic };
        assert_eq!(fam.instantiate(&[]).unwrap_err(), FamilyError::Unfilled("k".into()));
    }

    #[test]
    fn stock_set_has_twelve_members() {
        let s = stock_functions();
        assert_eq!(s.len(), 12);
        let l = &s[10];
        assert!((l.u.eval(1e3).unwrap() - 0.5 * std::f64::consts::PI.sqrt()).abs() < 1e-15);
    }
}
