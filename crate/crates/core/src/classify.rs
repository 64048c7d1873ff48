//! Membership of test functions in the classes R⁺ and R⁻ through the
//! boundary term h^u(r)·e^{-φ(r)}, and the sufficient criteria built on the
//! quantities A_φ, B_φ, K(r) and L(R).

use serde::{Deserialize, Serialize};

use crate::expr::{self, parse, EvalError, Expr, ParseError};
use crate::ext::ExtReal;
use crate::func::Func;
use crate::integrate::{dual_norm_bounds_ln, IntegrateError, NormResult, NormStatus, QuadConfig};
use crate::nfunction::Young;
use crate::weights::WeightTriple;

/// Which boundary behaviour a test function is known to have.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    /// u(r) → 0 as r → 0 (the set H).
    HardyTransform,
    /// u(r) → 0 as r → ∞ (the set H*).
    ConjugateHardyTransform,
    Generic,
}

#[derive(Clone, Debug)]
pub struct TestFunction {
    pub name: String,
    pub u: Func,
    pub uprime: Func,
    pub kind: TestKind,
    /// Known compact support [a, b] ⊂ (0, ∞).
    pub support: Option<(f64, f64)>,
}

impl TestFunction {
    pub fn new(name: impl Into<String>, u: Func, uprime: Func, kind: TestKind) -> Self {
        TestFunction { name: name.into(), u, uprime, kind, support: None }
    }

    /// A grammar function with its symbolic derivative.
    pub fn from_expr(name: impl Into<String>, u: Expr, kind: TestKind) -> Self {
        let du = u.differentiate();
        TestFunction::new(name, Func::expr(u), Func::expr(du), kind)
    }

    pub fn parse(name: impl Into<String>, text: &str, kind: TestKind) -> Result<Self, ParseError> {
        Ok(TestFunction::from_expr(name, parse(text)?, kind))
    }

    pub fn with_support(mut self, a: f64, b: f64) -> Self {
        self.support = Some((a, b));
        self
    }

    /// r ↦ u(λr).
    pub fn dilate(&self, lambda: f64) -> TestFunction {
        let scale = |f: &Func, factor: f64| -> Func {
            match f {
                Func::Expr(e) => {
                    let inner = expr::mul(Expr::Const(lambda), Expr::Var);
                    Func::expr(expr::mul(Expr::Const(factor), e.compose(&inner)))
                }
                Func::Native { name, f } => {
                    let f = f.clone();
                    Func::native(format!("{factor}*{name}({lambda}*r)"), move |r| Ok(factor * f(lambda * r)?))
                }
            }
        };
        TestFunction {
            name: format!("{}@{lambda}", self.name),
            u: scale(&self.u, 1.0),
            uprime: scale(&self.uprime, lambda),
            kind: self.kind,
            support: self.support.map(|(a, b)| (a / lambda, b / lambda)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tri {
    Yes,
    No,
    Undetermined,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    DirectLimit,
    Prop51,
    Lemma52,
    Lemma54,
    CompactSupport,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaPoint {
    pub n: usize,
    pub s: f64,
    #[serde(rename = "R")]
    pub r: f64,
    pub theta: ExtReal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MembershipVerdict {
    #[serde(rename = "in_Rplus")]
    pub in_rplus: Tri,
    #[serde(rename = "in_Rminus")]
    pub in_rminus: Tri,
    pub theta_trace: Vec<ThetaPoint>,
    pub method: Method,
    /// Estimated lim θ_n when the direct trend settled.
    pub limit: Option<ExtReal>,
}

impl MembershipVerdict {
    fn both(method: Method, theta_trace: Vec<ThetaPoint>) -> Self {
        MembershipVerdict { in_rplus: Tri::Yes, in_rminus: Tri::Yes, theta_trace, method, limit: Some(ExtReal(0.0)) }
    }

    pub fn is_member(&self, plus: bool) -> Tri {
        if plus {
            self.in_rplus
        } else {
            self.in_rminus
        }
    }
}

/// Number of terms in the probe sequences s_n, R_n.
pub const SEQUENCE_TERMS: usize = 41;
const TREND_WINDOW: usize = 8;
pub const RATIO_CUT: f64 = 0.98;

pub fn s_n(n: usize) -> f64 {
    1e-2 * 2f64.powi(-(n as i32))
}

pub fn r_n(n: usize) -> f64 {
    1e2 * 2f64.powi(n as i32)
}

/// ln M(ω(r)|u(r)|) − ln|φ'(r)| − φ(r), or `None` when ω·u vanishes.
fn ln_boundary(t: &WeightTriple, u: &Func, r: f64) -> Result<Option<f64>, EvalError> {
    let (w, v) = (t.omega.eval_ln(r)?, u.eval_ln(r)?);
    if w.sign == 0 || v.sign == 0 {
        return Ok(None);
    }
    let p1 = t.phi1.eval_ln(r)?;
    Ok(Some(t.m.ln_value_exp(w.ln + v.ln) - p1.ln - t.phi.eval_ln(r)?.to_f64()))
}

/// h^u(r) = M(ω(r)|u(r)|)/φ'(r).
pub fn h_value(t: &WeightTriple, u: &TestFunction, r: f64) -> Result<f64, EvalError> {
    let x = t.omega.eval(r)? * u.u.eval(r)?.abs();
    let p1 = t.phi1.eval(r)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    Ok(p1.signum() * (t.m.ln_value_exp(x.ln()) - p1.abs().ln()).exp())
}

/// h^u(r)·e^{-φ(r)}, evaluated through logarithms.
pub fn boundary_term(t: &WeightTriple, u: &TestFunction, r: f64) -> Result<f64, EvalError> {
    Ok(match ln_boundary(t, &u.u, r)? {
        None => 0.0,
        Some(l) => t.phi_sign * l.exp(),
    })
}

/// Eventual behaviour of a sampled sequence.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Trend {
    Limit(f64),
    PlusInfinity,
    MinusInfinity,
    Unclear,
}

/// Read the trend off the last eight entries: geometric contraction of the
/// differences gives a limit (Aitken estimate), monotone non-contracting
/// growth gives divergence.
pub fn trend(values: &[Option<f64>]) -> Trend {
    trend_at_scale(values, 0.0)
}

/// As [`trend`], with differences below `1e-9·max(scale, |values|)`
/// counted as settled.
pub fn trend_at_scale(values: &[Option<f64>], scale: f64) -> Trend {
    if values.len() < TREND_WINDOW {
        return Trend::Unclear;
    }
    let tail: Option<Vec<f64>> = values[values.len() - TREND_WINDOW..].iter().copied().collect();
    let Some(w) = tail else { return Trend::Unclear };
    if w.iter().any(|v| v.is_nan()) {
        return Trend::Unclear;
    }
    if let Some(first_inf) = w.iter().position(|v| v.is_infinite()) {
        let inf = w[first_inf];
        if w[first_inf..].iter().all(|&v| v == inf) {
            return if inf > 0.0 { Trend::PlusInfinity } else { Trend::MinusInfinity };
        }
        return Trend::Unclear;
    }
    let last = w[w.len() - 1];
    let scale = w.iter().fold(scale, |a, v| a.max(v.abs()));
    let d: Vec<f64> = w.windows(2).map(|p| p[1] - p[0]).collect();
    if d.iter().all(|x| x.abs() <= 1e-9 * scale) {
        return Trend::Limit(last);
    }
    let monotone = d.iter().all(|&x| x > 0.0) || d.iter().all(|&x| x < 0.0);
    let ratios: Vec<f64> = d[d.len() - 5..]
        .windows(2)
        .map(|p| if p[0] == 0.0 { f64::INFINITY } else { (p[1] / p[0]).abs() })
        .collect();
    let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
    let min_ratio = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    if max_ratio < RATIO_CUT {
        let rho = ratios[ratios.len() - 1];
        let step = d[d.len() - 1];
        let ahead = if step.signum() == d[d.len() - 2].signum() { step * rho / (1.0 - rho) } else { 0.0 };
        return Trend::Limit(last + ahead);
    }
    if monotone && (min_ratio >= RATIO_CUT || last.abs() > 1e12) {
        return if d[d.len() - 1] > 0.0 { Trend::PlusInfinity } else { Trend::MinusInfinity };
    }
    Trend::Unclear
}

/// θ_n for the sequences λ·s_n, λ·R_n, and the largest boundary term seen.
fn theta_trace(t: &WeightTriple, u: &TestFunction, lambda: f64) -> (Vec<ThetaPoint>, f64) {
    let mut terms = 0.0f64;
    let trace = (0..SEQUENCE_TERMS)
        .map(|n| {
            let (s, r) = (lambda * s_n(n), lambda * r_n(n));
            let theta = match (boundary_term(t, u, r), boundary_term(t, u, s)) {
                (Ok(a), Ok(b)) => {
                    for v in [a, b] {
                        if v.is_finite() {
                            terms = terms.max(v.abs());
                        }
                    }
                    a - b
                }
                _ => f64::NAN,
            };
            ThetaPoint { n, s, r, theta: ExtReal(theta) }
        })
        .collect();
    (trace, terms)
}

fn trace_trend(trace: &[ThetaPoint], terms: f64) -> (Trend, f64) {
    let vals: Vec<Option<f64>> = trace.iter().map(|p| (!p.theta.0.is_nan()).then_some(p.theta.0)).collect();
    let scale = trace.iter().filter(|p| p.theta.0.is_finite()).fold(terms, |a, p| a.max(p.theta.0.abs()));
    (trend_at_scale(&vals, terms), scale)
}

/// Strict sign of the limit: +1, −1, or 0 for a vanishing limit; `None`
/// when the trend is unclear.
fn limit_sign(tr: Trend, scale: f64) -> Option<f64> {
    match tr {
        Trend::PlusInfinity => Some(1.0),
        Trend::MinusInfinity => Some(-1.0),
        Trend::Limit(l) if l.abs() <= 1e-9 * scale || l == 0.0 => Some(0.0),
        Trend::Limit(l) => Some(l.signum()),
        Trend::Unclear => None,
    }
}

fn vanishes_on_probes(u: &TestFunction) -> bool {
    (0..SEQUENCE_TERMS).all(|n| u.u.eval(s_n(n)) == Ok(0.0) && u.u.eval(r_n(n)) == Ok(0.0))
}

fn direct(t: &WeightTriple, u: &TestFunction) -> MembershipVerdict {
    if u.support.is_some_and(|(a, b)| a > 0.0 && b.is_finite()) || vanishes_on_probes(u) {
        return MembershipVerdict::both(Method::CompactSupport, theta_trace(t, u, 1.0).0);
    }
    let (trace, terms) = theta_trace(t, u, 1.0);
    let (tr, scale) = trace_trend(&trace, terms);
    let limit = match tr {
        Trend::Limit(l) => Some(ExtReal(l)),
        Trend::PlusInfinity => Some(ExtReal::INFINITY),
        Trend::MinusInfinity => Some(ExtReal::NEG_INFINITY),
        Trend::Unclear => None,
    };
    let (in_rplus, in_rminus) = match limit_sign(tr, scale) {
        None => (Tri::Undetermined, Tri::Undetermined),
        Some(0.0) => (Tri::Yes, Tri::Yes),
        Some(sign) => {
            // The other class is excluded only if a shifted pair of
            // sequences settles on the same strict sign.
            let (shifted, terms2) = theta_trace(t, u, std::f64::consts::SQRT_2);
            let (tr2, scale2) = trace_trend(&shifted, terms2);
            let other = if limit_sign(tr2, scale2) == Some(sign) { Tri::No } else { Tri::Undetermined };
            if sign > 0.0 {
                (Tri::Yes, other)
            } else {
                (other, Tri::Yes)
            }
        }
    };
    MembershipVerdict { in_rplus, in_rminus, theta_trace: trace, method: Method::DirectLimit, limit }
}

/// Direct trend of θ_n = h^u(R_n)e^{-φ(R_n)} − h^u(s_n)e^{-φ(s_n)} along
/// s_n = 1e-2·2^{-n}, R_n = 1e2·2^n, falling back to the limit criteria
/// when the trend is unclear.
pub fn classify_membership(t: &WeightTriple, u: &TestFunction) -> MembershipVerdict {
    classify_with(t, u, None, &QuadConfig::default())
}

/// As [`classify_membership`]; `energy_finite` (∫M(|u'|)e^{-φ} < ∞, when
/// known) additionally enables the Hardy-transform criteria.
pub fn classify_with(t: &WeightTriple, u: &TestFunction, energy_finite: Option<bool>, cfg: &QuadConfig) -> MembershipVerdict {
    let d = direct(t, u);
    if d.in_rplus != Tri::Undetermined || d.in_rminus != Tri::Undetermined {
        return d;
    }
    let fallback = quick_membership(t, u)
        .or_else(|| energy_finite.and_then(|h| hardy_subset_conclusion(t, u, h, cfg)));
    match fallback {
        Some(mut v) => {
            v.theta_trace = d.theta_trace;
            v
        }
        None => d,
    }
}

/// Which end of (0, ∞) a check looks at.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum End {
    Zero,
    Infinity,
}

fn end_points(end: End) -> impl Iterator<Item = f64> {
    (0..SEQUENCE_TERMS).map(move |n| match end {
        End::Zero => s_n(n),
        End::Infinity => r_n(n),
    })
}

fn seems_bounded(values: &[Option<f64>]) -> bool {
    if values.iter().any(|v| !v.is_some_and(f64::is_finite)) {
        return false;
    }
    let abs: Vec<Option<f64>> = values.iter().map(|v| v.map(f64::abs)).collect();
    match trend(&abs) {
        Trend::Limit(_) => true,
        Trend::PlusInfinity | Trend::MinusInfinity => false,
        Trend::Unclear => non_increasing(&abs.iter().flatten().copied().collect::<Vec<_>>()),
    }
}

fn non_increasing(v: &[f64]) -> bool {
    let tail = &v[v.len().saturating_sub(10)..];
    tail.windows(2).all(|p| p[1] <= p[0] * (1.0 + 1e-6) + f64::MIN_POSITIVE)
}

/// φ' → 0 and u, u·e^{-φ} bounded at the given end.
fn prop51_hypotheses(t: &WeightTriple, u: &TestFunction, end: End) -> bool {
    let dphi: Vec<Option<f64>> = end_points(end).map(|r| t.phi1.eval(r).ok()).collect();
    let scale = dphi.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
    let decays = match trend(&dphi) {
        Trend::Limit(l) => l.abs() <= 1e-6 * scale,
        _ => false,
    };
    if !decays {
        return false;
    }
    let uv: Vec<Option<f64>> = end_points(end).map(|r| u.u.eval(r).ok()).collect();
    let weighted: Vec<Option<f64>> = end_points(end)
        .map(|r| {
            let v = u.u.eval(r).ok()?;
            if v == 0.0 {
                return Some(0.0);
            }
            Some(v.signum() * (v.abs().ln() - t.phi.eval(r).ok()?).exp())
        })
        .collect();
    seems_bounded(&uv) && seems_bounded(&weighted)
}

/// The limit criterion at either end: φ' → 0 there, u and u·e^{-φ} bounded
/// there, L < ∞. At ∞, φ' < 0 gives R⁺ and φ' > 0 gives R⁻; at 0 the
/// roles are swapped.
pub fn quick_membership(t: &WeightTriple, u: &TestFunction) -> Option<MembershipVerdict> {
    if !t.sup_l().value.0.is_finite() {
        return None;
    }
    let neg = t.phi_sign < 0.0;
    let mut v = MembershipVerdict {
        in_rplus: Tri::Undetermined,
        in_rminus: Tri::Undetermined,
        theta_trace: Vec::new(),
        method: Method::Prop51,
        limit: None,
    };
    let mut any = false;
    if prop51_hypotheses(t, u, End::Infinity) {
        any = true;
        if neg {
            v.in_rplus = Tri::Yes;
        } else {
            v.in_rminus = Tri::Yes;
        }
    }
    if prop51_hypotheses(t, u, End::Zero) {
        any = true;
        if neg {
            v.in_rminus = Tri::Yes;
        } else {
            v.in_rplus = Tri::Yes;
        }
    }
    any.then_some(v)
}

/// ln(1/f_φ(x)) with f_φ = c⁻¹(e^{-φ}).
fn ln_inv_f(t: &WeightTriple, x: f64) -> Result<f64, EvalError> {
    let phi = t.phi.eval(x)?;
    let k = if phi >= 0.0 { t.m.d() } else { t.m.big_d() };
    Ok(phi / k)
}

fn shift(n: NormResult, sigma: f64) -> NormResult {
    if n.status != NormStatus::Converged {
        return n;
    }
    let ln = n.ln_value.0 + sigma;
    NormResult { value: ExtReal(ln.exp()), ln_value: ExtReal(ln), status: n.status }
}

fn phi_norm(t: &WeightTriple, a: f64, b: f64, edge: f64, cfg: &QuadConfig) -> Result<(NormResult, NormResult), IntegrateError> {
    let sigma = ln_inv_f(t, edge)?;
    let conj = t.m.conjugate();
    let f = |x: f64| ln_inv_f(t, x).map(|v| v - sigma);
    let (lo, hi) = dual_norm_bounds_ln(&f, &conj, a, b, cfg)?;
    Ok((shift(lo, sigma), shift(hi, sigma)))
}

/// Bracket for A_φ(r), the dual norm of 1/f_φ in L^{M*}(0, r).
pub fn a_phi(t: &WeightTriple, r: f64, cfg: &QuadConfig) -> Result<(NormResult, NormResult), IntegrateError> {
    phi_norm(t, 0.0, r, r, cfg)
}

/// Bracket for B_φ(r), the dual norm of 1/f_φ in L^{M*}(r, ∞).
pub fn b_phi(t: &WeightTriple, r: f64, cfg: &QuadConfig) -> Result<(NormResult, NormResult), IntegrateError> {
    phi_norm(t, r, f64::INFINITY, r, cfg)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundedness {
    BoundedNearZero,
    BoundedNearInfinity,
    Unbounded,
    Undetermined,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundPoint {
    pub r: f64,
    pub value: ExtReal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub verdict: Boundedness,
    pub trace: Vec<BoundPoint>,
    /// First r skipped because the integrand of the norm varies too fast
    /// for double precision there.
    pub resolution_limit: Option<f64>,
}

pub const BOUND_CAP: f64 = 1e6;
const MIN_BOUND_POINTS: usize = 5;
const MAX_LOG_SLOPE: f64 = 1e8;

/// Largest growth exponent of M*.
fn conjugate_exponent(t: &WeightTriple) -> f64 {
    if let Some((_, q)) = t.m.conjugate().homogeneous() {
        return q;
    }
    let d = t.m.d();
    if d > 1.0 + 1e-9 {
        d / (d - 1.0)
    } else {
        1e3
    }
}

fn bound_check(t: &WeightTriple, end: End, cfg: &QuadConfig) -> BoundCheck {
    let q = conjugate_exponent(t);
    let mut trace = Vec::new();
    let mut resolution_limit = None;
    let mut infinite = false;
    for k in 1..=40 {
        let r = match end {
            End::Zero => 2f64.powi(-k),
            End::Infinity => 2f64.powi(k),
        };
        let slope = match (t.phi1.eval(r), ln_inv_f(t, r), t.phi.eval(r)) {
            (Ok(p1), Ok(lf), Ok(phi)) if phi != 0.0 => (r * p1 * q * lf / phi).abs(),
            (Ok(p1), _, _) => (r * p1 * q / t.m.d()).abs(),
            _ => f64::INFINITY,
        };
        if !(slope <= MAX_LOG_SLOPE) {
            resolution_limit = Some(r);
            break;
        }
        let norm = match end {
            End::Zero => a_phi(t, r, cfg),
            End::Infinity => b_phi(t, r, cfg),
        };
        let upper = match norm {
            Ok((_, hi)) => hi,
            Err(_) => break,
        };
        match upper.status {
            NormStatus::Infinite => {
                infinite = true;
                trace.push(BoundPoint { r, value: ExtReal::INFINITY });
                break;
            }
            NormStatus::Unresolved => break,
            NormStatus::Converged => {}
        }
        let value = (|| -> Result<f64, EvalError> {
            let w = t.omega.eval(r)?;
            if w == 0.0 {
                return Ok(0.0);
            }
            let ln = t.m.ln_value_exp(w.ln() + upper.ln_value.0) - t.phi1.eval(r)?.abs().ln() - t.phi.eval(r)?;
            Ok(ln.exp())
        })();
        match value {
            Ok(v) => trace.push(BoundPoint { r, value: ExtReal(v) }),
            Err(_) => break,
        }
    }
    let values: Vec<f64> = trace.iter().map(|p| p.value.0).collect();
    let verdict = if infinite || values.iter().any(|v| *v > BOUND_CAP) {
        Boundedness::Unbounded
    } else if values.len() < MIN_BOUND_POINTS {
        Boundedness::Undetermined
    } else {
        let opt: Vec<Option<f64>> = values.iter().map(|v| Some(*v)).collect();
        match trend(&opt) {
            Trend::PlusInfinity => Boundedness::Unbounded,
            Trend::Limit(l) if l < BOUND_CAP => bounded(end),
            _ if non_increasing(&values) => bounded(end),
            _ => Boundedness::Undetermined,
        }
    };
    BoundCheck { verdict, trace, resolution_limit }
}

fn bounded(end: End) -> Boundedness {
    match end {
        End::Zero => Boundedness::BoundedNearZero,
        End::Infinity => Boundedness::BoundedNearInfinity,
    }
}

/// K(r) = M(ω(r)A_φ(r))e^{-φ(r)}/|φ'(r)| along r = 2^{-k}, with the upper
/// bound for A_φ.
pub fn k_bound_check(t: &WeightTriple, cfg: &QuadConfig) -> BoundCheck {
    bound_check(t, End::Zero, cfg)
}

/// L(R) = M(ω(R)B_φ(R))e^{-φ(R)}/|φ'(R)| along R = 2^k.
pub fn l_bound_check(t: &WeightTriple, cfg: &QuadConfig) -> BoundCheck {
    bound_check(t, End::Infinity, cfg)
}

/// Membership for Hardy transforms (via K) and conjugate Hardy transforms
/// (via L) of finite energy.
pub fn hardy_subset_conclusion(
    t: &WeightTriple,
    u: &TestFunction,
    energy_finite: bool,
    cfg: &QuadConfig,
) -> Option<MembershipVerdict> {
    if !energy_finite {
        return None;
    }
    let pos = t.phi_sign > 0.0;
    let (plus, method) = match u.kind {
        TestKind::HardyTransform => {
            if k_bound_check(t, cfg).verdict != Boundedness::BoundedNearZero {
                return None;
            }
            (pos, Method::Lemma52)
        }
        TestKind::ConjugateHardyTransform => {
            if l_bound_check(t, cfg).verdict != Boundedness::BoundedNearInfinity {
                return None;
            }
            (!pos, Method::Lemma54)
        }
        TestKind::Generic => return None,
    };
    let (in_rplus, in_rminus) = if plus { (Tri::Yes, Tri::Undetermined) } else { (Tri::Undetermined, Tri::Yes) };
    Some(MembershipVerdict { in_rplus, in_rminus, theta_trace: Vec::new(), method, limit: None })
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

    fn classical(p: f64, alpha: f64) -> WeightTriple {
        triple(p, &format!("-({alpha})*ln(r)"), "1/r")
    }

    fn tf(text: &str, kind: TestKind) -> TestFunction {
        TestFunction::parse(text, text, kind).unwrap()
    }

    #[test]
    fn boundary_term_closed_form() {
        let t = classical(2.0, 4.0);
        let u = tf("r", TestKind::Generic);
        for r in [1e-3f64, 0.7, 3.0, 1e4] {
            let want = -r.powi(5) / 4.0;
            assert!((boundary_term(&t, &u, r).unwrap() - want).abs() <= 1e-13 * want.abs());
        }
        assert_eq!(h_value(&t, &tf("0", TestKind::Generic), 2.0).unwrap(), 0.0);
    }

    #[test]
    fn identity_on_classical_is_in_rminus() {
        let t = classical(2.0, 4.0);
        let v = classify_membership(&t, &tf("r", TestKind::Generic));
        assert_eq!(v.in_rminus, Tri::Yes);
        assert_eq!(v.in_rplus, Tri::No);
        assert_eq!(v.method, Method::DirectLimit);
        for p in &v.theta_trace {
            let want = -p.r.powi(5) / 4.0 + p.s.powi(5) / 4.0;
            assert!((p.theta.0 - want).abs() <= 1e-12 * want.abs());
        }
    }

    #[test]
    fn compact_tent_is_in_both() {
        let u = tf("max(0, min(r-1, min(1, 3-r)))", TestKind::Generic);
        for t in [classical(2.0, 4.0), triple(2.0, "-r^2/2", "r")] {
            let v = classify_membership(&t, &u);
            assert_eq!((v.in_rplus, v.in_rminus, v.method), (Tri::Yes, Tri::Yes, Method::CompactSupport));
        }
    }

    #[test]
    fn decaying_representative_is_in_rplus() {
        let t = classical(2.0, 4.0);
        let v = classify_membership(&t, &tf("min(1, r)*exp(-r)", TestKind::ConjugateHardyTransform));
        assert_eq!(v.in_rplus, Tri::Yes);
    }

    #[test]
    fn trend_shapes() {
        let seq = |f: &dyn Fn(f64) -> f64| -> Vec<Option<f64>> { (0..20).map(|n| Some(f(n as f64))).collect() };
        assert_eq!(trend(&seq(&|n| 2f64.powf(n))), Trend::PlusInfinity);
        assert_eq!(trend(&seq(&|n| -n)), Trend::MinusInfinity);
        match trend(&seq(&|n| 1.0 + 0.5f64.powf(n))) {
            Trend::Limit(l) => assert!((l - 1.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
        assert_eq!(trend(&seq(&|n| if n as i64 % 2 == 0 { 1.0 } else { -1.0 })), Trend::Unclear);
        assert_eq!(trend(&[Some(1.0); 4]), Trend::Unclear);
    }

    #[test]
    fn a_phi_power_law() {
        // p = 2, α = 0.5: A_φ(r) ∝ r^{(p−1−α)/p} = r^{1/4}.
        let t = classical(2.0, 0.5);
        let cfg = QuadConfig::default();
        let a1 = a_phi(&t, 1.0, &cfg).unwrap().0.value.0;
        let a2 = a_phi(&t, 16.0, &cfg).unwrap().0.value.0;
        assert!((a2 / a1 - 2.0).abs() < 1e-8, "{}", a2 / a1);
        let (lo, hi) = a_phi(&t, 1.0, &cfg).unwrap();
        assert!((hi.value.0 - 2.0 * lo.value.0).abs() < 1e-15);
        assert_eq!(a_phi(&classical(2.0, 4.0), 1.0, &cfg).unwrap().0.status, NormStatus::Infinite);
        assert_eq!(b_phi(&t, 1.0, &cfg).unwrap().0.status, NormStatus::Infinite);
        let b = b_phi(&classical(2.0, 4.0), 1.0, &cfg).unwrap().0;
        let b16 = b_phi(&classical(2.0, 4.0), 16.0, &cfg).unwrap().0;
        assert!((b16.value.0 / b.value.0 - 16f64.powf(-1.5)).abs() < 1e-8);
    }

    #[test]
    fn k_and_l_checks_on_classical() {
        let cfg = QuadConfig::default();
        assert_eq!(k_bound_check(&classical(2.0, 0.5), &cfg).verdict, Boundedness::BoundedNearZero);
        assert_eq!(k_bound_check(&classical(2.0, 4.0), &cfg).verdict, Boundedness::Unbounded);
        assert_eq!(l_bound_check(&classical(2.0, 4.0), &cfg).verdict, Boundedness::BoundedNearInfinity);
        assert_eq!(l_bound_check(&classical(2.0, 0.5), &cfg).verdict, Boundedness::Unbounded);
    }

    #[test]
    fn gaussian_l_check_tends_to_one() {
        let t = triple(2.0, "-r^2/2", "r");
        let c = l_bound_check(&t, &QuadConfig::default());
        assert_eq!(c.verdict, Boundedness::BoundedNearInfinity);
        assert!(c.resolution_limit.is_some());
        let last = c.trace.last().unwrap().value.0;
        assert!((last - 1.0).abs() < 1e-3, "{last}");
    }

    #[test]
    fn prop51_cases() {
        let u = tf("exp(-r)*r/(1+r)", TestKind::Generic);
        let t = triple(2.0, "-ln(1+r)", "1/(1+r)");
        let v = quick_membership(&t, &u).unwrap();
        assert_eq!(v.in_rplus, Tri::Yes);
        let neg = classical(2.0, -2.0);
        let v = quick_membership(&neg, &tf("r/(1+r)", TestKind::Generic)).unwrap();
        assert_eq!(v.in_rminus, Tri::Yes);
        assert!(quick_membership(&triple(2.0, "r", "1"), &tf("exp(-r)", TestKind::Generic)).is_none());
    }

    #[test]
    fn corollaries() {
        let cfg = QuadConfig::default();
        let h = tf("r/(1+r)", TestKind::HardyTransform);
        let v = hardy_subset_conclusion(&classical(2.0, -2.0), &h, true, &cfg).unwrap();
        assert_eq!((v.in_rplus, v.method), (Tri::Yes, Method::Lemma52));
        let hs = tf("exp(-r)", TestKind::ConjugateHardyTransform);
        let v = hardy_subset_conclusion(&classical(2.0, 4.0), &hs, true, &cfg).unwrap();
        assert_eq!((v.in_rplus, v.method), (Tri::Yes, Method::Lemma54));
        assert!(hardy_subset_conclusion(&classical(2.0, 4.0), &tf("r", TestKind::Generic), true, &cfg).is_none());
        assert!(hardy_subset_conclusion(&classical(2.0, -2.0), &h, false, &cfg).is_none());
    }

    #[test]
    fn dilation_keeps_membership() {
        let t = classical(2.0, 4.0);
        let u = tf("min(1, r)*exp(-r)", TestKind::Generic);
        for lambda in [0.5, 2.0] {
            let d = u.dilate(lambda);
            assert!((d.u.eval(3.0).unwrap() - u.u.eval(3.0 * lambda).unwrap()).abs() < 1e-15);
            assert_eq!(classify_membership(&t, &d).in_rplus, Tri::Yes);
        }
    }
}
