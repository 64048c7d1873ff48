//! N-functions, their Simonenko indices, Young conjugates and the comparison
//! function c(λ) = max(λ^d, λ^D).

use serde::{Deserialize, Serialize};

use crate::expr::{parse, EvalError, Expr, ParseError};
use crate::search::{extremum, golden_max, Goal, LogGrid};

/// Indices above this are treated as a failure of the Δ₂ condition.
pub const INDEX_CAP: f64 = 1e3;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NFunctionError {
    #[error("power exponent must exceed 1, got {0}")]
    ExponentTooSmall(f64),
    #[error("index ratio λM'(λ)/M(λ) = {ratio} < 1 at λ = {at:e}; not an N-function")]
    RatioBelowOne { ratio: f64, at: f64 },
    #[error("upper index estimate {estimate} exceeds {cap}; Δ₂ condition fails")]
    Delta2Fails { estimate: f64, cap: f64 },
    #[error("M is not positive at λ = {at:e}")]
    NotPositive { at: f64 },
    #[error("no probe point could be evaluated reliably")]
    NoReliableSamples,
    #[error("conjugate maximization did not bracket at y = {y}; M is not superlinear")]
    ConjugateNoBracket { y: f64 },
    #[error("malformed N-function spec {spec:?}: {reason}")]
    BadSpec { spec: String, reason: String },
    #[error("in N-function expression: {0}")]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// A convex function of one nonnegative argument used as an Orlicz modular.
pub trait Young {
    fn value(&self, x: f64) -> f64;

    /// `ln value(e^s)`, accurate where `value` itself would overflow.
    fn ln_value_exp(&self, s: f64) -> f64 {
        self.value(s.exp()).ln()
    }

    /// `Some((a, q))` when `value(x) = a·x^q` exactly.
    fn homogeneous(&self) -> Option<(f64, f64)> {
        None
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum NKind {
    Power { p: f64 },
    PowerSum { p: f64, q: f64 },
    Custom { expr: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Indices {
    pub d: f64,
    pub big_d: f64,
    pub certified: bool,
    /// Probe points skipped because M was dominated by rounding there.
    pub skipped: usize,
}

#[derive(Clone, Debug)]
pub struct NFunction {
    pub kind: NKind,
    m: Expr,
    m1: Expr,
    pub indices: Indices,
}

fn index_grid() -> LogGrid {
    LogGrid::new(1e-8, 1e8, 2001)
}

/// Grid estimate of d_M = inf λM'/M and D_M = sup λM'/M.
pub fn simonenko_indices(m: &Expr, grid: &LogGrid) -> Result<Indices, NFunctionError> {
    let m1 = m.differentiate();
    let skipped = std::cell::Cell::new(0usize);
    let ratio = |x: f64| -> Option<f64> {
        let v = m.eval(x).ok()?;
        let noise = m.rounding_error(x).ok()?;
        if !v.is_finite() || v.abs() <= 1e6 * noise {
            return None;
        }
        let r = x * m1.eval(x).ok()? / v;
        r.is_finite().then_some(r)
    };
    for x in grid.iter() {
        match m.eval(x) {
            Ok(v) if v <= 0.0 => return Err(NFunctionError::NotPositive { at: x }),
            _ => {}
        }
        if ratio(x).is_none() {
            skipped.set(skipped.get() + 1);
        }
    }
    if skipped.get() == grid.points {
        return Err(NFunctionError::NoReliableSamples);
    }
    let lo = extremum(&ratio, grid, Goal::Minimize);
    let hi = extremum(&ratio, grid, Goal::Maximize);
    if lo.value.0 < 1.0 - 1e-9 {
        let at = match lo.location {
            crate::search::Location::Interior(r) => r,
            crate::search::Location::LimitZero => 0.0,
            crate::search::Location::LimitInfinity => f64::INFINITY,
        };
        return Err(NFunctionError::RatioBelowOne { ratio: lo.value.0, at });
    }
    if !(hi.value.0 <= INDEX_CAP) {
        return Err(NFunctionError::Delta2Fails { estimate: hi.value.0, cap: INDEX_CAP });
    }
    Ok(Indices { d: lo.value.0.max(1.0), big_d: hi.value.0, certified: false, skipped: skipped.get() })
}

impl NFunction {
    pub fn power(p: f64) -> Result<Self, NFunctionError> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(NFunctionError::ExponentTooSmall(p));
        }
        let m = Expr::Pow(Box::new(Expr::Var), p);
        Ok(NFunction {
            kind: NKind::Power { p },
            m1: m.differentiate(),
            m,
            indices: Indices { d: p, big_d: p, certified: true, skipped: 0 },
        })
    }

    /// λ^p + λ^q with analytic indices (min, max).
    pub fn power_sum(p: f64, q: f64) -> Result<Self, NFunctionError> {
        for e in [p, q] {
            if !(e > 1.0) || !e.is_finite() {
                return Err(NFunctionError::ExponentTooSmall(e));
            }
        }
        let m = Expr::Add(Box::new(Expr::Pow(Box::new(Expr::Var), p)), Box::new(Expr::Pow(Box::new(Expr::Var), q)));
        Ok(NFunction {
            kind: NKind::PowerSum { p, q },
            m1: m.differentiate(),
            m,
            indices: Indices { d: p.min(q), big_d: p.max(q), certified: true, skipped: 0 },
        })
    }

    /// Any grammar expression in λ (written `r`); indices are grid estimates.
    pub fn custom(m: Expr) -> Result<Self, NFunctionError> {
        let indices = simonenko_indices(&m, &index_grid())?;
        Ok(NFunction { kind: NKind::Custom { expr: m.to_string() }, m1: m.differentiate(), m, indices })
    }

    /// Catalog strings `power:p=..` and `power_sum:p=..,q=..`, else an expression.
    pub fn from_spec(spec: &str) -> Result<Self, NFunctionError> {
        let spec = spec.trim();
        let bad = |reason: &str| NFunctionError::BadSpec { spec: spec.to_string(), reason: reason.to_string() };
        if let Some((name, params)) = spec.split_once(':') {
            let kv = parse_params(params).map_err(|r| bad(&r))?;
            let get = |k: &str| kv.iter().find(|(n, _)| n == k).map(|(_, v)| *v).ok_or_else(|| bad(&format!("missing {k}")));
            return match name {
                "power" => {
                    if kv.len() != 1 {
                        return Err(bad("expected only p"));
                    }
                    Self::power(get("p")?)
                }
                "power_sum" => {
                    if kv.len() != 2 {
                        return Err(bad("expected p and q"));
                    }
                    Self::power_sum(get("p")?, get("q")?)
                }
                _ => Err(bad("unknown catalog N-function")),
            };
        }
        Self::custom(parse(spec)?)
    }

    pub fn name(&self) -> String {
        match &self.kind {
            NKind::Power { p } => format!("power:p={p}"),
            NKind::PowerSum { p, q } => format!("power_sum:p={p},q={q}"),
            NKind::Custom { expr } => expr.clone(),
        }
    }

    pub fn expr(&self) -> &Expr {
        &self.m
    }

    pub fn d(&self) -> f64 {
        self.indices.d
    }

    pub fn big_d(&self) -> f64 {
        self.indices.big_d
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match self.kind {
            NKind::Power { p } => p * x.powf(p - 1.0),
            NKind::PowerSum { p, q } => p * x.powf(p - 1.0) + q * x.powf(q - 1.0),
            NKind::Custom { .. } => self.m1.eval(x).unwrap_or(f64::NAN),
        }
    }

    /// c(λ) = max(λ^d, λ^D).
    pub fn c_of(&self, lambda: f64) -> f64 {
        lambda.powf(self.d()).max(lambda.powf(self.big_d()))
    }

    pub fn c_inverse(&self, t: f64) -> f64 {
        if t <= 1.0 {
            t.powf(1.0 / self.d())
        } else {
            t.powf(1.0 / self.big_d())
        }
    }

    /// M*(y) = sup_x (xy − M(x)).
    pub fn conjugate_value(&self, y: f64) -> Result<f64, NFunctionError> {
        if y <= 0.0 {
            return Ok(0.0);
        }
        match self.kind {
            NKind::Power { p } => Ok((p - 1.0) * (y / p).powf(p / (p - 1.0))),
            _ => self.numeric_conjugate(y),
        }
    }

    fn numeric_conjugate(&self, y: f64) -> Result<f64, NFunctionError> {
        // The maximizer solves M'(x) = y; bracket it, then golden-section.
        let mut hi = 1.0f64;
        let mut steps = 0;
        while !(self.derivative(hi) >= y) {
            hi *= 2.0;
            steps += 1;
            if steps > 2000 || !hi.is_finite() {
                return Err(NFunctionError::ConjugateNoBracket { y });
            }
        }
        let mut lo = hi / 2.0;
        while self.derivative(lo) > y {
            lo /= 2.0;
            if lo < 1e-300 {
                return Ok(0.0);
            }
        }
        let mut g = |x: f64| x * y - self.value(x);
        let (_, v) = golden_max(&mut g, lo, hi, 1e-15, 400);
        Ok(v.max(0.0))
    }

    /// The conjugate as a Young function in its own right.
    pub fn conjugate(&self) -> Conjugate<'_> {
        Conjugate(self)
    }

    pub fn check_assumption(&self) -> Vec<Diagnostic> {
        check_assumption_m(&self.m, Some(&self.indices))
    }
}

impl Young for NFunction {
    fn value(&self, x: f64) -> f64 {
        match self.kind {
            NKind::Power { p } => x.powf(p),
            NKind::PowerSum { p, q } => x.powf(p) + x.powf(q),
            NKind::Custom { .. } => self.m.eval(x).unwrap_or(f64::NAN),
        }
    }

    fn ln_value_exp(&self, s: f64) -> f64 {
        match self.kind {
            NKind::Power { p } => p * s,
            NKind::PowerSum { p, q } => {
                let (a, b) = (p * s, q * s);
                let m = a.max(b);
                m + ((a - m).exp() + (b - m).exp()).ln()
            }
            NKind::Custom { .. } => self.value(s.exp()).ln(),
        }
    }

    fn homogeneous(&self) -> Option<(f64, f64)> {
        match self.kind {
            NKind::Power { p } => Some((1.0, p)),
            _ => None,
        }
    }
}

pub struct Conjugate<'a>(pub &'a NFunction);

impl Young for Conjugate<'_> {
    fn value(&self, y: f64) -> f64 {
        self.0.conjugate_value(y).unwrap_or(f64::NAN)
    }

    fn ln_value_exp(&self, s: f64) -> f64 {
        match self.0.kind {
            NKind::Power { p } => {
                let q = p / (p - 1.0);
                (p - 1.0).ln() + q * (s - p.ln())
            }
            _ => self.value(s.exp()).ln(),
        }
    }

    fn homogeneous(&self) -> Option<(f64, f64)> {
        match self.0.kind {
            NKind::Power { p } => {
                let q = p / (p - 1.0);
                Some(((p - 1.0) * p.powf(-q), q))
            }
            _ => None,
        }
    }
}

pub fn parse_params(text: &str) -> Result<Vec<(String, f64)>, String> {
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = part.split_once('=').ok_or_else(|| format!("expected key=value, got {part:?}"))?;
        let v: f64 = v.trim().parse().map_err(|_| format!("not a number: {v:?}"))?;
        if !v.is_finite() {
            return Err(format!("not finite: {k}"));
        }
        let k = k.trim().to_string();
        if out.iter().any(|(n, _)| *n == k) {
            return Err(format!("duplicate parameter {k}"));
        }
        out.push((k, v));
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Convexity,
    VanishesAtZero,
    Superlinear,
    IndexBounds,
    Delta2,
    ConjugateDelta2,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub check: Check,
    pub passed: bool,
    pub detail: String,
}

/// Sanity checks of assumption (M) on a log grid. With `indices` absent they
/// are estimated first; an estimation failure shows up as failed checks.
pub fn check_assumption_m(m: &Expr, indices: Option<&Indices>) -> Vec<Diagnostic> {
    let grid = index_grid();
    let m1 = m.differentiate();
    let reliable = |x: f64| -> Option<(f64, f64)> {
        let v = m.eval(x).ok()?;
        let noise = m.rounding_error(x).ok()?;
        let d = m1.eval(x).ok()?;
        (v.is_finite() && d.is_finite() && v.abs() > 1e6 * noise).then_some((v, d))
    };
    let samples: Vec<(f64, f64, f64)> = grid.iter().filter_map(|x| reliable(x).map(|(v, d)| (x, v, d))).collect();
    let mut out = Vec::new();
    let mut push = |check, passed, detail: String| out.push(Diagnostic { check, passed, detail });

    let mut convex = true;
    let mut worst = String::new();
    for w in samples.windows(2) {
        if w[1].2 < w[0].2 - 1e-9 * w[0].2.abs().max(1e-300) {
            convex = false;
            worst = format!("M' decreases between λ = {:e} and {:e}", w[0].0, w[1].0);
            break;
        }
    }
    push(Check::Convexity, convex, if convex { "M' nondecreasing on the grid".into() } else { worst });

    let small: Vec<f64> = (4..=8).map(|k| 10f64.powi(-k)).collect();
    let at_zero = small.iter().map(|&x| m.eval(x).unwrap_or(f64::NAN)).collect::<Vec<_>>();
    let scale = m.eval(1.0).map(f64::abs).unwrap_or(1.0).max(1.0);
    let vanishes = at_zero.windows(2).all(|w| w[1] <= w[0]) && at_zero.last().map_or(false, |v| v.abs() <= 1e-6 * scale);
    push(Check::VanishesAtZero, vanishes, format!("M(1e-8) = {:e}", at_zero[4]));

    let growth: Vec<f64> = (0..=8).map(|k| 10f64.powi(k)).map(|x| m.eval(x).map_or(f64::NAN, |v| v / x)).collect();
    let superlinear = growth.windows(2).all(|w| w[1] > w[0] || w[1] == f64::INFINITY);
    push(Check::Superlinear, superlinear, format!("M(1e8)/1e8 = {:e}", growth[8]));

    let est;
    let idx = match indices {
        Some(i) => Ok(i),
        None => {
            est = simonenko_indices(m, &grid);
            est.as_ref().map_err(|e| e.clone())
        }
    };
    match idx {
        Ok(i) => {
            let tol = 1e-9;
            let ok = samples.iter().all(|&(x, v, d)| {
                let lo = i.d * v / x;
                let hi = i.big_d * v / x;
                d >= lo * (1.0 - tol) && d <= hi * (1.0 + tol)
            });
            push(Check::IndexBounds, ok, format!("d = {}, D = {}", i.d, i.big_d));
            let delta2 = samples.iter().all(|&(x, v, _)| {
                m.eval(2.0 * x).map_or(true, |v2| !v2.is_finite() || v2 <= 2f64.powf(i.big_d) * v * (1.0 + tol))
            });
            push(Check::Delta2, delta2, format!("M(2λ) <= 2^{} M(λ) on the grid", i.big_d));
            push(Check::ConjugateDelta2, i.d > 1.0, format!("d = {}", i.d));
        }
        Err(e) => {
            let delta2_fail = matches!(e, NFunctionError::Delta2Fails { .. });
            push(Check::IndexBounds, delta2_fail, format!("index estimation: {e}"));
            push(Check::Delta2, false, e.to_string());
            push(Check::ConjugateDelta2, false, "indices unavailable".into());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn passed(diags: &[Diagnostic], c: Check) -> bool {
        diags.iter().find(|d| d.check == c).unwrap().passed
    }

    #[test]
    fn power_indices_are_exact() {
        let m = NFunction::power(2.0).unwrap();
        assert_eq!((m.d(), m.big_d()), (2.0, 2.0));
        assert!(m.indices.certified);
        assert!(NFunction::power(1.0).is_err());
    }

    #[test]
    fn cubic_conjugate_at_one() {
        let m = NFunction::power(3.0).unwrap();
        let want = 2.0 / (3.0 * 3f64.sqrt());
        assert!((m.conjugate_value(1.0).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn quadratic_conjugate() {
        let m = NFunction::power(2.0).unwrap();
        assert_eq!(m.conjugate_value(3.0).unwrap(), 2.25);
        assert_eq!(m.conjugate_value(0.0).unwrap(), 0.0);
    }

    #[test]
    fn numeric_conjugate_matches_closed_form() {
        let m = NFunction::custom(parse("r^3").unwrap()).unwrap();
        let want = 2.0 / (3.0 * 3f64.sqrt());
        assert!((m.conjugate_value(1.0).unwrap() - want).abs() < 1e-14);
    }

    #[test]
    fn grid_indices_of_sum() {
        let idx = simonenko_indices(&parse("r^2 + r^3").unwrap(), &index_grid()).unwrap();
        assert!((idx.d - 2.0).abs() < 1e-4 && (idx.big_d - 3.0).abs() < 1e-4, "{idx:?}");
        assert!(!idx.certified);
    }

    #[test]
    fn square_root_is_rejected() {
        let err = simonenko_indices(&parse("r^0.5").unwrap(), &index_grid()).unwrap_err();
        assert!(matches!(err, NFunctionError::RatioBelowOne { .. }), "{err}");
    }

    #[test]
    fn comparison_function() {
        let m = NFunction::power(2.0).unwrap();
        assert_eq!(m.c_of(0.5), 0.25);
        assert_eq!(m.c_of(3.0), 9.0);
        assert_eq!(m.c_inverse(0.25), 0.5);
        let s = NFunction::power_sum(2.0, 3.0).unwrap();
        assert_eq!(s.c_of(0.5), 0.25);
        assert!((s.c_inverse(8.0) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn assumption_checks() {
        let sq = NFunction::power(2.0).unwrap().check_assumption();
        assert!(sq.iter().all(|d| d.passed), "{sq:?}");
        let sum = check_assumption_m(&parse("r^2 + r^3").unwrap(), None);
        assert!(sum.iter().all(|d| d.passed), "{sum:?}");
        let exp = check_assumption_m(&parse("exp(r) - r - 1").unwrap(), None);
        assert!(!passed(&exp, Check::Delta2), "{exp:?}");
        assert!(passed(&exp, Check::Convexity) && passed(&exp, Check::VanishesAtZero), "{exp:?}");
    }

    #[test]
    fn catalog_spec_strings() {
        assert_eq!(NFunction::from_spec("power:p=3").unwrap().kind, NKind::Power { p: 3.0 });
        let s = NFunction::from_spec("power_sum:p=2,q=3").unwrap();
        assert_eq!((s.d(), s.big_d()), (2.0, 3.0));
        assert!(NFunction::from_spec("power:q=3").is_err());
        assert!(NFunction::from_spec("cosh:p=3").is_err());
        assert!(matches!(NFunction::from_spec("r^2").unwrap().kind, NKind::Custom { .. }));
    }
}
