//! Weighted modular integrals ∫ M(|g(x)|) e^{-φ(x)} dx over subintervals of
//! (0, ∞), Luxemburg norms and the dual-norm bracket.
//!
//! Integration runs in t = ln x: a core region is refined adaptively, and
//! each infinite end is covered by tail pieces of doubling width until they
//! become negligible or keep growing.

use serde::{Deserialize, Serialize};

use crate::expr::EvalError;
use crate::ext::ExtReal;
use crate::func::Func;
use crate::nfunction::Young;
use crate::quad::{integrate_log, ln_add, PieceOutcome};

/// Centre of the core region in t; kept off dyadic points so that panel
/// nodes never land exactly on x = 1, 2, 3, ....
const CORE_CENTER: f64 = 0.0731;
const CORE_HALF_WIDTH: f64 = 8.0;
/// Tails are truncated before exp(t) leaves the f64 range.
const T_CAP: f64 = 700.0;
/// Tails must extend at least this far in |t| before a truncation.
const MIN_TAIL_REACH: f64 = 18.5;
const MAX_PANEL: f64 = 2.0;
/// Absolute error allowed in one tail piece, as a fraction of tol·total.
const TAIL_SHARE: f64 = 1e-3;
const GRADED_LEVELS: i32 = 30;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadConfig {
    pub rel_tol: f64,
    pub panel_budget: usize,
    pub divergence_factor: f64,
    pub divergence_doublings: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig { rel_tol: 1e-10, panel_budget: 1_000_000, divergence_factor: 1.5, divergence_doublings: 8 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModularStatus {
    Converged,
    DivergesAtZero,
    DivergesAtInfinity,
    ToleranceNotMet,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModularResult {
    /// Finite exactly when `status` is `Converged`.
    pub value: ExtReal,
    pub status: ModularStatus,
    pub abs_error_estimate: ExtReal,
    /// ln of the integral accumulated so far, meaningful also past f64 range.
    pub ln_value: ExtReal,
    pub evaluations: usize,
}

impl ModularResult {
    pub fn converged(&self) -> bool {
        self.status == ModularStatus::Converged
    }

    pub fn diverges(&self) -> bool {
        matches!(self.status, ModularStatus::DivergesAtZero | ModularStatus::DivergesAtInfinity)
    }

    fn finish(ln_value: f64, ln_error: f64, status: ModularStatus, evaluations: usize) -> Self {
        let value = match status {
            ModularStatus::Converged => ExtReal(ln_value.exp()),
            _ => ExtReal::INFINITY,
        };
        ModularResult {
            value,
            status,
            abs_error_estimate: ExtReal(if status == ModularStatus::Converged { ln_error.exp() } else { f64::INFINITY }),
            ln_value: ExtReal(ln_value),
            evaluations,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IntegrateError {
    #[error(transparent)]
    Domain(#[from] EvalError),
    #[error("invalid interval ({a}, {b})")]
    BadInterval { a: f64, b: f64 },
    #[error("norm equation could not be bracketed")]
    NoBracket,
}

fn unit_breaks(lo: f64, hi: f64) -> Vec<f64> {
    let n = ((hi - lo) / MAX_PANEL).ceil().max(1.0) as usize;
    (0..=n).map(|k| if k == n { hi } else { lo + (hi - lo) * k as f64 / n as f64 }).collect()
}

fn graded(mut breaks: Vec<f64>, left: bool, right: bool) -> Vec<f64> {
    let n = breaks.len();
    if left && n >= 2 {
        let (a, w) = (breaks[0], breaks[1] - breaks[0]);
        breaks.extend((1..=GRADED_LEVELS).map(|k| a + w * 2f64.powi(-k)));
    }
    if right && n >= 2 {
        let (b, w) = (breaks[n - 1], breaks[n - 1] - breaks[n - 2]);
        breaks.extend((1..=GRADED_LEVELS).map(|k| b - w * 2f64.powi(-k)));
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    breaks
}

/// ∫_a^b exp(ln_f(x)) dx, where `ln_f` returns ln of a nonnegative integrand
/// (`-inf` where it vanishes).
pub fn modular_ln(
    ln_f: &dyn Fn(f64) -> Result<f64, EvalError>,
    a: f64,
    b: f64,
    cfg: &QuadConfig,
) -> Result<ModularResult, IntegrateError> {
    if !(a >= 0.0 && b > a) || a.is_infinite() {
        return Err(IntegrateError::BadInterval { a, b });
    }
    let mut budget = cfg.panel_budget;
    let mut l = |t: f64| -> Result<f64, EvalError> {
        let v = ln_f(t.exp())?;
        Ok(if v.is_nan() { f64::INFINITY } else { v + t })
    };
    let (lower_tail, upper_tail) = (a == 0.0, b == f64::INFINITY);
    let (ta, tb) = (if lower_tail { f64::NEG_INFINITY } else { a.ln() }, if upper_tail { f64::INFINITY } else { b.ln() });
    let (c0, c1) = match (lower_tail, upper_tail) {
        (true, true) => (CORE_CENTER - CORE_HALF_WIDTH, CORE_CENTER + CORE_HALF_WIDTH),
        (true, false) => (tb - 2.0 * CORE_HALF_WIDTH, tb),
        (false, true) => (ta, ta + 2.0 * CORE_HALF_WIDTH),
        (false, false) => (ta, tb),
    };
    let side_status = |upper: bool| if upper { ModularStatus::DivergesAtInfinity } else { ModularStatus::DivergesAtZero };
    let evals = |budget: usize| cfg.panel_budget - budget;

    let core_breaks = graded(unit_breaks(c0, c1), !lower_tail, !upper_tail);
    let core = integrate_log(&mut l, &core_breaks, cfg.rel_tol, f64::NEG_INFINITY, &mut budget)?;
    match core.outcome {
        PieceOutcome::Infinite => {
            return Ok(ModularResult::finish(f64::INFINITY, f64::INFINITY, side_status(upper_tail), evals(budget)))
        }
        PieceOutcome::BudgetExhausted => {
            return Ok(ModularResult::finish(f64::NAN, f64::NAN, ModularStatus::ToleranceNotMet, evals(budget)))
        }
        PieceOutcome::Converged => {}
    }
    let mut total = core.ln_value;
    let mut err = core.ln_error;
    let ln_tol = cfg.rel_tol.ln();
    let ln_growth = cfg.divergence_factor.ln();

    for (enabled, upper) in [(upper_tail, true), (lower_tail, false)] {
        if !enabled {
            continue;
        }
        let mut s = if upper { c1 } else { c0 };
        let mut width = 1.0;
        let mut small_run = 0;
        let mut growth_run = 0;
        let mut prev = f64::NAN;
        let mut done = false;
        while !done {
            let next = if upper { (s + width).min(T_CAP) } else { (s - width).max(-T_CAP) };
            let at_cap = next.abs() >= T_CAP;
            let breaks = if upper { unit_breaks(s, next) } else { unit_breaks(next, s) };
            let piece = integrate_log(&mut l, &breaks, cfg.rel_tol, total + ln_tol + TAIL_SHARE.ln(), &mut budget)?;
            match piece.outcome {
                PieceOutcome::Infinite => {
                    return Ok(ModularResult::finish(f64::INFINITY, f64::INFINITY, side_status(upper), evals(budget)))
                }
                PieceOutcome::BudgetExhausted => {
                    return Ok(ModularResult::finish(total, err, ModularStatus::ToleranceNotMet, evals(budget)))
                }
                PieceOutcome::Converged => {}
            }
            total = ln_add(total, piece.ln_value);
            err = ln_add(err, piece.ln_error);
            if prev.is_finite() && piece.ln_value - prev > ln_growth {
                growth_run += 1;
            } else {
                growth_run = 0;
            }
            if growth_run >= cfg.divergence_doublings {
                return Ok(ModularResult::finish(total, err, side_status(upper), evals(budget)));
            }
            let negligible = piece.ln_value == f64::NEG_INFINITY || piece.ln_value - total <= ln_tol;
            small_run = if negligible { small_run + 1 } else { 0 };
            if small_run >= 2 && next.abs() >= MIN_TAIL_REACH {
                // The last piece bounds what is left beyond the truncation.
                err = ln_add(err, piece.ln_value);
                done = true;
            } else if at_cap {
                if small_run == 0 {
                    return Ok(ModularResult::finish(total, err, ModularStatus::ToleranceNotMet, evals(budget)));
                }
                done = true;
            }
            prev = piece.ln_value;
            s = next;
            width *= 2.0;
        }
    }
    Ok(ModularResult::finish(total, err, ModularStatus::Converged, evals(budget)))
}

/// ln of the modular integrand M(|g|) e^{-φ}, scaled by e^{-ln_k}.
fn ln_integrand(
    g: &Func,
    m: &dyn Young,
    phi: Option<&Func>,
    ln_k: f64,
    x: f64,
) -> Result<f64, EvalError> {
    let gv = g.eval_ln(x)?;
    if gv.sign == 0 {
        return Ok(f64::NEG_INFINITY);
    }
    let w = match phi {
        Some(p) => -p.eval_ln(x)?.to_f64(),
        None => 0.0,
    };
    Ok(m.ln_value_exp(gv.ln - ln_k) + w)
}

/// ∫_a^b M(|g(x)|) e^{-φ(x)} dx; `phi = None` is Lebesgue measure.
pub fn weighted_modular(
    g: &Func,
    m: &dyn Young,
    phi: Option<&Func>,
    a: f64,
    b: f64,
    cfg: &QuadConfig,
) -> Result<ModularResult, IntegrateError> {
    modular_ln(&|x| ln_integrand(g, m, phi, 0.0, x), a, b, cfg)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormStatus {
    Converged,
    /// The modular is infinite for every probed scaling.
    Infinite,
    /// Quadrature did not reach its tolerance on the way.
    Unresolved,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormResult {
    pub value: ExtReal,
    pub ln_value: ExtReal,
    pub status: NormStatus,
}

impl NormResult {
    fn from_ln(ln: f64) -> Self {
        NormResult { value: ExtReal(ln.exp()), ln_value: ExtReal(ln), status: NormStatus::Converged }
    }

    fn infinite() -> Self {
        NormResult { value: ExtReal::INFINITY, ln_value: ExtReal::INFINITY, status: NormStatus::Infinite }
    }

    fn unresolved() -> Self {
        NormResult { value: ExtReal(f64::NAN), ln_value: ExtReal(f64::NAN), status: NormStatus::Unresolved }
    }
}

/// Luxemburg norm of a function given through `ln_abs_f` (ln |f|, `-inf`
/// at zeros) with respect to `e^{ln_w} dx`: the K with ∫ M(|f|/K) w = 1.
pub fn luxemburg_norm_ln(
    ln_abs_f: &dyn Fn(f64) -> Result<f64, EvalError>,
    m: &dyn Young,
    ln_w: &dyn Fn(f64) -> Result<f64, EvalError>,
    a: f64,
    b: f64,
    cfg: &QuadConfig,
) -> Result<NormResult, IntegrateError> {
    luxemburg_impl(ln_abs_f, m, ln_w, a, b, cfg, true)
}

fn luxemburg_impl(
    ln_abs_f: &dyn Fn(f64) -> Result<f64, EvalError>,
    m: &dyn Young,
    ln_w: &dyn Fn(f64) -> Result<f64, EvalError>,
    a: f64,
    b: f64,
    cfg: &QuadConfig,
    allow_homogeneous: bool,
) -> Result<NormResult, IntegrateError> {
    let modular = |ln_k: f64| -> Result<ModularResult, IntegrateError> {
        let lf = |x: f64| -> Result<f64, EvalError> {
            let v = ln_abs_f(x)?;
            if v == f64::NEG_INFINITY {
                return Ok(v);
            }
            Ok(m.ln_value_exp(v - ln_k) + ln_w(x)?)
        };
        modular_ln(&lf, a, b, cfg)
    };

    if let (true, Some((coef, q))) = (allow_homogeneous, m.homogeneous()) {
        // ∫ a (|f|/K)^q w = 1  ⇔  K = (∫ a |f|^q w)^{1/q}
        let r = modular(0.0)?;
        return Ok(match r.status {
            ModularStatus::Converged if r.ln_value.0 == f64::NEG_INFINITY => NormResult::from_ln(f64::NEG_INFINITY),
            ModularStatus::Converged => NormResult::from_ln(r.ln_value.0 / q + 0.0 * coef),
            ModularStatus::ToleranceNotMet => NormResult::unresolved(),
            _ => NormResult::infinite(),
        });
    }

    // ln modular as a function of ln K, decreasing.
    let eval = |ln_k: f64| -> Result<Option<f64>, IntegrateError> {
        let r = modular(ln_k)?;
        Ok(match r.status {
            ModularStatus::Converged => Some(r.ln_value.0),
            ModularStatus::ToleranceNotMet => Some(f64::NAN),
            _ => None,
        })
    };

    let mut lk = 0.0;
    let mut val = eval(lk)?;
    let mut j = 0;
    while val.is_none() {
        // Probe K = 2^(2^j).
        if j >= 10 {
            return Ok(NormResult::infinite());
        }
        lk = 2f64.powi(j) * std::f64::consts::LN_2;
        val = eval(lk)?;
        j += 1;
    }
    let v0 = val.unwrap();
    if v0.is_nan() {
        return Ok(NormResult::unresolved());
    }
    if v0 == f64::NEG_INFINITY {
        return Ok(NormResult::from_ln(f64::NEG_INFINITY));
    }
    let step = 16f64.ln();
    let (mut lo, mut flo, mut hi, mut fhi) = (lk, v0, lk, v0);
    let mut guard = 0;
    while fhi > 0.0 {
        lo = hi;
        flo = fhi;
        hi += step;
        fhi = match eval(hi)? {
            Some(v) if !v.is_nan() => v,
            _ => return Ok(NormResult::unresolved()),
        };
        guard += 1;
        if guard > 400 {
            return Err(IntegrateError::NoBracket);
        }
    }
    while flo < 0.0 {
        hi = lo;
        fhi = flo;
        lo -= step;
        flo = match eval(lo)? {
            Some(v) if !v.is_nan() => v,
            // Smaller K can only make the modular diverge; the root is above.
            None => {
                lo += step;
                break;
            }
            _ => return Ok(NormResult::unresolved()),
        };
        guard += 1;
        if guard > 400 {
            return Err(IntegrateError::NoBracket);
        }
    }
    if flo < 0.0 || fhi > 0.0 {
        return Err(IntegrateError::NoBracket);
    }
    // Illinois regula falsi on ln K; the bracket always shrinks.
    let mut side = 0;
    for _ in 0..200 {
        if hi - lo <= 1e-13 * (1.0 + lo.abs().max(hi.abs())) {
            break;
        }
        let mut mid = hi - fhi * (hi - lo) / (fhi - flo);
        if !(mid > lo && mid < hi) {
            mid = 0.5 * (lo + hi);
        }
        let fm = match eval(mid)? {
            Some(v) if !v.is_nan() => v,
            _ => return Ok(NormResult::unresolved()),
        };
        if fm == 0.0 {
            return Ok(NormResult::from_ln(mid));
        }
        if fm > 0.0 {
            lo = mid;
            flo = fm;
            if side == 1 {
                fhi *= 0.5;
            }
            side = 1;
        } else {
            hi = mid;
            fhi = fm;
            if side == -1 {
                flo *= 0.5;
            }
            side = -1;
        }
    }
    Ok(NormResult::from_ln(0.5 * (lo + hi)))
}

/// Luxemburg norm of `f` in L^M(e^{-φ} dx) on (a, b).
pub fn luxemburg_norm(
    f: &Func,
    m: &dyn Young,
    phi: Option<&Func>,
    a: f64,
    b: f64,
    cfg: &QuadConfig,
) -> Result<NormResult, IntegrateError> {
    let ln_abs = |x: f64| f.eval_ln(x).map(|v| v.ln);
    let ln_w = |x: f64| -> Result<f64, EvalError> {
        match phi {
            Some(p) => Ok(-p.eval_ln(x)?.to_f64()),
            None => Ok(0.0),
        }
    };
    luxemburg_norm_ln(&ln_abs, m, &ln_w, a, b, cfg)
}

#[cfg(test)]
pub(crate) fn luxemburg_by_bracketing(
    f: &Func,
    m: &dyn Young,
    phi: Option<&Func>,
    a: f64,
    b: f64,
    cfg: &QuadConfig,
) -> Result<NormResult, IntegrateError> {
    let ln_abs = |x: f64| f.eval_ln(x).map(|v| v.ln);
    let ln_w = |x: f64| -> Result<f64, EvalError> {
        match phi {
            Some(p) => Ok(-p.eval_ln(x)?.to_f64()),
            None => Ok(0.0),
        }
    };
    luxemburg_impl(&ln_abs, m, &ln_w, a, b, cfg, false)
}

/// Bracket [Lux, 2·Lux] for the dual (Orlicz) norm of `f` with respect to
/// the Young function `m` on (a, b) with Lebesgue measure.
pub fn dual_norm_bounds_ln(
    ln_abs_f: &dyn Fn(f64) -> Result<f64, EvalError>,
    m: &dyn Young,
    a: f64,
    b: f64,
    cfg: &QuadConfig,
) -> Result<(NormResult, NormResult), IntegrateError> {
    let lux = luxemburg_norm_ln(ln_abs_f, m, &|_| Ok(0.0), a, b, cfg)?;
    let upper = NormResult {
        value: ExtReal(2.0 * lux.value.0),
        ln_value: ExtReal(lux.ln_value.0 + std::f64::consts::LN_2),
        status: lux.status,
    };
    Ok((lux, upper))
}

pub fn dual_norm_bounds(
    f: &Func,
    m: &dyn Young,
    a: f64,
    b: f64,
    cfg: &QuadConfig,
) -> Result<(NormResult, NormResult), IntegrateError> {
    dual_norm_bounds_ln(&|x| f.eval_ln(x).map(|v| v.ln), m, a, b, cfg)
}
