//! Adaptive Gauss–Kronrod (7/15) quadrature of log-domain integrands.
//!
//! Integrands are supplied as `L(t) = ln f(t)`; panels integrate
//! `exp(L(t) - σ)` with a shift σ that is rebased whenever a larger value
//! appears, so integrals far beyond the `f64` range keep full relative
//! accuracy and are reported by their logarithm.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Rebase once a node exceeds the shift by this much.
const REBASE_AT: f64 = 600.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Piece {
    /// ln of the integral; `-inf` for an identically zero integrand.
    pub ln_value: f64,
    /// ln of the absolute error estimate.
    pub ln_error: f64,
    pub outcome: PieceOutcome,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PieceOutcome {
    Converged,
    /// The integrand was `+inf` somewhere.
    Infinite,
    BudgetExhausted,
}

#[derive(Clone, Copy, Debug)]
struct Panel {
    a: f64,
    b: f64,
    /// Kronrod value and error, relative to `exp(shift)`.
    value: f64,
    error: f64,
    /// The error is dominated by rounding in the integrand or abscissae;
    /// splitting further cannot reduce it.
    saturated: bool,
}

struct Keyed(Panel, usize);

impl PartialEq for Keyed {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Keyed {}
impl PartialOrd for Keyed {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Keyed {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.error.total_cmp(&other.0.error).then_with(|| other.1.cmp(&self.1))
    }
}

/// Evaluations per panel: 15 nodes and the two edges.
const PANEL_EVALS: usize = 17;

/// Raw node values of one GK15 panel, then the values at `a` and `b`
/// (NaN where the integrand is undefined exactly at an edge).
fn nodes<E>(l: &mut dyn FnMut(f64) -> Result<f64, E>, a: f64, b: f64) -> Result<[f64; 17], E> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut out = [0.0; 17];
    for j in 0..7 {
        out[2 * j] = l(c - h * XGK[j])?;
        out[2 * j + 1] = l(c + h * XGK[j])?;
    }
    out[14] = l(c)?;
    out[15] = l(a).unwrap_or(f64::NAN);
    out[16] = l(b).unwrap_or(f64::NAN);
    Ok(out)
}

/// Lagrange extrapolation to -1 from values at -XGK[0..k].
fn extrapolate(v: &[f64]) -> f64 {
    let x: Vec<f64> = (0..v.len()).map(|j| -XGK[j]).collect();
    (0..v.len())
        .map(|i| {
            let w: f64 = (0..v.len()).filter(|&j| j != i).map(|j| (-1.0 - x[j]) / (x[i] - x[j])).product();
            w * v[i]
        })
        .sum()
}

/// Error hidden between an edge and the outermost node: a jump there is
/// invisible to the nodes. Charged only when the edge value departs from
/// the cubic extrapolation far more than the extrapolation's own spread.
fn edge_error(edge: f64, inner: [f64; 4], h: f64) -> f64 {
    if !edge.is_finite() {
        return 0.0;
    }
    let cubic = extrapolate(&inner);
    let quadratic = extrapolate(&inner[..3]);
    let miss = (edge - cubic).abs();
    let spread = (cubic - quadratic).abs();
    let size = inner.iter().fold(edge.abs(), |m, v| m.max(v.abs()));
    if miss <= 10.0 * spread + 1e-6 * size {
        return 0.0;
    }
    (1.0 - XGK[0]) * h * miss
}

fn panel_from(raw: &[f64; 17], a: f64, b: f64, shift: f64) -> Panel {
    let h = 0.5 * (b - a);
    let f = |i: usize| {
        let v = raw[i] - shift;
        if v == f64::NEG_INFINITY { 0.0 } else { v.exp() }
    };
    let fc = f(14);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    let mut abs_k = WGK[7] * fc.abs();
    for j in 0..7 {
        let (lo, hi) = (f(2 * j), f(2 * j + 1));
        k += WGK[j] * (lo + hi);
        abs_k += WGK[j] * (lo.abs() + hi.abs());
        if j % 2 == 1 {
            g += WG[j / 2] * (lo + hi);
        }
    }
    let mean = k * 0.5;
    let mut asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        asc += WGK[j] * ((f(2 * j) - mean).abs() + (f(2 * j + 1) - mean).abs());
    }
    let (k, asc, abs_k) = (k * h, asc * h, abs_k * h);
    let mut err = ((k - g * h)).abs();
    if asc != 0.0 && err != 0.0 {
        err = asc * (200.0 * err / asc).powf(1.5).min(1.0);
    }
    let edge = |v: f64| if v.is_nan() { f64::NAN } else { (v - shift).exp() };
    let left = [f(0), f(2), f(4), f(6)];
    let right = [f(1), f(3), f(5), f(7)];
    err += edge_error(edge(raw[15]), left, h) + edge_error(edge(raw[16]), right, h);
    // Rounding floor: relative noise of exp(L) from |L| and from the
    // resolution of t itself, weighted by the slope of L across the panel.
    let finite = raw[..15].iter().copied().filter(|v| v.is_finite());
    let (lmin, lmax, labs) = finite.fold((f64::INFINITY, f64::NEG_INFINITY, 0.0f64), |(lo, hi, m), v| {
        (lo.min(v), hi.max(v), m.max(v.abs()))
    });
    let slope = if lmax > lmin { (lmax - lmin) / (b - a) } else { 0.0 };
    let noise = 50.0 * f64::EPSILON + 8.0 * f64::EPSILON * labs + 4.0 * f64::EPSILON * slope * a.abs().max(b.abs());
    let floor = noise * abs_k;
    let saturated = err <= floor;
    Panel { a, b, value: k, error: err.max(floor), saturated }
}

/// Integrate `exp(l(t))` over the union of consecutive intervals given by
/// `breaks` (sorted). Refinement stops at relative error `rel_tol` or at
/// absolute error `exp(ln_abs_tol)`. `budget` counts remaining integrand
/// evaluations.
pub fn integrate_log<E>(
    l: &mut dyn FnMut(f64) -> Result<f64, E>,
    breaks: &[f64],
    rel_tol: f64,
    ln_abs_tol: f64,
    budget: &mut usize,
) -> Result<Piece, E> {
    let mut raws = Vec::with_capacity(breaks.len());
    for w in breaks.windows(2) {
        if *budget < PANEL_EVALS {
            return Ok(Piece { ln_value: f64::NAN, ln_error: f64::NAN, outcome: PieceOutcome::BudgetExhausted });
        }
        *budget -= PANEL_EVALS;
        raws.push((w[0], w[1], nodes(l, w[0], w[1])?));
    }
    let mut shift = raws.iter().flat_map(|(_, _, r)| r[..15].iter().copied()).fold(f64::NEG_INFINITY, f64::max);
    if shift == f64::INFINITY {
        return Ok(Piece { ln_value: f64::INFINITY, ln_error: f64::INFINITY, outcome: PieceOutcome::Infinite });
    }
    if shift == f64::NEG_INFINITY {
        shift = 0.0;
    }
    let mut heap = BinaryHeap::new();
    let mut seq = 0usize;
    for (a, b, raw) in &raws {
        heap.push(Keyed(panel_from(raw, *a, *b, shift), seq));
        seq += 1;
    }
    let mut done: Vec<Panel> = Vec::new();
    let mut outcome = PieceOutcome::Converged;
    loop {
        let settled = done.iter().map(|p| p.value).sum::<f64>();
        let (open, err) = heap.iter().fold((0.0, 0.0), |(t, e), k| (t + k.0.value, e + k.0.error));
        if err <= rel_tol * (open + settled).abs() || err == 0.0 || err.ln() + shift <= ln_abs_tol {
            break;
        }
        let Some(Keyed(worst, _)) = heap.pop() else { break };
        if worst.saturated {
            done.push(worst);
            continue;
        }
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) || (worst.b - worst.a) < 1e-13 * (1.0 + worst.a.abs()) {
            done.push(Panel { saturated: true, ..worst });
            continue;
        }
        if *budget < 2 * PANEL_EVALS {
            heap.push(Keyed(worst, seq));
            outcome = PieceOutcome::BudgetExhausted;
            break;
        }
        *budget -= 2 * PANEL_EVALS;
        let left = nodes(l, worst.a, mid)?;
        let right = nodes(l, mid, worst.b)?;
        let peak = left[..15].iter().chain(right[..15].iter()).copied().fold(f64::NEG_INFINITY, f64::max);
        if peak == f64::INFINITY {
            return Ok(Piece { ln_value: f64::INFINITY, ln_error: f64::INFINITY, outcome: PieceOutcome::Infinite });
        }
        if peak - shift > REBASE_AT {
            let scale = (shift - peak).exp();
            let old: Vec<Keyed> = heap.drain().collect();
            for Keyed(p, s) in old {
                heap.push(Keyed(Panel { value: p.value * scale, error: p.error * scale, ..p }, s));
            }
            for p in &mut done {
                p.value *= scale;
                p.error *= scale;
            }
            shift = peak;
        }
        heap.push(Keyed(panel_from(&left, worst.a, mid, shift), seq));
        heap.push(Keyed(panel_from(&right, mid, worst.b, shift), seq + 1));
        seq += 2;
    }
    // Fixed summation order for reproducibility.
    let mut panels: Vec<Panel> = heap.into_iter().map(|k| k.0).chain(done).collect();
    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    let total: f64 = panels.iter().map(|p| p.value).sum();
    let err: f64 = panels.iter().map(|p| p.error).sum();
    Ok(Piece { ln_value: total.ln() + shift, ln_error: err.ln() + shift, outcome })
}

/// `ln(exp(a) + exp(b))`.
pub fn ln_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}
