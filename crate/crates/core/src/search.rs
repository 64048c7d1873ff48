//! Extrema of a scalar function over a logarithmic probe window.
//!
//! A dense log grid locates the candidate, golden-section search refines it
//! inside the two neighbouring cells, and the behaviour at both window ends
//! is extrapolated to the limits r -> 0 and r -> oo.

use serde::{Deserialize, Serialize};

use crate::ext::ExtReal;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Log-spaced sample points between `lo` and `hi`, both included.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogGrid {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl LogGrid {
    pub fn new(lo: f64, hi: f64, points: usize) -> Self {
        assert!(lo > 0.0 && hi > lo && points >= 2, "invalid log grid");
        LogGrid { lo, hi, points }
    }

    pub fn point(&self, i: usize) -> f64 {
        let (a, b) = (self.lo.ln(), self.hi.ln());
        if i == 0 {
            self.lo
        } else if i + 1 == self.points {
            self.hi
        } else {
            (a + (b - a) * i as f64 / (self.points - 1) as f64).exp()
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.points).map(move |i| self.point(i))
    }
}

/// Maximize a unimodal `f` on `[a, b]` by golden-section search. Returns the
/// abscissa and value of the best point seen.
pub fn golden_max(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64, tol: f64, max_iter: usize) -> (f64, f64) {
    let (mut a, mut b) = (a, b);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    let mut best = if fc >= fd { (c, fc) } else { (d, fd) };
    for _ in 0..max_iter {
        if (b - a).abs() <= tol * (1.0 + a.abs().max(b.abs())) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        for (x, v) in [(c, fc), (d, fd)] {
            if v > best.1 {
                best = (x, v);
            }
        }
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Goal {
    Minimize,
    Maximize,
}

/// Where the reported extremum was found.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "r")]
pub enum Location {
    Interior(f64),
    LimitZero,
    LimitInfinity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitMethod {
    /// The tail samples agree to rounding.
    Constant,
    /// Aitken extrapolation over decades.
    Geometric,
    /// Polynomial extrapolation in 1/|ln r|.
    Logarithmic,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EndLimit {
    pub value: ExtReal,
    pub method: Option<LimitMethod>,
    /// Disagreement between the two extrapolation stencils.
    pub spread: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Extremum {
    pub value: ExtReal,
    pub location: Location,
    /// Spread of the end-limit extrapolation when the extremum is a limit.
    pub limit_spread: f64,
    pub limit_method: Option<LimitMethod>,
    /// Probe points where the function was undefined or not finite.
    pub singular: Vec<f64>,
}

impl Extremum {
    /// A grid or constant-tail value, as opposed to an extrapolated one.
    pub fn is_sharp(&self, tol: f64) -> bool {
        self.limit_spread <= tol * (1.0 + self.value.0.abs())
    }
}

fn aitken(x0: f64, x1: f64, x2: f64) -> Option<f64> {
    let d1 = x1 - x0;
    let d2 = x2 - x1;
    let den = d2 - d1;
    if den == 0.0 || !den.is_finite() {
        return None;
    }
    let v = x2 - d2 * d2 / den;
    v.is_finite().then_some(v)
}

fn poly_at_zero(xs: &[f64], ys: &[f64]) -> f64 {
    // Lagrange interpolation evaluated at 0.
    let mut acc = 0.0;
    for i in 0..xs.len() {
        let mut w = 1.0;
        for j in 0..xs.len() {
            if i != j {
                w *= xs[j] / (xs[j] - xs[i]);
            }
        }
        acc += w * ys[i];
    }
    acc
}

/// Limit of `f` as r tends to the end of the window whose extreme sample is
/// `edge` (`edge < 1` means r -> 0). `None` when the samples do not support
/// any consistent extrapolation.
pub fn end_limit(f: &dyn Fn(f64) -> Option<f64>, edge: f64) -> Option<EndLimit> {
    let toward_zero = edge < 1.0;
    let step: f64 = if toward_zero { 10.0 } else { 0.1 };
    // x[3] is the sample nearest to the limit.
    let decades: Vec<f64> = (0..4).rev().map(|k| edge * step.powi(k)).collect();
    let x: Vec<f64> = decades.iter().map(|&r| f(r)).collect::<Option<_>>()?;

    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let d: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    if d.iter().all(|v| v.abs() <= 4.0 * f64::EPSILON * scale.max(f64::MIN_POSITIVE)) {
        return Some(EndLimit { value: ExtReal(x[3]), method: Some(LimitMethod::Constant), spread: 0.0 });
    }

    // Divergence: monotone without deceleration, or huge and still growing.
    let monotone = d.iter().all(|v| *v > 0.0) || d.iter().all(|v| *v < 0.0);
    if monotone && (d[2].abs() >= 0.999 * d[1].abs() && d[1].abs() >= 0.999 * d[0].abs()
        || x[3].abs() > 1e12 && x[3].abs() > x[2].abs())
    {
        let sign = d[2].signum();
        return Some(EndLimit { value: ExtReal(sign * f64::INFINITY), method: None, spread: 0.0 });
    }

    if let (Some(a1), Some(a2)) = (aitken(x[0], x[1], x[2]), aitken(x[1], x[2], x[3])) {
        let spread = (a1 - a2).abs();
        if spread <= 1e-9 * (1.0 + a2.abs()) {
            // Extrapolating past the last sample by rounding noise only.
            let a2 = if (a2 - x[3]).abs() <= 8.0 * f64::EPSILON * scale { x[3] } else { a2 };
            return Some(EndLimit { value: ExtReal(a2), method: Some(LimitMethod::Geometric), spread });
        }
    }

    // Algebraic approach in a = 1/|ln r|, sampled at edge^(1/8), ..., edge.
    let le = edge.ln().abs();
    let h = 1.0 / le;
    let rs: Vec<f64> = [8.0, 4.0, 2.0, 1.0].iter().map(|k| (edge.ln() / k).exp()).collect();
    let ys: Vec<f64> = rs.iter().map(|&r| f(r)).collect::<Option<_>>()?;
    let a = [8.0 * h, 4.0 * h, 2.0 * h, h];
    let coarse = poly_at_zero(&a[..3], &ys[..3]);
    let fine = poly_at_zero(&a[1..], &ys[1..]);
    let full = poly_at_zero(&a, &ys);
    let spread = (full - fine).abs().max((fine - coarse).abs() / 4.0);
    if full.is_finite() && spread <= 1e-2 * (1.0 + full.abs()) {
        return Some(EndLimit { value: ExtReal(full), method: Some(LimitMethod::Logarithmic), spread });
    }
    None
}

/// Infimum or supremum of `f` over the grid window including end limits.
pub fn extremum(f: &dyn Fn(f64) -> Option<f64>, grid: &LogGrid, goal: Goal) -> Extremum {
    let sign = match goal {
        Goal::Maximize => 1.0,
        Goal::Minimize => -1.0,
    };
    let mut singular = Vec::new();
    let mut best: Option<(usize, f64)> = None;
    let values: Vec<Option<f64>> = grid
        .iter()
        .map(|r| {
            let v = f(r).filter(|v| v.is_finite());
            if v.is_none() {
                singular.push(r);
            }
            v
        })
        .collect();
    for (i, v) in values.iter().enumerate() {
        if let Some(v) = v {
            if best.map_or(true, |(_, b)| sign * v > sign * b) {
                best = Some((i, *v));
            }
        }
    }

    let mut out = Extremum {
        value: ExtReal(-sign * f64::INFINITY),
        location: Location::Interior(f64::NAN),
        limit_spread: 0.0,
        limit_method: None,
        singular,
    };
    if let Some((i, v)) = best {
        out.value = ExtReal(v);
        out.location = Location::Interior(grid.point(i));
        let lo = grid.point(i.saturating_sub(1)).ln();
        let hi = grid.point((i + 1).min(grid.points - 1)).ln();
        if hi > lo {
            let mut g = |t: f64| f(t.exp()).filter(|v| v.is_finite()).map_or(f64::NEG_INFINITY, |v| sign * v);
            let (t, gv) = golden_max(&mut g, lo, hi, 1e-12, 200);
            if gv > sign * out.value.0 {
                out.value = ExtReal(sign * gv);
                out.location = Location::Interior(t.exp());
            }
        }
    }

    // Overflow near a window end moves that end inward to the last finite probe.
    let first = values.iter().position(Option::is_some);
    let last = values.iter().rposition(Option::is_some);
    let edges = match (first, last) {
        (Some(i), Some(j)) => vec![(grid.point(i), Location::LimitZero), (grid.point(j), Location::LimitInfinity)],
        _ => Vec::new(),
    };
    for (edge, loc) in edges {
        if let Some(lim) = end_limit(f, edge) {
            if sign * lim.value.0 > sign * out.value.0 {
                out.value = lim.value;
                out.location = loc;
                out.limit_spread = lim.spread;
                out.limit_method = lim.method;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn window() -> LogGrid {
        LogGrid::new(1e-8, 1e8, 4001)
    }

    #[test]
    fn golden_finds_parabola_peak() {
        let (x, v) = golden_max(&mut |x| -(x - 0.3) * (x - 0.3), -1.0, 2.0, 1e-12, 200);
        assert!((x - 0.3).abs() < 1e-6);
        assert!(v.abs() < 1e-12);
    }

    #[test]
    fn interior_maximum_is_refined() {
        // x e^{-x} peaks at x = 1 with value 1/e.
        let e = extremum(&|r| Some(r * (-r).exp()), &window(), Goal::Maximize);
        assert!((e.value.0 - (-1f64).exp()).abs() < 1e-14);
        match e.location {
            Location::Interior(r) => assert!((r - 1.0).abs() < 1e-6),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn infimum_approached_at_infinity() {
        let e = extremum(&|r| Some(1.0 + 1.0 / (r * r)), &window(), Goal::Minimize);
        assert_eq!(e.value.0, 1.0, "{e:?}");
    }

    #[test]
    fn geometric_limit_is_extrapolated() {
        // 2 - r^{-1/2}: the window end still differs from the limit by 1e-4.
        let e = extremum(&|r| Some(2.0 - r.powf(-0.5)), &window(), Goal::Maximize);
        assert!((e.value.0 - 2.0).abs() < 1e-10, "{e:?}");
        assert_eq!(e.location, Location::LimitInfinity);
        assert_eq!(e.limit_method, Some(LimitMethod::Geometric));
    }

    #[test]
    fn logarithmic_limit_is_extrapolated() {
        let f = |r: f64| {
            let a = 1.0 / r.ln();
            Some(1.0 - a / ((1.0 + a) * (1.0 + a)))
        };
        let e = extremum(&|r| if r > 10.0 { f(r) } else { Some(0.0) }, &window(), Goal::Maximize);
        assert!((e.value.0 - 1.0).abs() < 2e-3, "{e:?}");
        assert_eq!(e.limit_method, Some(LimitMethod::Logarithmic));
        assert!(!e.is_sharp(1e-9));
    }

    #[test]
    fn divergence_gives_infinity() {
        let e = extremum(&|r| Some(r), &window(), Goal::Maximize);
        assert_eq!(e.value, ExtReal::INFINITY);
        let e = extremum(&|r| Some(r.ln()), &window(), Goal::Minimize);
        assert_eq!(e.value, ExtReal::NEG_INFINITY);
    }

    #[test]
    fn singular_probes_are_reported() {
        let e = extremum(&|r| if (r - 1.0).abs() < 1e-12 { None } else { Some(0.0) }, &window(), Goal::Maximize);
        assert_eq!(e.singular, vec![1.0]);
    }
}
