//! Criteria 1 to 10, one PASS/FAIL line each.

use std::process::Command;
use std::time::{Duration, Instant};

use orlicz_hardy::bloomkerman::{bk_check, BkConfig, BkStatus};
use orlicz_hardy::catalog::{load, phi_cases, sweep_entries};
use orlicz_hardy::classify::{classify_membership, Method, TestFunction, TestKind, Tri};
use orlicz_hardy::expr::parse;
use orlicz_hardy::func::Func;
use orlicz_hardy::integrate::{luxemburg_norm, modular_ln, ModularStatus, QuadConfig};
use orlicz_hardy::nfunction::{simonenko_indices, NFunction, Young};
use orlicz_hardy::search::LogGrid;
use orlicz_hardy::verifier::{sharpness_search, stock_functions, verify, Family, Holds};
use orlicz_hardy::weights::Verdict;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

struct Outcome {
    ok: bool,
    detail: String,
}

fn pass() -> Outcome {
    Outcome { ok: true, detail: String::new() }
}

fn fail(detail: impl Into<String>) -> Outcome {
    Outcome { ok: false, detail: detail.into() }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn classical_constant() -> Outcome {
    for p in [2.0f64, 3.0] {
        for alpha in [-2.0f64, -1.0, 0.5, 4.0, 6.0] {
            let want = (p / (alpha - p + 1.0).abs()).powf(p);
            let cert = load(&format!("classical:p={p},alpha={alpha}")).unwrap().build().unwrap().certify();
            match cert.c {
                Some(c) if rel(c, want) <= 1e-9 => {}
                other => return fail(format!("p={p}, alpha={alpha}: C = {other:?}, want {want}")),
            }
        }
    }
    pass()
}

fn indices() -> Outcome {
    for p in [1.5, 2.0, 3.0, 7.25] {
        let m = NFunction::power(p).unwrap();
        if (m.d(), m.big_d()) != (p, p) {
            return fail(format!("power {p}: ({}, {})", m.d(), m.big_d()));
        }
    }
    let m = parse("r^2+r^3").unwrap();
    let ix = simonenko_indices(&m, &LogGrid::new(1e-8, 1e8, 2001)).unwrap();
    if (ix.d - 2.0).abs() > 1e-4 || (ix.big_d - 3.0).abs() > 1e-4 {
        return fail(format!("r^2+r^3: ({}, {})", ix.d, ix.big_d));
    }
    let custom = NFunction::from_spec("r^2+r^3").unwrap();
    if (custom.d() - 2.0).abs() > 1e-4 || (custom.big_d() - 3.0).abs() > 1e-4 {
        return fail(format!("custom r^2+r^3: ({}, {})", custom.d(), custom.big_d()));
    }
    pass()
}

fn catalog_n_functions() -> Vec<NFunction> {
    let mut specs: Vec<String> = sweep_entries().iter().map(|n| load(n).unwrap().triple.m.clone()).collect();
    specs.extend(["power:p=1.5", "power_sum:p=2,q=3"].map(String::from));
    specs.sort();
    specs.dedup();
    specs.iter().map(|s| NFunction::from_spec(s).unwrap()).collect()
}

fn lemma_suites() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x4a7d);
    let log_uniform = |rng: &mut StdRng| rng.random_range((1e-3f64).ln()..(1e3f64).ln()).exp();
    for m in catalog_n_functions() {
        let (d, big_d) = (m.d(), m.big_d());
        for _ in 0..10_000 {
            let (x, y) = (log_uniform(&mut rng), log_uniform(&mut rng));
            let scaled = m.value(x * y);
            if scaled > m.c_of(x) * m.value(y) * (1.0 + 1e-12) {
                return fail(format!("{}: scaling bound at ({x}, {y})", m.name()));
            }
            let mixed = m.value(x) / x * y;
            if mixed > ((big_d - 1.0) / d * m.value(x) + m.value(y) / d) * (1.0 + 1e-12) {
                return fail(format!("{}: mixed product bound at ({x}, {y})", m.name()));
            }
            let young = m.value(x) + m.conjugate_value(y).unwrap();
            if x * y > young * (1.0 + 1e-9) {
                return fail(format!("{}: Young at ({x}, {y})", m.name()));
            }
        }
    }
    pass()
}

fn quadrature() -> Outcome {
    let cfg = QuadConfig::default();
    for (a, gamma) in [(0.5, 0.886_226_925_452_758), (1.0, 1.0), (2.0, 2.0), (3.5, 11.631_728_396_567_448)] {
        let r = modular_ln(&|x: f64| Ok(a * x.ln() - x), 0.0, f64::INFINITY, &cfg).unwrap();
        if !r.converged() || rel(r.value.0, gamma) > 1e-8 {
            return fail(format!("Gamma({}) = {}", a + 1.0, r.value.0));
        }
    }
    let n = luxemburg_norm(&Func::expr(parse("1").unwrap()), &NFunction::power(2.0).unwrap(), Some(&Func::expr(parse("r").unwrap())), 0.0, f64::INFINITY, &cfg).unwrap();
    if (n.value.0 - 1.0).abs() > 1e-9 {
        return fail(format!("norm of 1 = {}", n.value.0));
    }
    pass()
}

fn soundness() -> Outcome {
    let cfg = QuadConfig::default();
    let mut checked = 0;
    for name in sweep_entries() {
        let t = load(&name).unwrap().build().unwrap();
        let cert = t.certify();
        for u in stock_functions() {
            let r = verify(&t, &cert, &u, &cfg);
            if r.holds == Holds::No {
                return fail(format!("{name}, {}: ratio {:?}", u.name, r.ratio));
            }
            checked += 1;
        }
    }
    Outcome { ok: true, detail: format!("{checked} reports") }
}

fn sharpness() -> Outcome {
    let t = load("classical:p=2,alpha=4").unwrap().build().unwrap();
    let cert = t.certify();
    let r = sharpness_search(&t, &cert, &Family::classical_extremal(2.0, 4.0), 10_000, &QuadConfig::default()).unwrap();
    let best = r.best_ratio.0;
    if r.violation.is_some() {
        return fail("a family member exceeds C");
    }
    let detail = format!("best_ratio {best:.5} after {} evaluations", r.evaluations);
    if best >= 0.9 * (4.0 / 9.0) && r.evaluations <= 10_000 {
        Outcome { ok: true, detail }
    } else {
        fail(detail)
    }
}

fn gaussian() -> Outcome {
    let cfg = QuadConfig::default();
    let t = load("gaussian_counterexample:p=2").unwrap().build().unwrap();
    let cert = t.certify();
    if cert.verdict != Verdict::B1 || rel(cert.b1.0, 1.0) > 1e-9 || rel(cert.l.0, 1.0) > 1e-9 || !cert.c.is_some_and(|c| rel(c, 4.0) <= 1e-9) {
        return fail(format!("certificate {:?}, b1 {}, L {}, C {:?}", cert.verdict, cert.b1.0, cert.l.0, cert.c));
    }
    let bk = bk_check(&t, &BkConfig::default(), &cfg).unwrap();
    if bk.status != BkStatus::ViolatedGInfinite {
        return fail(format!("bk {:?}", bk.status));
    }
    let laplace = stock_functions().into_iter().find(|u| u.name == "laplace").unwrap();
    let r = verify(&t, &cert, &laplace, &cfg);
    let ok = r.holds == Holds::ViolatedDivergence
        && r.j.diverges()
        && r.h.status == ModularStatus::Converged
        && r.h.value.0.is_finite();
    if !ok {
        return fail(format!("laplace: {:?}", r.holds));
    }
    pass()
}

fn phi_equivalence() -> Outcome {
    const BAND: f64 = 1e-8;
    let cases = phi_cases();
    if cases.len() != 20 {
        return fail(format!("{} cases", cases.len()));
    }
    for case in cases {
        let t = case.triple.build().unwrap();
        let b1 = matches!(t.certify().verdict, Verdict::B1 | Verdict::Both);
        let threshold = 1.0 / (t.m.big_d() - 1.0);
        let sup = t.sup_phi_ratio().value.0;
        if (sup - threshold).abs() > BAND && b1 != (sup < threshold) {
            return fail(format!("phi = {}: sup {sup}, threshold {threshold}, B1 {b1}", case.triple.phi));
        }
    }
    pass()
}

fn classification() -> Outcome {
    let compact: Vec<TestFunction> = stock_functions().into_iter().filter(|u| u.support.is_some()).collect();
    if compact.len() < 3 {
        return fail("too few compactly supported fixtures");
    }
    for name in sweep_entries() {
        let t = load(&name).unwrap().build().unwrap();
        for u in &compact {
            let v = classify_membership(&t, u);
            if (v.in_rplus, v.in_rminus) != (Tri::Yes, Tri::Yes) {
                return fail(format!("{name}, {}: ({:?}, {:?})", u.name, v.in_rplus, v.in_rminus));
            }
        }
    }
    let t = load("classical:p=2,alpha=4").unwrap().build().unwrap();
    let v = classify_membership(&t, &TestFunction::parse("r", "r", TestKind::Generic).unwrap());
    if v.in_rminus != Tri::Yes || v.method != Method::DirectLimit {
        return fail(format!("u = r: in_Rminus {:?} via {:?}", v.in_rminus, v.method));
    }
    for p in &v.theta_trace {
        let want = -p.r.powi(5) / 4.0 + p.s.powi(5) / 4.0;
        if rel(p.theta.0, want) > 1e-8 {
            return fail(format!("theta_{} = {}, want {want}", p.n, p.theta.0));
        }
    }
    pass()
}

fn cli_suite() -> Vec<Vec<u8>> {
    let mut runs: Vec<Vec<String>> = Vec::new();
    for name in sweep_entries() {
        runs.push(vec!["analyze".into(), "--preset".into(), name.clone()]);
        runs.push(vec!["verify".into(), "--preset".into(), name.clone(), "--stock".into(), "--norm".into()]);
        runs.push(vec!["classify".into(), "--preset".into(), name.clone(), "--stock".into()]);
    }
    runs.push(vec!["bk".into(), "--preset".into(), "gaussian_counterexample:p=2".into()]);
    runs.push(vec!["muckenhoupt".into(), "--preset".into(), "classical:p=2,alpha=-2".into(), "--p".into(), "2".into()]);
    runs.push(["sharpness", "--preset", "classical:p=2,alpha=4", "--family", "extremal", "--budget", "40"].map(String::from).to_vec());
    runs.push(["catalog", "list"].map(String::from).to_vec());
    runs.iter()
        .map(|args| Command::new(env!("CARGO_BIN_EXE_orlicz-hardy")).args(args).output().unwrap().stdout)
        .collect()
}

fn determinism() -> Outcome {
    let (a, b) = (cli_suite(), cli_suite());
    if a.iter().any(|r| r.is_empty()) {
        return fail("a run produced no report");
    }
    match a.iter().zip(&b).position(|(x, y)| x != y) {
        None => Outcome { ok: true, detail: format!("{} reports", a.len()) },
        Some(i) => fail(format!("report {i} differs")),
    }
}

#[test]
fn acceptance() {
    let criteria: [(&str, Duration, fn() -> Outcome); 10] = [
        ("classical constant", Duration::from_secs(1), classical_constant),
        ("Simonenko indices", Duration::from_secs(1), indices),
        ("lemma property suites", Duration::from_secs(5), lemma_suites),
        ("quadrature battery", Duration::from_secs(2), quadrature),
        ("soundness sweep", Duration::from_secs(60), soundness),
        ("sharpness", Duration::from_secs(120), sharpness),
        ("Gaussian counterexample", Duration::from_secs(30), gaussian),
        ("omega = |phi'| equivalence", Duration::from_secs(10), phi_equivalence),
        ("classification fixtures", Duration::from_secs(5), classification),
        ("determinism", Duration::MAX, determinism),
    ];
    let mut failed = Vec::new();
    for (i, (label, limit, check)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let mut out = check();
        let elapsed = start.elapsed();
        if elapsed > limit {
            out.ok = false;
            out.detail = format!("{} took {elapsed:.2?}, limit {limit:?}", out.detail);
        }
        let status = if out.ok { "PASS" } else { "FAIL" };
        println!("criterion {} ({label}): {status} [{elapsed:.2?}] {}", i + 1, out.detail);
        if !out.ok {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
