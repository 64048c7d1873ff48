use orlicz_hardy::catalog::{load, sweep_entries};
use orlicz_hardy::classify::{
    classify_membership, hardy_subset_conclusion, quick_membership, Method, MembershipVerdict, TestFunction, TestKind, Tri,
};
use orlicz_hardy::func::Func;
use orlicz_hardy::integrate::{weighted_modular, QuadConfig};
use orlicz_hardy::verifier::stock_functions;
use orlicz_hardy::weights::WeightTriple;

fn triples() -> Vec<(String, WeightTriple)> {
    sweep_entries().into_iter().map(|n| (n.clone(), load(&n).unwrap().build().unwrap())).collect()
}

fn functions() -> Vec<TestFunction> {
    let mut out = stock_functions();
    for text in ["r", "r^2*exp(-r)", "1/(1+r)", "r/(1+r^2)"] {
        out.push(TestFunction::parse(text, text, TestKind::Generic).unwrap());
    }
    out
}

fn tri(v: &MembershipVerdict, plus: bool) -> Tri {
    if plus { v.in_rplus } else { v.in_rminus }
}

#[test]
fn membership_survives_dilation() {
    for (name, t) in triples() {
        for u in functions() {
            let v = classify_membership(&t, &u);
            for plus in [true, false] {
                if tri(&v, plus) != Tri::Yes {
                    continue;
                }
                for lambda in [0.5, 2.0] {
                    let w = classify_membership(&t, &u.dilate(lambda));
                    assert_eq!(tri(&w, plus), Tri::Yes, "{name}, {} at λ = {lambda}, plus = {plus}", u.name);
                }
            }
        }
    }
}

#[test]
fn settled_trend_gives_some_class() {
    for (name, t) in triples() {
        for u in functions() {
            let v = classify_membership(&t, &u);
            if v.method == Method::DirectLimit && v.limit.is_some() {
                assert!(v.in_rplus == Tri::Yes || v.in_rminus == Tri::Yes, "{name}, {}: {:?}", u.name, v.limit);
            }
        }
    }
}

fn contradicts(direct: &MembershipVerdict, other: &MembershipVerdict) -> bool {
    [true, false].into_iter().any(|plus| {
        let (a, b) = (tri(direct, plus), tri(other, plus));
        matches!((a, b), (Tri::Yes, Tri::No) | (Tri::No, Tri::Yes))
    })
}

#[test]
fn fallback_criteria_agree_with_direct_trend() {
    let cfg = QuadConfig::default();
    let mut compared = 0;
    for (name, t) in triples() {
        let phi = Func::expr(t.phi.clone());
        for u in functions() {
            let direct = classify_membership(&t, &u);
            if direct.method != Method::DirectLimit {
                continue;
            }
            if let Some(q) = quick_membership(&t, &u) {
                compared += 1;
                assert!(!contradicts(&direct, &q), "{name}, {}: Prop {:?} vs {:?}", u.name, q, direct.in_rplus);
            }
            if u.kind == TestKind::Generic {
                continue;
            }
            let energy = weighted_modular(&u.uprime, &t.m, Some(&phi), 0.0, f64::INFINITY, &cfg).unwrap();
            if let Some(h) = hardy_subset_conclusion(&t, &u, energy.converged(), &cfg) {
                compared += 1;
                assert!(!contradicts(&direct, &h), "{name}, {}: {:?} vs direct", u.name, h.method);
            }
        }
    }
    assert!(compared > 0);
}
