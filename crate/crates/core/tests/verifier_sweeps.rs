use orlicz_hardy::catalog::{load, sweep_entries};
use orlicz_hardy::classify::Tri;
use orlicz_hardy::integrate::QuadConfig;
use orlicz_hardy::verifier::{norm_verify, stock_functions, verify, Class, Holds, VerificationReport};

fn in_class(r: &VerificationReport) -> bool {
    match r.class {
        Some(Class::RPlus) => r.membership.in_rplus == Tri::Yes,
        Some(Class::RMinus) => r.membership.in_rminus == Tri::Yes,
        None => false,
    }
}

#[test]
fn no_false_violations() {
    let cfg = QuadConfig::default();
    let mut in_class_count = 0;
    for name in sweep_entries() {
        let t = load(&name).unwrap().build().unwrap();
        let cert = t.certify();
        for u in stock_functions() {
            let r = verify(&t, &cert, &u, &cfg);
            assert_ne!(r.holds, Holds::No, "{name}, {}: {:?}", u.name, r.ratio);
            if in_class(&r) {
                in_class_count += 1;
                assert!(matches!(r.holds, Holds::Yes | Holds::Vacuous), "{name}, {}: {:?} {:?}", u.name, r.holds, r.diagnostics);
            }
        }
    }
    assert!(in_class_count > 100, "{in_class_count}");
}

#[test]
fn norm_inequality_follows_modular_one() {
    let cfg = QuadConfig::default();
    for name in sweep_entries() {
        let t = load(&name).unwrap().build().unwrap();
        let cert = t.certify();
        for u in stock_functions() {
            let r = verify(&t, &cert, &u, &cfg);
            if r.holds != Holds::Yes || !r.ratio.is_some_and(|x| x.0.is_finite()) {
                continue;
            }
            let n = norm_verify(&t, &cert, &u, &cfg);
            let (ratio, c) = (n.ratio.unwrap().0, n.c_tilde.unwrap());
            assert!(ratio <= c * (1.0 + 1e-6), "{name}, {}: {ratio} > {c}", u.name);
        }
    }
}

#[test]
fn classical_ratio_is_dilation_invariant() {
    let cfg = QuadConfig::default();
    for p in [2.0, 3.0] {
        for alpha in [-2.0, -1.0, 0.5, 4.0, 6.0] {
            let name = format!("classical:p={p},alpha={alpha}");
            let t = load(&name).unwrap().build().unwrap();
            let cert = t.certify();
            for u in stock_functions() {
                let base = verify(&t, &cert, &u, &cfg);
                let Some(r0) = base.ratio.map(|x| x.0).filter(|x| x.is_finite() && *x > 0.0) else { continue };
                if !base.h.converged() {
                    continue;
                }
                for lambda in [0.5, 2.0] {
                    let r = verify(&t, &cert, &u.dilate(lambda), &cfg).ratio.unwrap().0;
                    assert!((r - r0).abs() <= 1e-6 * r0, "{name}, {} at λ = {lambda}: {r} vs {r0}", u.name);
                }
            }
        }
    }
}
