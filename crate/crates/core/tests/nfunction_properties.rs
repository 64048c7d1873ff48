use orlicz_hardy::nfunction::{NFunction, Young};
use proptest::prelude::*;

fn catalog() -> Vec<NFunction> {
    vec![
        NFunction::power(1.5).unwrap(),
        NFunction::power(2.0).unwrap(),
        NFunction::power(3.0).unwrap(),
        NFunction::power_sum(2.0, 3.0).unwrap(),
    ]
}

fn log_uniform(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo.ln()..hi.ln()).prop_map(f64::exp)
}

fn cases() -> ProptestConfig {
    ProptestConfig::with_cases(10_000)
}

proptest! {
    #![proptest_config(cases())]

    #[test]
    fn scaling_is_bounded_by_c(lambda in log_uniform(1e-3, 1e3), r in log_uniform(1e-3, 1e3)) {
        for m in catalog() {
            let lhs = m.value(lambda * r);
            let rhs = m.c_of(lambda) * m.value(r);
            prop_assert!(lhs <= rhs * (1.0 + 1e-12), "{}: {lhs} > {rhs}", m.name());
        }
    }

    #[test]
    fn mixed_product_bound(r in log_uniform(1e-3, 1e3), s in log_uniform(1e-3, 1e3)) {
        for m in catalog() {
            let (d, big_d) = (m.d(), m.big_d());
            let lhs = m.value(r) / r * s;
            let rhs = (big_d - 1.0) / d * m.value(r) + m.value(s) / d;
            prop_assert!(lhs <= rhs * (1.0 + 1e-12), "{}: {lhs} > {rhs}", m.name());
        }
    }

    #[test]
    fn young_inequality(x in log_uniform(1e-3, 1e3), y in log_uniform(1e-3, 1e3)) {
        for m in catalog() {
            let rhs = m.value(x) + m.conjugate_value(y).unwrap();
            prop_assert!(x * y <= rhs * (1.0 + 1e-9), "{}: {} > {rhs}", m.name(), x * y);
        }
    }

    #[test]
    fn c_inverse_inverts(t in log_uniform(1e-6, 1e6)) {
        for m in catalog() {
            let back = m.c_of(m.c_inverse(t));
            prop_assert!((back - t).abs() <= 1e-12 * t, "{}: {back} vs {t}", m.name());
        }
    }
}

#[test]
fn numeric_conjugate_matches_scaled_power() {
    // λ^3 + λ^(3+ε) is 2λ^3 up to ε, whose conjugate is 2·(λ^3)*(y/2).
    let cube = NFunction::power(3.0).unwrap();
    let sum = NFunction::power_sum(3.0, 3.0 + 1e-12).unwrap();
    for y in [0.1, 1.0, 7.0, 250.0] {
        let numeric = sum.conjugate_value(y).unwrap();
        let exact = 2.0 * cube.conjugate_value(y / 2.0).unwrap();
        assert!((numeric - exact).abs() <= 1e-6 * exact, "{numeric} vs {exact}");
    }
}
