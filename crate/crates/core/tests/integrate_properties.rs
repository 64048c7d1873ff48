use orlicz_hardy::expr::parse;
use orlicz_hardy::func::Func;
use orlicz_hardy::integrate::{dual_norm_bounds, modular_ln, weighted_modular, QuadConfig};
use orlicz_hardy::nfunction::NFunction;
use proptest::prelude::*;

fn f(text: &str) -> Func {
    Func::expr(parse(text).unwrap())
}

fn cfg() -> QuadConfig {
    QuadConfig::default()
}

#[test]
fn gamma_battery() {
    for (a, gamma) in [(0.5, 0.886_226_925_452_758), (1.0, 1.0), (2.0, 2.0), (3.5, 11.631_728_396_567_448)] {
        let r = modular_ln(&|x: f64| Ok(a * x.ln() - x), 0.0, f64::INFINITY, &cfg()).unwrap();
        assert!(r.converged());
        assert!((r.value.0 - gamma).abs() <= 1e-8 * gamma, "a = {a}: {}", r.value.0);
    }
}

fn n_functions() -> Vec<NFunction> {
    vec![
        NFunction::power(1.5).unwrap(),
        NFunction::power(2.0).unwrap(),
        NFunction::power(3.0).unwrap(),
        NFunction::power_sum(2.0, 3.0).unwrap(),
    ]
}

fn family(k: usize, a: f64) -> String {
    match k {
        0 => format!("r^({a:?})"),
        1 => format!("exp(-({a:?})*r)"),
        2 => format!("(1+r)^({a:?})"),
        _ => format!("ln(1+({:?})*r)", a.abs() + 0.1),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn holder_type_bound(
        kf in 0usize..4, af in -0.3f64..3.0,
        kg in 0usize..4, ag in -0.3f64..3.0,
        km in 0usize..4,
    ) {
        let m = &n_functions()[km];
        let (ft, gt) = (family(kf, af), family(kg, ag));
        let (fu, gu) = (f(&ft), f(&gt));
        let pairing = modular_ln(
            &|x: f64| Ok(fu.eval(x)?.abs().ln() + gu.eval(x)?.abs().ln()),
            0.0, 1.0, &cfg(),
        ).unwrap();
        let (_, uf) = dual_norm_bounds(&fu, m, 0.0, 1.0, &cfg()).unwrap();
        let (_, ug) = dual_norm_bounds(&gu, &m.conjugate(), 0.0, 1.0, &cfg()).unwrap();
        prop_assert!(pairing.value.0 <= uf.value.0 * ug.value.0 * (1.0 + 1e-9),
            "{} with {ft}, {gt}: {} > {}·{}", m.name(), pairing.value.0, uf.value.0, ug.value.0);
    }

    #[test]
    fn power_modular_is_homogeneous(c in 0.01f64..100.0, p in 1.2f64..4.0, k in 0usize..3) {
        let m = NFunction::power(p).unwrap();
        let phi = f("r");
        let g = family(k, 0.7);
        let base = weighted_modular(&f(&g), &m, Some(&phi), 0.0, f64::INFINITY, &cfg()).unwrap();
        let scaled = weighted_modular(&f(&format!("({c:?})*({g})")), &m, Some(&phi), 0.0, f64::INFINITY, &cfg()).unwrap();
        let want = c.powf(p) * base.value.0;
        prop_assert!((scaled.value.0 - want).abs() <= 1e-10 * want, "{} vs {want}", scaled.value.0);
    }

    #[test]
    fn enlarging_the_interval_never_decreases(a in 0.01f64..1.0, w in 0.1f64..5.0, grow in 1.0f64..10.0, k in 0usize..4) {
        let m = NFunction::power(2.0).unwrap();
        let phi = f("r");
        let g = f(&family(k, 1.3));
        let inner = weighted_modular(&g, &m, Some(&phi), a, a + w, &cfg()).unwrap();
        let outer = weighted_modular(&g, &m, Some(&phi), a / grow, a + w * grow, &cfg()).unwrap();
        prop_assert!(outer.value.0 >= inner.value.0 * (1.0 - 1e-12), "{} < {}", outer.value.0, inner.value.0);
    }
}
