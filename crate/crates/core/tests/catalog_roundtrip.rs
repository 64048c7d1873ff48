use orlicz_hardy::catalog::{load, sweep_entries, FactValue};

#[test]
fn certify_reproduces_expected_facts() {
    for name in sweep_entries() {
        let e = load(&name).unwrap();
        let t = e.build().unwrap();
        let c = t.certify();
        for f in &e.expected {
            let got = match f.key.as_str() {
                "b1" => Some(c.b1.0),
                "b2" => Some(c.b2.0),
                "L" => Some(c.l.0),
                "C" => c.c,
                "sup_phi_ratio" => Some(t.sup_phi_ratio().value.0),
                _ => None,
            };
            match (&f.value, got) {
                (FactValue::Number(want), Some(got)) => {
                    let ok = if want.0.is_finite() {
                        (got - want.0).abs() <= f.tol * want.0.abs().max(1.0)
                    } else {
                        got == want.0
                    };
                    assert!(ok, "{name}: {} = {got}, expected {}", f.key, want.0);
                }
                (FactValue::Verdict(v), _) => assert_eq!(&c.verdict, v, "{name}"),
                _ => {}
            }
        }
    }
}
