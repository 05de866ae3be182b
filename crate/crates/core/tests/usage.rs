use lft::funcspace::lookup_spec;
use lft::generalized::theorem_check_default;
use lft::{deform, ConjugatePair, DeformParams, Engine};

#[test]
fn deformed_exp_conjugate_end_to_end() -> lft::Result<()> {
    let f = lookup_spec("exp")?;
    let p = DeformParams::from_json(r#"{"lambda":2,"A":[[2]],"b":[1],"c":[3],"d":5}"#)?;
    let fp = deform(&f, &p)?;
    let pair = ConjugatePair::new(fp, Engine::newton())?;
    let value = pair.dual.eval(&[4.0])?.to_f64();

    // F_P(θ) = 2e^{2θ+1} + 3θ + 5, so F_P'(θ) = 4 at e^{2θ+1} = 1/4
    let theta = ((0.25f64).ln() - 1.0) / 2.0;
    let exact = 4.0 * theta - (2.0 * (2.0 * theta + 1.0).exp() + 3.0 * theta + 5.0);
    assert!((value - exact).abs() < 1e-9, "{value} vs {exact}");

    let report = theorem_check_default(&f, &p, &Engine::newton(), 1e-6)?;
    assert!(report.passed(), "{:?}", report.summary);
    Ok(())
}
