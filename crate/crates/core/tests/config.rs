use planar_spin::config::{Mass, RunConfig};
use planar_spin::equation::{InitialData, Integration};
use planar_spin::Convention;
use proptest::prelude::*;

fn conventions() -> impl Strategy<Value = Convention> {
    (prop::bool::ANY, prop::bool::ANY, prop::bool::ANY).prop_map(|(a, b, c)| {
        let s = |x: bool| if x { 1 } else { -1 };
        Convention::new(s(a), s(b), s(c)).unwrap()
    })
}

fn mass() -> impl Strategy<Value = Mass> {
    prop_oneof![
        (-5.0..5.0f64).prop_map(|mu| Mass::Mu { mu }),
        (0.1..5.0f64, 0.1..5.0f64).prop_map(|(m0, s3)| Mass::Spin { m0, s3 }),
    ]
}

fn config() -> impl Strategy<Value = RunConfig> {
    (
        mass(),
        (-1.0..1.0f64, -1.0..1.0f64, 0.0..0.95f64, 0.0..std::f64::consts::TAU, -1.0..1.0f64, -1.0..1.0f64),
        (-5.0..5.0f64, 0.1..20.0f64),
        (1e-4..0.1f64, prop::bool::ANY),
        conventions(),
        any::<u64>(),
    )
        .prop_map(|(mass, (x1, x2, r, phi, a1, a2), (t0, len), (step, adaptive), convention, seed)| RunConfig {
            mass,
            initial: InitialData { x: [x1, x2], v: [r * phi.cos(), r * phi.sin()], vp: [a1, a2] },
            t_span: [t0, t0 + len],
            integration: if adaptive { Integration::dopri5(step, 1e-9, 1e-10) } else { Integration::rk4(step) },
            convention,
            seed,
            out_dir: None,
        })
}

proptest! {
    #[test]
    fn json_roundtrip(c in config()) {
        let back = RunConfig::from_json(&c.to_json()).unwrap();
        prop_assert_eq!(back, c);
    }

    #[test]
    fn arbitrary_text_never_panics(s in ".{0,200}") {
        let _ = RunConfig::from_json(&s);
    }
}

#[test]
fn demo_is_valid() {
    let c = RunConfig::demo();
    assert_eq!(RunConfig::from_json(&c.to_json()).unwrap(), c);
    assert_eq!(c.mu(), 1.0);
}

#[test]
fn rejects_non_finite_and_superluminal() {
    let base = RunConfig::demo().to_json();
    let huge = base.replace("\"mu\": 1.0", "\"mu\": 1e999");
    assert_ne!(huge, base);
    assert!(RunConfig::from_json(&huge).is_err());
    let fast = RunConfig::demo().to_json().replace("0.2,\n      0.1", "0.8,\n      0.8");
    assert_ne!(fast, base);
    assert!(RunConfig::from_json(&fast).is_err());
}
