use planar_spin::equation::{residual_ep, Jet};
use planar_spin::fd::FdPolicy;
use planar_spin::symmetry::{
    multiplier_residual, invariance_residuals, lorentz_matrix, lorentz_transform_jet, BoostQuadraticForm, PoincareGen,
};
use planar_spin::variationality::{coefficients_of_eq20, MutatedField, Mutation};
use planar_spin::{Convention, Mat3, Vec2, Vec3};
use proptest::prelude::*;

const C: Convention = Convention::DEFAULT;

fn subluminal(max: f64) -> impl Strategy<Value = Vec2> {
    (0.0..max, 0.0..std::f64::consts::TAU).prop_map(|(r, phi)| Vec2::new(r * phi.cos(), r * phi.sin()))
}

fn unit_box() -> impl Strategy<Value = Vec2> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b)| Vec2::new(a, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn invariance_identities_hold(v in subluminal(0.9), vp in unit_box(), omega in -1.0..1.0f64, piv in unit_box(), mu in -2.0..2.0f64) {
        let r = invariance_residuals(
            &coefficients_of_eq20(mu, &C), &v, &vp, &PoincareGen::new(omega, piv), &C, &FdPolicy::default(),
            BoostQuadraticForm::Consistent,
        ).unwrap();
        prop_assert!(r.iter().all(|x| *x < 1e-6), "{r:?}");
        let closure = multiplier_residual(&coefficients_of_eq20(mu, &C), &v, &vp, &PoincareGen::new(omega, piv), &C, &FdPolicy::default()).unwrap();
        prop_assert!(closure < 1e-6, "{closure:e}");
    }

    #[test]
    fn boosted_solutions_stay_solutions(v in subluminal(0.9), vp in unit_box(), omega in -1.0..1.0f64, piv in unit_box(), lambda in -1.0..1.0f64, mu in -2.0..2.0f64) {
        let jet = Jet::on_shell(0.3, Vec2::new(0.1, -0.2), v, vp, mu, &C).unwrap();
        let out = lorentz_transform_jet(&jet, &PoincareGen::new(omega, piv), lambda, &C).unwrap();
        prop_assert!(out.v.norm() < 1.0);
        let r = residual_ep(&out, mu, &C).unwrap();
        prop_assert!(r.amax() < 1e-8 * (1.0 + out.vpp.amax()), "{r:?}");
    }

    #[test]
    fn lorentz_matrices_preserve_the_metric(omega in -1.0..1.0f64, piv in unit_box(), lambda in -1.0..1.0f64) {
        let l = lorentz_matrix(&PoincareGen::new(omega, piv), lambda);
        let g = Mat3::from_diagonal(&Vec3::new(1.0, -1.0, -1.0));
        prop_assert!((l.transpose() * g * l - g).amax() < 1e-10);
        prop_assert!(l[(0, 0)] >= 1.0);
    }

    #[test]
    fn translations_leave_jets_invariant(v in subluminal(0.9), vp in unit_box(), a in (-2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64)) {
        let jet = Jet::on_shell(0.0, Vec2::zeros(), v, vp, 1.0, &C).unwrap();
        let out = lorentz_transform_jet(&jet, &PoincareGen::translation(Vec3::new(a.0, a.1, a.2)), 1.0, &C).unwrap();
        prop_assert_eq!((out.v, out.vp), (jet.v, jet.vp));
        prop_assert!((out.vpp - jet.vpp).amax() < 1e-14);
        prop_assert_eq!(residual_ep(&out, 1.0, &C).unwrap(), residual_ep(&jet, 1.0, &C).unwrap());
    }
}

#[test]
fn zero_generator_gives_zero_residuals() {
    let r = invariance_residuals(
        &coefficients_of_eq20(1.0, &C),
        &Vec2::new(0.4, -0.3),
        &Vec2::new(0.2, 0.9),
        &PoincareGen::new(0.0, Vec2::zeros()),
        &C,
        &FdPolicy::default(),
        BoostQuadraticForm::Consistent,
    )
    .unwrap();
    assert_eq!(r, [0.0; 6]);
}

// drifting-a varies with position only, so the velocity identities cannot see it
#[test]
fn non_invariant_mutations_are_detected() {
    let gen = PoincareGen::new(0.3, Vec2::new(0.5, -0.2));
    for m in [Mutation::SoftenedA, Mutation::VaryingB] {
        let f = MutatedField { base: coefficients_of_eq20(1.0, &C), mutation: m };
        let r = invariance_residuals(
            &f,
            &Vec2::new(0.3, 0.2),
            &Vec2::new(0.4, -0.5),
            &gen,
            &C,
            &FdPolicy::default(),
            BoostQuadraticForm::Consistent,
        )
        .unwrap();
        assert!(r.iter().any(|x| *x > 1e-2), "{m:?}: {r:?}");
    }
}

#[test]
fn superluminal_input_is_rejected() {
    let jet = Jet::new(0.0, Vec2::zeros(), Vec2::new(0.9, 0.9), Vec2::zeros(), Vec2::zeros());
    assert!(lorentz_transform_jet(&jet, &PoincareGen::new(0.0, Vec2::new(1.0, 0.0)), 0.5, &C).is_err());
}
