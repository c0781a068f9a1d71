use planar_spin::equation::{integrate_worldline, Integration, Trajectory};
use planar_spin::hamiltonian::{
    canonical_flow, compare_flows, energy_along, first_momentum, hamiltonian_forms, inverse_legendre, jacobi_block,
    momenta, momentum_along, relative_drift, typeset_matrix, CanonicalState, REGULAR_SPEED,
};
use planar_spin::{Convention, Error, Mat2, Vec2};
use proptest::prelude::*;

const C: Convention = Convention::DEFAULT;

fn subluminal(max: f64) -> impl Strategy<Value = Vec2> {
    (0.0..max, 0.0..std::f64::consts::TAU).prop_map(|(r, phi)| Vec2::new(r * phi.cos(), r * phi.sin()))
}

fn unit_box() -> impl Strategy<Value = Vec2> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b)| Vec2::new(a, b))
}

fn demo(integration: Integration) -> Trajectory {
    integrate_worldline(Vec2::zeros(), Vec2::new(0.2, 0.1), Vec2::new(0.1, -0.2), 1.0, (0.0, 10.0), &integration, &C)
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn legendre_roundtrip(v in subluminal(0.8), vp in unit_box(), mu in -3.0..3.0f64) {
        let (p, pp) = momenta(&v, &vp, mu, &C).unwrap();
        let (v2, vp2) = inverse_legendre(&p, &pp, mu, &C).unwrap();
        prop_assert!((v2 - v).amax() < 1e-9, "{v:?} -> {v2:?}");
        prop_assert!((vp2 - vp).amax() < 1e-8 * (1.0 + vp.amax()), "{vp:?} -> {vp2:?}");
    }

    #[test]
    fn hamiltonian_forms_agree(v in subluminal(0.9), vp in unit_box(), mu in -3.0..3.0f64) {
        let h = hamiltonian_forms(&v, &vp, mu, &C).unwrap();
        prop_assert!((h.wedge_form - h.momentum_form).abs() < 1e-12 * (1.0 + h.wedge_form.abs()));
    }

    #[test]
    fn jacobi_block_matches_differences(v in subluminal(0.8)) {
        let j = jacobi_block(&v, &C).unwrap();
        let h = 1e-6;
        let mut fd = Mat2::zeros();
        for a in 0..2 {
            let mut e = Vec2::zeros();
            e[a] = h;
            let col = (first_momentum(&(v + e), &C).unwrap() - first_momentum(&(v - e), &C).unwrap()) / (2.0 * h);
            fd.set_column(a, &col);
        }
        prop_assert!((j.dpp_dv - fd).amax() < 1e-7 * (1.0 + fd.amax()));
        prop_assert!((j.dv_dpp * j.dpp_dv - Mat2::identity()).amax() < 1e-9);
        prop_assert!((j.delta - typeset_matrix(&v, &C).unwrap().determinant()).abs() < 1e-15);
    }
}

#[test]
fn direct_flow_conserves_momentum_and_energy() {
    let traj = demo(Integration::rk4(1e-3));
    let p = momentum_along(&traj, &C).unwrap();
    let drift = p.iter().map(|q| (q - p[0]).amax()).fold(0.0f64, f64::max) / p[0].amax();
    assert!(drift < 1e-8, "{drift:e}");
    let e = relative_drift(energy_along(&traj, &C).unwrap());
    assert!(e < 1e-8, "{e:e}");
}

#[test]
fn canonical_flow_tracks_direct_flow() {
    let integration = Integration::dopri5(1e-2, 1e-11, 1e-12);
    let direct = demo(integration);
    let first = direct.first();
    let state = CanonicalState::from_velocities(0.0, first.x, &first.v, &first.vp, 1.0, &C).unwrap();
    let canonical = canonical_flow(&state, 1.0, 10.0, &integration, &C).unwrap();
    let e = relative_drift(canonical.energy.iter().copied());
    assert!(e < 1e-8, "{e:e}");
    let cmp = compare_flows(&direct, &canonical).unwrap();
    assert!(cmp.max_deviation < 1e-6, "{:e}", cmp.max_deviation);
}

#[test]
fn canonical_flow_with_other_mass_diverges() {
    let integration = Integration::rk4(1e-3);
    let direct = demo(integration);
    let first = direct.first();
    let state = CanonicalState::from_velocities(0.0, first.x, &first.v, &first.vp, 1.0, &C).unwrap();
    let canonical = canonical_flow(&state, 1.5, 10.0, &integration, &C).unwrap();
    let cmp = compare_flows(&direct, &canonical).unwrap();
    assert!(cmp.max_deviation > 1e-3, "{:e}", cmp.max_deviation);
}

#[test]
fn velocities_past_the_fold_are_rejected() {
    // the fold is not a circle: the diagonal stays regular past REGULAR_SPEED
    let diagonal = Vec2::new(0.65, 0.65);
    assert!(diagonal.norm() > REGULAR_SPEED);
    assert!(CanonicalState::from_velocities(0.0, Vec2::zeros(), &diagonal, &Vec2::zeros(), 1.0, &C).is_ok());
    let v = Vec2::new(0.7, 0.45);
    let r = CanonicalState::from_velocities(0.0, Vec2::zeros(), &v, &Vec2::zeros(), 1.0, &C);
    assert!(matches!(r, Err(Error::BeyondFold { .. })), "{r:?}");
}
