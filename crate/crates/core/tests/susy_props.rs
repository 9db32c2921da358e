//! Partner structure in y: degeneracy of the refined spectra, annihilation
//! of zero modes, intertwining and adjointness of A = d/dy + W̃.

use dirac_lfv_core::catalog::*;
use dirac_lfv_core::eigensolver::{lowest_eigenpairs, RefineOptions, DEFAULT_SEED};
use dirac_lfv_core::model::{Grid1D, Interval, SampledFunction, ScalarField, Superpotential, VelocityProfile};
use dirac_lfv_core::problems::{self, Problem};
use dirac_lfv_core::susy::*;
use dirac_lfv_core::{Component, SystemParams};
use proptest::prelude::*;

fn constant_velocity_oscillator() -> Scenario {
    let domain = Interval::new(-10.0, 10.0).unwrap();
    let w = Superpotential::new(
        ScalarField::new(domain, |x| x)
            .with_derivative(|_| 1.0)
            .with_derivative(|_| 0.0),
    )
    .unwrap();
    let vf = VelocityProfile::constant(domain, 1.0).unwrap();
    make_custom(w, vf, SystemParams::massless(1.0)).unwrap()
}

#[test]
fn every_cataloged_scenario_pairs() {
    for s in reference_scenarios() {
        let d = problems::default_y_domain(&s, 5).unwrap();
        let check = check_scenario_degeneracy(&s, d, 5, RefineOptions::new(d.n0, 1e-6), DEFAULT_SEED).unwrap();
        let r = &check.report;
        assert!(r.pass, "{}: {r:?}\nplus {:?}\nminus {:?}", s.name, check.plus.eps(), check.minus.eps());
        assert!(r.matched.len() >= 3, "{}: {r:?}", s.name);
    }
}

#[test]
fn coulomb_ground_state_has_no_partner() {
    let s = make_coulomb(1.0, 1.0, 2.0).unwrap();
    let d = problems::default_y_domain(&s, 4).unwrap();
    let check = check_scenario_degeneracy(&s, d, 4, RefineOptions::new(d.n0, 1e-7), DEFAULT_SEED).unwrap();
    assert_eq!(check.report.unpaired.len(), 1);
    let (c, i, e) = check.report.unpaired[0];
    assert_eq!((c, i), (Component::Plus, 0));
    assert!(e.abs() < 1e-8);
    assert!((check.plus.eps()[1] - 5.0 / 144.0).abs() < 1e-7);
}

fn ground_state(s: &Scenario, component: Component, lo: f64, hi: f64, n: usize) -> SampledFunction {
    let b = problems::operator_builder(s, Problem::YSpace, component).unwrap();
    let g = Grid1D::new(lo, hi, n).unwrap();
    let spec = lowest_eigenpairs(&b(&g).unwrap(), 1, DEFAULT_SEED).unwrap();
    SampledFunction {
        grid: g,
        values: spec.states[0].clone(),
    }
}

fn relative_image_norm(phi: &SampledFunction, w: &dyn Fn(f64) -> f64, dir: Direction) -> f64 {
    let image = apply_intertwiner(phi, w, dir).image;
    (image.norm_sq() / phi.norm_sq()).sqrt()
}

#[test]
fn zero_modes_are_annihilated() {
    // CPRS: e^{−∫W̃} is the ground state of H⁻. W̃ turns over within
    // |y| ≲ 0.05 and the mode decays like e^{−3|y|}, so a tight fine grid.
    let s = make_cprs().unwrap();
    let phi = ground_state(&s, Component::Minus, -10.0, 10.0, 32001);
    let w = problems::w_tilde(&s).unwrap();
    let r = relative_image_norm(&phi, &*w, Direction::MinusToPlus);
    assert!(r <= 1e-4, "cprs: {r:e}");
    // Coulomb: y^l e^{−y/2l} is the ground state of H⁺, killed by A†
    let s = make_coulomb(1.0, 1.0, 2.0).unwrap();
    let phi = ground_state(&s, Component::Plus, 1e-3, 150.0, 8001);
    let w = problems::w_tilde(&s).unwrap();
    let r = relative_image_norm(&phi, &*w, Direction::PlusToMinus);
    assert!(r <= 1e-4, "coulomb: {r:e}");
    // constant-velocity oscillator, ground of H⁻ = −d² + y² − 1
    let s = constant_velocity_oscillator();
    let phi = ground_state(&s, Component::Minus, -10.0, 10.0, 4001);
    let w = problems::w_tilde(&s).unwrap();
    let r = relative_image_norm(&phi, &*w, Direction::MinusToPlus);
    assert!(r <= 1e-4, "oscillator: {r:e}");
}

#[test]
fn intertwiner_maps_minus_states_to_plus_states() {
    let s = constant_velocity_oscillator();
    let d = problems::default_y_domain(&s, 4).unwrap();
    let rep = check_intertwining(&s, d, 4, 1e-4).unwrap();
    assert!(rep.entries[0].annihilated, "{rep:?}");
    assert_eq!(rep.non_annihilated().count(), 3);
    assert!(rep.pass, "{rep:?}");

    let s = make_free_particle(1.0, 0.5).unwrap();
    let d = problems::default_y_domain(&s, 3).unwrap();
    let rep = check_intertwining(&s, d, 3, 1e-4).unwrap();
    assert_eq!(rep.non_annihilated().count(), 3);
    assert!(rep.pass, "{rep:?}");
}

fn bump(c: f64, w: f64) -> impl Fn(f64) -> f64 {
    move |y: f64| {
        let t = (y - c) / w;
        if t.abs() < 1.0 {
            (-1.0 / (1.0 - t * t)).exp()
        } else {
            0.0
        }
    }
}

proptest! {
    #[test]
    fn intertwiner_and_adjoint_are_adjoint(
        c1 in -2.0f64..2.0, w1 in 0.5f64..2.0,
        c2 in -2.0f64..2.0, w2 in 0.5f64..2.0,
        k in -2.0f64..2.0, q in -1.0f64..1.0,
    ) {
        let g = Grid1D::new(-5.0, 5.0, 2001).unwrap();
        let f1 = bump(c1, w1);
        let f2 = bump(c2, w2);
        let phi = SampledFunction::from_fn(g, &f1);
        let psi = SampledFunction::from_fn(g, |y| (1.0 + q * y) * f2(y));
        let wt = move |y: f64| k * y + q * y * y;
        let defect = adjointness_defect(&phi, &psi, &wt);
        prop_assert!(defect <= 1e-6, "{defect:e}");
    }
}
