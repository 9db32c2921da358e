//! Algebraic identities between the y-space, x-space and ζ-form partners.

use dirac_lfv_core::catalog::*;
use dirac_lfv_core::model::{Ambiguity, Interval, ScalarField, VelocityProfile};
use dirac_lfv_core::potentials::*;
use dirac_lfv_core::problems::w_tilde;
use dirac_lfv_core::transform::build_map;
use dirac_lfv_core::Component;
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + b.abs())
}

fn scenario() -> impl Strategy<Value = Scenario> {
    prop_oneof![
        (0.2f64..3.0, -2.0f64..2.0).prop_map(|(a, w0)| make_free_particle(a, w0).unwrap()),
        (0.5f64..2.0, 0.3f64..2.0, 0.3f64..2.0, -1.5f64..1.5)
            .prop_map(|(v0, al, a, b)| make_shifted_oscillator(v0, al, a, b).unwrap()),
        (0.5f64..2.0, 0.3f64..2.0, 0.6f64..4.0).prop_map(|(v0, al, l)| make_coulomb(v0, al, l).unwrap()),
        Just(make_cprs().unwrap()),
    ]
}

/// W̃ and dW̃/dy written out per scenario, independently of the catalog.
fn w_tilde_oracle(s: &Scenario, y: f64) -> Option<(f64, f64)> {
    match s.kind {
        ScenarioKind::ShiftedOscillator { v0, alpha, a, b } => {
            let c = v0 * a * alpha;
            Some((c * y + b, c))
        }
        ScenarioKind::Coulomb { l, .. } => Some((l / y - 0.5 / l, -l / (y * y))),
        ScenarioKind::FreeParticle { omega0, .. } => Some((omega0, 0.0)),
        _ => None,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn y_space_partners_factorize(s in scenario(), t in 0.05f64..0.95) {
        let map = build_map(&s, 0.0).unwrap();
        let pp = partner_potentials_y(&s).unwrap();
        let wt = w_tilde(&s).unwrap();
        // sample y through an x in a moderate window
        let x = -3.0 + 6.0 * t;
        let y = map.forward(x);
        let xb = map.inverse(y);
        let (w, dw) = w_tilde_oracle(&s, y).unwrap_or_else(|| {
            // chain rule: dW̃/dy = v_f(x)·W′(x)
            (s.w.eval(xb), s.vf.eval(xb) * s.w.field().d1(xb).unwrap())
        });
        prop_assert!(rel(wt(y), w) < 1e-10);
        for c in Component::both() {
            let want = w * w + c.sign() * dw;
            let got = pp.get(c).eval(xb);
            prop_assert!(rel(got, want) < 1e-10, "{} {c}: {got} vs {want}", s.name);
        }
    }

    #[test]
    fn x_minus_y_is_the_kinetic_shift(s in scenario(), x in -4.0f64..4.0) {
        let px = partner_potentials_x(&s).unwrap();
        let py = partner_potentials_y(&s).unwrap();
        let (v, v1, v2) = (
            s.vf.eval(x),
            s.vf.field().d1(x).unwrap(),
            s.vf.field().d2(x).unwrap(),
        );
        let delta = -0.25 * v1 * v1 - 0.5 * v * v2;
        for c in Component::both() {
            let diff = px.get(c).eval(x) - py.get(c).eval(x);
            let scale = 1.0 + px.get(c).eval(x).abs() + py.get(c).eval(x).abs();
            prop_assert!((diff - delta).abs() <= 1e-12 * scale, "{} {c}", s.name);
        }
    }

    #[test]
    fn zeta_form_matches_superpotential_form(k in -3.0f64..3.0, c0 in -1.0f64..1.0, q in 0.05f64..0.8, x in -3.0f64..3.0) {
        // ζ = k·x + c₀ with v_f = 1 + q·x²
        let zeta = ScalarField::new(Interval::real_line(), move |x| k * x + c0)
            .with_derivative(move |_| k)
            .with_derivative(|_| 0.0);
        let vf = VelocityProfile::new(
            ScalarField::new(Interval::real_line(), move |x| 1.0 + q * x * x)
                .with_derivative(move |x| 2.0 * q * x)
                .with_derivative(move |_| 2.0 * q)
                .with_derivative(|_| 0.0),
            1.0,
        )
        .unwrap();
        let w = zeta_to_superpotential(&zeta, &vf).unwrap();
        let s = make_custom(w, vf.clone(), dirac_lfv_core::SystemParams::massless(1.0)).unwrap();
        let via_w = partner_potentials_x(&s).unwrap();
        let via_zeta = zeta_partner_potentials(&zeta, &vf).unwrap();
        for c in Component::both() {
            let a = via_w.get(c).eval(x);
            let b = via_zeta.get(c).eval(x);
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs())), "{c}: {a} vs {b}");
        }
    }

    #[test]
    fn ben_daniel_duke_leaves_the_potential_unchanged(s in scenario(), x in -3.0f64..3.0) {
        let m = mass_from_velocity(&s.vf).unwrap();
        let base = partner_potentials_x(&s).unwrap().v_minus;
        let eff = von_roos_effective_potential(&base, &m, Ambiguity::ben_daniel_duke()).unwrap();
        prop_assert_eq!(eff.eval(x), base.eval(x));
    }
}

#[test]
fn cprs_reference_values() {
    let s = make_cprs().unwrap();
    let px = partner_potentials_x(&s).unwrap();
    assert_eq!(px.v_minus.eval(0.0), -8.0);
    assert!((px.v_minus.eval(1.0) - 17.0 / 9.0).abs() < 1e-14);
    assert!((px.v_plus.eval(0.0) - 264.0).abs() < 1e-12);
    let m = mass_from_velocity(&s.vf).unwrap();
    assert_eq!(m.eval(0.0), 1.0 / 64.0);
}

#[test]
fn mustafa_mass_examples() {
    let s = make_coulomb(1.0, 0.7, 2.0)
        .unwrap()
        .with_system(dirac_lfv_core::SystemParams::new(1.0, 1.0, Ambiguity::default()).unwrap());
    let m = mustafa_mass(&s).unwrap();
    for x in [-1.0f64, 0.0, 2.0] {
        assert!(rel(m.eval(x), (1.4 * x).exp()) < 1e-14);
    }
    let massless = make_coulomb(1.0, 0.7, 2.0).unwrap();
    assert_eq!(mustafa_mass(&massless).unwrap().eval(0.3), 0.0);
}
