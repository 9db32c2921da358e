//! Effective potentials of the decoupled second-order equations and the
//! position-dependent mass functions.
//!
//! Every field here is assembled from closed-form pieces; nothing is
//! differentiated numerically.

use crate::catalog::Scenario;
use crate::error::{Error, Result};
use crate::model::{
    real_fn, Ambiguity, Coordinate, PartnerPotentials, RealFn, ScalarField, Superpotential,
    VelocityProfile, SAMPLING_SPAN,
};

/// Where a mass function came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MassOrigin {
    /// M = 1/v_f², the mass seen by both spinor components.
    FromVelocity,
    /// m(x) = m₀v₀²/v_f²(x).
    Mustafa,
}

#[derive(Debug, Clone)]
pub struct MassFunction {
    field: ScalarField,
    origin: MassOrigin,
}

impl MassFunction {
    /// `FromVelocity` masses must be strictly positive; the Mustafa mass may
    /// vanish identically for a massless carrier.
    pub fn new(field: ScalarField, origin: MassOrigin) -> Result<Self> {
        for x in field.domain().dense_samples(SAMPLING_SPAN, 10_000) {
            let value = field.eval(x);
            let ok = match origin {
                MassOrigin::FromVelocity => value > 0.0,
                MassOrigin::Mustafa => value >= 0.0,
            };
            if !ok {
                return Err(Error::NonPositiveMass { x, value });
            }
        }
        Ok(Self { field, origin })
    }

    pub fn field(&self) -> &ScalarField {
        &self.field
    }

    pub fn origin(&self) -> MassOrigin {
        self.origin
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.field.eval(x)
    }
}

fn sum(a: &ScalarField, b: &ScalarField) -> ScalarField {
    let order = a.derivative_order().min(b.derivative_order());
    let funcs: Vec<RealFn> = (0..=order)
        .map(|k| {
            let fa = a.derivative(k).expect("order bounded").clone();
            let fb = b.derivative(k).expect("order bounded").clone();
            real_fn(move |x| fa(x) + fb(x))
        })
        .collect();
    ScalarField::from_fns(a.domain(), funcs)
}

/// W² ± v_f W′, with its derivative when W″ is available.
fn susy_partner(w: &Superpotential, vf: &VelocityProfile, sign: f64) -> Result<ScalarField> {
    let [w0, w1] = w.field().fns::<2>("superpotential W")?;
    let v = vf.field().derivative(0).expect("evaluator").clone();
    let mut field = ScalarField::new(w.field().domain(), {
        let (w0, w1, v) = (w0.clone(), w1.clone(), v.clone());
        move |x| {
            let wx = w0(x);
            wx * wx + sign * v(x) * w1(x)
        }
    });
    if let (Some(w2), Some(v1)) = (
        w.field().derivative(2).cloned(),
        vf.field().derivative(1).cloned(),
    ) {
        field = field.with_derivative(move |x| {
            let d1 = w1(x);
            2.0 * w0(x) * d1 + sign * (v1(x) * d1 + v(x) * w2(x))
        });
    }
    Ok(field)
}

/// Δ = −v_f′²/4 − v_f v_f″/2, the difference between the x-space and
/// y-space partners.
pub fn kinetic_shift(vf: &VelocityProfile) -> Result<ScalarField> {
    let [v, v1, v2] = vf.field().fns::<3>("velocity profile v_f")?;
    let mut field = ScalarField::new(vf.field().domain(), {
        let (v, v1, v2) = (v.clone(), v1.clone(), v2.clone());
        move |x| {
            let d1 = v1(x);
            -0.25 * d1 * d1 - 0.5 * v(x) * v2(x)
        }
    });
    if let Some(v3) = vf.field().derivative(3).cloned() {
        field = field.with_derivative(move |x| -v1(x) * v2(x) - 0.5 * v(x) * v3(x));
    }
    Ok(field)
}

/// V± = W² ± v_f W′ as functions of x; composing with x(y) gives the
/// potentials of the transformed Schrödinger equation.
pub fn partner_potentials_y(s: &Scenario) -> Result<PartnerPotentials> {
    Ok(PartnerPotentials {
        v_plus: susy_partner(&s.w, &s.vf, 1.0)?,
        v_minus: susy_partner(&s.w, &s.vf, -1.0)?,
        coordinate: Coordinate::YSpace,
    })
}

/// V±_eff = W² ± v_f W′ − v_f′²/4 − v_f v_f″/2, the potentials of the
/// x-space flux-form equations with M = 1/v_f².
pub fn partner_potentials_x(s: &Scenario) -> Result<PartnerPotentials> {
    let y = partner_potentials_y(s)?;
    let shift = kinetic_shift(&s.vf)?;
    Ok(PartnerPotentials {
        v_plus: sum(&y.v_plus, &shift),
        v_minus: sum(&y.v_minus, &shift),
        coordinate: Coordinate::XSpace,
    })
}

/// ζ-form partners: V⁺ = ζ² − v_f′ζ + v_fζ′ − v_f v_f″ and
/// V⁻ = ζ² − (v_f ζ)′.
pub fn zeta_partner_potentials(zeta: &ScalarField, vf: &VelocityProfile) -> Result<PartnerPotentials> {
    let [z, z1] = zeta.fns::<2>("auxiliary function zeta")?;
    let [v, v1, v2] = vf.field().fns::<3>("velocity profile v_f")?;
    let domain = zeta.domain();
    let v_plus = ScalarField::new(domain, {
        let (z, z1, v, v1, v2) = (z.clone(), z1.clone(), v.clone(), v1.clone(), v2.clone());
        move |x| {
            let zx = z(x);
            let vx = v(x);
            zx * zx - v1(x) * zx + vx * z1(x) - vx * v2(x)
        }
    });
    let v_minus = ScalarField::new(domain, move |x| {
        let zx = z(x);
        zx * zx - (v1(x) * zx + v(x) * z1(x))
    });
    Ok(PartnerPotentials {
        v_plus,
        v_minus,
        coordinate: Coordinate::XSpace,
    })
}

/// V_eff = V + ½(β+1)M″/M² − [η(η+β+1) + β + 1]M′²/M³.
pub fn von_roos_effective_potential(
    base: &ScalarField,
    mass: &MassFunction,
    ambiguity: Ambiguity,
) -> Result<ScalarField> {
    let Ambiguity { eta, beta, gamma } = ambiguity;
    Ambiguity::new(eta, beta, gamma)?;
    let [m, m1, m2] = mass.field().fns::<3>("mass function M")?;
    let c_curv = 0.5 * (beta + 1.0);
    let c_grad = eta * (eta + beta + 1.0) + beta + 1.0;
    let v = base.derivative(0).expect("evaluator").clone();
    Ok(ScalarField::new(base.domain(), move |x| {
        let mx = m(x);
        let g = m1(x);
        v(x) + c_curv * m2(x) / (mx * mx) - c_grad * g * g / (mx * mx * mx)
    }))
}

/// M = 1/v_f² with M′ = −2v_f′/v_f³ and M″ = (6v_f′² − 2v_f v_f″)/v_f⁴.
pub fn mass_from_velocity(vf: &VelocityProfile) -> Result<MassFunction> {
    MassFunction::new(inverse_square(vf, 1.0)?, MassOrigin::FromVelocity)
}

/// m(x) = m₀v₀²/v_f²(x), which keeps m v_f² constant.
pub fn mustafa_mass(s: &Scenario) -> Result<MassFunction> {
    let m0 = s.system.m0;
    if !(m0 >= 0.0) {
        return Err(crate::error::invalid("m0", format!("must be >= 0, got {m0}")));
    }
    let scale = m0 * s.system.v0 * s.system.v0;
    MassFunction::new(inverse_square(&s.vf, scale)?, MassOrigin::Mustafa)
}

fn inverse_square(vf: &VelocityProfile, scale: f64) -> Result<ScalarField> {
    let [v, v1, v2] = vf.field().fns::<3>("velocity profile v_f")?;
    let field = ScalarField::new(vf.field().domain(), {
        let v = v.clone();
        move |x| {
            let vx = v(x);
            scale / (vx * vx)
        }
    })
    .with_derivative({
        let (v, v1) = (v.clone(), v1.clone());
        move |x| {
            let vx = v(x);
            -2.0 * scale * v1(x) / (vx * vx * vx)
        }
    })
    .with_derivative(move |x| {
        let vx = v(x);
        let d1 = v1(x);
        scale * (6.0 * d1 * d1 - 2.0 * vx * v2(x)) / (vx * vx * vx * vx)
    });
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::*;
    use crate::model::{Interval, SystemParams};

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / (1.0 + b.abs())
    }

    #[test]
    fn free_particle_partners_are_constant() {
        let s = make_free_particle(1.0, 1.5).unwrap();
        let p = partner_potentials_y(&s).unwrap();
        for x in [-3.0, 0.0, 0.4, 7.0] {
            assert_eq!(p.v_plus.eval(x), 2.25);
            assert_eq!(p.v_minus.eval(x), 2.25);
        }
    }

    #[test]
    fn oscillator_partners() {
        let s = make_shifted_oscillator(1.0, 1.0, 1.0, 0.0).unwrap();
        let p = partner_potentials_y(&s).unwrap();
        for x in [-1.0f64, 0.0, 0.5, 1.3] {
            let e2 = (2.0 * x).exp();
            assert!(rel(p.v_plus.eval(x), e2 + 1.0) < 1e-14);
            assert!(rel(p.v_minus.eval(x), e2 - 1.0) < 1e-14);
        }
        let (v0, al, a, b) = (1.3, 0.7, 0.9, 1.1);
        let s = make_shifted_oscillator(v0, al, a, b).unwrap();
        let p = partner_potentials_y(&s).unwrap();
        for x in [-1.0, 0.2, 1.9] {
            let base = a * a * (2.0 * al * x).exp() + 2.0 * a * b * (al * x).exp() + b * b;
            assert!(rel(p.v_plus.eval(x), base + v0 * a * al) < 1e-13);
            assert!(rel(p.v_minus.eval(x), base - v0 * a * al) < 1e-13);
        }
    }

    #[test]
    fn coulomb_partners_are_morse_type() {
        let (v0, al, l) = (1.2, 0.8, 2.0);
        let s = make_coulomb(v0, al, l).unwrap();
        let p = partner_potentials_y(&s).unwrap();
        let (a, b) = (l * v0 * al, 1.0 / (2.0 * l));
        for x in [-2.0, 0.0, 1.5] {
            let e1 = (-al * x).exp();
            let morse = |sgn: f64| (a * a - sgn * v0 * a * al) * e1 * e1 - 2.0 * a * b * e1 + b * b;
            assert!(rel(p.v_plus.eval(x), morse(1.0)) < 1e-13);
            assert!(rel(p.v_minus.eval(x), morse(-1.0)) < 1e-13);
        }
    }

    fn cprs_minus(x: f64) -> f64 {
        let u = 2.0 * x * x + 1.0;
        x * x + 8.0 * (2.0 * x * x - 1.0) / (u * u)
    }

    fn double_well(x: f64) -> f64 {
        let u = 2.0 * x * x + 1.0;
        x * x + 8.0 / u + 32.0 * x * x / u.powi(2) + 256.0 / u.powi(3) - 2048.0 * x * x / u.powi(4)
    }

    #[test]
    fn cprs_x_space_partners() {
        let s = make_cprs().unwrap();
        let p = partner_potentials_x(&s).unwrap();
        assert!((p.v_minus.eval(0.0) + 8.0).abs() < 1e-13);
        assert!((p.v_minus.eval(1.0) - 17.0 / 9.0).abs() < 1e-13);
        assert!((p.v_plus.eval(0.0) - 264.0).abs() < 1e-12);
        for x in [-2.5, -0.3, 0.7, 1.9, 4.0] {
            assert!(rel(p.v_minus.eval(x), cprs_minus(x)) < 1e-13);
            assert!(rel(p.v_plus.eval(x), double_well(x)) < 1e-13);
        }
    }

    #[test]
    fn zeta_form_examples() {
        let s = make_cprs().unwrap();
        let p = zeta_partner_potentials(s.zeta.as_ref().unwrap(), &s.vf).unwrap();
        for x in [-2.0, -0.5, 0.0, 0.3, 1.0, 3.0] {
            assert!(rel(p.v_minus.eval(x), cprs_minus(x)) < 1e-13);
            assert!(rel(p.v_plus.eval(x), double_well(x)) < 1e-13);
        }
        let zero = ScalarField::constant(Interval::real_line(), 0.0);
        let flat = VelocityProfile::constant(Interval::real_line(), 2.0).unwrap();
        let p = zeta_partner_potentials(&zero, &flat).unwrap();
        assert_eq!(p.v_plus.eval(1.0), 0.0);
        assert_eq!(p.v_minus.eval(1.0), 0.0);
    }

    #[test]
    fn constant_velocity_reduces_to_standard_susy() {
        let w = Superpotential::new(ScalarField::identity(Interval::real_line())).unwrap();
        let vf = VelocityProfile::constant(Interval::real_line(), 1.0).unwrap();
        let s = make_custom(w, vf, SystemParams::massless(1.0)).unwrap();
        let px = partner_potentials_x(&s).unwrap();
        for x in [-1.0, 0.0, 2.0] {
            assert_eq!(px.v_plus.eval(x), x * x + 1.0);
            assert_eq!(px.v_minus.eval(x), x * x - 1.0);
        }
        let w = Superpotential::new(
            ScalarField::new(Interval::real_line(), f64::tanh)
                .with_derivative(|x| 1.0 / x.cosh().powi(2)),
        )
        .unwrap();
        let vf = VelocityProfile::constant(Interval::real_line(), 1.0).unwrap();
        let s = make_custom(w, vf, SystemParams::massless(1.0)).unwrap();
        let p = partner_potentials_y(&s).unwrap();
        // W² + W′ = 1, W² − W′ = 1 − 2 sech²
        for x in [-1.0, 0.0, 0.8] {
            assert!((p.v_plus.eval(x) - 1.0).abs() < 1e-14);
            assert!((p.v_minus.eval(x) - (1.0 - 2.0 / x.cosh().powi(2))).abs() < 1e-14);
        }
    }

    #[test]
    fn potential_derivatives_are_closed_form_consistent() {
        use crate::model::{check_derivatives, make_grid};
        let g = make_grid(-2.0, 2.0, 1601).unwrap();
        for s in reference_scenarios() {
            for p in [partner_potentials_y(&s).unwrap(), partner_potentials_x(&s).unwrap()] {
                for f in [&p.v_plus, &p.v_minus] {
                    // CPRS partners peak at 264 with steep flanks; the
                    // h² ratio is the real check
                    let r = check_derivatives(f, &g, 1e-2).unwrap();
                    assert!(r.pass, "{}: {r:?}", s.name);
                    for c in &r.checks {
                        assert!(c.ratio.is_none_or(|q| (3.5..=4.5).contains(&q)), "{}: {c:?}", s.name);
                    }
                }
            }
        }
    }

    #[test]
    fn mass_functions() {
        let flat = VelocityProfile::constant(Interval::real_line(), 1.0).unwrap();
        let m = mass_from_velocity(&flat).unwrap();
        assert_eq!(m.eval(3.0), 1.0);
        assert_eq!(m.field().d1(3.0), Some(0.0));

        let m = mass_from_velocity(&cprs_velocity()).unwrap();
        assert_eq!(m.eval(0.0), 1.0 / 64.0);
        assert_eq!(m.origin(), MassOrigin::FromVelocity);

        let s = make_coulomb(1.0, 0.5, 2.0).unwrap();
        let m = mass_from_velocity(&s.vf).unwrap();
        for x in [-1.0, 0.0, 2.0] {
            assert!(rel(m.eval(x), (2.0 * 0.5 * x).exp()) < 1e-14);
        }
    }

    #[test]
    fn mustafa_mass_examples() {
        let s = make_coulomb(1.0, 0.7, 2.0)
            .unwrap()
            .with_system(SystemParams::new(1.0, 1.0, Ambiguity::default()).unwrap());
        let m = mustafa_mass(&s).unwrap();
        for x in [-1.0, 0.5, 2.0] {
            assert!(rel(m.eval(x), (1.4 * x).exp()) < 1e-14);
            // m v_f² is constant
            assert!(rel(m.eval(x) * s.vf.eval(x).powi(2), 1.0) < 1e-14);
        }
        let massless = make_coulomb(1.0, 0.7, 2.0).unwrap();
        assert_eq!(mustafa_mass(&massless).unwrap().eval(0.3), 0.0);

        let w = Superpotential::new(ScalarField::identity(Interval::real_line())).unwrap();
        let vf = VelocityProfile::constant(Interval::real_line(), 3.0).unwrap();
        let s = make_custom(w, vf, SystemParams::new(2.0, 3.0, Ambiguity::default()).unwrap())
            .unwrap();
        assert!(rel(mustafa_mass(&s).unwrap().eval(1.0), 2.0) < 1e-15);
    }

    #[test]
    fn von_roos_ben_daniel_duke_is_identity() {
        let s = make_cprs().unwrap();
        let base = partner_potentials_x(&s).unwrap().v_minus;
        let m = mass_from_velocity(&s.vf).unwrap();
        let v = von_roos_effective_potential(&base, &m, Ambiguity::ben_daniel_duke()).unwrap();
        for x in [-3.0, -0.1, 0.0, 1.7] {
            assert_eq!(v.eval(x).to_bits(), base.eval(x).to_bits());
        }
    }

    #[test]
    fn von_roos_constant_mass_is_identity() {
        let base = ScalarField::new(Interval::real_line(), |x| x * x);
        let flat = VelocityProfile::constant(Interval::real_line(), 2.0).unwrap();
        let m = mass_from_velocity(&flat).unwrap();
        for amb in [Ambiguity::bastard(), Ambiguity::zhu_kroemer(), Ambiguity::redistributed()] {
            let v = von_roos_effective_potential(&base, &m, amb).unwrap();
            assert_eq!(v.eval(1.5), 2.25);
        }
        let bad = Ambiguity { eta: 0.0, beta: 0.0, gamma: 0.0 };
        assert!(matches!(
            von_roos_effective_potential(&base, &m, bad),
            Err(Error::AmbiguityConstraint { .. })
        ));
    }

    #[test]
    fn von_roos_zhu_kroemer_against_hand_differentiated_mass() {
        // M = (2x²+1)²/64, M′ = x(2x²+1)/8, M″ = (6x²+1)/8, differentiated by hand.
        let oracle = |x: f64| {
            let u = 2.0 * x * x + 1.0;
            let m = u * u / 64.0;
            let m1 = x * u / 8.0;
            let m2 = (6.0 * x * x + 1.0) / 8.0;
            0.5 * m2 / (m * m) - 0.75 * m1 * m1 / (m * m * m)
        };
        let zero = ScalarField::constant(Interval::real_line(), 0.0);
        let m = mass_from_velocity(&cprs_velocity()).unwrap();
        let v = von_roos_effective_potential(&zero, &m, Ambiguity::zhu_kroemer()).unwrap();
        assert!((v.eval(0.0) - 256.0).abs() < 1e-10);
        assert!((v.eval(1.0) + 1280.0 / 81.0).abs() < 1e-11);
        for x in [-2.0, -0.6, 0.25, 1.0, 3.0] {
            assert!(rel(v.eval(x), oracle(x)) < 1e-12, "x = {x}");
        }
    }
}
