//! Builders for the four exactly solvable (W, v_f) systems and for
//! user-defined profiles.

use std::collections::BTreeMap;
use std::f64::consts::SQRT_2;

use crate::error::{invalid, Result};
use crate::model::{Interval, ScalarField, Superpotential, SystemParams, VelocityProfile};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScenarioKind {
    FreeParticle { a: f64, omega0: f64 },
    ShiftedOscillator { v0: f64, alpha: f64, a: f64, b: f64 },
    Coulomb { v0: f64, alpha: f64, l: f64 },
    Cprs,
    Custom,
}

impl ScenarioKind {
    pub fn name(&self) -> &'static str {
        match self {
            ScenarioKind::FreeParticle { .. } => "free_particle",
            ScenarioKind::ShiftedOscillator { .. } => "shifted_oscillator",
            ScenarioKind::Coulomb { .. } => "coulomb",
            ScenarioKind::Cprs => "cprs",
            ScenarioKind::Custom => "custom",
        }
    }
}

/// A (W, v_f) pair with its parameters and x-domain.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub kind: ScenarioKind,
    pub w: Superpotential,
    pub vf: VelocityProfile,
    /// Auxiliary function ζ when W was built as ζ − v_f′/2.
    pub zeta: Option<ScalarField>,
    pub params: BTreeMap<String, f64>,
    pub x_domain: Interval,
    pub analytic_available: bool,
    pub system: SystemParams,
}

impl Scenario {
    pub fn with_system(mut self, system: SystemParams) -> Self {
        self.system = system;
        self
    }

    /// Oscillator frequency ω = √2·v₀aα of the shifted oscillator.
    pub fn oscillator_omega(&self) -> Option<f64> {
        match self.kind {
            ScenarioKind::ShiftedOscillator { v0, alpha, a, .. } => Some(SQRT_2 * v0 * a * alpha),
            _ => None,
        }
    }
}

fn params(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn require_finite(name: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(invalid(name, format!("must be finite, got {value}")))
    }
}

/// v₀·e^{−αx} with derivatives through third order.
fn exponential_velocity(v0: f64, alpha: f64) -> Result<VelocityProfile> {
    let mut field = ScalarField::new(Interval::real_line(), move |x| v0 * (-alpha * x).exp());
    for k in 1..=3 {
        let c = v0 * (-alpha).powi(k);
        field = field.with_derivative(move |x| c * (-alpha * x).exp());
    }
    VelocityProfile::new(field, v0)
}

/// c·e^{κx} + shift with derivatives through third order.
fn exponential_field(c: f64, kappa: f64, shift: f64) -> ScalarField {
    let mut field = ScalarField::new(Interval::real_line(), move |x| c * (kappa * x).exp() + shift);
    for k in 1..=3 {
        let ck = c * kappa.powi(k);
        field = field.with_derivative(move |x| ck * (kappa * x).exp());
    }
    field
}

/// Constant W = ω₀ with v_f = a²x² + 1.
pub fn make_free_particle(a: f64, omega0: f64) -> Result<Scenario> {
    require_finite("a", a)?;
    require_finite("omega0", omega0)?;
    if a == 0.0 {
        return Err(invalid(
            "a",
            "must be non-zero: at a = 0 the y-image is the whole line and no well forms",
        ));
    }
    let a2 = a * a;
    let vf = ScalarField::new(Interval::real_line(), move |x| a2 * x * x + 1.0)
        .with_derivative(move |x| 2.0 * a2 * x)
        .with_derivative(move |_| 2.0 * a2)
        .with_derivative(|_| 0.0);
    let w = ScalarField::constant(Interval::real_line(), omega0);
    Ok(Scenario {
        name: "free_particle".into(),
        kind: ScenarioKind::FreeParticle { a, omega0 },
        w: Superpotential::new(w)?,
        vf: VelocityProfile::new(vf, 1.0)?,
        zeta: None,
        params: params(&[("a", a), ("omega0", omega0)]),
        x_domain: Interval::real_line(),
        analytic_available: true,
        system: SystemParams::massless(1.0),
    })
}

/// W = a·e^{αx} + b with v_f = v₀e^{−αx}; maps to a half-line oscillator.
pub fn make_shifted_oscillator(v0: f64, alpha: f64, a: f64, b: f64) -> Result<Scenario> {
    for (name, value) in [("v0", v0), ("alpha", alpha), ("a", a), ("b", b)] {
        require_finite(name, value)?;
    }
    if v0 <= 0.0 {
        return Err(invalid("v0", format!("must be > 0, got {v0}")));
    }
    if alpha == 0.0 {
        return Err(invalid("alpha", "must be non-zero"));
    }
    if a == 0.0 {
        return Err(invalid("a", "must be non-zero"));
    }
    Ok(Scenario {
        name: "shifted_oscillator".into(),
        kind: ScenarioKind::ShiftedOscillator { v0, alpha, a, b },
        w: Superpotential::new(exponential_field(a, alpha, b))?,
        vf: exponential_velocity(v0, alpha)?,
        zeta: None,
        params: params(&[("v0", v0), ("alpha", alpha), ("a", a), ("b", b)]),
        x_domain: Interval::real_line(),
        analytic_available: b == 0.0,
        system: SystemParams::massless(v0),
    })
}

/// W = a·e^{−αx} − b with a = l·v₀α and b = 1/(2l); v_f = v₀e^{−αx}.
pub fn make_coulomb(v0: f64, alpha: f64, l: f64) -> Result<Scenario> {
    for (name, value) in [("v0", v0), ("alpha", alpha), ("l", l)] {
        require_finite(name, value)?;
    }
    if v0 <= 0.0 {
        return Err(invalid("v0", format!("must be > 0, got {v0}")));
    }
    if alpha == 0.0 {
        return Err(invalid("alpha", "must be non-zero"));
    }
    if l <= 0.5 {
        return Err(invalid(
            "l",
            format!(
                "must exceed 1/2 so that sqrt(1 + 4l(l-1)) = 2l - 1 stays the positive root, got {l}"
            ),
        ));
    }
    let a = l * v0 * alpha;
    let b = 1.0 / (2.0 * l);
    Ok(Scenario {
        name: "coulomb".into(),
        kind: ScenarioKind::Coulomb { v0, alpha, l },
        w: Superpotential::new(exponential_field(a, -alpha, -b))?,
        vf: exponential_velocity(v0, alpha)?,
        zeta: None,
        params: params(&[("v0", v0), ("alpha", alpha), ("l", l), ("a", a), ("b", b)]),
        x_domain: Interval::real_line(),
        analytic_available: true,
        system: SystemParams::massless(v0),
    })
}

/// The velocity 8/(2x² + 1) with derivatives through third order.
pub fn cprs_velocity() -> VelocityProfile {
    let field = ScalarField::new(Interval::real_line(), |x| 8.0 / (2.0 * x * x + 1.0))
        .with_derivative(|x| {
            let u = 2.0 * x * x + 1.0;
            -32.0 * x / (u * u)
        })
        .with_derivative(|x| {
            let u = 2.0 * x * x + 1.0;
            32.0 * (6.0 * x * x - 1.0) / (u * u * u)
        })
        .with_derivative(|x| {
            let u = 2.0 * x * x + 1.0;
            768.0 * x * (1.0 - 2.0 * x * x) / (u * u * u * u)
        });
    VelocityProfile::new(field, 8.0).expect("8/(2x²+1) is positive")
}

/// ζ(x) = x with v_f = 8/(2x² + 1).
pub fn make_cprs() -> Result<Scenario> {
    let zeta = ScalarField::identity(Interval::real_line());
    let vf = cprs_velocity();
    let w = zeta_to_superpotential(&zeta, &vf)?;
    Ok(Scenario {
        name: "cprs".into(),
        kind: ScenarioKind::Cprs,
        w,
        vf,
        zeta: Some(zeta),
        params: BTreeMap::new(),
        x_domain: Interval::real_line(),
        analytic_available: true,
        system: SystemParams::massless(8.0),
    })
}

/// User-supplied W and v_f. v_f needs closed-form d1 and d2 so that the
/// x-space potentials can be assembled.
pub fn make_custom(w: Superpotential, vf: VelocityProfile, system: SystemParams) -> Result<Scenario> {
    w.field().require(1, "custom superpotential W")?;
    vf.field().require(2, "custom velocity profile v_f")?;
    let x_domain = vf.field().domain();
    Ok(Scenario {
        name: "custom".into(),
        kind: ScenarioKind::Custom,
        w,
        vf,
        zeta: None,
        params: BTreeMap::new(),
        x_domain,
        analytic_available: false,
        system,
    })
}

/// W = ζ − v_f′/2, W′ = ζ′ − v_f″/2 (and W″ when ζ″ and v_f‴ exist).
pub fn zeta_to_superpotential(zeta: &ScalarField, vf: &VelocityProfile) -> Result<Superpotential> {
    let [z, z1] = zeta.fns::<2>("auxiliary function zeta")?;
    let [_, v1, v2] = vf.field().fns::<3>("velocity profile v_f")?;
    let mut w = ScalarField::new(zeta.domain(), {
        let (z, v1) = (z.clone(), v1.clone());
        move |x| z(x) - 0.5 * v1(x)
    })
    .with_derivative(move |x| z1(x) - 0.5 * v2(x));
    if let (Some(z2), Some(v3)) = (zeta.derivative(2).cloned(), vf.field().derivative(3).cloned()) {
        w = w.with_derivative(move |x| z2(x) - 0.5 * v3(x));
    }
    Superpotential::new(w)
}

/// Every cataloged scenario at its reference parameters.
pub fn reference_scenarios() -> Vec<Scenario> {
    vec![
        make_free_particle(1.0, 0.5).expect("valid"),
        make_shifted_oscillator(1.0, 1.0, 1.0, 0.0).expect("valid"),
        make_shifted_oscillator(1.0, 1.0, 1.0, 1.0).expect("valid"),
        make_coulomb(1.0, 1.0, 2.0).expect("valid"),
        make_cprs().expect("valid"),
    ]
}
