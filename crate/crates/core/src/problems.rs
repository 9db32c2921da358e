//! Default numerical set-ups for the cataloged scenarios: truncated domains,
//! operator builders in x and y, and the matching closed-form levels.

use std::f64::consts::FRAC_PI_2;

use crate::analytic::{self, OscillatorLevel};
use crate::catalog::{Scenario, ScenarioKind};
use crate::eigensolver::{self, RefineOptions, RefinedSpectrum};
use crate::error::{invalid, Result};
use crate::model::{real_fn, Component, Grid1D, RealFn, ScalarField};
use crate::potentials::{mass_from_velocity, partner_potentials_x, partner_potentials_y};
use crate::transform::{build_map, pull_potential, CoordinateMap};

/// Which equation a solve discretizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Problem {
    /// −Φ″ + V±(x(y))Φ in the transformed coordinate.
    YSpace,
    /// Flux form with M = 1/v_f² and the x-space partners.
    XPdm,
    /// −ψ″ + V±_x ψ with unit mass.
    XConstantMass,
}

impl Problem {
    pub fn label(self) -> &'static str {
        match self {
            Problem::YSpace => "y_space",
            Problem::XPdm => "x_pdm",
            Problem::XConstantMass => "x_constant_mass",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "y_space" => Some(Problem::YSpace),
            "x_pdm" => Some(Problem::XPdm),
            "x_constant_mass" => Some(Problem::XConstantMass),
            _ => None,
        }
    }

    pub fn coordinate_label(self) -> &'static str {
        match self {
            Problem::YSpace => "y",
            Problem::XPdm | Problem::XConstantMass => "x",
        }
    }
}

/// The equation the closed-form spectrum of a scenario refers to.
pub fn natural_problem(s: &Scenario) -> Problem {
    match s.kind {
        ScenarioKind::Cprs => Problem::XConstantMass,
        _ => Problem::YSpace,
    }
}

/// A truncated interval with the starting resolution for `refine`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveDomain {
    pub lo: f64,
    pub hi: f64,
    pub n0: usize,
}

impl SolveDomain {
    pub fn new(lo: f64, hi: f64, n0: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(invalid("domain", format!("need finite lo < hi, got ({lo}, {hi})")));
        }
        if n0 < 3 {
            return Err(invalid("n0", format!("need at least 3 nodes, got {n0}")));
        }
        Ok(Self { lo, hi, n0 })
    }
}

/// Frequency c = v₀aα and well centre −b/c of W̃(y) = c·y + b.
fn oscillator_line(s: &Scenario) -> Option<(f64, f64)> {
    match s.kind {
        ScenarioKind::ShiftedOscillator { v0, alpha, a, b } => {
            let c = v0 * a * alpha;
            Some((c, -b / c))
        }
        _ => None,
    }
}

/// Collapse length of the oscillator well plus room for `k` levels.
fn oscillator_reach(c: f64, k: usize) -> f64 {
    (12.0 + (4.0 * k as f64).sqrt()) / c.abs().sqrt()
}

/// Default y-interval for `k` levels of the scenario's natural problem in y.
pub fn default_y_domain(s: &Scenario, k: usize) -> Result<SolveDomain> {
    match s.kind {
        ScenarioKind::FreeParticle { a, .. } => {
            let half = FRAC_PI_2 / a.abs();
            SolveDomain::new(-half, half, 2001)
        }
        ScenarioKind::ShiftedOscillator { alpha, .. } => {
            let (c, centre) = oscillator_line(s).expect("oscillator");
            let reach = oscillator_reach(c, k);
            // the half-line image ends at y = 0 where the potential is regular
            if alpha > 0.0 {
                SolveDomain::new(0.0, centre.max(0.0) + reach, 2001)
            } else {
                SolveDomain::new(centre.min(0.0) - reach, 0.0, 2001)
            }
        }
        ScenarioKind::Coulomb { alpha, l, .. } => {
            if alpha < 0.0 {
                return Err(invalid(
                    "alpha",
                    "for alpha < 0 the y-image is the negative half-line and the Coulomb term is repulsive: no bound states",
                ));
            }
            SolveDomain::new(1e-3, 100.0 * (l + 2.0), 20001)
        }
        ScenarioKind::Cprs => {
            let map = build_map(s, 0.0)?;
            SolveDomain::new(map.forward(-8.0), map.forward(8.0), 4001)
        }
        ScenarioKind::Custom => {
            let map = build_map(s, 0.5 * (s.x_domain.lo + s.x_domain.hi))?;
            SolveDomain::new(map.y_lo, map.y_hi, 4001)
        }
    }
}

/// Default x-interval for the x-space forms. For the exponential profiles
/// the lower y-edge is kept away from y = 0, where x → ∓∞.
pub fn default_x_domain(s: &Scenario, k: usize) -> Result<SolveDomain> {
    match s.kind {
        ScenarioKind::FreeParticle { a, .. } => SolveDomain::new(-20.0 / a.abs(), 20.0 / a.abs(), 4001),
        ScenarioKind::ShiftedOscillator { alpha, .. } => {
            let (c, centre) = oscillator_line(s).expect("oscillator");
            let reach = oscillator_reach(c, k);
            let near = 0.05 / c.abs().sqrt();
            let map = build_map(s, 0.0)?;
            let (ylo, yhi) = if alpha > 0.0 {
                (near, centre.max(0.0) + reach)
            } else {
                (centre.min(0.0) - reach, -near)
            };
            let xs = map.preimage(ylo, yhi)?;
            SolveDomain::new(xs.lo, xs.hi, 4001)
        }
        ScenarioKind::Coulomb { alpha, l, .. } => {
            if alpha < 0.0 {
                return Err(invalid("alpha", "no bound states for alpha < 0"));
            }
            let map = build_map(s, 0.0)?;
            let xs = map.preimage(0.05, 100.0 * (l + 2.0))?;
            SolveDomain::new(xs.lo, xs.hi, 8001)
        }
        ScenarioKind::Cprs => SolveDomain::new(-8.0, 8.0, 4001),
        ScenarioKind::Custom => SolveDomain::new(s.x_domain.lo, s.x_domain.hi, 4001),
    }
}

/// Default interval for the natural problem.
pub fn default_domain(s: &Scenario, problem: Problem, k: usize) -> Result<SolveDomain> {
    match (problem, &s.kind) {
        (Problem::YSpace, _) => default_y_domain(s, k),
        (Problem::XConstantMass, ScenarioKind::Cprs) => SolveDomain::new(-10.0, 10.0, 4001),
        _ => default_x_domain(s, k),
    }
}

/// The coordinate map used by every y-space problem of the scenario.
pub fn scenario_map(s: &Scenario) -> Result<CoordinateMap> {
    let anchor = if s.x_domain.is_bounded() {
        0.5 * (s.x_domain.lo + s.x_domain.hi)
    } else {
        0.0
    };
    build_map(s, anchor)
}

/// V±(x(y)) as a field of y.
pub fn y_potential(s: &Scenario, component: Component) -> Result<ScalarField> {
    let map = scenario_map(s)?;
    let pp = partner_potentials_y(s)?;
    Ok(pull_potential(pp.get(component), &map, &s.vf))
}

/// W̃(y) = W(x(y)). The exponential profiles use the closed forms, which
/// stay finite at the y = 0 edge where x(y) diverges.
pub fn w_tilde(s: &Scenario) -> Result<RealFn> {
    match s.kind {
        ScenarioKind::ShiftedOscillator { v0, alpha, a, b } => {
            let c = v0 * a * alpha;
            return Ok(real_fn(move |y| c * y + b));
        }
        ScenarioKind::Coulomb { l, .. } => {
            let b = 0.5 / l;
            return Ok(real_fn(move |y| l / y - b));
        }
        _ => {}
    }
    let map = scenario_map(s)?;
    let w = s.w.field().derivative(0).expect("evaluator").clone();
    Ok(real_fn(move |y| w(map.inverse(y))))
}

pub type OperatorBuilder = Box<dyn Fn(&Grid1D) -> Result<eigensolver::DiscretizedOperator> + Send + Sync>;

/// Operator builder for one component of one problem.
pub fn operator_builder(
    s: &Scenario,
    problem: Problem,
    component: Component,
) -> Result<OperatorBuilder> {
    Ok(match problem {
        Problem::YSpace => {
            let v = y_potential(s, component)?;
            Box::new(move |g: &Grid1D| eigensolver::discretize_y(&|y| v.eval(y), g))
        }
        Problem::XPdm => {
            let v = partner_potentials_x(s)?.get(component).clone();
            let m = mass_from_velocity(&s.vf)?;
            Box::new(move |g: &Grid1D| eigensolver::discretize_x_pdm(&v, &m, g))
        }
        Problem::XConstantMass => {
            let v = partner_potentials_x(s)?.get(component).clone();
            Box::new(move |g: &Grid1D| {
                eigensolver::discretize_constant_mass(&|x| v.eval(x), g, crate::model::Coordinate::XSpace)
            })
        }
    })
}

/// Refined lowest `k` levels of one component.
pub fn solve(
    s: &Scenario,
    problem: Problem,
    component: Component,
    domain: SolveDomain,
    k: usize,
    opts: RefineOptions,
    seed: u64,
) -> Result<RefinedSpectrum> {
    let builder = operator_builder(s, problem, component)?;
    let opts = RefineOptions { n0: domain.n0, ..opts };
    let mut r = eigensolver::refine(&*builder, domain.lo, domain.hi, k, opts, seed)?;
    r.spectrum.component = Some(component);
    Ok(r)
}

/// Half-line levels of the unshifted (b = 0) oscillator with both the
/// stated and the re-derived formula.
pub fn oscillator_levels(s: &Scenario, component: Component, count: usize) -> Result<Option<Vec<OscillatorLevel>>> {
    let (c, centre) = match oscillator_line(s) {
        Some(line) => line,
        None => return Ok(None),
    };
    if centre != 0.0 {
        return Ok(None);
    }
    // V± = c²y² ± c: a negative c swaps the roles of the partners
    let effective = if c > 0.0 {
        component
    } else {
        match component {
            Component::Plus => Component::Minus,
            Component::Minus => Component::Plus,
        }
    };
    let omega = std::f64::consts::SQRT_2 * c.abs();
    analytic::half_oscillator_levels(omega, effective, count, ERRATUM_TOL).map(Some)
}

/// Relative tolerance beyond which the two oscillator formulas are
/// reported as disagreeing.
pub const ERRATUM_TOL: f64 = 1e-5;

/// Whether `analytic_eps` describes `problem`: the natural problem itself,
/// or the flux form, which is isospectral with the y-space equation.
pub fn analytic_applies(s: &Scenario, problem: Problem) -> bool {
    let natural = natural_problem(s);
    problem == natural || (natural == Problem::YSpace && problem == Problem::XPdm)
}

/// Closed-form levels of the natural problem, lowest first, when known.
/// The oscillator values are the re-derived ones.
pub fn analytic_eps(s: &Scenario, component: Component, count: usize) -> Result<Option<Vec<f64>>> {
    if !s.analytic_available {
        return Ok(None);
    }
    Ok(match s.kind {
        ScenarioKind::FreeParticle { a, omega0 } => Some(
            analytic::free_particle_levels(a, omega0, component, count as u32)?
                .into_iter()
                .map(|l| l.eps)
                .collect(),
        ),
        ScenarioKind::ShiftedOscillator { .. } => {
            oscillator_levels(s, component, count)?.map(|v| v.iter().map(|l| l.eps_derived()).collect())
        }
        ScenarioKind::Coulomb { alpha, l, .. } => (alpha > 0.0)
            .then(|| analytic::coulomb_levels(l, component, count as u32))
            .transpose()?
            .map(|v| v.into_iter().map(|lv| lv.eps).collect()),
        ScenarioKind::Cprs => (component == Component::Minus)
            .then(|| analytic::cprs_levels(count).into_iter().map(|l| l.eps).collect()),
        ScenarioKind::Custom => None,
    })
}

/// Outcome of comparing the x-space flux form with the y-space equation on
/// the image of the same interval.
#[derive(Debug, Clone)]
pub struct EquivalenceReport {
    pub component: Component,
    pub x: RefinedSpectrum,
    pub y: RefinedSpectrum,
    /// |ε_x − ε_y| per level.
    pub diffs: Vec<f64>,
    /// Combined error estimates plus the fixed slack, per level.
    pub allowed: Vec<f64>,
    pub pass: bool,
}

/// Fixed slack added to the combined Richardson estimates.
pub const EQUIVALENCE_SLACK: f64 = 1e-5;

pub fn transform_equivalence(
    s: &Scenario,
    component: Component,
    x_domain: SolveDomain,
    k: usize,
    opts: RefineOptions,
    seed: u64,
) -> Result<EquivalenceReport> {
    let map = scenario_map(s)?;
    let y_domain = SolveDomain::new(map.forward(x_domain.lo), map.forward(x_domain.hi), x_domain.n0)?;
    let x = solve(s, Problem::XPdm, component, x_domain, k, opts, seed)?;
    let y = solve(s, Problem::YSpace, component, y_domain, k, opts, seed)?;
    let diffs: Vec<f64> = x.eps().iter().zip(y.eps()).map(|(a, b)| (a - b).abs()).collect();
    let allowed: Vec<f64> = x
        .error_estimates
        .iter()
        .zip(&y.error_estimates)
        .map(|(a, b)| a + b + EQUIVALENCE_SLACK)
        .collect();
    let pass = diffs.iter().zip(&allowed).all(|(d, a)| d <= a);
    Ok(EquivalenceReport {
        component,
        x,
        y,
        diffs,
        allowed,
        pass,
    })
}
