//! Shared domain types: grids, scalar fields with closed-form derivatives,
//! velocity profiles, superpotentials and spectra.

use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, Error, Result};

/// Real function of one real variable, shareable across threads.
pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Wrap a closure as a [`RealFn`].
pub fn real_fn(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> RealFn {
    Arc::new(f)
}

/// Open coordinate interval; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo >= hi {
            return Err(invalid("interval", format!("require lo < hi, got ({lo}, {hi})")));
        }
        Ok(Self { lo, hi })
    }

    pub const fn real_line() -> Self {
        Self {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        }
    }

    pub const fn positive_half_line() -> Self {
        Self {
            lo: 0.0,
            hi: f64::INFINITY,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.lo && x < self.hi
    }

    /// Closed containment, used for grids whose boundary nodes carry
    /// Dirichlet values and are never evaluated.
    pub fn contains_closed(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    /// Finite window of the interval, replacing infinite ends by `±span`.
    pub fn window(&self, span: f64) -> Interval {
        let lo = if self.lo.is_finite() { self.lo } else { -span };
        let hi = if self.hi.is_finite() { self.hi } else { span };
        Interval { lo, hi }
    }

    /// `count` interior points at cell midpoints of the finite window.
    pub fn dense_samples(&self, span: f64, count: usize) -> Vec<f64> {
        let w = self.window(span);
        let width = w.hi - w.lo;
        (0..count)
            .map(|i| w.lo + (i as f64 + 0.5) / count as f64 * width)
            .collect()
    }
}

/// Uniform grid including both boundary nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    lo: f64,
    hi: f64,
    n: usize,
    spacing: f64,
}

/// Build a uniform grid with `n` nodes on `[lo, hi]`.
pub fn make_grid(lo: f64, hi: f64, n: usize) -> Result<Grid1D> {
    Grid1D::new(lo, hi, n)
}

impl Grid1D {
    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidGrid(format!("need at least 3 nodes, got {n}")));
        }
        if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
            return Err(Error::InvalidGrid(format!(
                "need finite lo < hi, got [{lo}, {hi}]"
            )));
        }
        Ok(Self {
            lo,
            hi,
            n,
            spacing: (hi - lo) / (n - 1) as f64,
        })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn node(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.hi
        } else {
            self.lo + i as f64 * self.spacing
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.node(i)).collect()
    }

    /// Grid with the spacing halved (`2n - 1` nodes, same end points).
    pub fn refined(&self) -> Grid1D {
        Grid1D::new(self.lo, self.hi, 2 * self.n - 1).expect("refinement of a valid grid")
    }
}

/// Real field with an optional ladder of closed-form derivatives.
///
/// `funcs[0]` is the field itself and `funcs[k]` its k-th derivative.
#[derive(Clone)]
pub struct ScalarField {
    funcs: Vec<RealFn>,
    domain: Interval,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("domain", &self.domain)
            .field("derivatives", &self.derivative_order())
            .finish()
    }
}

impl ScalarField {
    pub fn new(domain: Interval, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            funcs: vec![real_fn(f)],
            domain,
        }
    }

    /// Build from `[f, f', f'', ...]`.
    pub fn from_fns(domain: Interval, funcs: Vec<RealFn>) -> Self {
        assert!(!funcs.is_empty(), "a scalar field needs an evaluator");
        Self { funcs, domain }
    }

    /// Append the next-order closed-form derivative.
    pub fn with_derivative(mut self, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.funcs.push(real_fn(f));
        self
    }

    /// Constant field; all derivatives up to third order are zero.
    pub fn constant(domain: Interval, c: f64) -> Self {
        Self::new(domain, move |_| c)
            .with_derivative(|_| 0.0)
            .with_derivative(|_| 0.0)
            .with_derivative(|_| 0.0)
    }

    /// The identity field `x`.
    pub fn identity(domain: Interval) -> Self {
        Self::new(domain, |x| x)
            .with_derivative(|_| 1.0)
            .with_derivative(|_| 0.0)
            .with_derivative(|_| 0.0)
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn with_domain(mut self, domain: Interval) -> Self {
        self.domain = domain;
        self
    }

    /// Highest derivative order available in closed form.
    pub fn derivative_order(&self) -> usize {
        self.funcs.len() - 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.funcs[0])(x)
    }

    /// Evaluate after checking `x` against the domain.
    pub fn try_eval(&self, x: f64) -> Result<f64> {
        if !self.domain.contains(x) {
            return Err(Error::DomainViolation {
                x,
                lo: self.domain.lo,
                hi: self.domain.hi,
            });
        }
        Ok(self.eval(x))
    }

    pub fn derivative(&self, order: usize) -> Option<&RealFn> {
        self.funcs.get(order)
    }

    pub fn d1(&self, x: f64) -> Option<f64> {
        self.derivative(1).map(|f| f(x))
    }

    pub fn d2(&self, x: f64) -> Option<f64> {
        self.derivative(2).map(|f| f(x))
    }

    /// `[f, f', ..., f^(N-1)]`, or an error naming the missing order.
    pub fn fns<const N: usize>(&self, what: &str) -> Result<[RealFn; N]> {
        if self.funcs.len() < N {
            return Err(Error::MissingDerivative {
                what: what.to_string(),
                order: self.funcs.len(),
            });
        }
        Ok(std::array::from_fn(|k| self.funcs[k].clone()))
    }

    pub fn require(&self, order: usize, what: &str) -> Result<()> {
        if self.derivative_order() < order {
            return Err(Error::MissingDerivative {
                what: what.to_string(),
                order: self.derivative_order() + 1,
            });
        }
        Ok(())
    }

    /// Keep only derivatives up to `order`.
    pub fn truncated(mut self, order: usize) -> Self {
        self.funcs.truncate(order + 1);
        self
    }
}

/// Sample a field at every grid node, rejecting nodes outside the domain.
pub fn sample_field(f: &ScalarField, g: &Grid1D) -> Result<Vec<f64>> {
    g.nodes().into_iter().map(|x| f.try_eval(x)).collect()
}

/// Function values on every node of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    pub grid: Grid1D,
    pub values: Vec<f64>,
}

impl SampledFunction {
    pub fn new(grid: Grid1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "{} samples for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().into_iter().map(f).collect();
        Self { grid, values }
    }

    /// Trapezoid-rule ∫|f|².
    pub fn norm_sq(&self) -> f64 {
        trapezoid(&self.values.iter().map(|v| v * v).collect::<Vec<_>>(), self.grid.spacing())
    }
}

/// Composite trapezoid rule on uniformly spaced samples.
pub fn trapezoid(values: &[f64], h: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => h * (values[1..n - 1].iter().sum::<f64>() + 0.5 * (values[0] + values[n - 1])),
    }
}

/// Local Fermi velocity `v_f(x) > 0` with its reference value `v0`.
#[derive(Debug, Clone)]
pub struct VelocityProfile {
    field: ScalarField,
    v0: f64,
}

/// Half-width of the window used to sample unbounded domains.
pub const SAMPLING_SPAN: f64 = 50.0;

impl VelocityProfile {
    /// Checks strict positivity on 10⁴ dense samples of the domain.
    pub fn new(field: ScalarField, v0: f64) -> Result<Self> {
        if !(v0 > 0.0 && v0.is_finite()) {
            return Err(invalid("v0", format!("reference velocity must be > 0, got {v0}")));
        }
        for x in field.domain().dense_samples(SAMPLING_SPAN, 10_000) {
            let value = field.eval(x);
            if !(value > 0.0) {
                return Err(Error::NonPositiveVelocity { x, value });
            }
        }
        Ok(Self { field, v0 })
    }

    pub fn constant(domain: Interval, v0: f64) -> Result<Self> {
        Self::new(ScalarField::constant(domain, v0), v0)
    }

    pub fn field(&self) -> &ScalarField {
        &self.field
    }

    pub fn v0(&self) -> f64 {
        self.v0
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.field.eval(x)
    }
}

/// Pseudoscalar potential W(x); W′ must be closed-form.
#[derive(Debug, Clone)]
pub struct Superpotential {
    field: ScalarField,
}

impl Superpotential {
    pub fn new(field: ScalarField) -> Result<Self> {
        field.require(1, "superpotential W")?;
        Ok(Self { field })
    }

    pub fn field(&self) -> &ScalarField {
        &self.field
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.field.eval(x)
    }
}

/// von Roos ordering parameters, constrained by η + β + γ = −1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ambiguity {
    pub eta: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl Ambiguity {
    pub fn new(eta: f64, beta: f64, gamma: f64) -> Result<Self> {
        let sum = eta + beta + gamma;
        if (sum + 1.0).abs() > 1e-12 {
            return Err(Error::AmbiguityConstraint { sum });
        }
        Ok(Self { eta, beta, gamma })
    }

    pub const fn ben_daniel_duke() -> Self {
        Self {
            eta: 0.0,
            beta: -1.0,
            gamma: 0.0,
        }
    }

    pub const fn bastard() -> Self {
        Self {
            eta: -1.0,
            beta: 0.0,
            gamma: 0.0,
        }
    }

    pub const fn zhu_kroemer() -> Self {
        Self {
            eta: -0.5,
            beta: 0.0,
            gamma: -0.5,
        }
    }

    pub const fn redistributed() -> Self {
        Self {
            eta: 0.0,
            beta: -0.5,
            gamma: -0.5,
        }
    }
}

impl Default for Ambiguity {
    fn default() -> Self {
        Self::ben_daniel_duke()
    }
}

/// Rest mass, reference velocity and the ordering parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub m0: f64,
    pub v0: f64,
    pub ambiguity: Ambiguity,
}

impl SystemParams {
    pub fn new(m0: f64, v0: f64, ambiguity: Ambiguity) -> Result<Self> {
        if !(m0 >= 0.0 && m0.is_finite()) {
            return Err(invalid("m0", format!("rest mass must be >= 0, got {m0}")));
        }
        if !(v0 > 0.0 && v0.is_finite()) {
            return Err(invalid("v0", format!("reference velocity must be > 0, got {v0}")));
        }
        Ambiguity::new(ambiguity.eta, ambiguity.beta, ambiguity.gamma)?;
        Ok(Self { m0, v0, ambiguity })
    }

    /// Massless carrier with unit reference velocity and BenDaniel–Duke ordering.
    pub fn massless(v0: f64) -> Self {
        Self {
            m0: 0.0,
            v0,
            ambiguity: Ambiguity::ben_daniel_duke(),
        }
    }

    /// m₀²v₀⁴, the offset between E² and ε.
    pub fn rest_energy_sq(&self) -> f64 {
        self.m0 * self.m0 * self.v0.powi(4)
    }

    /// Positive branch E = +√(ε + m₀²v₀⁴), if real.
    pub fn energy_plus_branch(&self, eps: f64) -> Option<f64> {
        let e2 = eps + self.rest_energy_sq();
        (e2 >= 0.0).then(|| e2.sqrt())
    }
}

/// Which partner equation: the `+v_f W′` branch or the `−v_f W′` branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Component {
    Plus,
    Minus,
}

impl Component {
    pub fn sign(self) -> f64 {
        match self {
            Component::Plus => 1.0,
            Component::Minus => -1.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Component::Plus => "plus",
            Component::Minus => "minus",
        }
    }

    pub fn both() -> [Component; 2] {
        [Component::Plus, Component::Minus]
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Coordinate in which an equation is posed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Coordinate {
    XSpace,
    YSpace,
}

impl Coordinate {
    pub fn label(self) -> &'static str {
        match self {
            Coordinate::XSpace => "x",
            Coordinate::YSpace => "y",
        }
    }
}

/// Pair (V⁺, V⁻) sharing a domain and coordinate tag.
#[derive(Debug, Clone)]
pub struct PartnerPotentials {
    pub v_plus: ScalarField,
    pub v_minus: ScalarField,
    pub coordinate: Coordinate,
}

impl PartnerPotentials {
    pub fn get(&self, component: Component) -> &ScalarField {
        match component {
            Component::Plus => &self.v_plus,
            Component::Minus => &self.v_minus,
        }
    }
}

/// Eigenvalues ε = E² − m₀²v₀⁴ with unit-norm eigenfunction samples.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub component: Option<Component>,
    pub coordinate: Coordinate,
    pub grid: Grid1D,
    pub eps: Vec<f64>,
    /// One sample vector per eigenvalue, boundary nodes included.
    pub states: Vec<Vec<f64>>,
    pub norms: Vec<f64>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eps.is_empty()
    }

    pub fn with_component(mut self, component: Component) -> Self {
        self.component = Some(component);
        self
    }
}

/// Result of comparing one derivative order against centered differences.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderCheck {
    pub order: usize,
    /// Max relative error `|d − fd| / (1 + |d|)` at the grid spacing h.
    pub max_err_h: f64,
    /// Same at h/2.
    pub max_err_half: f64,
    /// `max_err_h / max_err_half`; `None` when both sit at rounding level
    /// (stencil exact for the field).
    pub ratio: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeReport {
    pub checks: Vec<OrderCheck>,
    pub pass: bool,
}

/// Compare closed-form d1 (and d2 when present) with centered differences
/// at spacings h and h/2 over the interior grid nodes.
pub fn check_derivatives(f: &ScalarField, g: &Grid1D, tol: f64) -> Result<DerivativeReport> {
    f.require(1, "field under derivative check")?;
    let h = g.spacing();
    let interior: Vec<f64> = (1..g.len() - 1).map(|i| g.node(i)).collect();
    let scale = interior
        .iter()
        .map(|&x| f.eval(x).abs())
        .fold(0.0_f64, f64::max)
        .max(1.0);

    let stencil = |order: usize, x: f64, h: f64| match order {
        1 => (f.eval(x + h) - f.eval(x - h)) / (2.0 * h),
        _ => (f.eval(x + h) - 2.0 * f.eval(x) + f.eval(x - h)) / (h * h),
    };

    let mut checks = Vec::new();
    for order in 1..=f.derivative_order().min(2) {
        let d = f.derivative(order).expect("order checked above");
        let max_err = |step: f64| {
            interior
                .iter()
                .map(|&x| {
                    let exact = d(x);
                    (exact - stencil(order, x, step)).abs() / (1.0 + exact.abs())
                })
                .fold(0.0_f64, f64::max)
        };
        let max_err_h = max_err(h);
        let max_err_half = max_err(0.5 * h);
        let noise = 1e4 * f64::EPSILON * scale / (0.5 * h).powi(order as i32);
        let ratio = (max_err_h > noise).then(|| max_err_h / max_err_half);
        let pass = max_err_half <= tol && ratio.is_none_or(|r| r > 2.0);
        checks.push(OrderCheck {
            order,
            max_err_h,
            max_err_half,
            ratio,
            pass,
        });
    }
    let pass = checks.iter().all(|c| c.pass);
    Ok(DerivativeReport { checks, pass })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_nodes_and_spacing() {
        let g = make_grid(0.0, 1.0, 3).unwrap();
        assert_eq!(g.nodes(), vec![0.0, 0.5, 1.0]);
        let g = make_grid(-10.0, 10.0, 2001).unwrap();
        assert!((g.spacing() - 0.01).abs() < 1e-15);
        assert_eq!(g.node(2000), 10.0);
        for i in 0..g.len() {
            let expected = -10.0 + i as f64 * g.spacing();
            assert!((g.node(i) - expected).abs() <= 2.0 * f64::EPSILON * 10.0);
        }
    }

    #[test]
    fn grid_rejects_degenerate_input() {
        assert!(make_grid(1.0, 1.0, 5).is_err());
        assert!(make_grid(2.0, 1.0, 5).is_err());
        assert!(make_grid(0.0, 1.0, 2).is_err());
    }

    #[test]
    fn sampling() {
        let id = ScalarField::identity(Interval::real_line());
        let g = make_grid(0.0, 1.0, 3).unwrap();
        assert_eq!(sample_field(&id, &g).unwrap(), vec![0.0, 0.5, 1.0]);

        let sq = ScalarField::new(Interval::real_line(), |x| x * x);
        let g = make_grid(-1.0, 1.0, 3).unwrap();
        assert_eq!(sample_field(&sq, &g).unwrap(), vec![1.0, 0.0, 1.0]);

        let half = ScalarField::new(Interval::positive_half_line(), |x| x.sqrt());
        let err = sample_field(&half, &g).unwrap_err();
        assert!(matches!(err, Error::DomainViolation { x, .. } if x == -1.0));
    }

    #[test]
    fn derivative_check_detects_mismatch() {
        let g = make_grid(-2.0, 2.0, 401).unwrap();
        let good = ScalarField::new(Interval::real_line(), |x| x * x).with_derivative(|x| 2.0 * x);
        assert!(check_derivatives(&good, &g, 1e-8).unwrap().pass);
        let bad = ScalarField::new(Interval::real_line(), |x| x * x).with_derivative(|x| 3.0 * x);
        assert!(!check_derivatives(&bad, &g, 1e-8).unwrap().pass);
        let none = ScalarField::new(Interval::real_line(), |x| x);
        assert!(check_derivatives(&none, &g, 1e-8).is_err());
    }

    #[test]
    fn derivative_check_second_order_decay() {
        let f = ScalarField::new(Interval::real_line(), f64::sin)
            .with_derivative(f64::cos)
            .with_derivative(|x| -x.sin());
        let g = make_grid(-3.0, 3.0, 601).unwrap();
        let report = check_derivatives(&f, &g, 1e-4).unwrap();
        assert!(report.pass);
        for c in &report.checks {
            let r = c.ratio.unwrap();
            assert!((3.5..=4.5).contains(&r), "order {} ratio {r}", c.order);
        }
    }

    #[test]
    fn velocity_must_be_positive() {
        let f = ScalarField::new(Interval::real_line(), |x| x);
        assert!(matches!(
            VelocityProfile::new(f, 1.0),
            Err(Error::NonPositiveVelocity { .. })
        ));
    }

    #[test]
    fn superpotential_needs_first_derivative() {
        let f = ScalarField::new(Interval::real_line(), |x| x);
        assert!(Superpotential::new(f).is_err());
    }

    #[test]
    fn ambiguity_constraint() {
        assert!(Ambiguity::new(0.0, -1.0, 0.0).is_ok());
        assert!(Ambiguity::new(0.0, 0.0, 0.0).is_err());
        for a in [
            Ambiguity::ben_daniel_duke(),
            Ambiguity::bastard(),
            Ambiguity::zhu_kroemer(),
            Ambiguity::redistributed(),
        ] {
            assert!(Ambiguity::new(a.eta, a.beta, a.gamma).is_ok());
        }
    }

    #[test]
    fn system_params_energy() {
        let p = SystemParams::new(1.0, 2.0, Ambiguity::default()).unwrap();
        assert_eq!(p.rest_energy_sq(), 16.0);
        assert_eq!(p.energy_plus_branch(9.0), Some(5.0));
        assert!(SystemParams::new(-1.0, 1.0, Ambiguity::default()).is_err());
        assert!(SystemParams::new(1.0, 0.0, Ambiguity::default()).is_err());
    }
}
