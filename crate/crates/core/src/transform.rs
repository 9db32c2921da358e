//! The coordinate map y(x) = ∫dx/v_f, its inverse, and the rescaling
//! ψ(x) = Φ(y(x))/√v_f(x).

use std::sync::Arc;

use crate::catalog::{Scenario, ScenarioKind};
use crate::error::{invalid, Error, Result};
use crate::model::{real_fn, Grid1D, Interval, RealFn, SampledFunction, ScalarField, VelocityProfile};

/// Tolerance of the numerical inverse in y.
pub const INVERSION_TOL: f64 = 1e-12;

#[derive(Clone)]
pub struct CoordinateMap {
    forward: RealFn,
    inverse: RealFn,
    pub x_domain: Interval,
    pub y_lo: f64,
    pub y_hi: f64,
    pub closed_form: bool,
}

impl std::fmt::Debug for CoordinateMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CoordinateMap")
            .field("x_domain", &self.x_domain)
            .field("y_lo", &self.y_lo)
            .field("y_hi", &self.y_hi)
            .field("closed_form", &self.closed_form)
            .finish()
    }
}

impl CoordinateMap {
    pub fn forward(&self, x: f64) -> f64 {
        (self.forward)(x)
    }

    /// x(y); NaN outside the image.
    pub fn inverse(&self, y: f64) -> f64 {
        (self.inverse)(y)
    }

    pub fn try_inverse(&self, y: f64) -> Result<f64> {
        let x = self.inverse(y);
        if x.is_finite() {
            Ok(x)
        } else {
            Err(Error::InversionFailure { y })
        }
    }

    /// Image of a finite x-interval.
    pub fn image(&self, lo: f64, hi: f64) -> Interval {
        Interval {
            lo: self.forward(lo),
            hi: self.forward(hi),
        }
    }

    /// Preimage of a y-interval inside the image.
    pub fn preimage(&self, lo: f64, hi: f64) -> Result<Interval> {
        Interval::new(self.try_inverse(lo)?, self.try_inverse(hi)?)
    }
}

/// Build y(x) for a scenario. Cataloged profiles use their closed forms
/// (which carry their own integration constants); custom profiles are
/// integrated numerically with y(anchor_x) = 0 over their bounded domain.
pub fn build_map(s: &Scenario, anchor_x: f64) -> Result<CoordinateMap> {
    match s.kind {
        ScenarioKind::FreeParticle { a, .. } => Ok(arctan_map(a)),
        ScenarioKind::ShiftedOscillator { v0, alpha, .. } | ScenarioKind::Coulomb { v0, alpha, .. } => {
            Ok(exponential_map(v0, alpha))
        }
        ScenarioKind::Cprs => Ok(cubic_map()),
        ScenarioKind::Custom => {
            if !s.x_domain.is_bounded() {
                return Err(invalid(
                    "x_domain",
                    "numerical coordinate maps need a bounded x-domain",
                ));
            }
            numeric_map(&s.vf, s.x_domain, anchor_x, 0.0, 4097)
        }
    }
}

/// y = atan(ax)/a on the full line, image (−π/2|a|, π/2|a|).
fn arctan_map(a: f64) -> CoordinateMap {
    let half = std::f64::consts::FRAC_PI_2 / a.abs();
    CoordinateMap {
        forward: real_fn(move |x| (a * x).atan() / a),
        inverse: real_fn(move |y| {
            if y.abs() < half {
                (a * y).tan() / a
            } else {
                f64::NAN
            }
        }),
        x_domain: Interval::real_line(),
        y_lo: -half,
        y_hi: half,
        closed_form: true,
    }
}

/// y = e^{αx}/(v₀α); image (0, ∞) for α > 0 and (−∞, 0) for α < 0.
fn exponential_map(v0: f64, alpha: f64) -> CoordinateMap {
    let c = v0 * alpha;
    let (y_lo, y_hi) = if alpha > 0.0 {
        (0.0, f64::INFINITY)
    } else {
        (f64::NEG_INFINITY, 0.0)
    };
    CoordinateMap {
        forward: real_fn(move |x| (alpha * x).exp() / c),
        inverse: real_fn(move |y| {
            let arg = c * y;
            if arg > 0.0 { arg.ln() / alpha } else { f64::NAN }
        }),
        x_domain: Interval::real_line(),
        y_lo,
        y_hi,
        closed_form: true,
    }
}

/// y = (2x³/3 + x)/8 for v_f = 8/(2x²+1); inverted with Cardano's formula
/// for the depressed cubic x³ + (3/2)x − 12y = 0.
fn cubic_map() -> CoordinateMap {
    CoordinateMap {
        forward: real_fn(|x| (2.0 * x * x * x / 3.0 + x) / 8.0),
        inverse: real_fn(|y| {
            let q = 12.0 * y;
            let p: f64 = 1.5;
            let disc = (0.25 * q * q + p.powi(3) / 27.0).sqrt();
            // cbrt(q/2 + disc) + cbrt(q/2 − disc), written to avoid cancellation
            let s = (0.5 * q.abs() + disc).cbrt();
            let x = s - p / (3.0 * s);
            x.copysign(q)
        }),
        x_domain: Interval::real_line(),
        y_lo: f64::NEG_INFINITY,
        y_hi: f64::INFINITY,
        closed_form: true,
    }
}

fn simpson(a: f64, fa: f64, fm: f64, b: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adaptive_simpson(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    fa: f64,
    m: f64,
    fm: f64,
    b: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: usize,
) -> Option<f64> {
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, fa, flm, m, fm);
    let right = simpson(m, fm, frm, b, fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return Some(left + right + delta / 15.0);
    }
    if depth == 0 {
        return None;
    }
    Some(
        adaptive_simpson(f, a, fa, lm, flm, m, fm, left, 0.5 * tol, depth - 1)?
            + adaptive_simpson(f, m, fm, rm, frm, b, fb, right, 0.5 * tol, depth - 1)?,
    )
}

/// ∫_a^b f by adaptive Simpson with Richardson correction.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(a, fa, fm, b, fb);
    adaptive_simpson(f, a, fa, m, fm, b, fb, whole, tol, 40)
        .ok_or(Error::QuadratureFailure { lo: a, hi: b })
}

/// Piecewise cubic Hermite table of y(x) with slopes 1/v_f at the nodes,
/// limited so every panel stays monotone.
struct HermiteTable {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl HermiteTable {
    fn panel(&self, x: f64) -> usize {
        let i = self.xs.partition_point(|&t| t <= x);
        i.saturating_sub(1).min(self.xs.len() - 2)
    }

    fn eval_panel(&self, i: usize, x: f64) -> f64 {
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.ys[i] + h10 * h * self.slopes[i] + h01 * self.ys[i + 1] + h11 * h * self.slopes[i + 1]
    }

    fn eval(&self, x: f64) -> f64 {
        if x < self.xs[0] || x > *self.xs.last().expect("non-empty") {
            return f64::NAN;
        }
        self.eval_panel(self.panel(x), x)
    }

    fn invert(&self, y: f64, v: &dyn Fn(f64) -> f64) -> f64 {
        let n = self.ys.len();
        if !(y >= self.ys[0] && y <= self.ys[n - 1]) {
            return f64::NAN;
        }
        let i = self.ys.partition_point(|&t| t <= y).saturating_sub(1).min(n - 2);
        let (mut lo, mut hi) = (self.xs[i], self.xs[i + 1]);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let f = self.eval_panel(i, mid) - y;
            if f.abs() <= INVERSION_TOL || hi - lo <= f64::EPSILON * mid.abs().max(1.0) {
                lo = mid;
                hi = mid;
                break;
            }
            if f < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        // one Newton polish step, dx/dy = v_f
        let x = 0.5 * (lo + hi);
        let polished = x - (self.eval_panel(i, x) - y) * v(x);
        if polished >= self.xs[i] && polished <= self.xs[i + 1] {
            polished
        } else {
            x
        }
    }
}

/// y(x) by adaptive quadrature of 1/v_f on `table_nodes` panels of
/// `x_range`, with y(anchor_x) = anchor_y.
pub fn numeric_map(
    vf: &VelocityProfile,
    x_range: Interval,
    anchor_x: f64,
    anchor_y: f64,
    table_nodes: usize,
) -> Result<CoordinateMap> {
    if !x_range.is_bounded() {
        return Err(invalid("x_range", "quadrature table needs a bounded range"));
    }
    if !x_range.contains_closed(anchor_x) {
        return Err(invalid("anchor_x", format!("{anchor_x} lies outside the table range")));
    }
    let grid = Grid1D::new(x_range.lo, x_range.hi, table_nodes.max(3))?;
    let xs = grid.nodes();
    let v = vf.field().derivative(0).expect("evaluator").clone();
    let inv_v = {
        let v = v.clone();
        move |x: f64| 1.0 / v(x)
    };
    let mut ys = Vec::with_capacity(xs.len());
    ys.push(0.0);
    for w in xs.windows(2) {
        let seg = integrate(&inv_v, w[0], w[1], 1e-15 * (w[1] - w[0]).max(1e-300))
            .or_else(|_| integrate(&inv_v, w[0], w[1], 1e-13 * (w[1] - w[0])))?;
        ys.push(ys.last().expect("non-empty") + seg);
    }
    let mut slopes: Vec<f64> = xs.iter().map(|&x| inv_v(x)).collect();
    // Fritsch–Carlson limiter
    for i in 0..xs.len() - 1 {
        let secant = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);
        let a = slopes[i] / secant;
        let b = slopes[i + 1] / secant;
        let r = a * a + b * b;
        if r > 9.0 {
            let tau = 3.0 / r.sqrt();
            slopes[i] = tau * a * secant;
            slopes[i + 1] = tau * b * secant;
        }
    }
    let mut table = HermiteTable { xs, ys, slopes };
    let shift = anchor_y - table.eval(anchor_x);
    for y in &mut table.ys {
        *y += shift;
    }
    let table = Arc::new(table);
    let (y_lo, y_hi) = (table.ys[0], *table.ys.last().expect("non-empty"));
    let forward = {
        let table = table.clone();
        real_fn(move |x| table.eval(x))
    };
    let inverse = real_fn(move |y| table.invert(y, &*v));
    Ok(CoordinateMap {
        forward,
        inverse,
        x_domain: x_range,
        y_lo,
        y_hi,
        closed_form: false,
    })
}

/// Shape-preserving (Fritsch–Butland) cubic interpolant of uniform samples.
pub struct MonotoneCubic {
    lo: f64,
    h: f64,
    ys: Vec<f64>,
    ds: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(samples: &SampledFunction) -> Self {
        let ys = samples.values.clone();
        let h = samples.grid.spacing();
        let n = ys.len();
        let delta: Vec<f64> = ys.windows(2).map(|w| (w[1] - w[0]) / h).collect();
        let mut ds = vec![0.0; n];
        for i in 1..n - 1 {
            let (a, b) = (delta[i - 1], delta[i]);
            if a * b > 0.0 {
                ds[i] = 2.0 / (1.0 / a + 1.0 / b);
            }
        }
        let end = |d0: f64, d1: f64| {
            let d = 0.5 * (3.0 * d0 - d1);
            if d.signum() != d0.signum() {
                0.0
            } else if d0.signum() != d1.signum() && d.abs() > 3.0 * d0.abs() {
                3.0 * d0
            } else {
                d
            }
        };
        ds[0] = end(delta[0], delta.get(1).copied().unwrap_or(delta[0]));
        ds[n - 1] = end(delta[n - 2], if n > 2 { delta[n - 3] } else { delta[n - 2] });
        Self {
            lo: samples.grid.lo(),
            h,
            ys,
            ds,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.ys.len();
        let s = ((x - self.lo) / self.h).clamp(0.0, (n - 1) as f64);
        let i = (s.floor() as usize).min(n - 2);
        let t = s - i as f64;
        let (t2, t3) = (t * t, t * t * t);
        (2.0 * t3 - 3.0 * t2 + 1.0) * self.ys[i]
            + (t3 - 2.0 * t2 + t) * self.h * self.ds[i]
            + (-2.0 * t3 + 3.0 * t2) * self.ys[i + 1]
            + (t3 - t2) * self.h * self.ds[i + 1]
    }
}

/// ψ(x_i) = Φ(y(x_i))/√v_f(x_i) on `x_grid`.
pub fn push_wavefunction(
    phi: &SampledFunction,
    map: &CoordinateMap,
    vf: &VelocityProfile,
    x_grid: &Grid1D,
) -> Result<SampledFunction> {
    let interp = MonotoneCubic::new(phi);
    let (lo, hi) = (phi.grid.lo(), phi.grid.hi());
    let slack = 1e-12 * (hi - lo).abs().max(1.0);
    let values = x_grid
        .nodes()
        .into_iter()
        .map(|x| {
            let y = map.forward(x);
            if !(y >= lo - slack && y <= hi + slack) {
                return Err(Error::Extrapolation { y, lo, hi });
            }
            Ok(interp.eval(y) / vf.eval(x).sqrt())
        })
        .collect::<Result<Vec<_>>>()?;
    SampledFunction::new(*x_grid, values)
}

/// v(x(y)) as a field of y, with dv/dy = v_f(x)·v′(x) when v′ is known.
pub fn pull_potential(v: &ScalarField, map: &CoordinateMap, vf: &VelocityProfile) -> ScalarField {
    let domain = Interval {
        lo: map.y_lo,
        hi: map.y_hi,
    };
    let f = v.derivative(0).expect("evaluator").clone();
    let m = map.clone();
    let mut field = ScalarField::new(domain, move |y| f(m.inverse(y)));
    if let Some(d1) = v.derivative(1).cloned() {
        let m = map.clone();
        let vfun = vf.field().derivative(0).expect("evaluator").clone();
        field = field.with_derivative(move |y| {
            let x = m.inverse(y);
            vfun(x) * d1(x)
        });
    }
    field
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, SQRT_2};

    #[test]
    fn free_particle_map() {
        let s = make_free_particle(1.0, 0.0).unwrap();
        let m = build_map(&s, 0.0).unwrap();
        assert!((m.forward(1.0) - FRAC_PI_4).abs() < 1e-15);
        assert_eq!((m.y_lo, m.y_hi), (-FRAC_PI_2, FRAC_PI_2));
        let s = make_free_particle(2.0, 0.0).unwrap();
        let m = build_map(&s, 0.0).unwrap();
        assert!((m.y_hi - std::f64::consts::PI / 4.0).abs() < 1e-15);
        assert!(m.inverse(1.0).is_nan());
    }

    #[test]
    fn exponential_map_values() {
        let s = make_shifted_oscillator(1.0, 1.0, 1.0, 0.0).unwrap();
        let m = build_map(&s, 0.0).unwrap();
        assert!((m.forward(0.0) - 1.0).abs() < 1e-15);
        assert!((m.forward(2f64.ln()) - 2.0).abs() < 1e-15);
        assert_eq!((m.y_lo, m.y_hi), (0.0, f64::INFINITY));

        let s = make_shifted_oscillator(1.0, -1.0, 1.0, 0.0).unwrap();
        let m = build_map(&s, 0.0).unwrap();
        assert_eq!((m.y_lo, m.y_hi), (f64::NEG_INFINITY, 0.0));
        let xs: Vec<f64> = (0..1000).map(|i| -5.0 + i as f64 * 0.01).collect();
        for w in xs.windows(2) {
            assert!(m.forward(w[1]) > m.forward(w[0]));
        }
    }

    #[test]
    fn cubic_inverse_round_trip() {
        let m = cubic_map();
        for x in [-30.0, -2.0, -1e-3, 0.0, 0.5, 7.0, 100.0] {
            let back = m.inverse(m.forward(x));
            assert!((back - x).abs() <= 1e-12 * (1.0 + x.abs()), "x = {x}, back = {back}");
        }
    }

    #[test]
    fn quadrature_helper() {
        let v = integrate(&|x: f64| x.cos(), 0.0, FRAC_PI_2, 1e-14).unwrap();
        assert!((v - 1.0).abs() < 1e-13);
    }

    #[test]
    fn numeric_map_of_constant_velocity() {
        let vf = VelocityProfile::constant(Interval::real_line(), 2.0).unwrap();
        let m = numeric_map(&vf, Interval::new(-3.0, 3.0).unwrap(), 0.0, 0.0, 257).unwrap();
        for x in [-2.9, -1.0, 0.0, 0.3, 2.5] {
            assert!((m.forward(x) - 0.5 * x).abs() < 1e-13);
            assert!((m.inverse(0.5 * x) - x).abs() < 1e-11);
        }
        assert!(m.inverse(10.0).is_nan());
        assert!(m.try_inverse(10.0).is_err());
    }

    #[test]
    fn custom_map_needs_bounded_domain() {
        use crate::model::{Superpotential, SystemParams};
        let w = Superpotential::new(ScalarField::identity(Interval::real_line())).unwrap();
        let vf = VelocityProfile::constant(Interval::real_line(), 1.0).unwrap();
        let s = make_custom(w, vf, SystemParams::massless(1.0)).unwrap();
        assert!(build_map(&s, 0.0).is_err());
    }

    #[test]
    fn pulled_potentials() {
        use crate::potentials::partner_potentials_y;
        let s = make_coulomb(1.0, 1.0, 2.0).unwrap();
        let m = build_map(&s, 0.0).unwrap();
        let p = partner_potentials_y(&s).unwrap();
        let up = pull_potential(&p.v_plus, &m, &s.vf);
        assert!((up.eval(1.0) - 1.0625).abs() < 1e-13);
        let down = pull_potential(&p.v_minus, &m, &s.vf);
        assert!((down.eval(1.0) - (6.0 - 1.0 + 1.0 / 16.0)).abs() < 1e-13);

        let s = make_free_particle(1.0, 0.7).unwrap();
        let m = build_map(&s, 0.0).unwrap();
        let p = partner_potentials_y(&s).unwrap();
        let f = pull_potential(&p.v_plus, &m, &s.vf);
        for y in [-1.5, 0.0, 1.2] {
            assert!((f.eval(y) - 0.49).abs() < 1e-15);
        }

        let s = make_shifted_oscillator(1.0, 1.0, 1.0, 0.0).unwrap();
        let m = build_map(&s, 0.0).unwrap();
        let p = partner_potentials_y(&s).unwrap();
        let f = pull_potential(&p.v_plus, &m, &s.vf);
        let omega = SQRT_2;
        assert!((f.eval(1.0) - (0.5 * omega * omega + omega / SQRT_2)).abs() < 1e-14);
        assert!((f.eval(1.0) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn identity_push_for_unit_velocity() {
        let vf = VelocityProfile::constant(Interval::real_line(), 1.0).unwrap();
        let m = numeric_map(&vf, Interval::new(-2.0, 2.0).unwrap(), 0.0, 0.0, 129).unwrap();
        let g = Grid1D::new(-2.0, 2.0, 401).unwrap();
        let phi = SampledFunction::from_fn(g, |y| (-y * y).exp());
        let psi = push_wavefunction(&phi, &m, &vf, &g).unwrap();
        for (a, b) in phi.values.iter().zip(&psi.values) {
            assert!((a - b).abs() < 1e-12);
        }
        let wide = Grid1D::new(-3.0, 2.0, 11).unwrap();
        assert!(matches!(
            push_wavefunction(&phi, &m, &vf, &wide),
            Err(Error::Extrapolation { .. }) | Err(Error::InvalidGrid(_))
        ));
    }

    #[test]
    fn monotone_interpolant_preserves_monotone_data() {
        let g = Grid1D::new(0.0, 1.0, 6).unwrap();
        let s = SampledFunction::new(g, vec![0.0, 0.0, 0.1, 0.9, 1.0, 1.0]).unwrap();
        let p = MonotoneCubic::new(&s);
        let mut last = p.eval(0.0);
        for i in 1..=1000 {
            let v = p.eval(i as f64 / 1000.0);
            assert!(v >= last - 1e-15);
            last = v;
        }
    }
}
