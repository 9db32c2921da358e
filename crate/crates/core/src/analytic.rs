//! Closed-form spectra and eigenfunctions of the four solvable systems,
//! with the special functions they need.

use std::f64::consts::{PI, SQRT_2};

use crate::error::{invalid, Error, Result};
use crate::model::{real_fn, Component, RealFn, SystemParams};

/// Physicists' Hermite polynomial by the three-term recurrence.
pub fn hermite(n: i32, x: f64) -> Result<f64> {
    if n < 0 {
        return Err(invalid("n", format!("Hermite degree must be >= 0, got {n}")));
    }
    Ok(hermite_unchecked(n as u32, x))
}

fn hermite_unchecked(n: u32, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, 2.0 * x);
    if n == 0 {
        return prev;
    }
    for k in 1..n {
        let next = 2.0 * x * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

fn non_positive_integer(v: f64) -> Option<u64> {
    (v <= 0.0 && v.fract() == 0.0).then(|| (-v) as u64)
}

/// Kummer's confluent hypergeometric function M(a, b, z) = ₁F₁(a; b; z).
///
/// Sums exactly when `a` is a non-positive integer; otherwise sums to a
/// relative tolerance of 1e-12.
pub fn kummer_m(a: f64, b: f64, z: f64) -> Result<f64> {
    let a_terms = non_positive_integer(a);
    if let Some(nb) = non_positive_integer(b) {
        match a_terms {
            Some(na) if na < nb => {}
            _ => {
                return Err(Error::Hypergeometric(format!(
                    "b = {b} is a non-positive integer and the series does not terminate first"
                )))
            }
        }
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    if let Some(na) = a_terms {
        for k in 0..na {
            let kf = k as f64;
            term *= (a + kf) / (b + kf) * z / (kf + 1.0);
            sum += term;
        }
        return Ok(sum);
    }
    for k in 0..100_000u32 {
        let kf = k as f64;
        term *= (a + kf) / (b + kf) * z / (kf + 1.0);
        sum += term;
        if term.abs() <= 1e-12 * sum.abs() && kf > z.abs() {
            return Ok(sum);
        }
        if !sum.is_finite() {
            break;
        }
    }
    Err(Error::Hypergeometric(format!(
        "series for M({a}, {b}, {z}) did not converge"
    )))
}

/// Whittaker M_{k,m}(z) = z^{m+1/2} e^{−z/2} M(m − k + 1/2, 2m + 1, z).
pub fn whittaker_m(k: f64, m: f64, z: f64) -> Result<f64> {
    let kummer = kummer_m(m - k + 0.5, 2.0 * m + 1.0, z)?;
    Ok(z.powf(m + 0.5) * (-0.5 * z).exp() * kummer)
}

/// Parameters of −Λ″ + (p² + q/s + r/s²)Λ = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantizationInput {
    pub q: f64,
    pub r: f64,
}

impl QuantizationInput {
    pub fn new(q: f64, r: f64) -> Result<Self> {
        if 1.0 + 4.0 * r < 0.0 {
            return Err(invalid("r", format!("need 1 + 4r >= 0, got r = {r}")));
        }
        Ok(Self { q, r })
    }
}

/// Decay rates p(n) = −q/(2n + 1 + √(1+4r)) allowed by the terminating
/// condition q/(2p) + (1 + √(1+4r))/2 = −n. Empty when q ≥ 0.
pub fn solve_quantization(inp: QuantizationInput, n_max: usize) -> Vec<(usize, f64)> {
    if inp.q >= 0.0 {
        return Vec::new();
    }
    let root = (1.0 + 4.0 * inp.r).sqrt();
    (0..n_max)
        .map(|n| (n, -inp.q / (2.0 * n as f64 + 1.0 + root)))
        .collect()
}

/// A closed-form level; `eigenfunction` is in the system's natural
/// coordinate (y for the transformed systems, x for CPRS) and is
/// unnormalized unless noted.
#[derive(Clone)]
pub struct AnalyticLevel {
    pub n: u32,
    pub eps: f64,
    pub component: Component,
    pub eigenfunction: RealFn,
}

impl std::fmt::Debug for AnalyticLevel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AnalyticLevel")
            .field("n", &self.n)
            .field("eps", &self.eps)
            .field("component", &self.component)
            .finish()
    }
}

impl AnalyticLevel {
    pub fn energy_squared(&self, system: &SystemParams) -> f64 {
        self.eps + system.rest_energy_sq()
    }
}

/// ε_n = a²n² + ω₀², n = 1..=n_max, with the infinite-well states
/// √(2|a|/π)·sin(any) (n even) or cos(any) (n odd) on (−π/2|a|, π/2|a|).
pub fn free_particle_levels(a: f64, omega0: f64, component: Component, n_max: u32) -> Result<Vec<AnalyticLevel>> {
    if a == 0.0 {
        return Err(invalid("a", "must be non-zero"));
    }
    let k_unit = a.abs();
    let norm = (2.0 * k_unit / PI).sqrt();
    Ok((1..=n_max)
        .map(|n| {
            let k = k_unit * n as f64;
            let eigenfunction = if n % 2 == 0 {
                real_fn(move |y| norm * (k * y).sin())
            } else {
                real_fn(move |y| norm * (k * y).cos())
            };
            AnalyticLevel {
                n,
                eps: a * a * (n * n) as f64 + omega0 * omega0,
                component,
                eigenfunction,
            }
        })
        .collect())
}

/// x-space free-particle states ψ_n(x) = Φ_n(atan(ax)/a)/√(1 + a²x²).
pub fn free_particle_x_state(a: f64, n: u32) -> RealFn {
    let k = a.abs() * n as f64;
    let norm = (2.0 * a.abs() / PI).sqrt();
    real_fn(move |x| {
        let y = (a * x).atan() / a;
        let phi = if n.is_multiple_of(2) { (k * y).sin() } else { (k * y).cos() };
        norm * phi / (1.0 + a * a * x * x).sqrt()
    })
}

/// Half-line oscillator level with both the literally stated and the
/// re-derived eigenvalue.
#[derive(Debug, Clone)]
pub struct OscillatorLevel {
    /// `eps` is the re-derived value √2ω(n+½) ± ω/√2.
    pub level: AnalyticLevel,
    /// ω(n+½) ± ω²/2 as printed in the source formula.
    pub eps_paper: f64,
    /// `|eps_paper − eps_derived|` exceeds the relative tolerance.
    pub discrepant: bool,
}

impl OscillatorLevel {
    pub fn eps_derived(&self) -> f64 {
        self.level.eps
    }
}

/// Dirichlet-at-0 states of −Φ″ + [(ω²/2)y² ± ω/√2]Φ, odd n = 1, 3, ...,
/// the first `count` of them. Eigenfunctions are normalized on the
/// half-line with the length scale y₀ = (√2/ω)^{1/2}.
pub fn half_oscillator_levels(omega: f64, component: Component, count: usize, tol: f64) -> Result<Vec<OscillatorLevel>> {
    if !(omega > 0.0) {
        return Err(invalid("omega", format!("must be > 0, got {omega}")));
    }
    let sign = component.sign();
    let y0 = (SQRT_2 / omega).sqrt();
    Ok((0..count)
        .map(|j| {
            let n = 2 * j as u32 + 1;
            let nf = n as f64;
            let eps_derived = SQRT_2 * omega * (nf + 0.5) + sign * omega / SQRT_2;
            let eps_paper = omega * (nf + 0.5) + sign * 0.5 * omega * omega;
            let discrepant = (eps_paper - eps_derived).abs() > tol * (1.0 + eps_derived.abs());
            let factorial: f64 = (1..=n).map(f64::from).product();
            let norm = (2.0 / (PI.sqrt() * 2f64.powi(n as i32) * factorial * y0)).sqrt();
            let eigenfunction =
                real_fn(move |y| norm * (-y * y / (2.0 * y0 * y0)).exp() * hermite_unchecked(n, y / y0));
            OscillatorLevel {
                level: AnalyticLevel {
                    n,
                    eps: eps_derived,
                    component,
                    eigenfunction,
                },
                eps_paper,
                discrepant,
            }
        })
        .collect())
}

/// Half-line Coulomb levels on (0, ∞).
///
/// Upper: ε = 1/(4l²) − 1/(4(n+l)²), Φ₊ ∝ M_{n+l, l−1/2}(y/(n+l)).
/// Lower: ε = 1/(4l²) − 1/(4(n+l+1)²),
/// Φ₋ ∝ y^{l+1} e^{−y/(2(n+l+1))} M(−n, 2l+2, y/(n+l+1)).
pub fn coulomb_levels(l: f64, component: Component, n_max: u32) -> Result<Vec<AnalyticLevel>> {
    if l <= 0.5 {
        return Err(invalid("l", format!("must exceed 1/2, got {l}")));
    }
    (0..n_max)
        .map(|n| {
            let nf = n as f64;
            let (eps, eigenfunction) = match component {
                Component::Plus => {
                    let scale = nf + l;
                    let f = real_fn(move |y: f64| {
                        whittaker_m(scale, l - 0.5, y / scale).expect("terminating series")
                    });
                    (0.25 / (l * l) - 0.25 / (scale * scale), f)
                }
                Component::Minus => {
                    let scale = nf + l + 1.0;
                    let f = real_fn(move |y: f64| {
                        y.powf(l + 1.0)
                            * (-0.5 * y / scale).exp()
                            * kummer_m(-nf, 2.0 * l + 2.0, y / scale).expect("terminating series")
                    });
                    (0.25 / (l * l) - 0.25 / (scale * scale), f)
                }
            };
            Ok(AnalyticLevel {
                n,
                eps,
                component,
                eigenfunction,
            })
        })
        .collect()
}

/// Whether l sits inside the lower-component convergence window
/// −1/(2τ) < l < 1/(2τ), τ² = ε. Advisory only.
pub fn coulomb_lower_window_ok(l: f64, eps: f64) -> bool {
    eps <= 0.0 || l.abs() < 0.5 / eps.sqrt()
}

/// P_n(x): 1 for n = 0, H_n + 4nH_{n−2} + 4n(n−3)H_{n−4} for n ≥ 3.
pub fn cprs_polynomial(n: u32, x: f64) -> Result<f64> {
    match n {
        0 => Ok(1.0),
        1 | 2 => Err(invalid("n", "n = 1, 2 are not in the CPRS spectrum")),
        _ => {
            let nf = n as f64;
            let h4 = if n >= 4 { hermite_unchecked(n - 4, x) } else { 0.0 };
            Ok(hermite_unchecked(n, x)
                + 4.0 * nf * hermite_unchecked(n - 2, x)
                + 4.0 * nf * (nf - 3.0) * h4)
        }
    }
}

/// Constant-mass levels of −d²/dx² + x² + 8(2x²−1)/(2x²+1)²:
/// ξ_n = 2n − 3 for n ∈ {0, 3, 4, 5, ...}, the first `count` of them.
pub fn cprs_levels(count: usize) -> Vec<AnalyticLevel> {
    std::iter::once(0)
        .chain(3..)
        .take(count)
        .map(|n: u32| AnalyticLevel {
            n,
            eps: 2.0 * n as f64 - 3.0,
            component: Component::Minus,
            eigenfunction: real_fn(move |x: f64| {
                cprs_polynomial(n, x).expect("index in spectrum") / (2.0 * x * x + 1.0)
                    * (-0.5 * x * x).exp()
            }),
        })
        .collect()
}
