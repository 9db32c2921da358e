//! Finite-difference bound states: three-point and flux-form stencils,
//! Sturm bisection for eigenvalues, inverse iteration for eigenvectors and
//! Richardson refinement under grid doubling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::model::{Coordinate, Grid1D, Interval, ScalarField, Spectrum};
use crate::potentials::MassFunction;

/// Relative width at which bisection stops.
pub const BISECTION_REL_TOL: f64 = 1e-12;
/// Absolute width floor for eigenvalues near zero.
pub const BISECTION_ABS_FLOOR: f64 = 1e-14;
/// Largest grid `refine` will build: 2²⁰ intervals.
pub const REFINE_NODE_CAP: usize = (1 << 20) + 1;
/// Residual bound ‖Tu − λu‖∞ ≤ RESIDUAL_REL·‖T‖∞·‖u‖∞.
pub const RESIDUAL_REL: f64 = 1e-8;
/// Seed used when the caller has no preference.
pub const DEFAULT_SEED: u64 = 0x5eed_d1ac;

const INVERSE_MIN_ITERS: usize = 2;
const INVERSE_MAX_ITERS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorForm {
    /// −d²/dξ² + V.
    ConstantMass,
    /// −d/dx (1/M) d/dx + V.
    PdmFlux,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryCondition {
    Dirichlet,
}

/// Gradient form of a stencil: uᵀTu = Σ links_j (u_{j+1} − u_j)² + Σ potential_i u_i²
/// with the Dirichlet zeros included, so `links` has one entry more than
/// `potential`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyForm {
    pub links: Vec<f64>,
    pub potential: Vec<f64>,
}

/// Symmetric tridiagonal matrix over the interior nodes of `grid`.
#[derive(Debug, Clone)]
pub struct DiscretizedOperator {
    pub diag: Vec<f64>,
    pub offdiag: Vec<f64>,
    pub grid: Grid1D,
    pub form: OperatorForm,
    pub bc: BoundaryCondition,
    pub coordinate: Coordinate,
    /// Present for operators assembled from a stencil; used to evaluate
    /// Rayleigh quotients without the O(1/h²) cancellation of uᵀTu.
    pub energy: Option<EnergyForm>,
}

impl DiscretizedOperator {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        let n = self.diag.len();
        (0..n)
            .map(|i| {
                let left = if i > 0 { self.offdiag[i - 1].abs() } else { 0.0 };
                let right = if i + 1 < n { self.offdiag[i].abs() } else { 0.0 };
                self.diag[i].abs() + left + right
            })
            .fold(0.0, f64::max)
    }

    /// T·u on the interior.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let n = self.diag.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * u[i];
                if i > 0 {
                    s += self.offdiag[i - 1] * u[i - 1];
                }
                if i + 1 < n {
                    s += self.offdiag[i] * u[i + 1];
                }
                s
            })
            .collect()
    }

    /// uᵀTu/uᵀu on the interior, from the gradient form when available.
    pub fn rayleigh_quotient(&self, u: &[f64]) -> f64 {
        let uu = dot(u, u);
        match &self.energy {
            Some(e) => {
                let n = u.len();
                let at = |i: usize| if i == 0 || i > n { 0.0 } else { u[i - 1] };
                let grad: f64 = (0..=n).map(|j| e.links[j] * (at(j + 1) - at(j)).powi(2)).sum();
                let pot: f64 = e.potential.iter().zip(u).map(|(v, x)| v * x * x).sum();
                (grad + pot) / uu
            }
            None => dot(u, &self.apply(u)) / uu,
        }
    }

    /// Gershgorin interval containing every eigenvalue.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.diag.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 { self.offdiag[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { self.offdiag[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - left - right);
            hi = hi.max(self.diag[i] + left + right);
        }
        (lo, hi)
    }
}

fn sample_potential(v: &dyn Fn(f64) -> f64, grid: &Grid1D) -> Result<Vec<f64>> {
    (1..grid.len() - 1)
        .map(|i| {
            let x = grid.node(i);
            let value = v(x);
            if value.is_finite() {
                Ok(value)
            } else {
                Err(Error::NonFinitePotential { x, value })
            }
        })
        .collect()
}

/// −d²/dξ² + v with the three-point stencil; `coordinate` tags the variable.
pub fn discretize_constant_mass(
    v: &dyn Fn(f64) -> f64,
    grid: &Grid1D,
    coordinate: Coordinate,
) -> Result<DiscretizedOperator> {
    let h = grid.spacing();
    let inv_h2 = 1.0 / (h * h);
    let values = sample_potential(v, grid)?;
    let diag: Vec<f64> = values.iter().map(|vi| 2.0 * inv_h2 + vi).collect();
    let offdiag = vec![-inv_h2; diag.len() - 1];
    let energy = EnergyForm {
        links: vec![inv_h2; diag.len() + 1],
        potential: values,
    };
    Ok(DiscretizedOperator {
        diag,
        offdiag,
        grid: *grid,
        form: OperatorForm::ConstantMass,
        bc: BoundaryCondition::Dirichlet,
        coordinate,
        energy: Some(energy),
    })
}

/// y-space operator −d²/dy² + v(y).
pub fn discretize_y(v: &dyn Fn(f64) -> f64, grid: &Grid1D) -> Result<DiscretizedOperator> {
    discretize_constant_mass(v, grid, Coordinate::YSpace)
}

/// Conservative flux form −d/dx (1/M) d/dx + v; 1/M is sampled at midpoints.
pub fn discretize_x_pdm(v: &ScalarField, m: &MassFunction, grid: &Grid1D) -> Result<DiscretizedOperator> {
    let h = grid.spacing();
    let inv_h2 = 1.0 / (h * h);
    let n = grid.len();
    let g: Vec<f64> = (0..n - 1)
        .map(|i| {
            let x = 0.5 * (grid.node(i) + grid.node(i + 1));
            let mass = m.eval(x);
            if mass > 0.0 && mass.is_finite() {
                Ok(1.0 / mass)
            } else {
                Err(Error::NonPositiveMass { x, value: mass })
            }
        })
        .collect::<Result<_>>()?;
    let values = sample_potential(&|x| v.eval(x), grid)?;
    let diag = values
        .iter()
        .enumerate()
        .map(|(j, vi)| (g[j] + g[j + 1]) * inv_h2 + vi)
        .collect::<Vec<_>>();
    let offdiag = (1..diag.len()).map(|j| -g[j] * inv_h2).collect();
    let energy = EnergyForm {
        links: g.iter().map(|gj| gj * inv_h2).collect(),
        potential: values,
    };
    Ok(DiscretizedOperator {
        diag,
        offdiag,
        grid: *grid,
        form: OperatorForm::PdmFlux,
        bc: BoundaryCondition::Dirichlet,
        coordinate: Coordinate::XSpace,
        energy: Some(energy),
    })
}

/// Number of eigenvalues strictly below `lambda` (sign changes of the
/// leading principal minors of T − λI).
pub fn sturm_count(diag: &[f64], offdiag: &[f64], lambda: f64) -> usize {
    let max_e2 = offdiag.iter().map(|e| e * e).fold(1.0, f64::max);
    let pivmin = f64::MIN_POSITIVE * max_e2;
    let mut count = 0;
    let mut q = diag[0] - lambda;
    for i in 0.. {
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
        if i + 1 == diag.len() {
            break;
        }
        let e = offdiag[i];
        q = (diag[i + 1] - lambda) - e * e / q;
    }
    count
}

/// The k smallest eigenvalues in ascending order.
pub fn lowest_eigenvalues(op: &DiscretizedOperator, k: usize) -> Result<Vec<f64>> {
    let n = op.dim();
    if k == 0 || k >= n {
        return Err(invalid("k", format!("need 1 <= k < {n}, got {k}")));
    }
    let (glo, ghi) = op.gershgorin();
    let pad = f64::EPSILON * glo.abs().max(ghi.abs()).max(1.0);
    let (glo, ghi) = (glo - pad, ghi + pad);
    let mut out = Vec::with_capacity(k);
    let mut floor = glo;
    for j in 0..k {
        // invariant: count(lo) <= j < count(hi)
        let (mut lo, mut hi) = (floor, ghi);
        for _ in 0..4000 {
            let mid = 0.5 * (lo + hi);
            let width = (BISECTION_REL_TOL * lo.abs().max(hi.abs())).max(BISECTION_ABS_FLOOR);
            if mid <= lo || mid >= hi || hi - lo <= width {
                break;
            }
            if sturm_count(&op.diag, &op.offdiag, mid) > j {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        out.push(0.5 * (lo + hi));
        floor = lo;
    }
    Ok(out)
}

/// LU factors of T − σI with partial pivoting.
struct TridiagLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl TridiagLu {
    fn factor(op: &DiscretizedOperator, shift: f64) -> Self {
        let n = op.dim();
        let mut d: Vec<f64> = op.diag.iter().map(|v| v - shift).collect();
        let mut dl = op.offdiag.clone();
        let mut du = op.offdiag.clone();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        let tiny = f64::EPSILON * op.norm_inf().max(f64::MIN_POSITIVE);
        for i in 0..n - 1 {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = tiny;
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -fact;
                }
                swapped[i] = true;
            }
        }
        if d[n - 1] == 0.0 {
            d[n - 1] = tiny;
        }
        Self { dl, d, du, du2, swapped }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = self.d.len();
        for i in 0..n - 1 {
            if self.swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n >= 2 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// ‖Tu − λu‖∞ / (‖T‖∞·‖u‖∞).
pub fn relative_residual(op: &DiscretizedOperator, lambda: f64, u: &[f64]) -> f64 {
    let tu = op.apply(u);
    let r = tu.iter().zip(u).fold(0.0, |m: f64, (t, v)| m.max((t - lambda * v).abs()));
    r / (op.norm_inf() * norm_inf(u)).max(f64::MIN_POSITIVE)
}

/// The k lowest eigenpairs. States carry the Dirichlet zeros at both ends
/// and satisfy h·Σu² = 1; the first sample above 10⁻⁶ of the peak is
/// positive. With a gradient form the bisection values are replaced by
/// Rayleigh quotients, whose error is quadratic in the eigenvector error
/// and free of the eps·‖T‖ rounding floor of the Sturm recurrence.
pub fn lowest_eigenpairs(op: &DiscretizedOperator, k: usize, seed: u64) -> Result<Spectrum> {
    let mut eps = lowest_eigenvalues(op, k)?;
    let n = op.dim();
    let h = op.grid.spacing();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut found: Vec<Vec<f64>> = Vec::with_capacity(k);
    for index in 0..eps.len() {
        let lambda = eps[index];
        let lu = TridiagLu::factor(op, lambda);
        let mut u: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut residual = f64::INFINITY;
        for it in 0..INVERSE_MAX_ITERS {
            lu.solve(&mut u);
            for prev in &found {
                let c = dot(&u, prev) / dot(prev, prev);
                u.iter_mut().zip(prev).for_each(|(a, b)| *a -= c * b);
            }
            let scale = norm_inf(&u);
            if !(scale > 0.0 && scale.is_finite()) {
                return Err(Error::InverseIterationStagnation { index, residual });
            }
            u.iter_mut().for_each(|v| *v /= scale);
            residual = relative_residual(op, lambda, &u);
            if it + 1 >= INVERSE_MIN_ITERS && residual <= RESIDUAL_REL {
                break;
            }
        }
        if residual > RESIDUAL_REL {
            return Err(Error::InverseIterationStagnation { index, residual });
        }
        let norm = (h * dot(&u, &u)).sqrt();
        u.iter_mut().for_each(|v| *v /= norm);
        let peak = norm_inf(&u);
        if let Some(first) = u.iter().find(|v| v.abs() > 1e-6 * peak) {
            if *first < 0.0 {
                u.iter_mut().for_each(|v| *v = -*v);
            }
        }
        if op.energy.is_some() {
            eps[index] = op.rayleigh_quotient(&u);
        }
        found.push(u);
    }
    let states = found
        .into_iter()
        .map(|u| {
            let mut full = Vec::with_capacity(n + 2);
            full.push(0.0);
            full.extend(u);
            full.push(0.0);
            full
        })
        .collect::<Vec<_>>();
    Ok(Spectrum {
        component: None,
        coordinate: op.coordinate,
        grid: op.grid,
        norms: vec![1.0; states.len()],
        eps,
        states,
    })
}

/// Grid-doubling schedule for `refine`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefineOptions {
    pub n0: usize,
    pub target_tol: f64,
    /// Finest grid allowed; clipped to `REFINE_NODE_CAP`.
    pub max_nodes: usize,
}

impl RefineOptions {
    pub fn new(n0: usize, target_tol: f64) -> Self {
        Self {
            n0,
            target_tol,
            max_nodes: REFINE_NODE_CAP,
        }
    }

    pub fn with_max_nodes(mut self, max_nodes: usize) -> Self {
        self.max_nodes = max_nodes;
        self
    }
}

/// Extrapolated spectrum with per-level error estimates.
#[derive(Debug, Clone)]
pub struct RefinedSpectrum {
    /// Eigenvalues are the Richardson values (4λ_fine − λ_coarse)/3;
    /// states come from the finest grid.
    pub spectrum: Spectrum,
    /// |λ_fine − λ_coarse|/3 per level.
    pub error_estimates: Vec<f64>,
    pub fine: Vec<f64>,
    pub coarse: Vec<f64>,
    /// Set when the schedule stopped at the node cap before reaching
    /// `target_tol`.
    pub warning: Option<String>,
}

impl RefinedSpectrum {
    pub fn eps(&self) -> &[f64] {
        &self.spectrum.eps
    }

    pub fn converged(&self) -> bool {
        self.warning.is_none()
    }

    pub fn nodes(&self) -> usize {
        self.spectrum.grid.len()
    }

    pub fn max_error_estimate(&self) -> f64 {
        self.error_estimates.iter().fold(0.0, |m, &e| m.max(e))
    }
}

/// Solve on n and 2n−1 nodes, doubling until every error estimate is below
/// the target. Stops early, with a warning, when the next grid would exceed
/// the node cap or when the largest estimate stops shrinking (rounding
/// floor); the previous, better level is returned in the latter case.
pub fn refine(
    builder: &dyn Fn(&Grid1D) -> Result<DiscretizedOperator>,
    lo: f64,
    hi: f64,
    k: usize,
    opts: RefineOptions,
    seed: u64,
) -> Result<RefinedSpectrum> {
    let cap = opts.max_nodes.min(REFINE_NODE_CAP);
    let mut grid = Grid1D::new(lo, hi, opts.n0)?;
    if grid.refined().len() > cap {
        return Err(invalid(
            "n0",
            format!("one doubling of {} nodes exceeds the cap of {cap}", opts.n0),
        ));
    }
    let max = |v: &[f64]| v.iter().fold(0.0f64, |m, &e| m.max(e));
    let mut coarse = lowest_eigenpairs(&builder(&grid)?, k, seed)?.eps;
    let mut best: Option<RefinedSpectrum> = None;
    loop {
        let fine_grid = grid.refined();
        let mut spectrum = lowest_eigenpairs(&builder(&fine_grid)?, k, seed)?;
        let fine = spectrum.eps.clone();
        let errors: Vec<f64> = fine.iter().zip(&coarse).map(|(f, c)| (f - c).abs() / 3.0).collect();
        if let Some(prev) = best.take() {
            if max(&errors) >= prev.max_error_estimate() {
                let warning = format!(
                    "error estimate stopped decreasing at {} nodes ({:.3e} >= {:.3e}); target {:.3e} not reached",
                    fine_grid.len(),
                    max(&errors),
                    prev.max_error_estimate(),
                    opts.target_tol
                );
                return Ok(RefinedSpectrum {
                    warning: Some(warning),
                    ..prev
                });
            }
        }
        spectrum.eps = fine.iter().zip(&coarse).map(|(f, c)| (4.0 * f - c) / 3.0).collect();
        let done = errors.iter().all(|&e| e < opts.target_tol);
        let next_too_big = fine_grid.refined().len() > cap;
        let warning = (!done && next_too_big).then(|| {
            format!(
                "node cap {cap} reached at {} nodes; largest error estimate {:.3e} exceeds {:.3e}",
                fine_grid.len(),
                max(&errors),
                opts.target_tol
            )
        });
        let level = RefinedSpectrum {
            spectrum,
            error_estimates: errors,
            fine: fine.clone(),
            coarse,
            warning,
        };
        if done || next_too_big {
            return Ok(level);
        }
        best = Some(level);
        grid = fine_grid;
        coarse = fine;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtremumKind {
    Minimum,
    Maximum,
    /// v″ vanishes to finite-difference accuracy.
    Stationary,
}

impl ExtremumKind {
    pub fn label(self) -> &'static str {
        match self {
            ExtremumKind::Minimum => "min",
            ExtremumKind::Maximum => "max",
            ExtremumKind::Stationary => "stationary",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum {
    pub x: f64,
    pub value: f64,
    pub kind: ExtremumKind,
}

pub const EXTREMA_SUBINTERVALS: usize = 10_000;
pub const EXTREMUM_X_TOL: f64 = 1e-8;

/// Zeros of v′ on a bounded domain, bracketed on a uniform partition and
/// bisected; the kind comes from a centered difference of v′.
pub fn find_extrema(v: &ScalarField, domain: Interval) -> Result<Vec<Extremum>> {
    let d1 = v.derivative(1).cloned().ok_or(Error::MissingDerivative {
        what: "potential".into(),
        order: 1,
    })?;
    if !domain.is_bounded() {
        return Err(invalid("domain", "extremum search needs a bounded interval"));
    }
    let (lo, hi) = (domain.lo, domain.hi);
    let step = (hi - lo) / EXTREMA_SUBINTERVALS as f64;
    let node = |i: usize| if i == EXTREMA_SUBINTERVALS { hi } else { lo + step * i as f64 };
    let classify = |x: f64| {
        let delta = 1e-5 * x.abs().max(1.0);
        let curvature = (d1(x + delta) - d1(x - delta)) / (2.0 * delta);
        let kind = if curvature > 1e-9 {
            ExtremumKind::Minimum
        } else if curvature < -1e-9 {
            ExtremumKind::Maximum
        } else {
            ExtremumKind::Stationary
        };
        Extremum { x, value: v.eval(x), kind }
    };
    let mut out: Vec<Extremum> = Vec::new();
    let mut left = d1(node(0));
    for i in 0..EXTREMA_SUBINTERVALS {
        let (a, b) = (node(i), node(i + 1));
        let right = d1(b);
        if left == 0.0 {
            if out.last().is_none_or(|e| e.x != a) {
                out.push(classify(a));
            }
        } else if right != 0.0 && left.signum() != right.signum() {
            let (mut p, mut q, mut fp) = (a, b, left);
            while q - p > EXTREMUM_X_TOL {
                let m = 0.5 * (p + q);
                let fm = d1(m);
                if fm == 0.0 {
                    p = m;
                    q = m;
                    break;
                }
                if fm.signum() == fp.signum() {
                    p = m;
                    fp = fm;
                } else {
                    q = m;
                }
            }
            out.push(classify(0.5 * (p + q)));
        }
        left = right;
    }
    if left == 0.0 && out.last().is_none_or(|e| e.x != hi) {
        out.push(classify(hi));
    }
    Ok(out)
}
