//! Partner-spectrum matching, the first-order intertwiner A = d/dy + W̃ and
//! its adjoint, and the checks built on them.

use crate::catalog::{Scenario, ScenarioKind};
use crate::eigensolver::{RefineOptions, RefinedSpectrum, DEFAULT_SEED};
use crate::error::Result;
use crate::model::{Component, Grid1D, SampledFunction, Spectrum};
use crate::problems::{self, Problem, SolveDomain};

#[derive(Debug, Clone, PartialEq)]
pub struct PairingReport {
    /// (ε⁺ index, ε⁻ index, |ε⁺ − ε⁻ − shift|).
    pub matched: Vec<(usize, usize, f64)>,
    pub unpaired: Vec<(Component, usize, f64)>,
    pub tolerance_used: f64,
    /// Expected offset ε⁺ − ε⁻ of paired levels.
    pub shift: f64,
    /// Levels above this value are ignored: the partner of the highest
    /// level of one list may lie beyond the other list.
    pub ceiling: f64,
    pub pass: bool,
}

/// Match plus-levels against minus-levels offset by `shift`.
///
/// Candidate pairs are claimed in order of increasing mismatch, so no level
/// is used twice. The report passes when at most one level stays unpaired
/// and that level is the ground state of its list.
pub fn pair_levels(plus: &[f64], minus: &[f64], shift: f64, tol: f64) -> PairingReport {
    let top = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ceiling = top(plus).min(top(minus) + shift) + tol;
    let below = |v: &[f64], off: f64| -> Vec<usize> {
        (0..v.len()).filter(|&i| v[i] + off <= ceiling).collect()
    };
    let p_idx = below(plus, 0.0);
    let m_idx = below(minus, shift);
    let mut candidates: Vec<(f64, usize, usize)> = p_idx
        .iter()
        .flat_map(|&i| m_idx.iter().map(move |&j| (i, j)))
        .map(|(i, j)| ((plus[i] - minus[j] - shift).abs(), i, j))
        .filter(|(d, _, _)| *d <= tol)
        .collect();
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut p_used = vec![false; plus.len()];
    let mut m_used = vec![false; minus.len()];
    let mut matched = Vec::new();
    for (d, i, j) in candidates {
        if !p_used[i] && !m_used[j] {
            p_used[i] = true;
            m_used[j] = true;
            matched.push((i, j, d));
        }
    }
    matched.sort_by_key(|&(i, _, _)| i);
    let mut unpaired: Vec<(Component, usize, f64)> = p_idx
        .iter()
        .filter(|&&i| !p_used[i])
        .map(|&i| (Component::Plus, i, plus[i]))
        .collect();
    unpaired.extend(
        m_idx
            .iter()
            .filter(|&&j| !m_used[j])
            .map(|&j| (Component::Minus, j, minus[j])),
    );
    let pass = match unpaired.as_slice() {
        [] => true,
        [(_, index, _)] => *index == 0,
        _ => false,
    };
    PairingReport {
        matched,
        unpaired,
        tolerance_used: tol,
        shift,
        ceiling,
        pass,
    }
}

/// Unshifted partner matching of two spectra.
pub fn check_partner_degeneracy(spec_plus: &Spectrum, spec_minus: &Spectrum, tol: f64) -> PairingReport {
    pair_levels(&spec_plus.eps, &spec_minus.eps, 0.0, tol)
}

/// Expected ε⁺ − ε⁻ of paired levels. The oscillator partners differ by
/// the constant 2dW̃/dy = 2v₀aα, and under Dirichlet conditions at y = 0
/// neither list has a zero mode, so every level pairs after the shift.
pub fn partner_shift(s: &Scenario) -> f64 {
    match s.kind {
        ScenarioKind::ShiftedOscillator { v0, alpha, a, .. } => 2.0 * v0 * a * alpha,
        _ => 0.0,
    }
}

#[derive(Debug, Clone)]
pub struct DegeneracyCheck {
    pub plus: RefinedSpectrum,
    pub minus: RefinedSpectrum,
    pub report: PairingReport,
}

/// Solve both y-space partners on `domain` and pair them with
/// tol = 10 × (largest plus estimate + largest minus estimate).
pub fn check_scenario_degeneracy(
    s: &Scenario,
    domain: SolveDomain,
    k: usize,
    opts: RefineOptions,
    seed: u64,
) -> Result<DegeneracyCheck> {
    let plus = problems::solve(s, Problem::YSpace, Component::Plus, domain, k, opts, seed)?;
    let minus = problems::solve(s, Problem::YSpace, Component::Minus, domain, k, opts, seed)?;
    let tol = 10.0 * (plus.max_error_estimate() + minus.max_error_estimate());
    let report = pair_levels(plus.eps(), minus.eps(), partner_shift(s), tol);
    Ok(DegeneracyCheck { plus, minus, report })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// A = d/dy + W̃, from H⁻ = A†A to H⁺ = AA†.
    MinusToPlus,
    /// A† = −d/dy + W̃.
    PlusToMinus,
}

#[derive(Debug, Clone)]
pub struct IntertwinerOutput {
    pub image: SampledFunction,
    /// Set when h exceeds 1% of the domain length.
    pub warning: Option<String>,
}

fn derivative(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    (0..n)
        .map(|i| {
            if i == 0 {
                (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * h)
            } else if i == n - 1 {
                (3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) / (2.0 * h)
            } else {
                (values[i + 1] - values[i - 1]) / (2.0 * h)
            }
        })
        .collect()
}

/// (±d/dy + W̃)Φ with centered differences inside and second-order
/// one-sided differences at the two ends.
pub fn apply_intertwiner(
    phi: &SampledFunction,
    w_tilde: &dyn Fn(f64) -> f64,
    direction: Direction,
) -> IntertwinerOutput {
    let grid = phi.grid;
    let h = grid.spacing();
    let sign = match direction {
        Direction::MinusToPlus => 1.0,
        Direction::PlusToMinus => -1.0,
    };
    let d = derivative(&phi.values, h);
    let values = (0..grid.len())
        .map(|i| sign * d[i] + w_tilde(grid.node(i)) * phi.values[i])
        .collect();
    let warning = (h > 1e-2 * (grid.hi() - grid.lo()))
        .then(|| format!("grid spacing {h:.3e} is coarse for differentiation on this domain"));
    IntertwinerOutput {
        image: SampledFunction { grid, values },
        warning,
    }
}

/// Discrete L² norm over all nodes with weight h.
fn l2(values: &[f64], h: f64) -> f64 {
    (h * values.iter().map(|v| v * v).sum::<f64>()).sqrt()
}

/// ‖(−d²/dy² + V − ε)g‖/‖g‖ over nodes at least two steps from either end,
/// where one-sided differences in g would dominate the stencil.
pub fn eigen_residual(g: &SampledFunction, v: &dyn Fn(f64) -> f64, eps: f64) -> f64 {
    let grid = g.grid;
    let h = grid.spacing();
    let n = grid.len();
    let vals = &g.values;
    let r: Vec<f64> = (2..n - 2)
        .map(|i| {
            let lap = (vals[i - 1] - 2.0 * vals[i] + vals[i + 1]) / (h * h);
            -lap + (v(grid.node(i)) - eps) * vals[i]
        })
        .collect();
    l2(&r, h) / l2(&vals[2..n - 2], h).max(f64::MIN_POSITIVE)
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntertwiningEntry {
    pub index: usize,
    pub eps: f64,
    /// ‖AΦ‖/‖Φ‖.
    pub image_norm: f64,
    pub residual: f64,
    pub annihilated: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntertwiningReport {
    pub entries: Vec<IntertwiningEntry>,
    pub tolerance: f64,
    pub pass: bool,
}

impl IntertwiningReport {
    pub fn non_annihilated(&self) -> impl Iterator<Item = &IntertwiningEntry> {
        self.entries.iter().filter(|e| !e.annihilated)
    }
}

/// Images with ‖AΦ‖/‖Φ‖ at or below this count as annihilated.
pub const ANNIHILATION_TOL: f64 = 1e-4;

/// Push the lowest `n_states` eigenstates of H⁻ through A and measure how
/// well each image solves H⁺ at the same ε.
pub fn check_intertwining(
    scenario: &Scenario,
    domain: SolveDomain,
    n_states: usize,
    tol: f64,
) -> Result<IntertwiningReport> {
    let opts = RefineOptions::new(domain.n0, 1e-9).with_max_nodes(4 * domain.n0);
    let minus = problems::solve(scenario, Problem::YSpace, Component::Minus, domain, n_states, opts, DEFAULT_SEED)?;
    let v_plus = problems::y_potential(scenario, Component::Plus)?;
    let w = problems::w_tilde(scenario)?;
    let grid: Grid1D = minus.spectrum.grid;
    let entries = minus
        .spectrum
        .states
        .iter()
        .zip(minus.eps())
        .enumerate()
        .map(|(index, (state, &eps))| {
            let phi = SampledFunction {
                grid,
                values: state.clone(),
            };
            let image = apply_intertwiner(&phi, &*w, Direction::MinusToPlus).image;
            let image_norm = l2(&image.values, grid.spacing()) / l2(&phi.values, grid.spacing());
            let annihilated = image_norm <= ANNIHILATION_TOL;
            let residual = if annihilated {
                0.0
            } else {
                eigen_residual(&image, &|y| v_plus.eval(y), eps)
            };
            IntertwiningEntry {
                index,
                eps,
                image_norm,
                residual,
                annihilated,
                pass: annihilated || residual <= tol,
            }
        })
        .collect::<Vec<_>>();
    let pass = entries.iter().all(|e| e.pass);
    Ok(IntertwiningReport {
        entries,
        tolerance: tol,
        pass,
    })
}

/// |⟨AΦ, Ψ⟩ − ⟨Φ, A†Ψ⟩| with trapezoid-free sums h·Σ; exact up to rounding
/// for samples vanishing in the two end cells.
pub fn adjointness_defect(phi: &SampledFunction, psi: &SampledFunction, w_tilde: &dyn Fn(f64) -> f64) -> f64 {
    let h = phi.grid.spacing();
    let a_phi = apply_intertwiner(phi, w_tilde, Direction::MinusToPlus).image;
    let ad_psi = apply_intertwiner(psi, w_tilde, Direction::PlusToMinus).image;
    let lhs: f64 = h * a_phi.values.iter().zip(&psi.values).map(|(a, b)| a * b).sum::<f64>();
    let rhs: f64 = h * phi.values.iter().zip(&ad_psi.values).map(|(a, b)| a * b).sum::<f64>();
    (lhs - rhs).abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_sided_pairing() {
        let plus = [0.0, 5.0 / 144.0, 0.046875, 0.0525];
        let minus = [5.0 / 144.0, 0.046875, 0.0525, 0.0555];
        let r = pair_levels(&plus, &minus, 0.0, 1e-9);
        assert!(r.pass);
        assert_eq!(r.matched.len(), 3);
        assert_eq!(r.unpaired, vec![(Component::Plus, 0, 0.0)]);
    }

    #[test]
    fn collision_guard() {
        // two plus levels near one minus level: only one may claim it
        let r = pair_levels(&[1.0, 1.0 + 1e-7], &[1.0, 5.0], 0.0, 1e-6);
        assert_eq!(r.matched.len(), 1);
        assert!(!r.pass);
    }

    #[test]
    fn shifted_pairing() {
        let r = pair_levels(&[5.0, 9.0, 13.0], &[3.0, 7.0, 11.0], 2.0, 1e-9);
        assert!(r.pass);
        assert!(r.unpaired.is_empty());
    }

    #[test]
    fn annihilates_gaussian() {
        let g = Grid1D::new(-10.0, 10.0, 4001).unwrap();
        let phi = SampledFunction::from_fn(g, |y| (-0.5 * y * y).exp());
        let out = apply_intertwiner(&phi, &|y| y, Direction::MinusToPlus);
        let peak = out.image.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(peak < 1e-5, "{peak}");
        assert!(out.warning.is_none());
    }

    #[test]
    fn first_excited_maps_to_ground_shape() {
        let g = Grid1D::new(-10.0, 10.0, 4001).unwrap();
        let phi = SampledFunction::from_fn(g, |y| y * (-0.5 * y * y).exp());
        let out = apply_intertwiner(&phi, &|y| y, Direction::MinusToPlus);
        for (i, v) in out.image.values.iter().enumerate() {
            let y = g.node(i);
            assert!((v - (-0.5 * y * y).exp()).abs() < 1e-4);
        }
    }

    #[test]
    fn constant_superpotential() {
        let g = Grid1D::new(0.0, 3.0, 3001).unwrap();
        let phi = SampledFunction::from_fn(g, f64::sin);
        let out = apply_intertwiner(&phi, &|_| 0.5, Direction::MinusToPlus);
        for (i, v) in out.image.values.iter().enumerate() {
            let y = g.node(i);
            assert!((v - (y.cos() + 0.5 * y.sin())).abs() < 1e-5);
        }
    }

    #[test]
    fn coarse_grid_warns() {
        let g = Grid1D::new(0.0, 1.0, 11).unwrap();
        let phi = SampledFunction::from_fn(g, f64::sin);
        assert!(apply_intertwiner(&phi, &|_| 0.0, Direction::MinusToPlus).warning.is_some());
    }
}
