//! Dirac systems with a position-dependent Fermi velocity v_f(x).
//!
//! The second-order equations for the two spinor components become, after
//! y = ∫dx/v_f and ψ = Φ/√v_f, constant-mass Schrödinger equations with SUSY
//! partner potentials V± = W² ± v_f W′. In x they are position-dependent-mass
//! equations with M = 1/v_f². All spectra are in ε = E² − m₀²v₀⁴, ħ = 1.

pub mod analytic;
pub mod catalog;
pub mod eigensolver;
pub mod error;
pub mod model;
pub mod potentials;
pub mod problems;
pub mod susy;
pub mod transform;

pub use error::{Error, Result};
pub use model::{
    Ambiguity, Component, Coordinate, Grid1D, Interval, PartnerPotentials, RealFn, SampledFunction, ScalarField,
    Spectrum, Superpotential, SystemParams, VelocityProfile,
};
