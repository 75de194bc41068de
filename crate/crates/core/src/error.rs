use num_complex::Complex64;
use thiserror::Error;

use crate::lattice::LatticeKind;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid lattice parameters: {0}")]
    InvalidSpec(String),

    #[error("{period_name} = {period} does not divide {extent_name} = {extent}")]
    Divisibility {
        period_name: &'static str,
        period: usize,
        extent_name: &'static str,
        extent: usize,
    },

    #[error("lattice mismatch: expected {expected:?}, found {found:?}")]
    LatticeMismatch {
        expected: LatticeKind,
        found: LatticeKind,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("kernel is not invariant under coarse translations (deviation {deviation:e}, tolerance {tolerance:e})")]
    NotPeriodic { deviation: f64, tolerance: f64 },

    #[error("dual-coarse class {class:?} is represented more than once")]
    DuplicateClass { class: Vec<i64> },

    #[error("dual-coarse class {class:?} has no representative")]
    MissingClass { class: Vec<i64> },

    #[error("support radius {radius} overlaps itself on axis {axis} of the torus (extent {extent})")]
    SupportExceedsWindow {
        axis: usize,
        radius: usize,
        extent: usize,
    },

    #[error("fiber function is not quasi-periodic: defect {defect:e} at probe k = {k:?}")]
    QuasiPeriodicity { defect: f64, k: Vec<Complex64> },

    #[error("period ratio on axis {axis} is {value}; the rectangle profile needs an odd ratio")]
    EvenPeriod { axis: usize, value: usize },

    #[error("resolvent is numerically singular at zeta = {zeta}, k = {k:?} (condition estimate {condition:e})")]
    Singular {
        zeta: Complex64,
        k: Vec<Complex64>,
        condition: f64,
    },

    #[error("contour passes within {distance:e} of the spectrum point {eigenvalue} (clearance threshold {threshold:e})")]
    ContourClearance {
        eigenvalue: Complex64,
        distance: f64,
        threshold: f64,
    },

    #[error("spectrum point {eigenvalue} lies outside the contour")]
    SpectrumNotEnclosed { eigenvalue: Complex64 },

    #[error("contour quadrature did not converge: change {change:e} after {nodes} nodes (tolerance {tolerance:e})")]
    NotConverged {
        nodes: usize,
        change: f64,
        tolerance: f64,
    },

    #[error("invalid contour: {0}")]
    InvalidContour(String),

    #[error("momentum {value} is not on the dual block lattice (axis {axis})")]
    OffLattice { axis: usize, value: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
