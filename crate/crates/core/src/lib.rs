//! Bloch/Floquet analysis of lattice operators that commute with the
//! translations of a coarse sublattice.

pub mod averaging;
pub mod error;
pub mod fourier;
pub mod lattice;
pub mod norms;
pub mod opfunc;
pub mod periodic_op;
pub mod periodization;
pub mod random;
pub mod scaling;
pub mod verify;

pub use error::{Error, Result};
pub use lattice::{FieldVector, LatticeFamily, LatticeKind, LatticeSpec, Shape, Site, Window};
pub use periodic_op::{BlochFiber, CMatrix, MomentumMatrix, PeriodicKernel};
pub use periodization::{ZField, ZKernel, ZKernelCF, ZKernelFC};
