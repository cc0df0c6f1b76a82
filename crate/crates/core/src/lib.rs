//! Cappell-Miller torsion for finite bi-graded cochain complexes.
//!
//! A bi-graded complex carries two anticommuting-degree differentials: `d` of
//! degree +1 and `dstar` of degree -1, neither required to be the adjoint of
//! the other. The sharp Laplacians `(d + dstar)^2` are then generally
//! non-normal, and the torsion of the complex is a complex scalar (a
//! coordinate on a determinant line) rather than a positive real.
//!
//! The crate provides:
//!
//! * [`linalg`]: dense complex linear algebra: rank-revealing kernels and
//!   generalized-eigenspace spectral projectors for non-normal matrices;
//! * [`detline`]: determinant-line bookkeeping: wedge coordinates, the
//!   torsion isomorphisms of a based complex, fusion and flip;
//! * [`bicomplex`]: bi-graded complexes, spectral cutoff subcomplexes, and
//!   the torsion coordinate with its cutoff-independence;
//! * [`chirality`]: degree-reversing involutions, sharp differentials, the
//!   doubled operator and its determinant comparisons;
//! * [`models`]: 1D cellular models (circle, interval, splices) with flat
//!   coefficients and Mayer-Vietoris determinant-line isomorphisms;
//! * [`zeta`]: Hurwitz-zeta evaluation and closed-form zeta-regularized
//!   determinants for shifted-lattice spectra, including the analytic gluing
//!   check on the split circle.

pub mod bicomplex;
pub mod chirality;
pub mod detline;
pub mod error;
pub mod linalg;
pub mod models;
pub mod zeta;

pub use error::{Error, Result};
pub use linalg::{CMatrix, CVector, ToleranceConfig};
