//! fraclab: a numerical laboratory for the fractional Laplacian (-Delta)^s.
//!
//! The operator is implemented through five equivalent representations
//! (singular integral, Fourier multiplier, Balakrishnan semigroup, Dynkin
//! mean-value limit, radial Fourier-Bessel reduction) and cross-validated
//! against closed-form kernels: the fundamental solution, the extension
//! Poisson kernel, the torsion function, ball means, the fractional heat
//! kernel, and the associated Dirichlet form calculus.
//!
//! Conventions: Fourier transform with kernel e^{-2 pi i <xi, x>}, so the
//! multiplier of (-Delta)^s is (2 pi |xi|)^{2s}.

pub mod ball;
pub mod closed_forms;
pub mod error;
pub mod field;
pub mod fracop;
pub mod quad;
pub mod special;

pub use error::{FracError, FracResult};
pub use special::{constants, BesselKind, ConstantSet, FracParams};
