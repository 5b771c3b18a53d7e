//! Special functions: gamma, normalized Bessel functions and the two kernels.

mod bessel;
mod gamma;
mod kernel;
mod params;

pub use bessel::{j_norm, j_norm_ladder};
pub use gamma::{gamma, ln_gamma};
pub use kernel::{dunkl_kernel, dunkl_kernel_dx, kernel_parts, lcdt_kernel, KernelDerivative};
pub use params::{CanonicalMatrix, DunklParameter};

use crate::error::Result;
use crate::scalar::Real;

/// `j_k(x)` for a validated multiplicity parameter.
pub fn bessel_j_norm<T: Real>(k: DunklParameter<T>, x: T) -> Result<T> {
    j_norm(k.value(), x)
}
